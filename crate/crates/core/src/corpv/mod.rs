//! Corruption-robust projected volume with a known budget `c̄`.
//!
//! Explore queries are buffered per epoch; after `τ` of them a separating cut
//! (found by Perceptron against the protected region) shrinks the knowledge
//! set. See [`EpochState`] and [`separating_cut`].

mod cut;
mod epoch;

use serde::{Deserialize, Serialize};

pub use cut::{protected_point_below, separating_cut, CheckStrategy, CutOptions, CutReport};
pub use epoch::{EpochReport, EpochState, ExploreRecord, UpdateOutcome};
pub(crate) use epoch::refine_split;

use crate::behaviors::Branch;
use crate::geometry::CentroidOptions;
use crate::losses::{LossKind, NoiseModel};
use crate::rng::{indexed, Rng};
use crate::{Error, Result, Vector};

/// All derived constants of the algorithm for a given `(d, ε, c̄)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AlgoParams {
    pub dim: usize,
    pub eps: f64,
    /// Working corruption bound `c̄` (already doubled in bounded mode).
    pub budget: usize,
    /// Small-dimension width threshold `δ = ε/(4(d+√d))`.
    pub delta: f64,
    /// `ν̄ = (ε − 2√d·δ)/(4√d)`: landmark offset and centroid tolerance.
    pub nu_hi: f64,
    /// `ν̲ = √d·δ` plus the noise cap `Ξ` in bounded mode.
    pub nu_lo: f64,
    /// Margin used in undesirability: midpoint of `(ν̲, ν̄)`.
    pub nu: f64,
    /// Sampling radius around landmarks.
    pub zeta: f64,
    /// Explore records per epoch `τ = 2d·c̄·(d+1) + 1`.
    pub tau: usize,
    /// Perceptron mistake cap `(d−1)/(ζ²·ln²(3/2))`.
    pub mistake_cap: f64,
    /// Noise cap `Ξ` added to `ν̲` (0 outside bounded rationality).
    pub margin_shift: f64,
    pub loss: LossKind,
    pub noise: NoiseModel,
    pub cut: CutOptions,
}

impl AlgoParams {
    pub fn new(dim: usize, eps: f64, budget: usize) -> Result<Self> {
        Self::build(dim, eps, budget, 0.0)
    }

    /// Bounded-rationality tuning: the margin floor moves up by `Ξ` and the
    /// working budget doubles. Fails when `ν̲ + Ξ ≥ ν̄`.
    pub fn bounded(dim: usize, eps: f64, budget: usize, xi: f64) -> Result<Self> {
        if !(xi >= 0.0) {
            return Err(Error::Config("noise cap must be nonnegative".into()));
        }
        Self::build(dim, eps, 2 * budget, xi)
    }

    fn build(dim: usize, eps: f64, budget: usize, shift: f64) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Config("dimension must be positive".into()));
        }
        if !(eps > 0.0 && eps.is_finite()) {
            return Err(Error::Config("eps must be positive".into()));
        }
        let d = dim as f64;
        let rd = d.sqrt();
        let delta = eps / (4.0 * (d + rd));
        let nu_hi = (eps - 2.0 * rd * delta) / (4.0 * rd);
        let nu_lo = rd * delta + shift;
        if nu_lo >= nu_hi {
            return Err(Error::Config(format!(
                "margin floor {nu_lo} is not below the landmark offset {nu_hi}; noise too large for eps"
            )));
        }
        let zeta = nu_hi;
        let ln = 1.5f64.ln();
        Ok(Self {
            dim,
            eps,
            budget,
            delta,
            nu_hi,
            nu_lo,
            nu: 0.5 * (nu_lo + nu_hi),
            zeta,
            tau: 2 * dim * budget * (dim + 1) + 1,
            mistake_cap: (d - 1.0) / (zeta * zeta * ln * ln),
            margin_shift: shift,
            loss: LossKind::EpsBall { eps },
            noise: NoiseModel::None,
            cut: CutOptions::default(),
        })
    }

    pub fn with_loss(mut self, loss: LossKind, noise: NoiseModel) -> Self {
        self.loss = loss;
        self.noise = noise;
        self
    }

    /// Landmark-pigeonhole threshold `c̄·(d+1) + 1`.
    pub fn landmark_threshold(&self) -> usize {
        self.budget * (self.dim + 1) + 1
    }

    pub fn centroid_options(&self) -> CentroidOptions {
        CentroidOptions::default()
    }
}

/// `⌈2·log₂(T/β)⌉`, the per-layer budget of the agnostic variant.
pub fn agnostic_budget(horizon: usize, beta: f64) -> usize {
    (2.0 * (horizon as f64 / beta).log2()).ceil().max(0.0) as usize
}

/// A query chosen for one round. `omega_raw` is the learner's value before
/// clamping into `Ω = [0, 1]`; explore records use it.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Decision {
    pub branch: Branch,
    pub omega_raw: f64,
    pub omega: f64,
    /// Layer that produced the query (agnostic variant only).
    pub layer: Option<usize>,
}

impl Decision {
    pub fn new(branch: Branch, omega_raw: f64, layer: Option<usize>) -> Self {
        Self { branch, omega_raw, omega: omega_raw.clamp(0.0, 1.0), layer }
    }
}

/// The known-budget learner: one epoch state plus its random streams.
pub struct CorPvKnown {
    params: AlgoParams,
    state: EpochState,
    cut_rng: Rng,
    centroid_rng: Rng,
    reports: Vec<EpochReport>,
}

impl CorPvKnown {
    pub fn new(params: AlgoParams, seed: u64) -> Result<Self> {
        Self::with_streams(params, indexed(seed, "corpv/cut", 1), indexed(seed, "corpv/centroid", 1))
    }

    pub fn with_streams(params: AlgoParams, cut_rng: Rng, mut centroid_rng: Rng) -> Result<Self> {
        if params.dim < 2 {
            return Err(Error::Config("the corruption-robust learner needs d ≥ 2".into()));
        }
        let state = EpochState::initial(&params, &mut centroid_rng)?;
        Ok(Self { params, state, cut_rng, centroid_rng, reports: Vec::new() })
    }

    pub fn params(&self) -> &AlgoParams {
        &self.params
    }

    pub fn state(&self) -> &EpochState {
        &self.state
    }

    pub fn reports(&self) -> &[EpochReport] {
        &self.reports
    }

    pub fn query(&self, x: &Vector) -> Result<Decision> {
        self.state.step(&self.params, x)
    }

    /// Feed back the outcome of a query from [`query`](Self::query). Explore
    /// rounds are recorded; a full epoch triggers the cut and the update.
    pub fn observe(&mut self, round: usize, x: &Vector, decision: &Decision, y: i8) -> Result<Option<&EpochReport>> {
        if decision.branch != Branch::Explore {
            return Ok(None);
        }
        let full = self.state.record_explore(&self.params, x, decision.omega_raw, y, round)?;
        if !full {
            return Ok(None);
        }
        let report = separating_cut(&self.state, &self.params, &mut self.cut_rng)?;
        let (next, outcome) = self.state.epoch_update(&self.params, &report.cut, &mut self.centroid_rng)?;
        let ended = std::mem::replace(&mut self.state, next);
        self.reports.push(EpochReport::new(ended, &self.state, report, outcome, round));
        Ok(self.reports.last())
    }

    pub fn into_reports(self) -> Vec<EpochReport> {
        self.reports
    }
}
