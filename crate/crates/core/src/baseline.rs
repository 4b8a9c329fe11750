//! ProjectedVolume without corruption handling: query the approximate
//! centroid of the cylindrified body and cut on every explore answer.
//!
//! Used as a comparison point and to show how a single wrong answer can cut
//! the true parameter away for good.

use crate::behaviors::Branch;
use crate::corpv::{refine_split, AlgoParams, Decision};
use crate::geometry::{approx_centroid, CentroidOptions, Cylinder, DimensionSplit, Halfspace, KnowledgeSet};
use crate::losses::exploit_query;
use crate::losses::{LossKind, NoiseModel};
use crate::rng::{substream, Rng};
use crate::{Error, Result, Vector};

/// `δ′ = ε²/(16d(d+1)²)`.
pub fn delta_prime(dim: usize, eps: f64) -> f64 {
    let d = dim as f64;
    eps * eps / (16.0 * d * (d + 1.0) * (d + 1.0))
}

#[derive(Clone, Debug)]
pub struct PvState {
    eps: f64,
    delta_prime: f64,
    centroid_tol: f64,
    loss: LossKind,
    noise: NoiseModel,
    body: KnowledgeSet,
    split: DimensionSplit,
    cyl: Cylinder,
    kappa: Vector,
    explores: usize,
    rng: Rng,
}

impl PvState {
    pub fn new(dim: usize, eps: f64, seed: u64) -> Result<Self> {
        Self::with_body(KnowledgeSet::unit_ball(dim), eps, substream(seed, "baseline/centroid"))
    }

    /// Start from an arbitrary nonempty body inside the unit ball.
    pub fn with_body(body: KnowledgeSet, eps: f64, rng: Rng) -> Result<Self> {
        let dim = body.dim();
        // Same centroid accuracy as the robust learner at this (d, ε); the
        // δ′/4 the analysis would ask for is far beyond a sampling estimate.
        let centroid_tol = AlgoParams::new(dim, eps, 0)?.nu_hi;
        let delta_prime = delta_prime(dim, eps);
        let split = DimensionSplit::initial(dim, delta_prime);
        let cyl = Cylinder::with_large(&body, &split.small, split.large.clone())?;
        let mut st = Self {
            eps,
            delta_prime,
            centroid_tol,
            loss: LossKind::EpsBall { eps },
            noise: NoiseModel::None,
            body,
            split,
            cyl,
            kappa: Vector::zeros(dim),
            explores: 0,
            rng,
        };
        st.recenter()?;
        Ok(st)
    }

    pub fn with_loss(mut self, loss: LossKind, noise: NoiseModel) -> Self {
        self.loss = loss;
        self.noise = noise;
        self
    }

    fn recenter(&mut self) -> Result<()> {
        self.cyl = Cylinder::with_large(&self.body, &self.split.small, self.split.large.clone())?;
        self.kappa = approx_centroid(&self.cyl, &mut self.rng, self.centroid_tol, CentroidOptions::default())?;
        Ok(())
    }

    pub fn delta_prime(&self) -> f64 {
        self.delta_prime
    }

    pub fn body(&self) -> &KnowledgeSet {
        &self.body
    }

    pub fn split(&self) -> &DimensionSplit {
        &self.split
    }

    pub fn kappa(&self) -> &Vector {
        &self.kappa
    }

    /// Explore rounds so far (one cut each).
    pub fn explores(&self) -> usize {
        self.explores
    }

    /// Exploit when `Cyl(K, S)` is `ε`-narrow along `x`, else explore at `⟨x, κ⟩`.
    pub fn query(&self, x: &Vector) -> Result<Decision> {
        if (x.norm() - 1.0).abs() > 1e-9 {
            return Err(Error::invalid("context must be a unit vector"));
        }
        if self.split.large.is_empty() || self.cyl.width(x)? <= self.eps {
            let omega = exploit_query(self.loss, self.noise, &self.body, x, Some(x.dot(&self.kappa)))?;
            Ok(Decision::new(Branch::Exploit, omega, None))
        } else {
            Ok(Decision::new(Branch::Explore, x.dot(&self.kappa), None))
        }
    }

    /// Cut at the posted query on explore rounds. An empty body (possible
    /// once an answer was corrupted) is reported, not repaired.
    pub fn observe(&mut self, x: &Vector, decision: &Decision, y: i8) -> Result<()> {
        if decision.branch != Branch::Explore {
            return Ok(());
        }
        let cut = match y {
            1 => Halfspace::upper(x, decision.omega)?,
            -1 => Halfspace::lower(x, decision.omega)?,
            _ => return Err(Error::invalid("feedback must be ±1")),
        };
        let body = self.body.with_cut(cut.clone());
        if body.is_empty() {
            return Err(Error::EmptyKnowledgeSet);
        }
        let (split, _) = refine_split(&self.split, &body, cut.normal(), self.delta_prime)?;
        self.body = body;
        self.split = split;
        self.explores += 1;
        self.recenter()
    }

    /// One full round against a feedback oracle `ω ↦ y`.
    pub fn pv_step<F: FnMut(f64) -> i8>(&mut self, x: &Vector, mut feedback: F) -> Result<Decision> {
        let d = self.query(x)?;
        let y = feedback(d.omega);
        self.observe(x, &d, y)?;
        Ok(d)
    }
}
