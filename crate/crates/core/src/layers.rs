//! Corruption-agnostic wrapper: `⌈log₂T⌉` copies of the known-budget
//! learner, one sampled per round with probability `2^{-j}`, kept nested by
//! pushing every cut of layer `j` down to all less robust layers.

use rand::Rng as _;

use crate::behaviors::Branch;
use crate::corpv::{agnostic_budget, separating_cut, AlgoParams, Decision, EpochReport, EpochState};
use crate::rng::{indexed, substream, Rng};
use crate::{Error, Result, Vector};

/// `⌈log₂T⌉`, at least one.
pub fn layer_count(horizon: usize) -> usize {
    let mut n = 0;
    while (1usize << n) < horizon {
        n += 1;
    }
    n.max(1)
}

/// `j ≥ 2` with probability `2^{-j}`, the remaining mass on `j = 1`.
pub fn sample_layer(rng: &mut Rng, horizon: usize) -> usize {
    sample_from(rng.random::<f64>(), layer_count(horizon))
}

fn sample_from(u: f64, layers: usize) -> usize {
    let mut acc = 0.0;
    for j in 2..=layers {
        acc += 0.5f64.powi(j as i32);
        if u < acc {
            return j;
        }
    }
    1
}

/// `P(j)` under [`sample_layer`].
pub fn layer_probability(j: usize, horizon: usize) -> f64 {
    let n = layer_count(horizon);
    match j {
        1 => 1.0 - (2..=n).map(|k| 0.5f64.powi(k as i32)).sum::<f64>(),
        j if j <= n => 0.5f64.powi(j as i32),
        _ => 0.0,
    }
}

pub struct Layer {
    pub state: EpochState,
    /// Ids of the global cuts this layer's body has absorbed.
    pub cuts: Vec<usize>,
    cut_rng: Rng,
    centroid_rng: Rng,
}

/// One epoch end in the bank.
#[derive(Clone, Debug)]
pub struct BankEvent {
    pub layer: usize,
    pub cut_id: usize,
    pub report: EpochReport,
    /// Less robust layers whose epoch advanced because of the cut.
    pub advanced: Vec<usize>,
    /// Layers whose body became empty and were copied from the next layer up.
    pub reseeded: Vec<usize>,
}

pub struct LayerBank {
    params: AlgoParams,
    horizon: usize,
    beta: f64,
    layers: Vec<Layer>,
    route: Rng,
    events: Vec<BankEvent>,
    next_cut: usize,
}

impl LayerBank {
    /// Bank with `c̄ = ⌈2·log₂(T/β)⌉` for every layer.
    pub fn agnostic(params: AlgoParams, horizon: usize, beta: f64, seed: u64) -> Result<Self> {
        if !(beta > 0.0 && beta < 1.0) {
            return Err(Error::Config("beta must lie in (0, 1)".into()));
        }
        let params = AlgoParams { budget: agnostic_budget(horizon, beta), ..params };
        let params = AlgoParams::new(params.dim, params.eps, params.budget)?
            .with_loss(params.loss, params.noise);
        Self::with_params(params, horizon, beta, seed)
    }

    /// Bank with the given parameters (budget used as is).
    pub fn with_params(params: AlgoParams, horizon: usize, beta: f64, seed: u64) -> Result<Self> {
        if params.dim < 2 {
            return Err(Error::Config("the corruption-robust learner needs d ≥ 2".into()));
        }
        let layers = (1..=layer_count(horizon))
            .map(|j| {
                let mut centroid_rng = indexed(seed, "corpv/centroid", j);
                let state = EpochState::initial(&params, &mut centroid_rng)?;
                Ok(Layer { state, cuts: Vec::new(), cut_rng: indexed(seed, "corpv/cut", j), centroid_rng })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { params, horizon, beta, layers, route: substream(seed, "layers/route"), events: Vec::new(), next_cut: 0 })
    }

    pub fn params(&self) -> &AlgoParams {
        &self.params
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn layers(&self) -> &[Layer] {
        &self.layers
    }

    pub fn layer(&self, j: usize) -> &EpochState {
        &self.layers[j - 1].state
    }

    pub fn events(&self) -> &[BankEvent] {
        &self.events
    }

    /// Smallest `j ≥ from` whose body is `ε`-narrow along `x` (or has no large direction).
    pub fn exploit_layer(&self, from: usize, x: &Vector) -> Result<Option<usize>> {
        for j in from..=self.layers.len() {
            let st = &self.layers[j - 1].state;
            if st.large().is_empty() || st.body().width(x)? <= self.params.eps {
                return Ok(Some(j));
            }
        }
        Ok(None)
    }

    /// Sample `j_t` and choose this round's query.
    pub fn query(&mut self, x: &Vector) -> Result<(Decision, Option<usize>)> {
        let jt = sample_from(self.route.random::<f64>(), self.layers.len());
        let st = &self.layers[jt - 1].state;
        let d = st.step(&self.params, x)?;
        match d.branch {
            Branch::Explore => Ok((Decision { layer: Some(jt), ..d }, None)),
            Branch::Exploit => {
                let j = self.exploit_layer(jt, x)?.unwrap_or(jt);
                let omega = self.layers[j - 1].state.exploit(&self.params, x)?;
                Ok((Decision::new(Branch::Exploit, omega, Some(jt)), Some(j)))
            }
        }
    }

    pub fn observe(&mut self, round: usize, x: &Vector, decision: &Decision, y: i8) -> Result<Option<&BankEvent>> {
        if decision.branch != Branch::Explore {
            return Ok(None);
        }
        let jt = decision.layer.ok_or_else(|| Error::invalid("decision carries no layer"))?;
        let params = &self.params;
        let layer = &mut self.layers[jt - 1];
        if !layer.state.record_explore(params, x, decision.omega_raw, y, round)? {
            return Ok(None);
        }
        let cut = separating_cut(&layer.state, params, &mut layer.cut_rng)?;
        let (next, outcome) = layer.state.epoch_update(params, &cut.cut, &mut layer.centroid_rng)?;
        let ended = std::mem::replace(&mut layer.state, next);
        let cut_id = self.next_cut;
        self.next_cut += 1;
        layer.cuts.push(cut_id);
        let report = EpochReport::new(ended, &layer.state, cut, outcome, round);

        let mut advanced = Vec::new();
        let mut reseeded = Vec::new();
        for j in (1..jt).rev() {
            let (lower, upper) = self.layers.split_at_mut(j);
            let target = &mut lower[j - 1];
            match target.state.apply_external_cut(params, &report.cut, &mut target.centroid_rng) {
                Ok(true) => advanced.push(j),
                Ok(false) => {}
                Err(Error::EmptyKnowledgeSet) => {
                    let source = &upper[0];
                    target.state.reseed_from(&source.state);
                    target.cuts = source.cuts.clone();
                    reseeded.push(j);
                    continue;
                }
                Err(e) => return Err(e),
            }
            target.cuts.push(cut_id);
        }
        self.events.push(BankEvent { layer: jt, cut_id, report, advanced, reseeded });
        Ok(self.events.last())
    }

    /// Every cut absorbed by layer `j` is also in all layers `j′ < j`.
    pub fn nesting_holds(&self) -> bool {
        self.layers.iter().enumerate().all(|(j, hi)| {
            self.layers[..j].iter().all(|lo| hi.cuts.iter().all(|c| lo.cuts.contains(c)))
        })
    }
}

/// Corrupted rounds routed to each layer (index `j − 1`).
pub fn corruption_tolerance_audit<I>(rows: I, layers: usize) -> Vec<usize>
where
    I: IntoIterator<Item = (usize, bool)>,
{
    let mut counts = vec![0; layers];
    for (j, corrupted) in rows {
        if corrupted && (1..=layers).contains(&j) {
            counts[j - 1] += 1;
        }
    }
    counts
}

/// Per-layer corruption counts of a run whose adversary corrupts the given
/// rounds regardless of the learner, using the bank's routing stream. Routing
/// draws one number per round from its own stream, so this matches a full
/// run with the same seed exactly.
pub fn simulate_routing(seed: u64, horizon: usize, corrupted_rounds: &[usize]) -> Vec<usize> {
    let layers = layer_count(horizon);
    let mut route = substream(seed, "layers/route");
    let mut flags = vec![false; horizon + 1];
    for &t in corrupted_rounds {
        if (1..=horizon).contains(&t) {
            flags[t] = true;
        }
    }
    let rows = (1..=horizon).map(|t| (sample_from(route.random::<f64>(), layers), flags[t]));
    corruption_tolerance_audit(rows, layers)
}

/// Lemma-level bound on per-layer corruptions: `ln(1/β) + 3`.
pub fn layer_corruption_bound(beta: f64) -> f64 {
    (1.0 / beta).ln() + 3.0
}
