//! Nature: contexts, perceived values, corruption accounting and feedback.

use std::fmt;

use rand::Rng as _;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::geometry::Halfspace;
use crate::losses::NoiseModel;
use crate::rng::Rng;
use crate::{Error, Result, Vector};

/// `sgn(ṽ − ω)` with `sgn(0) = +1`.
pub fn feedback(v_tilde: f64, omega: f64) -> i8 {
    if v_tilde >= omega {
        1
    } else {
        -1
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Branch {
    Explore,
    Exploit,
}

impl fmt::Display for Branch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Branch::Explore => "explore",
            Branch::Exploit => "exploit",
        })
    }
}

/// Everything a corruption strategy may condition on in round `t`.
#[derive(Clone, Debug)]
pub struct RoundView<'a> {
    pub t: usize,
    pub x: &'a Vector,
    /// The query already posted this round.
    pub omega: f64,
    /// True value `⟨x, θ*⟩`.
    pub value: f64,
    pub branch: Branch,
    pub layer: Option<usize>,
    pub budget_left: usize,
}

/// Pluggable adversary. Returning `Some(ṽ)` spends one unit of budget.
pub trait CorruptionStrategy: Send {
    fn decide(&mut self, view: &RoundView<'_>, rng: &mut Rng) -> Option<f64>;
}

/// Closure-backed strategy for scripted adversaries.
pub struct FnStrategy<F>(pub F);

impl<F> CorruptionStrategy for FnStrategy<F>
where
    F: FnMut(&RoundView<'_>) -> Option<f64> + Send,
{
    fn decide(&mut self, view: &RoundView<'_>, _rng: &mut Rng) -> Option<f64> {
        (self.0)(view)
    }
}

/// Perceived value just across `ω` from the truth, or `None` when `[0,1]` leaves no room.
pub fn flipped_value(omega: f64, value: f64) -> Option<f64> {
    if value >= omega {
        let v = omega - 1e-6;
        (v >= 0.0).then_some(v)
    } else {
        Some(omega.min(1.0))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum StrategyKind {
    /// Invert the feedback (ṽ just across ω) with probability `rate` per round.
    Flip { rate: f64 },
    /// Corrupt the first rounds until the budget is gone, answering the
    /// opposite extreme of `[0, 1]`.
    FrontLoad,
    /// Invert the feedback on explore rounds only.
    Targeted,
}

impl StrategyKind {
    pub fn build(self) -> Box<dyn CorruptionStrategy> {
        Box::new(Builtin(self))
    }
}

struct Builtin(StrategyKind);

impl CorruptionStrategy for Builtin {
    fn decide(&mut self, view: &RoundView<'_>, rng: &mut Rng) -> Option<f64> {
        match self.0 {
            StrategyKind::Flip { rate } => {
                if rng.random::<f64>() < rate {
                    flipped_value(view.omega, view.value)
                } else {
                    None
                }
            }
            StrategyKind::FrontLoad => Some(if view.value >= view.omega { 0.0 } else { 1.0 }),
            StrategyKind::Targeted => {
                if view.branch == Branch::Explore {
                    flipped_value(view.omega, view.value)
                } else {
                    None
                }
            }
        }
    }
}

pub enum Behavior {
    FullyRational,
    Adversarial { budget: usize, strategy: Box<dyn CorruptionStrategy> },
    Bounded(NoiseModel),
}

impl fmt::Debug for Behavior {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Behavior::FullyRational => f.write_str("FullyRational"),
            Behavior::Adversarial { budget, .. } => write!(f, "Adversarial {{ budget: {budget} }}"),
            Behavior::Bounded(n) => write!(f, "Bounded({n:?})"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Perceived {
    pub value: f64,
    pub v_tilde: f64,
    pub corrupted: bool,
    pub noise: f64,
}

#[derive(Debug)]
pub struct NatureState {
    theta_star: Vector,
    behavior: Behavior,
    corruptions_used: usize,
    horizon: usize,
    /// Largest |ξ| drawn so far (bounded rationality).
    pub max_noise: f64,
    rng: Rng,
}

impl NatureState {
    pub fn new(theta_star: Vector, behavior: Behavior, horizon: usize, rng: Rng) -> Result<Self> {
        if theta_star.norm() > 1.0 + 1e-12 {
            return Err(Error::invalid("theta_star must lie in the unit ball"));
        }
        if let Behavior::Bounded(n) = &behavior {
            n.validate()?;
        }
        Ok(Self { theta_star, behavior, corruptions_used: 0, horizon, max_noise: 0.0, rng })
    }

    pub fn theta_star(&self) -> &Vector {
        &self.theta_star
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn corruptions_used(&self) -> usize {
        self.corruptions_used
    }

    pub fn budget(&self) -> usize {
        match &self.behavior {
            Behavior::Adversarial { budget, .. } => *budget,
            _ => 0,
        }
    }

    pub fn value(&self, x: &Vector) -> f64 {
        x.dot(&self.theta_star)
    }

    /// Perceived value for the posted query; ṽ is always clamped to `[0, 1]`.
    pub fn perceived_value(&mut self, t: usize, x: &Vector, omega: f64, branch: Branch, layer: Option<usize>) -> Perceived {
        let value = self.value(x);
        let clean = value.clamp(0.0, 1.0);
        match &mut self.behavior {
            Behavior::FullyRational => Perceived { value, v_tilde: clean, corrupted: false, noise: 0.0 },
            Behavior::Bounded(noise) => {
                let xi = match *noise {
                    NoiseModel::None => 0.0,
                    NoiseModel::Normal { sigma, truncation } => {
                        let z: f64 = self.rng.sample(StandardNormal);
                        let xi = sigma * z;
                        truncation.map_or(xi, |c| xi.clamp(-c, c))
                    }
                };
                self.max_noise = self.max_noise.max(xi.abs());
                Perceived { value, v_tilde: (value + xi).clamp(0.0, 1.0), corrupted: false, noise: xi }
            }
            Behavior::Adversarial { budget, strategy } => {
                let left = budget.saturating_sub(self.corruptions_used);
                if left > 0 {
                    let view = RoundView { t, x, omega, value, branch, layer, budget_left: left };
                    if let Some(v) = strategy.decide(&view, &mut self.rng) {
                        self.corruptions_used += 1;
                        assert!(self.corruptions_used <= *budget, "corruption budget exceeded");
                        return Perceived { value, v_tilde: v.clamp(0.0, 1.0), corrupted: true, noise: 0.0 };
                    }
                }
                Perceived { value, v_tilde: clean, corrupted: false, noise: 0.0 }
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ContextSource {
    UniformSphere,
    /// Cycled in order.
    Script { contexts: Vec<Vec<f64>> },
    /// Facet normals of a polyhedral cone (d = 3), cycled.
    Cone { n: usize, tilt: f64 },
}

/// Stream of unit contexts. With `fold` set, nature flips `x → −x` whenever
/// `⟨x, θ*⟩ < 0`, so true values stay in `V = [0, 1]`.
pub struct ContextStream {
    source: ContextSource,
    cache: Vec<Vector>,
    dim: usize,
    idx: usize,
    fold: bool,
    rng: Rng,
}

impl ContextStream {
    pub fn new(source: ContextSource, dim: usize, fold: bool, mut rng: Rng) -> Result<Self> {
        let cache = match &source {
            ContextSource::UniformSphere => Vec::new(),
            ContextSource::Script { contexts } => {
                if contexts.is_empty() {
                    return Err(Error::invalid("scripted context list is empty"));
                }
                contexts
                    .iter()
                    .map(|c| {
                        let v = Vector::from_column_slice(c);
                        if v.len() != dim || (v.norm() - 1.0).abs() > 1e-9 {
                            Err(Error::invalid("scripted contexts must be unit vectors of dimension d"))
                        } else {
                            Ok(v)
                        }
                    })
                    .collect::<Result<_>>()?
            }
            ContextSource::Cone { n, tilt } => cone_contexts(dim, *n, *tilt, &mut rng)?,
        };
        Ok(Self { source, cache, dim, idx: 0, fold, rng })
    }

    pub fn next(&mut self, theta_star: &Vector) -> Vector {
        let x = match self.source {
            ContextSource::UniformSphere => unit_gaussian(self.dim, &mut self.rng),
            _ => {
                let x = self.cache[self.idx % self.cache.len()].clone();
                self.idx += 1;
                x
            }
        };
        if self.fold && x.dot(theta_star) < 0.0 {
            -x
        } else {
            x
        }
    }
}

pub fn unit_gaussian(dim: usize, rng: &mut Rng) -> Vector {
    loop {
        let g = Vector::from_fn(dim, |_, _| rng.sample::<f64, _>(StandardNormal));
        let n = g.norm();
        if n > 1e-12 {
            return g / n;
        }
    }
}

/// Random point with norm at most `radius` (uniform in that ball).
pub fn random_theta(dim: usize, radius: f64, rng: &mut Rng) -> Vector {
    unit_gaussian(dim, rng) * (radius * rng.random::<f64>().powf(1.0 / dim as f64))
}

/// Normals `normalize(−cos φᵢ, −sin φᵢ, tilt)` with jittered angles: the
/// halfspaces `⟨xᵢ, p − apex⟩ ≥ 0` are the facets of a polyhedral cone around
/// `+e₃` with its tip at the apex, and any three of the hyperplanes meet only
/// at the apex.
pub fn cone_contexts(dim: usize, n: usize, tilt: f64, rng: &mut Rng) -> Result<Vec<Vector>> {
    if dim != 3 {
        return Err(Error::invalid("cone contexts need d = 3"));
    }
    if n == 0 || tilt <= 0.0 {
        return Err(Error::invalid("cone needs n ≥ 1 and tilt > 0"));
    }
    let tau = std::f64::consts::TAU;
    Ok((0..n)
        .map(|i| {
            let phi = tau * (i as f64 + 0.5 * rng.random::<f64>()) / n as f64;
            Vector::from_vec(vec![-phi.cos(), -phi.sin(), tilt]).normalize()
        })
        .collect())
}

/// Hyperplanes of the cone through `apex`, kept side containing the cone.
pub fn cone_halfspaces(contexts: &[Vector], apex: &Vector) -> Vec<Halfspace> {
    contexts.iter().map(|x| Halfspace::upper(x, x.dot(apex)).expect("unit context")).collect()
}
