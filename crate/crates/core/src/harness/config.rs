use serde::{Deserialize, Serialize};

use crate::behaviors::{Behavior, ContextSource, StrategyKind};
use crate::corpv::{AlgoParams, CheckStrategy};
use crate::losses::{LossKind, NoiseModel};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Algorithm {
    CorpvKnown,
    CorpvAi,
    Gd,
    ProjectedVolume,
}

impl Algorithm {
    pub fn name(self) -> &'static str {
        match self {
            Algorithm::CorpvKnown => "corpv_known",
            Algorithm::CorpvAi => "corpv_ai",
            Algorithm::Gd => "gd",
            Algorithm::ProjectedVolume => "projected_volume",
        }
    }

    pub fn is_corpv(self) -> bool {
        matches!(self, Algorithm::CorpvKnown | Algorithm::CorpvAi)
    }
}

/// How nature answers.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum BehaviorSpec {
    #[default]
    FullyRational,
    Adversarial {
        /// Corruption budget `C`.
        budget: usize,
        strategy: StrategyKind,
    },
    Bounded {
        sigma: f64,
        #[serde(default)]
        truncation: Option<f64>,
        /// Noise cap `Ξ` the learner is tuned for; defaults to `√2·σ·ln T`.
        #[serde(default)]
        assumed_cap: Option<f64>,
    },
}

impl BehaviorSpec {
    pub fn corruptions(&self) -> usize {
        match self {
            BehaviorSpec::Adversarial { budget, .. } => *budget,
            _ => 0,
        }
    }

    pub fn noise(&self) -> NoiseModel {
        match *self {
            BehaviorSpec::Bounded { sigma, truncation, .. } => NoiseModel::Normal { sigma, truncation },
            _ => NoiseModel::None,
        }
    }

    pub fn build(&self) -> Behavior {
        match self {
            BehaviorSpec::FullyRational => Behavior::FullyRational,
            BehaviorSpec::Adversarial { budget, strategy } => {
                Behavior::Adversarial { budget: *budget, strategy: strategy.build() }
            }
            BehaviorSpec::Bounded { .. } => Behavior::Bounded(self.noise()),
        }
    }
}

/// Where a run's ground truth comes from.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ThetaSpec {
    /// Uniform in the ball of the given radius.
    Random { radius: f64 },
    Fixed { value: Vec<f64> },
}

impl Default for ThetaSpec {
    fn default() -> Self {
        ThetaSpec::Random { radius: 1.0 }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    /// Directory for `trace.csv` (and `geometry.jsonl`); the CLI's `--out` overrides it.
    #[serde(default)]
    pub dir: Option<String>,
    #[serde(default)]
    pub trace_geometry: bool,
}

fn default_beta() -> f64 {
    0.1
}

fn one() -> usize {
    1
}

fn yes() -> bool {
    true
}

/// One experiment, read from a single JSON document.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub algorithm: Algorithm,
    pub d: usize,
    #[serde(rename = "T")]
    pub horizon: usize,
    pub eps: f64,
    /// Loss the learner optimizes when exploiting; every trace reports all three.
    #[serde(default)]
    pub loss: Option<LossKind>,
    #[serde(default)]
    pub behavior: BehaviorSpec,
    #[serde(default = "default_context")]
    pub context_source: ContextSource,
    /// Flip `x → −x` when `⟨x, θ*⟩ < 0` so values stay in `[0, 1]`.
    #[serde(default = "yes")]
    pub fold_contexts: bool,
    #[serde(default)]
    pub theta: ThetaSpec,
    #[serde(default)]
    pub seed: u64,
    /// Working budget `c̄` for `corpv_known`; defaults to the adversary's `C`.
    #[serde(default)]
    pub budget_override: Option<usize>,
    /// Failure probability of the agnostic variant.
    #[serde(default = "default_beta")]
    pub beta: f64,
    #[serde(default)]
    pub cut_strategy: Option<CheckStrategy>,
    #[serde(default)]
    pub output: OutputSpec,
    #[serde(default = "one")]
    pub replicates: usize,
}

fn default_context() -> ContextSource {
    ContextSource::UniformSphere
}

impl ExperimentConfig {
    /// Minimal config with defaults for everything optional.
    pub fn new(algorithm: Algorithm, d: usize, horizon: usize, eps: f64) -> Self {
        Self {
            algorithm,
            d,
            horizon,
            eps,
            loss: None,
            behavior: BehaviorSpec::FullyRational,
            context_source: ContextSource::UniformSphere,
            fold_contexts: true,
            theta: ThetaSpec::default(),
            seed: 0,
            budget_override: None,
            beta: default_beta(),
            cut_strategy: None,
            output: OutputSpec::default(),
            replicates: 1,
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn loss_kind(&self) -> LossKind {
        self.loss.unwrap_or(LossKind::EpsBall { eps: self.eps })
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if self.d == 0 {
            return bad("d must be positive".into());
        }
        if !(self.eps > 0.0 && self.eps.is_finite()) {
            return bad("eps must be positive".into());
        }
        if self.algorithm.is_corpv() {
            if self.d < 2 {
                return bad("corpv needs d ≥ 2".into());
            }
            if self.eps > 1.0 / (self.d as f64).sqrt() + 1e-12 {
                return bad(format!("corpv needs eps ≤ 1/√d = {}", 1.0 / (self.d as f64).sqrt()));
            }
        }
        if self.algorithm == Algorithm::CorpvAi && self.horizon < 2 && self.horizon != 0 {
            return bad("corpv_ai needs T ≥ 2".into());
        }
        if !(self.beta > 0.0 && self.beta < 1.0) {
            return bad("beta must lie in (0, 1)".into());
        }
        if self.budget_override.is_some() && self.algorithm != Algorithm::CorpvKnown {
            return bad("budget_override applies to corpv_known only".into());
        }
        if self.replicates == 0 {
            return bad("replicates must be at least 1".into());
        }
        match &self.behavior {
            BehaviorSpec::Bounded { sigma, truncation, .. } => {
                NoiseModel::Normal { sigma: *sigma, truncation: *truncation }
                    .validate()
                    .map_err(|e| Error::Config(e.to_string()))?;
            }
            BehaviorSpec::Adversarial { strategy: StrategyKind::Flip { rate }, .. } if !(0.0..=1.0).contains(rate) => {
                return bad("flip rate must lie in [0, 1]".into());
            }
            _ => {}
        }
        if let LossKind::EpsBall { eps } = self.loss_kind() {
            if !(eps > 0.0) {
                return bad("eps-ball loss needs eps > 0".into());
            }
        }
        if let ThetaSpec::Fixed { value } = &self.theta {
            if value.len() != self.d {
                return bad("theta has the wrong dimension".into());
            }
            if value.iter().map(|v| v * v).sum::<f64>() > 1.0 + 1e-12 {
                return bad("theta must lie in the unit ball".into());
            }
        }
        if let ThetaSpec::Random { radius } = self.theta {
            if !(0.0..=1.0).contains(&radius) {
                return bad("theta radius must lie in [0, 1]".into());
            }
        }
        if self.algorithm.is_corpv() {
            self.algo_params().map_err(|e| Error::Config(e.to_string()))?;
        }
        Ok(())
    }

    /// Noise cap `Ξ = √2·σ·ln T` for bounded rationality.
    pub fn noise_cap(&self) -> Option<f64> {
        match self.behavior {
            BehaviorSpec::Bounded { sigma, assumed_cap, .. } => {
                Some(assumed_cap.unwrap_or(std::f64::consts::SQRT_2 * sigma * (self.horizon.max(2) as f64).ln()))
            }
            _ => None,
        }
    }

    /// Learner parameters for the corpv family.
    pub fn algo_params(&self) -> Result<AlgoParams> {
        let budget = self.budget_override.unwrap_or_else(|| self.behavior.corruptions());
        let mut p = match self.noise_cap() {
            // Noise beyond Ξ acts as corruption; the doubled budget needs at least one slot.
            Some(xi) => AlgoParams::bounded(self.d, self.eps, budget.max(1), xi)?,
            None => AlgoParams::new(self.d, self.eps, budget)?,
        };
        p = p.with_loss(self.loss_kind(), self.behavior.noise());
        if let Some(s) = self.cut_strategy {
            p.cut.strategy = s;
        }
        Ok(p)
    }
}
