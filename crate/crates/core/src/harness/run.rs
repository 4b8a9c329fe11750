use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde_json::json;

use crate::baseline::PvState;
use crate::behaviors::{feedback, random_theta, Branch, ContextStream, NatureState};
use crate::corpv::{CorPvKnown, Decision, EpochReport, EpochState};
use crate::gd::GdState;
use crate::geometry::{Halfspace, KnowledgeSet};
use crate::layers::{corruption_tolerance_audit, LayerBank};
use crate::losses::{benchmark_loss, loss, LossKind};
use crate::rng::substream;
use crate::{Error, Result, Vector};

use super::config::{Algorithm, BehaviorSpec, ExperimentConfig, ThetaSpec};

pub const CSV_HEADER: &str =
    "t,algo,layer,epoch,branch,omega,v,vtilde,y,corrupted,loss_epsball,loss_abs,loss_pricing,cum_epsball,cum_abs,cum_pricing";

/// Tolerance for "θ* lies in the body" audits.
pub const MEMBERSHIP_TOL: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq)]
pub struct RoundOutcome {
    pub t: usize,
    pub layer: Option<usize>,
    pub epoch: usize,
    pub branch: Branch,
    pub omega: f64,
    pub v: f64,
    pub v_tilde: f64,
    pub y: i8,
    pub corrupted: bool,
    /// ε-ball, absolute, pricing.
    pub loss: [f64; 3],
    pub cum: [f64; 3],
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct RegretTrace {
    pub algo: String,
    pub rows: Vec<RoundOutcome>,
    /// Final cumulative losses (ε-ball, absolute, pricing).
    pub totals: [f64; 3],
    /// Per-round `ℓ − L*(x_t)` for bounded-rationality runs.
    pub pseudo: Option<Vec<f64>>,
}

impl RegretTrace {
    pub fn to_csv(&self) -> String {
        let mut s = String::with_capacity(64 * (self.rows.len() + 1));
        s.push_str(CSV_HEADER);
        s.push('\n');
        for r in &self.rows {
            let layer = r.layer.map(|j| j.to_string()).unwrap_or_default();
            let _ = writeln!(
                s,
                "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
                r.t,
                self.algo,
                layer,
                r.epoch,
                r.branch,
                r.omega,
                r.v,
                r.v_tilde,
                r.y,
                u8::from(r.corrupted),
                r.loss[0],
                r.loss[1],
                r.loss[2],
                r.cum[0],
                r.cum[1],
                r.cum[2]
            );
        }
        s
    }

    pub fn explore_rounds(&self) -> usize {
        self.rows.iter().filter(|r| r.branch == Branch::Explore).count()
    }

    pub fn pseudo_total(&self) -> Option<f64> {
        self.pseudo.as_ref().map(|p| p.iter().sum())
    }
}

/// One epoch end, with the audit data the validation battery needs.
#[derive(Clone, Debug)]
pub struct EpochLog {
    pub layer: usize,
    pub report: EpochReport,
    pub advanced: Vec<usize>,
    pub reseeded: Vec<usize>,
    /// Whether θ* lies in each layer's body right after the update.
    pub retained: Vec<bool>,
}

impl EpochLog {
    pub fn theta_retained(&self) -> bool {
        self.retained[self.layer - 1]
    }
}

pub struct RunOutput {
    pub config: ExperimentConfig,
    pub theta_star: Vector,
    pub trace: RegretTrace,
    pub epochs: Vec<EpochLog>,
    /// Final body of every layer (a single one outside the agnostic variant).
    pub bodies: Vec<KnowledgeSet>,
    /// Final epoch state of every layer (corpv family only).
    pub states: Vec<EpochState>,
    /// Corrupted rounds routed to each layer (agnostic variant only).
    pub layer_corruptions: Vec<usize>,
    /// Layer nesting held after every global elimination (agnostic variant).
    pub nesting_ok: bool,
    pub corruptions: usize,
    pub max_noise: f64,
    pub geometry: Vec<serde_json::Value>,
}

impl RunOutput {
    pub fn theta_always_retained(&self) -> bool {
        self.epochs.iter().all(EpochLog::theta_retained)
    }

    /// Write `trace.csv`, plus `geometry.jsonl` and `pseudo_regret.csv` when present.
    pub fn write(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir)?;
        fs::write(dir.join("trace.csv"), self.trace.to_csv())?;
        if self.config.output.trace_geometry {
            let mut s = String::new();
            for g in &self.geometry {
                s.push_str(&g.to_string());
                s.push('\n');
            }
            fs::write(dir.join("geometry.jsonl"), s)?;
        }
        if let Some(p) = &self.trace.pseudo {
            let mut s = String::from("t,pseudo,cum_pseudo\n");
            let mut cum = 0.0;
            for (i, x) in p.iter().enumerate() {
                cum += x;
                let _ = writeln!(s, "{},{},{}", i + 1, x, cum);
            }
            fs::write(dir.join("pseudo_regret.csv"), s)?;
        }
        Ok(())
    }
}

enum Learner {
    Known(Box<CorPvKnown>),
    Ai(Box<LayerBank>),
    Gd(GdState),
    Pv(Box<PvState>),
}

fn all_losses(eps: f64, omega: f64, v: f64, v_tilde: f64) -> Result<[f64; 3]> {
    Ok([
        loss(LossKind::EpsBall { eps }, omega, v, v_tilde)?,
        loss(LossKind::Absolute, omega, v, v_tilde)?,
        loss(LossKind::Pricing, omega, v, v_tilde)?,
    ])
}

fn halfspace_json(h: &Halfspace) -> serde_json::Value {
    json!({ "normal": h.normal().as_slice(), "intercept": h.intercept(), "orientation": h.orientation() })
}

fn geometry_json(t: usize, layer: usize, log: &EpochLog, next: &EpochState) -> serde_json::Value {
    let r = &log.report;
    json!({
        "t": t,
        "layer": layer,
        "phi": r.phi,
        "kappa": r.kappa.as_slice(),
        "cut": halfspace_json(&r.cut),
        "mistakes": r.mistakes,
        "restarts": r.restarts,
        "next_kappa": next.kappa().as_slice(),
        "small": next.small().iter().map(|v| v.as_slice().to_vec()).collect::<Vec<_>>(),
        "large": next.large().basis().iter().map(|v| v.as_slice().to_vec()).collect::<Vec<_>>(),
        "body": next.body().cuts().iter().map(halfspace_json).collect::<Vec<_>>(),
        "advanced": log.advanced,
        "reseeded": log.reseeded,
        "retained": log.retained,
    })
}

pub fn theta_for(config: &ExperimentConfig) -> Vector {
    match &config.theta {
        ThetaSpec::Fixed { value } => Vector::from_column_slice(value),
        ThetaSpec::Random { radius } => random_theta(config.d, *radius, &mut substream(config.seed, "nature/theta")),
    }
}

/// Simulate one seeded run of the protocol.
pub fn run(config: &ExperimentConfig) -> Result<RunOutput> {
    config.validate()?;
    let seed = config.seed;
    let d = config.d;
    let theta = theta_for(config);
    let mut nature = NatureState::new(theta.clone(), config.behavior.build(), config.horizon, substream(seed, "nature/behavior"))
        .map_err(|e| Error::Config(e.to_string()))?;
    let mut contexts = ContextStream::new(config.context_source.clone(), d, config.fold_contexts, substream(seed, "nature/contexts"))
        .map_err(|e| Error::Config(e.to_string()))?;
    let mut learner = match config.algorithm {
        Algorithm::CorpvKnown => Learner::Known(Box::new(CorPvKnown::new(config.algo_params()?, seed)?)),
        Algorithm::CorpvAi => {
            let params = config.algo_params()?;
            let bank = if matches!(config.behavior, BehaviorSpec::Bounded { .. }) {
                LayerBank::with_params(params, config.horizon.max(2), config.beta, seed)?
            } else {
                LayerBank::agnostic(params, config.horizon.max(2), config.beta, seed)?
            };
            Learner::Ai(Box::new(bank))
        }
        Algorithm::Gd => Learner::Gd(GdState::new(d)),
        Algorithm::ProjectedVolume => Learner::Pv(Box::new(
            PvState::new(d, config.eps, seed)?.with_loss(config.loss_kind(), config.behavior.noise()),
        )),
    };
    let bounded = matches!(config.behavior, BehaviorSpec::Bounded { .. });
    let kind = config.loss_kind();
    let noise = config.behavior.noise();

    let mut trace = RegretTrace { algo: config.algorithm.name().to_string(), pseudo: bounded.then(Vec::new), ..Default::default() };
    let mut epochs = Vec::new();
    let mut geometry = Vec::new();
    let mut cum = [0.0; 3];
    let mut nesting_ok = true;

    for t in 1..=config.horizon {
        let x = contexts.next(&theta);
        let (decision, epoch) = match &mut learner {
            Learner::Known(k) => (k.query(&x), k.state().phi()),
            Learner::Ai(b) => {
                let r = b.query(&x).map(|(d, _)| d);
                let phi = r.as_ref().ok().and_then(|d| d.layer).map_or(0, |j| b.layer(j).phi());
                (r, phi)
            }
            Learner::Gd(g) => (Ok(Decision::new(Branch::Explore, g.query(&x), None)), 0),
            Learner::Pv(p) => (p.query(&x), p.explores() + 1),
        };
        let decision = decision.map_err(|e| e.at_round(t))?;
        let perceived = nature.perceived_value(t, &x, decision.omega, decision.branch, decision.layer);
        let y = feedback(perceived.v_tilde, decision.omega);
        let v = perceived.value.clamp(0.0, 1.0);

        match &mut learner {
            Learner::Known(k) => {
                if let Some(rep) = k.observe(t, &x, &decision, y).map_err(|e| e.at_round(t))? {
                    let log = EpochLog {
                        layer: 1,
                        report: rep.clone(),
                        advanced: Vec::new(),
                        reseeded: Vec::new(),
                        retained: vec![k.state().body().contains(&theta, MEMBERSHIP_TOL)],
                    };
                    if config.output.trace_geometry {
                        geometry.push(geometry_json(t, 1, &log, k.state()));
                    }
                    epochs.push(log);
                }
            }
            Learner::Ai(b) => {
                let ev = b.observe(t, &x, &decision, y).map_err(|e| e.at_round(t))?.cloned();
                if let Some(ev) = ev {
                    nesting_ok &= b.nesting_holds();
                    let retained = b.layers().iter().map(|l| l.state.body().contains(&theta, MEMBERSHIP_TOL)).collect();
                    let log = EpochLog { layer: ev.layer, report: ev.report, advanced: ev.advanced, reseeded: ev.reseeded, retained };
                    if config.output.trace_geometry {
                        geometry.push(geometry_json(t, ev.layer, &log, b.layer(ev.layer)));
                    }
                    epochs.push(log);
                }
            }
            Learner::Gd(g) => g.update(&x, y).map_err(|e| e.at_round(t))?,
            Learner::Pv(p) => p.observe(&x, &decision, y).map_err(|e| e.at_round(t))?,
        }

        let l = all_losses(config.eps, decision.omega, v, perceived.v_tilde)?;
        for i in 0..3 {
            cum[i] += l[i];
        }
        if let Some(p) = trace.pseudo.as_mut() {
            let realized = loss(kind, decision.omega, v, perceived.v_tilde)?;
            p.push(realized - benchmark_loss(kind, noise, v).1);
        }
        let layer = match config.algorithm {
            Algorithm::CorpvKnown => Some(1),
            Algorithm::CorpvAi => decision.layer,
            _ => None,
        };
        trace.rows.push(RoundOutcome {
            t,
            layer,
            epoch,
            branch: decision.branch,
            omega: decision.omega,
            v,
            v_tilde: perceived.v_tilde,
            y,
            corrupted: perceived.corrupted,
            loss: l,
            cum,
        });
    }
    trace.totals = cum;

    let (states, layer_corruptions) = match &learner {
        Learner::Known(k) => (vec![k.state().clone()], Vec::new()),
        Learner::Ai(b) => {
            let rows = trace.rows.iter().map(|r| (r.layer.unwrap_or(0), r.corrupted));
            (b.layers().iter().map(|l| l.state.clone()).collect(), corruption_tolerance_audit(rows, b.layers().len()))
        }
        _ => (Vec::new(), Vec::new()),
    };
    let bodies = match &learner {
        Learner::Pv(p) => vec![p.body().clone()],
        _ => states.iter().map(|s| s.body().clone()).collect(),
    };
    Ok(RunOutput {
        config: config.clone(),
        theta_star: theta,
        trace,
        epochs,
        bodies,
        states,
        layer_corruptions,
        nesting_ok,
        corruptions: nature.corruptions_used(),
        max_noise: nature.max_noise,
        geometry,
    })
}

/// `config.replicates` runs with seeds `seed, seed + 1, …`, concurrently.
pub fn run_replicates(config: &ExperimentConfig) -> Vec<Result<RunOutput>> {
    use rayon::prelude::*;
    (0..config.replicates as u64)
        .into_par_iter()
        .map(|i| run(&ExperimentConfig { seed: config.seed.wrapping_add(i), replicates: 1, ..config.clone() }))
        .collect()
}

/// Sum the loss columns of a CSV trace in row order.
pub fn cumulative_from_csv(csv: &str) -> Result<[f64; 3]> {
    let mut lines = csv.lines();
    if lines.next() != Some(CSV_HEADER) {
        return Err(Error::invalid("unexpected trace header"));
    }
    let mut cum = [0.0; 3];
    for line in lines {
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 16 {
            return Err(Error::invalid("malformed trace row"));
        }
        for i in 0..3 {
            let l: f64 = f[10 + i].parse().map_err(|_| Error::invalid("bad loss value"))?;
            cum[i] += l;
            let c: f64 = f[13 + i].parse().map_err(|_| Error::invalid("bad cumulative value"))?;
            if c != cum[i] {
                return Err(Error::invalid(format!("row {}: cumulative {} ≠ recomputed {}", f[0], c, cum[i])));
            }
        }
    }
    Ok(cum)
}
