use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::behaviors::StrategyKind;
use crate::{Error, Result};

use super::config::{Algorithm, BehaviorSpec, ExperimentConfig};
use super::run::run;

/// Axes of a sweep; an absent axis keeps the base config's value.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Grid {
    #[serde(default)]
    pub algorithm: Option<Vec<Algorithm>>,
    #[serde(default)]
    pub d: Option<Vec<usize>>,
    #[serde(default)]
    pub eps: Option<Vec<f64>>,
    /// Corruption budgets `C`.
    #[serde(default)]
    pub corruptions: Option<Vec<usize>>,
    /// Strategy used when the base config has no adversary.
    #[serde(default)]
    pub strategy: Option<StrategyKind>,
    #[serde(default)]
    pub seeds: Option<Vec<u64>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub base: ExperimentConfig,
    #[serde(default)]
    pub grid: Grid,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SummaryRow {
    pub algorithm: Algorithm,
    pub d: usize,
    pub eps: f64,
    pub corruptions: usize,
    pub runs: usize,
    pub failures: usize,
    /// ε-ball, absolute, pricing.
    pub mean: [f64; 3],
    pub std: [f64; 3],
}

fn axis<T: Clone>(name: &str, axis: &Option<Vec<T>>, base: T) -> Result<Vec<T>> {
    match axis {
        None => Ok(vec![base]),
        Some(v) if v.is_empty() => Err(Error::Config(format!("sweep axis `{name}` is empty"))),
        Some(v) => Ok(v.clone()),
    }
}

impl SweepSpec {
    pub fn from_json(text: &str) -> Result<Self> {
        let s: Self = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        s.cells()?;
        Ok(s)
    }

    /// Every (cell, seed) config, grouped by cell.
    pub fn cells(&self) -> Result<Vec<Vec<ExperimentConfig>>> {
        let g = &self.grid;
        let base = &self.base;
        let seeds = match &g.seeds {
            Some(s) => axis("seeds", &Some(s.clone()), 0)?,
            None => (0..base.replicates as u64).map(|i| base.seed.wrapping_add(i)).collect(),
        };
        let mut cells = Vec::new();
        for algorithm in axis("algorithm", &g.algorithm, base.algorithm)? {
            for d in axis("d", &g.d, base.d)? {
                for eps in axis("eps", &g.eps, base.eps)? {
                    for c in axis("corruptions", &g.corruptions, base.behavior.corruptions())? {
                        let behavior = match (&base.behavior, g.corruptions.is_some()) {
                            (b, false) => b.clone(),
                            (BehaviorSpec::Adversarial { strategy, .. }, true) => {
                                BehaviorSpec::Adversarial { budget: c, strategy: *strategy }
                            }
                            (BehaviorSpec::FullyRational, true) => BehaviorSpec::Adversarial {
                                budget: c,
                                strategy: g.strategy.unwrap_or(StrategyKind::FrontLoad),
                            },
                            (BehaviorSpec::Bounded { .. }, true) => {
                                return Err(Error::Config("corruption axis needs a non-noisy base behavior".into()))
                            }
                        };
                        let cell = seeds
                            .iter()
                            .map(|&seed| {
                                let budget_override = base.budget_override.filter(|_| algorithm == Algorithm::CorpvKnown);
                                let cfg = ExperimentConfig {
                                    algorithm,
                                    d,
                                    eps,
                                    behavior: behavior.clone(),
                                    seed,
                                    budget_override,
                                    replicates: 1,
                                    ..base.clone()
                                };
                                cfg.validate().map(|_| cfg)
                            })
                            .collect::<Result<Vec<_>>>()?;
                        cells.push(cell);
                    }
                }
            }
        }
        Ok(cells)
    }
}

fn mean_std(xs: &[f64]) -> (f64, f64) {
    if xs.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let n = xs.len() as f64;
    let m = xs.iter().sum::<f64>() / n;
    let var = if xs.len() > 1 { xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (n - 1.0) } else { 0.0 };
    (m, var.sqrt())
}

/// Run every cell (replicates concurrently) and summarize final regret.
pub fn sweep(spec: &SweepSpec) -> Result<Vec<SummaryRow>> {
    use rayon::prelude::*;
    let cells = spec.cells()?;
    let jobs: Vec<(usize, &ExperimentConfig)> =
        cells.iter().enumerate().flat_map(|(i, c)| c.iter().map(move |cfg| (i, cfg))).collect();
    let results: Vec<(usize, Result<[f64; 3]>)> =
        jobs.par_iter().map(|(i, cfg)| (*i, run(cfg).map(|o| o.trace.totals))).collect();
    Ok(cells
        .iter()
        .enumerate()
        .map(|(i, cell)| {
            let ok: Vec<[f64; 3]> = results.iter().filter(|(j, _)| *j == i).filter_map(|(_, r)| r.as_ref().ok().copied()).collect();
            let mut mean = [0.0; 3];
            let mut std = [0.0; 3];
            for k in 0..3 {
                let col: Vec<f64> = ok.iter().map(|r| r[k]).collect();
                (mean[k], std[k]) = mean_std(&col);
            }
            let c0 = &cell[0];
            SummaryRow {
                algorithm: c0.algorithm,
                d: c0.d,
                eps: c0.eps,
                corruptions: c0.behavior.corruptions(),
                runs: cell.len(),
                failures: cell.len() - ok.len(),
                mean,
                std,
            }
        })
        .collect())
}

pub fn summary_csv(rows: &[SummaryRow]) -> String {
    let mut s = String::from(
        "algo,d,eps,C,runs,failures,mean_epsball,std_epsball,mean_abs,std_abs,mean_pricing,std_pricing\n",
    );
    for r in rows {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{},{},{},{},{},{}",
            r.algorithm.name(),
            r.d,
            r.eps,
            r.corruptions,
            r.runs,
            r.failures,
            r.mean[0],
            r.std[0],
            r.mean[1],
            r.std[1],
            r.mean[2],
            r.std[2]
        );
    }
    s
}
