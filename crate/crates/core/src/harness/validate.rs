//! The invariant battery: seeded suites that measure each guarantee and
//! compare it with its bound. [`acceptance`] returns the fourteen headline
//! checks in a fixed order; [`battery`] adds the cheaper module invariants.

use rand::Rng as _;
use rayon::prelude::*;

use crate::behaviors::{cone_contexts, Branch, feedback, random_theta, unit_gaussian, ContextSource, StrategyKind};
use crate::corpv::{agnostic_budget, protected_point_below, separating_cut, AlgoParams, CheckStrategy, EpochState};
use crate::geometry::arrangement::{min_violations, Constraint};
use crate::geometry::{approx_centroid, mc_volume, sample_ball, CentroidOptions, Halfspace, KnowledgeSet, Subspace};
use crate::layers::{layer_corruption_bound, layer_count, layer_probability, sample_layer, simulate_routing};
use crate::rng::{indexed, substream};
use crate::Vector;

use super::config::{Algorithm, BehaviorSpec, ExperimentConfig, ThetaSpec};
use super::run::{cumulative_from_csv, run, EpochLog, RunOutput, MEMBERSHIP_TOL};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Scale {
    /// Reduced seeds and horizons; seconds.
    Quick,
    /// The sizes the guarantees are stated for; minutes.
    Full,
}

impl Scale {
    fn pick<T>(self, quick: T, full: T) -> T {
        match self {
            Scale::Quick => quick,
            Scale::Full => full,
        }
    }
}

#[derive(Clone, Debug)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    /// Measured quantities next to their bounds.
    pub detail: String,
}

impl Check {
    fn new(name: &str, passed: bool, detail: String) -> Self {
        Self { name: name.to_string(), passed, detail }
    }

    pub fn line(&self) -> String {
        format!("[{}] {}: {}", if self.passed { "PASS" } else { "FAIL" }, self.name, self.detail)
    }
}

/// Volume factor `1 − 1/(2e²)` guaranteed per epoch.
pub fn volume_factor() -> f64 {
    1.0 - 0.5 * (-2.0f64).exp()
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len().max(1) as f64
}

fn e(d: usize, i: usize) -> Vector {
    let mut v = Vector::zeros(d);
    v[i] = 1.0;
    v
}

// ---------------------------------------------------------------------------
// Known-budget suite: adversaries within the budget.

pub struct SuiteRun {
    pub config: ExperimentConfig,
    pub params: AlgoParams,
    pub theta: Vector,
    pub corruptions: usize,
    pub outcome: std::result::Result<(Vec<EpochLog>, KnowledgeSet), String>,
}

impl SuiteRun {
    fn epochs(&self) -> &[EpochLog] {
        self.outcome.as_ref().map(|(e, _)| e.as_slice()).unwrap_or(&[])
    }
}

fn suite_config(i: usize, scale: Scale) -> ExperimentConfig {
    let d = [2, 3][i % 2];
    let budget = [1, 2][(i / 2) % 2];
    let strategy = [StrategyKind::Flip { rate: 0.5 }, StrategyKind::FrontLoad, StrategyKind::Targeted][(i / 4) % 3];
    let horizon = if d == 2 { scale.pick(1500, 2500) } else { scale.pick(2500, 6000) };
    let mut c = ExperimentConfig::new(Algorithm::CorpvKnown, d, horizon, 0.1);
    c.behavior = BehaviorSpec::Adversarial { budget, strategy };
    c.seed = 1000 + i as u64;
    c
}

/// CorPV.Known over d ∈ {2, 3}, c̄ ∈ {1, 2} and every built-in strategy with `C = c̄`.
pub fn known_suite(scale: Scale) -> Vec<SuiteRun> {
    (0..scale.pick(12, 200))
        .into_par_iter()
        .map(|i| {
            let config = suite_config(i, scale);
            let params = config.algo_params().expect("suite config is valid");
            match run(&config) {
                Ok(out) => SuiteRun {
                    params,
                    theta: out.theta_star.clone(),
                    corruptions: out.corruptions,
                    outcome: Ok((out.epochs, out.bodies.into_iter().next().expect("one body"))),
                    config,
                },
                Err(err) => SuiteRun {
                    params,
                    theta: Vector::zeros(config.d),
                    corruptions: 0,
                    outcome: Err(format!("seed {}: {err}", config.seed)),
                    config,
                },
            }
        })
        .collect()
}

pub fn theta_retention(suite: &[SuiteRun]) -> Check {
    let mut errors = Vec::new();
    let mut epochs = 0;
    let mut lost = 0;
    for r in suite {
        match &r.outcome {
            Err(e) => errors.push(e.clone()),
            Ok((logs, body)) => {
                epochs += logs.len();
                lost += logs.iter().filter(|l| !l.theta_retained()).count();
                if !body.contains(&r.theta, MEMBERSHIP_TOL) {
                    lost += 1;
                }
            }
        }
    }
    let used: usize = suite.iter().map(|r| r.corruptions).sum();
    Check::new(
        "theta retention under known budget",
        errors.is_empty() && lost == 0,
        format!(
            "{} runs, {epochs} epoch updates, {used} corruptions; θ* lost {lost} times; errors {}{}",
            suite.len(),
            errors.len(),
            errors.first().map(|e| format!(" (first: {e})")).unwrap_or_default()
        ),
    )
}

/// `dist(κ, cut) ≤ 2ν̄` on every epoch; `dist(κ*, cut) ≤ 3ν̄` with `κ*` an
/// independent centroid estimate (tolerance `ν̄/oracle_div`) on the first
/// `oracle_runs` runs. The oracle is the expensive part: seconds per epoch at
/// `ν̄/10`.
pub fn cut_geometry(suite: &[SuiteRun], oracle_runs: usize, oracle_div: f64) -> Check {
    let mut worst_k: f64 = 0.0;
    let mut worst_star: f64 = 0.0;
    let mut bad_k = 0;
    let mut bad_star = 0;
    let mut n = 0;
    let mut n_star = 0;
    for r in suite {
        let nu_hi = r.params.nu_hi;
        for l in r.epochs() {
            n += 1;
            let dk = l.report.kappa_distance() / nu_hi;
            worst_k = worst_k.max(dk);
            if dk > 2.0 + 1e-9 {
                bad_k += 1;
            }
        }
    }
    let star: Vec<(usize, f64)> = suite
        .par_iter()
        .take(oracle_runs)
        .map(|r| {
            let mut rng = substream(r.config.seed, "validate/centroid");
            let opts = CentroidOptions { max_samples: 2_000_000, ..Default::default() };
            let nu_hi = r.params.nu_hi;
            let mut worst: f64 = 0.0;
            let mut k = 0;
            for l in r.epochs() {
                if let Ok(c) = approx_centroid(l.report.ended.cylinder(), &mut rng, nu_hi / oracle_div, opts) {
                    worst = worst.max(l.report.cut.distance(&c) / nu_hi);
                    k += 1;
                }
            }
            (k, worst)
        })
        .collect();
    for (k, w) in star {
        n_star += k;
        worst_star = worst_star.max(w);
        if w > 3.0 {
            bad_star += 1;
        }
    }
    Check::new(
        "separating cut passes near the centroid",
        bad_k == 0 && bad_star == 0 && n > 0,
        format!(
            "max dist(κ,cut)/ν̄ = {worst_k:.3} ≤ 2 over {n} epochs; max dist(κ*,cut)/ν̄ = {worst_star:.3} ≤ 3 over {n_star} epochs (oracle tol ν̄/{oracle_div})"
        ),
    )
}

/// Monte-Carlo volume ratio of the large-dimension projection across epochs
/// whose small set did not change.
pub fn volume_progress(suite: &[SuiteRun], runs: usize, samples: usize) -> Check {
    let bound = volume_factor();
    let picked: Vec<&SuiteRun> = suite.iter().filter(|r| r.config.d == 2).take(runs).collect();
    let results: Vec<Vec<(f64, f64)>> = picked
        .par_iter()
        .map(|r| {
            let mut rng = substream(r.config.seed, "validate/volume");
            r.epochs()
                .iter()
                .filter(|l| !l.report.outcome.small_changed() && !l.report.large_before.is_empty())
                .filter_map(|l| {
                    let a = mc_volume(&l.report.body_before, &l.report.large_before, &mut rng, samples).ok()?;
                    let b = mc_volume(&l.report.body_after, &l.report.large_before, &mut rng, samples).ok()?;
                    let ratio = b.value / a.value;
                    let se = ratio * ((a.std_err / a.value).powi(2) + (b.std_err / b.value).powi(2)).sqrt();
                    Some((ratio, se))
                })
                .collect()
        })
        .collect();
    let all: Vec<(f64, f64)> = results.into_iter().flatten().collect();
    let bad: Vec<&(f64, f64)> = all.iter().filter(|(r, se)| *r > bound + 3.0 * se).collect();
    let ratios: Vec<f64> = all.iter().map(|p| p.0).collect();
    let max = ratios.iter().copied().fold(0.0, f64::max);
    Check::new(
        "volume progress per epoch",
        bad.is_empty() && !all.is_empty(),
        format!(
            "{} epochs, ratio mean {:.3}, max {:.4} vs bound {:.4} + 3 s.e.; {} above{}",
            all.len(),
            mean(&ratios),
            max,
            bound,
            bad.len(),
            bad.first().map(|(r, se)| format!(" (e.g. {r:.4} ± {se:.4})")).unwrap_or_default()
        ),
    )
}

/// Landmark pigeonhole, per-round landmark scoring and the Carathéodory bound.
pub fn landmarks_and_hull(suite: &[SuiteRun]) -> Check {
    let mut epochs = 0;
    let mut pigeon_bad = 0;
    let mut score_total = 0;
    let mut score_bad = 0;
    let mut hull_bad = 0;
    let mut hull_tested = 0;
    for r in suite {
        let p = &r.params;
        let cbar = p.budget;
        let d = p.dim;
        let mut rng = substream(r.config.seed, "validate/hull");
        for l in r.epochs() {
            let st = &l.report.ended;
            epochs += 1;
            let marks = st.landmarks(p.nu_hi);
            let best = marks.iter().map(|m| st.undesirability(m, p.nu)).max().unwrap_or(0);
            if best < p.landmark_threshold() {
                pigeon_bad += 1;
            }
            for rec in st.records() {
                score_total += 1;
                if !marks.iter().any(|m| rec.violated_by(m, p.nu)) {
                    score_bad += 1;
                }
            }
            // Points of the protected region near κ, then random convex
            // combinations of d + 1 of them.
            let large = st.large();
            let mut protected = Vec::new();
            for _ in 0..2000 {
                if protected.len() >= 64 {
                    break;
                }
                let Ok(q) = sample_ball(st.kappa(), 4.0 * p.nu_hi, large, &mut rng) else { break };
                if st.undesirability(&q, p.nu) <= cbar {
                    protected.push(q);
                }
            }
            if protected.len() < d + 1 {
                continue;
            }
            for _ in 0..200 {
                let w: Vec<f64> = (0..=d).map(|_| -rng.random::<f64>().max(1e-300).ln()).collect();
                let s: f64 = w.iter().sum();
                let mut c = Vector::zeros(d);
                for wi in &w {
                    c.axpy(wi / s, &protected[rng.random_range(0..protected.len())], 1.0);
                }
                hull_tested += 1;
                if st.undesirability(&c, p.nu) > cbar * (d + 1) {
                    hull_bad += 1;
                }
            }
        }
    }
    Check::new(
        "landmark pigeonhole and hull bound",
        pigeon_bad == 0 && score_bad == 0 && hull_bad == 0 && epochs > 0,
        format!(
            "{epochs} epochs without a heavy landmark: {pigeon_bad}; explore records scored by no landmark: {score_bad}/{score_total}; hull combinations above c̄(d+1): {hull_bad}/{hull_tested}"
        ),
    )
}

pub fn mistake_cap(suite: &[SuiteRun]) -> Check {
    let mut worst: f64 = 0.0;
    let mut max_mistakes = 0;
    let mut n = 0;
    let mut restarts = 0;
    for r in suite {
        for l in r.epochs() {
            n += 1;
            max_mistakes = max_mistakes.max(l.report.mistakes);
            restarts += l.report.restarts;
            worst = worst.max(l.report.mistakes as f64 / r.params.mistake_cap);
        }
    }
    Check::new(
        "accepting Perceptron stays under its mistake cap",
        worst <= 1.0 && n > 0,
        format!("{n} cuts, max mistakes {max_mistakes}, max mistakes/cap {worst:.4}, {restarts} restarts in total"),
    )
}

// ---------------------------------------------------------------------------

/// Fraction of uniform ball samples in the cap `⟨h, q − c⟩ ≥ r·ln(3/2)/√(d−1)`.
pub fn cap_mass(samples: usize) -> Check {
    let mut parts = Vec::new();
    let mut ok = true;
    for d in [2usize, 3, 5] {
        let mut rng = indexed(0, "validate/cap", d);
        let l = Subspace::full(d);
        let center = Vector::zeros(d);
        let cut = 1.5f64.ln() / ((d - 1) as f64).sqrt();
        let hits = (0..samples)
            .filter(|_| sample_ball(&center, 1.0, &l, &mut rng).map(|q| q[0] >= cut).unwrap_or(false))
            .count();
        let p = hits as f64 / samples as f64;
        let se = (p * (1.0 - p) / samples as f64).sqrt();
        let bound = 1.0 / (20.0 * ((d - 1) as f64).sqrt());
        ok &= p >= bound - 3.0 * se;
        parts.push(format!("d={d}: {p:.4} ≥ {bound:.4}"));
    }
    Check::new("cap sampling mass", ok, parts.join(", "))
}

fn terminated(state: &EpochState, eps: f64) -> bool {
    if state.large().is_empty() {
        return true;
    }
    let d = state.kappa().len();
    let mut rng = substream(0, "validate/directions");
    let dirs: Vec<Vector> = if d == 2 {
        (0..720).map(|i| {
            let a = std::f64::consts::PI * i as f64 / 720.0;
            Vector::from_vec(vec![a.cos(), a.sin()])
        })
        .collect()
    } else {
        (0..2000).map(|_| unit_gaussian(d, &mut rng)).collect()
    };
    dirs.iter().all(|u| state.width(u).map(|w| w <= eps).unwrap_or(false))
}

/// Epochs needed until every width is at most ε, against the epoch budget.
pub fn epoch_count(seeds: usize, horizon: usize) -> Check {
    let d = 2;
    let eps = 0.1;
    let budget = 4.0 * d as f64 * (d as f64 / eps).ln() / (1.0 / volume_factor()).ln();
    let res: Vec<std::result::Result<(usize, bool), String>> = (0..seeds)
        .into_par_iter()
        .map(|s| {
            let mut c = ExperimentConfig::new(Algorithm::CorpvKnown, d, horizon, eps);
            c.budget_override = Some(1);
            c.seed = 2000 + s as u64;
            let out = run(&c).map_err(|e| e.to_string())?;
            Ok((out.epochs.len(), terminated(&out.states[0], eps)))
        })
        .collect();
    let errors = res.iter().filter(|r| r.is_err()).count();
    let ok: Vec<(usize, bool)> = res.into_iter().filter_map(|r| r.ok()).collect();
    let max = ok.iter().map(|r| r.0).max().unwrap_or(0);
    let unfinished = ok.iter().filter(|r| !r.1).count();
    Check::new(
        "epoch count",
        errors == 0 && unfinished == 0 && (max as f64) <= budget,
        format!(
            "{seeds} runs of T={horizon}: max epochs {max}, mean {:.1} vs budget {budget:.1}; not yet ε-narrow: {unfinished}; errors {errors}",
            mean(&ok.iter().map(|r| r.0 as f64).collect::<Vec<_>>())
        ),
    )
}

fn totals(configs: Vec<ExperimentConfig>) -> std::result::Result<Vec<RunOutput>, String> {
    configs.into_par_iter().map(|c| run(&c).map_err(|e| format!("seed {}: {e}", c.seed))).collect()
}

/// Gradient descent: √T growth and additive corruption cost.
pub fn gd_scaling(seeds: usize, horizon: usize, corruptions: usize) -> Check {
    let cfg = |t: usize, c: usize, s: usize| {
        let mut x = ExperimentConfig::new(Algorithm::Gd, 2, t, 0.1);
        x.seed = 3000 + s as u64;
        if c > 0 {
            x.behavior = BehaviorSpec::Adversarial { budget: c, strategy: StrategyKind::Flip { rate: 1.0 } };
        }
        x
    };
    let short = totals((0..seeds).map(|s| cfg(horizon, 0, s)).collect());
    let long = totals((0..seeds).map(|s| cfg(4 * horizon, 0, s)).collect());
    let bad = totals((0..seeds).map(|s| cfg(horizon, corruptions, s)).collect());
    let (Ok(short), Ok(long), Ok(bad)) = (short, long, bad) else {
        return Check::new("gradient descent scaling", false, "a run failed".into());
    };
    let abs = |o: &[RunOutput]| o.iter().map(|r| r.trace.totals[1]).collect::<Vec<_>>();
    let r1 = mean(&abs(&short));
    let r4 = mean(&abs(&long));
    let excess = mean(&bad.iter().zip(&short).map(|(b, s)| b.trace.totals[1] - s.trace.totals[1]).collect::<Vec<_>>());
    let slack = 2.0 * corruptions as f64 + r1;
    let ball_ok = short.iter().chain(&long).chain(&bad).all(|o| o.trace.totals[0] <= o.trace.totals[1] / 0.1 + 1e-9);
    Check::new(
        "gradient descent scaling",
        r4 / r1 <= 2.5 && excess <= slack && ball_ok,
        format!(
            "R({})/R({horizon}) = {r4:.1}/{r1:.1} = {:.3} ≤ 2.5; excess with C={corruptions}: {excess:.1} ≤ 2C + R₀ = {slack:.1}; ε-ball ≤ abs/ε: {ball_ok}",
            4 * horizon,
            r4 / r1
        ),
    )
}

/// Agnostic learner across corruption levels, plus its known-budget twin.
pub fn ai_degradation(seeds: usize, horizon: usize) -> Check {
    let levels = [0usize, 10, 50, 100];
    let cfg = |c: usize, s: usize| {
        let mut x = ExperimentConfig::new(Algorithm::CorpvAi, 2, horizon, 0.1);
        x.seed = 5000 + s as u64;
        if c > 0 {
            x.behavior = BehaviorSpec::Adversarial { budget: c, strategy: StrategyKind::Flip { rate: 1.0 } };
        }
        x
    };
    let mut means = Vec::new();
    let mut errors = Vec::new();
    let mut nesting = true;
    for &c in &levels {
        match totals((0..seeds).map(|s| cfg(c, s)).collect()) {
            Ok(outs) => {
                nesting &= outs.iter().all(|o| o.nesting_ok);
                means.push(mean(&outs.iter().map(|o| o.trace.totals[0]).collect::<Vec<_>>()));
            }
            Err(e) => {
                errors.push(e);
                means.push(f64::NAN);
            }
        }
    }
    let twin = totals(
        (0..seeds)
            .map(|s| {
                let mut x = ExperimentConfig { algorithm: Algorithm::CorpvKnown, ..cfg(0, s) };
                x.budget_override = Some(agnostic_budget(horizon, x.beta));
                x
            })
            .collect(),
    );
    let known = match twin {
        Ok(o) => mean(&o.iter().map(|o| o.trace.totals[0]).collect::<Vec<_>>()),
        Err(e) => {
            errors.push(e);
            f64::NAN
        }
    };
    let monotone = means.windows(2).all(|w| w[1] >= w[0]);
    let within = means[0] <= 2.0 * known;
    let shown: Vec<String> = levels.iter().zip(&means).map(|(c, m)| format!("C={c}: {m:.1}")).collect();
    Check::new(
        "agnostic learner degrades gracefully",
        errors.is_empty() && monotone && within && nesting,
        format!(
            "mean ε-ball regret over {seeds} seeds, T={horizon}: {}; nondecreasing: {monotone}; C=0 vs known-budget twin {known:.1} (ratio {:.3} ≤ 2); nesting held: {nesting}{}",
            shown.join(", "),
            means[0] / known,
            errors.first().map(|e| format!("; error: {e}")).unwrap_or_default()
        ),
    )
}

/// Corruptions routed to robust layers, by routing simulation, cross-checked
/// against one full run.
pub fn layer_corruption(runs: usize, full_run_horizon: usize) -> Check {
    let horizon = 8192;
    let c = 100;
    let beta = 0.1;
    let bound = layer_corruption_bound(beta);
    let jmin = (c as f64).log2().ceil() as usize;
    let rounds: Vec<usize> = (1..=c).collect();
    let good = (0..runs as u64)
        .into_par_iter()
        .filter(|&s| {
            let counts = simulate_routing(7000 + s, horizon, &rounds);
            counts.iter().enumerate().skip(jmin - 1).all(|(_, &k)| (k as f64) <= bound)
        })
        .count();
    let frac = good as f64 / runs as f64;

    let mut cfg = ExperimentConfig::new(Algorithm::CorpvAi, 2, full_run_horizon, 0.1);
    cfg.seed = 7000;
    cfg.behavior = BehaviorSpec::Adversarial { budget: c, strategy: StrategyKind::FrontLoad };
    let cross = match run(&cfg) {
        Ok(out) => out.layer_corruptions == simulate_routing(cfg.seed, full_run_horizon, &rounds),
        Err(_) => false,
    };
    Check::new(
        "per-layer corruption bound",
        frac >= 1.0 - beta && cross,
        format!(
            "C={c}, T={horizon}: layers j ≥ {jmin} saw ≤ ln(1/β)+3 = {bound:.2} corruptions in {good}/{runs} runs ({frac:.3} ≥ {:.2}); routing simulation matches a full run: {cross}",
            1.0 - beta
        ),
    )
}

/// `σ` threshold `ε/(8√(2d)(√d+1)·ln T)`.
pub fn sigma_threshold(d: usize, eps: f64, horizon: usize) -> f64 {
    let rd = (d as f64).sqrt();
    eps / (8.0 * (2.0 * d as f64).sqrt() * (rd + 1.0) * (horizon as f64).ln())
}

/// Bounded rationality at half the noise threshold, plus the 20× negative control.
pub fn bounded_rationality(runs: usize, control_runs: usize) -> Check {
    let (d, eps, horizon) = (2, 0.1, 2000);
    let thr = sigma_threshold(d, eps, horizon);
    let cfg = |sigma: f64, cap: Option<f64>, s: usize| {
        let mut x = ExperimentConfig::new(Algorithm::CorpvKnown, d, horizon, eps);
        x.seed = 8000 + s as u64;
        x.behavior = BehaviorSpec::Bounded { sigma, truncation: None, assumed_cap: cap };
        x
    };
    let main = totals((0..runs).map(|s| cfg(0.5 * thr, None, s)).collect());
    let (retained, pseudo_ok, worst_pseudo, err) = match &main {
        Ok(outs) => (
            outs.iter().filter(|o| o.theta_always_retained() && o.bodies[0].contains(&o.theta_star, MEMBERSHIP_TOL)).count(),
            outs.iter().all(|o| o.trace.pseudo_total().is_some_and(|p| p.is_finite() && p <= horizon as f64)),
            outs.iter().filter_map(|o| o.trace.pseudo_total()).fold(0.0, f64::max),
            None,
        ),
        Err(e) => (0, false, f64::NAN, Some(e.clone())),
    };
    // Negative control: far more noise than the learner is tuned for.
    let tuned = std::f64::consts::SQRT_2 * 0.5 * thr * (horizon as f64).ln();
    let control = (0..control_runs)
        .into_par_iter()
        .map(|s| run(&cfg(20.0 * thr, Some(tuned), s)).map(|o| o.theta_always_retained()).unwrap_or(false))
        .filter(|ok| *ok)
        .count();
    Check::new(
        "bounded rationality below the noise threshold",
        err.is_none() && retained == runs && pseudo_ok,
        format!(
            "σ = threshold/2 = {:.3e}: θ* retained in {retained}/{runs} runs, pseudo-regret finite (max {worst_pseudo:.0} ≤ T); negative control at 20× threshold (not gated): retained in {control}/{control_runs}{}",
            0.5 * thr,
            err.map(|e| format!("; error: {e}")).unwrap_or_default()
        ),
    )
}

/// Does every point on the violated side of record `i` (inside the ball)
/// violate at least `extra` other records?
fn side_is_heavy(state: &EpochState, i: usize, extra: usize) -> bool {
    let recs = state.records();
    let h = recs[i].halfspace();
    let below = Halfspace::new(h.normal().clone(), h.intercept() - 1e-7 * h.orientation() as f64, -h.orientation())
        .expect("unit normal");
    let row = |x: &Halfspace, hard: bool| {
        let r = x.row();
        Constraint { a: Vector::from_vec(r.a), b: r.b, hard }
    };
    let mut cons: Vec<Constraint> =
        recs.iter().enumerate().filter(|(j, _)| *j != i).map(|(_, r)| row(&r.halfspace(), false)).collect();
    cons.push(row(&below, true));
    cons.extend(state.body().cuts().iter().map(|c| row(c, true)));
    match min_violations(state.kappa().len(), &cons, None) {
        None => true,
        Some(m) => m.count >= extra,
    }
}

/// 2-D proper cut after `3c̄+1` clean rounds; 3-D cone with no proper cut
/// where the separating cut still succeeds.
pub fn corner_cases(seeds: usize) -> Check {
    let mut proper_ok = 0;
    let mut proper_total = 0;
    for cbar in [1usize, 2] {
        let params = AlgoParams::new(2, 0.1, cbar).expect("valid");
        for s in 0..seeds as u64 {
            let mut rng = indexed(s, "validate/proper", cbar);
            let Ok(mut st) = EpochState::initial(&params, &mut rng) else { continue };
            let theta = random_theta(2, 1.0, &mut rng);
            for t in 0..3 * cbar + 1 {
                let x = unit_gaussian(2, &mut rng);
                let omega = x.dot(st.kappa());
                let y = feedback(x.dot(&theta), omega);
                let _ = st.record_explore(&params, &x, omega, y, t + 1);
            }
            proper_total += 1;
            if (0..st.records().len()).any(|i| side_is_heavy(&st, i, cbar)) {
                proper_ok += 1;
            }
        }
    }

    // Cone: 25 facets around +e₃ through the origin, τ = 25 for d = 3, c̄ = 1.
    let params = AlgoParams::new(3, 0.1, 1).expect("valid");
    let mut rng = substream(11, "validate/cone");
    let xs = cone_contexts(3, params.tau, 4.0, &mut rng).expect("d = 3");
    let theta = Vector::from_vec(vec![0.0, 0.0, 0.5]);
    let mut st = EpochState::from_parts(1, KnowledgeSet::unit_ball(3), Vec::new(), Vector::zeros(3), params.delta)
        .expect("valid state");
    for (t, x) in xs.iter().enumerate() {
        let y = feedback(x.dot(&theta), 0.0);
        let _ = st.record_explore(&params, x, 0.0, y, t + 1);
    }
    let no_proper = (0..st.records().len()).all(|i| !side_is_heavy(&st, i, 1));
    let below_apex = &e(3, 2) * (-params.nu_hi);
    let landmark_heavy = st.undesirability(&below_apex, params.nu) >= params.landmark_threshold();
    let (cut_ok, detail) = match separating_cut(&st, &params, &mut substream(11, "validate/cone-cut")) {
        Ok(rep) => {
            let valid = protected_point_below(&st, &params, Some(&rep.cut.complement()), CheckStrategy::Auto)
                .map(|p| p.is_none())
                .unwrap_or(false);
            let improper = st.records().iter().all(|r| r.direction.dot(rep.cut.normal()).abs() < 1.0 - 1e-6);
            let keeps = rep.cut.contains(&theta, 1e-12);
            (
                valid && improper && keeps,
                format!("cut valid {valid}, improper {improper}, keeps θ* {keeps}, {} mistakes", rep.mistakes),
            )
        }
        Err(e) => (false, format!("separating cut failed: {e}")),
    };
    Check::new(
        "two-dimensional proper cut and three-dimensional cone",
        proper_ok == proper_total && no_proper && landmark_heavy && cut_ok,
        format!(
            "2-D: a recorded line has a heavy side in {proper_ok}/{proper_total} cases; cone: no recorded plane qualifies {no_proper}, landmark below apex heavy {landmark_heavy}, {detail}"
        ),
    )
}

/// Identical (config, seed) gives byte-identical CSV.
pub fn determinism(horizon: usize) -> Check {
    let mut results = Vec::new();
    for algorithm in [Algorithm::CorpvAi, Algorithm::CorpvKnown, Algorithm::Gd, Algorithm::ProjectedVolume] {
        let mut c = ExperimentConfig::new(algorithm, 2, horizon, 0.1);
        c.seed = 99;
        if algorithm != Algorithm::ProjectedVolume {
            c.behavior = BehaviorSpec::Adversarial { budget: 5, strategy: StrategyKind::Flip { rate: 0.5 } };
        }
        let a = run(&c).map(|o| o.trace.to_csv());
        let b = run(&c).map(|o| o.trace.to_csv());
        let same = matches!((&a, &b), (Ok(x), Ok(y)) if x == y);
        let recon = a.as_ref().ok().and_then(|csv| cumulative_from_csv(csv).ok()).is_some();
        results.push((algorithm.name(), same && recon));
    }
    Check::new(
        "deterministic traces",
        results.iter().all(|r| r.1),
        results.iter().map(|(n, ok)| format!("{n}: {ok}")).collect::<Vec<_>>().join(", "),
    )
}

/// One corrupted answer on a fixed context: ProjectedVolume loses θ*, the
/// robust learner with `c̄ = 1` keeps it.
pub fn baseline_fragility(horizon: usize) -> Check {
    let cfg = |algorithm| {
        let mut c = ExperimentConfig::new(algorithm, 2, horizon, 0.1);
        c.context_source = ContextSource::Script { contexts: vec![vec![1.0, 0.0]] };
        c.theta = ThetaSpec::Fixed { value: vec![0.75, 0.0] };
        c.behavior = BehaviorSpec::Adversarial { budget: 1, strategy: StrategyKind::Flip { rate: 1.0 } };
        c.seed = 1;
        c
    };
    let pv = run(&cfg(Algorithm::ProjectedVolume));
    let known = run(&ExperimentConfig { budget_override: Some(1), ..cfg(Algorithm::CorpvKnown) });
    let theta = Vector::from_vec(vec![0.75, 0.0]);
    let pv_lost = pv.as_ref().map(|o| o.corruptions == 1 && !o.bodies[0].contains(&theta, MEMBERSHIP_TOL)).unwrap_or(false);
    let kept = known
        .as_ref()
        .map(|o| o.corruptions == 1 && o.theta_always_retained() && o.bodies[0].contains(&theta, MEMBERSHIP_TOL))
        .unwrap_or(false);
    let tail = |o: &std::result::Result<RunOutput, crate::Error>| {
        o.as_ref().map(|o| o.trace.rows.last().map_or(f64::NAN, |r| r.omega)).unwrap_or(f64::NAN)
    };
    Check::new(
        "baseline loses θ* after one corruption",
        pv_lost && kept,
        format!(
            "ProjectedVolume eliminated θ*: {pv_lost} (last query {:.3}); robust learner retained θ*: {kept} (last query {:.3})",
            tail(&pv),
            tail(&known)
        ),
    )
}

/// The fourteen headline checks, in order.
pub fn acceptance(scale: Scale) -> Vec<Check> {
    let suite = known_suite(scale);
    vec![
        theta_retention(&suite),
        baseline_fragility(scale.pick(500, 1500)),
        cut_geometry(&suite, scale.pick(1, 3), scale.pick(4.0, 10.0)),
        volume_progress(&suite, scale.pick(2, 10), scale.pick(100_000, 1_000_000)),
        landmarks_and_hull(&suite),
        mistake_cap(&suite),
        cap_mass(100_000),
        epoch_count(scale.pick(4, 20), scale.pick(6000, 8000)),
        gd_scaling(scale.pick(5, 20), scale.pick(625, 2500), scale.pick(50, 200)),
        ai_degradation(scale.pick(3, 20), scale.pick(2048, 8192)),
        layer_corruption(500, scale.pick(1024, 8192)),
        bounded_rationality(scale.pick(8, 50), scale.pick(4, 20)),
        corner_cases(scale.pick(10, 50)),
        determinism(scale.pick(600, 2000)),
    ]
}

// ---------------------------------------------------------------------------
// Module invariants beyond the headline checks.

pub fn layer_sampling(draws: usize) -> Check {
    let horizon = 8192;
    let mut rng = substream(0, "validate/sampling");
    let n = layer_count(horizon);
    let mut counts = vec![0usize; n];
    for _ in 0..draws {
        counts[sample_layer(&mut rng, horizon) - 1] += 1;
    }
    let mut worst: f64 = 0.0;
    for (j, &k) in counts.iter().enumerate() {
        let p = layer_probability(j + 1, horizon);
        let se = (p * (1.0 - p) / draws as f64).sqrt();
        worst = worst.max((k as f64 / draws as f64 - p).abs() / se);
    }
    Check::new("layer sampling frequencies", worst <= 3.0, format!("{draws} draws over {n} layers: max |z| = {worst:.2} ≤ 3"))
}

pub fn noise_cap_event(runs: usize) -> Check {
    let (d, eps, horizon, beta) = (2, 0.1, 1000usize, 0.1);
    let sigma = sigma_threshold(d, eps, horizon);
    let cap = std::f64::consts::SQRT_2 * sigma * (horizon as f64).ln();
    let good = (0..runs as u64)
        .into_par_iter()
        .filter(|&s| {
            let mut rng = substream(s, "validate/noise");
            (0..horizon).all(|_| (sigma * rng.sample::<f64, _>(rand_distr::StandardNormal)).abs() <= cap)
        })
        .count();
    Check::new(
        "noise stays under its cap",
        good as f64 >= (1.0 - beta) * runs as f64,
        format!("max |ξ| ≤ √2·σ·ln T in {good}/{runs} runs of T={horizon}"),
    )
}

pub fn clean_runs(horizon: usize) -> Check {
    let mut c = ExperimentConfig::new(Algorithm::CorpvKnown, 2, horizon, 0.1);
    c.seed = 7;
    let known = run(&c);
    let explore_matches = known
        .as_ref()
        .map(|o| {
            o.trace.rows.iter().all(|r| r.branch == Branch::Explore || r.loss[0] == 0.0)
                && o.trace.totals[0] <= o.trace.explore_rounds() as f64
                && o.theta_always_retained()
        })
        .unwrap_or(false);
    let pv = run(&ExperimentConfig { algorithm: Algorithm::ProjectedVolume, ..c.clone() });
    let pv_bound = 10.0 * 2.0 * (2.0f64 / 0.1).ln();
    let (pv_ok, pv_explores) = pv
        .as_ref()
        .map(|o| (o.bodies[0].contains(&o.theta_star, MEMBERSHIP_TOL) && (o.trace.explore_rounds() as f64) <= pv_bound, o.trace.explore_rounds()))
        .unwrap_or((false, 0));
    Check::new(
        "clean runs",
        explore_matches && pv_ok,
        format!(
            "known budget: exploit rounds lossless, ε-ball regret ≤ explore count, θ* kept: {explore_matches}; ProjectedVolume kept θ* with {pv_explores} explores ≤ {pv_bound:.0}: {pv_ok}"
        ),
    )
}

/// Headline checks plus module invariants.
pub fn battery(scale: Scale) -> Vec<Check> {
    let mut checks = acceptance(scale);
    checks.push(layer_sampling(scale.pick(100_000, 1_000_000)));
    checks.push(noise_cap_event(scale.pick(200, 1000)));
    checks.push(clean_runs(500));
    checks
}
