use itertools::Itertools;
use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::geometry::arrangement::{min_violations, Constraint};
use crate::geometry::lp::{Program, Row, Solution};
use crate::geometry::{chebyshev_center, feasible, sample_ball, Halfspace, FEAS_TOL};
use crate::rng::Rng;
use crate::{Error, Result, Vector};

use super::{AlgoParams, EpochState};

/// How to decide whether a protected point lies below a candidate cut.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CheckStrategy {
    /// Arrangement search for `d ≤ 3`, subset enumeration above.
    Auto,
    /// Exact minimum-violation search over the hyperplane arrangement.
    Arrangement,
    /// Every size-`c̄` subset `D ⊆ A`, lexicographically, one LP each.
    Subsets { max_subsets: u64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CutOptions {
    pub strategy: CheckStrategy,
    /// Perceptron restarts (fresh landmark and sample) before giving up.
    pub max_outer: usize,
    pub max_subsets: u64,
    /// Mistakes allowed before the first restart; doubles every 8 restarts,
    /// never beyond the mistake cap.
    pub initial_patience: usize,
}

impl CutOptions {
    pub fn patience(&self, restarts: usize) -> f64 {
        self.initial_patience as f64 * 2f64.powi((restarts / 8).min(60) as i32)
    }
}

impl Default for CutOptions {
    fn default() -> Self {
        Self { strategy: CheckStrategy::Auto, max_outer: 2000, max_subsets: 5_000_000, initial_patience: 1024 }
    }
}

#[derive(Clone, Debug)]
pub struct CutReport {
    /// Kept side `H⁺(h̃, ω̃)`.
    pub cut: Halfspace,
    /// Mistakes of the accepting Perceptron run.
    pub mistakes: usize,
    /// Abandoned runs before the accepting one.
    pub restarts: usize,
    pub landmark: Vector,
    pub sample: Vector,
}

/// Candidate cut read off a Perceptron vector `w = (h, b)`.
enum Candidate {
    /// `H⁻` is all of space.
    Everything,
    /// `H⁻` is empty.
    Nothing,
    Cut(Halfspace),
}

struct Embedding<'a> {
    state: &'a EpochState,
    scale: f64,
}

impl Embedding<'_> {
    /// `normalize(Eᵀ(p − κ)/ν̄, 1)`.
    fn phi(&self, p: &Vector) -> Vector {
        let c = self.state.large().coords(&(p - self.state.kappa())) / self.scale;
        let k = c.len();
        let mut e = Vector::zeros(k + 1);
        e.rows_mut(0, k).copy_from(&c);
        e[k] = 1.0;
        e.normalize()
    }

    fn candidate(&self, w: &Vector) -> Candidate {
        let k = w.len() - 1;
        let h = w.rows(0, k).into_owned();
        let b = w[k];
        let hn = h.norm();
        if hn < 1e-14 {
            return if b <= 0.0 { Candidate::Everything } else { Candidate::Nothing };
        }
        let n = self.state.large().embed(&(h / hn));
        let omega = n.dot(self.state.kappa()) - b * self.scale / hn;
        Candidate::Cut(Halfspace::new(n, omega, 1).expect("unit normal"))
    }
}

/// A point with undesirability `≤ c̄` inside `K ∩ below` (`below = None`
/// means no extra restriction), or `None` if the protected region misses it.
pub fn protected_point_below(
    state: &EpochState,
    params: &AlgoParams,
    below: Option<&Halfspace>,
    strategy: CheckStrategy,
) -> Result<Option<Vector>> {
    let strategy = match strategy {
        CheckStrategy::Auto if params.dim <= 3 => CheckStrategy::Arrangement,
        CheckStrategy::Auto => CheckStrategy::Subsets { max_subsets: params.cut.max_subsets },
        s => s,
    };
    let mut hard: Vec<Halfspace> = state.body().cuts().to_vec();
    hard.extend(below.cloned());
    let soft: Vec<Halfspace> = state.records().iter().map(|r| r.margin_halfspace(params.nu)).collect();
    match strategy {
        CheckStrategy::Subsets { max_subsets } => subsets_check(params, &hard, &soft, max_subsets),
        _ => Ok(arrangement_check(params, &hard, &soft)),
    }
}

fn arrangement_check(params: &AlgoParams, hard: &[Halfspace], soft: &[Halfspace]) -> Option<Vector> {
    let to_con = |h: &Halfspace, is_hard: bool| {
        let r = h.row();
        Constraint { a: Vector::from_vec(r.a), b: r.b, hard: is_hard }
    };
    let cons: Vec<Constraint> = soft.iter().map(|h| to_con(h, false)).chain(hard.iter().map(|h| to_con(h, true))).collect();
    let best = min_violations(params.dim, &cons, Some(params.budget))?;
    if best.count > params.budget {
        return None;
    }
    // Prefer the Chebyshev center of the cell that drops exactly the violated records.
    let rows: Vec<Row> = hard
        .iter()
        .chain(soft.iter().enumerate().filter(|(i, _)| !best.violated.contains(i)).map(|(_, h)| h))
        .map(Halfspace::row)
        .collect();
    match chebyshev_center(params.dim, &rows) {
        Some(w) if w.radius >= -FEAS_TOL => Some(w.center),
        _ => Some(best.point),
    }
}

fn subsets_check(params: &AlgoParams, hard: &[Halfspace], soft: &[Halfspace], max_subsets: u64) -> Result<Option<Vector>> {
    let k = params.budget.min(soft.len());
    let count = binomial(soft.len() as u64, k as u64);
    if count.is_none_or(|c| c > max_subsets) {
        return Err(Error::SubsetCapExceeded(max_subsets));
    }
    for drop in (0..soft.len()).combinations(k) {
        let kept: Vec<Halfspace> =
            soft.iter().enumerate().filter(|(i, _)| !drop.contains(i)).map(|(_, h)| h.clone()).collect();
        if let Some(w) = feasible(params.dim, hard, &kept) {
            return Ok(Some(w.center));
        }
    }
    Ok(None)
}

fn binomial(n: u64, k: u64) -> Option<u64> {
    let k = k.min(n - k.min(n));
    (0..k).try_fold(1u64, |acc, i| acc.checked_mul(n - i).map(|v| v / (i + 1)))
}

/// Is `φ(q)` strictly separable from the positive points? Solves
/// `max t` s.t. `⟨w, φ(z)⟩ ≥ t`, `⟨w, φ(q)⟩ ≤ −t`, `w ∈ [−1, 1]^{k+1}`.
fn separable(q: &Vector, positives: &[Vector]) -> bool {
    let n = q.len() + 1;
    let mut p = Program::new(vec![-1.0; n], vec![1.0; n]);
    for z in positives {
        let mut a: Vec<f64> = z.iter().map(|v| -v).collect();
        a.push(1.0);
        p.push(Row::new(a, 0.0));
    }
    let mut a: Vec<f64> = q.iter().copied().collect();
    a.push(1.0);
    p.push(Row::new(a, 0.0));
    let mut c = vec![0.0; n];
    c[n - 1] = 1.0;
    match p.maximize(&c) {
        Solution::Optimal { value, .. } => value > 1e-12,
        Solution::Infeasible { .. } => false,
    }
}

/// Perceptron search for a cut keeping every protected point (undesirability
/// `≤ c̄`) and `κ` on `H⁺` while a sample `q` near a landmark falls on `H⁻`.
///
/// Each outer iteration draws a landmark `p*` and `q ~ B_L(p*, ζ)` and runs
/// Perceptron in `R^{dim L + 1}` until a pass without mistakes, restarting
/// once the mistake cap is reached. A sample with a thin margin makes
/// Perceptron crawl, so runs are first given a smaller patience that grows
/// with the number of restarts. Two certified shortcuts abandon a hopeless
/// `q` early: `q` itself protected, or `q` inside the convex hull of `κ` and
/// the protected points found so far.
pub fn separating_cut(state: &EpochState, params: &AlgoParams, rng: &mut Rng) -> Result<CutReport> {
    let landmarks = state.landmarks(params.nu_hi);
    if landmarks.is_empty() {
        return Err(Error::invalid("no large dimensions left to cut"));
    }
    let emb = Embedding { state, scale: params.nu_hi };
    let phi_kappa = emb.phi(state.kappa());
    let mut restarts = 0;
    for _ in 0..params.cut.max_outer {
        let landmark = landmarks[rng.random_range(0..landmarks.len())].clone();
        let q = sample_ball(&landmark, params.zeta, state.large(), rng)?;
        if state.undesirability(&q, params.nu) <= params.budget {
            restarts += 1;
            continue;
        }
        let phi_q = emb.phi(&q);
        let mut w = Vector::zeros(phi_q.len());
        let mut mistakes = 0usize;
        let mut positives = vec![phi_kappa.clone()];
        let mut next_hull_check = 16;
        let patience = params.cut.patience(restarts).min(params.mistake_cap);
        while (mistakes as f64) < patience {
            let mut m = 0;
            if w.dot(&phi_q) >= 0.0 {
                w -= &phi_q;
                m += 1;
            }
            if w.dot(&phi_kappa) <= 0.0 {
                w += &phi_kappa;
                m += 1;
            }
            let witness = match emb.candidate(&w) {
                Candidate::Nothing => None,
                Candidate::Everything => protected_point_below(state, params, None, params.cut.strategy)?,
                Candidate::Cut(h) => protected_point_below(state, params, Some(&h.complement()), params.cut.strategy)?,
            };
            if let Some(z) = witness {
                let pz = emb.phi(&z);
                w += &pz;
                m += 1;
                if positives.len() < 4096 && positives.iter().all(|p| (p - &pz).norm() > 1e-12) {
                    positives.push(pz);
                }
            }
            if m == 0 {
                if let Candidate::Cut(cut) = emb.candidate(&w) {
                    assert!((mistakes as f64) <= params.mistake_cap);
                    return Ok(CutReport { cut, mistakes, restarts, landmark, sample: q });
                }
            }
            mistakes += m;
            if mistakes >= next_hull_check {
                next_hull_check = (2 * next_hull_check).min(next_hull_check + 512);
                if !separable(&phi_q, &positives) {
                    break;
                }
            }
        }
        restarts += 1;
    }
    Err(Error::CutSearchExhausted)
}
