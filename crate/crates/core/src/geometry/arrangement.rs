//! Minimum number of violated soft constraints over `{‖x‖ ≤ 1} ∩ hard`.
//!
//! The set of points satisfying a fixed subset of constraints is closed and
//! convex, so if it is nonempty it either touches one of the constraint
//! hyperplanes or is the whole ball. Restricting recursively to hyperplanes
//! (in increasing index order, so every intersection flat is visited once)
//! and sweeping the one-dimensional flats therefore visits a minimizer. Cost is
//! O(m^d log m) for `m` constraints in dimension `d`, independent of how many
//! violations are allowed.

use crate::geometry::orthonormal_complement;
use crate::Vector;

/// `a·x ≤ b`; hard constraints must hold, soft ones are counted.
#[derive(Clone, Debug)]
pub struct Constraint {
    pub a: Vector,
    pub b: f64,
    pub hard: bool,
}

#[derive(Clone, Debug)]
pub struct MinViolation {
    pub count: usize,
    pub point: Vector,
    /// Indices of soft constraints violated at `point`.
    pub violated: Vec<usize>,
}

const TOL: f64 = 1e-9;

struct FlatCon {
    a: Vector,
    b: f64,
    hard: bool,
    id: usize,
}

struct Search {
    stop_at: usize,
    best: Option<(usize, Vector)>,
}

impl Search {
    fn offer(&mut self, count: usize, point: Vector) {
        if self.best.as_ref().is_none_or(|(c, _)| count < *c) {
            self.best = Some((count, point));
        }
    }

    fn done(&self) -> bool {
        self.best.as_ref().is_some_and(|(c, _)| *c <= self.stop_at)
    }

    /// Flat = `origin + span(basis)` with `origin` its closest point to 0, so the
    /// unit ball restricts to `‖y‖² ≤ rho2` in flat coordinates.
    fn run(&mut self, origin: &Vector, basis: &[Vector], rho2: f64, cons: Vec<FlatCon>, base: usize, next_id: usize) {
        let mut base = base;
        let mut live = Vec::with_capacity(cons.len());
        for c in cons {
            if c.a.norm() < 1e-12 {
                if c.b < -TOL {
                    if c.hard {
                        return;
                    }
                    base += 1;
                }
            } else {
                live.push(c);
            }
        }
        if let Some((c, _)) = &self.best {
            if base >= *c {
                return;
            }
        }
        let k = basis.len();
        if k == 1 {
            self.sweep(origin, &basis[0], rho2.max(0.0).sqrt(), &live, base);
            return;
        }

        // The whole-ball case: evaluate the flat's center.
        let center_viol = live.iter().try_fold(base, |acc, c| {
            if c.b >= -TOL {
                Some(acc)
            } else if c.hard {
                None
            } else {
                Some(acc + 1)
            }
        });
        if let Some(v) = center_viol {
            self.offer(v, origin.clone());
            if self.done() {
                return;
            }
        }

        for (i, c) in live.iter().enumerate() {
            if c.id < next_id {
                continue;
            }
            let na2 = c.a.norm_squared();
            let y0 = &c.a * (c.b / na2);
            let r2 = rho2 - y0.norm_squared();
            if r2 < -TOL {
                continue;
            }
            let sub = orthonormal_complement(k, &[c.a.clone() / na2.sqrt()]);
            let new_origin = embed(origin, basis, &y0);
            let new_basis: Vec<Vector> = sub.iter().map(|s| embed(&Vector::zeros(origin.len()), basis, s)).collect();
            let mut next = Vec::with_capacity(live.len() - 1);
            for (j, o) in live.iter().enumerate() {
                if j == i {
                    continue;
                }
                let a = Vector::from_iterator(sub.len(), sub.iter().map(|s| s.dot(&o.a)));
                next.push(FlatCon { a, b: o.b - o.a.dot(&y0), hard: o.hard, id: o.id });
            }
            self.run(&new_origin, &new_basis, r2.max(0.0), next, base, c.id + 1);
            if self.done() {
                return;
            }
        }
    }

    fn sweep(&mut self, origin: &Vector, dir: &Vector, rho: f64, cons: &[FlatCon], base: usize) {
        let (mut lo, mut hi) = (-rho, rho);
        let mut uppers = Vec::new();
        let mut lowers = Vec::new();
        for c in cons {
            let a = c.a[0];
            let t = c.b / a;
            let slack = TOL / a.abs();
            if c.hard {
                if a > 0.0 {
                    hi = hi.min(t + slack);
                } else {
                    lo = lo.max(t - slack);
                }
            } else if a > 0.0 {
                uppers.push(t + slack);
            } else {
                lowers.push(t - slack);
            }
        }
        if lo > hi {
            return;
        }
        uppers.sort_by(f64::total_cmp);
        lowers.sort_by(f64::total_cmp);
        let viol = |y: f64| {
            let u = uppers.partition_point(|t| *t < y);
            let l = lowers.len() - lowers.partition_point(|t| *t <= y);
            u + l
        };
        let mut best = (viol(lo), lo);
        for &y in uppers.iter().chain(lowers.iter()).chain(std::iter::once(&hi)) {
            if y >= lo && y <= hi {
                let v = viol(y);
                if v < best.0 {
                    best = (v, y);
                }
            }
        }
        let mut p = origin.clone();
        p.axpy(best.1, dir, 1.0);
        self.offer(base + best.0, p);
    }
}

fn embed(origin: &Vector, basis: &[Vector], y: &Vector) -> Vector {
    let mut p = origin.clone();
    for (e, yi) in basis.iter().zip(y.iter()) {
        p.axpy(*yi, e, 1.0);
    }
    p
}

/// Minimize the number of violated soft constraints over the unit ball
/// intersected with the hard constraints. `stop_at` allows an early exit as
/// soon as a point with at most that many violations is found. Returns `None`
/// when the hard region is empty.
pub fn min_violations(dim: usize, cons: &[Constraint], stop_at: Option<usize>) -> Option<MinViolation> {
    let basis: Vec<Vector> = (0..dim)
        .map(|i| {
            let mut e = Vector::zeros(dim);
            e[i] = 1.0;
            e
        })
        .collect();
    let flat = cons
        .iter()
        .enumerate()
        .map(|(id, c)| FlatCon { a: c.a.clone(), b: c.b, hard: c.hard, id })
        .collect();
    let mut s = Search { stop_at: stop_at.unwrap_or(0), best: None };
    if dim == 0 {
        return None;
    }
    s.run(&Vector::zeros(dim), &basis, 1.0, flat, 0, 0);
    let (_, point) = s.best?;
    let violated: Vec<usize> =
        cons.iter().enumerate().filter(|(_, c)| !c.hard && c.a.dot(&point) > c.b + 1e-8).map(|(i, _)| i).collect();
    Some(MinViolation { count: violated.len(), point, violated })
}
