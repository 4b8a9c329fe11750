//! Small dense solver for `max c·z` over a box, linear rows and at most one
//! second-order cone constraint.
//!
//! The linear part is a dual simplex that keeps exactly `n` active rows, so a
//! pivot costs O(m·n + n³) — cheap for the handful of variables used here.
//! The cone `‖M z + p‖ + w·z ≤ bound` is handled by adding supporting
//! (tangent) rows at the current optimizer until it is satisfied; each added
//! row is violated by the current point, which is exactly the situation a dual
//! simplex warm-starts from.

use nalgebra::{DMatrix, DVector};

/// Violation tolerance for unit-norm rows.
const ROW_TOL: f64 = 1e-10;
/// Accepted violation of the cone constraint.
const CONE_TOL: f64 = 1e-10;
const PIVOT_TOL: f64 = 1e-11;
const MAX_TANGENTS: usize = 400;

/// Linear inequality `a·z ≤ b`.
#[derive(Clone, Debug)]
pub struct Row {
    pub a: Vec<f64>,
    pub b: f64,
}

impl Row {
    pub fn new(a: Vec<f64>, b: f64) -> Self {
        Self { a, b }
    }

    fn eval(&self, z: &[f64]) -> f64 {
        dot(&self.a, z) - self.b
    }
}

/// `‖map·z + offset‖ + linear·z ≤ bound`.
#[derive(Clone, Debug)]
pub struct Cone {
    pub map: DMatrix<f64>,
    pub offset: DVector<f64>,
    pub linear: DVector<f64>,
    pub bound: f64,
}

impl Cone {
    /// Plain ball `‖z‖ ≤ radius` on all `n` variables.
    pub fn ball(n: usize, radius: f64) -> Self {
        Self {
            map: DMatrix::identity(n, n),
            offset: DVector::zeros(n),
            linear: DVector::zeros(n),
            bound: radius,
        }
    }

    fn violation(&self, z: &[f64]) -> (f64, DVector<f64>) {
        let zv = DVector::from_column_slice(z);
        let inner = &self.map * &zv + &self.offset;
        let s = inner.norm() + self.linear.dot(&zv) - self.bound;
        (s, inner)
    }

    fn tangent(&self, inner: &DVector<f64>) -> Row {
        let nrm = inner.norm();
        let g = if nrm > 1e-300 { inner / nrm } else { DVector::zeros(inner.len()) };
        let a = self.map.transpose() * &g + &self.linear;
        let b = self.bound - g.dot(&self.offset);
        Row::new(a.as_slice().to_vec(), b)
    }
}

#[derive(Clone, Debug)]
pub struct Program {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub rows: Vec<Row>,
    pub cone: Option<Cone>,
}

#[derive(Clone, Debug)]
pub enum Solution {
    Optimal {
        point: Vec<f64>,
        value: f64,
        /// Positive multipliers of user rows in the final basis.
        duals: Vec<(usize, f64)>,
    },
    /// Farkas support restricted to user rows.
    Infeasible { support: Vec<usize> },
}

impl Solution {
    pub fn point(&self) -> Option<&[f64]> {
        match self {
            Solution::Optimal { point, .. } => Some(point),
            Solution::Infeasible { .. } => None,
        }
    }

    pub fn value(&self) -> Option<f64> {
        match self {
            Solution::Optimal { value, .. } => Some(*value),
            Solution::Infeasible { .. } => None,
        }
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

impl Program {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Self {
        assert_eq!(lower.len(), upper.len());
        Self { lower, upper, rows: Vec::new(), cone: None }
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn push(&mut self, row: Row) {
        debug_assert_eq!(row.a.len(), self.dim());
        self.rows.push(row);
    }

    pub fn with_cone(mut self, cone: Cone) -> Self {
        self.cone = Some(cone);
        self
    }

    pub fn maximize(&self, c: &[f64]) -> Solution {
        let n = self.dim();
        assert_eq!(c.len(), n);
        let m = self.rows.len();

        // Row store: user rows (normalized), upper bounds, lower bounds, tangents.
        let mut rows: Vec<Row> = Vec::with_capacity(m + 2 * n + 16);
        let mut user_scale = Vec::with_capacity(m);
        for r in &self.rows {
            let s = r.a.iter().map(|v| v * v).sum::<f64>().sqrt();
            if s > 1e-14 {
                rows.push(Row::new(r.a.iter().map(|v| v / s).collect(), r.b / s));
                user_scale.push(s);
            } else {
                // 0·z ≤ b: either vacuous or infeasible on its own.
                if r.b < -ROW_TOL {
                    return Solution::Infeasible { support: vec![rows.len()] };
                }
                rows.push(Row::new(vec![0.0; n], r.b.max(0.0)));
                user_scale.push(1.0);
            }
        }
        for i in 0..n {
            let mut a = vec![0.0; n];
            a[i] = 1.0;
            rows.push(Row::new(a, self.upper[i]));
        }
        for i in 0..n {
            let mut a = vec![0.0; n];
            a[i] = -1.0;
            rows.push(Row::new(a, -self.lower[i]));
        }
        for i in 0..n {
            if self.lower[i] > self.upper[i] + ROW_TOL {
                return Solution::Infeasible { support: Vec::new() };
            }
        }

        // Dual-feasible start: the box vertex maximizing c.
        let mut basis: Vec<usize> = (0..n).map(|i| if c[i] >= 0.0 { m + i } else { m + n + i }).collect();
        let mut in_basis = vec![false; rows.len()];
        for &b in &basis {
            in_basis[b] = true;
        }

        let mut tangents = 0usize;
        let mut pivots = 0usize;
        let bland_after = 50 + 20 * (m + 2 * n);
        let cv = DVector::from_column_slice(c);

        loop {
            let ab = DMatrix::from_fn(n, n, |r, col| rows[basis[r]].a[col]);
            let bb = DVector::from_fn(n, |r, _| rows[basis[r]].b);
            let lu = ab.clone().lu();
            // Pivots require a nonzero pivot element, so the basis stays nonsingular.
            let x = lu.solve(&bb).expect("singular simplex basis");
            let lut = ab.transpose().lu();
            let y = lut.solve(&cv).unwrap_or_else(|| DVector::zeros(n));
            let xs = x.as_slice();

            // Entering row: most violated (Bland's rule once pivots pile up).
            let mut enter: Option<(usize, f64)> = None;
            for (k, r) in rows.iter().enumerate() {
                if in_basis[k] {
                    continue;
                }
                let v = r.eval(xs);
                if v > ROW_TOL {
                    if pivots > bland_after {
                        enter = Some((k, v));
                        break;
                    }
                    if enter.is_none_or(|(_, best)| v > best) {
                        enter = Some((k, v));
                    }
                }
            }

            let k = match enter {
                Some((k, _)) => k,
                None => {
                    // Linear part optimal; refine the cone if needed.
                    if let Some(cone) = &self.cone {
                        let (s, inner) = cone.violation(xs);
                        if s > CONE_TOL && tangents < MAX_TANGENTS {
                            let t = cone.tangent(&inner);
                            let tn = t.a.iter().map(|v| v * v).sum::<f64>().sqrt();
                            if tn < 1e-14 {
                                // Constant cone bound violated: nothing satisfies it.
                                return Solution::Infeasible { support: Vec::new() };
                            }
                            let t = Row::new(t.a.iter().map(|v| v / tn).collect(), t.b / tn);
                            if t.eval(xs) > ROW_TOL {
                                rows.push(t);
                                in_basis.push(false);
                                tangents += 1;
                                continue;
                            }
                        }
                    }
                    let value = cv.dot(&x);
                    let mut duals = Vec::new();
                    for (j, &b) in basis.iter().enumerate() {
                        if b < m && y[j] > 1e-12 {
                            duals.push((b, y[j] / user_scale[b]));
                        }
                    }
                    return Solution::Optimal { point: xs.to_vec(), value, duals };
                }
            };

            // Ratio test keeping the duals nonnegative.
            let ak = DVector::from_column_slice(&rows[k].a);
            let alpha = lut.solve(&ak).unwrap_or_else(|| DVector::zeros(n));
            let mut leave: Option<(usize, f64)> = None;
            for j in 0..n {
                if alpha[j] > PIVOT_TOL {
                    let ratio = y[j].max(0.0) / alpha[j];
                    let better = match leave {
                        None => true,
                        Some((lj, lr)) => ratio < lr - 1e-15 || (ratio <= lr + 1e-15 && basis[j] < basis[lj]),
                    };
                    if better {
                        leave = Some((j, ratio));
                    }
                }
            }
            match leave {
                None => {
                    let mut support: Vec<usize> = Vec::new();
                    if k < m {
                        support.push(k);
                    }
                    for j in 0..n {
                        if alpha[j] < -PIVOT_TOL && basis[j] < m {
                            support.push(basis[j]);
                        }
                    }
                    support.sort_unstable();
                    return Solution::Infeasible { support };
                }
                Some((j, _)) => {
                    in_basis[basis[j]] = false;
                    basis[j] = k;
                    in_basis[k] = true;
                }
            }
            pivots += 1;
            if pivots > 100_000 {
                // Numerical cycling: report the current (approximately optimal) vertex.
                let value = cv.dot(&x);
                return Solution::Optimal { point: xs.to_vec(), value, duals: Vec::new() };
            }
        }
    }

    /// Any feasible point, or a Farkas support.
    pub fn find_feasible(&self) -> Solution {
        self.maximize(&vec![0.0; self.dim()])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ball_lp(n: usize) -> Program {
        Program::new(vec![-1.0; n], vec![1.0; n]).with_cone(Cone::ball(n, 1.0))
    }

    #[test]
    fn box_lp_without_cone() {
        let mut p = Program::new(vec![0.0, 0.0], vec![1.0, 1.0]);
        p.push(Row::new(vec![1.0, 1.0], 1.5));
        let s = p.maximize(&[1.0, 1.0]);
        assert!((s.value().unwrap() - 1.5).abs() < 1e-12);
    }

    #[test]
    fn ball_support_function() {
        let p = ball_lp(3);
        let s = p.maximize(&[1.0, 2.0, 2.0]);
        assert!((s.value().unwrap() - 3.0).abs() < 1e-8, "{:?}", s);
    }

    #[test]
    fn half_ball_max() {
        // max x2 over {‖x‖ ≤ 1, x2 ≤ 0.5}
        let mut p = ball_lp(2);
        p.push(Row::new(vec![0.0, 1.0], 0.5));
        assert!((p.maximize(&[0.0, 1.0]).value().unwrap() - 0.5).abs() < 1e-12);
        // max x1 + x2 on the same set: tangency at (1,1)/√2 is cut off by x2 ≤ 0.5,
        // optimum at (√3/2, 1/2)
        let v = p.maximize(&[1.0, 1.0]).value().unwrap();
        assert!((v - (0.75f64.sqrt() + 0.5)).abs() < 1e-8, "{v}");
    }

    #[test]
    fn infeasible_slabs_report_support() {
        let mut p = ball_lp(2);
        p.push(Row::new(vec![0.0, 1.0], 0.0)); // irrelevant
        p.push(Row::new(vec![-1.0, 0.0], -0.5)); // x1 ≥ 0.5
        p.push(Row::new(vec![1.0, 0.0], 0.3)); // x1 ≤ 0.3
        match p.find_feasible() {
            Solution::Infeasible { support } => assert_eq!(support, vec![1, 2]),
            s => panic!("expected infeasible, got {s:?}"),
        }
    }

    #[test]
    fn infeasible_via_ball() {
        // x1 ≥ 0.8 and x2 ≥ 0.8 miss the unit disk but not the box.
        let mut p = ball_lp(2);
        p.push(Row::new(vec![-1.0, 0.0], -0.8));
        p.push(Row::new(vec![0.0, -1.0], -0.8));
        assert!(matches!(p.find_feasible(), Solution::Infeasible { .. }));
    }

    #[test]
    fn shifted_cone_chebyshev() {
        // max r s.t. ‖θ‖ + r ≤ 1, θ1 + r ≤ 0  →  r = 1/2, θ = (-1/2, 0)
        let mut p = Program::new(vec![-1.0, -1.0, -2.0], vec![1.0, 1.0, 1.0]);
        p.push(Row::new(vec![1.0, 0.0, 1.0], 0.0));
        let map = DMatrix::from_row_slice(2, 3, &[1.0, 0.0, 0.0, 0.0, 1.0, 0.0]);
        p.cone = Some(Cone { map, offset: DVector::zeros(2), linear: DVector::from_vec(vec![0.0, 0.0, 1.0]), bound: 1.0 });
        let s = p.maximize(&[0.0, 0.0, 1.0]);
        let z = s.point().unwrap();
        assert!((z[2] - 0.5).abs() < 1e-8 && (z[0] + 0.5).abs() < 1e-8, "{z:?}");
    }
}
