use nalgebra::{DMatrix, DVector};

use crate::geometry::lp::{Cone, Program, Row, Solution};
use crate::geometry::Halfspace;
use crate::{Error, Result, Vector};

/// LP feasibility slack: a region whose inscribed radius is ≥ −FEAS_TOL counts as nonempty.
pub const FEAS_TOL: f64 = 1e-8;

/// Knowledge set `{‖θ‖ ≤ 1} ∩ cuts`, kept in H-representation.
#[derive(Clone, Debug, PartialEq)]
pub struct KnowledgeSet {
    dim: usize,
    cuts: Vec<Halfspace>,
}

/// Interior witness: the Chebyshev center and inscribed radius.
#[derive(Clone, Debug)]
pub struct Witness {
    pub center: Vector,
    pub radius: f64,
    /// Rows with positive multiplier at the optimum (indices into the rows
    /// handed to [`chebyshev_center`]); when the radius is negative they form
    /// an infeasibility certificate.
    pub support: Vec<usize>,
}

impl KnowledgeSet {
    pub fn unit_ball(dim: usize) -> Self {
        Self { dim, cuts: Vec::new() }
    }

    pub fn from_cuts(dim: usize, cuts: Vec<Halfspace>) -> Result<Self> {
        if cuts.iter().any(|h| h.dim() != dim) {
            return Err(Error::invalid("cut dimension mismatch"));
        }
        Ok(Self { dim, cuts })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn cuts(&self) -> &[Halfspace] {
        &self.cuts
    }

    pub fn add_cut(&mut self, h: Halfspace) {
        assert_eq!(h.dim(), self.dim);
        self.cuts.push(h);
    }

    pub fn with_cut(&self, h: Halfspace) -> Self {
        let mut k = self.clone();
        k.add_cut(h);
        k
    }

    pub fn rows(&self) -> Vec<Row> {
        self.cuts.iter().map(Halfspace::row).collect()
    }

    fn program(&self) -> Program {
        let d = self.dim;
        let mut p = Program::new(vec![-1.0; d], vec![1.0; d]).with_cone(Cone::ball(d, 1.0));
        for r in self.rows() {
            p.push(r);
        }
        p
    }

    /// Maximizer of `⟨u, θ⟩` over the body.
    pub fn argmax(&self, u: &Vector) -> Result<(f64, Vector)> {
        match self.program().maximize(u.as_slice()) {
            Solution::Optimal { point, value, .. } => Ok((value, Vector::from_vec(point))),
            Solution::Infeasible { .. } => Err(Error::EmptyKnowledgeSet),
        }
    }

    /// `(min, max)` of `⟨u, θ⟩`; `u` need not be unit.
    pub fn range(&self, u: &Vector) -> Result<(f64, f64)> {
        let p = self.program();
        let hi = p.maximize(u.as_slice()).value().ok_or(Error::EmptyKnowledgeSet)?;
        let neg: Vec<f64> = u.iter().map(|v| -v).collect();
        let lo = -p.maximize(&neg).value().ok_or(Error::EmptyKnowledgeSet)?;
        Ok((lo, hi.max(lo)))
    }

    /// `w(K, u) = max⟨u,θ⟩ − min⟨u,θ⟩`; scales linearly in `u`.
    pub fn width(&self, u: &Vector) -> Result<f64> {
        let (lo, hi) = self.range(u)?;
        Ok(hi - lo)
    }

    pub fn contains(&self, x: &Vector, tol: f64) -> bool {
        x.norm() <= 1.0 + tol && self.cuts.iter().all(|h| h.contains(x, tol))
    }

    pub fn chebyshev(&self) -> Option<Witness> {
        chebyshev_center(self.dim, &self.rows())
    }

    pub fn is_empty(&self) -> bool {
        self.chebyshev().is_none_or(|w| w.radius < -FEAS_TOL)
    }
}

/// Largest ball inside `{‖θ‖ ≤ 1} ∩ {a·θ ≤ b}` (rows normalized internally).
///
/// The radius is allowed to go negative (down to −2), so the program is
/// solvable for any nearly-feasible system; `None` means the rows are
/// contradictory even after that relaxation.
pub fn chebyshev_center(dim: usize, rows: &[Row]) -> Option<Witness> {
    let n = dim + 1;
    let mut lower = vec![-1.0; n];
    let mut upper = vec![1.0; n];
    lower[dim] = -2.0;
    upper[dim] = 1.0;
    let mut p = Program::new(lower, upper);
    for r in rows {
        let s = r.a.iter().map(|v| v * v).sum::<f64>().sqrt();
        let mut a: Vec<f64> = r.a.iter().map(|v| v / s.max(1e-300)).collect();
        a.push(1.0);
        p.push(Row::new(a, r.b / s.max(1e-300)));
    }
    let map = DMatrix::from_fn(dim, n, |i, j| if i == j { 1.0 } else { 0.0 });
    let mut linear = DVector::zeros(n);
    linear[dim] = 1.0;
    p.cone = Some(Cone { map, offset: DVector::zeros(dim), linear, bound: 1.0 });
    let mut c = vec![0.0; n];
    c[dim] = 1.0;
    match p.maximize(&c) {
        Solution::Optimal { point, duals, .. } => Some(Witness {
            center: Vector::from_column_slice(&point[..dim]),
            radius: point[dim],
            support: { let mut s: Vec<usize> = duals.into_iter().map(|(i, _)| i).collect(); s.sort_unstable(); s },
        }),
        Solution::Infeasible { .. } => None,
    }
}

/// Is `{‖θ‖ ≤ 1} ∩ cuts ∩ extra` nonempty? Returns the Chebyshev center as witness.
pub fn feasible(dim: usize, cuts: &[Halfspace], extra: &[Halfspace]) -> Option<Witness> {
    let rows: Vec<Row> = cuts.iter().chain(extra).map(Halfspace::row).collect();
    chebyshev_center(dim, &rows).filter(|w| w.radius >= -FEAS_TOL)
}
