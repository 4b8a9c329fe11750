use nalgebra::{DMatrix, DVector};

use crate::geometry::lp::{Cone, Program, Row};
use crate::geometry::{orthonormal_complement, KnowledgeSet, Subspace};
use crate::{Error, Result, Vector};

/// `Cyl(K, S) = {z + Σ bᵢsᵢ : z ∈ Π_L K, min⟨θ,sᵢ⟩ ≤ bᵢ ≤ max⟨θ,sᵢ⟩}`.
///
/// The per-direction extents along `S` are solved once at construction.
#[derive(Clone, Debug)]
pub struct Cylinder {
    body: KnowledgeSet,
    large: Subspace,
    small: Vec<Vector>,
    ranges: Vec<(f64, f64)>,
}

pub fn cylindrify(body: &KnowledgeSet, small: &[Vector]) -> Result<Cylinder> {
    let d = body.dim();
    let large = Subspace::new(d, orthonormal_complement(d, small))?;
    Cylinder::with_large(body, small, large)
}

impl Cylinder {
    /// Build with an explicit large basis (must be an orthonormal basis of `S^⊥`).
    pub fn with_large(body: &KnowledgeSet, small: &[Vector], large: Subspace) -> Result<Self> {
        // Orthonormality of S itself.
        Subspace::new(body.dim(), small.to_vec())?;
        if large.dim() + small.len() != body.dim() {
            return Err(Error::invalid("S and L do not span the ambient space"));
        }
        let ranges = small.iter().map(|s| body.range(s)).collect::<Result<Vec<_>>>()?;
        Ok(Self { body: body.clone(), large, small: small.to_vec(), ranges })
    }

    pub fn body(&self) -> &KnowledgeSet {
        &self.body
    }

    pub fn large(&self) -> &Subspace {
        &self.large
    }

    pub fn small(&self) -> &[Vector] {
        &self.small
    }

    pub fn small_ranges(&self) -> &[(f64, f64)] {
        &self.ranges
    }

    /// `(min, max)` of `⟨x, ·⟩` over the cylinder.
    pub fn range(&self, x: &Vector) -> Result<(f64, f64)> {
        let px = self.large.project(x);
        let (mut lo, mut hi) = if px.norm() > 0.0 { self.body.range(&px)? } else { (0.0, 0.0) };
        for (s, (a, b)) in self.small.iter().zip(&self.ranges) {
            let c = s.dot(x);
            if c >= 0.0 {
                lo += c * a;
                hi += c * b;
            } else {
                lo += c * b;
                hi += c * a;
            }
        }
        Ok((lo, hi))
    }

    /// `w(Π_L K, Π_L x) + Σ |⟨x, sᵢ⟩|·w(K, sᵢ)`.
    pub fn width(&self, x: &Vector) -> Result<f64> {
        let (lo, hi) = self.range(x)?;
        Ok(hi - lo)
    }

    /// Center of the box along `S`: `Σ midᵢ sᵢ`.
    pub fn small_center(&self) -> Vector {
        let mut c = Vector::zeros(self.body.dim());
        for (s, (a, b)) in self.small.iter().zip(&self.ranges) {
            c.axpy(0.5 * (a + b), s, 1.0);
        }
        c
    }

    pub fn contains(&self, p: &Vector, tol: f64) -> bool {
        for (s, (a, b)) in self.small.iter().zip(&self.ranges) {
            let c = s.dot(p);
            if c < a - tol || c > b + tol {
                return false;
            }
        }
        self.projected_contains(&self.large.project(p), tol)
    }

    /// Is `z ∈ span(L)` in `Π_L K`?
    pub fn projected_contains(&self, z: &Vector, tol: f64) -> bool {
        if self.small.is_empty() {
            return self.body.contains(z, tol);
        }
        let zz = z.norm_squared();
        if zz > (1.0 + tol) * (1.0 + tol) {
            return false;
        }
        let k = self.small.len();
        let mut p = Program::new(vec![-1.0; k], vec![1.0; k])
            .with_cone(Cone::ball(k, (1.0 - zz).max(0.0).sqrt() + tol));
        for h in self.body.cuts() {
            let r = h.row();
            let a = Vector::from_column_slice(&r.a);
            let coeffs = self.small.iter().map(|s| a.dot(s)).collect();
            p.push(Row::new(coeffs, r.b - a.dot(z) + tol));
        }
        p.find_feasible().point().is_some()
    }

    /// Chord of `Π_L K` through `z` along `u` (both in L coordinates):
    /// the interval of `t` with `z + t·u ∈ Π_L K`.
    pub fn projected_chord(&self, z: &Vector, u: &Vector) -> Option<(f64, f64)> {
        let k = self.large.dim();
        let m = self.small.len();
        let za = self.large.embed(z);
        let ua = self.large.embed(u);
        let n = 1 + m;
        let mut lower = vec![-1.0; n];
        let mut upper = vec![1.0; n];
        lower[0] = -2.5;
        upper[0] = 2.5;
        let mut p = Program::new(lower, upper);
        for h in self.body.cuts() {
            let r = h.row();
            let a = Vector::from_column_slice(&r.a);
            let mut coeffs = Vec::with_capacity(n);
            coeffs.push(a.dot(&ua));
            coeffs.extend(self.small.iter().map(|s| a.dot(s)));
            p.push(Row::new(coeffs, r.b - a.dot(&za)));
        }
        let mut map = DMatrix::zeros(k + m, n);
        for i in 0..k {
            map[(i, 0)] = u[i];
        }
        for j in 0..m {
            map[(k + j, 1 + j)] = 1.0;
        }
        let mut offset = DVector::zeros(k + m);
        for i in 0..k {
            offset[i] = z[i];
        }
        p.cone = Some(Cone { map, offset, linear: DVector::zeros(n), bound: 1.0 });
        let mut c = vec![0.0; n];
        c[0] = 1.0;
        let hi = p.maximize(&c).value()?;
        c[0] = -1.0;
        let lo = -p.maximize(&c).value()?;
        Some((lo.min(0.0), hi.max(0.0)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Halfspace;

    fn v(x: &[f64]) -> Vector {
        Vector::from_column_slice(x)
    }

    #[test]
    fn empty_small_set_matches_body() {
        let k = KnowledgeSet::from_cuts(2, vec![Halfspace::upper(&v(&[1.0, 1.0]), 0.2).unwrap()]).unwrap();
        let c = cylindrify(&k, &[]).unwrap();
        for x in [v(&[1.0, 0.0]), v(&[0.6, 0.8]), v(&[-0.8, 0.6])] {
            assert!((c.width(&x).unwrap() - k.width(&x).unwrap()).abs() < 1e-9);
        }
    }

    #[test]
    fn ball_with_small_e2() {
        let k = KnowledgeSet::unit_ball(2);
        let c = cylindrify(&k, &[v(&[0.0, 1.0])]).unwrap();
        assert!((c.width(&v(&[1.0, 0.0])).unwrap() - 2.0).abs() < 1e-9);
        // The cylinder is the square [-1,1]²: diagonal width 2√2.
        let diag = v(&[1.0, 1.0]).normalize();
        assert!((c.width(&diag).unwrap() - 2.0 * 2f64.sqrt()).abs() < 1e-8);
        assert!(c.contains(&v(&[0.99, 0.99]), 1e-9));
        assert!(!k.contains(&v(&[0.99, 0.99]), 1e-9));
    }

    #[test]
    fn projected_chord_of_disk_slice() {
        // K = unit disk, S = {e2}: Π_L K = [-1, 1] along e1.
        let k = KnowledgeSet::unit_ball(2);
        let c = cylindrify(&k, &[v(&[0.0, 1.0])]).unwrap();
        let (lo, hi) = c.projected_chord(&v(&[0.25]), &v(&[1.0])).unwrap();
        assert!((lo + 1.25).abs() < 1e-8 && (hi - 0.75).abs() < 1e-8, "{lo} {hi}");
    }
}
