use crate::geometry::ORTHO_TOL;
use crate::{Error, Result, Vector};

/// Span of an orthonormal list of vectors.
#[derive(Clone, Debug, PartialEq)]
pub struct Subspace {
    ambient: usize,
    basis: Vec<Vector>,
}

impl Subspace {
    pub fn new(ambient: usize, basis: Vec<Vector>) -> Result<Self> {
        check_orthonormal(ambient, &basis)?;
        Ok(Self { ambient, basis })
    }

    pub fn full(ambient: usize) -> Self {
        let basis = (0..ambient).map(|i| unit(ambient, i)).collect();
        Self { ambient, basis }
    }

    pub fn zero(ambient: usize) -> Self {
        Self { ambient, basis: Vec::new() }
    }

    pub fn ambient(&self) -> usize {
        self.ambient
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn is_empty(&self) -> bool {
        self.basis.is_empty()
    }

    pub fn basis(&self) -> &[Vector] {
        &self.basis
    }

    /// Coordinates `(⟨x, e_i⟩)_i`.
    pub fn coords(&self, x: &Vector) -> Vector {
        Vector::from_iterator(self.basis.len(), self.basis.iter().map(|e| e.dot(x)))
    }

    /// `Σ c_i e_i`.
    pub fn embed(&self, c: &Vector) -> Vector {
        let mut out = Vector::zeros(self.ambient);
        for (e, ci) in self.basis.iter().zip(c.iter()) {
            out.axpy(*ci, e, 1.0);
        }
        out
    }

    pub fn project(&self, x: &Vector) -> Vector {
        self.embed(&self.coords(x))
    }

    /// Orthonormal basis of the orthogonal complement.
    pub fn complement(&self) -> Subspace {
        Subspace { ambient: self.ambient, basis: orthonormal_complement(self.ambient, &self.basis) }
    }
}

/// `Π_L x = Σ_{l∈L} ⟨x,l⟩ l`.
pub fn project_point(x: &Vector, l: &Subspace) -> Vector {
    l.project(x)
}

fn unit(d: usize, i: usize) -> Vector {
    let mut e = Vector::zeros(d);
    e[i] = 1.0;
    e
}

fn check_orthonormal(ambient: usize, basis: &[Vector]) -> Result<()> {
    for (i, a) in basis.iter().enumerate() {
        if a.len() != ambient {
            return Err(Error::invalid("basis vector dimension mismatch"));
        }
        for b in &basis[i..] {
            let target = if std::ptr::eq(a, b) { 1.0 } else { 0.0 };
            if (a.dot(b) - target).abs() > ORTHO_TOL {
                return Err(Error::invalid("basis is not orthonormal"));
            }
        }
    }
    Ok(())
}

/// Orthonormal basis of `span(vectors)^⊥`, built by Gram–Schmidt over the
/// standard basis (twice, for stability) keeping the largest residuals.
pub fn orthonormal_complement(ambient: usize, vectors: &[Vector]) -> Vec<Vector> {
    let mut frame: Vec<Vector> = vectors.to_vec();
    let want = ambient.saturating_sub(vectors.len());
    let mut out = Vec::with_capacity(want);
    while out.len() < want {
        let mut best: Option<Vector> = None;
        let mut best_norm = 0.0;
        for i in 0..ambient {
            let mut r = unit(ambient, i);
            for _ in 0..2 {
                for f in &frame {
                    let c = f.dot(&r);
                    r.axpy(-c, f, 1.0);
                }
            }
            let n = r.norm();
            if n > best_norm + 1e-12 {
                best_norm = n;
                best = Some(r);
            }
        }
        match best {
            Some(r) if best_norm > 1e-8 => {
                let r = r / best_norm;
                frame.push(r.clone());
                out.push(r);
            }
            _ => break,
        }
    }
    out
}

/// Small directions `S` (width ≤ δ) and the large basis `L` of their complement.
#[derive(Clone, Debug, PartialEq)]
pub struct DimensionSplit {
    pub small: Vec<Vector>,
    pub large: Subspace,
    pub delta: f64,
}

impl DimensionSplit {
    pub fn initial(ambient: usize, delta: f64) -> Self {
        Self { small: Vec::new(), large: Subspace::full(ambient), delta }
    }

    pub fn ambient(&self) -> usize {
        self.large.ambient()
    }

    /// Max |⟨a, b⟩ − [a = b]| over all pairs of `S ∪ L`.
    pub fn orthonormality_error(&self) -> f64 {
        let all: Vec<&Vector> = self.small.iter().chain(self.large.basis()).collect();
        let mut err: f64 = 0.0;
        for (i, a) in all.iter().enumerate() {
            for (j, b) in all.iter().enumerate() {
                let t = if i == j { 1.0 } else { 0.0 };
                err = err.max((a.dot(b) - t).abs());
            }
        }
        err
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn full_projection_is_identity() {
        let x = Vector::from_vec(vec![0.3, -0.7, 0.2]);
        assert!((Subspace::full(3).project(&x) - &x).norm() < 1e-15);
    }

    #[test]
    fn axis_projection() {
        let l = Subspace::new(2, vec![Vector::from_vec(vec![1.0, 0.0])]).unwrap();
        let p = project_point(&Vector::from_vec(vec![3.0, 4.0]), &l);
        assert_eq!(p, Vector::from_vec(vec![3.0, 0.0]));
    }

    #[test]
    fn complement_spans_the_rest() {
        let s = vec![Vector::from_vec(vec![1.0, 1.0, 0.0]).normalize()];
        let c = orthonormal_complement(3, &s);
        assert_eq!(c.len(), 2);
        for v in &c {
            assert!(v.dot(&s[0]).abs() < 1e-12);
            assert!((v.norm() - 1.0).abs() < 1e-12);
        }
        assert!(c[0].dot(&c[1]).abs() < 1e-12);
    }

    #[test]
    fn rejects_non_orthonormal() {
        let b = vec![Vector::from_vec(vec![1.0, 0.0]), Vector::from_vec(vec![1.0, 1.0]).normalize()];
        assert!(Subspace::new(2, b).is_err());
    }
}
