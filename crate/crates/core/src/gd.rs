//! Projected online gradient descent on the linear proxy `f_t(z) = −y_t⟨z, x_t⟩`.
//!
//! Feedback follows the protocol, `y = sgn(ṽ − ω)`: a sale (`y = +1`) means
//! the value was at least the query, so the estimate moves toward `x`.

use crate::{Error, Result, Vector};

#[derive(Clone, Debug, PartialEq)]
pub struct GdState {
    z: Vector,
    t: usize,
}

impl GdState {
    pub fn new(dim: usize) -> Self {
        Self { z: Vector::zeros(dim), t: 0 }
    }

    /// Start at `z` (clipped into the unit ball).
    pub fn starting_at(z: Vector) -> Self {
        Self { z: clip(z), t: 0 }
    }

    pub fn z(&self) -> &Vector {
        &self.z
    }

    /// Updates applied so far.
    pub fn round(&self) -> usize {
        self.t
    }

    /// `⟨x, z⟩` clamped to `[0, 1]`.
    pub fn query(&self, x: &Vector) -> f64 {
        x.dot(&self.z).clamp(0.0, 1.0)
    }

    /// `z ← Π(z + √(2/t)·y·x)` with `t` the 1-based round of this update.
    pub fn update(&mut self, x: &Vector, y: i8) -> Result<()> {
        if y != 1 && y != -1 {
            return Err(Error::invalid("feedback must be ±1"));
        }
        if x.len() != self.z.len() {
            return Err(Error::invalid("context dimension mismatch"));
        }
        self.t += 1;
        let gamma = (2.0 / self.t as f64).sqrt();
        let z = &self.z + x * (gamma * f64::from(y));
        self.z = clip(z);
        Ok(())
    }
}

/// Euclidean projection onto the unit ball.
fn clip(z: Vector) -> Vector {
    let n = z.norm();
    if n > 1.0 {
        z / n
    } else {
        z
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn e1(d: usize) -> Vector {
        let mut v = Vector::zeros(d);
        v[0] = 1.0;
        v
    }

    #[test]
    fn zero_start_queries_zero() {
        let g = GdState::new(3);
        assert_eq!(g.query(&Vector::from_vec(vec![0.6, 0.8, 0.0])), 0.0);
    }

    #[test]
    fn first_step_is_clipped() {
        let mut g = GdState::new(2);
        g.update(&e1(2), 1).unwrap();
        assert_eq!(g.z(), &e1(2));
        assert_eq!(g.query(&e1(2)), 1.0);
    }

    #[test]
    fn second_step_has_unit_rate() {
        let mut g = GdState::starting_at(e1(2));
        g.update(&e1(2), 1).unwrap();
        g.update(&e1(2), -1).unwrap();
        assert!(g.z().norm() < 1e-15);
    }

    #[test]
    fn rejects_bad_feedback() {
        assert!(GdState::new(2).update(&e1(2), 0).is_err());
    }
}
