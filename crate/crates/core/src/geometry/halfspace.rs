use crate::geometry::lp::Row;
use crate::{Error, Result, Vector};

/// Oriented constraint; the kept side is `orientation·(⟨normal, x⟩ − intercept) ≥ 0`.
#[derive(Clone, Debug, PartialEq)]
pub struct Halfspace {
    normal: Vector,
    intercept: f64,
    orientation: i8,
}

impl Halfspace {
    pub fn new(normal: Vector, intercept: f64, orientation: i8) -> Result<Self> {
        if (normal.norm() - 1.0).abs() > 1e-9 {
            return Err(Error::invalid(format!("halfspace normal has norm {}", normal.norm())));
        }
        if orientation != 1 && orientation != -1 {
            return Err(Error::invalid("orientation must be +1 or -1"));
        }
        if !intercept.is_finite() {
            return Err(Error::invalid("non-finite intercept"));
        }
        Ok(Self { normal, intercept, orientation })
    }

    /// `H⁺(n, c) = {⟨n, x⟩ ≥ c}`; `n` is normalized (intercept rescaled to match).
    pub fn upper(direction: &Vector, intercept: f64) -> Result<Self> {
        let s = direction.norm();
        if s < 1e-12 {
            return Err(Error::DegenerateProjection);
        }
        Self::new(direction / s, intercept / s, 1)
    }

    /// `H⁻(n, c) = {⟨n, x⟩ ≤ c}`.
    pub fn lower(direction: &Vector, intercept: f64) -> Result<Self> {
        Ok(Self::upper(direction, intercept)?.complement())
    }

    pub fn normal(&self) -> &Vector {
        &self.normal
    }

    pub fn intercept(&self) -> f64 {
        self.intercept
    }

    pub fn orientation(&self) -> i8 {
        self.orientation
    }

    pub fn dim(&self) -> usize {
        self.normal.len()
    }

    /// Signed slack; nonnegative on the kept side.
    pub fn slack(&self, x: &Vector) -> f64 {
        f64::from(self.orientation) * (self.normal.dot(x) - self.intercept)
    }

    pub fn contains(&self, x: &Vector, tol: f64) -> bool {
        self.slack(x) >= -tol
    }

    /// Euclidean distance from `x` to the boundary hyperplane.
    pub fn distance(&self, x: &Vector) -> f64 {
        (self.normal.dot(x) - self.intercept).abs()
    }

    /// Same hyperplane, other side.
    pub fn complement(&self) -> Self {
        Self { normal: self.normal.clone(), intercept: self.intercept, orientation: -self.orientation }
    }

    /// Kept side written as `a·x ≤ b` with `‖a‖ = 1`.
    pub fn row(&self) -> Row {
        let o = f64::from(self.orientation);
        Row::new(self.normal.iter().map(|v| -o * v).collect(), -o * self.intercept)
    }

    /// Inward unit normal of the kept side.
    pub fn inward(&self) -> Vector {
        &self.normal * f64::from(self.orientation)
    }
}
