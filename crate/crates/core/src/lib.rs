//! Corruption-robust contextual search.
//!
//! A learner repeatedly sees a unit context `x`, posts a query `ω` and only
//! learns whether the agent's perceived value `ṽ` was at least `ω`. Values are
//! linear, `v = ⟨x, θ*⟩`, but up to `C` answers may be adversarial. This crate
//! holds the geometric kernel, the CorPV learners (known budget and the
//! multi-layer agnostic wrapper), projected gradient descent, the
//! ProjectedVolume baseline and a seeded simulation harness.

pub mod baseline;
pub mod behaviors;
pub mod corpv;
pub mod error;
pub mod gd;
pub mod geometry;
pub mod harness;
pub mod layers;
pub mod losses;
pub mod rng;

pub use error::{Error, Result};
pub use nalgebra::DVector;

/// Column vector used for points, contexts and normals.
pub type Vector = nalgebra::DVector<f64>;
