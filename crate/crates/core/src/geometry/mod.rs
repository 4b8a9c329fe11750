//! Convex-body kernel over bodies `{‖θ‖ ≤ 1} ∩ cuts`.

pub mod arrangement;
mod body;
mod centroid;
mod cylinder;
mod halfspace;
pub mod lp;
mod subspace;
mod volume;

pub use body::{chebyshev_center, feasible, KnowledgeSet, Witness, FEAS_TOL};
pub use centroid::{approx_centroid, hit_and_run, sample_ball, CentroidOptions};
pub use cylinder::{cylindrify, Cylinder};
pub use halfspace::Halfspace;
pub use subspace::{orthonormal_complement, project_point, DimensionSplit, Subspace};
pub use volume::{mc_volume, VolumeEstimate};

/// Orthonormality tolerance.
pub const ORTHO_TOL: f64 = 1e-9;
