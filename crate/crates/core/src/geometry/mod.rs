//! Core numerical geometry: affine spans, minimum-volume enclosing
//! ellipsoids with a rounding certificate, PSD seminorms and cluster
//! margins, and convex-hull membership.
//!
//! All operations are pure functions of their inputs and safe to call
//! concurrently.

mod hull;
mod metric;
mod mvee;
mod span;

pub use hull::hull_membership;
pub(crate) use hull::min_norm_point;
pub use metric::{margin_of_clustering, metric_distance, ClusterMetric, PsdMetric};
pub use mvee::{mvee, Ellipsoid, RoundingCertificate, MEMBERSHIP_TOL};
pub use span::{orthonormal_span, Span};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    /// The Khachiyan weight iteration exceeded its iteration cap; the
    /// requested epsilon is too small for the budget.
    #[error("ellipsoid iteration did not converge within {iterations} iterations")]
    NonConvergence { iterations: u64 },
    /// A quadratic form under a supposedly PSD matrix came out below the
    /// clamping threshold.
    #[error("PSD violation: quadratic form value {0} below -1e-12")]
    PsdViolation(f64),
    /// The hull feasibility solver did not terminate.
    #[error("hull membership solver failed to terminate (ill-conditioned input)")]
    LpFailure,
    /// A point handed to the cell indexer is not inside the ellipsoid.
    #[error("point is not a member of the ellipsoid")]
    NotInEllipsoid,
    /// A cluster label owns no points.
    #[error("cluster {0} has no points")]
    EmptyCluster(usize),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimMismatch { expected: usize, got: usize },
    #[error("operation requires a nonempty subset of points")]
    EmptySubset,
    #[error("invalid parameter: {0}")]
    InvalidParameter(&'static str),
}
