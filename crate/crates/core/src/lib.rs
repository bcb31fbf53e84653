//! Exact recovery of a latent clustering from same-cluster queries.
//!
//! The library implements an active clustering pipeline for point sets whose
//! latent clusters are separated by a margin under per-cluster PSD seminorms:
//!
//! - [`geometry`]: affine spans, minimum-volume enclosing ellipsoids with a
//!   rounding certificate, PSD metrics, margins, convex-hull membership.
//! - [`oracle`]: a simulated same-cluster-query oracle over a latent
//!   clustering, with exact query accounting.
//! - [`tessellation`]: the monochromatic tessellation of an enclosing
//!   ellipsoid and the one-query-per-cell cluster-chunk learner.
//! - [`recur`]: the outer sampling/recovery loop, the greedy hull expansion
//!   heuristic, and the clustering error metric.
//! - [`baseline`]: the binary-search baseline it is compared against.
//! - [`instances`]: margin-verified synthetic instance generators and
//!   JSON (de)serialization.

pub mod baseline;
pub mod geometry;
pub mod instances;
pub mod oracle;
pub mod points;
pub mod recur;
pub mod report;
pub mod seeding;
pub mod tessellation;

pub use baseline::{scq_kmeans, BaselineConfig, BaselineError};
pub use geometry::{
    hull_membership, margin_of_clustering, metric_distance, mvee, orthonormal_span, ClusterMetric,
    Ellipsoid, GeometryError, PsdMetric, RoundingCertificate, Span,
};
pub use instances::{
    gen_adversarial_kmeans, gen_adversarial_kmeans_perturbed, gen_ellipsoidal, gen_lb_hypercube,
    gen_lb_sphere, load_instance, save_instance, InstanceError, Provenance,
};
pub use oracle::{
    label_with_representatives, LatentInstance, OracleError, QueryLedger, SameClusterOracle,
    SimulatedOracle,
};
pub use points::PointSet;
pub use recur::{
    clustering_error, greedy_hull_expansion, recur, RecoveredClustering, RecurConfig, RecurError,
    RoundStats, RunTrace, SamplingMode,
};
pub use tessellation::{cell_key, tess_params, tessellation_learn, CellKey, TessOutcome, TessParams};
