//! Independent oracles and diagnostics: the truncated master equation,
//! distribution tests, the jump-term bound and the system-size scaling of
//! fluctuations.

pub mod cme;
pub mod diagnostics;
pub mod fixtures;
pub mod jump;
pub mod sampling;
pub mod scaling;
pub mod stats;
pub mod suites;

pub use cme::{cme_evolve, cme_generator, DistributionVector, SparseGenerator, TruncatedStateSpace, DEFAULT_STATE_CAP};
pub use diagnostics::{convergence_curve_diagnostic, ConvergenceRow};
pub use jump::{jump_bound_check, jump_term, max_total_intensity, JumpBoundReport};
pub use sampling::{endpoint_samples, Sampler};
pub use scaling::{omega_scaling_study, ScalingPoint, ScalingStudy};
pub use stats::{distribution_distance, empirical_histogram, two_sample_chi2_pvalue, DistanceMetric, Histogram};
pub use suites::{run_suite, CheckOutcome, SUITES};
