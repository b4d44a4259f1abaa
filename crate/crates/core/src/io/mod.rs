//! Run specifications, CSV artifacts and run manifests.

pub mod manifest;
pub mod output;
pub mod pipeline;
pub mod spec;

pub use manifest::RunManifest;
pub use output::{
    format_real, write_convergence_csv, write_iterates_csv, write_scaling_csv, write_trajectory_csv, ScalingRow,
};
pub use pipeline::{reference_to_dir, run_to_dir, RunArtifacts, MANIFEST_FILE};
pub use spec::{HomogenizeSetting, ModelSpec, NetworkSpec, PropensitySpec, ReactionSpec, ResolvedRun, RunSection};
