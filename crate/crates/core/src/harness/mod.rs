//! End-to-end experiments: the comparison argument for two solutions, the
//! critical-mass analysis on the plane, randomised uniqueness runs and
//! sweeps toward 8π.

pub mod critical;
pub mod experiments;
pub mod oracle;
pub mod pipeline;

pub use critical::{critical_pair_analysis, crossing_radius, CriticalReport, Forced};
pub use experiments::{
    critical_sweep, sup_distance, uniqueness_experiment, StartOutcome, SweepRow, SweepTable, UniquenessReport,
    CLUSTER_TOLERANCE,
};
pub use pipeline::{
    distinct_pair, match_mass, theorem_pipeline, theorem_pipeline_with, Hypothesis, PipelineOptions,
    PipelineReport,
};
pub use oracle::{run_oracle_suite, OracleCheck, OracleReport};
