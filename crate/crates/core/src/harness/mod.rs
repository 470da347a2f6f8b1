//! Experiment orchestration: configuration, Monte Carlo runs of both
//! receivers and CSV output.

mod config;
mod record;
mod reduce;
mod run;

pub use config::{CdsPenalty, CdsSettings, Experiment, ExperimentConfig, Scheme, Sweep, SweepParameter};
pub use record::{
    create_output, efficiency_rows, read_records, write_efficiency, write_records, EfficiencyRow, MetricsRecord, CSV_COLUMNS,
};
pub use reduce::pairwise_reduce;
pub use run::{
    run_cds_point, run_ncds_point, run_points, run_sweep, validate_moments, MomentReport, NcdsPoint, RunOptions,
};
