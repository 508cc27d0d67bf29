//! Benchmark harness for the sketchls library.
//!
//! Runs configurable grids over (tail index ν, sketch size r, sketch kind),
//! evaluates the worst-case / prediction / residual efficiency criteria for
//! every replication — in closed form or by Monte Carlo — and persists the
//! per-replication and aggregate tables as CSV, together with leverage-score
//! profiles and theoretical-bound satisfaction rates. Everything is a pure
//! function of the config's master seed; see [`experiment`] for the stream
//! derivation rules and [`tables`] for the serialization contract.

pub mod config;
pub mod experiment;
pub mod tables;

pub use config::{default_grid, ExperimentConfig, SEED_ENV_VAR};
pub use experiment::{
    bound_rates, leverage_profiles, run_experiment, BoundRateRow, CellAggregate, LeverageProfile,
    ResultRow, ResultTable,
};
pub use tables::{
    emit_bound_rates, emit_leverage_profiles, emit_manifest, emit_tables, parse_results_csv,
    Manifest, TableFormat, AGGREGATE_HEADER, RESULTS_HEADER,
};
