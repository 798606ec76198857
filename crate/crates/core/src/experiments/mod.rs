//! Simulation scenarios with two-tone gapped signals, a seeded Monte Carlo
//! runner and the error metrics it aggregates.

mod baseline;
mod metrics;
mod montecarlo;
mod scenario;

pub use baseline::periodogram_peaks;
pub use metrics::{match_frequencies, mse, rmse};
pub use montecarlo::{run_monte_carlo, run_monte_carlo_with_threads, MonteCarloReport, ReportRow};
pub use scenario::{
    gap_lengths, retained_indices, scenario_4a, scenario_4a_with, scenario_4b, scenario_4b_with,
    scenario_4c, scenario_4c_with, Drift, Method, Scenario, SegmentCounts, DEFAULT_DRIFT,
    DEFAULT_RUNS, FULL_RUNS,
};
