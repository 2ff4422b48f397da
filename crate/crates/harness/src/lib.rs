//! Mission simulation, benchmark protocols, result files and heatmaps for `unified-ipp`.

pub mod benchmark;
pub mod config;
pub mod error;
pub mod heatmap;
pub mod mission;
pub mod results;
pub mod seeds;

pub use benchmark::{run_benchmark, BenchmarkRun, SummaryRow};
pub use config::{BenchmarkConfig, FeatureKind, MissionConfig, PlannerKind, Protocol};
pub use error::{HarnessError, Result};
pub use heatmap::render_heatmap;
pub use mission::{run_mission, EpisodeLog, Mission};
pub use results::write_results;
