//! Closed-loop experiments: scenario files, the simulation loop, transient
//! metrics and disturbance-tolerance search.

mod io;
mod metrics;
mod run;
mod scenario;
mod tolerance;

pub use io::{write_metrics_json, write_trace_csv, MetricsReport};
pub use metrics::{transient_metrics, transient_metrics_of, TransientMetrics, DEFAULT_SETTLE_BAND, FINAL_WINDOW};
pub use run::{run_scenario, scenario_filter, Outcome, SimTrace, TraceRecord};
pub use scenario::{CaptureConfig, ControllerMode, EstimatorConfig, ScenarioConfig, ToleranceConfig};
pub use tolerance::{pass_rate, tolerance_search, ToleranceOutcome};
