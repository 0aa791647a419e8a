//! Command dispatch for the `pitchstab` binary. Everything returns a
//! [`CommandOutcome`] so the binary only prints and exits.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use nalgebra::DMatrix;
use pitchstab::fuzzy::FuzzyConfig;
use pitchstab::harness::{
    run_scenario, tolerance_search, transient_metrics, write_metrics_json, write_trace_csv, EstimatorConfig,
    MetricsReport, Outcome, ScenarioConfig, TransientMetrics, DEFAULT_SETTLE_BAND,
};
use pitchstab::kalman::{design_filter, filter_riccati_residual};
use pitchstab::lqr::{control_riccati_residual, design_controller, CostPair};
use pitchstab::statespace::{simulate, StateSpaceModel};
use pitchstab::sysid::{identify, read_csv, vaf_scalar};
use pitchstab::Error;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::Value;

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVALID: i32 = 1;
pub const EXIT_NUMERICAL: i32 = 2;
pub const EXIT_FELL: i32 = 3;

/// Caps the worker count of `sweep`.
pub const THREADS_ENV: &str = "PITCHSTAB_THREADS";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CommandOutcome {
    pub exit_code: i32,
    pub artifacts: Vec<PathBuf>,
    pub summary: String,
}

impl CommandOutcome {
    fn ok(summary: String) -> Self {
        CommandOutcome { exit_code: EXIT_OK, artifacts: Vec::new(), summary }
    }

    fn with_artifacts(mut self, artifacts: Vec<PathBuf>) -> Self {
        self.artifacts = artifacts;
        self
    }
}

impl From<Error> for CommandOutcome {
    fn from(e: Error) -> Self {
        let exit_code = if e.is_numerical() { EXIT_NUMERICAL } else { EXIT_INVALID };
        CommandOutcome { exit_code, artifacts: Vec::new(), summary: e.to_string() }
    }
}

#[derive(Debug, Parser)]
#[command(name = "pitchstab", version, about = "Pitch-axis balance stabilization toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Fit a state-space model to a t,u,theta,theta_dot log.
    Identify {
        #[arg(long)]
        data: PathBuf,
        #[arg(long, default_value_t = 2)]
        order: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Replay a log through a model and report VAF per channel.
    Validate {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        data: PathBuf,
    },
    /// Solve a controller or estimator design.
    #[command(subcommand)]
    Design(Design),
    /// Evaluate the fuzzy gain scheduler.
    #[command(subcommand)]
    Fuzzy(Fuzzy),
    /// Run one scenario.
    Simulate(SimulateArgs),
    /// Run a scenario once per parameter value.
    Sweep(SweepArgs),
}

#[derive(Debug, Subcommand)]
enum Design {
    /// State-feedback gain for Q = diag(q11, 1), R = 1.
    Lqr {
        #[arg(long)]
        model: PathBuf,
        #[arg(long, default_value_t = 40.0)]
        q11: f64,
    },
    /// Steady-state estimator gain for Vd = I, Vn = diag(1e-6, vn22).
    Kalman {
        #[arg(long)]
        model: PathBuf,
        #[arg(long, default_value_t = 35.0)]
        vn22: f64,
    },
}

#[derive(Debug, Subcommand)]
enum Fuzzy {
    /// Scheduled gains at one operating point.
    Eval {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        theta: f64,
        #[arg(long, allow_hyphen_values = true)]
        theta_dot: f64,
    },
}

#[derive(Debug, Args)]
struct SimulateArgs {
    #[arg(long)]
    scenario: PathBuf,
    /// Overrides the scenario seed.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    trace: Option<PathBuf>,
    #[arg(long)]
    metrics: Option<PathBuf>,
    /// Exit with status 3 if the plant falls.
    #[arg(long)]
    fail_on_fall: bool,
}

#[derive(Debug, Args)]
struct SweepArgs {
    #[arg(long)]
    scenario: PathBuf,
    /// Dotted path into the scenario, e.g. `plant.pendulum.servo_stiffness`
    /// or `disturbances.0.energy_j`.
    #[arg(long)]
    param: String,
    /// Comma-separated values; each is read as JSON, else as a string.
    #[arg(long, value_delimiter = ',', required = true, allow_hyphen_values = true)]
    values: Vec<String>,
    /// Also write the table as JSON.
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Config file kinds understood by [`load_and_validate_config`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConfigKind {
    Model,
    Fuzzy,
    Estimator,
    Scenario,
}

#[derive(Debug, Clone, PartialEq)]
pub enum LoadedConfig {
    Model(StateSpaceModel),
    Fuzzy(FuzzyConfig),
    Estimator(EstimatorConfig),
    Scenario(Box<ScenarioConfig>),
}

/// Parses a config file and checks every invariant of its kind.
pub fn load_and_validate_config(path: &Path, kind: ConfigKind) -> pitchstab::Result<LoadedConfig> {
    let text = read_text(path)?;
    match kind {
        ConfigKind::Model => Ok(LoadedConfig::Model(parse_json(path, &text)?)),
        ConfigKind::Fuzzy => {
            let cfg: FuzzyConfig = parse_json(path, &text)?;
            cfg.build()?;
            Ok(LoadedConfig::Fuzzy(cfg))
        }
        ConfigKind::Estimator => {
            let cfg: EstimatorConfig = parse_json(path, &text)?;
            cfg.covariances()?;
            Ok(LoadedConfig::Estimator(cfg))
        }
        ConfigKind::Scenario => {
            let cfg: ScenarioConfig = parse_json(path, &text)?;
            cfg.validate()?;
            Ok(LoadedConfig::Scenario(Box::new(cfg)))
        }
    }
}

fn read_text(path: &Path) -> pitchstab::Result<String> {
    std::fs::read_to_string(path).map_err(|source| Error::Io { path: path.display().to_string(), source })
}

fn parse_json<T: serde::de::DeserializeOwned>(path: &Path, text: &str) -> pitchstab::Result<T> {
    serde_json::from_str(text).map_err(|e| Error::Parse { path: path.display().to_string(), message: e.to_string() })
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> pitchstab::Result<()> {
    let text = serde_json::to_string_pretty(value)
        .map_err(|e| Error::Parse { path: path.display().to_string(), message: e.to_string() })?;
    std::fs::write(path, text + "\n").map_err(|source| Error::Io { path: path.display().to_string(), source })
}

fn load_model(path: &Path) -> pitchstab::Result<StateSpaceModel> {
    match load_and_validate_config(path, ConfigKind::Model)? {
        LoadedConfig::Model(m) => Ok(m),
        _ => unreachable!("model kind yields a model"),
    }
}

fn load_scenario(path: &Path) -> pitchstab::Result<ScenarioConfig> {
    match load_and_validate_config(path, ConfigKind::Scenario)? {
        LoadedConfig::Scenario(s) => Ok(*s),
        _ => unreachable!("scenario kind yields a scenario"),
    }
}

/// Parses `args` (program name first) and runs the command.
pub fn dispatch<I, T>(args: I) -> CommandOutcome
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let exit_code = if e.use_stderr() { EXIT_INVALID } else { EXIT_OK };
            return CommandOutcome { exit_code, artifacts: Vec::new(), summary: e.render().to_string() };
        }
    };
    let result = match cli.command {
        Command::Identify { data, order, out } => run_identify(&data, order, &out),
        Command::Validate { model, data } => run_validate(&model, &data),
        Command::Design(Design::Lqr { model, q11 }) => run_design_lqr(&model, q11),
        Command::Design(Design::Kalman { model, vn22 }) => run_design_kalman(&model, vn22),
        Command::Fuzzy(Fuzzy::Eval { config, theta, theta_dot }) => run_fuzzy_eval(&config, theta, theta_dot),
        Command::Simulate(args) => run_simulate(&args),
        Command::Sweep(args) => run_sweep(&args),
    };
    result.unwrap_or_else(CommandOutcome::from)
}

fn run_identify(data: &Path, order: usize, out: &Path) -> pitchstab::Result<CommandOutcome> {
    let series = read_csv(data)?;
    let id = identify(&series, order)?;
    write_json(out, &id.model)?;
    let summary = format!(
        "identified order-{order} model from {} samples at {:.3} Hz\nA = {}\nB = {}\nresidual rms = {:?}\ncondition = {:.3e}",
        series.len(),
        series.sample_rate,
        fmt_matrix(id.model.a()),
        fmt_matrix(id.model.b()),
        id.residual_rms,
        id.condition_estimate
    );
    Ok(CommandOutcome::ok(summary).with_artifacts(vec![out.to_path_buf()]))
}

fn run_validate(model_path: &Path, data: &Path) -> pitchstab::Result<CommandOutcome> {
    let model = load_model(model_path)?;
    let series = read_csv(data)?;
    let x0 = series.outputs[0].clone();
    let predicted = simulate(&model, &x0, &series.inputs)?;
    let mut summary = String::new();
    for (i, name) in ["theta", "theta_dot"].iter().enumerate().take(model.n_outputs()) {
        let v = vaf_scalar(&series.output_channel(i), &predicted.output_channel(i))?;
        let _ = writeln!(summary, "VAF {name} = {v:.4}%");
    }
    Ok(CommandOutcome::ok(summary.trim_end().to_string()))
}

fn run_design_lqr(model_path: &Path, q11: f64) -> pitchstab::Result<CommandOutcome> {
    let model = load_model(model_path)?;
    let cost = CostPair::with_q11(q11)?;
    let d = design_controller(&model, &cost)?;
    let residual = control_riccati_residual(&model, &cost, &d.p_riccati)?;
    Ok(CommandOutcome::ok(format!(
        "K = {}\nriccati residual = {residual:.3e} ({} iterations)\nclosed-loop spectral radius = {:.6}",
        fmt_matrix(&d.k),
        d.iterations,
        d.closed_loop_radius
    )))
}

fn run_design_kalman(model_path: &Path, vn22: f64) -> pitchstab::Result<CommandOutcome> {
    let model = load_model(model_path)?;
    let cov = pitchstab::kalman::CovariancePair::with_vn22(vn22)?;
    let d = design_filter(&model, &cov)?;
    let residual = filter_riccati_residual(&model, &cov, &d.p_riccati)?;
    Ok(CommandOutcome::ok(format!(
        "Kf = {}\nriccati residual = {residual:.3e} ({} iterations)\nestimator spectral radius = {:.6}",
        fmt_matrix(&d.kf),
        d.iterations,
        d.closed_loop_radius
    )))
}

fn run_fuzzy_eval(config: &Path, theta: f64, theta_dot: f64) -> pitchstab::Result<CommandOutcome> {
    let cfg = match load_and_validate_config(config, ConfigKind::Fuzzy)? {
        LoadedConfig::Fuzzy(c) => c,
        _ => unreachable!("fuzzy kind yields a fuzzy config"),
    };
    let mut scheduler = cfg.build()?;
    let (ka, kv) = scheduler.schedule_gains(theta, theta_dot);
    Ok(CommandOutcome::ok(format!("K = [{ka:.4}, {kv:.4}]")))
}

fn run_simulate(args: &SimulateArgs) -> pitchstab::Result<CommandOutcome> {
    let mut cfg = load_scenario(&args.scenario)?;
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    let trace = run_scenario(&cfg)?;
    let metrics = transient_metrics(&trace, DEFAULT_SETTLE_BAND)?;
    let mut artifacts = Vec::new();
    if let Some(path) = &args.trace {
        write_trace_csv(path, &trace)?;
        artifacts.push(path.clone());
    }
    if let Some(path) = &args.metrics {
        write_metrics_json(path, &MetricsReport { metrics, outcome: trace.outcome })?;
        artifacts.push(path.clone());
    }
    let summary = format!(
        "{}: {} after {} samples, max |theta| = {:.3} deg, steps = {}\n{}",
        cfg.name,
        outcome_word(trace.outcome),
        trace.records.len(),
        trace.max_abs_theta(),
        trace.steps_taken(),
        fmt_metrics(&metrics)
    );
    let exit_code = if args.fail_on_fall && trace.outcome == Outcome::Fell { EXIT_FELL } else { EXIT_OK };
    Ok(CommandOutcome { exit_code, artifacts, summary })
}

#[derive(Debug, Clone, Serialize)]
struct SweepRow {
    value: Value,
    outcome: Outcome,
    metrics: TransientMetrics,
    tolerated: Option<f64>,
}

fn run_sweep(args: &SweepArgs) -> pitchstab::Result<CommandOutcome> {
    let base: Value = parse_json(&args.scenario, &read_text(&args.scenario)?)?;
    let configs = args
        .values
        .iter()
        .map(|raw| {
            let value = serde_json::from_str(raw.trim()).unwrap_or_else(|_| Value::String(raw.trim().to_string()));
            let mut doc = base.clone();
            set_path(&mut doc, &args.param, value.clone()).map_err(Error::Validation)?;
            let cfg: ScenarioConfig = serde_json::from_value(doc).map_err(|e| Error::Parse {
                path: format!("{} with {}={raw}", args.scenario.display(), args.param),
                message: e.to_string(),
            })?;
            cfg.validate()?;
            Ok((value, cfg))
        })
        .collect::<pitchstab::Result<Vec<_>>>()?;

    let pool = sweep_pool()?;
    let rows = pool.install(|| {
        configs
            .par_iter()
            .map(|(value, cfg)| {
                let trace = run_scenario(cfg)?;
                let metrics = transient_metrics(&trace, DEFAULT_SETTLE_BAND)?;
                let tolerated = match &cfg.tolerance {
                    Some(search) => Some(tolerance_search(cfg, search)?.tolerated()),
                    None => None,
                };
                Ok(SweepRow { value: value.clone(), outcome: trace.outcome, metrics, tolerated })
            })
            .collect::<pitchstab::Result<Vec<_>>>()
    })?;

    let mut artifacts = Vec::new();
    if let Some(out) = &args.out {
        write_json(out, &rows)?;
        artifacts.push(out.clone());
    }
    Ok(CommandOutcome::ok(fmt_sweep(&args.param, &rows)).with_artifacts(artifacts))
}

fn sweep_pool() -> pitchstab::Result<rayon::ThreadPool> {
    let threads = match std::env::var(THREADS_ENV) {
        Ok(v) => v
            .trim()
            .parse::<usize>()
            .ok()
            .filter(|&n| n > 0)
            .ok_or_else(|| Error::Validation(format!("{THREADS_ENV}: expected a positive integer, got {v:?}")))?,
        Err(_) => 0,
    };
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::Validation(format!("{THREADS_ENV}: {e}")))
}

/// Replaces the value at a dotted path, creating missing object keys.
/// Numeric segments index arrays.
fn set_path(doc: &mut Value, path: &str, value: Value) -> Result<(), String> {
    let segments: Vec<&str> = path.split('.').collect();
    if segments.iter().any(|s| s.is_empty()) {
        return Err(format!("param: malformed path {path:?}"));
    }
    let mut node = doc;
    for (depth, seg) in segments.iter().enumerate() {
        let here = segments[..=depth].join(".");
        node = match node {
            Value::Array(items) => {
                let i: usize = seg.parse().map_err(|_| format!("param: {here} must index an array"))?;
                let len = items.len();
                items.get_mut(i).ok_or_else(|| format!("param: {here} is out of range (length {len})"))?
            }
            Value::Object(map) => map.entry(seg.to_string()).or_insert(Value::Object(Default::default())),
            _ => return Err(format!("param: {here} is not inside an object or array")),
        };
    }
    *node = value;
    Ok(())
}

fn outcome_word(o: Outcome) -> &'static str {
    match o {
        Outcome::Stood => "stood",
        Outcome::Fell => "fell",
    }
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or_else(|| "-".to_string(), |x| format!("{x:.3}"))
}

fn fmt_metrics(m: &TransientMetrics) -> String {
    format!(
        "rise {} s, settling {} s, overshoot {:.3} deg, steady-state error {:.3} deg, delta {:.3} deg",
        fmt_opt(m.rise_time_s),
        fmt_opt(m.settling_time_s),
        m.max_overshoot_deg,
        m.steady_state_error_deg,
        m.robustness_delta_deg
    )
}

fn fmt_sweep(param: &str, rows: &[SweepRow]) -> String {
    let mut out = format!(
        "{param:>24} {:>7} {:>8} {:>8} {:>9} {:>9} {:>9} {:>10}\n",
        "outcome", "rise_s", "settle_s", "overshoot", "ss_error", "delta", "tolerated"
    );
    for r in rows {
        let _ = writeln!(
            out,
            "{:>24} {:>7} {:>8} {:>8} {:>9.3} {:>9.3} {:>9.3} {:>10}",
            r.value.to_string(),
            outcome_word(r.outcome),
            fmt_opt(r.metrics.rise_time_s),
            fmt_opt(r.metrics.settling_time_s),
            r.metrics.max_overshoot_deg,
            r.metrics.steady_state_error_deg,
            r.metrics.robustness_delta_deg,
            r.tolerated.map_or_else(|| "-".to_string(), |t| format!("{t:.4}"))
        );
    }
    out.trim_end().to_string()
}

fn fmt_matrix(m: &DMatrix<f64>) -> String {
    let rows: Vec<String> = (0..m.nrows())
        .map(|i| {
            let cells: Vec<String> = m.row(i).iter().map(|v| format!("{v:.4}")).collect();
            format!("[{}]", cells.join(", "))
        })
        .collect();
    if rows.len() == 1 {
        rows[0].clone()
    } else {
        format!("[{}]", rows.join(", "))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn set_path_walks_objects_and_arrays() {
        let mut doc = json!({ "plant": {}, "disturbances": [{ "energy_j": 0.2 }] });
        set_path(&mut doc, "plant.pendulum.servo_stiffness", json!(4.3)).unwrap();
        set_path(&mut doc, "disturbances.0.energy_j", json!(0.7)).unwrap();
        assert_eq!(doc["plant"]["pendulum"]["servo_stiffness"], 4.3);
        assert_eq!(doc["disturbances"][0]["energy_j"], 0.7);
    }

    #[test]
    fn set_path_reports_bad_segments() {
        let mut doc = json!({ "disturbances": [], "seed": 1 });
        assert!(set_path(&mut doc, "disturbances.3.accel", json!(1)).unwrap_err().contains("out of range"));
        assert!(set_path(&mut doc, "disturbances.x", json!(1)).unwrap_err().contains("index"));
        assert!(set_path(&mut doc, "seed.low", json!(1)).unwrap_err().contains("seed.low"));
        assert!(set_path(&mut doc, "a..b", json!(1)).is_err());
    }

    #[test]
    fn errors_map_to_exit_codes() {
        assert_eq!(CommandOutcome::from(Error::Validation("x".into())).exit_code, EXIT_INVALID);
        assert_eq!(CommandOutcome::from(Error::Numerical("x".into())).exit_code, EXIT_NUMERICAL);
    }

    #[test]
    fn matrices_print_row_by_row() {
        assert_eq!(fmt_matrix(&DMatrix::from_row_slice(1, 2, &[2.7431, 0.5])), "[2.7431, 0.5000]");
        assert_eq!(fmt_matrix(&DMatrix::identity(2, 2)), "[[1.0000, 0.0000], [0.0000, 1.0000]]");
    }
}
