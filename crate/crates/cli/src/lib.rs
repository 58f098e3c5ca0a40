//! Command-line front end: validate inputs, run the simulator, summarise a
//! log, compute oracle deliveries and diff a log against them.
//!
//! Exit codes: 0 success, 1 semantic failure (invalid inputs, a non-empty
//! diff), 2 environmental failure (I/O, syntax, malformed files, bad usage).

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use routine_sentinel::homesim::{parse_trace, simulate, BatteryModel, EventLog, Mode, SimConfig, Trace};
use routine_sentinel::oracle::{compare, oracle_deliveries, oracle_text, parse_oracle_text, DeliveryRecord};
use routine_sentinel::perception::ErrorModel;
use routine_sentinel::plan::{has_errors, parse_map, parse_plan, Code, Diagnostic, HomeMap, Plan};
use routine_sentinel::report::Report;

pub const EXIT_OK: i32 = 0;
pub const EXIT_SEMANTIC: i32 = 1;
pub const EXIT_ENVIRONMENT: i32 = 2;

/// Overrides `--seed` when set, so CI can vary seeds without editing commands.
pub const SEED_ENV: &str = "ROUTINE_SENTINEL_SEED";

#[derive(Debug, Parser)]
#[command(name = "routine-sentinel", version, about = "Contextual household reminder simulator")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check a plan against its map; prints `LINE:CODE:message` diagnostics.
    Validate { plan: PathBuf, map: PathBuf },
    /// Run the simulator and write the event log.
    Simulate(SimulateArgs),
    /// Summarise a log as aligned text followed by a key=value block.
    Report {
        #[arg(long)]
        log: PathBuf,
        /// Oracle deliveries, enabling the missed-window count.
        #[arg(long)]
        oracle: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write the deliveries an all-seeing robot must make.
    Oracle {
        plan: PathBuf,
        map: PathBuf,
        trace: PathBuf,
        #[arg(long, default_value_t = 1)]
        days: u32,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Compare a log's deliveries with an oracle file; exits 1 on any difference.
    Diff {
        #[arg(long)]
        log: PathBuf,
        #[arg(long)]
        oracle: PathBuf,
    },
}

#[derive(Debug, clap::Args)]
pub struct SimulateArgs {
    pub plan: PathBuf,
    pub map: PathBuf,
    pub trace: PathBuf,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 1)]
    pub days: u32,
    #[arg(long, default_value = "realistic")]
    pub mode: Mode,
    /// Probability that one docking attempt succeeds.
    #[arg(long, default_value_t = 0.9)]
    pub p_dock: f64,
    /// Perception error probabilities, e.g. `person_swap=0.1 object_flip=0.05`.
    #[arg(long, num_args = 1.., value_name = "KEY=VALUE")]
    pub error_model: Vec<String>,
    #[arg(long)]
    pub capacity: Option<u32>,
    #[arg(long)]
    pub drain_moving: Option<u32>,
    #[arg(long)]
    pub drain_idle: Option<u32>,
    #[arg(long)]
    pub charge_rate: Option<u32>,
    /// Log destination; without it the log goes to stdout and the summary to stderr.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// A failed command: the message for stderr and the exit code.
#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub message: String,
}

impl Failure {
    fn env(message: impl Into<String>) -> Self {
        Self { code: EXIT_ENVIRONMENT, message: message.into() }
    }

    fn semantic(message: impl Into<String>) -> Self {
        Self { code: EXIT_SEMANTIC, message: message.into() }
    }
}

type Outcome = Result<i32, Failure>;

/// Parses `args` (including the program name) and runs the command, reading
/// the seed override from the environment.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let seed = std::env::var(SEED_ENV).ok();
    run_with_seed_override(args, seed.as_deref(), out, err)
}

pub fn run_with_seed_override<I, T>(args: I, seed_override: Option<&str>, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_ENVIRONMENT } else { EXIT_OK };
            let sink: &mut dyn Write = if e.use_stderr() { err } else { out };
            let _ = write!(sink, "{}", e.render());
            return code;
        }
    };
    let result = match cli.command {
        Command::Validate { plan, map } => cmd_validate(&plan, &map, out),
        Command::Simulate(mut args) => match seed_override {
            Some(s) => match s.trim().parse() {
                Ok(seed) => {
                    args.seed = seed;
                    cmd_simulate(&args, out, err)
                }
                Err(_) => Err(Failure::env(format!("{SEED_ENV}=`{s}` is not an unsigned integer"))),
            },
            None => cmd_simulate(&args, out, err),
        },
        Command::Report { log, oracle, out: dest } => cmd_report(&log, oracle.as_deref(), dest.as_deref(), out),
        Command::Oracle { plan, map, trace, days, out: dest } => cmd_oracle(&plan, &map, &trace, days, dest.as_deref(), out),
        Command::Diff { log, oracle } => cmd_diff(&log, &oracle, out),
    };
    match result {
        Ok(code) => code,
        Err(f) => {
            let _ = writeln!(err, "error: {}", f.message);
            f.code
        }
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::env(format!("cannot read {}: {e}", path.display())))
}

fn write_file(path: &Path, text: &str) -> Result<(), Failure> {
    fs::write(path, text).map_err(|e| Failure::env(format!("cannot write {}: {e}", path.display())))
}

fn emit(out: &mut dyn Write, text: &str) -> Result<(), Failure> {
    out.write_all(text.as_bytes()).map_err(|e| Failure::env(format!("cannot write output: {e}")))
}

/// Syntax errors are environmental; anything else that blocks parsing is semantic.
fn diagnostic_exit(diags: &[Diagnostic]) -> i32 {
    if diags.iter().any(|d| d.code == Code::SyntaxError) {
        EXIT_ENVIRONMENT
    } else if has_errors(diags) {
        EXIT_SEMANTIC
    } else {
        EXIT_OK
    }
}

pub fn cmd_validate(plan_path: &Path, map_path: &Path, out: &mut dyn Write) -> Outcome {
    let plan_text = read(plan_path)?;
    let map_text = read(map_path)?;
    let mut shown = Vec::new();
    let map = match parse_map(&map_text) {
        Ok(p) => {
            shown.extend(p.warnings);
            Some(p.value)
        }
        Err(d) => {
            shown.extend(d);
            None
        }
    };
    if let Some(map) = &map {
        match parse_plan(&plan_text, map) {
            Ok(p) => shown.extend(p.warnings),
            Err(d) => shown.extend(d),
        }
    }
    let text: String = shown.iter().map(|d| format!("{d}\n")).collect();
    emit(out, &text)?;
    Ok(diagnostic_exit(&shown))
}

/// Parses and validates plan, map and (optionally) trace, reporting every
/// diagnostic as `PATH:LINE:CODE:message`.
fn load(
    plan_path: &Path,
    map_path: &Path,
    trace_path: &Path,
) -> Result<(Plan, HomeMap, Trace), Failure> {
    let plan_text = read(plan_path)?;
    let map_text = read(map_path)?;
    let trace_text = read(trace_path)?;
    let fail = |path: &Path, diags: Vec<Diagnostic>| {
        let lines: Vec<String> = diags.iter().map(|d| format!("{}:{d}", path.display())).collect();
        Failure { code: diagnostic_exit(&diags), message: format!("invalid input\n{}", lines.join("\n")) }
    };
    let map = parse_map(&map_text).map_err(|d| fail(map_path, d))?.value;
    let plan = parse_plan(&plan_text, &map).map_err(|d| fail(plan_path, d))?.value;
    let trace = parse_trace(&trace_text, &plan, &map).map_err(|d| fail(trace_path, d))?.value;
    Ok((plan, map, trace))
}

impl SimulateArgs {
    pub fn config(&self) -> Result<SimConfig, Failure> {
        let errors: ErrorModel = self.error_model.join(",").parse().map_err(Failure::env)?;
        let d = BatteryModel::default();
        let battery = BatteryModel {
            capacity: self.capacity.unwrap_or(d.capacity),
            drain_moving: self.drain_moving.unwrap_or(d.drain_moving),
            drain_idle: self.drain_idle.unwrap_or(d.drain_idle),
            charge_rate: self.charge_rate.unwrap_or(d.charge_rate),
        };
        let cfg = SimConfig {
            seed: self.seed,
            days: self.days,
            battery,
            p_dock: self.p_dock,
            errors,
            mode: self.mode,
            ..SimConfig::default()
        };
        cfg.validate().map_err(Failure::env)?;
        Ok(cfg)
    }
}

/// The frozen one-line summary printed by `simulate`.
pub fn summary_line(cfg: &SimConfig, log: &EventLog) -> String {
    let t = Report::from_log(log, None).totals;
    format!(
        "simulate: days={} seed={} mode={} records={} deliveries={} proactive={} seek={} checkin={}",
        cfg.days,
        cfg.seed,
        cfg.mode,
        log.records.len(),
        t.total(),
        t.proactive,
        t.seek,
        t.checkin
    )
}

pub fn cmd_simulate(args: &SimulateArgs, out: &mut dyn Write, err: &mut dyn Write) -> Outcome {
    let cfg = args.config()?;
    let (plan, map, trace) = load(&args.plan, &args.map, &args.trace)?;
    let log = simulate(&plan, &map, &trace, &cfg).map_err(Failure::semantic)?;
    let summary = format!("{}\n", summary_line(&cfg, &log));
    match &args.out {
        Some(path) => {
            write_file(path, &log.to_text())?;
            emit(out, &summary)?;
        }
        None => {
            emit(out, &log.to_text())?;
            emit(err, &summary)?;
        }
    }
    Ok(EXIT_OK)
}

fn read_log(path: &Path) -> Result<EventLog, Failure> {
    EventLog::parse(&read(path)?).map_err(|(line, e)| Failure::env(format!("{}:{line}: {e}", path.display())))
}

fn read_oracle(path: &Path) -> Result<Vec<DeliveryRecord>, Failure> {
    parse_oracle_text(&read(path)?).map_err(|(line, e)| Failure::env(format!("{}:{line}: {e}", path.display())))
}

/// Aligned text, a blank line, then the key=value block.
pub fn render_report(report: &Report) -> String {
    format!("{}\n{}", report.render_text(), report.to_kv())
}

pub fn cmd_report(log_path: &Path, oracle_path: Option<&Path>, dest: Option<&Path>, out: &mut dyn Write) -> Outcome {
    let log = read_log(log_path)?;
    let oracle = oracle_path.map(read_oracle).transpose()?;
    let text = render_report(&Report::from_log(&log, oracle.as_deref()));
    match dest {
        Some(path) => write_file(path, &text)?,
        None => emit(out, &text)?,
    }
    Ok(EXIT_OK)
}

pub fn cmd_oracle(
    plan: &Path,
    map: &Path,
    trace: &Path,
    days: u32,
    dest: Option<&Path>,
    out: &mut dyn Write,
) -> Outcome {
    if days == 0 {
        return Err(Failure::env("days must be at least 1"));
    }
    let (plan, _, trace) = load(plan, map, trace)?;
    let text = oracle_text(&oracle_deliveries(&plan, &trace, days));
    match dest {
        Some(path) => write_file(path, &text)?,
        None => emit(out, &text)?,
    }
    Ok(EXIT_OK)
}

pub fn cmd_diff(log_path: &Path, oracle_path: &Path, out: &mut dyn Write) -> Outcome {
    let diff = compare(&read_log(log_path)?, &read_oracle(oracle_path)?);
    emit(out, &diff.to_string())?;
    Ok(if diff.is_empty() { EXIT_OK } else { EXIT_SEMANTIC })
}
