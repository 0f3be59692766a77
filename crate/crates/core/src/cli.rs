//! The `rrb` command line.
//!
//! Exit codes: 0 success, 1 usage or input error, 2 numerical failure,
//! 3 invariant-suite failure. Failures print an error report as JSON on
//! stderr.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;

use crate::config::{parse_config, RunConfig};
use crate::dynamics::VectorField;
use crate::equilibria::{e2_point, equilibria_on_level};
use crate::error::{Error, Result};
use crate::integrate::{integrate, Direction};
use crate::model::State;
use crate::output::{
    to_json, trajectory_csv, ClassificationReport, ClassificationRow, EquilibriaReport,
    ErrorReport, LimitsReport, ProbeEntry, SCHEMA_VERSION,
};
use crate::stability::{
    classify, limit_report_with, probe_perturbation, probe_stability, ProbeOutcome, Provenance,
    StabilityVerdict, VerdictKind,
};
use crate::vec3;
use crate::verify::run_suite;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_NUMERICAL: i32 = 2;
pub const EXIT_SUITE: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "rrb", version, about = "Revised controlled rigid body: simulation, equilibria and stability")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Integrate from x0 and write the trajectory as CSV.
    Simulate(SimulateArgs),
    /// List the equilibria on an energy level as JSON.
    Equilibria(EquilibriaArgs),
    /// Classify E2 equilibria over a grid of λ.
    Classify(ClassifyArgs),
    /// Estimate forward and backward limits of the solution through x0.
    Limits(LimitsArgs),
    /// Run the invariant suite.
    Verify(VerifyArgs),
    /// Repeat simulate or limits over a grid of ε or λ, one file per cell.
    Sweep(SweepArgs),
}

#[derive(Debug, Args)]
struct Common {
    /// Run configuration file.
    #[arg(long)]
    config: PathBuf,
    /// Output file (overrides `output` in the config); stdout when absent.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum FieldArg {
    Revised,
    Conservative,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum DirectionArg {
    Forward,
    Backward,
}

#[derive(Debug, Args)]
struct SimulateArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long, allow_hyphen_values = true)]
    t_end: Option<f64>,
    #[arg(long, value_enum)]
    direction: Option<DirectionArg>,
    #[arg(long, value_enum, default_value = "revised")]
    field: FieldArg,
}

#[derive(Debug, Args)]
struct EquilibriaArgs {
    #[command(flatten)]
    common: Common,
    /// Energy level k.
    #[arg(long, allow_hyphen_values = true)]
    level: f64,
}

#[derive(Debug, Args)]
struct ClassifyArgs {
    #[command(flatten)]
    common: Common,
    /// λ values: a comma-separated list or `start:stop:count`.
    #[arg(long, allow_hyphen_values = true)]
    lambdas: String,
    /// Also run the empirical probe (always run when ε ≤ 0).
    #[arg(long)]
    probe: bool,
}

#[derive(Debug, Args)]
struct LimitsArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long)]
    horizon: Option<f64>,
}

#[derive(Debug, Args)]
struct VerifyArgs {
    /// Body and start for the trajectory checks; the standard body otherwise.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Print the report as JSON.
    #[arg(long)]
    json: bool,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum SweepMode {
    Simulate,
    Limits,
}

#[derive(Debug, Clone, Copy, ValueEnum, PartialEq)]
enum SweepParam {
    Epsilon,
    Lambda,
}

#[derive(Debug, Args)]
struct SweepArgs {
    #[arg(long)]
    config: PathBuf,
    #[arg(long, value_enum)]
    mode: SweepMode,
    #[arg(long, value_enum)]
    param: SweepParam,
    /// Grid: a comma-separated list or `start:stop:count`.
    #[arg(long, allow_hyphen_values = true)]
    values: String,
    #[arg(long)]
    out_dir: PathBuf,
}

/// Parses `v1,v2,...` or `start:stop:count` (inclusive, evenly spaced).
pub fn parse_grid(spec: &str) -> Result<Vec<f64>> {
    let bad = || Error::InvalidArgument(format!("bad grid `{spec}`"));
    let num = |s: &str| s.trim().parse::<f64>().ok().filter(|v| v.is_finite()).ok_or_else(bad);
    if let [start, stop, count] = spec.split(':').collect::<Vec<_>>()[..] {
        let (a, b) = (num(start)?, num(stop)?);
        let n: usize = count.trim().parse().map_err(|_| bad())?;
        return match n {
            0 => Err(bad()),
            1 => Ok(vec![a]),
            _ => Ok((0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect()),
        };
    }
    spec.split(',').map(num).collect()
}

fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Parse { .. }
        | Error::InvariantViolation(_)
        | Error::InvalidArgument(_)
        | Error::InvalidSettings(_)
        | Error::Io(_) => EXIT_USAGE,
        _ => EXIT_NUMERICAL,
    }
}

fn report_error(err: &Error, stderr: &mut dyn Write) -> i32 {
    let code = exit_code(err);
    let _ = stderr.write_all(to_json(&ErrorReport::from_error(err, code)).as_bytes());
    code
}

fn io_err(path: &Path, e: std::io::Error) -> Error {
    Error::Io(format!("{}: {e}", path.display()))
}

fn load(path: &Path) -> Result<RunConfig> {
    let text = fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    parse_config(&text)
}

fn emit(target: Option<&Path>, body: &str, stdout: &mut dyn Write) -> Result<()> {
    match target {
        Some(p) => fs::write(p, body).map_err(|e| io_err(p, e)),
        None => stdout
            .write_all(body.as_bytes())
            .map_err(|e| Error::Io(format!("stdout: {e}"))),
    }
}

fn target<'a>(flag: &'a Option<PathBuf>, cfg: &'a RunConfig) -> Option<&'a Path> {
    flag.as_deref().or(cfg.output.as_deref())
}

/// Entry point; returns the process exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            let rendered = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = stdout.write_all(rendered.as_bytes());
                    EXIT_OK
                }
                _ => {
                    let report = ErrorReport::new("UsageError", rendered.trim_end(), EXIT_USAGE);
                    let _ = stderr.write_all(to_json(&report).as_bytes());
                    EXIT_USAGE
                }
            };
        }
    };
    let result = match cli.command {
        Command::Simulate(a) => simulate(a, stdout),
        Command::Equilibria(a) => equilibria(a, stdout),
        Command::Classify(a) => classify_cmd(a, stdout),
        Command::Limits(a) => limits(a, stdout),
        Command::Verify(a) => return verify(a, stdout, stderr),
        Command::Sweep(a) => sweep(a, stdout),
    };
    match result {
        Ok(()) => EXIT_OK,
        Err(e) => report_error(&e, stderr),
    }
}

fn simulate(a: SimulateArgs, stdout: &mut dyn Write) -> Result<()> {
    let cfg = load(&a.common.config)?;
    let mut settings = cfg.integrator;
    if let Some(t) = a.t_end {
        settings.t_end = t;
    }
    if let Some(d) = a.direction {
        settings.direction = match d {
            DirectionArg::Forward => Direction::Forward,
            DirectionArg::Backward => Direction::Backward,
        };
    }
    let field = match a.field {
        FieldArg::Revised => VectorField::revised(cfg.system),
        FieldArg::Conservative => VectorField::hamilton_poisson(cfg.system),
    };
    let traj = integrate(&field, &cfg.require_x0()?, &settings)?;
    emit(target(&a.common.output, &cfg), &trajectory_csv(&traj), stdout)
}

fn equilibria(a: EquilibriaArgs, stdout: &mut dyn Write) -> Result<()> {
    let cfg = load(&a.common.config)?;
    let eqs = equilibria_on_level(&cfg.system, a.level)?;
    let report = EquilibriaReport::new(&cfg.system, a.level, &eqs);
    emit(target(&a.common.output, &cfg), &to_json(&report), stdout)
}

fn empirical_verdict(outcome: ProbeOutcome) -> StabilityVerdict {
    let kind = match outcome {
        ProbeOutcome::StaysNear => VerdictKind::LyapunovStable,
        ProbeOutcome::Escapes => VerdictKind::Unstable,
    };
    StabilityVerdict {
        kind,
        provenance: Provenance::EmpiricalOnly,
        notes: format!("probe outcome {outcome:?}; no theorem applies for epsilon <= 0"),
    }
}

fn classification_row(cfg: &RunConfig, lambda: f64, probe: bool) -> ClassificationRow {
    let mut row = ClassificationRow {
        lambda,
        point: None,
        verdict: None,
        probe: None,
        error: None,
    };
    let eq = match e2_point(&cfg.system, lambda) {
        Ok(e) => e,
        Err(e) => {
            row.error = Some(e.to_string());
            return row;
        }
    };
    row.point = Some(eq.point());
    let theorem_side = cfg.system.epsilon() > 0.0;
    if theorem_side {
        match classify(&cfg.system, &eq) {
            Ok(v) => row.verdict = Some(v),
            Err(e) => row.error = Some(e.to_string()),
        }
    }
    if probe || !theorem_side {
        let entry = match probe_stability(&cfg.system, &eq, &cfg.probe_settings()) {
            Ok(r) => {
                if !theorem_side {
                    row.verdict = Some(empirical_verdict(r.outcome));
                }
                ProbeEntry {
                    outcome: Some(r.outcome),
                    max_excursion: Some(r.max_excursion),
                    error: None,
                }
            }
            Err(e) => ProbeEntry {
                outcome: None,
                max_excursion: None,
                error: Some(e.to_string()),
            },
        };
        row.probe = Some(entry);
    }
    row
}

fn classify_cmd(a: ClassifyArgs, stdout: &mut dyn Write) -> Result<()> {
    let cfg = load(&a.common.config)?;
    let grid = parse_grid(&a.lambdas)?;
    let rows = grid
        .par_iter()
        .map(|&l| classification_row(&cfg, l, a.probe))
        .collect();
    let report = ClassificationReport {
        schema: SCHEMA_VERSION,
        epsilon: cfg.system.epsilon(),
        rows,
    };
    emit(target(&a.common.output, &cfg), &to_json(&report), stdout)
}

fn limits_json(cfg: &RunConfig, x0: &State, horizon: Option<f64>) -> Result<String> {
    let mut settings = cfg.integrator;
    if let Some(h) = horizon {
        settings.t_end = h;
    }
    let report = limit_report_with(&cfg.system, x0, &settings)?;
    Ok(to_json(&LimitsReport {
        schema: SCHEMA_VERSION,
        epsilon: cfg.system.epsilon(),
        report: &report,
    }))
}

fn limits(a: LimitsArgs, stdout: &mut dyn Write) -> Result<()> {
    let cfg = load(&a.common.config)?;
    let body = limits_json(&cfg, &cfg.require_x0()?, a.horizon)?;
    emit(target(&a.common.output, &cfg), &body, stdout)
}

fn verify(a: VerifyArgs, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32 {
    let base = match &a.config {
        Some(p) => match load(p) {
            Ok(c) => c,
            Err(e) => return report_error(&e, stderr),
        },
        None => {
            let mut c = RunConfig::new(crate::presets::standard(0.5));
            c.x0 = Some(State::new(1.0, 1.0, 1.0));
            c
        }
    };
    let report = run_suite(&base);
    let mut out = String::new();
    if a.json {
        out = to_json(&report);
    } else {
        for r in &report.results {
            let tag = if r.passed { "PASS" } else { "FAIL" };
            out.push_str(&format!("{tag} {}: {}\n", r.name, r.detail));
        }
        out.push_str(&format!(
            "{} checks, {} passed, {} failures\n",
            report.results.len(),
            report.passes(),
            report.failures()
        ));
    }
    if let Err(e) = emit(None, &out, stdout) {
        return report_error(&e, stderr);
    }
    if report.failures() == 0 {
        EXIT_OK
    } else {
        EXIT_SUITE
    }
}

/// Start for a λ-sweep cell: `E2(λ)` displaced by the first probe perturbation.
fn lambda_cell_start(cfg: &RunConfig, lambda: f64) -> Result<State> {
    let eq = e2_point(&cfg.system, lambda)?;
    let delta = probe_perturbation(cfg.seed, 0, cfg.probe_delta);
    Ok(State(vec3::add(eq.point().0, delta)))
}

fn sweep_cell(base: &RunConfig, mode: SweepMode, param: SweepParam, value: f64, path: &Path) -> Result<()> {
    let (cfg, x0) = match param {
        SweepParam::Epsilon => {
            let mut c = base.clone();
            c.system = base.system.with_epsilon(value)?;
            let x0 = c.require_x0()?;
            (c, x0)
        }
        SweepParam::Lambda => (base.clone(), lambda_cell_start(base, value)?),
    };
    let body = match mode {
        SweepMode::Simulate => {
            let traj = integrate(&VectorField::revised(cfg.system), &x0, &cfg.integrator)?;
            trajectory_csv(&traj)
        }
        SweepMode::Limits => limits_json(&cfg, &x0, None)?,
    };
    fs::write(path, body).map_err(|e| io_err(path, e))
}

fn sweep(a: SweepArgs, stdout: &mut dyn Write) -> Result<()> {
    let cfg = load(&a.config)?;
    let grid = parse_grid(&a.values)?;
    fs::create_dir_all(&a.out_dir).map_err(|e| io_err(&a.out_dir, e))?;
    let (mode_name, ext) = match a.mode {
        SweepMode::Simulate => ("simulate", "csv"),
        SweepMode::Limits => ("limits", "json"),
    };
    let param_name = match a.param {
        SweepParam::Epsilon => "epsilon",
        SweepParam::Lambda => "lambda",
    };
    let cells: Vec<(PathBuf, Result<()>)> = grid
        .par_iter()
        .enumerate()
        .map(|(i, &v)| {
            let path = a.out_dir.join(format!("{mode_name}_{param_name}_{i:04}.{ext}"));
            let res = sweep_cell(&cfg, a.mode, a.param, v, &path);
            (path, res)
        })
        .collect();
    let mut summary = String::new();
    let mut first_err = None;
    for (i, ((path, res), v)) in cells.into_iter().zip(&grid).enumerate() {
        let status = match res {
            Ok(()) => "ok".to_string(),
            Err(e) => {
                let s = format!("error: {e}");
                first_err.get_or_insert(e);
                s
            }
        };
        summary.push_str(&format!("cell {i:04} {param_name}={v:?} {} {status}\n", path.display()));
    }
    emit(None, &summary, stdout)?;
    match first_err {
        None => Ok(()),
        Some(e) => Err(e),
    }
}
