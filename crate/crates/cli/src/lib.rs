//! Command-line front end for the covenant solver.
//!
//! Exit codes: 0 success, 1 invalid configuration or parameters, 2 solver
//! failure, 3 sign-table mismatch in `statics`.

pub mod config;
pub mod output;

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use covenant_core::effort::{self, EffortSolution};
use covenant_core::equilibrium::{self, EquilibriumSolution};
use covenant_core::simulate::{self, SimulationReport};
use covenant_core::statics::{self, SignTable};
use covenant_core::{validate_params, Error, ErrorDensity, ModelParams, ValidationReport};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use config::{Format, RunConfig};
use output::{error_kind, sweep_csv, to_json, SweepRow};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVALID: i32 = 1;
pub const EXIT_SOLVER: i32 = 2;
pub const EXIT_MISMATCH: i32 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "covenant",
    version,
    about = "Solve, sweep and simulate the covenant accounting adjustment game"
)]
struct Cli {
    /// Worker threads for sweeps, effort scans and simulation (default: all cores).
    #[arg(long, global = true)]
    workers: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Common {
    /// Configuration file of `key = value` lines.
    config: Option<PathBuf>,
    /// Override a configuration key, e.g. `--set kappa=0.01`. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Validate parameters and print the check report.
    Check(Common),
    /// Solve the equilibrium and effort levels.
    Solve(Common),
    /// Solve every point of the configured parameter grid.
    Sweep(Common),
    /// Simulate the game at the solved equilibrium.
    Simulate {
        #[command(flatten)]
        common: Common,
        /// Use the equilibrium from a previous `solve` output instead of re-solving.
        #[arg(long)]
        equilibrium: Option<PathBuf>,
    },
    /// Evaluate the comparative-statics sign tables.
    Statics(Common),
}

/// Failure of a subcommand, carrying its exit code.
struct Failure {
    code: i32,
    message: String,
}

impl Failure {
    fn invalid(message: impl Into<String>) -> Self {
        Failure {
            code: EXIT_INVALID,
            message: message.into(),
        }
    }

    fn solver(e: &Error) -> Self {
        let code = match e {
            Error::InvalidParams(_) | Error::InvalidDensity(_) => EXIT_INVALID,
            _ => EXIT_SOLVER,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

/// Output text, exit code and an optional note for stderr.
struct Done {
    text: String,
    code: i32,
    note: Option<String>,
}

impl Done {
    fn ok(text: String) -> Self {
        Done {
            text,
            code: EXIT_OK,
            note: None,
        }
    }
}

type Outcome = Result<Done, Failure>;
type Runner = Box<dyn Fn(&RunConfig) -> Outcome>;

#[derive(Debug, Serialize)]
struct CheckOutput<'a> {
    params: &'a ModelParams,
    report: &'a ValidationReport,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct SolveOutput {
    pub params: ModelParams,
    pub density: ErrorDensity,
    pub equilibrium: EquilibriumSolution,
    pub effort: Option<EffortSolution>,
    pub effort_error: Option<String>,
}

#[derive(Debug, Serialize)]
struct Analytic {
    setup_cost: f64,
    manager_mean: f64,
    reneg_freq: f64,
}

#[derive(Debug, Serialize)]
struct SimulateOutput<'a> {
    params: &'a ModelParams,
    density: &'a ErrorDensity,
    equilibrium: &'a EquilibriumSolution,
    report: SimulationReport,
    analytic: Analytic,
}

#[derive(Debug, Serialize)]
struct StaticsOutput<'a> {
    params: &'a ModelParams,
    density: &'a ErrorDensity,
    tables: Vec<SignTable>,
    passed: bool,
}

#[derive(Debug, Serialize)]
struct SweepOutput {
    rows: Vec<SweepJsonRow>,
}

#[derive(Debug, Serialize)]
struct SweepJsonRow {
    params: ModelParams,
    equilibrium: Option<EquilibriumSolution>,
    p_fb: Option<f64>,
    p_star: Option<f64>,
    status: String,
}

fn load_config(common: &Common) -> Result<RunConfig, Failure> {
    let text = match &common.config {
        Some(path) => Some(
            fs::read_to_string(path)
                .map_err(|e| Failure::invalid(format!("{}: {e}", path.display())))?,
        ),
        None => None,
    };
    let name = common
        .config
        .as_ref()
        .map(|p| p.display().to_string())
        .unwrap_or_default();
    RunConfig::load(
        text.as_deref().map(|t| (t, name.as_str())),
        &common.overrides,
    )
    .map_err(|e| Failure::invalid(e.to_string()))
}

fn require_json(cfg: &RunConfig, command: &str) -> Result<(), Failure> {
    match cfg.output.format {
        Some(Format::Csv) => Err(Failure::invalid(format!(
            "output.format = csv is only supported by sweep, not {command}"
        ))),
        _ => Ok(()),
    }
}

fn ensure_valid(params: &ModelParams) -> Result<(), Failure> {
    let report = validate_params(params);
    if report.solvable() {
        return Ok(());
    }
    let lines: Vec<String> = report
        .failures()
        .filter(|c| c.required)
        .map(|c| format!("  {}: {}", c.name, c.detail))
        .collect();
    Err(Failure::invalid(format!(
        "validation failed:\n{}",
        lines.join("\n")
    )))
}

fn cmd_check(cfg: &RunConfig) -> Outcome {
    require_json(cfg, "check")?;
    let report = validate_params(&cfg.params);
    let text = to_json(&CheckOutput {
        params: &cfg.params,
        report: &report,
    });
    if report.all_passed() {
        return Ok(Done::ok(text));
    }
    let lines: Vec<String> = report
        .failures()
        .map(|c| format!("  {}: {}", c.name, c.detail))
        .collect();
    Ok(Done {
        text,
        code: EXIT_INVALID,
        note: Some(format!("validation failed:\n{}", lines.join("\n"))),
    })
}

fn solve(cfg: &RunConfig) -> Result<SolveOutput, Failure> {
    ensure_valid(&cfg.params)?;
    let eq = equilibrium::solve_equilibrium(&cfg.params, &cfg.density)
        .map_err(|e| Failure::solver(&e))?;
    let (effort, effort_error) = match effort::solve_effort(&cfg.params, &cfg.density) {
        Ok(s) => (Some(s), None),
        Err(e) => (None, Some(e.to_string())),
    };
    Ok(SolveOutput {
        params: cfg.params,
        density: cfg.density.clone(),
        equilibrium: eq,
        effort,
        effort_error,
    })
}

fn cmd_solve(cfg: &RunConfig) -> Outcome {
    require_json(cfg, "solve")?;
    let out = solve(cfg)?;
    let note = out
        .effort_error
        .as_ref()
        .map(|e| format!("effort solve failed: {e}"));
    Ok(Done {
        text: to_json(&out),
        code: if note.is_some() { EXIT_SOLVER } else { EXIT_OK },
        note,
    })
}

fn sweep_point(params: ModelParams, density: &ErrorDensity) -> SweepRow {
    let mut row = SweepRow {
        params,
        equilibrium: None,
        p_fb: None,
        effort: None,
        status: "ok".to_string(),
    };
    let report = validate_params(&params);
    if !report.solvable() {
        let names: Vec<&str> = report
            .failures()
            .filter(|c| c.required)
            .map(|c| c.name.as_str())
            .collect();
        row.status = format!("invalid:{}", names.join(";"));
        return row;
    }
    match equilibrium::solve_equilibrium(&params, density) {
        Ok(eq) => row.equilibrium = Some(eq),
        Err(e) => {
            row.status = format!("solver_error:{}", error_kind(&e));
            return row;
        }
    }
    row.p_fb = effort::first_best_effort(&params, density).ok();
    match effort::solve_effort(&params, density) {
        Ok(s) => row.effort = Some(s),
        Err(e) => row.status = format!("effort_error:{}", error_kind(&e)),
    }
    row
}

fn cmd_sweep(cfg: &RunConfig) -> Outcome {
    if cfg.sweep.is_empty() {
        return Err(Failure::invalid(
            "sweep needs at least one `sweep.<param> = start, stop, steps` key",
        ));
    }
    let points = cfg.sweep_points();
    let rows: Vec<SweepRow> = points
        .par_iter()
        .map(|&p| sweep_point(p, &cfg.density))
        .collect();
    let text = match cfg.output.format.unwrap_or(Format::Csv) {
        Format::Csv => sweep_csv(&rows),
        Format::Json => to_json(&SweepOutput {
            rows: rows
                .into_iter()
                .map(|r| SweepJsonRow {
                    params: r.params,
                    p_star: r.effort.as_ref().map(|e| e.p_star),
                    equilibrium: r.equilibrium,
                    p_fb: r.p_fb,
                    status: r.status,
                })
                .collect(),
        }),
    };
    Ok(Done::ok(text))
}

fn read_equilibrium(path: &Path, cfg: &RunConfig) -> Result<EquilibriumSolution, Failure> {
    let text = fs::read_to_string(path)
        .map_err(|e| Failure::invalid(format!("{}: {e}", path.display())))?;
    let value: serde_json::Value = serde_json::from_str(&text)
        .map_err(|e| Failure::invalid(format!("{}: {e}", path.display())))?;
    let eq_value = value
        .get("equilibrium")
        .cloned()
        .unwrap_or_else(|| value.clone());
    let eq: EquilibriumSolution = serde_json::from_value(eq_value)
        .map_err(|e| Failure::invalid(format!("{}: not an equilibrium: {e}", path.display())))?;
    if let Some(p) = value.get("params") {
        let solved: ModelParams = serde_json::from_value(p.clone())
            .map_err(|e| Failure::invalid(format!("{}: params: {e}", path.display())))?;
        let same = covenant_core::ParamName::ALL
            .iter()
            .all(|&n| output::round_sig(solved.get(n)) == output::round_sig(cfg.params.get(n)));
        if !same {
            return Err(Failure::invalid(format!(
                "{}: equilibrium was solved for different parameters",
                path.display()
            )));
        }
    }
    Ok(eq)
}

fn cmd_simulate(cfg: &RunConfig, eq_path: Option<&Path>) -> Outcome {
    require_json(cfg, "simulate")?;
    ensure_valid(&cfg.params)?;
    let eq = match eq_path {
        Some(path) => read_equilibrium(path, cfg)?,
        None => equilibrium::solve_equilibrium(&cfg.params, &cfg.density)
            .map_err(|e| Failure::solver(&e))?,
    };
    let (p, d) = (&cfg.params, &cfg.density);
    let report = simulate::simulate(p, d, &eq, cfg.simulate.n, cfg.simulate.seed)
        .map_err(|e| Failure::solver(&e))?;
    let analytic = Analytic {
        setup_cost: p.setup_cost,
        manager_mean: simulate::analytic_manager_mean(p, d, &eq)
            .map_err(|e| Failure::solver(&e))?,
        reneg_freq: simulate::analytic_reneg_freq(p, d, &eq).map_err(|e| Failure::solver(&e))?,
    };
    Ok(Done::ok(to_json(&SimulateOutput {
        params: p,
        density: d,
        equilibrium: &eq,
        report,
        analytic,
    })))
}

fn cmd_statics(cfg: &RunConfig) -> Outcome {
    require_json(cfg, "statics")?;
    ensure_valid(&cfg.params)?;
    if cfg.params.kappa > statics::SMALL_KAPPA {
        return Err(Failure::invalid(format!(
            "statics needs kappa <= {}, got {}",
            statics::SMALL_KAPPA,
            cfg.params.kappa
        )));
    }
    let tables =
        statics::sign_tables(&cfg.params, &cfg.density).map_err(|e| Failure::solver(&e))?;
    let passed = tables.iter().all(SignTable::passed);
    let out = StaticsOutput {
        params: &cfg.params,
        density: &cfg.density,
        tables,
        passed,
    };
    let text = to_json(&out);
    let tables = out.tables;
    if passed {
        return Ok(Done::ok(text));
    }
    let lines: Vec<String> = tables
        .iter()
        .flat_map(|t| {
            t.mismatches().map(move |r| {
                format!(
                    "  {:?} / {}: expected {}, observed {}",
                    t.target,
                    r.param,
                    r.expected,
                    r.observed.map(|s| s.to_string()).unwrap_or_default()
                )
            })
        })
        .collect();
    Ok(Done {
        text,
        code: EXIT_MISMATCH,
        note: Some(format!(
            "sign tables do not match the expected signs:\n{}",
            lines.join("\n")
        )),
    })
}

fn dispatch(command: &Command) -> Result<(Done, Option<PathBuf>), Failure> {
    let (common, run): (&Common, Runner) = match command {
        Command::Check(c) => (c, Box::new(cmd_check)),
        Command::Solve(c) => (c, Box::new(cmd_solve)),
        Command::Sweep(c) => (c, Box::new(cmd_sweep)),
        Command::Statics(c) => (c, Box::new(cmd_statics)),
        Command::Simulate {
            common,
            equilibrium,
        } => {
            let path = equilibrium.clone();
            (
                common,
                Box::new(move |cfg: &RunConfig| cmd_simulate(cfg, path.as_deref())),
            )
        }
    };
    let cfg = load_config(common)?;
    let done = run(&cfg)?;
    Ok((done, cfg.output.path.clone()))
}

/// Runs the command line `args` (including the program name), writing
/// results to `stdout` or the configured output file and diagnostics to
/// `stderr`. Returns the process exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() {
                EXIT_INVALID
            } else {
                EXIT_OK
            };
            let rendered = e.render().to_string();
            let _ = if e.use_stderr() {
                stderr.write_all(rendered.as_bytes())
            } else {
                stdout.write_all(rendered.as_bytes())
            };
            return code;
        }
    };

    let result = match cli.workers {
        Some(0) => Err(Failure::invalid("--workers must be at least 1")),
        Some(n) => match rayon::ThreadPoolBuilder::new().num_threads(n).build() {
            Ok(pool) => pool.install(|| dispatch(&cli.command)),
            Err(e) => Err(Failure::invalid(format!("cannot start {n} workers: {e}"))),
        },
        None => dispatch(&cli.command),
    };

    match result {
        Ok((done, path)) => {
            let written = match path {
                Some(path) => fs::write(&path, done.text.as_bytes())
                    .map_err(|e| format!("{}: {e}", path.display())),
                None => stdout
                    .write_all(done.text.as_bytes())
                    .map_err(|e| e.to_string()),
            };
            if let Err(e) = written {
                let _ = writeln!(stderr, "error: {e}");
                return EXIT_INVALID;
            }
            if let Some(note) = done.note {
                let _ = writeln!(stderr, "error: {note}");
            }
            done.code
        }
        Err(f) => {
            let _ = writeln!(stderr, "error: {}", f.message);
            f.code
        }
    }
}
