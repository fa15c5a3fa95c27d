//! `shockshell`: build transonic shock backgrounds, evaluate their
//! linearization coefficients, decide the per-mode exclusion condition, and
//! run parameter scans. Reports are deterministic pretty-printed JSON;
//! scans also emit CSV. `RAYON_NUM_THREADS` caps the worker pool.

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use shockshell::config::RunConfig;
use shockshell::report::{
    exit_code_for, run_background, run_scan, run_scan_serial, run_scondition,
};
use shockshell::transport::{
    constant_decay_case, lie_residual, manufactured_case, transport_form, ChartGrid, FormDegree,
};

#[derive(Parser)]
#[command(name = "shockshell", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Construct the background solution and report the coefficient tables.
    Background(RunArgs),
    /// Background plus the per-mode exclusion report.
    Scondition(RunArgs),
    /// Run the scan grid from the config; writes CSV plus per-cell reports.
    Scan(ScanArgs),
    /// Manufactured-solution suite for the form-transport solver.
    TransportDemo(TransportArgs),
}

#[derive(Args)]
struct RunArgs {
    /// TOML config; the built-in reference configuration when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    gamma: Option<f64>,
    #[arg(long)]
    back_pressure: Option<f64>,
    #[arg(long)]
    n_max: Option<u32>,
    #[arg(long)]
    tol_ode_rel: Option<f64>,
    #[arg(long)]
    tol_ode_abs: Option<f64>,
    #[arg(long)]
    tol_margin: Option<f64>,
    #[arg(long)]
    tol_shock: Option<f64>,
    /// Write the JSON report here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ScanArgs {
    #[command(flatten)]
    run: RunArgs,
    /// CSV output path (stdout when omitted).
    #[arg(long)]
    out_csv: Option<PathBuf>,
    /// Directory for per-cell JSON envelopes.
    #[arg(long)]
    out_dir: Option<PathBuf>,
    /// Run cells serially (results are identical; for timing comparisons).
    #[arg(long)]
    serial: bool,
}

#[derive(Args)]
struct TransportArgs {
    /// Refinement levels for the convergence study.
    #[arg(long, default_value_t = 3)]
    levels: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn load_config(args: &RunArgs) -> Result<RunConfig, shockshell::Error> {
    let mut config = match &args.config {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|e| shockshell::Error::InvalidConfig {
                reason: format!("cannot read {}: {e}", path.display()),
            })?;
            RunConfig::from_toml_str(&text)?
        }
        None => RunConfig::reference(),
    };
    if let Some(g) = args.gamma {
        config.gamma = g;
    }
    if let Some(p) = args.back_pressure {
        config.back_pressure = p;
    }
    if let Some(n) = args.n_max {
        config.n_max = n;
    }
    if let Some(t) = args.tol_ode_rel {
        config.tolerances.ode_rel = t;
    }
    if let Some(t) = args.tol_ode_abs {
        config.tolerances.ode_abs = t;
    }
    if let Some(t) = args.tol_margin {
        config.tolerances.margin_tol = t;
    }
    if let Some(t) = args.tol_shock {
        config.tolerances.shock_tol = t;
    }
    config.validate()?;
    Ok(config)
}

fn emit(out: &Option<PathBuf>, text: &str) -> anyhow::Result<()> {
    match out {
        Some(path) => fs::write(path, text)?,
        None => println!("{text}"),
    }
    Ok(())
}

#[derive(Serialize)]
struct TransportReport {
    levels: Vec<(usize, usize)>,
    errors_one_forms: Vec<f64>,
    errors_two_forms: Vec<f64>,
    orders_one_forms: Vec<f64>,
    orders_two_forms: Vec<f64>,
    decay_error: f64,
    residual_one_forms: f64,
    residual_two_forms: f64,
}

fn transport_demo(args: &TransportArgs) -> anyhow::Result<()> {
    let levels: Vec<(usize, usize)> = (0..args.levels.max(2))
        .map(|k| (33 * (1 << k) - (1 << k) + 1, 16 << k))
        .collect();

    let mut errors = [Vec::new(), Vec::new()];
    let mut residuals = [0.0f64; 2];
    for (d, degree) in [FormDegree::One, FormDegree::Two].into_iter().enumerate() {
        for &(n_t, n_x) in &levels {
            let grid = ChartGrid::new(n_t, n_x)?;
            let (problem, exact) = manufactured_case(degree, grid);
            let solved = transport_form(&problem)?;
            errors[d].push(solved.distance(&exact));
            residuals[d] = lie_residual(&solved, &problem.x0, &problem.f, &problem.theta);
        }
    }
    let orders = |e: &[f64]| -> Vec<f64> { e.windows(2).map(|w| (w[0] / w[1]).log2()).collect() };

    let grid = ChartGrid::new(4097, 16)?;
    let (problem, exact) = constant_decay_case(FormDegree::One, grid, 1.0);
    let decay_error = transport_form(&problem)?.distance(&exact);

    let report = TransportReport {
        levels,
        orders_one_forms: orders(&errors[0]),
        orders_two_forms: orders(&errors[1]),
        errors_one_forms: errors[0].clone(),
        errors_two_forms: errors[1].clone(),
        decay_error,
        residual_one_forms: residuals[0],
        residual_two_forms: residuals[1],
    };
    emit(&args.out, &serde_json::to_string_pretty(&report)?)?;
    Ok(())
}

fn run() -> Result<ExitCode, anyhow::Error> {
    let cli = Cli::parse();
    match &cli.command {
        Command::Background(args) => {
            let config = match load_config(args) {
                Ok(c) => c,
                Err(e) => return fail(e),
            };
            match run_background(&config) {
                Ok(envelope) => emit(&args.out, &envelope.to_json_pretty())?,
                Err(e) => return fail(e),
            }
        }
        Command::Scondition(args) => {
            let config = match load_config(args) {
                Ok(c) => c,
                Err(e) => return fail(e),
            };
            match run_scondition(&config) {
                Ok(envelope) => {
                    if let Some(w) = envelope
                        .s_condition
                        .as_ref()
                        .and_then(|s| s.warning.as_ref())
                    {
                        eprintln!("warning: {w}");
                    }
                    emit(&args.out, &envelope.to_json_pretty())?;
                }
                Err(e) => return fail(e),
            }
        }
        Command::Scan(args) => {
            let config = match load_config(&args.run) {
                Ok(c) => c,
                Err(e) => return fail(e),
            };
            let result = if args.serial {
                run_scan_serial(&config)
            } else {
                run_scan(&config)
            };
            match result {
                Ok(output) => {
                    emit(&args.out_csv, &output.to_csv())?;
                    if let Some(dir) = &args.out_dir {
                        fs::create_dir_all(dir)?;
                        for (row, envelope) in output.rows.iter().zip(&output.envelopes) {
                            if let Some(envelope) = envelope {
                                let name =
                                    format!("cell_{}_{}_{}.json", row.idx.0, row.idx.1, row.idx.2);
                                fs::write(dir.join(name), envelope.to_json_pretty())?;
                            }
                        }
                    }
                }
                Err(e) => return fail(e),
            }
        }
        Command::TransportDemo(args) => transport_demo(args)?,
    }
    Ok(ExitCode::SUCCESS)
}

fn fail(e: shockshell::Error) -> Result<ExitCode, anyhow::Error> {
    eprintln!("error: {e}");
    Ok(ExitCode::from(exit_code_for(&e) as u8))
}

fn main() -> ExitCode {
    match run() {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
