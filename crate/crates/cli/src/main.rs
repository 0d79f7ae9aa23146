//! `entinv`: conservation sweeps, GHZ checks and photonic emulation as CSV.
//!
//! Exit status: 0 success, 1 verification failure, 2 configuration error.

mod config;
mod table;
mod verify;

use std::fmt;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use entinv::experiment::{
    bootstrap_stderr, evolved_source, exact_estimate, run_experiment, theta_grid, ExperimentConfig, SourceModel,
    DEFAULT_SHOTS, DEFAULT_THETA_POINTS,
};
use entinv::ghz::{evolve_and_check, GhzConfig};
use entinv::qstate::C64;
use entinv::tripartite::{run_sweep, uniform_grid, PurificationAmplitudes};
use serde_json::{json, Value};

use config::Defaults;

const DEFAULT_GRID: usize = 101;
const DEFAULT_DRAWS: usize = 1000;
const DEFAULT_TOL: f64 = 1e-10;
const NOISE_MODEL: &str = "stand-in: (1-d-w)|Phi><Phi| + d*dephased(|Phi><Phi|) + w*I/4";

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Verification(String),
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "configuration error: {m}"),
            CliError::Verification(m) => write!(f, "verification failed: {m}"),
        }
    }
}

impl From<entinv::Error> for CliError {
    fn from(e: entinv::Error) -> Self {
        CliError::Config(e.to_string())
    }
}

#[derive(Parser, Debug)]
#[command(name = "entinv", version, about = "Entanglement invariants under amplitude damping")]
struct Cli {
    /// key=value file supplying defaults; explicit flags win.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
struct Output {
    /// CSV destination (stdout when absent).
    #[arg(long)]
    out: Option<PathBuf>,
    /// JSON summary destination.
    #[arg(long)]
    summary: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Brute-force tripartite sweep over a uniform p grid.
    Sweep {
        /// Excited population of the diagonal initial state.
        #[arg(long)]
        rho_ee: Option<f64>,
        /// Purification amplitudes as re,im pairs for alpha,beta,gamma,delta.
        #[arg(long, value_delimiter = ',', num_args = 1.., allow_negative_numbers = true)]
        amplitudes: Option<Vec<f64>>,
        /// Number of p points in [0, 1].
        #[arg(long)]
        grid: Option<usize>,
        #[command(flatten)]
        output: Output,
    },
    /// GHZ state with one damped reservoir per system qubit.
    Ghz {
        /// Number of system qubits; must match the length of `--p` when given.
        #[arg(long)]
        n: Option<usize>,
        /// |alpha|^2, the excited population.
        #[arg(long)]
        alpha2: Option<f64>,
        /// Damping parameter per qubit.
        #[arg(long, value_delimiter = ',', num_args = 1..)]
        p: Option<Vec<f64>>,
        #[command(flatten)]
        output: Output,
    },
    /// Finite-count emulation of the Sagnac experiment.
    Experiment {
        #[arg(long)]
        rho_ee: Option<f64>,
        /// Target source purity reached by dephasing.
        #[arg(long)]
        purity: Option<f64>,
        /// White-noise weight of the source.
        #[arg(long)]
        white_noise: Option<f64>,
        /// Number of theta settings in [0, pi/2].
        #[arg(long)]
        thetas: Option<usize>,
        #[arg(long)]
        shots: Option<u64>,
        #[arg(long, env = "ENTINV_SEED")]
        seed: Option<u64>,
        /// Bootstrap resamples per setting, reported in the summary.
        #[arg(long)]
        bootstrap: Option<usize>,
        #[command(flatten)]
        output: Output,
    },
    /// Randomized property suites; exit 1 if any error exceeds the tolerance.
    Verify {
        #[arg(long)]
        draws: Option<usize>,
        #[arg(long)]
        tol: Option<f64>,
        #[arg(long, env = "ENTINV_SEED")]
        seed: Option<u64>,
        #[arg(long)]
        summary: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("entinv: {e}");
            ExitCode::from(match e {
                CliError::Verification(_) => 1,
                CliError::Config(_) => 2,
            })
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    let defaults = match &cli.config {
        Some(path) => Defaults::load(path)?,
        None => Defaults::default(),
    };
    match cli.command {
        Command::Sweep { rho_ee, amplitudes, grid, output } => {
            defaults.restrict(&["rho-ee", "amplitudes", "grid", "out", "summary"])?;
            let output = resolve_output(&defaults, output)?;
            let rho_ee = defaults.scalar(rho_ee, "rho-ee")?;
            let amplitudes = defaults.list(amplitudes, "amplitudes")?;
            let grid = defaults.scalar(grid, "grid")?.unwrap_or(DEFAULT_GRID);
            sweep(rho_ee, amplitudes, grid, &output)
        }
        Command::Ghz { n, alpha2, p, output } => {
            defaults.restrict(&["n", "alpha2", "p", "out", "summary"])?;
            let output = resolve_output(&defaults, output)?;
            let n = defaults.scalar(n, "n")?;
            let alpha2 = defaults.scalar(alpha2, "alpha2")?;
            let p = defaults.list(p, "p")?;
            ghz(n, alpha2, p, &output)
        }
        Command::Experiment { rho_ee, purity, white_noise, thetas, shots, seed, bootstrap, output } => {
            defaults.restrict(&[
                "rho-ee",
                "purity",
                "white-noise",
                "thetas",
                "shots",
                "seed",
                "bootstrap",
                "out",
                "summary",
            ])?;
            let output = resolve_output(&defaults, output)?;
            let rho_ee = defaults
                .scalar(rho_ee, "rho-ee")?
                .ok_or_else(|| CliError::Config("experiment needs --rho-ee".into()))?;
            let white = defaults.scalar(white_noise, "white-noise")?.unwrap_or(0.0);
            let source = match defaults.scalar(purity, "purity")? {
                Some(target) => SourceModel::with_purity(rho_ee, white, target)?,
                None => SourceModel::new(rho_ee, 0.0, white)?,
            };
            let cfg = ExperimentConfig::new(
                source,
                theta_grid(defaults.scalar(thetas, "thetas")?.unwrap_or(DEFAULT_THETA_POINTS)),
                defaults.scalar(shots, "shots")?.unwrap_or(DEFAULT_SHOTS),
                defaults.scalar(seed, "seed")?.unwrap_or(0),
            )?;
            experiment(&cfg, defaults.scalar(bootstrap, "bootstrap")?.unwrap_or(0), &output)
        }
        Command::Verify { draws, tol, seed, summary } => {
            defaults.restrict(&["draws", "tol", "seed", "summary"])?;
            let draws = defaults.scalar(draws, "draws")?.unwrap_or(DEFAULT_DRAWS);
            let tol = defaults.scalar(tol, "tol")?.unwrap_or(DEFAULT_TOL);
            let seed = defaults.scalar(seed, "seed")?.unwrap_or(0);
            let summary = defaults.scalar(summary, "summary")?;
            run_verify(draws, tol, seed, summary.as_deref())
        }
    }
}

fn resolve_output(defaults: &Defaults, o: Output) -> Result<Output, CliError> {
    Ok(Output { out: defaults.scalar(o.out, "out")?, summary: defaults.scalar(o.summary, "summary")? })
}

fn sweep(rho_ee: Option<f64>, amplitudes: Option<Vec<f64>>, grid: usize, output: &Output) -> Result<(), CliError> {
    let amp = match (rho_ee, amplitudes) {
        (Some(r), None) => PurificationAmplitudes::diagonal(r)?,
        (None, Some(a)) => {
            let [ar, ai, br, bi, gr, gi, dr, di] = a[..] else {
                return Err(CliError::Config(format!("--amplitudes needs 8 values, got {}", a.len())));
            };
            PurificationAmplitudes::new(C64::new(ar, ai), C64::new(br, bi), C64::new(gr, gi), C64::new(dr, di))?
        }
        _ => return Err(CliError::Config("sweep needs exactly one of --rho-ee or --amplitudes".into())),
    };
    if grid < 2 {
        return Err(CliError::Config("--grid needs at least 2 points".into()));
    }
    let res = run_sweep(&amp, &uniform_grid(grid))?;
    let rows: Vec<String> = res.reports.iter().map(table::sweep_row).collect();
    write_csv(output.out.as_deref(), table::INVARIANT_HEADER, &rows)?;
    let first = &res.reports[0];
    write_summary(
        output.summary.as_deref(),
        json!({
            "command": "sweep",
            "rho_ee": first.rho_ee,
            "lambda": first.lambda.value(),
            "grid": grid,
            "rows": rows.len(),
            "max_residual": res.max_residual,
        }),
    )
}

fn ghz(n: Option<usize>, alpha2: Option<f64>, p: Option<Vec<f64>>, output: &Output) -> Result<(), CliError> {
    let alpha2 = alpha2.ok_or_else(|| CliError::Config("ghz needs --alpha2".into()))?;
    let p = match (n, p) {
        (Some(n), Some(p)) if p.len() != n => {
            return Err(CliError::Config(format!("--n {n} but {} damping values", p.len())))
        }
        (_, Some(p)) => p,
        (Some(n), None) => vec![1.0; n],
        (None, None) => return Err(CliError::Config("ghz needs --n or --p".into())),
    };
    let cfg = GhzConfig::with_population(alpha2, p)?;
    let rep = evolve_and_check(&cfg)?;
    write_csv(output.out.as_deref(), table::GHZ_HEADER, &[table::ghz_row(&cfg, &rep)])?;
    write_summary(
        output.summary.as_deref(),
        json!({
            "command": "ghz",
            "n": cfg.n(),
            "alpha2": alpha2,
            "p": cfg.p_list(),
            "residual": rep.residual,
            "applicable": rep.applicable,
        }),
    )
}

fn experiment(cfg: &ExperimentConfig, resamples: usize, output: &Output) -> Result<(), CliError> {
    let points = run_experiment(cfg)?;
    let rows: Vec<String> = points.iter().map(table::experiment_row).collect();
    write_csv(output.out.as_deref(), table::INVARIANT_HEADER, &rows)?;
    if output.summary.is_none() {
        return Ok(());
    }
    let mut per_theta = Vec::with_capacity(points.len());
    for (k, pt) in points.iter().enumerate() {
        let exact = exact_estimate(&evolved_source(&cfg.source, pt.theta)?, pt.theta)?;
        let mut entry = json!({
            "theta": pt.theta,
            "I_lhs": pt.estimate.report.lhs,
            "stderr_I_lhs": pt.estimate.stderr_lhs,
            "I_lhs_exact": exact.report.lhs,
        });
        if resamples > 0 {
            let b = bootstrap_stderr(&pt.record, resamples, cfg.seed.wrapping_add(k as u64))?;
            entry["bootstrap"] = json!({"W_S": b.w_s, "W_R": b.w_r, "W_M": b.w_m, "I_lhs": b.lhs, "I_rhs": b.rhs});
        }
        per_theta.push(entry);
    }
    write_summary(
        output.summary.as_deref(),
        json!({
            "command": "experiment",
            "noise_model": NOISE_MODEL,
            "rho_ee_target": cfg.source.rho_ee_target(),
            "dephasing_weight": cfg.source.dephasing_weight(),
            "white_noise_weight": cfg.source.white_noise_weight(),
            "source_purity": cfg.source.purity(),
            "shots": cfg.shots,
            "seed": cfg.seed,
            "points": per_theta,
        }),
    )
}

fn run_verify(draws: usize, tol: f64, seed: u64, summary: Option<&Path>) -> Result<(), CliError> {
    if draws == 0 || tol.is_nan() || tol <= 0.0 {
        return Err(CliError::Config("verify needs --draws >= 1 and --tol > 0".into()));
    }
    let outcomes = verify::run_all(draws, seed)?;
    let mut failed = Vec::new();
    for o in &outcomes {
        let ok = o.max_error <= tol;
        println!("{} {}: {} cases, max error {:.3e}", if ok { "PASS" } else { "FAIL" }, o.name, o.cases, o.max_error);
        if !ok {
            failed.push(o.name);
        }
    }
    let suites: Vec<Value> = outcomes
        .iter()
        .map(|o| json!({"name": o.name, "cases": o.cases, "max_error": o.max_error, "pass": o.max_error <= tol}))
        .collect();
    write_summary(
        summary,
        json!({"command": "verify", "draws": draws, "tol": tol, "seed": seed, "suites": suites, "pass": failed.is_empty()}),
    )?;
    if failed.is_empty() {
        Ok(())
    } else {
        Err(CliError::Verification(format!("{} above {tol:e}", failed.join(", "))))
    }
}

fn write_csv(path: Option<&Path>, header: &str, rows: &[String]) -> Result<(), CliError> {
    let mut text = String::with_capacity(header.len() + rows.iter().map(|r| r.len() + 1).sum::<usize>() + 1);
    text.push_str(header);
    text.push('\n');
    for r in rows {
        text.push_str(r);
        text.push('\n');
    }
    match path {
        Some(p) => std::fs::write(p, text).map_err(|e| CliError::Config(format!("cannot write {}: {e}", p.display()))),
        None => std::io::stdout()
            .write_all(text.as_bytes())
            .map_err(|e| CliError::Config(format!("cannot write stdout: {e}"))),
    }
}

fn write_summary(path: Option<&Path>, value: Value) -> Result<(), CliError> {
    let Some(p) = path else { return Ok(()) };
    let text = serde_json::to_string_pretty(&value).expect("summary serializes");
    std::fs::write(p, text + "\n").map_err(|e| CliError::Config(format!("cannot write {}: {e}", p.display())))
}
