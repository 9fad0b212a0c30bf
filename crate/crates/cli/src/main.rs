use std::fs::File;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use folchar_cli::manifest::DEFAULT_CIRCLE;
use folchar_cli::{
    check_identity, run, summarize, sweep, write_csv, InputError, Manifest, Model, Report, RunOptions,
    EXIT_INPUT_ERROR, EXIT_PASS, EXIT_TASK_FAILURE, SEED_VAR,
};
use folchar_core::numeric::REFERENCE_NODES;

#[derive(Parser)]
#[command(name = "folchar", version, about = "Characteristic classes of transversely holomorphic foliations")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run every task of a manifest.
    Run {
        manifest: PathBuf,
        /// Quadrature nodes per axis.
        #[arg(long, default_value_t = REFERENCE_NODES)]
        quad: usize,
        /// Write the JSON report here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Record wall-clock times.
        #[arg(long)]
        timing: bool,
    },
    /// Evaluate Bott, DBott and the twisted fiber class along a real parameter path.
    Sweep {
        manifest: PathBuf,
        #[arg(long, default_value = "lambda")]
        param: String,
        /// start:stop:steps
        #[arg(long, allow_hyphen_values = true)]
        range: String,
        /// Twist index; repeat for several.
        #[arg(long = "m", default_values_t = [1i64], allow_negative_numbers = true)]
        m: Vec<i64>,
        #[arg(long)]
        csv: PathBuf,
        #[arg(long, default_value_t = REFERENCE_NODES)]
        quad: usize,
        #[arg(long)]
        chart: Option<String>,
        #[arg(long)]
        deformation: Option<String>,
        #[arg(long)]
        manifold: Option<String>,
    },
    /// Verify one symbolic identity.
    Check {
        manifest: PathBuf,
        #[arg(long)]
        identity: String,
    },
}

fn seed() -> Result<u64, InputError> {
    match std::env::var(SEED_VAR) {
        Err(_) => Ok(0),
        Ok(s) => s.trim().parse().map_err(|_| InputError(format!("{SEED_VAR}={s} is not an unsigned integer"))),
    }
}

fn parse_range(s: &str) -> Result<(f64, f64, usize), InputError> {
    let bad = || InputError(format!("range `{s}` is not start:stop:steps"));
    let parts: Vec<&str> = s.split(':').collect();
    if parts.len() != 3 {
        return Err(bad());
    }
    let a = parts[0].trim().parse().map_err(|_| bad())?;
    let b = parts[1].trim().parse().map_err(|_| bad())?;
    let n: usize = parts[2].trim().parse().map_err(|_| bad())?;
    if n == 0 {
        return Err(InputError("range needs at least one step".into()));
    }
    Ok((a, b, n))
}

fn load(path: &Path) -> Result<Model, InputError> {
    Model::build(Manifest::load(path)?)
}

fn emit(report: &Report, out: Option<&PathBuf>) -> Result<i32, InputError> {
    match out {
        Some(p) => {
            std::fs::write(p, report.to_json()).map_err(|e| InputError(format!("{}: {e}", p.display())))?;
            eprint!("{}", report.summary_text());
        }
        None => print!("{}", report.to_json()),
    }
    Ok(if report.all_passed() { EXIT_PASS } else { EXIT_TASK_FAILURE })
}

fn execute(cli: Cli) -> Result<i32, InputError> {
    let seed = seed()?;
    match cli.command {
        Command::Run { manifest, quad, out, timing } => {
            if quad == 0 {
                return Err(InputError("--quad must be positive".into()));
            }
            let model = load(&manifest)?;
            let report = run(&model, &RunOptions { quad_nodes: quad, timing, seed });
            emit(&report, out.as_ref())
        }
        Command::Check { manifest, identity } => {
            let model = load(&manifest)?;
            let report = check_identity(&model, &identity, &RunOptions { seed, ..Default::default() })?;
            print!("{}", report.summary_text());
            Ok(if report.all_passed() { EXIT_PASS } else { EXIT_TASK_FAILURE })
        }
        Command::Sweep { manifest, param, range, m, csv, quad, chart, deformation, manifold } => {
            let range = parse_range(&range)?;
            // a real segment avoids (−∞, 0] iff both endpoints do
            if range.0 <= 0.0 || range.1 <= 0.0 {
                return Err(InputError(format!(
                    "{param} path {}:{} meets the closed negative real axis",
                    range.0, range.1
                )));
            }
            let model = load(&manifest)?;
            model.check_parameter(&param)?;
            let (name, ch) = model.chart(chart.as_deref())?;
            let def = model.deformation(deformation.as_deref(), name)?;
            let man = model.manifold(manifold.as_deref())?;
            let rows = match sweep(ch, def, model.rules.as_ref(), man, &param, range, &m, DEFAULT_CIRCLE, quad) {
                Ok(rows) => rows,
                Err(e) => {
                    eprintln!("sweep failed: {e}");
                    return Ok(EXIT_TASK_FAILURE);
                }
            };
            let file = File::create(&csv).map_err(|e| InputError(format!("{}: {e}", csv.display())))?;
            write_csv(&rows, file).map_err(|e| InputError(format!("{}: {e}", csv.display())))?;
            for s in summarize(&rows, &m) {
                eprintln!(
                    "m={}: {} rows, max step bott {:.3e}, dbott {:.3e}, flk-fiber {:.3e}",
                    s.m,
                    rows.iter().filter(|r| r.m == s.m).count(),
                    s.max_step_bott,
                    s.max_step_dbott,
                    s.max_step_flk_fiber
                );
            }
            Ok(EXIT_PASS)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match execute(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_INPUT_ERROR
        }
    };
    ExitCode::from(code as u8)
}
