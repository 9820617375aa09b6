use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde_json::{json, Value};

use cmkz::calogero_moser::l0_residual;
use cmkz::harness::{generic_target, run_suite, Suite, VerificationConfig};
use cmkz::partitions::Partition;
use cmkz::tensor_gaudin::{spectral_points, JointEigenOptions};
use cmkz::wronski::{wronski_fiber, FiberOptions};
use cmkz::{sampling, Error};

#[derive(Parser)]
#[command(
    name = "cmkz",
    version,
    about = "Gaudin spectra, Calogero-Moser level sets and Wronski maps"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Joint spectrum of the Gaudin Hamiltonians on the singular space of weight lambda.
    Spectrum {
        #[arg(long)]
        n: usize,
        /// Comma-separated parts, e.g. 2,1
        #[arg(long)]
        lambda: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Also write the output to this file.
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Run a verification suite and print the report.
    Verify {
        /// l0, lq, bethe, wronski, identities, collision or all [default: all]
        #[arg(long)]
        suite: Option<String>,
        /// [default: 2]
        #[arg(long)]
        n_min: Option<usize>,
        /// [default: 4]
        #[arg(long)]
        n_max: Option<usize>,
        /// [default: 5]
        #[arg(long)]
        trials: Option<usize>,
        /// [default: 0]
        #[arg(long)]
        seed: Option<u64>,
        /// Full configuration as JSON; the flags above override it.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Solve Wr(f) = sigma for f in X_lambda at a seeded generic sigma.
    Fiber {
        #[arg(long)]
        lambda: String,
        #[arg(long, default_value_t = 0)]
        sigma_seed: u64,
        #[arg(long)]
        json: Option<PathBuf>,
    },
}

enum Failure {
    Usage(String),
    Check,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Usage(e.to_string())
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Check) => ExitCode::from(1),
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

fn run(command: Command) -> Result<(), Failure> {
    match command {
        Command::Spectrum { n, lambda, seed, json } => {
            let lambda = Partition::parse(&lambda)?;
            if lambda.weight() != n {
                return Err(Failure::Usage(format!("{lambda} is not a partition of {n}")));
            }
            let mut rng = sampling::rng(seed);
            let z = sampling::generic_positions(n, &mut rng);
            let points = spectral_points(&lambda, &z, lambda.length(), &JointEigenOptions::default(), seed)?;
            let mut rows = Vec::new();
            for point in &points {
                let mut row = serde_json::to_value(point).expect("serializable");
                row["l0_residual"] = json!(l0_residual(&z, &point.p)?);
                rows.push(row);
            }
            let out = json!({
                "lambda": lambda.nonzero_parts(),
                "n": n,
                "seed": seed,
                "z": z.iter().map(|c| [c.re, c.im]).collect::<Vec<_>>(),
                "d_lambda": lambda.irrep_dimension(),
                "points": rows,
            });
            emit(&out, json.as_ref())?;
            Ok(())
        }
        Command::Verify {
            suite,
            n_min,
            n_max,
            trials,
            seed,
            config,
            json,
        } => {
            let mut config = match config {
                Some(path) => {
                    let text = std::fs::read_to_string(&path)
                        .map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
                    serde_json::from_str(&text).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?
                }
                None => VerificationConfig::default(),
            };
            if let Some(suite) = suite {
                config.suite = suite.parse::<Suite>()?;
            }
            config.n_min = n_min.unwrap_or(config.n_min);
            config.n_max = n_max.unwrap_or(config.n_max);
            config.trials = trials.unwrap_or(config.trials);
            config.seed = seed.unwrap_or(config.seed);
            let report = run_suite(&config)?;
            emit(&serde_json::to_value(&report).expect("serializable"), json.as_ref())?;
            if report.pass {
                Ok(())
            } else {
                Err(Failure::Check)
            }
        }
        Command::Fiber {
            lambda,
            sigma_seed,
            json,
        } => {
            let lambda = Partition::parse(&lambda)?;
            let sigma = generic_target(lambda.weight(), sigma_seed);
            let sol = wronski_fiber(&lambda, &sigma, &FiberOptions::default(), sigma_seed)?;
            emit(&serde_json::to_value(&sol).expect("serializable"), json.as_ref())?;
            if sol.complete() {
                Ok(())
            } else {
                Err(Failure::Check)
            }
        }
    }
}

fn emit(value: &Value, path: Option<&PathBuf>) -> Result<(), Failure> {
    let text = serde_json::to_string(value).expect("serializable");
    // A closed pipe downstream is not an error of ours.
    let _ = writeln!(std::io::stdout().lock(), "{text}");
    if let Some(path) = path {
        std::fs::write(path, format!("{text}\n")).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
    }
    Ok(())
}
