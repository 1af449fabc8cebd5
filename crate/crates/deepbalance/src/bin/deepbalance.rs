//! Command-line front end.
//!
//! Exit codes: 0 success, 2 bad flags or experiment file, 3 unreadable or
//! malformed input, 4 training or evaluation failure (including any failed
//! benchmark or sweep cell), 5 results could not be written. On failure a
//! one-line JSON summary goes to stderr.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use deepbalance::data::{CsvSchema, SyntheticParams};
use deepbalance::experiment::{
    gen_synth, run_benchmark, run_evaluate, run_sweep, run_train, DataSource, ExperimentSpec,
    Failure, RunFailure, Stage, SweepParameter, SweepSpec,
};
use deepbalance::Error;

#[derive(Parser)]
#[command(
    name = "deepbalance",
    version,
    about = "Deep belief network ensembles for imbalanced classification"
)]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Global {
    /// Experiment file (TOML). Without it the built-in defaults are used.
    #[arg(long, global = true)]
    spec: Option<PathBuf>,
    /// Replaces the seed list with this single seed (the data seed for gen-synth).
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// Decision threshold on ensemble scores [default: 0.5].
    #[arg(long, global = true)]
    threshold: Option<f64>,
    /// Output directory (output file for gen-synth).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Train the first configured method and save the model.
    Train,
    /// Compare all configured methods over all seeds.
    Benchmark,
    /// Vary one parameter of the first configured method.
    Sweep {
        #[arg(long)]
        parameter: Option<String>,
        /// Comma-separated values.
        #[arg(long, value_delimiter = ',')]
        values: Option<Vec<usize>>,
    },
    /// Write a two-Gaussian synthetic dataset as CSV.
    GenSynth {
        #[arg(long)]
        n_majority: Option<usize>,
        #[arg(long)]
        n_minority: Option<usize>,
        #[arg(long)]
        n_features: Option<usize>,
        #[arg(long)]
        separation: Option<f64>,
    },
    /// Score a saved model against a CSV file.
    Evaluate {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        data: PathBuf,
        #[arg(long, value_enum)]
        preset: Option<PresetArg>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum PresetArg {
    CreditCard,
    Paysim,
    Synthetic,
}

fn load_spec(g: &Global) -> Result<ExperimentSpec, Failure> {
    let mut spec = match &g.spec {
        Some(path) => ExperimentSpec::load(path)?,
        None => ExperimentSpec::default(),
    };
    if let Some(seed) = g.seed {
        spec.seeds = vec![seed];
    }
    if let Some(w) = g.workers {
        spec.workers = w;
    }
    if let Some(t) = g.threshold {
        spec.threshold = t;
    }
    if let Some(out) = &g.out {
        spec.out = out.clone();
    }
    spec.validate().map_err(|error| Failure {
        stage: Stage::Config,
        error,
    })?;
    Ok(spec)
}

fn config(message: String) -> Failure {
    Failure {
        stage: Stage::Config,
        error: Error::Config(message),
    }
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or_else(|| "failed".to_string(), |x| format!("{x:.4}"))
}

/// Outcome of a command that may finish with some failed cells.
enum Done {
    Ok,
    Partial(Vec<RunFailure>),
}

fn run(cli: Cli) -> Result<Done, Failure> {
    let g = &cli.global;
    match cli.command {
        Command::Train => {
            let spec = load_spec(g)?;
            let report = run_train(&spec)?;
            let r = &report.row;
            println!(
                "{} seed {}: AUC {} balanced accuracy {} ({:.2}s) -> {}",
                r.method,
                r.seed,
                fmt_opt(r.auc),
                fmt_opt(r.balanced_accuracy),
                r.wall_time_seconds.unwrap_or(0.0),
                report.model_path.display()
            );
            Ok(Done::Ok)
        }
        Command::Benchmark => {
            let spec = load_spec(g)?;
            let report = run_benchmark(&spec)?;
            println!(
                "{:<14} {:>5} {:>8} {:>8} {:>8} {:>8}",
                "method", "runs", "acc+", "acc-", "bal_acc", "auc"
            );
            for s in &report.summary {
                println!(
                    "{:<14} {:>5} {:>8} {:>8} {:>8} {:>8}",
                    s.method,
                    s.runs - s.failures,
                    fmt_opt(s.mean_acc_plus),
                    fmt_opt(s.mean_acc_minus),
                    fmt_opt(s.mean_balanced_accuracy),
                    fmt_opt(s.mean_auc)
                );
            }
            println!("results in {}", spec.out.display());
            Ok(finish(report.failures))
        }
        Command::Sweep { parameter, values } => {
            let mut spec = load_spec(g)?;
            match (parameter, values) {
                (Some(p), Some(v)) => {
                    let parameter: SweepParameter = p.parse().map_err(|error| Failure {
                        stage: Stage::Config,
                        error,
                    })?;
                    spec.sweep = Some(SweepSpec {
                        parameter,
                        values: v,
                    });
                    spec.validate().map_err(|error| Failure {
                        stage: Stage::Config,
                        error,
                    })?;
                }
                (None, None) => {}
                _ => return Err(config("--parameter and --values go together".into())),
            }
            let report = run_sweep(&spec)?;
            println!("{} sweep of {}", report.parameter.name(), report.method);
            for r in &report.rows {
                println!(
                    "{:>6}  auc {}  train {}s",
                    r.value,
                    fmt_opt(r.mean_auc),
                    fmt_opt(r.mean_train_seconds)
                );
            }
            println!("results in {}", spec.out.join("sweep.csv").display());
            Ok(finish(report.failures))
        }
        Command::GenSynth {
            n_majority,
            n_minority,
            n_features,
            separation,
        } => {
            let spec = match &g.spec {
                Some(path) => ExperimentSpec::load(path)?,
                None => ExperimentSpec::default(),
            };
            let mut p = match spec.data {
                DataSource::Synthetic {
                    n_majority,
                    n_minority,
                    n_features,
                    class_separation,
                    seed,
                } => SyntheticParams {
                    n_majority,
                    n_minority,
                    n_features,
                    class_separation,
                    seed,
                },
                DataSource::Csv { .. } => SyntheticParams::standard(1),
            };
            p.n_majority = n_majority.unwrap_or(p.n_majority);
            p.n_minority = n_minority.unwrap_or(p.n_minority);
            p.n_features = n_features.unwrap_or(p.n_features);
            p.class_separation = separation.unwrap_or(p.class_separation);
            p.seed = g.seed.unwrap_or(p.seed);
            let out = g
                .out
                .clone()
                .unwrap_or_else(|| PathBuf::from("synthetic.csv"));
            let ds = gen_synth(&p, &out)?;
            println!(
                "{} rows ({} positive) x {} features -> {}",
                ds.n_rows(),
                ds.n_positive(),
                ds.n_features(),
                out.display()
            );
            Ok(Done::Ok)
        }
        Command::Evaluate {
            model,
            data,
            preset,
        } => {
            let spec = load_spec(g)?;
            let schema = match preset {
                Some(PresetArg::CreditCard) => CsvSchema::credit_card(),
                Some(PresetArg::Paysim) => CsvSchema::paysim(),
                Some(PresetArg::Synthetic) => CsvSchema::synthetic(),
                None => spec.data.schema().unwrap_or_else(CsvSchema::synthetic),
            };
            let report = run_evaluate(&model, &data, &schema, spec.threshold, &spec.out)?;
            let r = &report.row;
            println!(
                "AUC {} acc+ {} acc- {} balanced accuracy {} at threshold {}",
                fmt_opt(r.auc),
                fmt_opt(r.acc_plus),
                fmt_opt(r.acc_minus),
                fmt_opt(r.balanced_accuracy),
                r.threshold
            );
            Ok(Done::Ok)
        }
    }
}

fn finish(failures: Vec<RunFailure>) -> Done {
    if failures.is_empty() {
        Done::Ok
    } else {
        Done::Partial(failures)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(Done::Ok) => ExitCode::SUCCESS,
        Ok(Done::Partial(failures)) => {
            let code = Stage::Run.exit_code();
            eprintln!(
                "{}",
                json!({
                    "status": "partial_failure",
                    "stage": Stage::Run,
                    "exit_code": code,
                    "failures": failures,
                })
            );
            ExitCode::from(code as u8)
        }
        Err(f) => {
            let code = f.stage.exit_code();
            eprintln!(
                "{}",
                json!({
                    "status": "error",
                    "stage": f.stage,
                    "exit_code": code,
                    "message": f.to_string(),
                })
            );
            ExitCode::from(code as u8)
        }
    }
}
