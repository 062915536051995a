use std::path::PathBuf;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};

use rankcorr::bench::run_bench;
use rankcorr::cli::{
    exit_code, exit_code_for, gradcheck_csv, gradcheck_passed, run_ablation, run_corr,
    run_summary, AblationConfig,
};
use rankcorr::error::Error;
use rankcorr::gradcheck::run_suite;
use rankcorr::score_file::ScoreFile;
use rankcorr::soft_rank::SoftRankConfig;

#[derive(Parser)]
#[command(name = "rankcorr", version, about = "Rank-correlation metrics, losses and experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum OutputFormat {
    Csv,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Exact PLCC/SROCC and the smooth SROCC surrogate of a score file
    Corr {
        /// CSV file with header `sample_id,mos,pred`
        file: PathBuf,
        /// Steepness of the smooth ranking
        #[arg(long, default_value_t = SoftRankConfig::DEFAULT_STEEPNESS)]
        k: f64,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = OutputFormat::Json)]
        format: OutputFormat,
    },
    /// Finite-difference verification of the analytic gradients
    Gradcheck {
        /// Vector length of the random instances
        #[arg(long, default_value_t = 8)]
        n: usize,
        #[arg(long, default_value_t = SoftRankConfig::DEFAULT_STEEPNESS)]
        k: f64,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = 100)]
        trials: usize,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = OutputFormat::Json)]
        format: OutputFormat,
    },
    /// Wall-clock scaling of the pairwise losses with a log-log slope fit
    Bench {
        /// Comma-separated strictly increasing sizes
        #[arg(long, value_delimiter = ',', default_value = "1024,2048,4096,8192")]
        sizes: Vec<usize>,
        /// Repetitions per size; the median is kept
        #[arg(long, default_value_t = 5)]
        reps: usize,
        #[arg(long, default_value_t = SoftRankConfig::DEFAULT_STEEPNESS)]
        k: f64,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = OutputFormat::Csv)]
        format: OutputFormat,
    },
    /// Train all three loss modes over a seed list and summarize
    Ablation {
        /// Flat `key = value` config file; flags below override it
        config: PathBuf,
        #[arg(long)]
        lambda: Option<f64>,
        #[arg(long)]
        k: Option<f64>,
        #[arg(long)]
        folds: Option<usize>,
        #[arg(long)]
        retention: Option<u64>,
        /// Replace the config's seed list with this single seed
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = OutputFormat::Csv)]
        format: OutputFormat,
    },
}

fn main() {
    let cli = Cli::parse();
    std::process::exit(match dispatch(cli) {
        Ok(code) => code,
        Err(error) => {
            let code = exit_code_for(&error);
            let structured = serde_json::json!({
                "error": error.to_string(),
                "exit_code": code,
            });
            eprintln!("{structured}");
            code
        }
    });
}

fn emit(out: &Option<PathBuf>, payload: &str) -> Result<(), Error> {
    match out {
        Some(path) => std::fs::write(path, payload)?,
        None => println!("{payload}"),
    }
    Ok(())
}

fn dispatch(cli: Cli) -> Result<i32, Error> {
    let started = Instant::now();
    match cli.command {
        Command::Corr { file, k, out, format } => {
            let scores = ScoreFile::load(&file)?;
            let report = run_corr(&scores, k)?;
            let payload = match format {
                OutputFormat::Csv => report.to_csv(),
                OutputFormat::Json => {
                    let config = serde_json::json!({ "file": file, "k": k });
                    serde_json::to_string_pretty(&run_summary(
                        "corr",
                        config,
                        serde_json::to_value(&report).expect("serializable"),
                        started.elapsed().as_secs_f64(),
                    ))
                    .expect("serializable")
                }
            };
            emit(&out, &payload)?;
            Ok(exit_code::OK)
        }
        Command::Gradcheck {
            n,
            k,
            seed,
            trials,
            out,
            format,
        } => {
            if trials == 0 {
                eprintln!("warning: trials = 0, every check passes vacuously");
            }
            let reports = run_suite(n, k, trials, seed)?;
            for report in &reports {
                eprintln!("{}", report.summary_line());
            }
            let payload = match format {
                OutputFormat::Csv => gradcheck_csv(&reports),
                OutputFormat::Json => {
                    let config = serde_json::json!({
                        "n": n, "k": k, "seed": seed, "trials": trials,
                    });
                    serde_json::to_string_pretty(&run_summary(
                        "gradcheck",
                        config,
                        serde_json::to_value(&reports).expect("serializable"),
                        started.elapsed().as_secs_f64(),
                    ))
                    .expect("serializable")
                }
            };
            emit(&out, &payload)?;
            Ok(if gradcheck_passed(&reports) {
                exit_code::OK
            } else {
                exit_code::CHECK_FAILED
            })
        }
        Command::Bench {
            sizes,
            reps,
            k,
            seed,
            out,
            format,
        } => {
            let report = run_bench(&sizes, reps, k, seed)?;
            eprintln!("{}", report.advertised);
            eprintln!(
                "measured: mono_slope {:.3}, margin_slope {:.3}",
                report.mono_slope, report.margin_slope
            );
            let payload = match format {
                OutputFormat::Csv => report.to_csv(),
                OutputFormat::Json => {
                    let config = serde_json::json!({
                        "sizes": sizes, "reps": reps, "k": k, "seed": seed,
                    });
                    serde_json::to_string_pretty(&run_summary(
                        "bench",
                        config,
                        serde_json::to_value(&report).expect("serializable"),
                        started.elapsed().as_secs_f64(),
                    ))
                    .expect("serializable")
                }
            };
            emit(&out, &payload)?;
            Ok(exit_code::OK)
        }
        Command::Ablation {
            config,
            lambda,
            k,
            folds,
            retention,
            seed,
            out,
            format,
        } => {
            let text = std::fs::read_to_string(&config)?;
            let mut ablation = AblationConfig::parse(&text)?;
            // Flags win over file values.
            if let Some(lambda) = lambda {
                ablation.lambda = lambda;
            }
            if let Some(k) = k {
                ablation.steepness = k;
            }
            if let Some(folds) = folds {
                ablation.folds = folds;
            }
            if let Some(retention) = retention {
                ablation.retention = retention;
            }
            if let Some(seed) = seed {
                ablation.seeds = vec![seed];
            }
            let report = run_ablation(&ablation)?;
            let payload = match format {
                OutputFormat::Csv => report.to_csv(),
                OutputFormat::Json => serde_json::to_string_pretty(&run_summary(
                    "ablation",
                    serde_json::to_value(&ablation).expect("serializable"),
                    serde_json::to_value(&report).expect("serializable"),
                    started.elapsed().as_secs_f64(),
                ))
                .expect("serializable"),
            };
            emit(&out, &payload)?;
            Ok(exit_code::OK)
        }
    }
}
