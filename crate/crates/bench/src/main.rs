use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Mutex;

use clap::{Parser, Subcommand};
use clusterkrig_bench::config::{parse_nugget, RunArgs};
use clusterkrig_bench::data::{load_queries, write_predictions};
use clusterkrig_bench::results::{format_g6, write_results, IncrementalWriter};
use clusterkrig_bench::{
    aggregate, emit_results, load_csv, read_results, run_experiment, synth_dataset, write_csv, BenchError, Fold,
    Format, Pipeline, Result, ResultRow, SynthFunction,
};
use clusterkrig_core::{CkConfig, FitConfig, Flavor};

#[derive(Parser)]
#[command(name = "clusterkrig", version, about = "Cluster Kriging experiments and models")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sample a synthetic function to CSV.
    Synth {
        #[arg(long)]
        function: SynthFunction,
        #[arg(long, default_value_t = 2000)]
        n: usize,
        #[arg(long, default_value_t = 5)]
        d: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Cross-validated sweep over flavors and cluster counts.
    Run(RunArgs),
    /// Summarize a result file by its fold means.
    Report {
        results: PathBuf,
        /// Write the summary here instead of printing a table.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        format: Option<Format>,
    },
    /// Fit one model on a CSV file and save it as JSON.
    Fit {
        #[arg(long)]
        dataset: PathBuf,
        #[arg(long, default_value = "y")]
        target: String,
        #[arg(long, default_value = "owck")]
        flavor: Flavor,
        #[arg(long, default_value_t = 4)]
        clusters: usize,
        #[arg(long, default_value_t = 512)]
        subset_size: usize,
        #[arg(long, default_value_t = 1.1)]
        overlap: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value = "auto")]
        nugget: String,
        #[arg(long)]
        restarts: Option<usize>,
        #[arg(long)]
        max_evals: Option<usize>,
        #[arg(long, default_value_t = true, action = clap::ArgAction::Set)]
        standardize: bool,
        #[arg(long)]
        workers: Option<usize>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Predict with a saved model; writes `mean,variance` per query row.
    Predict {
        #[arg(long)]
        model: PathBuf,
        /// CSV whose columns are the model inputs, in training order.
        #[arg(long)]
        queries: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    match run(Cli::parse().command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

fn run(command: Command) -> Result<ExitCode> {
    match command {
        Command::Synth { function, n, d, seed, out } => {
            write_csv(&out, &synth_dataset(function, n, d, seed)?)?;
        }
        Command::Run(args) => return run_sweep(args),
        Command::Report { results, out, format } => {
            let rows = read_results(&results)?;
            let means = aggregate(&rows);
            match out {
                Some(path) => {
                    let format = format.unwrap_or_else(|| Format::from_path(&path));
                    emit_results(&means, format, &path)?;
                }
                None => print_table(&means),
            }
        }
        Command::Fit {
            dataset,
            target,
            flavor,
            clusters,
            subset_size,
            overlap,
            seed,
            nugget,
            restarts,
            max_evals,
            standardize,
            workers,
            out,
        } => {
            let data = load_csv(&dataset, &target)?;
            let defaults = FitConfig::default();
            let config = CkConfig {
                subset_size,
                overlap,
                seed,
                fit: FitConfig {
                    nugget: parse_nugget(&nugget)?,
                    restarts: restarts.unwrap_or(defaults.restarts),
                    max_evals: max_evals.unwrap_or(defaults.max_evals),
                    ..defaults
                },
                ..CkConfig::new(flavor, clusters)
            };
            let pool = pool(workers)?;
            let pipeline = pool.install(|| Pipeline::fit(&data, &config, standardize))?;
            pipeline.save(&out)?;
            eprintln!("fitted {} with {} model(s) on {} rows", flavor, pipeline.model.k(), data.n());
        }
        Command::Predict { model, queries, out } => {
            let pipeline = Pipeline::load(&model)?;
            let q = load_queries(&queries)?;
            let (mean, variance) = pipeline.predict(&q)?;
            match out {
                Some(path) => write_predictions(&path, &mean, &variance)?,
                None => {
                    println!("mean,variance");
                    for (m, v) in mean.iter().zip(&variance) {
                        println!("{m},{v}");
                    }
                }
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn pool(workers: Option<usize>) -> Result<rayon::ThreadPool> {
    let mut b = rayon::ThreadPoolBuilder::new();
    if let Some(w) = workers {
        b = b.num_threads(w);
    }
    b.build().map_err(|e| BenchError::Config(format!("cannot start worker pool: {e}")))
}

fn run_sweep(args: RunArgs) -> Result<ExitCode> {
    let args = args.resolve()?;
    let config = args.to_experiment()?;
    let format = args.output_format()?;
    let writer = match &args.out {
        Some(path) => Some(Mutex::new(IncrementalWriter::create(path, format)?)),
        None => None,
    };
    let on_row = |row: &ResultRow| {
        if let Some(e) = &row.error {
            eprintln!("{} {} sweep {} fold {}: {e}", row.dataset, row.flavor, row.sweep, row.fold);
        }
        if let Some(w) = &writer {
            // a failed append only loses the partial copy; the final rewrite still happens
            if let Err(e) = w.lock().expect("writer lock").append(row) {
                eprintln!("warning: could not append to result file: {e}");
            }
        }
    };
    let rows = run_experiment(&config, on_row)?;
    drop(writer);
    match &args.out {
        Some(path) => emit_results(&rows, format, path)?,
        None => {
            let stdout = std::io::stdout();
            write_results(&rows, format, stdout.lock())
                .map_err(|e| BenchError::Io { path: PathBuf::from("<stdout>"), source: e })?;
        }
    }
    let failed = rows.iter().filter(|r| r.fold != Fold::Mean && r.error.is_some()).count();
    if failed > 0 {
        eprintln!("{failed} cell(s) failed");
    }
    Ok(ExitCode::SUCCESS)
}

fn print_table(rows: &[ResultRow]) {
    println!(
        "{:<16} {:<7} {:>6} {:>10} {:>10} {:>10} {:>10} {:>10}",
        "dataset", "flavor", "sweep", "r2", "smse", "msll", "fit_s", "predict_s"
    );
    for r in rows {
        println!(
            "{:<16} {:<7} {:>6} {:>10} {:>10} {:>10} {:>10} {:>10}",
            r.dataset,
            r.flavor,
            r.sweep,
            format_g6(r.r2),
            format_g6(r.smse),
            format_g6(r.msll),
            format_g6(r.fit_time_s),
            format_g6(r.predict_time_s)
        );
    }
}
