use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use delayfs::dataset::write_csv;
use delayfs::experiment::{read_runs_csv, write_outputs, write_reports, AggregateResult};
use delayfs::{run_repetitions, synthesize, ExperimentConfig, ExperimentData, GridConfig, Method, RunResult, SynthSpec};

#[derive(Parser)]
#[command(name = "delayfs", version, about = "Feature selection under delayed, budgeted data acquisition")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one method at one parameter point.
    Run(RunArgs),
    /// Run every method and point of a grid file.
    Grid(RunArgs),
    /// Rebuild aggregate tables from a stored runs.csv.
    Report {
        /// Directory holding runs.csv; tables are written next to it.
        #[arg(long)]
        out: PathBuf,
    },
    /// Write a synthetic dataset and its schema.
    Synth {
        #[arg(long, default_value_t = 10_000)]
        rows: usize,
        #[arg(long, default_value_t = 10)]
        numeric: usize,
        #[arg(long, default_value_t = 0)]
        categorical: usize,
        /// Index of the feature that determines the label.
        #[arg(long, default_value_t = 0)]
        informative: usize,
        #[arg(long, default_value_t = 0.0)]
        noise: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Directory for data.csv and schema.toml.
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    method: Option<Method>,
    /// Base seed; repetitions use seed, seed+1, ...
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    reps: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Write a decision and reward trace per run.
    #[arg(long)]
    verbose: bool,
}

impl RunArgs {
    fn apply(&self, c: &mut ExperimentConfig) {
        if let Some(m) = self.method {
            c.method = m;
        }
        if let Some(s) = self.seed {
            c.seed = s;
        }
        if let Some(r) = self.reps {
            c.repetitions = r;
        }
        if let Some(o) = &self.out {
            c.output = o.clone();
        }
        c.verbose |= self.verbose;
    }
}

fn print_table(aggregates: &[AggregateResult]) {
    println!(
        "{:>5} {:>5} {:>5} {:>3} {:<5} {:>4} {:>8} {:>8} {:>8} {:>8}",
        "T", "D", "n", "k", "meth", "runs", "cv_mean", "cv_std", "test_mu", "test_sd"
    );
    for a in aggregates {
        let k = &a.key;
        println!(
            "{:>5} {:>5} {:>5} {:>3} {:<5} {:>4} {:>8.4} {:>8.4} {:>8.4} {:>8.4}",
            k.steps,
            k.delay,
            k.instances,
            k.k,
            k.method,
            a.runs(),
            a.cv_f1.mean,
            a.cv_f1.std,
            a.test_f1.mean,
            a.test_f1.std
        );
    }
}

fn execute(configs: &[ExperimentConfig], out: &Path, nested_logs: bool) -> Result<Vec<RunResult>> {
    let Some(first) = configs.first() else {
        return Ok(Vec::new());
    };
    let data = ExperimentData::load(first)
        .with_context(|| format!("loading {} with schema {}", first.dataset.display(), first.schema.display()))?;
    let mut results = Vec::new();
    for c in configs {
        let started = Instant::now();
        let log_dir = if c.verbose {
            let dir = if nested_logs {
                out.join("logs").join(format!("{}-T{}-D{}-n{}-k{}", c.method, c.steps, c.delay, c.instances, c.k))
            } else {
                out.to_path_buf()
            };
            std::fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
            Some(dir)
        } else {
            None
        };
        let runs = run_repetitions(c, &data, log_dir.as_deref())?;
        eprintln!(
            "{} T={} D={} n={} k={}: {} runs in {:.1}s",
            c.method,
            c.steps,
            c.delay,
            c.instances,
            c.k,
            runs.len(),
            started.elapsed().as_secs_f64()
        );
        results.extend(runs);
    }
    Ok(results)
}

fn main() -> Result<()> {
    dispatch(Cli::parse().command)
}

fn dispatch(command: Command) -> Result<()> {
    match command {
        Command::Run(args) => {
            let mut c = ExperimentConfig::load(&args.config)
                .with_context(|| format!("reading config {}", args.config.display()))?;
            args.apply(&mut c);
            let out = c.output.clone();
            std::fs::create_dir_all(&out).with_context(|| format!("creating {}", out.display()))?;
            let results = execute(std::slice::from_ref(&c), &out, false)?;
            print_table(&write_outputs(&out, &results)?);
        }
        Command::Grid(args) => {
            let mut g =
                GridConfig::load(&args.config).with_context(|| format!("reading grid {}", args.config.display()))?;
            args.apply(&mut g.base);
            if let Some(m) = args.method {
                g.methods = Some(vec![m]);
            }
            let out = g.base.output.clone();
            std::fs::create_dir_all(&out).with_context(|| format!("creating {}", out.display()))?;
            let results = execute(&g.expand(), &out, true)?;
            print_table(&write_outputs(&out, &results)?);
        }
        Command::Report { out } => {
            let results = read_runs_csv(&out.join("runs.csv"))?;
            print_table(&write_reports(&out, &results)?);
        }
        Command::Synth {
            rows,
            numeric,
            categorical,
            informative,
            noise,
            seed,
            out,
        } => {
            let ds = synthesize(
                &SynthSpec {
                    rows,
                    numeric,
                    categorical,
                    informative,
                    noise,
                },
                seed,
            )?;
            std::fs::create_dir_all(&out)?;
            std::fs::write(out.join("schema.toml"), ds.schema().to_toml_string())?;
            write_csv(&ds, std::fs::File::create(out.join("data.csv"))?)?;
            println!("wrote {} rows to {}", ds.rows(), out.display());
        }
    }
    Ok(())
}
