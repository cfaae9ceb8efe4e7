use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use sff::commands;
use sff::config::{self, Overrides, RunConfig, ThFlag};
use sff::figures::{self, FigureOptions, Scale};
use sff::verify::{self, Suite};
use sff::{HarnessError, Result};
use sff_core::ensembles::EnsembleKind;
use sff_core::estimator::Subtraction;

#[derive(Parser)]
#[command(
    name = "sff",
    version,
    about = "Spectral form factor statistics of random unitary and Hermitian matrices"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sample the ensemble and write moments, predictions and a snapshot.
    Simulate(RunArgs),
    /// Write the analytic predictions for the configured grid.
    Predict(RunArgs),
    /// Run a deterministic verification suite (saddles, kernel, scba, identities or all).
    Verify { suite: String },
    /// Reproduce one of the figures 1, 2, 3, 4 or 8.
    ReproduceFigure {
        id: u32,
        #[arg(long, default_value = "desk", value_parser = |s: &str| s.parse::<Scale>())]
        scale: Scale,
        /// Upper bound on the sample count of every run.
        #[arg(long)]
        nsim_cap: Option<u64>,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = 0)]
        threads: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Merge snapshots of disjoint batch ranges of one run.
    Merge {
        #[arg(required = true)]
        snapshots: Vec<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct RunArgs {
    /// TOML configuration file; flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, value_parser = config::parse_kind)]
    ensemble: Option<EnsembleKind>,
    #[arg(long)]
    dim: Option<usize>,
    #[arg(long)]
    nsim: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    tau_max: Option<f64>,
    #[arg(long)]
    ntimes: Option<usize>,
    /// Explicit comma-separated times, replacing --tau-max and --ntimes.
    #[arg(long)]
    times: Option<String>,
    #[arg(long)]
    nmax: Option<usize>,
    #[arg(long)]
    batches: Option<usize>,
    /// Worker threads; 0 uses every core.
    #[arg(long)]
    threads: Option<usize>,
    #[arg(long, value_parser = config::parse_subtraction)]
    subtract: Option<Subtraction>,
    #[arg(long, value_parser = config::parse_th)]
    th_convention: Option<ThFlag>,
    /// Run only batches A..B (half-open), for later merging.
    #[arg(long, value_parser = config::parse_batch_range)]
    batch_range: Option<[usize; 2]>,
    /// Drop the mean-trace terms from the second-moment prediction.
    #[arg(long)]
    no_ubar: bool,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write an SVG plot of the results.
    #[arg(long)]
    plot: bool,
}

impl RunArgs {
    fn resolve(self) -> Result<RunConfig> {
        let mut cfg = match &self.config {
            Some(p) => RunConfig::load(p)?,
            None => RunConfig::default(),
        };
        cfg.apply(Overrides {
            kind: self.ensemble,
            dim: self.dim,
            seed: self.seed,
            th_convention: self.th_convention,
            tau_max: self.tau_max,
            n_times: self.ntimes,
            times: self
                .times
                .as_deref()
                .map(config::parse_times)
                .transpose()
                .map_err(HarnessError::Config)?,
            n_sim: self.nsim,
            n_max: self.nmax,
            batches: self.batches,
            threads: self.threads,
            subtract: self.subtract,
            batch_range: self.batch_range,
            include_ubar: self.no_ubar.then_some(false),
            out: self.out,
            plot: self.plot.then_some(true),
        });
        cfg.validate()?;
        Ok(cfg)
    }
}

fn print_run(out: &commands::RunOutput) {
    let acc = &out.snapshot.accumulator;
    println!(
        "samples {} of {} in {} filled batches",
        acc.samples(),
        acc.n_sim(),
        out.snapshot.filled_batches().len()
    );
    if out.table.is_none() {
        println!("fewer than two batches filled: results table skipped until merge");
    }
    for f in &out.files {
        println!("wrote {}", f.display());
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Simulate(args) => {
            let cfg = args.resolve()?;
            print_run(&commands::simulate(&cfg)?);
        }
        Command::Predict(args) => {
            let cfg = args.resolve()?;
            println!("wrote {}", commands::predict(&cfg)?.display());
        }
        Command::Verify { suite } => {
            let suites: Vec<Suite> = if suite == "all" {
                Suite::ALL.to_vec()
            } else {
                vec![suite.parse().map_err(HarnessError::Config)?]
            };
            let mut failed = Vec::new();
            for s in suites {
                println!("suite {}", s.name());
                let report = verify::run(s)?;
                for c in &report.checks {
                    println!("  {c}");
                }
                failed.extend(report.failures().into_iter().map(|c| c.name.clone()));
            }
            if !failed.is_empty() {
                return Err(HarnessError::Verification(failed.join("; ")));
            }
            println!("all checks passed");
        }
        Command::ReproduceFigure {
            id,
            scale,
            nsim_cap,
            seed,
            threads,
            out,
        } => {
            let opts = FigureOptions {
                scale,
                nsim_cap,
                seed,
                threads,
                out: out.unwrap_or_else(|| PathBuf::from(format!("fig{id}"))),
            };
            let fig = figures::reproduce(id, &opts)?;
            for n in &fig.notes {
                println!("{n}");
            }
            for r in &fig.runs {
                println!("wrote {}", r.csv.display());
            }
            println!("wrote {}", fig.svg.display());
        }
        Command::Merge { snapshots, out } => {
            print_run(&commands::merge(&snapshots, out)?);
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
