//! Command-line front end for annealga experiments: TOML configs in,
//! JSON summaries and tab-separated tables out.

pub mod commands;
pub mod config;
pub mod error;
pub mod output;
pub mod plotdata;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

pub use commands::{cmd_baseline, cmd_run, cmd_timescale, Overrides};
pub use config::ExperimentConfig;
pub use error::{CliError, CliResult};
pub use plotdata::{cmd_plotdata, PlotKind, PlotOptions};

#[derive(Debug, Parser)]
#[command(name = "annealga", version, about = "Genetic optimization of annealing schedules")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct ConfigArgs {
    /// Experiment config (TOML).
    #[arg(short, long)]
    pub config: PathBuf,
    /// Base seed; overrides `seed` in the config.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Worker threads; defaults to all cores.
    #[arg(long)]
    pub workers: Option<usize>,
    /// Overrides `output_dir` in the config.
    #[arg(long)]
    pub output_dir: Option<PathBuf>,
}

impl ConfigArgs {
    fn load(&self) -> CliResult<(ExperimentConfig, Overrides)> {
        let config = ExperimentConfig::load(&self.config)?;
        let overrides = Overrides {
            seed: self.seed,
            workers: self.workers,
            output_dir: self.output_dir.clone(),
        };
        Ok((config, overrides))
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the configured number of GA repetitions.
    Run(ConfigArgs),
    /// Simulate the linear anneal without driving.
    Baseline(ConfigArgs),
    /// Print the adiabatic timescale and the suggested annealing time.
    Timescale(ConfigArgs),
    /// Emit a plot-ready table from one or more result directories.
    Plotdata {
        #[arg(required = true)]
        results: Vec<PathBuf>,
        #[arg(long, value_enum)]
        kind: PlotKind,
        #[arg(long, default_value_t = 20)]
        bins: usize,
        /// Histogram range as `lo,hi`; defaults to the data range.
        #[arg(long, value_parser = parse_range)]
        range: Option<(f64, f64)>,
        /// Write here instead of stdout.
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
}

fn parse_range(s: &str) -> Result<(f64, f64), String> {
    let (lo, hi) = s.split_once(',').ok_or("expected lo,hi")?;
    let lo: f64 = lo.trim().parse().map_err(|_| format!("bad bound {lo:?}"))?;
    let hi: f64 = hi.trim().parse().map_err(|_| format!("bad bound {hi:?}"))?;
    if lo < hi {
        Ok((lo, hi))
    } else {
        Err("lo must be below hi".into())
    }
}

/// Executes one command, writing human-readable output to stdout.
pub fn execute(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Run(args) => {
            let (config, overrides) = args.load()?;
            let report = cmd_run(&config, &overrides)?;
            println!("output\t{}", report.output_dir.display());
            println!("successes\t{}", report.successes);
            println!("failures\t{}", report.failures);
            if let Some(m) = report.median_fitness {
                println!("median_fitness\t{m}");
            }
            if let Some(m) = report.median_fidelity {
                println!("median_fidelity\t{m}");
            }
            if report.failures > 0 {
                return Err(CliError::Numeric(format!(
                    "{} of {} runs failed; see runs.jsonl",
                    report.failures,
                    report.failures + report.successes
                )));
            }
        }
        Command::Baseline(args) => {
            let (config, overrides) = args.load()?;
            let doc = cmd_baseline(&config, &overrides)?;
            println!("annealing_time\t{}", doc.annealing_time);
            println!("fidelity\t{}", doc.fidelity);
            println!("min_gap\t{}", doc.min_gap);
            if let Some(r) = doc.approximation_ratio {
                println!("approximation_ratio\t{r}");
            }
        }
        Command::Timescale(args) => {
            let (config, _) = args.load()?;
            print!("{}", cmd_timescale(&config)?.to_table());
        }
        Command::Plotdata {
            results,
            kind,
            bins,
            range,
            output,
        } => {
            let table = cmd_plotdata(&results, kind, &PlotOptions { bins, range })?;
            match output {
                Some(path) => std::fs::write(&path, table).map_err(|e| CliError::io(&path, e))?,
                None => print!("{table}"),
            }
        }
    }
    Ok(())
}
