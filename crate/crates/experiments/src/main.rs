use clap::{Args, Parser, Subcommand};
use ris_uamp_experiments::presets::{self, FIGURES};
use ris_uamp_experiments::{
    emit_csv, run_monte_carlo, write_csv, CsvLayout, EstimatorKind, ExperimentConfig, Result,
};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "ris-uamp",
    version,
    about = "Channel estimation experiments for RIS-aided MIMO"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct RunOpts {
    /// CSV destination; defaults to the config's `output`, else stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads.
    #[arg(long, env = "RIS_UAMP_THREADS")]
    threads: Option<usize>,
    /// Overrides the base seed.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment described by a TOML file.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        #[command(flatten)]
        opts: RunOpts,
    },
    /// Evaluate only the Cramér-Rao bounds of a grid.
    Crlb {
        #[arg(long)]
        config: PathBuf,
        #[command(flatten)]
        opts: RunOpts,
    },
    /// Run the built-in configuration of a figure.
    Reproduce {
        #[arg(value_parser = clap::builder::PossibleValuesParser::new(FIGURES))]
        figure: String,
        /// Divide the trial count by this factor.
        #[arg(long, default_value_t = 1)]
        scale: usize,
        #[command(flatten)]
        opts: RunOpts,
    },
}

fn execute(mut cfg: ExperimentConfig, opts: RunOpts) -> Result<()> {
    if let Some(seed) = opts.seed {
        cfg.seed = seed;
    }
    if opts.threads == Some(0) {
        return Err(ris_uamp_experiments::ExperimentError::Config(
            "--threads must be at least 1".into(),
        ));
    }
    let records = run_monte_carlo(&cfg, opts.threads)?;
    let layout = CsvLayout::for_config(&cfg);
    match opts.out.or(cfg.output.clone()) {
        Some(path) => {
            emit_csv(&records, &layout, &path)?;
            eprintln!("wrote {} records to {}", records.len(), path.display());
        }
        None => write_csv(&records, &layout, std::io::stdout().lock())?,
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Simulate { config, opts } => {
            ExperimentConfig::from_file(&config).and_then(|cfg| execute(cfg, opts))
        }
        Command::Crlb { config, opts } => {
            ExperimentConfig::from_file(&config).and_then(|mut cfg| {
                cfg.estimators = vec![EstimatorKind::Crlb];
                execute(cfg, opts)
            })
        }
        Command::Reproduce {
            figure,
            scale,
            opts,
        } => presets::figure(&figure, scale).and_then(|cfg| execute(cfg, opts)),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
