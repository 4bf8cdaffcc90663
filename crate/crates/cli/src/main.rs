use std::path::{Path, PathBuf};
use std::process::ExitCode;

use chiral_cli::{
    run_dichroism, run_fig2, run_qfi, run_simulate, run_sucrose, run_validate, CliError, CliResult, Format,
    ResultTable, ScenarioConfig,
};
use chiral_metrology::validate::Scale;
use clap::{Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(
    name = "chiral",
    about = "Chiral concentration estimation with bright squeezed light"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Worker threads for sweeps and Monte Carlo (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
}

#[derive(clap::Args)]
struct Output {
    /// Table destination; standard output if omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
}

#[derive(Clone, Copy, ValueEnum)]
enum ScaleArg {
    Smoke,
    Small,
}

#[derive(Subcommand)]
enum Command {
    /// QFI decomposition and bounds over a birefringence sweep.
    Qfi {
        #[arg(long)]
        config: PathBuf,
        #[command(flatten)]
        output: Output,
    },
    /// Precision enhancement against squeezing for several efficiencies.
    Fig2 {
        #[command(flatten)]
        output: Output,
    },
    /// Sucrose polarimetry scenario with a unit audit.
    Sucrose {
        #[arg(long)]
        config: Option<PathBuf>,
        #[command(flatten)]
        output: Output,
    },
    /// Intensity-ratio precision for circular dichroism.
    Dichroism {
        #[arg(long)]
        config: PathBuf,
        #[command(flatten)]
        output: Output,
    },
    /// Monte Carlo estimator statistics against the Cramér-Rao bounds.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[command(flatten)]
        output: Output,
    },
    /// Oracle cross-validation, formula arbitration and Monte Carlo suite.
    Validate {
        #[arg(long, value_enum, default_value = "small")]
        scale: ScaleArg,
        #[arg(long, default_value_t = 2024)]
        seed: u64,
        #[arg(long, default_value = "validation_report.json")]
        out: PathBuf,
    },
}

fn emit(table: &ResultTable, output: &Output) -> CliResult<()> {
    match &output.out {
        Some(path) => {
            table.write(path, output.format)?;
            eprintln!("wrote {} rows to {}", table.rows.len(), path.display());
        }
        None => print!("{}", table.render(output.format)?),
    }
    Ok(())
}

fn load(path: &Path) -> CliResult<ScenarioConfig> {
    ScenarioConfig::from_path(path)
}

fn run(cli: Cli) -> CliResult<ExitCode> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Config {
                field: "--threads".into(),
                reason: e.to_string(),
            })?;
    }
    match cli.command {
        Command::Qfi { config, output } => emit(&run_qfi(&load(&config)?)?, &output)?,
        Command::Fig2 { output } => emit(&run_fig2()?, &output)?,
        Command::Sucrose { config, output } => {
            let config = config.as_deref().map(load).transpose()?;
            let report = run_sucrose(config.as_ref())?;
            print!("{}", report.summary());
            if output.out.is_some() {
                emit(&report.to_table(), &output)?;
            }
        }
        Command::Dichroism { config, output } => emit(&run_dichroism(&load(&config)?)?, &output)?,
        Command::Simulate { config, seed, output } => emit(&run_simulate(&load(&config)?, seed)?, &output)?,
        Command::Validate { scale, seed, out } => {
            let scale = match scale {
                ScaleArg::Smoke => Scale::Smoke,
                ScaleArg::Small => Scale::Small,
            };
            let report = run_validate(scale, seed, &out)?;
            for t in &report.tensions {
                println!("{}: {} ({} points)", t.id, t.verdict, t.points.len());
            }
            println!(
                "oracle agrees: {}, chain ordered: {}, bounds respected: {}, Monte Carlo within tolerance: {}",
                report.oracle_agrees,
                report.chain_ordered,
                report.bounds_respected,
                report.monte_carlo_within_tolerance
            );
            println!("report written to {}", out.display());
            if !report.passed() {
                return Ok(ExitCode::FAILURE);
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    env_logger::init();
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
