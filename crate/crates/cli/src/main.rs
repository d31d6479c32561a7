use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

mod commands;

/// Siphon rain gauge simulator.
#[derive(Debug, Parser)]
#[command(name = "pluvio", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct GaugeArgs {
    /// Geometry preset: v1 or siphon.
    #[arg(long)]
    preset: Option<String>,

    /// Key-value config file with preset overrides.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Simulate the vessel level for a rain trace.
    Simulate {
        #[command(flatten)]
        gauge: GaugeArgs,
        /// Rain trace CSV; defaults to the bundled field-test trace.
        #[arg(long)]
        trace: Option<PathBuf>,
        /// Output directory for level.csv and drains.csv.
        #[arg(long)]
        out: PathBuf,
    },
    /// Run the minute-sampling pipeline and write telemetry and hourly CSVs.
    Run {
        #[command(flatten)]
        gauge: GaugeArgs,
        /// Rain trace CSV; defaults to the bundled field-test trace.
        #[arg(long)]
        trace: Option<PathBuf>,
        /// Output directory for telemetry.csv and hourly.csv.
        #[arg(long)]
        out: PathBuf,
    },
    /// Two-tailed t-test between two hourly CSVs (default: bundled field data).
    Compare {
        /// Hourly CSV of the reference device.
        file_a: Option<PathBuf>,
        /// Hourly CSV of the tested device.
        file_b: Option<PathBuf>,
        /// Significance level: 0.10, 0.05 or 0.01.
        #[arg(long, default_value_t = 0.05)]
        alpha: f64,
        /// Use Welch–Satterthwaite degrees of freedom instead of n1 + n2 - 2.
        #[arg(long)]
        welch: bool,
    },
    /// Rain resolution of a gauge for one sensor depth step.
    Resolution {
        #[command(flatten)]
        gauge: GaugeArgs,
        /// Depth step in cm; defaults to the calibration's step.
        depth_step: Option<f64>,
    },
    /// Least-squares calibration line from resistance/depth samples.
    Fit {
        /// CSV with header resistance_ohm,depth_cm.
        samples: PathBuf,
    },
    /// Reshape a run directory into whitespace-separated plot columns.
    Plotdata {
        /// Directory written by `pluvio run`.
        run_dir: PathBuf,
        /// Where to write the .dat files; defaults to the run directory.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };

    let result = match cli.command {
        Command::Simulate { gauge, trace, out } => {
            commands::simulate(gauge.preset.as_deref(), gauge.config.as_deref(), trace.as_deref(), &out)
        }
        Command::Run { gauge, trace, out } => {
            commands::run(gauge.preset.as_deref(), gauge.config.as_deref(), trace.as_deref(), &out)
        }
        Command::Compare {
            file_a,
            file_b,
            alpha,
            welch,
        } => match (file_a, file_b) {
            (Some(a), Some(b)) => commands::compare(Some((&a, &b)), alpha, welch),
            (None, None) => commands::compare(None, alpha, welch),
            _ => {
                eprintln!("error: compare takes either two hourly CSVs or none");
                return ExitCode::from(1);
            }
        },
        Command::Resolution { gauge, depth_step } => {
            commands::resolution(gauge.preset.as_deref(), gauge.config.as_deref(), depth_step)
        }
        Command::Fit { samples } => commands::fit(&samples),
        Command::Plotdata { run_dir, out } => commands::plotdata(&run_dir, out.as_deref()),
    };

    match result {
        Ok(text) => {
            print!("{text}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
