use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

mod commands;

/// Pin-slider hexapod and bipod vibration analysis.
#[derive(Debug, Parser)]
#[command(name = "pinslider", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Closed-form bipod transfer functions and plateau report.
    #[command(name = "bipod2d-tf")]
    Bipod2dTf {
        #[command(flatten)]
        model: ModelSource,
        /// Load direction from the first strut axis, e.g. `0.3`, `45 deg`, `pi/4 rad`.
        #[arg(long, default_value = "0", allow_hyphen_values = true)]
        alpha: String,
        #[command(flatten)]
        grid: GridArgs,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Counting checks for frames and mechanisms.
    Check {
        /// Planar frame counts, e.g. `j=3 s=2 r=4`.
        #[arg(long, num_args = 1.., value_name = "KEY=N", required_unless_present = "mobility")]
        maxwell: Option<Vec<String>>,
        /// Spatial mechanism counts, e.g. `n=13 b=6 f=6*3,6*1,6*2`.
        #[arg(long, num_args = 1.., value_name = "KEY=VALUE", conflicts_with = "maxwell")]
        mobility: Option<Vec<String>>,
    },
    /// Natural frequencies of the linearised model.
    Modes {
        #[command(flatten)]
        model: ModelSource,
    },
    /// One transfer-function value from a time simulation.
    TfPoint {
        #[command(flatten)]
        model: ModelSource,
        /// Load channel: Fx Fy Fz Tx Ty Tz.
        #[arg(long)]
        input: String,
        /// Reaction channel: Fx Fy Fz Mx My Mz.
        #[arg(long)]
        output: String,
        /// Excitation frequency, Hz.
        #[arg(long)]
        freq: f64,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Full 6x6 transfer-function matrix over a frequency grid.
    TfMatrix {
        #[command(flatten)]
        model: ModelSource,
        #[command(flatten)]
        grid: GridArgs,
        #[command(flatten)]
        run: RunArgs,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Raw trajectory under a ramped sinusoidal load.
    Simulate {
        #[command(flatten)]
        model: ModelSource,
        #[arg(long)]
        input: String,
        #[arg(long)]
        freq: f64,
        /// Load amplitude, N or N*m.
        #[arg(long, default_value_t = 1.0)]
        amplitude: f64,
        /// Ramp duration, s; defaults from the frequency and modal damping.
        #[arg(long)]
        ramp: Option<f64>,
        /// Total simulated time, s.
        #[arg(long)]
        duration: f64,
        #[arg(long, default_value_t = 40)]
        samples_per_period: usize,
        #[arg(long)]
        rel_tol: Option<f64>,
        #[command(flatten)]
        out: OutArgs,
    },
}

#[derive(Debug, Args)]
#[group(required = true, multiple = false)]
struct ModelSource {
    /// Built-in model name.
    #[arg(long)]
    preset: Option<String>,
    /// TOML model file.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct GridArgs {
    /// Lowest frequency, Hz.
    #[arg(long)]
    fmin: Option<f64>,
    /// Highest frequency, Hz.
    #[arg(long)]
    fmax: Option<f64>,
    /// Logarithmic grid density.
    #[arg(long)]
    per_decade: Option<usize>,
}

#[derive(Debug, Args)]
struct RunArgs {
    /// Excitation amplitude, N or N*m.
    #[arg(long)]
    amplitude: Option<f64>,
    /// Ramp duration, s.
    #[arg(long)]
    ramp: Option<f64>,
    /// Periods simulated after the ramp.
    #[arg(long)]
    settle_periods: Option<f64>,
    /// Integrator relative tolerance.
    #[arg(long)]
    rel_tol: Option<f64>,
    /// Never lengthen a run whose amplitude is still drifting.
    #[arg(long)]
    fixed_settle: bool,
}

#[derive(Debug, Args)]
struct OutArgs {
    /// Output directory; defaults to $PINSLIDER_OUT_DIR, then the working directory.
    #[arg(long)]
    out_dir: Option<PathBuf>,
}

impl OutArgs {
    fn dir(&self) -> PathBuf {
        self.out_dir
            .clone()
            .or_else(|| std::env::var_os("PINSLIDER_OUT_DIR").map(PathBuf::from))
            .unwrap_or_else(|| PathBuf::from("."))
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match commands::run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_numerical() { 2 } else { 1 })
        }
    }
}
