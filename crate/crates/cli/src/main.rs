//! `swanson`: simulate, classify, validate and sweep Swanson-type
//! non-Hermitian oscillators.

// `!(x > 0.0)` is deliberate: it rejects NaN along with non-positive values
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod classify;
mod config;
mod error;
mod output;
mod simulate;
mod sweep;
mod validate;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use config::{FileConfig, Method, Overrides, StepSpec, SweepVariable};
use error::CliResult;

#[derive(Debug, Parser)]
#[command(
    name = "swanson",
    version,
    about = "Metric flows and Gaussian packets for the Swanson oscillator"
)]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Global {
    /// Oscillator frequency omega0 (> 0).
    #[arg(long, global = true, allow_negative_numbers = true)]
    omega0: Option<f64>,
    /// Non-Hermiticity delta.
    #[arg(long, global = true, allow_negative_numbers = true)]
    delta: Option<f64>,
    /// JSON configuration file; flags override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output file (default: stdout).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Integration step, absolute or as T/N (default T/10000).
    #[arg(long, global = true, value_parser = StepSpec::parse)]
    step: Option<StepSpec>,
    /// Time span in periods T = 2 pi / omega.
    #[arg(long, global = true)]
    periods: Option<f64>,
    /// Exit 0 even if the trajectory blows up.
    #[arg(long, global = true)]
    allow_divergence: bool,
    /// Initial phase-space point "P,Q".
    #[arg(long, global = true, value_parser = pair, allow_hyphen_values = true)]
    z0: Option<[f64; 2]>,
    /// Initial metric "g_pp,g_pq,g_qq" (det 1).
    #[arg(long, global = true, value_parser = triple, allow_hyphen_values = true)]
    g0: Option<[f64; 3]>,
    /// Initial uncertainty parameter "Re,Im" (instead of --g0).
    #[arg(long, global = true, value_parser = pair, allow_hyphen_values = true)]
    b0: Option<[f64; 2]>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Integrate (Z, G, n) and write a CSV time series.
    Simulate {
        /// Keep every k-th sample.
        #[arg(long)]
        every: Option<usize>,
        /// RK4 on the equations directly or on their linear lift.
        #[arg(long, value_enum)]
        method: Option<Method>,
    },
    /// Label a grid of initial B values as bounded, divergent or boundary (JSON).
    Classify {
        #[arg(long, value_parser = pair, allow_hyphen_values = true)]
        re_range: Option<[f64; 2]>,
        #[arg(long, value_parser = pair, allow_hyphen_values = true)]
        im_range: Option<[f64; 2]>,
        #[arg(long)]
        resolution: Option<usize>,
        /// Half-width of the boundary band.
        #[arg(long)]
        band: Option<f64>,
    },
    /// Compare solution routes and write a JSON report; exit 4 on failure.
    Validate {
        /// Threshold for closed form vs ODE errors.
        #[arg(long)]
        tolerance: Option<f64>,
    },
    /// Sweep delta or Im B0 and record the outcome per value (CSV).
    Sweep {
        #[arg(long, value_enum)]
        variable: Option<SweepVariable>,
        /// First value (inclusive)
        #[arg(long, allow_negative_numbers = true)]
        from: Option<f64>,
        /// Last value (inclusive when on the grid)
        #[arg(long, allow_negative_numbers = true)]
        to: Option<f64>,
        /// Increment (> 0)
        #[arg(long)]
        by: Option<f64>,
    },
}

fn numbers<const N: usize>(s: &str) -> Result<[f64; N], String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    if parts.len() != N {
        return Err(format!("expected {N} comma-separated numbers, got '{s}'"));
    }
    let mut out = [0.0; N];
    for (o, p) in out.iter_mut().zip(parts) {
        *o = p.parse().map_err(|_| format!("'{p}' is not a number"))?;
    }
    Ok(out)
}

fn pair(s: &str) -> Result<[f64; 2], String> {
    numbers::<2>(s)
}

fn triple(s: &str) -> Result<[f64; 3], String> {
    numbers::<3>(s)
}

fn run(cli: Cli) -> CliResult<()> {
    let g = cli.global;
    let file = match &g.config {
        Some(path) => FileConfig::load(path)?,
        None => FileConfig::default(),
    };
    let mut o = Overrides {
        omega0: g.omega0,
        delta: g.delta,
        z0: g.z0,
        g0: g.g0,
        b0: g.b0,
        step: g.step,
        periods: g.periods,
        out: g.out,
        allow_divergence: g.allow_divergence,
        ..Default::default()
    };
    match &cli.command {
        Command::Simulate { every, method } => {
            o.every = *every;
            o.method = *method;
        }
        Command::Classify {
            re_range,
            im_range,
            resolution,
            band,
        } => {
            o.re_range = *re_range;
            o.im_range = *im_range;
            o.resolution = *resolution;
            o.band = *band;
        }
        Command::Validate { tolerance } => o.tolerance = *tolerance,
        Command::Sweep {
            variable,
            from,
            to,
            by,
        } => {
            o.sweep_variable = *variable;
            o.sweep_from = *from;
            o.sweep_to = *to;
            o.sweep_by = *by;
        }
    }
    let cfg = config::resolve(file, o)?;
    match cli.command {
        Command::Simulate { .. } => simulate::run(&cfg),
        Command::Classify { .. } => classify::run(&cfg),
        Command::Validate { .. } => validate::run(&cfg),
        Command::Sweep { .. } => sweep::run(&cfg),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(2)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("swanson: {e}");
            e.exit_code()
        }
    }
}
