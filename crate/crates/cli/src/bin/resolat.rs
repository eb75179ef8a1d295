use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use resolat_cli::commands::{
    cmd_compare, cmd_fit, cmd_match, cmd_metrics, cmd_optimize, cmd_simulate, parse_stopband,
    CliError,
};

#[derive(Parser)]
#[command(
    name = "resolat",
    version,
    about = "Design, simulate, match, and fit acoustic-resonator lattice filters"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate a design file and write its S-parameter sweep
    Simulate {
        design: PathBuf,
        /// Output .s2p path (raw sweep at the design's port references)
        #[arg(long)]
        out: PathBuf,
        /// Also write band metrics, computed under the design's match entry
        #[arg(long)]
        metrics: Option<PathBuf>,
    },
    /// Solve the simultaneous conjugate match and renormalize a sweep
    Match {
        resp: PathBuf,
        /// Match at this frequency instead of the transmission peak
        #[arg(long = "at-hz")]
        at_hz: Option<f64>,
        /// Output .s2p path for the renormalized sweep
        #[arg(long)]
        out: PathBuf,
        /// JSON report with the match solution
        #[arg(long)]
        report: PathBuf,
        /// Write this JSON sidecar and emit 50-ohm data instead of failing
        /// on the complex matched references
        #[arg(long)]
        sidecar: Option<PathBuf>,
    },
    /// Compute band metrics of a two-port sweep
    Metrics {
        resp: PathBuf,
        /// Stopband declaration lo:hi in Hz; repeatable
        #[arg(long = "stopband")]
        stopband: Vec<String>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Fit an mBVD model to measured one-port data
    Fit {
        meas: PathBuf,
        /// Number of motional branches to fit
        #[arg(long)]
        branches: usize,
        /// Start from the resonator in this fit-output JSON instead of the
        /// automatic seed
        #[arg(long = "seed-from")]
        seed_from: Option<PathBuf>,
        /// Fitted parameters as JSON
        #[arg(long)]
        out: PathBuf,
        /// Per-branch CSV report
        #[arg(long)]
        report: PathBuf,
    },
    /// Tune free parameters of a design toward a performance target
    Optimize {
        design: PathBuf,
        spec: PathBuf,
        /// Objective evaluation budget
        #[arg(long)]
        budget: usize,
        /// Random seed for the restart strategy
        #[arg(long)]
        seed: u64,
        /// Optimized design as JSON
        #[arg(long)]
        out: PathBuf,
        /// Per-evaluation cost history CSV
        #[arg(long)]
        history: PathBuf,
    },
    /// Evaluate two designs and tabulate their band metrics side by side
    Compare {
        design_a: PathBuf,
        design_b: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

fn run(command: Command) -> Result<(), CliError> {
    match command {
        Command::Simulate { design, out, metrics } => {
            cmd_simulate(&design, &out, metrics.as_deref())
        }
        Command::Match { resp, at_hz, out, report, sidecar } => {
            cmd_match(&resp, at_hz, &out, &report, sidecar.as_deref())
        }
        Command::Metrics { resp, stopband, out } => {
            let bands = stopband
                .iter()
                .map(|s| parse_stopband(s))
                .collect::<Result<Vec<_>, _>>()?;
            cmd_metrics(&resp, &bands, &out)
        }
        Command::Fit { meas, branches, seed_from, out, report } => {
            cmd_fit(&meas, branches, seed_from.as_deref(), &out, &report)
        }
        Command::Optimize { design, spec, budget, seed, out, history } => {
            cmd_optimize(&design, &spec, budget, seed, &out, &history)
        }
        Command::Compare { design_a, design_b, out } => cmd_compare(&design_a, &design_b, &out),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
