use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use switched_cli::report::{run_verify, VerifyConfig, VerifyTarget};
use switched_cli::{
    build_json, emit, parse_vector, read_to_string, render_plot, simulate_csv, BuildKind,
    FamilyInput, PlotKind,
};

/// Build, verify, plot, and simulate switched linear systems.
#[derive(Parser)]
#[command(name = "switched", version, arg_required_else_help = true)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write one of the canonical systems as JSON
    Build {
        #[arg(value_enum)]
        kind: BuildKind,
        /// Output path; stdout when absent
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run verification checks and write a JSON report
    Verify {
        #[arg(value_enum)]
        target: VerifyTarget,
        /// Report path; stdout when absent
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value_t = 7)]
        seed: u64,
        /// Hull-segment grid points (condition lhs, Hurwitz cross-check)
        #[arg(long, default_value_t = 1001)]
        grid: usize,
        /// Side of the log-spaced (t0, t1) grid for the condition rhs
        #[arg(long = "t-grid", default_value_t = 64)]
        t_grid: usize,
        /// Random draws for the gradient and 4D hull checks
        #[arg(long, default_value_t = 10_000)]
        samples: usize,
        /// Periodic laws in the decay sweep
        #[arg(long, default_value_t = 1000)]
        count: usize,
        /// Counterexample horizon; defaults to 200 periods
        #[arg(long)]
        horizon: Option<f64>,
        #[arg(long = "tol-certificate", default_value_t = 1e-8)]
        tol_certificate: f64,
        #[arg(long = "tol-separation", default_value_t = 1e-9)]
        tol_separation: f64,
        #[arg(long = "tol-decay", default_value_t = 1e-9)]
        tol_decay: f64,
        #[arg(long = "tol-tensor", default_value_t = 1e-8)]
        tol_tensor: f64,
        #[arg(long = "tol-band", default_value_t = 1e-6)]
        tol_band: f64,
        #[arg(long = "tol-orbit", default_value_t = 1e-6)]
        tol_orbit: f64,
    },
    /// Render an SVG figure
    Plot {
        #[arg(value_enum)]
        what: PlotKind,
        /// Output path; stdout when absent
        #[arg(long)]
        out: Option<PathBuf>,
        /// Flow-lattice side for figure1
        #[arg(long, default_value_t = 12)]
        grid: usize,
        /// Horizon override for norm-history
        #[arg(long)]
        horizon: Option<f64>,
    },
    /// Integrate a switching law over a family and write the trajectory CSV
    Simulate {
        /// Switching law JSON file
        #[arg(long)]
        law: PathBuf,
        /// Family JSON file (planar pair or lifted family)
        #[arg(long)]
        family: PathBuf,
        /// Initial state as comma-separated numbers; first basis vector when absent
        #[arg(long)]
        x0: Option<String>,
        #[arg(long)]
        horizon: Option<f64>,
        /// Sample step; horizon/512 when absent
        #[arg(long)]
        step: Option<f64>,
        /// CSV path; stdout when absent
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn run(cli: Cli) -> anyhow::Result<u8> {
    match cli.command {
        Command::Build { kind, out } => {
            emit(out.as_deref(), &build_json(kind)?)?;
            Ok(0)
        }
        Command::Verify {
            target,
            out,
            seed,
            grid,
            t_grid,
            samples,
            count,
            horizon,
            tol_certificate,
            tol_separation,
            tol_decay,
            tol_tensor,
            tol_band,
            tol_orbit,
        } => {
            let config = VerifyConfig {
                seed,
                grid,
                t_grid,
                samples,
                count,
                monotone_laws: VerifyConfig::default().monotone_laws,
                horizon,
                tol_certificate,
                tol_separation,
                tol_decay,
                tol_tensor,
                tol_band,
                tol_orbit,
            };
            let report = run_verify(target, &config)?;
            emit(out.as_deref(), &(serde_json::to_string_pretty(&report)? + "\n"))?;
            if report.pass {
                Ok(0)
            } else {
                for name in report.failing_checks() {
                    eprintln!("check failed: {name}");
                }
                Ok(1)
            }
        }
        Command::Plot { what, out, grid, horizon } => {
            emit(out.as_deref(), &render_plot(what, grid, horizon)?)?;
            Ok(0)
        }
        Command::Simulate { law, family, x0, horizon, step, out } => {
            let law: switched::simcore::SwitchingLaw =
                serde_json::from_str(&read_to_string(&law)?)
                    .map_err(|e| anyhow::anyhow!("parsing law file: {e}"))?;
            let family = FamilyInput::parse(&read_to_string(&family)?)?;
            let x0 = x0.as_deref().map(parse_vector).transpose()?;
            emit(out.as_deref(), &simulate_csv(&family, &law, x0, horizon, step)?)?;
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
