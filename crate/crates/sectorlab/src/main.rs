use clap::{Parser, Subcommand};
use sectorlab::cli;
use std::path::PathBuf;
use std::process::ExitCode;

/// Mixed Dirichlet-Neumann elliptic problems on planar sectors: spectra,
/// Morse indices and angular-monotonicity diagnostics.
#[derive(Parser)]
#[command(name = "sectorlab", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Positive zeros j_{nu,k} of the Bessel function J_nu
    Bessel {
        #[arg(long)]
        nu: f64,
        #[arg(long, default_value_t = 1)]
        k: usize,
        /// Tabulate zeros k..=k_max
        #[arg(long)]
        k_max: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// The opening angle where j_{pi/beta,1} meets the target zero
    CriticalAngle {
        /// Defaults to the second zero of J_0
        #[arg(long)]
        target: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Analytic eigenvalue catalog j^2_{n pi/beta, k} of the sector problem
    Catalog {
        #[arg(long)]
        beta: f64,
        #[arg(long, default_value_t = 3)]
        n_max: usize,
        #[arg(long, default_value_t = 3)]
        k_max: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Low-lying spectrum and Morse data of the configured linearization
    Spectrum {
        #[arg(long)]
        config: Option<PathBuf>,
        /// key=value overrides applied after the config file
        #[arg(long = "set")]
        set: Vec<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Solve the configured problem (Newton or Nehari ground state)
    Solve {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long = "set")]
        set: Vec<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Shape verdict, rotating-plane sweep and heatmaps for a solution file
    Classify {
        #[arg(long)]
        solution: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long = "set")]
        set: Vec<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Map a half-disc solution onto a sector of opening beta
    Rescale {
        #[arg(long)]
        solution: PathBuf,
        #[arg(long)]
        beta: f64,
        #[arg(long)]
        p: f64,
        #[arg(long, default_value_t = 0.0)]
        alpha_exp: f64,
        #[arg(long)]
        n_r: Option<usize>,
        #[arg(long)]
        n_theta: Option<usize>,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Two-half eigenvalue inequality for interior Dirichlet lines
    SplittingCheck {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long = "set")]
        set: Vec<String>,
        /// Line angles (defaults to beta/2)
        #[arg(long)]
        alpha: Vec<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn run(cli: Cli) -> sectorlab::Result<()> {
    match cli.command {
        Command::Bessel { nu, k, k_max, out } => cli::cmd_bessel(nu, k, k_max, out.as_deref()),
        Command::CriticalAngle { target, out } => cli::cmd_critical_angle(target, out.as_deref()),
        Command::Catalog {
            beta,
            n_max,
            k_max,
            out,
        } => cli::cmd_catalog(beta, n_max, k_max, out.as_deref()),
        Command::Spectrum { config, set, out } => {
            let cfg = cli::resolve_config(config.as_deref(), &set, out.as_deref())?;
            cli::cmd_spectrum(&cfg)
        }
        Command::Solve { config, set, out } => {
            let cfg = cli::resolve_config(config.as_deref(), &set, out.as_deref())?;
            cli::cmd_solve(&cfg)
        }
        Command::Classify {
            solution,
            config,
            set,
            out,
        } => {
            let cfg = cli::resolve_config(config.as_deref(), &set, out.as_deref())?;
            cli::cmd_classify(&cfg, &solution)
        }
        Command::Rescale {
            solution,
            beta,
            p,
            alpha_exp,
            n_r,
            n_theta,
            out,
        } => cli::cmd_rescale(&solution, beta, p, alpha_exp, n_r, n_theta, &out),
        Command::SplittingCheck {
            config,
            set,
            alpha,
            out,
        } => {
            let cfg = cli::resolve_config(config.as_deref(), &set, out.as_deref())?;
            cli::cmd_splitting_check(&cfg, &alpha)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
