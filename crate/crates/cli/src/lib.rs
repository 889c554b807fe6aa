//! Configuration, persistence and the `leo-hjb` command-line driver.
//!
//! Exit codes: 0 success, 1 configuration error, 2 numerical
//! non-convergence, 3 IO or archive error.

pub mod archive;
pub mod config;
pub mod export;

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use leo_hjb::{metrics, simulate as run_closed_loop, Feedback, Trajectory, TransferMetrics};

pub use archive::{ArchiveError, Report, SolutionArchive};
pub use config::{Engine, ProblemConfig};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config: {0}")]
    Config(String),
    #[error("solver did not converge: {0}")]
    NotConverged(leo_hjb::Error),
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("{0}")]
    Archive(#[from] ArchiveError),
    #[error("{path}: {inner}")]
    InArchive { path: String, inner: Box<CliError> },
    #[error("{0}: {1}")]
    Csv(String, csv::Error),
    #[error("simulation: {0}")]
    Simulation(leo_hjb::Error),
}

impl CliError {
    pub(crate) fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io { path: path.display().to_string(), source }
    }

    fn with_path(self, path: &Path) -> Self {
        match self {
            e @ CliError::Io { .. } => e,
            e => CliError::InArchive { path: path.display().to_string(), inner: Box::new(e) },
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Simulation(_) => 1,
            CliError::NotConverged(_) => 2,
            CliError::Io { .. } | CliError::Archive(_) | CliError::Csv(..) => 3,
            CliError::InArchive { inner, .. } => match inner.as_ref() {
                CliError::Config(_) => 3,
                other => other.exit_code(),
            },
        }
    }
}

fn solver_error(e: leo_hjb::Error) -> CliError {
    match e {
        leo_hjb::Error::MaxItersExceeded { .. } | leo_hjb::Error::LinearSolveStagnation { .. } => {
            CliError::NotConverged(e)
        }
        other => CliError::Config(other.to_string()),
    }
}

/// Solves the configured problem with its selected engine, optionally warm
/// started from a previous archive on the same grid.
pub fn solve(config: &ProblemConfig, warm: Option<&SolutionArchive>) -> Result<SolutionArchive, CliError> {
    let scheme = config.scheme()?;
    if let Some(w) = warm {
        if w.config.grid != config.grid {
            return Err(CliError::Config("warm start archive was solved on a different grid".into()));
        }
    }
    let start = Instant::now();
    let sol = match config.engine {
        Engine::PolicyIteration => scheme.policy_iteration(
            warm.map(|w| w.policy.as_slice()),
            warm.map(|w| w.values.as_slice()),
        ),
        Engine::ValueIteration => scheme.value_iteration(warm.map(|w| w.values.as_slice())),
    }
    .map_err(solver_error)?;
    Ok(SolutionArchive {
        config: config.clone(),
        report: Report {
            iterations: sol.iterations,
            residual: sol.residual,
            linear_iterations: sol.linear_iterations,
            wall_time_s: start.elapsed().as_secs_f64(),
        },
        values: sol.values,
        policy: sol.policy,
    })
}

/// Flies the archived feedback from the configured start orbit.
pub fn simulate(archive: &SolutionArchive, with_drag: bool) -> Result<(Trajectory, TransferMetrics), CliError> {
    let config = &archive.config;
    let scheme = config.scheme()?;
    let fb = Feedback::new(&scheme, &archive.values, config.plant.tau).map_err(CliError::Simulation)?;
    let traj = run_closed_loop(&fb, &config.start_state(), &config.plant(with_drag)).map_err(CliError::Simulation)?;
    let m = metrics(&traj, &config.problem.target, config.band, config.problem.mu);
    Ok((traj, m))
}

#[derive(Parser)]
#[command(name = "leo-hjb", version, about = "Feedback orbit raising by dynamic programming")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute the value function and policy and write an archive.
    Solve {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Start from the values (and policy) of an earlier archive.
        #[arg(long)]
        warm_start: Option<PathBuf>,
    },
    /// Run the closed loop from an archive and export the trajectory.
    Simulate {
        #[arg(long)]
        archive: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Add atmospheric drag to the simulated plant.
        #[arg(long)]
        drag: bool,
    },
    /// Summarize an archive or a configuration.
    Inspect(InspectArgs),
}

#[derive(Args)]
#[group(required = true, multiple = false)]
struct InspectArgs {
    #[arg(long)]
    archive: Option<PathBuf>,
    #[arg(long)]
    config: Option<PathBuf>,
}

fn fmt_opt(x: Option<f64>, unit: &str) -> String {
    x.map_or_else(|| "never".to_string(), |v| format!("{v} {unit}"))
}

fn execute(command: Command, out: &mut dyn Write) -> Result<(), CliError> {
    let stdout = |e: std::io::Error| CliError::Io { path: "<stdout>".into(), source: e };
    match command {
        Command::Solve { config, out: path, warm_start } => {
            let cfg = ProblemConfig::load(&config)?;
            let warm = warm_start.as_deref().map(SolutionArchive::load).transpose()?;
            writeln!(out, "solving {} nodes with {:?}", cfg.grid.len(), cfg.engine).map_err(stdout)?;
            let archive = solve(&cfg, warm.as_ref())?;
            archive.save(&path)?;
            let r = &archive.report;
            writeln!(
                out,
                "iterations {} residual {:e} linear iterations {} wall time {:.3} s",
                r.iterations, r.residual, r.linear_iterations, r.wall_time_s
            )
            .map_err(stdout)?;
            writeln!(out, "wrote {}", path.display()).map_err(stdout)?;
        }
        Command::Simulate { archive, out: path, drag } => {
            let archive = SolutionArchive::load(&archive)?;
            let (traj, m) = simulate(&archive, drag)?;
            export::export(&traj, &path)?;
            writeln!(out, "samples {} final time {} s exited {}", traj.len(), traj.final_time, traj.exited)
                .map_err(stdout)?;
            writeln!(out, "band entry {}", fmt_opt(m.band_entry, "s")).map_err(stdout)?;
            writeln!(out, "switch-off {}", fmt_opt(m.switch_off, "s")).map_err(stdout)?;
            writeln!(out, "first switch-off {}", fmt_opt(m.first_switch_off, "s")).map_err(stdout)?;
            writeln!(out, "reactivations {}", m.reactivations).map_err(stdout)?;
            writeln!(out, "final radius error {}", fmt_opt(m.final_radius_error, "km")).map_err(stdout)?;
            writeln!(out, "fuel {} km/s", m.fuel).map_err(stdout)?;
            writeln!(out, "wrote {}", path.display()).map_err(stdout)?;
        }
        Command::Inspect(InspectArgs { archive: Some(path), .. }) => {
            let a = SolutionArchive::load(&path)?;
            write!(out, "{}", a.config.canonical_text()).map_err(stdout)?;
            let (lo, hi) = a.values.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
            let n = a.values.len();
            let coasting = a.policy.iter().filter(|&&c| c == 0).count();
            writeln!(out, "nodes {n}").map_err(stdout)?;
            writeln!(out, "iterations {} residual {:e}", a.report.iterations, a.report.residual).map_err(stdout)?;
            writeln!(out, "value min {lo:e} max {hi:e}").map_err(stdout)?;
            writeln!(
                out,
                "policy null {:.2}% thrust {:.2}%",
                100.0 * coasting as f64 / n as f64,
                100.0 * (n - coasting) as f64 / n as f64
            )
            .map_err(stdout)?;
        }
        Command::Inspect(InspectArgs { config: Some(path), .. }) => {
            let cfg = ProblemConfig::load(&path)?;
            write!(out, "{}", cfg.canonical_text()).map_err(stdout)?;
            writeln!(out, "nodes {}", cfg.grid.len()).map_err(stdout)?;
        }
        Command::Inspect(_) => unreachable!("clap requires one inspect source"),
    }
    Ok(())
}

/// Runs the command line and returns the process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            if e.use_stderr() {
                let _ = write!(err, "{e}");
                return 1;
            }
            let _ = write!(out, "{e}");
            return 0;
        }
    };
    match execute(cli.command, out) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}
