//! Command surface of `tflm`. Every subcommand returns its report text or a
//! [`Failure`] carrying the process exit code.

mod diagnose;
mod fit;
mod run;
mod sweep;
mod validate;

pub use diagnose::{diagnose, DiagnoseArgs};
pub use fit::fit;
pub use run::run;
pub use sweep::{sweep, SweepArgs};
pub use validate::{validate, validate_with};

use clap::{Parser, Subcommand};
use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

pub mod exit {
    pub const OK: i32 = 0;
    pub const FAILED: i32 = 1;
    pub const DIVERGED: i32 = 2;
    pub const CONFIG: i32 = 3;
    pub const REGION: i32 = 4;
    pub const INSUFFICIENT_POINTS: i32 = 5;
    /// Bad flags or environment. Kept apart from 2, which means divergence.
    pub const USAGE: i32 = 64;
}

#[derive(Debug, Clone, PartialEq)]
pub struct Failure {
    pub code: i32,
    pub message: String,
    /// Partial report still printed to stdout.
    pub report: String,
}

impl Failure {
    pub fn new(code: i32, message: impl Into<String>) -> Self {
        Self { code, message: message.into(), report: String::new() }
    }

    pub fn with_report(mut self, report: String) -> Self {
        self.report = report;
        self
    }
}

#[derive(Debug, Parser)]
#[command(name = "tflm", version, about = "Thin-film simulations, regularity diagnostics and decay fits")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Integrate a configured experiment, writing snapshots and diagnostics.csv.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Evaluate inequality sides and the tilt-excess of one snapshot.
    Diagnose {
        #[arg(long)]
        snapshot: PathBuf,
        #[arg(long, value_parser = parse_point)]
        center: Option<[f64; 2]>,
        #[arg(long)]
        radius: Option<f64>,
        /// Add the Poincaré, derivative and sup-bound checks.
        #[arg(long)]
        all: bool,
    },
    /// Tilt-excess on a radius schedule for every snapshot of a directory.
    Sweep {
        #[arg(long)]
        traj: PathBuf,
        #[arg(long, value_parser = parse_point)]
        center: [f64; 2],
        #[arg(long)]
        rmin: f64,
        #[arg(long)]
        rmax: f64,
        #[arg(long, default_value_t = thinfilm::regularity::DEFAULT_LAMBDA)]
        lambda: f64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Power-law fit of a sweep CSV.
    Fit {
        #[arg(long)]
        csv: PathBuf,
        #[arg(long)]
        p: Option<f64>,
    },
    /// Run the built-in validation suite.
    Validate,
}

fn parse_point(s: &str) -> Result<[f64; 2], String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    if parts.len() != 2 {
        return Err(format!("expected x,y, got {s:?}"));
    }
    let num = |p: &str| p.parse::<f64>().map_err(|_| format!("{p:?} is not a number"));
    let v = [num(parts[0])?, num(parts[1])?];
    if v.iter().any(|c| !c.is_finite()) {
        return Err(format!("{s:?} is not a finite point"));
    }
    Ok(v)
}

/// Reads `TFLM_THREADS` and sizes the global rayon pool once.
pub fn configure_threads() -> Result<(), Failure> {
    let Some(raw) = std::env::var_os("TFLM_THREADS") else {
        return Ok(());
    };
    let n = raw
        .to_str()
        .and_then(|s| s.trim().parse::<usize>().ok())
        .filter(|&n| n > 0)
        .ok_or_else(|| Failure::new(exit::USAGE, format!("TFLM_THREADS = {raw:?} must be a positive integer")))?;
    // A second call within one process (tests) finds the pool already built.
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    Ok(())
}

pub fn execute(command: &Command) -> Result<String, Failure> {
    match command {
        Command::Run { config, out } => run(config, out),
        Command::Diagnose { snapshot, center, radius, all } => {
            diagnose(&DiagnoseArgs { snapshot: snapshot.clone(), center: *center, radius: *radius, all: *all })
        }
        Command::Sweep { traj, center, rmin, rmax, lambda, out } => sweep(&SweepArgs {
            traj: traj.clone(),
            center: *center,
            r_min: *rmin,
            r_max: *rmax,
            lambda: *lambda,
            out: out.clone(),
        }),
        Command::Fit { csv, p } => fit(csv, *p),
        Command::Validate => validate(),
    }
}

/// Parses `args`, runs the command and returns the exit code.
pub fn main_with<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { exit::USAGE } else { exit::OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() { write!(err, "{text}") } else { write!(out, "{text}") };
            return code;
        }
    };
    let result = configure_threads().and_then(|_| execute(&cli.command));
    match result {
        Ok(report) => {
            let _ = write!(out, "{report}");
            exit::OK
        }
        Err(f) => {
            let _ = write!(out, "{}", f.report);
            let _ = writeln!(err, "error: {}", f.message);
            f.code
        }
    }
}
