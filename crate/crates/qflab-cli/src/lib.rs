//! `qflab` command-line front end.
//!
//! Every command prints or writes a JSON report with sorted keys and writes a
//! run manifest next to it. `qflab replay <manifest>` re-runs a recorded
//! command and compares report digests.
//!
//! Exit codes: 0 the checked property holds, 1 it fails, 2 usage or input
//! error, 3 numerical failure (unsafe cutoff, branch ambiguity,
//! non-convergence).

pub mod commands;
pub mod input;
pub mod manifest;

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use qflab::QfError;

pub use manifest::RunManifest;

pub const EXIT_OK: i32 = 0;
pub const EXIT_PROPERTY_FAILS: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

#[derive(Parser, Debug, Clone, Serialize, Deserialize)]
#[command(name = "qflab", version, about = "Quasifree-state laboratory on truncated Fock spaces")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Tolerance of the command's main test (each command has its own default).
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Boson cutoff, overriding the space file.
    #[arg(long, global = true)]
    pub cutoff: Option<usize>,
    #[arg(long, global = true, default_value_t = 20)]
    pub restarts: usize,
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    pub report: Option<PathBuf>,
    /// Manifest path; defaults to `<report>.manifest.json`, or
    /// `qflab-manifest.json` when the report goes to stdout.
    #[arg(long, global = true)]
    pub manifest: Option<PathBuf>,
}

#[derive(Subcommand, Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    /// Extract `(γ, α, b)` and test purity.
    Purity {
        state: PathBuf,
        /// Needed for density, vector and params states.
        space: Option<PathBuf>,
    },
    /// Admissibility, P/G/Q and, for boson states, the generalized 2-pdm.
    Repr {
        state: PathBuf,
        space: Option<PathBuf>,
        /// Polynomial samples for the boson positivity harness.
        #[arg(long, default_value_t = 100)]
        samples: usize,
    },
    /// Quasifree expectation of a ladder polynomial such as `c*(1) c(2)`.
    Wick {
        expr: String,
        state: PathBuf,
        /// Compare against the dense Fock-space oracle.
        #[arg(long)]
        cross_check: bool,
        /// Space for density and vector states.
        #[arg(long)]
        space: Option<PathBuf>,
    },
    /// Variational minimization over quasifree states.
    Bhf {
        model: PathBuf,
        #[arg(long, value_enum, default_value_t = ModeArg::Both)]
        mode: ModeArg,
        /// Sampled mixed states checked against the pure minimum (mode both).
        #[arg(long, default_value_t = 50)]
        samples: usize,
        /// Keep per-iteration energy traces in the report.
        #[arg(long)]
        trace: bool,
    },
    /// Re-run a recorded command and compare report digests.
    Replay { manifest_path: PathBuf },
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModeArg {
    Pure,
    Mixed,
    Both,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Purity { .. } => "purity",
            Command::Repr { .. } => "repr",
            Command::Wick { .. } => "wick",
            Command::Bhf { .. } => "bhf",
            Command::Replay { .. } => "replay",
        }
    }

    fn paths_mut(&mut self) -> Vec<&mut PathBuf> {
        match self {
            Command::Purity { state, space } | Command::Repr { state, space, .. } => {
                let mut v = vec![state];
                v.extend(space.as_mut());
                v
            }
            Command::Wick { state, space, .. } => {
                let mut v = vec![state];
                v.extend(space.as_mut());
                v
            }
            Command::Bhf { model, .. } => vec![model],
            Command::Replay { manifest_path } => vec![manifest_path],
        }
    }
}

impl Cli {
    /// Rewrites relative input paths against `base`.
    pub fn absolutize(&mut self, base: &Path) {
        for p in self.command.paths_mut() {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
    }
}

/// A finished command: its report and exit code, before any file output.
#[derive(Debug)]
pub struct Outcome {
    pub report: serde_json::Value,
    pub code: i32,
    pub inputs: Vec<(PathBuf, String)>,
}

impl Outcome {
    pub fn report_text(&self) -> String {
        let mut s = serde_json::to_string_pretty(&self.report).expect("reports serialize");
        s.push('\n');
        s
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Maps an error to its exit code.
pub fn exit_code_of(err: &anyhow::Error) -> i32 {
    match err.downcast_ref::<QfError>() {
        Some(e) if e.is_numerical() => EXIT_NUMERICAL,
        _ => EXIT_USAGE,
    }
}

/// Runs a parsed command without writing anything.
pub fn run(cli: &Cli) -> Result<Outcome> {
    commands::dispatch(cli)
}

fn default_manifest_path(cli: &Cli) -> PathBuf {
    match (&cli.manifest, &cli.report) {
        (Some(m), _) => m.clone(),
        (None, Some(r)) => {
            let mut s = r.clone().into_os_string();
            s.push(".manifest.json");
            PathBuf::from(s)
        }
        (None, None) => PathBuf::from("qflab-manifest.json"),
    }
}

fn finish(cli: &Cli, argv: Vec<String>, started: Instant) -> Result<i32> {
    let outcome = run(cli)?;
    let text = outcome.report_text();
    match &cli.report {
        Some(path) => fs::write(path, &text).with_context(|| format!("cannot write {}", path.display()))?,
        None => print!("{text}"),
    }
    let manifest = RunManifest::record(cli, argv, &outcome, &text, started.elapsed().as_secs_f64())?;
    let path = default_manifest_path(cli);
    manifest.write(&path)?;
    Ok(outcome.code)
}

/// Parses `args` (including the program name), runs the command, writes the
/// report and manifest and returns the exit code.
pub fn execute<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let started = Instant::now();
    let args: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let mut cli = match Cli::try_parse_from(&args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    let argv = args.iter().map(|a| a.to_string_lossy().into_owned()).collect();
    match std::env::current_dir() {
        Ok(cwd) => cli.absolutize(&cwd),
        Err(e) => {
            eprintln!("error: cannot read the working directory: {e}");
            return EXIT_USAGE;
        }
    }
    match finish(&cli, argv, started) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            exit_code_of(&e)
        }
    }
}
