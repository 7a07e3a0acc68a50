//! Run manifests: enough to re-run a command and check its report.

use std::fs;
use std::path::Path;

use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};

use crate::{sha256_hex, Cli, Outcome};

pub const FLOAT_POLICY: &str = "IEEE-754 binary64 throughout; reports print shortest round-trip decimals; \
random draws come from per-job ChaCha8 streams, so results do not depend on thread scheduling";

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct InputDigest {
    pub path: String,
    pub sha256: String,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub argv: Vec<String>,
    /// The parsed command with absolute input paths; replay runs this.
    pub config: Cli,
    pub seed: u64,
    pub inputs: Vec<InputDigest>,
    /// `None` when the report went to stdout.
    pub report_path: Option<String>,
    pub report_sha256: String,
    pub exit_code: i32,
    pub float_policy: String,
    pub wall_time_s: f64,
}

impl RunManifest {
    pub fn record(cli: &Cli, argv: Vec<String>, outcome: &Outcome, report_text: &str, wall_time_s: f64) -> Result<Self> {
        Ok(RunManifest {
            tool: env!("CARGO_PKG_NAME").to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            command: cli.command.name().to_string(),
            argv,
            config: cli.clone(),
            seed: cli.seed,
            inputs: outcome
                .inputs
                .iter()
                .map(|(p, d)| InputDigest { path: p.display().to_string(), sha256: d.clone() })
                .collect(),
            report_path: cli.report.as_ref().map(|p| p.display().to_string()),
            report_sha256: sha256_hex(report_text.as_bytes()),
            exit_code: outcome.code,
            float_policy: FLOAT_POLICY.to_string(),
            wall_time_s,
        })
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let mut text = serde_json::to_string_pretty(self)?;
        text.push('\n');
        fs::write(path, text).with_context(|| format!("cannot write manifest {}", path.display()))
    }

    pub fn read(path: &Path) -> Result<Self> {
        let bytes = fs::read(path).with_context(|| format!("cannot read manifest {}", path.display()))?;
        serde_json::from_slice(&bytes).with_context(|| format!("malformed manifest {}", path.display()))
    }
}
