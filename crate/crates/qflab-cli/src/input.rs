//! JSON inputs: spaces, states and models.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use qflab::bhf::{realize_state, Hamiltonian, QuasifreeParams};
use qflab::fock::{FockOperator, FockVector, ModeSpace, Statistics};
use qflab::linalg::{CMat, CVec};
use qflab::GaussianData;

/// `{"species": "boson", "modes": 2, "cutoff": 10}`; the cutoff is ignored
/// for fermions.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SpaceSpec {
    pub species: Statistics,
    pub modes: usize,
    #[serde(default)]
    pub cutoff: Option<usize>,
}

impl SpaceSpec {
    pub fn build(&self, cutoff_override: Option<usize>) -> Result<ModeSpace> {
        let cutoff = match self.species {
            Statistics::Fermion => 1,
            Statistics::Boson => cutoff_override
                .or(self.cutoff)
                .context("boson spaces need a cutoff (in the space file or via --cutoff)")?,
        };
        Ok(ModeSpace::new(self.modes, self.species, cutoff)?)
    }
}

/// One-particle data `(γ, α, b)`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DataSpec {
    pub species: Statistics,
    #[serde(with = "qflab::json::mat")]
    pub gamma: CMat,
    #[serde(with = "qflab::json::opt_mat", default)]
    pub alpha: Option<CMat>,
    #[serde(with = "qflab::json::opt_vec", default)]
    pub b: Option<CVec>,
}

impl DataSpec {
    pub fn to_data(&self) -> Result<GaussianData> {
        let n = self.gamma.nrows();
        let g = GaussianData {
            gamma: self.gamma.clone(),
            alpha: self.alpha.clone().unwrap_or_else(|| CMat::zeros(n, n)),
            b: self.b.clone().unwrap_or_else(|| CVec::zeros(n)),
            statistics: self.species,
        };
        if g.gamma.shape() != (n, n) || g.alpha.shape() != (n, n) || g.b.len() != n {
            bail!("γ, α and b must describe the same number of modes");
        }
        Ok(g)
    }
}

/// A `(γ, Γ)` pair given directly, e.g. to test a candidate 2-pdm.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PdmSpec {
    pub species: Statistics,
    #[serde(with = "qflab::json::mat")]
    pub gamma: CMat,
    #[serde(with = "qflab::json::mat")]
    pub gamma2: CMat,
    /// Expected particle number; defaults to `tr γ`.
    #[serde(default)]
    pub particles: Option<f64>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum StateSpec {
    /// Density matrix in the occupation basis of the space.
    Density {
        #[serde(with = "qflab::json::mat")]
        matrix: CMat,
    },
    /// Pure state vector in the occupation basis of the space.
    Vector {
        #[serde(with = "qflab::json::vec")]
        amplitudes: CVec,
    },
    /// Quasifree parameters, realized on the space when a state is needed.
    Params(QuasifreeParams),
    Data(DataSpec),
    Pdm(PdmSpec),
}

impl StateSpec {
    pub fn kind(&self) -> &'static str {
        match self {
            StateSpec::Density { .. } => "density",
            StateSpec::Vector { .. } => "vector",
            StateSpec::Params(_) => "params",
            StateSpec::Data(_) => "data",
            StateSpec::Pdm(_) => "pdm",
        }
    }

    pub fn species(&self) -> Option<Statistics> {
        match self {
            StateSpec::Params(p) => Some(p.statistics),
            StateSpec::Data(d) => Some(d.species),
            StateSpec::Pdm(p) => Some(p.species),
            _ => None,
        }
    }

    /// The density matrix, when the input determines one on `space`.
    pub fn density(&self, space: Option<&ModeSpace>) -> Result<Option<FockOperator>> {
        let need = || space.context("this state kind needs a space file");
        Ok(match self {
            StateSpec::Density { matrix } => Some(FockOperator::new(need()?, matrix.clone())?),
            StateSpec::Vector { amplitudes } => Some(FockVector::new(need()?, amplitudes.clone())?.density_matrix()),
            StateSpec::Params(p) => Some(realize_state(p, need()?)?),
            StateSpec::Data(_) | StateSpec::Pdm(_) => None,
        })
    }
}

/// Reads a file and returns its bytes with their SHA-256 digest.
pub fn read_digest(path: &Path) -> Result<(Vec<u8>, String)> {
    let bytes = fs::read(path).with_context(|| format!("cannot read {}", path.display()))?;
    let digest = hex::encode(Sha256::digest(&bytes));
    Ok((bytes, digest))
}

pub fn parse_json<T: for<'de> Deserialize<'de>>(bytes: &[u8], path: &Path) -> Result<T> {
    serde_json::from_slice(bytes).with_context(|| format!("malformed JSON in {}", path.display()))
}

/// Inputs read by a command, with digests for the manifest.
#[derive(Default)]
pub struct Inputs {
    pub digests: Vec<(PathBuf, String)>,
}

impl Inputs {
    pub fn load<T: for<'de> Deserialize<'de>>(&mut self, path: &Path) -> Result<T> {
        let (bytes, digest) = read_digest(path)?;
        self.digests.push((path.to_path_buf(), digest));
        parse_json(&bytes, path)
    }

    pub fn model(&mut self, path: &Path) -> Result<Hamiltonian> {
        let ham: Hamiltonian = self.load(path)?;
        ham.validate()?;
        Ok(ham)
    }
}
