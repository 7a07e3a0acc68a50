//! Quasifree parameters `(A, B, f, mixing, occupied)` and their flat
//! encoding for the optimizer.
//!
//! The state is `𝕎_f 𝕌 ρ₀ 𝕌* 𝕎_f*` with `𝕌 = exp(−iQ(A, B))` and `ρ₀` the
//! product state of [`states::product_state`]: mixing weights `c_k ∈ [0,1)`
//! for bosons, `Γ(diag b)/tr` with `b_k ≥ 0` on the free fermion modes and a
//! Slater factor on `occupied`. The first moment is `−f`.

use serde::{Deserialize, Serialize};

use crate::bogoliubov::{BogoliubovMap, IMPLEMENT_MASS_TOL};
use crate::error::{QfError, Result};
use crate::fock::{FockOperator, ModeSpace, Statistics};
use crate::gaussian::GaussianData;
use crate::linalg::{c, cr, CMat, CVec};
use crate::states;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuasifreeParams {
    pub statistics: Statistics,
    #[serde(with = "crate::json::mat")]
    pub a: CMat,
    #[serde(with = "crate::json::mat")]
    pub b: CMat,
    #[serde(with = "crate::json::opt_vec", default, skip_serializing_if = "Option::is_none")]
    pub displacement: Option<CVec>,
    pub mixing: Vec<f64>,
    #[serde(default)]
    pub occupied: Vec<usize>,
}

impl QuasifreeParams {
    pub fn vacuum(n: usize, statistics: Statistics) -> Self {
        QuasifreeParams {
            statistics,
            a: CMat::zeros(n, n),
            b: CMat::zeros(n, n),
            displacement: None,
            mixing: vec![0.0; n],
            occupied: Vec::new(),
        }
    }

    pub fn n_modes(&self) -> usize {
        self.a.nrows()
    }

    /// Pure exactly when every mixing weight is zero.
    pub fn is_pure(&self) -> bool {
        self.mixing.iter().all(|&w| w == 0.0)
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.n_modes();
        if self.a.shape() != (n, n) || self.b.shape() != (n, n) || self.mixing.len() != n {
            return Err(QfError::Shape("A, B and the mixing spectrum must match the mode count".into()));
        }
        if let Some(f) = &self.displacement {
            if self.statistics == Statistics::Fermion {
                return Err(QfError::SpeciesMismatch("displacements are bosonic".into()));
            }
            if f.len() != n {
                return Err(QfError::Shape("displacement must have one entry per mode".into()));
            }
        }
        if self.statistics == Statistics::Boson && !self.occupied.is_empty() {
            return Err(QfError::SpeciesMismatch("Slater factors are fermionic".into()));
        }
        let mut seen = vec![false; n];
        for &k in &self.occupied {
            if k >= n || seen[k] {
                return Err(QfError::InvalidArgument(format!("occupied mode {k} out of range or repeated")));
            }
            seen[k] = true;
            if self.mixing[k] != 0.0 {
                return Err(QfError::InvalidArgument(format!("occupied mode {k} carries a mixing weight")));
            }
        }
        for &w in &self.mixing {
            let ok = match self.statistics {
                Statistics::Boson => (0.0..1.0).contains(&w),
                Statistics::Fermion => w >= 0.0 && w.is_finite(),
            };
            if !ok {
                return Err(QfError::InvalidArgument(format!("mixing weight {w} outside its domain")));
            }
        }
        Ok(())
    }

    pub fn map(&self) -> Result<BogoliubovMap> {
        BogoliubovMap::from_generator(&self.a, &self.b, self.statistics)
    }

    /// One-particle data of `ρ₀`.
    pub fn base_data(&self) -> GaussianData {
        states::product_data(self.statistics, &self.mixing, &self.occupied)
    }

    /// Untruncated `(γ, α, b)` of the state.
    pub fn data(&self) -> Result<GaussianData> {
        self.validate()?;
        states::quasifree_data(&self.map()?, &self.base_data(), self.displacement.as_ref())
    }
}

/// `𝕎_f 𝕌 ρ₀ 𝕌* 𝕎_f*` on the truncated space; bosons are guarded at
/// `cutoff − 2`.
pub fn realize_state(p: &QuasifreeParams, space: &ModeSpace) -> Result<FockOperator> {
    p.validate()?;
    if space.statistics() != p.statistics || space.n_modes() != p.n_modes() {
        return Err(QfError::SpeciesMismatch("parameters and space disagree on statistics or modes".into()));
    }
    let base = states::product_state(space, &p.mixing, &p.occupied)?;
    let rho = states::quasifree_state(space, &p.map()?, &base, p.displacement.as_ref())?;
    space.guard_cutoff(&rho.matrix, 2, IMPLEMENT_MASS_TOL)?;
    Ok(rho)
}

fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// Flat real coordinates for one family of quasifree states.
///
/// Layout: `A` diagonal (n), `A` upper triangle re/im, `B` entries re/im
/// (upper triangle with diagonal for bosons, strict upper for fermions),
/// displacement re/im (bosons), then one mixing coordinate per free mode when
/// `mixed`. Mixing coordinates map through the logistic function for bosons
/// (`c = σ(x)`) and through `b = eˣ` for fermions, so the occupation of a free
/// fermion mode is again `σ(x)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Layout {
    pub n: usize,
    pub statistics: Statistics,
    pub mixed: bool,
    pub occupied: Vec<usize>,
}

impl Layout {
    fn n_b(&self) -> usize {
        let n = self.n;
        match self.statistics {
            Statistics::Boson => n * (n + 1),
            Statistics::Fermion => n * (n - 1),
        }
    }

    fn n_disp(&self) -> usize {
        match self.statistics {
            Statistics::Boson => 2 * self.n,
            Statistics::Fermion => 0,
        }
    }

    fn free_modes(&self) -> Vec<usize> {
        (0..self.n).filter(|k| !self.occupied.contains(k)).collect()
    }

    pub fn dim(&self) -> usize {
        let mix = if self.mixed { self.free_modes().len() } else { 0 };
        self.n * self.n + self.n_b() + self.n_disp() + mix
    }

    /// Which coordinates are mixing coordinates.
    pub fn mixing_range(&self) -> std::ops::Range<usize> {
        let start = self.n * self.n + self.n_b() + self.n_disp();
        start..self.dim()
    }

    pub fn decode(&self, x: &[f64]) -> QuasifreeParams {
        let n = self.n;
        let st = self.statistics;
        let mut it = x.iter().copied();
        let mut next = || it.next().expect("coordinate vector too short");
        let mut a = CMat::zeros(n, n);
        for i in 0..n {
            a[(i, i)] = cr(next());
        }
        for i in 0..n {
            for j in i + 1..n {
                let z = c(next(), next());
                a[(i, j)] = z;
                a[(j, i)] = z.conj();
            }
        }
        let mut b = CMat::zeros(n, n);
        for i in 0..n {
            let j0 = if st == Statistics::Boson { i } else { i + 1 };
            for j in j0..n {
                let z = c(next(), next());
                b[(i, j)] = z;
                b[(j, i)] = if st == Statistics::Boson { z } else { -z };
            }
        }
        let displacement = (st == Statistics::Boson).then(|| CVec::from_fn(n, |_, _| c(next(), next())));
        let mut mixing = vec![0.0; n];
        if self.mixed {
            for k in self.free_modes() {
                let t = next();
                mixing[k] = match st {
                    Statistics::Boson => sigmoid(t).min(1.0 - 1e-12),
                    Statistics::Fermion => t.exp(),
                };
            }
        }
        QuasifreeParams { statistics: st, a, b, displacement, mixing, occupied: self.occupied.clone() }
    }
}
