//! Two-body Hamiltonians, the quasifree energy functional and the variational
//! solver over pure and mixed quasifree states.
//!
//! ```text
//! ℍ = Σ h_ij a*_i a_j + ½ Σ V_(ij),(kl) a*_i a*_j a_l a_k
//!     + ½ Σ (P_ij a*_i a*_j + h.c.) + Σ (λ_i a*_i + h.c.)
//! ```
//!
//! With `Γ_(kl),(mn) = ω(a*_n a*_m a_k a_l)` the energy of a state is
//! `tr(hγ) + ½ tr(VΓ) + Re Σ P_ij ᾱ_ij + 2 Re Σ λ_i b̄_i`.

pub mod decompose;
pub mod models;
pub mod nelder_mead;
pub mod params;
pub mod solver;

pub use decompose::{convex_decompose, decomposition_error, DecompositionTerm};
pub use nelder_mead::{nelder_mead, NelderMeadOptions, NelderMeadResult};
pub use params::{realize_state, Layout, QuasifreeParams};
pub use solver::{minimize, verify_pure_equals_mixed, BhfOptions, GapReport, Mode, MinimizeResult, RestartTrace};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{QfError, Result};
use crate::fock::{FockOperator, Ladder, ModeSpace, Statistics};
use crate::gaussian::GaussianData;
use crate::linalg::{self, max_abs, CMat, CVec};
use crate::representability::exchange_operator;
use crate::wick::ContractionTable;

/// Relative tolerance for the Hermiticity and symmetry checks on model input.
pub const MODEL_TOL: f64 = 1e-12;
/// Agreement required between the truncated ground energies at two cutoffs.
pub const PROBE_TOL: f64 = 1e-3;
/// Cutoff difference used by the boundedness probe.
pub const PROBE_STEP: usize = 4;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Hamiltonian {
    #[serde(rename = "species")]
    pub statistics: Statistics,
    #[serde(with = "crate::json::mat")]
    pub h: CMat,
    #[serde(rename = "V", with = "crate::json::mat")]
    pub v: CMat,
    #[serde(rename = "extra_pairing", with = "crate::json::opt_mat", default, skip_serializing_if = "Option::is_none")]
    pub pairing: Option<CMat>,
    #[serde(with = "crate::json::opt_vec", default, skip_serializing_if = "Option::is_none")]
    pub drive: Option<CVec>,
}

fn rel_residual(m: &CMat, scale: &CMat) -> f64 {
    max_abs(m) / max_abs(scale).max(1.0)
}

impl Hamiltonian {
    pub fn new(statistics: Statistics, h: CMat, v: CMat) -> Result<Self> {
        let ham = Hamiltonian { statistics, h, v, pairing: None, drive: None };
        ham.validate()?;
        Ok(ham)
    }

    pub fn n_modes(&self) -> usize {
        self.h.nrows()
    }

    /// Hermitian `h` and `V`, `Ex V Ex = V`, pairing symmetric (bosons) or
    /// antisymmetric (fermions), drive only for bosons.
    pub fn validate(&self) -> Result<()> {
        let n = self.n_modes();
        if self.h.shape() != (n, n) || self.v.shape() != (n * n, n * n) {
            return Err(QfError::Shape(format!("h must be {n}×{n} and V {0}×{0}", n * n)));
        }
        if rel_residual(&(&self.h - self.h.adjoint()), &self.h) > MODEL_TOL {
            return Err(QfError::InvalidArgument("h is not Hermitian".into()));
        }
        if rel_residual(&(&self.v - self.v.adjoint()), &self.v) > MODEL_TOL {
            return Err(QfError::InvalidArgument("V is not Hermitian".into()));
        }
        let ex = exchange_operator(n);
        if rel_residual(&(&ex * &self.v * &ex - &self.v), &self.v) > MODEL_TOL {
            return Err(QfError::InvalidArgument("V is not exchange symmetric".into()));
        }
        if let Some(p) = &self.pairing {
            if p.shape() != (n, n) {
                return Err(QfError::Shape("pairing must be n×n".into()));
            }
            let res = match self.statistics {
                Statistics::Boson => rel_residual(&(p - p.transpose()), p),
                Statistics::Fermion => rel_residual(&(p + p.transpose()), p),
            };
            if res > MODEL_TOL {
                return Err(QfError::InvalidArgument(format!("pairing must be {} for {}s", sym_word(self.statistics), self.statistics)));
            }
        }
        if let Some(d) = &self.drive {
            if self.statistics == Statistics::Fermion {
                return Err(QfError::SpeciesMismatch("a linear drive is only defined for bosons".into()));
            }
            if d.len() != n {
                return Err(QfError::Shape("drive must have one entry per mode".into()));
            }
        }
        let finite = self.h.iter().chain(self.v.iter()).chain(self.pairing.iter().flatten()).chain(self.drive.iter().flatten());
        if finite.into_iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(QfError::InvalidArgument("non-finite model entry".into()));
        }
        Ok(())
    }

    /// True when `ℍ` has only the `h` and `V` parts.
    pub fn is_two_body_only(&self) -> bool {
        self.pairing.is_none() && self.drive.is_none()
    }

    /// Dense matrix of `ℍ` on a truncated space. Products of truncated ladder
    /// matrices are used, so number-conserving terms are exact there.
    pub fn fock_matrix(&self, space: &ModeSpace) -> Result<FockOperator> {
        self.validate()?;
        let n = self.n_modes();
        if space.n_modes() != n || space.statistics() != self.statistics {
            return Err(QfError::SpeciesMismatch("model and space disagree on statistics or modes".into()));
        }
        let (cr_, an) = (Ladder::create, Ladder::annihilate);
        let d = space.dim();
        let mut m = CMat::zeros(d, d);
        for i in 0..n {
            for j in 0..n {
                let hij = self.h[(i, j)];
                if hij != linalg::ZERO {
                    m += space.product_matrix(&[cr_(i), an(j)]) * hij;
                }
            }
        }
        let half = Complex64::new(0.5, 0.0);
        for (x, y, vxy) in self.v_entries() {
            let (i, j, k, l) = (x / n, x % n, y / n, y % n);
            m += space.product_matrix(&[cr_(i), cr_(j), an(l), an(k)]) * (vxy * half);
        }
        if let Some(p) = &self.pairing {
            for i in 0..n {
                for j in 0..n {
                    if p[(i, j)] != linalg::ZERO {
                        let t = space.product_matrix(&[cr_(i), cr_(j)]) * (p[(i, j)] * half);
                        m += &t + t.adjoint();
                    }
                }
            }
        }
        if let Some(lam) = &self.drive {
            for i in 0..n {
                if lam[i] != linalg::ZERO {
                    let t = space.ladder_matrix(cr_(i)) * lam[i];
                    m += &t + t.adjoint();
                }
            }
        }
        FockOperator::new(space, linalg::hermitian_part(&m))
    }

    /// Nonzero `V` entries as `(row, column, value)`.
    pub fn v_entries(&self) -> Vec<(usize, usize, Complex64)> {
        let mut out = Vec::new();
        for x in 0..self.v.nrows() {
            for y in 0..self.v.ncols() {
                if self.v[(x, y)] != linalg::ZERO {
                    out.push((x, y, self.v[(x, y)]));
                }
            }
        }
        out
    }
}

fn sym_word(st: Statistics) -> &'static str {
    match st {
        Statistics::Boson => "symmetric",
        Statistics::Fermion => "antisymmetric",
    }
}

/// `ℰ(γ, Γ) = tr(hγ) + ½ tr(VΓ)`; the pairing and drive parts of `ℍ` are
/// not included (see [`energy_of_data`]).
pub fn energy_functional(gamma: &CMat, gamma2: &CMat, ham: &Hamiltonian) -> Result<f64> {
    let n = ham.n_modes();
    if gamma.shape() != (n, n) || gamma2.shape() != (n * n, n * n) {
        return Err(QfError::Shape("γ and Γ do not match the model".into()));
    }
    let one = (&ham.h * gamma).trace();
    let two = (&ham.v * gamma2).trace();
    Ok(one.re + 0.5 * two.re)
}

/// Precomputed pieces of `ω(ℍ)` for quasifree data.
#[derive(Clone, Debug)]
pub struct EnergyEvaluator {
    ham: Hamiltonian,
    /// `(x, y, V_xy, monomial for Γ_yx)`.
    two_body: Vec<(Complex64, [Ladder; 4])>,
}

impl EnergyEvaluator {
    pub fn new(ham: &Hamiltonian) -> Result<Self> {
        ham.validate()?;
        let n = ham.n_modes();
        let (c, a) = (Ladder::create, Ladder::annihilate);
        let two_body = ham
            .v_entries()
            .into_iter()
            .map(|(x, y, vxy)| {
                // Γ_yx with y = (k,l), x = (i,j): ω(a*_j a*_i a_k a_l).
                let (i, j, k, l) = (x / n, x % n, y / n, y % n);
                (vxy, [c(j), c(i), a(k), a(l)])
            })
            .collect();
        Ok(EnergyEvaluator { ham: ham.clone(), two_body })
    }

    pub fn hamiltonian(&self) -> &Hamiltonian {
        &self.ham
    }

    /// `ω(ℍ)` for the quasifree state with data `g`, through the Wick rule.
    pub fn energy(&self, g: &GaussianData) -> f64 {
        let table = ContractionTable::new(g);
        let mut e = (&self.ham.h * &g.gamma).trace().re;
        let mut two = Complex64::new(0.0, 0.0);
        for (vxy, mono) in &self.two_body {
            two += vxy * table.expectation(mono);
        }
        e += 0.5 * two.re;
        if let Some(p) = &self.ham.pairing {
            e += p.iter().zip(g.alpha.iter()).map(|(pij, aij)| (pij * aij.conj()).re).sum::<f64>();
        }
        if let Some(lam) = &self.ham.drive {
            e += 2.0 * lam.iter().zip(g.b.iter()).map(|(l, b)| (l * b.conj()).re).sum::<f64>();
        }
        e
    }
}

/// `ω(ℍ)` for quasifree data.
pub fn energy_of_data(ham: &Hamiltonian, g: &GaussianData) -> Result<f64> {
    if g.statistics != ham.statistics || g.n_modes() != ham.n_modes() {
        return Err(QfError::SpeciesMismatch("data and model disagree on statistics or modes".into()));
    }
    Ok(EnergyEvaluator::new(ham)?.energy(g))
}

/// Lowest eigenvalue of `ℍ` on the truncated space.
pub fn exact_ground_energy(ham: &Hamiltonian, space: &ModeSpace) -> Result<f64> {
    Ok(linalg::min_eigh(&ham.fock_matrix(space)?.matrix))
}

#[derive(Clone, Debug, Serialize)]
pub struct BoundednessProbe {
    pub ok: bool,
    pub cutoffs: [usize; 2],
    pub energies: [f64; 2],
    pub difference: f64,
}

/// Ground energies at `cutoff` and `cutoff + 4`; bosons only, fermion models
/// are bounded on the finite Fock space and pass trivially.
pub fn boundedness_probe(ham: &Hamiltonian, space: &ModeSpace) -> Result<BoundednessProbe> {
    let k = space.cutoff();
    let e0 = exact_ground_energy(ham, space)?;
    if ham.statistics == Statistics::Fermion {
        return Ok(BoundednessProbe { ok: true, cutoffs: [k, k], energies: [e0, e0], difference: 0.0 });
    }
    let bigger = ModeSpace::new(space.n_modes(), Statistics::Boson, k + PROBE_STEP)?;
    let e1 = exact_ground_energy(ham, &bigger)?;
    let difference = (e0 - e1).abs();
    Ok(BoundednessProbe { ok: difference <= PROBE_TOL, cutoffs: [k, k + PROBE_STEP], energies: [e0, e1], difference })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::{expectation, vacuum};
    use crate::linalg::{c, cr};
    use crate::representability::two_pdm_from_state;

    fn density_density(w: &[[f64; 3]; 3]) -> CMat {
        let n = 3;
        CMat::from_fn(9, 9, |x, y| if x == y { cr(w[x / n][x % n]) } else { cr(0.0) })
    }

    #[test]
    fn vacuum_energy_is_zero() {
        let ham = Hamiltonian::new(Statistics::Boson, CMat::identity(2, 2), CMat::identity(4, 4)).unwrap();
        let e = energy_of_data(&ham, &GaussianData::vacuum(2, Statistics::Boson)).unwrap();
        assert_eq!(e, 0.0);
    }

    #[test]
    fn rejects_bad_models() {
        let h = CMat::from_row_slice(2, 2, &[cr(0.0), c(0.0, 1.0), c(0.0, 1.0), cr(0.0)]);
        assert!(Hamiltonian::new(Statistics::Boson, h, CMat::zeros(4, 4)).is_err());
        let mut v = CMat::zeros(4, 4);
        v[(1, 1)] = cr(1.0);
        assert!(Hamiltonian::new(Statistics::Boson, CMat::zeros(2, 2), v).is_err());
        let mut ham = Hamiltonian::new(Statistics::Fermion, CMat::zeros(2, 2), CMat::zeros(4, 4)).unwrap();
        ham.drive = Some(CVec::zeros(2));
        assert!(ham.validate().is_err());
    }

    #[test]
    fn fock_matrix_matches_energy_on_random_fermion_state() {
        let w = [[0.0, 1.0, 0.5], [1.0, 0.0, 0.8], [0.5, 0.8, 0.0]];
        let h = CMat::from_row_slice(3, 3, &[cr(-1.0), cr(0.3), c(0.0, 0.1), cr(0.3), cr(0.5), cr(0.2), c(0.0, -0.1), cr(0.2), cr(1.2)]);
        let ham = Hamiltonian::new(Statistics::Fermion, h, density_density(&w)).unwrap();
        let space = ModeSpace::fermion(3).unwrap();
        let l = Layout { n: 3, statistics: Statistics::Fermion, mixed: true, occupied: vec![] };
        let x: Vec<f64> = (0..l.dim()).map(|i| (i as f64 * 0.37).sin()).collect();
        let p = l.decode(&x);
        let rho = realize_state(&p, &space).unwrap();
        let direct = expectation(&rho, &ham.fock_matrix(&space).unwrap()).unwrap().re;
        let wick = energy_of_data(&ham, &p.data().unwrap()).unwrap();
        assert!((direct - wick).abs() < 1e-10, "{direct} {wick}");
        let g = crate::gaussian::gaussian_from_density_matrix(&rho).unwrap();
        let f = energy_functional(&g.gamma, &two_pdm_from_state(&rho).unwrap(), &ham).unwrap();
        assert!((direct - f).abs() < 1e-10);
    }

    #[test]
    fn vacuum_of_number_operator() {
        let ham = Hamiltonian::new(Statistics::Boson, CMat::identity(1, 1), CMat::zeros(1, 1)).unwrap();
        let space = ModeSpace::boson(1, 6).unwrap();
        assert!(exact_ground_energy(&ham, &space).unwrap().abs() < 1e-14);
        let v = vacuum(&space).density_matrix();
        assert!(expectation(&v, &ham.fock_matrix(&space).unwrap()).unwrap().norm() < 1e-14);
    }

    #[test]
    fn probe_rejects_attractive_quartic() {
        let ham = Hamiltonian::new(Statistics::Boson, CMat::identity(1, 1), CMat::from_element(1, 1, cr(-2.0))).unwrap();
        let probe = boundedness_probe(&ham, &ModeSpace::boson(1, 10).unwrap()).unwrap();
        assert!(!probe.ok);
        let ham = Hamiltonian::new(Statistics::Boson, CMat::identity(1, 1), CMat::from_element(1, 1, cr(0.2))).unwrap();
        assert!(boundedness_probe(&ham, &ModeSpace::boson(1, 20).unwrap()).unwrap().ok);
    }
}
