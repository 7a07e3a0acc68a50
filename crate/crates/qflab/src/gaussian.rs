//! One-particle data `(γ, α, b)` of a state and the purity tests built on it.
//!
//! With `γ_ij = ω(a*_j a_i)`, `α_ij = ω(a_j a_i)` and `b_i = ω(a_i)`:
//!
//! ```text
//! γ̃ = [[γ, α], [α*, 1 ± γ̄]]                (+ bosons, − fermions)
//! γ̂ = [[γ, α, b], [α*, 1 + γ̄, b̄], [b*, bᵀ, 1]]   (bosons)
//! ```

use serde::Serialize;

use crate::bogoliubov::BogoliubovMap;
use crate::error::{QfError, Result};
use crate::fock::{FockOperator, Ladder, ModeSpace, Statistics};
use crate::linalg::{self, block, conj, conj_vec, cr, eye, spectral_norm, sub, zeros, CMat, CVec};

/// Default weight allowed above `cutoff - 2` when extracting boson moments.
pub const EXTRACTION_MASS_TOL: f64 = 1e-12;
/// Default purity tolerance on the residual norms.
pub const PURE_TOL: f64 = 1e-7;

#[derive(Clone, Debug, PartialEq)]
pub struct GaussianData {
    pub gamma: CMat,
    pub alpha: CMat,
    pub b: CVec,
    pub statistics: Statistics,
}

/// Residuals of the structural invariants of a [`GaussianData`].
#[derive(Clone, Debug, Serialize)]
pub struct GaussianInvariants {
    pub gamma_hermiticity: f64,
    pub gamma_min_eig: f64,
    /// Fermions only: `1 - λ_max(γ)`, negative when `γ ≤ 1` fails.
    pub gamma_upper_margin: Option<f64>,
    /// `‖αᵀ ∓ α‖` (symmetric for bosons, antisymmetric for fermions).
    pub alpha_symmetry: f64,
    pub first_moment_norm: f64,
    pub gen1pdm_min_eig: f64,
}

impl GaussianData {
    pub fn vacuum(n: usize, statistics: Statistics) -> Self {
        GaussianData { gamma: zeros(n, n), alpha: zeros(n, n), b: CVec::zeros(n), statistics }
    }

    pub fn centered(gamma: CMat, alpha: CMat, statistics: Statistics) -> Self {
        let n = gamma.nrows();
        GaussianData { gamma, alpha, b: CVec::zeros(n), statistics }
    }

    pub fn n_modes(&self) -> usize {
        self.gamma.nrows()
    }

    /// Split a generalized 1-pdm into `(γ, α)`; the first moment is zero.
    pub fn from_gen1pdm(gt: &CMat, statistics: Statistics) -> Result<Self> {
        if gt.nrows() != gt.ncols() || !gt.nrows().is_multiple_of(2) {
            return Err(QfError::Shape(format!("{}x{} is not a 2n x 2n block matrix", gt.nrows(), gt.ncols())));
        }
        let n = gt.nrows() / 2;
        Ok(GaussianData::centered(sub(gt, 0, 0, n, n), sub(gt, 0, n, n, n), statistics))
    }

    /// Split a further generalized 1-pdm into `(γ, α, b)` (bosons).
    pub fn from_further_gen1pdm(gh: &CMat) -> Result<Self> {
        if gh.nrows() != gh.ncols() || gh.nrows() % 2 != 1 {
            return Err(QfError::Shape(format!("{}x{} is not a (2n+1)x(2n+1) block matrix", gh.nrows(), gh.ncols())));
        }
        let n = gh.nrows() / 2;
        Ok(GaussianData {
            gamma: sub(gh, 0, 0, n, n),
            alpha: sub(gh, 0, n, n, n),
            b: gh.view((0, 2 * n), (n, 1)).column(0).into_owned(),
            statistics: Statistics::Boson,
        })
    }

    pub fn invariants(&self) -> GaussianInvariants {
        let ev = linalg::eigvalsh(&self.gamma);
        let sym = match self.statistics {
            Statistics::Boson => &self.alpha - self.alpha.transpose(),
            Statistics::Fermion => &self.alpha + self.alpha.transpose(),
        };
        let gt_ev = linalg::eigvalsh(&gen1pdm(self));
        let gen_min = match self.statistics {
            Statistics::Boson => gt_ev.first().copied().unwrap_or(0.0),
            // 0 ≤ γ̃ ≤ 1: report the worse of the two margins.
            Statistics::Fermion => {
                let lo = gt_ev.first().copied().unwrap_or(0.0);
                let hi = gt_ev.last().copied().unwrap_or(0.0);
                lo.min(1.0 - hi)
            }
        };
        GaussianInvariants {
            gamma_hermiticity: linalg::hermiticity_residual(&self.gamma),
            gamma_min_eig: ev.first().copied().unwrap_or(0.0),
            gamma_upper_margin: match self.statistics {
                Statistics::Fermion => Some(1.0 - ev.last().copied().unwrap_or(0.0)),
                Statistics::Boson => None,
            },
            alpha_symmetry: linalg::max_abs(&sym),
            first_moment_norm: self.b.norm(),
            gen1pdm_min_eig: gen_min,
        }
    }

    /// Check the invariants with absolute tolerance `tol`.
    pub fn validate(&self, tol: f64) -> Result<()> {
        let n = self.n_modes();
        if self.gamma.ncols() != n || self.alpha.shape() != (n, n) || self.b.len() != n {
            return Err(QfError::Shape("gamma, alpha and b must share the mode count".into()));
        }
        let inv = self.invariants();
        let fail = |what: &str, v: f64| Err(QfError::InvalidArgument(format!("{what} ({v:.3e})")));
        if inv.gamma_hermiticity > tol {
            return fail("gamma is not Hermitian", inv.gamma_hermiticity);
        }
        if inv.gamma_min_eig < -tol {
            return fail("gamma is not positive semi-definite", inv.gamma_min_eig);
        }
        if let Some(m) = inv.gamma_upper_margin {
            if m < -tol {
                return fail("fermion gamma exceeds 1", m);
            }
        }
        if inv.alpha_symmetry > tol {
            return fail("alpha has the wrong transpose symmetry", inv.alpha_symmetry);
        }
        if self.statistics == Statistics::Fermion && inv.first_moment_norm > tol {
            return fail("fermion states must be even (b = 0)", inv.first_moment_norm);
        }
        Ok(())
    }
}

/// `γ̃ = [[γ, α], [α*, 1 ± γ̄]]`.
pub fn gen1pdm(g: &GaussianData) -> CMat {
    let n = g.n_modes();
    let lower = match g.statistics {
        Statistics::Boson => eye(n) + conj(&g.gamma),
        Statistics::Fermion => eye(n) - conj(&g.gamma),
    };
    let astar = g.alpha.adjoint();
    block(&[&[&g.gamma, &g.alpha], &[&astar, &lower]])
}

/// `γ̂ = [[γ, α, b], [α*, 1 + γ̄, b̄], [b*, bᵀ, 1]]`.
pub fn further_gen1pdm(g: &GaussianData) -> CMat {
    let n = g.n_modes();
    let mut gh = zeros(2 * n + 1, 2 * n + 1);
    let gt = gen1pdm(&GaussianData { statistics: Statistics::Boson, ..g.clone() });
    gh.view_mut((0, 0), (2 * n, 2 * n)).copy_from(&gt);
    let bbar = conj_vec(&g.b);
    for i in 0..n {
        gh[(i, 2 * n)] = g.b[i];
        gh[(n + i, 2 * n)] = bbar[i];
        gh[(2 * n, i)] = g.b[i].conj();
        gh[(2 * n, n + i)] = bbar[i].conj();
    }
    gh[(2 * n, 2 * n)] = linalg::ONE;
    gh
}

/// `S = diag(1, -1)` on `h ⊕ h`.
pub fn s_matrix(n: usize) -> CMat {
    let mut s = eye(2 * n);
    for i in n..2 * n {
        s[(i, i)] = cr(-1.0);
    }
    s
}

/// `R_b = [[-1, 0, 0], [0, -1, 0], [b*, bᵀ, 1]]`.
pub fn r_b(b: &CVec) -> CMat {
    let n = b.len();
    let mut r = zeros(2 * n + 1, 2 * n + 1);
    for i in 0..2 * n {
        r[(i, i)] = cr(-1.0);
    }
    for i in 0..n {
        r[(2 * n, i)] = b[i].conj();
        r[(2 * n, n + i)] = b[i];
    }
    r[(2 * n, 2 * n)] = linalg::ONE;
    r
}

/// `Q_b = [[1, 0, -b], [0, -1, b̄], [-b*, bᵀ, -1]]`.
pub fn q_b(b: &CVec) -> CMat {
    let n = b.len();
    let mut q = zeros(2 * n + 1, 2 * n + 1);
    for i in 0..n {
        q[(i, i)] = linalg::ONE;
        q[(n + i, n + i)] = cr(-1.0);
        q[(i, 2 * n)] = -b[i];
        q[(n + i, 2 * n)] = b[i].conj();
        q[(2 * n, i)] = -b[i].conj();
        q[(2 * n, n + i)] = b[i];
    }
    q[(2 * n, 2 * n)] = cr(-1.0);
    q
}

fn moment(space: &ModeSpace, rho: &CMat, ops: &[Ladder]) -> num_complex::Complex64 {
    let mut m = rho.clone();
    for &op in ops.iter().rev() {
        m = space.apply_to_columns(op, &m);
    }
    m.trace()
}

/// Extract `(γ, α, b)` from a density matrix, refusing boson states with more
/// than `1e-12` weight above `cutoff - 2`.
pub fn gaussian_from_density_matrix(rho: &FockOperator) -> Result<GaussianData> {
    gaussian_from_density_matrix_with(rho, EXTRACTION_MASS_TOL)
}

pub fn gaussian_from_density_matrix_with(rho: &FockOperator, mass_tol: f64) -> Result<GaussianData> {
    rho.validate_density(1e-8)?;
    let space = &rho.space;
    space.guard_cutoff(&rho.matrix, 2, mass_tol)?;
    let n = space.n_modes();
    let st = space.statistics();
    let mut gamma = zeros(n, n);
    let mut alpha = zeros(n, n);
    let mut b = CVec::zeros(n);
    for i in 0..n {
        for j in 0..n {
            gamma[(i, j)] = moment(space, &rho.matrix, &[Ladder::create(j), Ladder::annihilate(i)]);
            alpha[(i, j)] = moment(space, &rho.matrix, &[Ladder::annihilate(j), Ladder::annihilate(i)]);
        }
        if st == Statistics::Boson {
            b[i] = moment(space, &rho.matrix, &[Ladder::annihilate(i)]);
        }
    }
    let gamma = linalg::hermitian_part(&gamma);
    let alpha = match st {
        Statistics::Boson => (&alpha + alpha.transpose()) * cr(0.5),
        Statistics::Fermion => (&alpha - alpha.transpose()) * cr(0.5),
    };
    Ok(GaussianData { gamma, alpha, b, statistics: st })
}

#[derive(Clone, Debug, Serialize)]
pub struct PurityReport {
    pub pure: bool,
    /// `‖γ̃Sγ̃ + γ̃‖` for bosons, `‖γ̃² − γ̃‖` for fermions (spectral norm).
    pub residual: f64,
    /// Bosons: `‖γ² + γ − αα*‖`, evaluated independently.
    pub reduced_residual: Option<f64>,
    /// Bosons: both residual tests reach the same verdict.
    pub verdicts_agree: bool,
    pub tol: f64,
}

pub fn check_boson_purity(g: &GaussianData, tol: f64) -> Result<PurityReport> {
    if g.statistics != Statistics::Boson {
        return Err(QfError::SpeciesMismatch("boson purity test on fermion data".into()));
    }
    if g.b.norm() > 1e-12 {
        return Err(QfError::InvalidArgument(
            "boson purity test needs centered data; recenter first or use the further test".into(),
        ));
    }
    let n = g.n_modes();
    let gt = gen1pdm(g);
    let s = s_matrix(n);
    let residual = spectral_norm(&(&gt * &s * &gt + &gt));
    let reduced = spectral_norm(&(&g.gamma * &g.gamma + &g.gamma - &g.alpha * g.alpha.adjoint()));
    let a = residual <= tol;
    let b = reduced <= tol;
    Ok(PurityReport { pure: a && b, residual, reduced_residual: Some(reduced), verdicts_agree: a == b, tol })
}

pub fn check_fermion_purity(g: &GaussianData, tol: f64) -> Result<PurityReport> {
    if g.statistics != Statistics::Fermion {
        return Err(QfError::SpeciesMismatch("fermion purity test on boson data".into()));
    }
    let gt = gen1pdm(g);
    let residual = spectral_norm(&(&gt * &gt - &gt));
    Ok(PurityReport { pure: residual <= tol, residual, reduced_residual: None, verdicts_agree: true, tol })
}

/// Dispatch on the statistics. Non-centered boson data goes through
/// [`check_further_purity`].
pub fn check_purity(g: &GaussianData, tol: f64) -> Result<PurityReport> {
    match g.statistics {
        Statistics::Fermion => check_fermion_purity(g, tol),
        Statistics::Boson if g.b.norm() <= 1e-12 => check_boson_purity(g, tol),
        Statistics::Boson => {
            let f = check_further_purity(&further_gen1pdm(g), tol)?;
            Ok(PurityReport {
                pure: f.pure && f.recentered.pure,
                residual: f.residual,
                reduced_residual: f.recentered.reduced_residual,
                verdicts_agree: f.verdicts_agree && f.recentered.verdicts_agree,
                tol,
            })
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct FurtherPurityReport {
    pub pure: bool,
    /// `‖γ̂ Q_b γ̂ + γ̂‖`.
    pub residual: f64,
    /// The centered test applied to the recentered data.
    pub recentered: PurityReport,
    pub verdicts_agree: bool,
}

/// `γ̂ Q_b γ̂ = −γ̂`, cross-checked against the boson test on the recentered data.
pub fn check_further_purity(gh: &CMat, tol: f64) -> Result<FurtherPurityReport> {
    let g = GaussianData::from_further_gen1pdm(gh)?;
    let q = q_b(&g.b);
    let residual = spectral_norm(&(gh * &q * gh + gh));
    let recentered = check_boson_purity(&recenter(&g)?, tol)?;
    let pure = residual <= tol;
    Ok(FurtherPurityReport { pure, residual, verdicts_agree: pure == recentered.pure, recentered })
}

/// `U* γ̃ U`: the generalized 1-pdm of `ρ' = 𝕌* ρ 𝕌`.
pub fn conjugate_gen1pdm(gt: &CMat, u: &BogoliubovMap) -> Result<CMat> {
    let m = u.block();
    if gt.shape() != m.shape() {
        return Err(QfError::Shape(format!(
            "generalized 1-pdm {:?} vs Bogoliubov map {:?}",
            gt.shape(),
            m.shape()
        )));
    }
    Ok(m.adjoint() * gt * m)
}

/// Remove the first moment: `γ' = γ − |b⟩⟨b|`, `α' = α − b bᵀ`, `b' = 0`.
pub fn recenter(g: &GaussianData) -> Result<GaussianData> {
    if g.statistics != Statistics::Boson {
        return Err(QfError::SpeciesMismatch("recentering is a boson operation".into()));
    }
    let bb = &g.b * g.b.adjoint();
    let bbt = &g.b * g.b.transpose();
    Ok(GaussianData {
        gamma: &g.gamma - bb,
        alpha: &g.alpha - bbt,
        b: CVec::zeros(g.n_modes()),
        statistics: Statistics::Boson,
    })
}

/// Add a first moment to centered data (inverse of [`recenter`]).
pub fn displace(g: &GaussianData, b: &CVec) -> Result<GaussianData> {
    if g.statistics != Statistics::Boson {
        return Err(QfError::SpeciesMismatch("displacement is a boson operation".into()));
    }
    Ok(GaussianData {
        gamma: &g.gamma + b * b.adjoint(),
        alpha: &g.alpha + b * b.transpose(),
        b: &g.b + b,
        statistics: Statistics::Boson,
    })
}
