//! Two-particle density matrices and the positivity conditions on `(γ, Γ)`.
//!
//! Pair indices are row-major: `e_k ⊗ e_l ↦ k·n + l`. The 2-pdm entry is
//! `Γ_{(kl),(mn)} = ω(a*_n a*_m a_k a_l)`, so `⟨f₁⊗f₂, Γ g₁⊗g₂⟩` pairs the
//! first slots with `a(f₁)`, `a*(g₁)`.

pub mod gen2pdm;
pub mod harness;

use serde::Serialize;

pub use gen2pdm::{
    assemble_gen2pdm, check_gen2pdm_psd, gen2pdm_gram, BlockFormulas, Gen2Pdm, Gen2PdmPsd, MomentTable,
};
pub use harness::{gen2pdm_sampling, polynomial_positivity_harness, HarnessOptions, HarnessReport};

use crate::error::{QfError, Result};
use crate::fock::{FockOperator, Ladder, Statistics};
use crate::linalg::{self, cr, eye, kron, max_abs, CMat, CVec, ZERO};
use crate::wick::ORACLE_MASS_TOL;

/// Default tolerance of the eigenvalue conditions, relative to `max(1, ‖·‖_max)`.
pub const CONDITION_TOL: f64 = 1e-8;
/// Relative cut used when factoring `ρ = R R*`.
pub const FACTOR_TOL: f64 = 1e-15;

pub fn pair_index(k: usize, l: usize, n: usize) -> usize {
    k * n + l
}

/// Permutation matrix of `f ⊗ g ↦ g ⊗ f`.
pub fn exchange_operator(n: usize) -> CMat {
    let mut ex = CMat::zeros(n * n, n * n);
    for k in 0..n {
        for l in 0..n {
            ex[(pair_index(l, k, n), pair_index(k, l, n))] = cr(1.0);
        }
    }
    ex
}

/// `R` with `ρ = R R*`, after checking `ρ` is a density matrix.
pub(crate) fn state_factor(rho: &FockOperator) -> Result<CMat> {
    rho.validate_density(1e-8)?;
    Ok(linalg::psd_factor(&rho.matrix, FACTOR_TOL))
}

/// `x_1 ⋯ x_m R` on the truncated space.
pub(crate) fn apply_monomial(rho: &FockOperator, mono: &[Ladder], r: &CMat) -> CMat {
    let mut m = r.clone();
    for &x in mono.iter().rev() {
        m = rho.space.apply_to_columns(x, &m);
    }
    m
}

/// Hilbert–Schmidt `⟨x, y⟩ = Σ conj(x_ij) y_ij`.
pub(crate) fn hs_inner(x: &CMat, y: &CMat) -> num_complex::Complex64 {
    x.iter().zip(y.iter()).fold(ZERO, |acc, (a, b)| acc + a.conj() * b)
}

/// 2-pdm of `ρ`. Bosons need weight below `1e-10` above `cutoff − 4`.
pub fn two_pdm_from_state(rho: &FockOperator) -> Result<CMat> {
    rho.space.guard_cutoff(&rho.matrix, 4, ORACLE_MASS_TOL)?;
    let n = rho.space.n_modes();
    let r = state_factor(rho)?;
    let y: Vec<CMat> = (0..n * n)
        .map(|x| apply_monomial(rho, &[Ladder::annihilate(x / n), Ladder::annihilate(x % n)], &r))
        .collect();
    let mut g = CMat::zeros(n * n, n * n);
    for x in 0..n * n {
        for z in x..n * n {
            let v = hs_inner(&y[z], &y[x]);
            g[(x, z)] = v;
            g[(z, x)] = v.conj();
        }
    }
    Ok(g)
}

fn scale_of(m: &CMat) -> f64 {
    max_abs(m).max(1.0)
}

fn min_eig_with_vector(m: &CMat) -> (f64, CVec) {
    let (vals, vecs) = linalg::eigh(m);
    match vals.first() {
        Some(&v) => (v, vecs.column(0).into_owned()),
        None => (0.0, CVec::zeros(0)),
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct AdmissibleReport {
    pub ok: bool,
    /// `Γ` Hermitian and exchange-(anti)symmetric.
    pub condition_i: bool,
    /// `γ` Hermitian, positive and of the expected trace.
    pub condition_ii: bool,
    pub gamma2_hermitian_residual: f64,
    pub exchange_residual: f64,
    pub gamma_hermitian_residual: f64,
    pub gamma_min_eig: f64,
    pub trace_gamma: f64,
    pub tol: f64,
}

/// Finite-dimensional admissibility: `Ex Γ = Γ Ex = ±Γ` (sign by statistics),
/// `Γ = Γ*`, `γ = γ* ≥ 0` and `tr γ = expected_n`.
pub fn check_admissible(
    gamma: &CMat,
    gamma2: &CMat,
    expected_n: f64,
    statistics: Statistics,
    tol: f64,
) -> Result<AdmissibleReport> {
    let n = gamma.nrows();
    if gamma.ncols() != n || gamma2.shape() != (n * n, n * n) {
        return Err(QfError::Shape("expected γ of size n×n and Γ of size n²×n²".into()));
    }
    let ex = exchange_operator(n);
    let s = cr(statistics.sign());
    let exchange_residual = max_abs(&(&ex * gamma2 - gamma2 * s)).max(max_abs(&(gamma2 * &ex - gamma2 * s)));
    let gamma2_hermitian_residual = linalg::hermiticity_residual(gamma2);
    let gamma_hermitian_residual = linalg::hermiticity_residual(gamma);
    let gamma_min_eig = linalg::min_eigh(gamma);
    let trace_gamma = gamma.trace().re;
    let t2 = tol * scale_of(gamma2);
    let t1 = tol * scale_of(gamma);
    let condition_i = gamma2_hermitian_residual <= t2 && exchange_residual <= t2;
    let condition_ii = gamma_hermitian_residual <= t1
        && gamma_min_eig >= -t1
        && (trace_gamma - expected_n).abs() <= tol * expected_n.abs().max(1.0);
    Ok(AdmissibleReport {
        ok: condition_i && condition_ii,
        condition_i,
        condition_ii,
        gamma2_hermitian_residual,
        exchange_residual,
        gamma_hermitian_residual,
        gamma_min_eig,
        trace_gamma,
        tol,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct PReport {
    pub ok: bool,
    pub min_eig: f64,
    /// Eigenvector of the most negative eigenvalue, when failing.
    #[serde(with = "crate::json::opt_vec")]
    pub witness: Option<CVec>,
}

/// `Γ ≥ 0`.
pub fn check_p(gamma2: &CMat, tol: f64) -> PReport {
    let (min_eig, v) = min_eig_with_vector(gamma2);
    let ok = min_eig >= -tol * scale_of(gamma2);
    PReport { ok, min_eig, witness: (!ok).then_some(v) }
}

/// Quadratic form of the G-condition in the vectorization `A ↦ a_{(bd)} = A_bd`:
/// `a* M a = tr((A*⊗A)[Γ + Ex(γ⊗1)]) − |tr(Aγ)|²`.
pub fn g_matrix(gamma: &CMat, gamma2: &CMat) -> CMat {
    let n = gamma.nrows();
    let p = |k, l| pair_index(k, l, n);
    let mut m = CMat::zeros(n * n, n * n);
    for b in 0..n {
        for d in 0..n {
            for b2 in 0..n {
                for d2 in 0..n {
                    let mut v = gamma2[(p(b, d2), p(d, b2))] - gamma[(d, b)].conj() * gamma[(d2, b2)];
                    if b == b2 {
                        v += gamma[(d2, d)];
                    }
                    m[(p(b, d), p(b2, d2))] = v;
                }
            }
        }
    }
    m
}

/// `tr((A*⊗A)[Γ + Ex(γ⊗1)]) − |tr(Aγ)|²` evaluated directly.
pub fn g_margin(a: &CMat, gamma: &CMat, gamma2: &CMat) -> f64 {
    let n = gamma.nrows();
    let inner = gamma2 + exchange_operator(n) * kron(gamma, &eye(n));
    let lhs = (kron(&a.adjoint(), a) * inner).trace().re;
    lhs - (a * gamma).trace().norm_sqr()
}

/// Default trial operators: all matrix units, `n_hermitian` random Hermitian
/// and `n_general` random matrices.
pub fn default_trials<R: rand::Rng + ?Sized>(rng: &mut R, n: usize, n_hermitian: usize, n_general: usize) -> Vec<CMat> {
    let mut out = Vec::new();
    for i in 0..n {
        for j in 0..n {
            let mut e = CMat::zeros(n, n);
            e[(i, j)] = cr(1.0);
            out.push(e);
        }
    }
    out.extend((0..n_hermitian).map(|_| linalg::random_hermitian(rng, n, 1.0)));
    out.extend((0..n_general).map(|_| linalg::random_matrix(rng, n, n, 1.0)));
    out
}

#[derive(Clone, Debug, Serialize)]
pub struct GReport {
    /// Exact verdict from the smallest eigenvalue of [`g_matrix`].
    pub ok: bool,
    pub min_eig: f64,
    /// Smallest `g_margin(A) / ‖A‖²_F` over the trial set.
    pub worst_margin: f64,
    pub trials: usize,
    /// Every trial margin is bounded below by the smallest eigenvalue.
    pub trials_consistent: bool,
    /// `A` from the most negative eigenvector, when failing.
    #[serde(with = "crate::json::opt_mat")]
    pub witness: Option<CMat>,
}

pub fn check_g(gamma: &CMat, gamma2: &CMat, trials: &[CMat], tol: f64) -> Result<GReport> {
    let n = gamma.nrows();
    if gamma2.shape() != (n * n, n * n) {
        return Err(QfError::Shape("Γ must be n²×n²".into()));
    }
    if trials.is_empty() {
        return Err(QfError::InvalidArgument("G-condition needs at least one trial operator".into()));
    }
    let m = g_matrix(gamma, gamma2);
    let (min_eig, v) = min_eig_with_vector(&m);
    let scale = scale_of(gamma2).max(scale_of(gamma)).max(linalg::max_abs(&m));
    let mut worst_margin = f64::INFINITY;
    for a in trials {
        let norm2 = a.norm_squared();
        if norm2 > 0.0 {
            worst_margin = worst_margin.min(g_margin(a, gamma, gamma2) / norm2);
        }
    }
    let ok = min_eig >= -tol * scale;
    let witness = (!ok).then(|| CMat::from_fn(n, n, |b, d| v[pair_index(b, d, n)]));
    Ok(GReport {
        ok,
        min_eig,
        worst_margin,
        trials: trials.len(),
        trials_consistent: worst_margin >= min_eig - 1e-9 * scale,
        witness,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct QReport {
    pub ok: bool,
    pub min_eig: f64,
    #[serde(with = "crate::json::opt_vec")]
    pub witness: Option<CVec>,
}

/// Matrix of `ω(a_m a_n a*_l a*_k)` conjugated entrywise:
/// bosons `Γ + (1+Ex)(γ⊗1 + 1⊗γ + 1)`, fermions `Γ + (1 − γ⊗1 − 1⊗γ)(1 − Ex)`.
pub fn q_matrix(gamma: &CMat, gamma2: &CMat, statistics: Statistics) -> CMat {
    let n = gamma.nrows();
    let id = eye(n);
    let id2 = eye(n * n);
    let s = cr(statistics.sign());
    let one_body = kron(gamma, &id) + kron(&id, gamma);
    gamma2 + (&id2 + one_body * s) * (&id2 + exchange_operator(n) * s)
}

pub fn check_q(gamma: &CMat, gamma2: &CMat, statistics: Statistics, tol: f64) -> QReport {
    let q = q_matrix(gamma, gamma2, statistics);
    let (min_eig, v) = min_eig_with_vector(&q);
    let ok = min_eig >= -tol * scale_of(&q);
    QReport { ok, min_eig, witness: (!ok).then_some(v) }
}
