//! Truncated Fock spaces and ladder operators.
//!
//! The occupation basis is graded by total particle number with the vacuum
//! first. Inside one level the tuples are listed in descending lexicographic
//! order, so the basis of a space with cutoff `K` is a prefix of the basis of
//! the same modes with any larger cutoff. Restricting an operator built at a
//! padded cutoff is therefore just taking its leading block.
//!
//! Bosons are truncated by total occupation: `a*_k |n⟩ = √(n_k+1) |n+e_k⟩`
//! when `|n| < K` and zero otherwise. Fermions carry the Jordan–Wigner sign
//! `c_k |n⟩ = (-1)^{Σ_{j<k} n_j} n_k |n-e_k⟩`, so the CAR hold exactly.

use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{QfError, Result};
use crate::linalg::{self, cr, CMat, CVec};

pub const DEFAULT_MAX_DIM: usize = 4096;
pub const MAX_DIM_ENV: &str = "QFLAB_MAX_DIM";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Statistics {
    Boson,
    Fermion,
}

impl Statistics {
    /// `+1` for bosons, `-1` for fermions.
    pub fn sign(self) -> f64 {
        match self {
            Statistics::Boson => 1.0,
            Statistics::Fermion => -1.0,
        }
    }
}

impl fmt::Display for Statistics {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Statistics::Boson => f.write_str("boson"),
            Statistics::Fermion => f.write_str("fermion"),
        }
    }
}

/// A single creation or annihilation operator on mode `mode` (0-based).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Ladder {
    pub mode: usize,
    pub dagger: bool,
}

impl Ladder {
    pub fn create(mode: usize) -> Self {
        Ladder { mode, dagger: true }
    }
    pub fn annihilate(mode: usize) -> Self {
        Ladder { mode, dagger: false }
    }
    pub fn adjoint(self) -> Self {
        Ladder { mode: self.mode, dagger: !self.dagger }
    }
}

#[derive(Debug)]
struct Tables {
    basis: Vec<Vec<u8>>,
    totals: Vec<usize>,
    index: HashMap<Vec<u8>, usize>,
    // create[k][j] = image of basis vector j under a*_k
    create: Vec<Vec<Option<(usize, f64)>>>,
    annihilate: Vec<Vec<Option<(usize, f64)>>>,
}

/// `n` modes with a statistics and a total-occupation cutoff.
#[derive(Clone)]
pub struct ModeSpace {
    n_modes: usize,
    statistics: Statistics,
    cutoff: usize,
    tables: Arc<Tables>,
}

impl fmt::Debug for ModeSpace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ModeSpace")
            .field("n_modes", &self.n_modes)
            .field("statistics", &self.statistics)
            .field("cutoff", &self.cutoff)
            .field("dim", &self.dim())
            .finish()
    }
}

impl PartialEq for ModeSpace {
    fn eq(&self, other: &Self) -> bool {
        self.n_modes == other.n_modes
            && self.statistics == other.statistics
            && self.cutoff == other.cutoff
    }
}

/// The dimension guard: `QFLAB_MAX_DIM` if set and parseable, else 4096.
pub fn max_dim_limit() -> usize {
    std::env::var(MAX_DIM_ENV)
        .ok()
        .and_then(|s| s.trim().parse().ok())
        .unwrap_or(DEFAULT_MAX_DIM)
}

fn binomial(n: usize, k: usize) -> Option<usize> {
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
        if acc > usize::MAX as u128 {
            return None;
        }
    }
    Some(acc as usize)
}

/// Fock dimension of a space without building it.
pub fn fock_dimension(n_modes: usize, statistics: Statistics, cutoff: usize) -> Option<usize> {
    match statistics {
        Statistics::Fermion => {
            if n_modes >= usize::BITS as usize - 1 {
                None
            } else {
                Some(1usize << n_modes)
            }
        }
        Statistics::Boson => binomial(n_modes + cutoff, n_modes),
    }
}

fn push_level(n: usize, remaining: usize, max_occ: usize, prefix: &mut Vec<u8>, out: &mut Vec<Vec<u8>>) {
    if prefix.len() == n - 1 {
        if remaining <= max_occ {
            let mut t = prefix.clone();
            t.push(remaining as u8);
            out.push(t);
        }
        return;
    }
    for occ in (0..=remaining.min(max_occ)).rev() {
        prefix.push(occ as u8);
        push_level(n, remaining - occ, max_occ, prefix, out);
        prefix.pop();
    }
}

impl ModeSpace {
    /// Build a space, honouring the `QFLAB_MAX_DIM` guard. `cutoff` is
    /// ignored for fermions (it is fixed to `n_modes`).
    pub fn new(n_modes: usize, statistics: Statistics, cutoff: usize) -> Result<Self> {
        Self::with_limit(n_modes, statistics, cutoff, max_dim_limit())
    }

    pub fn boson(n_modes: usize, cutoff: usize) -> Result<Self> {
        Self::new(n_modes, Statistics::Boson, cutoff)
    }

    pub fn fermion(n_modes: usize) -> Result<Self> {
        Self::new(n_modes, Statistics::Fermion, n_modes)
    }

    pub fn with_limit(n_modes: usize, statistics: Statistics, cutoff: usize, limit: usize) -> Result<Self> {
        if n_modes == 0 {
            return Err(QfError::InvalidArgument("n_modes must be at least 1".into()));
        }
        let cutoff = match statistics {
            Statistics::Fermion => n_modes,
            Statistics::Boson => {
                if cutoff == 0 {
                    return Err(QfError::InvalidArgument("boson cutoff must be at least 1".into()));
                }
                cutoff
            }
        };
        if cutoff > u8::MAX as usize {
            return Err(QfError::InvalidArgument("cutoff above 255".into()));
        }
        let dim = fock_dimension(n_modes, statistics, cutoff).unwrap_or(usize::MAX);
        if dim > limit {
            return Err(QfError::DimensionOverflow { dim, limit });
        }
        let max_occ = match statistics {
            Statistics::Boson => cutoff,
            Statistics::Fermion => 1,
        };
        let mut basis = Vec::with_capacity(dim);
        for level in 0..=cutoff {
            push_level(n_modes, level, max_occ, &mut Vec::with_capacity(n_modes), &mut basis);
        }
        debug_assert_eq!(basis.len(), dim);
        let totals: Vec<usize> = basis.iter().map(|t| t.iter().map(|&x| x as usize).sum()).collect();
        let index: HashMap<Vec<u8>, usize> =
            basis.iter().enumerate().map(|(i, t)| (t.clone(), i)).collect();

        let mut create = vec![vec![None; dim]; n_modes];
        let mut annihilate = vec![vec![None; dim]; n_modes];
        for (j, occ) in basis.iter().enumerate() {
            for k in 0..n_modes {
                let nk = occ[k] as usize;
                let jw = match statistics {
                    Statistics::Boson => 1.0,
                    Statistics::Fermion => {
                        if occ[..k].iter().map(|&x| x as usize).sum::<usize>() % 2 == 0 {
                            1.0
                        } else {
                            -1.0
                        }
                    }
                };
                let can_raise = match statistics {
                    Statistics::Boson => totals[j] < cutoff,
                    Statistics::Fermion => nk == 0,
                };
                if can_raise {
                    let mut up = occ.clone();
                    up[k] += 1;
                    let amp = match statistics {
                        Statistics::Boson => ((nk + 1) as f64).sqrt(),
                        Statistics::Fermion => jw,
                    };
                    create[k][j] = Some((index[&up], amp));
                }
                if nk > 0 {
                    let mut down = occ.clone();
                    down[k] -= 1;
                    let amp = match statistics {
                        Statistics::Boson => (nk as f64).sqrt(),
                        Statistics::Fermion => jw,
                    };
                    annihilate[k][j] = Some((index[&down], amp));
                }
            }
        }
        Ok(ModeSpace {
            n_modes,
            statistics,
            cutoff,
            tables: Arc::new(Tables { basis, totals, index, create, annihilate }),
        })
    }

    /// Same modes and statistics with a larger boson cutoff (identity for fermions).
    pub fn padded(&self, extra: usize) -> Result<Self> {
        match self.statistics {
            Statistics::Fermion => Ok(self.clone()),
            Statistics::Boson => {
                Self::with_limit(self.n_modes, self.statistics, self.cutoff + extra, max_dim_limit().saturating_mul(16))
            }
        }
    }

    pub fn n_modes(&self) -> usize {
        self.n_modes
    }
    pub fn statistics(&self) -> Statistics {
        self.statistics
    }
    pub fn cutoff(&self) -> usize {
        self.cutoff
    }
    pub fn dim(&self) -> usize {
        self.tables.basis.len()
    }
    pub fn occupation(&self, index: usize) -> &[u8] {
        &self.tables.basis[index]
    }
    pub fn total(&self, index: usize) -> usize {
        self.tables.totals[index]
    }
    pub fn index_of(&self, occupation: &[u8]) -> Option<usize> {
        self.tables.index.get(occupation).copied()
    }
    /// Number of basis vectors with total occupation `≤ level`.
    pub fn dim_up_to(&self, level: usize) -> usize {
        self.tables.totals.iter().take_while(|&&t| t <= level).count()
    }

    fn check_mode(&self, k: usize) -> Result<()> {
        if k >= self.n_modes {
            return Err(QfError::InvalidArgument(format!(
                "mode {k} out of range for {} modes",
                self.n_modes
            )));
        }
        Ok(())
    }

    /// Image of basis vector `j` under a single ladder operator.
    #[inline]
    pub fn ladder_image(&self, op: Ladder, j: usize) -> Option<(usize, f64)> {
        if op.dagger {
            self.tables.create[op.mode][j]
        } else {
            self.tables.annihilate[op.mode][j]
        }
    }

    pub fn apply(&self, op: Ladder, v: &CVec) -> CVec {
        let mut out = CVec::zeros(v.len());
        for (j, z) in v.iter().enumerate() {
            if *z == linalg::ZERO {
                continue;
            }
            if let Some((t, amp)) = self.ladder_image(op, j) {
                out[t] += z * amp;
            }
        }
        out
    }

    /// Apply `ops[0] ops[1] ⋯ ops[m-1]` to `v` (rightmost first).
    pub fn apply_product(&self, ops: &[Ladder], v: &CVec) -> CVec {
        let mut w = v.clone();
        for &op in ops.iter().rev() {
            w = self.apply(op, &w);
        }
        w
    }

    /// Left-multiply every column of `m` by a ladder operator.
    pub fn apply_to_columns(&self, op: Ladder, m: &CMat) -> CMat {
        let mut out = CMat::zeros(m.nrows(), m.ncols());
        for j in 0..m.nrows() {
            if let Some((t, amp)) = self.ladder_image(op, j) {
                let row = m.row(j) * cr(amp);
                let mut target = out.row_mut(t);
                target += row;
            }
        }
        out
    }

    pub fn ladder_matrix(&self, op: Ladder) -> CMat {
        let d = self.dim();
        let mut m = CMat::zeros(d, d);
        for j in 0..d {
            if let Some((t, amp)) = self.ladder_image(op, j) {
                m[(t, j)] = cr(amp);
            }
        }
        m
    }

    /// Dense matrix of an operator product `ops[0] ⋯ ops[m-1]`.
    pub fn product_matrix(&self, ops: &[Ladder]) -> CMat {
        let mut m = CMat::identity(self.dim(), self.dim());
        for &op in ops.iter().rev() {
            m = self.apply_to_columns(op, &m);
        }
        m
    }

    /// Total occupation mass of a density matrix strictly above `level`.
    pub fn mass_above(&self, rho: &CMat, level: usize) -> f64 {
        (0..self.dim())
            .filter(|&j| self.total(j) > level)
            .map(|j| rho[(j, j)].re)
            .sum()
    }

    /// Same as [`mass_above`](Self::mass_above) for a vector.
    pub fn vector_mass_above(&self, v: &CVec, level: usize) -> f64 {
        (0..self.dim())
            .filter(|&j| self.total(j) > level)
            .map(|j| v[j].norm_sqr())
            .sum()
    }

    /// `Err(CutoffUnsafe)` when a boson density matrix has more than
    /// `threshold` weight above `cutoff - margin`. Always `Ok` for fermions.
    pub fn guard_cutoff(&self, rho: &CMat, margin: usize, threshold: f64) -> Result<()> {
        if self.statistics == Statistics::Fermion {
            return Ok(());
        }
        let level = self.cutoff.saturating_sub(margin);
        let mass = self.mass_above(rho, level);
        if mass > threshold {
            return Err(QfError::CutoffUnsafe { mass, level, threshold });
        }
        Ok(())
    }
}

/// A vector in a truncated Fock space.
#[derive(Clone, Debug)]
pub struct FockVector {
    pub space: ModeSpace,
    pub amplitudes: CVec,
}

/// A dense operator on a truncated Fock space.
#[derive(Clone, Debug)]
pub struct FockOperator {
    pub space: ModeSpace,
    pub matrix: CMat,
}

impl FockVector {
    pub fn new(space: &ModeSpace, amplitudes: CVec) -> Result<Self> {
        if amplitudes.len() != space.dim() {
            return Err(QfError::Shape(format!(
                "vector of length {} in a space of dimension {}",
                amplitudes.len(),
                space.dim()
            )));
        }
        Ok(FockVector { space: space.clone(), amplitudes })
    }

    pub fn basis(space: &ModeSpace, occupation: &[u8]) -> Result<Self> {
        let j = space
            .index_of(occupation)
            .ok_or_else(|| QfError::InvalidArgument(format!("occupation {occupation:?} not in basis")))?;
        let mut v = CVec::zeros(space.dim());
        v[j] = linalg::ONE;
        Ok(FockVector { space: space.clone(), amplitudes: v })
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.norm()
    }

    pub fn normalized(&self) -> Self {
        FockVector { space: self.space.clone(), amplitudes: self.amplitudes.normalize() }
    }

    pub fn density_matrix(&self) -> FockOperator {
        FockOperator {
            space: self.space.clone(),
            matrix: &self.amplitudes * self.amplitudes.adjoint(),
        }
    }
}

impl FockOperator {
    pub fn new(space: &ModeSpace, matrix: CMat) -> Result<Self> {
        if matrix.nrows() != space.dim() || matrix.ncols() != space.dim() {
            return Err(QfError::Shape(format!(
                "{}x{} matrix in a space of dimension {}",
                matrix.nrows(),
                matrix.ncols(),
                space.dim()
            )));
        }
        Ok(FockOperator { space: space.clone(), matrix })
    }

    pub fn identity(space: &ModeSpace) -> Self {
        FockOperator { space: space.clone(), matrix: CMat::identity(space.dim(), space.dim()) }
    }

    pub fn adjoint(&self) -> Self {
        FockOperator { space: self.space.clone(), matrix: self.matrix.adjoint() }
    }

    pub fn trace(&self) -> Complex64 {
        self.matrix.trace()
    }

    /// Check that this is a density matrix: Hermitian, unit trace and PSD
    /// with the eigenvalue floor `-1e-9 × spectral radius`.
    pub fn validate_density(&self, tol: f64) -> Result<()> {
        let herm = linalg::hermiticity_residual(&self.matrix);
        if herm > tol {
            return Err(QfError::NotADensityMatrix(format!("hermiticity residual {herm:.3e}")));
        }
        let tr = self.matrix.trace();
        if (tr - linalg::ONE).norm() > tol {
            return Err(QfError::NotADensityMatrix(format!("trace {:.12}{:+.3e}i", tr.re, tr.im)));
        }
        let ev = linalg::eigvalsh(&self.matrix);
        let radius = ev.iter().fold(0.0_f64, |a, &x| a.max(x.abs()));
        let floor = -1e-9 * radius.max(1.0);
        if let Some(&lo) = ev.first() {
            if lo < floor {
                return Err(QfError::NotADensityMatrix(format!("eigenvalue {lo:.3e} below {floor:.1e}")));
            }
        }
        Ok(())
    }
}

pub fn annihilator(space: &ModeSpace, k: usize) -> Result<FockOperator> {
    space.check_mode(k)?;
    Ok(FockOperator { space: space.clone(), matrix: space.ladder_matrix(Ladder::annihilate(k)) })
}

pub fn creator(space: &ModeSpace, k: usize) -> Result<FockOperator> {
    space.check_mode(k)?;
    Ok(FockOperator { space: space.clone(), matrix: space.ladder_matrix(Ladder::create(k)) })
}

pub fn number_operator(space: &ModeSpace) -> FockOperator {
    let diag = CVec::from_iterator(space.dim(), (0..space.dim()).map(|j| cr(space.total(j) as f64)));
    FockOperator { space: space.clone(), matrix: CMat::from_diagonal(&diag) }
}

pub fn vacuum(space: &ModeSpace) -> FockVector {
    let mut v = CVec::zeros(space.dim());
    v[0] = linalg::ONE;
    FockVector { space: space.clone(), amplitudes: v }
}

/// `tr(ρ A)` after checking that `ρ` is a density matrix.
pub fn expectation(rho: &FockOperator, obs: &FockOperator) -> Result<Complex64> {
    if rho.space != obs.space {
        return Err(QfError::Shape("state and observable live in different spaces".into()));
    }
    rho.validate_density(1e-8)?;
    Ok((&rho.matrix * &obs.matrix).trace())
}

/// Truncated-space CAR/CCR residuals, used by the algebra checks.
pub mod algebra {
    use super::*;

    /// Max-norm of `{c_j, c*_k} - δ_jk` and `{c_j, c_k}` over all mode pairs.
    pub fn car_residual(space: &ModeSpace) -> f64 {
        let n = space.n_modes();
        let d = space.dim();
        let mut worst = 0.0_f64;
        for j in 0..n {
            let aj = space.ladder_matrix(Ladder::annihilate(j));
            for k in 0..n {
                let ak = space.ladder_matrix(Ladder::annihilate(k));
                let akd = ak.adjoint();
                let mut anti = &aj * &akd + &akd * &aj;
                if j == k {
                    anti -= CMat::identity(d, d);
                }
                let anti2 = &aj * &ak + &ak * &aj;
                worst = worst.max(linalg::max_abs(&anti)).max(linalg::max_abs(&anti2));
            }
        }
        worst
    }

    /// Max-norm of `[a_j, a*_k] - δ_jk` and `[a_j, a_k]` restricted to the
    /// subspace of total occupation `≤ cutoff - 2`.
    pub fn ccr_residual(space: &ModeSpace) -> f64 {
        let n = space.n_modes();
        let d = space.dim();
        let safe = space.dim_up_to(space.cutoff().saturating_sub(2));
        let mut worst = 0.0_f64;
        for j in 0..n {
            let aj = space.ladder_matrix(Ladder::annihilate(j));
            for k in 0..n {
                let ak = space.ladder_matrix(Ladder::annihilate(k));
                let akd = ak.adjoint();
                let mut comm = &aj * &akd - &akd * &aj;
                if j == k {
                    comm -= CMat::identity(d, d);
                }
                let comm2 = &aj * &ak - &ak * &aj;
                let r1 = linalg::max_abs(&comm.view((0, 0), (safe, safe)).into_owned());
                let r2 = linalg::max_abs(&comm2.view((0, 0), (safe, safe)).into_owned());
                worst = worst.max(r1).max(r2);
            }
        }
        worst
    }
}
