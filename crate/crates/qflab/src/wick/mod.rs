//! Quasifree expectations of ladder monomials, and the brute-force Fock
//! oracle they are checked against.
//!
//! Fermions use the Pfaffian of the pairwise contraction matrix in operator
//! order. Bosons expand over all partitions of the factor positions into
//! singletons (first moments) and ordered pairs (centered contractions).

pub mod parse;
pub mod pfaffian;

use num_complex::Complex64;

pub use parse::{parse, Factor, LadderPolynomial, Term};
pub use pfaffian::pfaffian;

use crate::error::{QfError, Result};
use crate::fock::{FockOperator, Ladder, Statistics};
use crate::gaussian::GaussianData;
use crate::linalg::{CMat, CVec, ZERO};

/// Default weight of `ρ` allowed where a monomial could push past the cutoff.
pub const ORACLE_MASS_TOL: f64 = 1e-10;

/// Two-point and one-point values of a quasifree state.
#[derive(Clone, Debug)]
pub struct ContractionTable {
    statistics: Statistics,
    gamma0: CMat,
    alpha0: CMat,
    b: CVec,
}

impl ContractionTable {
    /// Pair values are those of the recentered data `γ − |b⟩⟨b|`, `α − b bᵀ`.
    pub fn new(g: &GaussianData) -> Self {
        let bb_star = &g.b * g.b.adjoint();
        let bb_t = &g.b * g.b.transpose();
        ContractionTable {
            statistics: g.statistics,
            gamma0: &g.gamma - bb_star,
            alpha0: &g.alpha - bb_t,
            b: g.b.clone(),
        }
    }

    pub fn n_modes(&self) -> usize {
        self.b.len()
    }

    /// `ω(x_1 ⋯ x_m)`; modes must be in range.
    pub fn expectation(&self, mono: &[Ladder]) -> Complex64 {
        match self.statistics {
            Statistics::Boson => boson_with(self, mono),
            Statistics::Fermion => fermion_with(self, mono),
        }
    }

    /// `ω(x)`.
    pub fn mean(&self, x: Ladder) -> Complex64 {
        if x.dagger {
            self.b[x.mode].conj()
        } else {
            self.b[x.mode]
        }
    }

    /// Centered `ω(x y)`.
    pub fn pair(&self, x: Ladder, y: Ladder) -> Complex64 {
        let (p, q) = (x.mode, y.mode);
        let delta = if p == q { 1.0 } else { 0.0 };
        match (x.dagger, y.dagger) {
            (true, false) => self.gamma0[(q, p)],
            (false, true) => match self.statistics {
                Statistics::Boson => self.gamma0[(p, q)] + delta,
                Statistics::Fermion => Complex64::new(delta, 0.0) - self.gamma0[(p, q)],
            },
            (false, false) => self.alpha0[(q, p)],
            (true, true) => self.alpha0[(p, q)].conj(),
        }
    }
}

fn check_modes(n: usize, mono: &[Ladder]) -> Result<()> {
    match mono.iter().find(|x| x.mode >= n) {
        Some(x) => Err(QfError::InvalidArgument(format!("mode {} outside 1..={n}", x.mode + 1))),
        None => Ok(()),
    }
}

/// Pfaffian evaluation of `ω(e_1 ⋯ e_m)` for fermion quasifree data.
pub fn fermion_quasifree_expectation(g: &GaussianData, mono: &[Ladder]) -> Result<Complex64> {
    if g.statistics != Statistics::Fermion {
        return Err(QfError::SpeciesMismatch("fermion Wick evaluation on boson data".into()));
    }
    check_modes(g.n_modes(), mono)?;
    Ok(fermion_with(&ContractionTable::new(g), mono))
}

fn fermion_with(table: &ContractionTable, mono: &[Ladder]) -> Complex64 {
    let m = mono.len();
    if m % 2 == 1 {
        return ZERO;
    }
    let mut mat = CMat::zeros(m, m);
    for i in 0..m {
        for j in i + 1..m {
            let w = table.pair(mono[i], mono[j]);
            mat[(i, j)] = w;
            mat[(j, i)] = -w;
        }
    }
    pfaffian(&mat).expect("contraction matrix is antisymmetric by construction")
}

/// Gaussian expansion with means for boson quasifree data.
pub fn boson_quasifree_expectation(g: &GaussianData, mono: &[Ladder]) -> Result<Complex64> {
    if g.statistics != Statistics::Boson {
        return Err(QfError::SpeciesMismatch("boson Wick evaluation on fermion data".into()));
    }
    check_modes(g.n_modes(), mono)?;
    Ok(boson_with(&ContractionTable::new(g), mono))
}

fn boson_with(table: &ContractionTable, mono: &[Ladder]) -> Complex64 {
    let Some((&head, rest)) = mono.split_first() else {
        return Complex64::new(1.0, 0.0);
    };
    let mut acc = ZERO;
    let mu = table.mean(head);
    if mu != ZERO {
        acc += mu * boson_with(table, rest);
    }
    let mut tail = Vec::with_capacity(rest.len().saturating_sub(1));
    for j in 0..rest.len() {
        let w = table.pair(head, rest[j]);
        if w == ZERO {
            continue;
        }
        tail.clear();
        tail.extend_from_slice(&rest[..j]);
        tail.extend_from_slice(&rest[j + 1..]);
        acc += w * boson_with(table, &tail);
    }
    acc
}

pub fn quasifree_expectation(g: &GaussianData, mono: &[Ladder]) -> Result<Complex64> {
    match g.statistics {
        Statistics::Boson => boson_quasifree_expectation(g, mono),
        Statistics::Fermion => fermion_quasifree_expectation(g, mono),
    }
}

fn check_letters(p: &LadderPolynomial, statistics: Statistics) -> Result<()> {
    match p.statistics()? {
        Some(s) if s != statistics => Err(QfError::SpeciesMismatch(format!(
            "polynomial uses {s} operators but the state is {statistics}"
        ))),
        _ => Ok(()),
    }
}

/// `Σ coeff · ω(monomial)` for quasifree data.
pub fn polynomial_expectation(g: &GaussianData, p: &LadderPolynomial) -> Result<Complex64> {
    check_letters(p, g.statistics)?;
    let table = ContractionTable::new(g);
    let mut acc = ZERO;
    for t in &p.terms {
        let mono = t.ladders();
        check_modes(g.n_modes(), &mono)?;
        acc += t.coeff
            * match g.statistics {
                Statistics::Boson => boson_with(&table, &mono),
                Statistics::Fermion => fermion_with(&table, &mono),
            };
    }
    Ok(acc)
}

/// Largest occupation increase met while applying `mono` right to left.
pub fn max_raise(mono: &[Ladder]) -> usize {
    let (mut level, mut top) = (0i64, 0i64);
    for x in mono.iter().rev() {
        level += if x.dagger { 1 } else { -1 };
        top = top.max(level);
    }
    top as usize
}

/// `tr(ρ x_1 ⋯ x_m)` by sparse application on the truncated space.
pub fn oracle_monomial(rho: &FockOperator, mono: &[Ladder], mass_tol: f64) -> Result<Complex64> {
    let space = &rho.space;
    check_modes(space.n_modes(), mono)?;
    if space.statistics() == Statistics::Boson {
        let raise = max_raise(mono);
        let level = space.cutoff().checked_sub(raise).ok_or(QfError::CutoffUnsafe {
            mass: 1.0,
            level: 0,
            threshold: mass_tol,
        })?;
        let mass = space.mass_above(&rho.matrix, level);
        if mass > mass_tol {
            return Err(QfError::CutoffUnsafe { mass, level, threshold: mass_tol });
        }
    }
    let mut m = rho.matrix.clone();
    for &x in mono.iter().rev() {
        m = space.apply_to_columns(x, &m);
    }
    Ok(m.trace())
}

/// Brute-force `tr(ρ P)`; validates `ρ` once.
pub fn oracle_expectation(rho: &FockOperator, p: &LadderPolynomial) -> Result<Complex64> {
    oracle_expectation_with(rho, p, ORACLE_MASS_TOL)
}

pub fn oracle_expectation_with(rho: &FockOperator, p: &LadderPolynomial, mass_tol: f64) -> Result<Complex64> {
    rho.validate_density(1e-8)?;
    check_letters(p, rho.space.statistics())?;
    let mut acc = ZERO;
    for t in &p.terms {
        acc += t.coeff * oracle_monomial(rho, &t.ladders(), mass_tol)?;
    }
    Ok(acc)
}
