//! The generalized 2-pdm `Γ̂` on `𝔥_sim = (⊕⁴ 𝔥⊗𝔥) ⊕ (⊕² 𝔥) ⊕ ℂ` for bosons.
//!
//! A vector `v = (F₁, F₂, F₃, F₄, f₁, f₂, ν)` stands for the polynomial
//! `P(v) = Σ v_x O_x` with coordinate operators
//!
//! ```text
//! block 1: a*_k a*_l   block 2: a*_k a_l   block 3: a_k a*_l   block 4: a_k a_l
//! block 5: a*_k        block 6: a_k        block 7: 1
//! ```
//!
//! and `⟨v, Γ̂ v⟩ = ω(P P*)`, i.e. `Γ̂_xy = ω(O_y O_x*)`. Two constructions are
//! provided: the Gram form (from `ρ = R R*`, `Γ̂ = Zᵀ Z̄` with `Z_x = O_x* R`) and
//! the explicit block formulas in terms of the moment operators
//!
//! ```text
//! Γ_{(kl),(mn)}  = ω(a*_n a*_m a_k a_l)     Λ₁_{(kl),(mn)} = ω(a*_m a*_n a*_l a_k)
//! Λ₂*_{(kl),(mn)} = ω(a*_m a*_n a*_l a*_k)  Δ_{(kl),(mn)}  = ω(a*_m a*_k a_l a_n)
//! A₁_{k,(mn)}  = ω(a*_m a*_n a_k)           A₂*_{k,(mn)}  = ω(a*_m a*_n a*_k)
//! Q₁_{k,(mn)}  = ω(a*_m a_n a_k)            Q₂_{k,(mn)}   = ω(a*_m a_n a*_k)
//! ```
//!
//! with `B = Σ |ii⟩⟨kk|` and `β₁* = Σ |ii⟩`.

use num_complex::Complex64;
use serde::Serialize;

use super::{apply_monomial, exchange_operator, hs_inner, pair_index, state_factor};
use crate::error::{QfError, Result};
use crate::fock::{FockOperator, Ladder, Statistics};
use crate::gaussian::{self, GaussianData};
use crate::linalg::{self, conj, cr, eye, kron, max_abs, CMat, CVec};
use crate::wick::{self, ORACLE_MASS_TOL};

pub const N_BLOCKS: usize = 7;

/// Sizes of the seven blocks for `n` modes.
pub fn block_sizes(n: usize) -> [usize; N_BLOCKS] {
    let n2 = n * n;
    [n2, n2, n2, n2, n, n, 1]
}

/// Offset of block `i` (1-based).
pub fn block_offset(n: usize, i: usize) -> usize {
    block_sizes(n)[..i - 1].iter().sum()
}

pub fn sim_dim(n: usize) -> usize {
    4 * n * n + 2 * n + 1
}

/// Coordinate operators `O_x` in operator order, indexed like `𝔥_sim`.
pub fn coordinate_operators(n: usize) -> Vec<Vec<Ladder>> {
    let (c, a) = (Ladder::create, Ladder::annihilate);
    let mut out = Vec::with_capacity(sim_dim(n));
    type Pair = fn(usize, usize) -> [Ladder; 2];
    let pairs: [Pair; 4] = [
        |k, l| [Ladder::create(k), Ladder::create(l)],
        |k, l| [Ladder::create(k), Ladder::annihilate(l)],
        |k, l| [Ladder::annihilate(k), Ladder::create(l)],
        |k, l| [Ladder::annihilate(k), Ladder::annihilate(l)],
    ];
    for make in pairs {
        for x in 0..n * n {
            out.push(make(x / n, x % n).to_vec());
        }
    }
    out.extend((0..n).map(|k| vec![c(k)]));
    out.extend((0..n).map(|k| vec![a(k)]));
    out.push(Vec::new());
    out
}

/// `(x_1 ⋯ x_m)* = x_m* ⋯ x_1*`.
pub fn adjoint_monomial(mono: &[Ladder]) -> Vec<Ladder> {
    mono.iter().rev().map(|x| x.adjoint()).collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct Gen2Pdm {
    n: usize,
    pub matrix: CMat,
}

impl Gen2Pdm {
    pub fn new(n: usize, matrix: CMat) -> Result<Self> {
        let d = sim_dim(n);
        if matrix.shape() != (d, d) {
            return Err(QfError::Shape(format!("Γ̂ for {n} modes must be {d}×{d}")));
        }
        Ok(Gen2Pdm { n, matrix })
    }

    pub fn n_modes(&self) -> usize {
        self.n
    }

    /// Block `(i, j)`, 1-based, mapping block `j` into block `i`.
    pub fn block(&self, i: usize, j: usize) -> CMat {
        let s = block_sizes(self.n);
        linalg::sub(&self.matrix, block_offset(self.n, i), block_offset(self.n, j), s[i - 1], s[j - 1])
    }

    /// Overwrites block `(i, j)` and its mirror `(j, i)` with the adjoint.
    pub fn set_block(&mut self, i: usize, j: usize, m: &CMat) {
        let (oi, oj) = (block_offset(self.n, i), block_offset(self.n, j));
        self.matrix.view_mut((oi, oj), m.shape()).copy_from(m);
        if i != j {
            self.matrix.view_mut((oj, oi), (m.ncols(), m.nrows())).copy_from(&m.adjoint());
        }
    }

    /// Blocks 5–6: the generalized 1-pdm `γ̃`.
    pub fn gen1pdm_corner(&self) -> CMat {
        let o = block_offset(self.n, 5);
        linalg::sub(&self.matrix, o, o, 2 * self.n, 2 * self.n)
    }

    /// Blocks 5–7: the further generalized 1-pdm `γ̂`.
    pub fn further_corner(&self) -> CMat {
        let o = block_offset(self.n, 5);
        linalg::sub(&self.matrix, o, o, 2 * self.n + 1, 2 * self.n + 1)
    }
}

fn require_boson(rho: &FockOperator) -> Result<()> {
    match rho.space.statistics() {
        Statistics::Boson => Ok(()),
        Statistics::Fermion => Err(QfError::SpeciesMismatch("the generalized 2-pdm is defined for bosons".into())),
    }
}

/// Gram construction `Γ̂_xy = ⟨O_y* R, O_x* R⟩`. Each `O_x*` raises the
/// occupation by at most two, so the guard sits at `cutoff − 2`.
pub fn gen2pdm_gram(rho: &FockOperator) -> Result<Gen2Pdm> {
    require_boson(rho)?;
    rho.space.guard_cutoff(&rho.matrix, 2, ORACLE_MASS_TOL)?;
    let n = rho.space.n_modes();
    let r = state_factor(rho)?;
    let z: Vec<CMat> = coordinate_operators(n)
        .iter()
        .map(|o| apply_monomial(rho, &adjoint_monomial(o), &r))
        .collect();
    let d = z.len();
    let mut m = CMat::zeros(d, d);
    for x in 0..d {
        for y in x..d {
            let v = hs_inner(&z[y], &z[x]);
            m[(x, y)] = v;
            m[(y, x)] = v.conj();
        }
    }
    Gen2Pdm::new(n, m)
}

/// Third and fourth moments entering the block formulas, plus `(γ, α, b)`.
#[derive(Clone, Debug)]
pub struct MomentTable {
    pub gamma2: CMat,
    pub lambda1: CMat,
    pub lambda2_star: CMat,
    pub delta: CMat,
    pub a1: CMat,
    pub a2_star: CMat,
    pub q1: CMat,
    pub q2: CMat,
    pub data: GaussianData,
}

impl MomentTable {
    /// Fills every table from `moment`, keeping the supplied one-body data.
    pub fn build(data: GaussianData, mut moment: impl FnMut(&[Ladder]) -> Result<Complex64>) -> Result<Self> {
        let n = data.n_modes();
        let (c, a) = (Ladder::create, Ladder::annihilate);
        let mut four = |f: &dyn Fn(usize, usize, usize, usize) -> [Ladder; 4]| -> Result<CMat> {
            let mut m = CMat::zeros(n * n, n * n);
            for x in 0..n * n {
                for y in 0..n * n {
                    m[(x, y)] = moment(&f(x / n, x % n, y / n, y % n))?;
                }
            }
            Ok(m)
        };
        let gamma2 = four(&|k, l, m, nn| [c(nn), c(m), a(k), a(l)])?;
        let lambda1 = four(&|k, l, m, nn| [c(m), c(nn), c(l), a(k)])?;
        let lambda2_star = four(&|k, l, m, nn| [c(m), c(nn), c(l), c(k)])?;
        let delta = four(&|k, l, m, nn| [c(m), c(k), a(l), a(nn)])?;
        let mut three = |f: &dyn Fn(usize, usize, usize) -> [Ladder; 3]| -> Result<CMat> {
            let mut out = CMat::zeros(n, n * n);
            for k in 0..n {
                for y in 0..n * n {
                    out[(k, y)] = moment(&f(k, y / n, y % n))?;
                }
            }
            Ok(out)
        };
        let a1 = three(&|k, m, nn| [c(m), c(nn), a(k)])?;
        let a2_star = three(&|k, m, nn| [c(m), c(nn), c(k)])?;
        let q1 = three(&|k, m, nn| [c(m), a(nn), a(k)])?;
        let q2 = three(&|k, m, nn| [c(m), a(nn), c(k)])?;
        Ok(MomentTable { gamma2, lambda1, lambda2_star, delta, a1, a2_star, q1, q2, data })
    }

    /// Moments of `ρ` on the truncated space; guarded at `cutoff − 4`.
    pub fn from_state(rho: &FockOperator) -> Result<Self> {
        require_boson(rho)?;
        rho.space.guard_cutoff(&rho.matrix, 4, ORACLE_MASS_TOL)?;
        let data = gaussian::gaussian_from_density_matrix_with(rho, ORACLE_MASS_TOL)?;
        let r = state_factor(rho)?;
        Self::build(data, |mono| Ok(hs_inner(&r, &apply_monomial(rho, mono, &r))))
    }

    /// Moments of the quasifree state with data `g` from the Wick expansion.
    pub fn from_quasifree(g: &GaussianData) -> Result<Self> {
        if g.statistics != Statistics::Boson {
            return Err(QfError::SpeciesMismatch("the generalized 2-pdm is defined for bosons".into()));
        }
        Self::build(g.clone(), |mono| wick::boson_quasifree_expectation(g, mono))
    }

    pub fn n_modes(&self) -> usize {
        self.data.n_modes()
    }
}

/// Which version of the `Γ̂₂₇` and `Γ̂₄₆` entries to use.
///
/// `Literal` reads them as `(1⊗γ)β₁*` and `Ā₁* + (1+Ex)(1⊗b)β₂*`, which give
/// `γ_lk` and `b` where `ω(O_y O_x*)` has `γ_kl` and `b̄`. The two agree for
/// real `γ` and `b`. `Consistent` uses `(γ⊗1)β₁*` and `(1⊗b̄)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum BlockFormulas {
    Consistent,
    Literal,
}

/// `Γ̂` from the block formulas.
pub fn assemble_from_moments(t: &MomentTable, formulas: BlockFormulas) -> Gen2Pdm {
    let n = t.n_modes();
    let n2 = n * n;
    let (gam, alp, b) = (&t.data.gamma, &t.data.alpha, &t.data.b);
    let id = eye(n);
    let id2 = eye(n2);
    let ex = exchange_operator(n);
    let big_b = CMat::from_fn(n2, n2, |x, y| cr(if x / n == x % n && y / n == y % n { 1.0 } else { 0.0 }));
    let beta1s = CMat::from_fn(n2, 1, |x, _| cr(if x / n == x % n { 1.0 } else { 0.0 }));
    let g1 = kron(gam, &id);
    let g2 = kron(&id, gam);
    let a1x = kron(alp, &id);
    let a2x = kron(&id, alp);
    let lam1s = t.lambda1.adjoint();
    let lam1bar = conj(&t.lambda1);
    let bvec = CMat::from_column_slice(n, 1, b.as_slice());
    let bbar = conj(&bvec);

    // (1+Ex)(1⊗c)β₂*: entry ((k,l), m) = δ_km c_l + δ_lm c_k.
    let sym_outer = |cv: &CMat| {
        CMat::from_fn(n2, n, |x, m| {
            let (k, l) = (x / n, x % n);
            let mut v = cr(0.0);
            if k == m {
                v += cv[(l, 0)];
            }
            if l == m {
                v += cv[(k, 0)];
            }
            v
        })
    };

    let mut g = Gen2Pdm { n, matrix: CMat::zeros(sim_dim(n), sim_dim(n)) };
    g.set_block(1, 1, &t.gamma2);
    g.set_block(1, 2, &lam1s);
    g.set_block(1, 3, &(&lam1s * &ex + &a1x * &big_b));
    g.set_block(1, 4, &t.lambda2_star.adjoint());
    g.set_block(1, 5, &t.a1.adjoint());
    g.set_block(1, 6, &t.a2_star.adjoint());
    g.set_block(1, 7, &(&a1x * &beta1s));
    g.set_block(2, 2, &(&ex * &t.delta + &g1));
    g.set_block(2, 3, &(t.delta.adjoint() + &g1 * (&big_b + &ex)));
    g.set_block(2, 4, &(&ex * &lam1bar + &a1x * (&id2 + &ex)));
    g.set_block(2, 5, &t.q1.adjoint());
    g.set_block(2, 6, &t.q2.adjoint());
    let b27 = match formulas {
        BlockFormulas::Consistent => &g1 * &beta1s,
        BlockFormulas::Literal => &g2 * &beta1s,
    };
    g.set_block(2, 7, &b27);
    g.set_block(3, 3, &(&t.delta * &ex + &g2 * &big_b + &big_b * &g2 + &big_b + &g2));
    g.set_block(3, 4, &(&lam1bar + &a2x * (&id2 + &ex) + &big_b * &a2x));
    g.set_block(3, 5, &(&ex * t.q1.adjoint() + &beta1s * bvec.adjoint()));
    g.set_block(3, 6, &(&ex * t.q2.adjoint() + &beta1s * bbar.adjoint()));
    g.set_block(3, 7, &((&id2 + &g2) * &beta1s));
    let gbar = conj(gam);
    let q44 = &id2 + kron(&gbar, &id) + kron(&id, &gbar);
    g.set_block(4, 4, &(t.gamma2.transpose() + q44 * (&id2 + &ex)));
    g.set_block(4, 5, &conj(&t.a2_star.adjoint()));
    let shift = match formulas {
        BlockFormulas::Consistent => sym_outer(&bbar),
        BlockFormulas::Literal => sym_outer(&bvec),
    };
    g.set_block(4, 6, &(t.a1.transpose() + shift));
    g.set_block(4, 7, &(kron(&alp.adjoint(), &id) * &beta1s));
    g.set_block(5, 5, gam);
    g.set_block(5, 6, alp);
    g.set_block(5, 7, &bvec);
    g.set_block(6, 6, &(&id + &gbar));
    g.set_block(6, 7, &bbar);
    g.set_block(7, 7, &CMat::from_element(1, 1, cr(1.0)));
    g
}

/// `Γ̂` of `ρ` from oracle moments and the block formulas. The one-body
/// blocks are those of the extracted `(γ, α, b)`, so the corner equals
/// `further_gen1pdm` of that data.
pub fn assemble_gen2pdm(rho: &FockOperator) -> Result<Gen2Pdm> {
    Ok(assemble_from_moments(&MomentTable::from_state(rho)?, BlockFormulas::Consistent))
}

/// Largest entrywise difference per block `(i, j)` with `i ≤ j`.
pub fn block_differences(x: &Gen2Pdm, y: &Gen2Pdm) -> Vec<((usize, usize), f64)> {
    let mut out = Vec::new();
    for i in 1..=N_BLOCKS {
        for j in i..=N_BLOCKS {
            out.push(((i, j), max_abs(&(x.block(i, j) - y.block(i, j)))));
        }
    }
    out
}

#[derive(Clone, Debug, Serialize)]
pub struct Gen2PdmPsd {
    pub ok: bool,
    pub min_eig: f64,
    pub scale: f64,
    pub hermitian_residual: f64,
    /// Eigenvector of the most negative eigenvalue, when failing.
    #[serde(with = "crate::json::opt_vec")]
    pub witness: Option<CVec>,
}

/// `min eig Γ̂ ≥ −tol·scale` with `scale = max(1, ‖Γ̂‖_max)`.
pub fn check_gen2pdm_psd(g: &Gen2Pdm, tol: f64) -> Gen2PdmPsd {
    let scale = max_abs(&g.matrix).max(1.0);
    let (vals, vecs) = linalg::eigh(&g.matrix);
    let min_eig = vals.first().copied().unwrap_or(0.0);
    let ok = min_eig >= -tol * scale;
    Gen2PdmPsd {
        ok,
        min_eig,
        scale,
        hermitian_residual: linalg::hermiticity_residual(&g.matrix),
        witness: (!ok).then(|| vecs.column(0).into_owned()),
    }
}

/// Index of coordinate `(block, k, l)`; `l` is ignored for blocks 5–7.
pub fn coordinate_index(n: usize, block: usize, k: usize, l: usize) -> usize {
    match block {
        1..=4 => block_offset(n, block) + pair_index(k, l, n),
        5 | 6 => block_offset(n, block) + k,
        _ => block_offset(n, 7),
    }
}
