//! Bogoliubov maps, their Fock-space implementation, Weyl operators and
//! second quantization.
//!
//! A map `U = [[u, v], [v̄, ū]]` acts on `F = f ⊕ g` through the field
//! operator `A(F) = Σ f_i a*_i + g_i a_i`, and its implementation satisfies
//! `𝕌 A(F) 𝕌* = A(UF)`.
//!
//! The implementation is `𝕌 = exp(−iQ)` with the quadratic generator
//! `Q = Σ A_ij a*_i a_j + ½ Σ (B_ij a*_i a*_j + h.c.)`. Its one-particle flow
//! is `U = exp(−iK)` with
//!
//! ```text
//! bosons   (B = Bᵀ):  K = [[A, −B], [B̄, −Ā]]
//! fermions (B = −Bᵀ): K = [[A,  B], [−B̄, −Ā]]
//! ```
//!
//! so `(A, B)` is read off the principal logarithm `K = i log U`.

use num_complex::Complex64;
use rand::Rng;
use serde::Serialize;

use crate::error::{QfError, Result};
use crate::fock::{FockOperator, Ladder, ModeSpace, Statistics};
use crate::gaussian::{self, s_matrix, GaussianData};
use crate::linalg::{
    self, block, c, conj, cr, eye, max_abs, spectral_norm, sub, zeros, CMat, CVec, ONE, ZERO,
};

/// Relation residual above which a map is rejected.
pub const RELATION_TOL: f64 = 1e-10;
/// Default extra occupation levels used when exponentiating boson generators.
pub const DEFAULT_PAD: usize = 16;
/// Default weight of the transformed vacuum allowed above `cutoff - 2`.
pub const IMPLEMENT_MASS_TOL: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq)]
pub struct BogoliubovMap {
    pub u: CMat,
    pub v: CMat,
    pub statistics: Statistics,
}

#[derive(Clone, Debug, Serialize)]
pub struct RelationReport {
    /// `uu* ∓ vv* − 1`
    pub r1: f64,
    /// `u*u ∓ vᵀv̄ − 1`
    pub r2: f64,
    /// `u*v ∓ vᵀū`
    pub r3: f64,
    /// `uvᵀ ∓ vuᵀ`
    pub r4: f64,
    /// `U*SU − S` for bosons, `U*U − 1` for fermions.
    pub aggregate: f64,
    pub max: f64,
}

impl BogoliubovMap {
    pub fn new(u: CMat, v: CMat, statistics: Statistics) -> Result<Self> {
        if u.shape() != v.shape() || u.nrows() != u.ncols() {
            return Err(QfError::Shape("u and v must be square of equal size".into()));
        }
        Ok(BogoliubovMap { u, v, statistics })
    }

    pub fn identity(n: usize, statistics: Statistics) -> Self {
        BogoliubovMap { u: eye(n), v: zeros(n, n), statistics }
    }

    pub fn n_modes(&self) -> usize {
        self.u.nrows()
    }

    /// `[[u, v], [v̄, ū]]`.
    pub fn block(&self) -> CMat {
        block(&[&[&self.u, &self.v], &[&conj(&self.v), &conj(&self.u)]])
    }

    pub fn from_block(m: &CMat, statistics: Statistics) -> Result<Self> {
        if m.nrows() != m.ncols() || !m.nrows().is_multiple_of(2) {
            return Err(QfError::Shape("Bogoliubov block must be 2n x 2n".into()));
        }
        let n = m.nrows() / 2;
        Ok(BogoliubovMap { u: sub(m, 0, 0, n, n), v: sub(m, 0, n, n, n), statistics })
    }

    /// `self ∘ other` as block matrices.
    pub fn compose(&self, other: &BogoliubovMap) -> Result<Self> {
        if self.statistics != other.statistics {
            return Err(QfError::SpeciesMismatch("composing maps of different statistics".into()));
        }
        BogoliubovMap::from_block(&(self.block() * other.block()), self.statistics)
    }

    /// `U = exp(−iK)` from generator data `(A, B)`.
    pub fn from_generator(a: &CMat, b: &CMat, statistics: Statistics) -> Result<Self> {
        let k = generator_block(a, b, statistics)?;
        BogoliubovMap::from_block(&linalg::expm(&(k * c(0.0, -1.0))), statistics)
    }
}

/// `K` from `(A, B)`; `A` is Hermitized and `B` (anti)symmetrized.
pub fn generator_block(a: &CMat, b: &CMat, statistics: Statistics) -> Result<CMat> {
    let n = a.nrows();
    if a.shape() != (n, n) || b.shape() != (n, n) {
        return Err(QfError::Shape("generator blocks must be n x n".into()));
    }
    let a = linalg::hermitian_part(a);
    let minus_abar = -conj(&a);
    Ok(match statistics {
        Statistics::Boson => {
            let b = (b + b.transpose()) * cr(0.5);
            block(&[&[&a, &(-&b)], &[&conj(&b), &minus_abar]])
        }
        Statistics::Fermion => {
            let b = (b - b.transpose()) * cr(0.5);
            block(&[&[&a, &b], &[&(-conj(&b)), &minus_abar]])
        }
    })
}

/// Recover `(A, B)` with `U = exp(−iK(A, B))` from the principal logarithm.
pub fn to_generator(map: &BogoliubovMap) -> Result<(CMat, CMat)> {
    let n = map.n_modes();
    let k = linalg::logm(&map.block())? * c(0.0, 1.0);
    let structured = match map.statistics {
        Statistics::Boson => &s_matrix(n) * &k,
        Statistics::Fermion => k.clone(),
    };
    let drift = linalg::hermiticity_residual(&structured);
    if drift > 1e-8 * max_abs(&k).max(1.0) {
        return Err(QfError::BranchAmbiguity(format!(
            "principal logarithm leaves the generator algebra (residual {drift:.3e}); \
             the map is not reachable by a single exponential"
        )));
    }
    let k11 = sub(&k, 0, 0, n, n);
    let k12 = sub(&k, 0, n, n, n);
    let k21 = sub(&k, n, 0, n, n);
    let k22 = sub(&k, n, n, n, n);
    let a = linalg::hermitian_part(&((&k11 - conj(&k22)) * cr(0.5)));
    let b = match map.statistics {
        Statistics::Boson => {
            let b = (conj(&k21) - &k12) * cr(0.5);
            (&b + b.transpose()) * cr(0.5)
        }
        Statistics::Fermion => {
            let b = (&k12 - conj(&k21)) * cr(0.5);
            (&b - b.transpose()) * cr(0.5)
        }
    };
    Ok((a, b))
}

pub fn verify_relations(map: &BogoliubovMap) -> RelationReport {
    let n = map.n_modes();
    let (u, v) = (&map.u, &map.v);
    let sg = cr(-map.statistics.sign()); // −1 bosons, +1 fermions
    let one = eye(n);
    let r1 = max_abs(&(u * u.adjoint() + v * v.adjoint() * sg - &one));
    let r2 = max_abs(&(u.adjoint() * u + v.transpose() * conj(v) * sg - &one));
    let r3 = max_abs(&(u.adjoint() * v + v.transpose() * conj(u) * sg));
    let r4 = max_abs(&(u * v.transpose() + v * u.transpose() * sg));
    let m = map.block();
    let aggregate = match map.statistics {
        Statistics::Boson => {
            let s = s_matrix(n);
            max_abs(&(m.adjoint() * &s * &m - s))
        }
        Statistics::Fermion => max_abs(&(m.adjoint() * &m - eye(2 * n))),
    };
    let max = r1.max(r2).max(r3).max(r4).max(aggregate);
    RelationReport { r1, r2, r3, r4, aggregate, max }
}

/// `S U* S` for bosons, `U*` for fermions.
pub fn inverse(map: &BogoliubovMap) -> BogoliubovMap {
    match map.statistics {
        Statistics::Boson => BogoliubovMap {
            u: map.u.adjoint(),
            v: -map.v.transpose(),
            statistics: Statistics::Boson,
        },
        Statistics::Fermion => BogoliubovMap {
            u: map.u.adjoint(),
            v: map.v.transpose(),
            statistics: Statistics::Fermion,
        },
    }
}

/// Generalized 1-pdm of `𝕌 ρ 𝕌*` given that of `ρ`: `(U⁻¹)* γ̃ U⁻¹`.
pub fn push_forward_gen1pdm(gt: &CMat, map: &BogoliubovMap) -> Result<CMat> {
    gaussian::conjugate_gen1pdm(gt, &inverse(map))
}

/// Sparse Fock operator as `(row, col, value)` triplets.
#[derive(Clone, Debug, Default)]
pub struct SparseOperator {
    pub dim: usize,
    pub entries: Vec<(usize, usize, Complex64)>,
}

impl SparseOperator {
    pub fn new(dim: usize) -> Self {
        SparseOperator { dim, entries: Vec::new() }
    }

    /// Add `coeff · ops[0]⋯ops[m-1]`.
    pub fn add_product(&mut self, space: &ModeSpace, ops: &[Ladder], coeff: Complex64) {
        if coeff == ZERO {
            return;
        }
        'cols: for j in 0..space.dim() {
            let mut idx = j;
            let mut amp = 1.0;
            for &op in ops.iter().rev() {
                match space.ladder_image(op, idx) {
                    Some((t, a)) => {
                        idx = t;
                        amp *= a;
                    }
                    None => continue 'cols,
                }
            }
            self.entries.push((idx, j, coeff * amp));
        }
    }

    pub fn apply(&self, x: &CVec) -> CVec {
        let mut y = CVec::zeros(self.dim);
        for &(r, c, v) in &self.entries {
            y[r] += v * x[c];
        }
        y
    }

    pub fn to_dense(&self) -> CMat {
        let mut m = CMat::zeros(self.dim, self.dim);
        for &(r, c, v) in &self.entries {
            m[(r, c)] += v;
        }
        m
    }

    /// Maximum absolute column sum.
    pub fn norm1(&self) -> f64 {
        let mut cols = vec![0.0; self.dim];
        for &(_, c, v) in &self.entries {
            cols[c] += v.norm();
        }
        cols.into_iter().fold(0.0, f64::max)
    }

    /// `exp(−iH) x` for Hermitian `H = self`, by Taylor steps of norm ≤ ½.
    pub fn expm_i_apply(&self, x: &CVec) -> CVec {
        let steps = (2.0 * self.norm1()).ceil().max(1.0) as usize;
        let h = 1.0 / steps as f64;
        let mut v = x.clone();
        for _ in 0..steps {
            let mut term = v.clone();
            let mut sum = v.clone();
            for k in 1..60 {
                term = self.apply(&term) * c(0.0, -h / k as f64);
                sum += &term;
                if term.norm() <= 1e-18 * sum.norm() {
                    break;
                }
            }
            v = sum;
        }
        v
    }
}

/// Sparse `Q = Σ A_ij a*_i a_j + ½ Σ (B_ij a*_i a*_j + B̄_ij a_j a_i)`.
pub fn quadratic_generator_sparse(space: &ModeSpace, a: &CMat, b: &CMat) -> SparseOperator {
    let n = space.n_modes();
    let mut q = SparseOperator::new(space.dim());
    for i in 0..n {
        for j in 0..n {
            q.add_product(space, &[Ladder::create(i), Ladder::annihilate(j)], a[(i, j)]);
            q.add_product(space, &[Ladder::create(i), Ladder::create(j)], b[(i, j)] * 0.5);
            q.add_product(space, &[Ladder::annihilate(j), Ladder::annihilate(i)], b[(i, j)].conj() * 0.5);
        }
    }
    q
}

/// Dense Fock matrix of the quadratic generator.
pub fn quadratic_generator(space: &ModeSpace, a: &CMat, b: &CMat) -> CMat {
    quadratic_generator_sparse(space, a, b).to_dense()
}

#[derive(Clone, Copy, Debug)]
pub struct ImplementOptions {
    /// Extra boson occupation levels used while building `𝕌`.
    pub pad: usize,
    /// Allowed weight of `𝕌Ω` above `cutoff − 2` (bosons).
    pub mass_tol: f64,
}

impl Default for ImplementOptions {
    fn default() -> Self {
        ImplementOptions { pad: DEFAULT_PAD, mass_tol: IMPLEMENT_MASS_TOL }
    }
}

/// Unitary implementation `𝕌` of a Bogoliubov map on `space`, phase-fixed so
/// that `⟨Ω, 𝕌Ω⟩ ≥ 0` whenever it is nonzero.
pub fn implement_unitary(map: &BogoliubovMap, space: &ModeSpace) -> Result<FockOperator> {
    implement_unitary_with(map, space, ImplementOptions::default())
}

/// As [`implement_unitary`].
///
/// `𝕌Ω = exp(−iQ)Ω` is computed on a space padded by `opts.pad` levels, and
/// the remaining columns follow from `𝕌 a*_k 𝕌* = Σ_i u_ik a*_i + v̄_ik a_i`:
/// `𝕌|n⟩ = Π_k (𝕌 a*_k 𝕌*)^{n_k} 𝕌Ω / √(n_k!)`. The result is the
/// compression of that matrix to `space`.
pub fn implement_unitary_with(map: &BogoliubovMap, space: &ModeSpace, opts: ImplementOptions) -> Result<FockOperator> {
    if map.statistics != space.statistics() {
        return Err(QfError::SpeciesMismatch("map and space statistics differ".into()));
    }
    if map.n_modes() != space.n_modes() {
        return Err(QfError::Shape("map and space mode counts differ".into()));
    }
    let rel = verify_relations(map);
    if rel.max > RELATION_TOL {
        return Err(QfError::InvalidBogoliubov { residual: rel.max });
    }
    let (a, b) = to_generator(map)?;
    let work = space.padded(opts.pad)?;
    let q = quadratic_generator_sparse(&work, &a, &b);
    let mut omega = CVec::zeros(work.dim());
    omega[0] = ONE;
    let mut psi = q.expm_i_apply(&omega);
    if space.statistics() == Statistics::Boson {
        let level = space.cutoff().saturating_sub(2);
        let mass = work.vector_mass_above(&psi, level);
        if mass > opts.mass_tol {
            return Err(QfError::CutoffUnsafe { mass, level, threshold: opts.mass_tol });
        }
    }
    let z = psi[0];
    if z.norm() > 1e-12 {
        psi *= z.conj() / z.norm();
    }
    let n = space.n_modes();
    let vbar = conj(&map.v);
    let mut raised = Vec::with_capacity(n);
    for k in 0..n {
        let mut op = SparseOperator::new(work.dim());
        for i in 0..n {
            op.add_product(&work, &[Ladder::create(i)], map.u[(i, k)]);
            op.add_product(&work, &[Ladder::annihilate(i)], vbar[(i, k)]);
        }
        raised.push(op);
    }
    let d = space.dim();
    let mut cols: Vec<CVec> = Vec::with_capacity(d);
    for j in 0..d {
        if j == 0 {
            cols.push(psi.clone());
            continue;
        }
        // |n⟩ = a*_k |n − e_k⟩ / √n_k with k the lowest occupied mode; this
        // carries no Jordan–Wigner sign.
        let occ = space.occupation(j);
        let k = occ.iter().position(|&x| x > 0).expect("non-vacuum basis state");
        let mut prev = occ.to_vec();
        prev[k] -= 1;
        let p = space.index_of(&prev).expect("graded basis contains the lowered state");
        let col = raised[k].apply(&cols[p]) / cr((occ[k] as f64).sqrt());
        cols.push(col);
    }
    let m = CMat::from_fn(d, d, |r, j| cols[j][r]);
    Ok(FockOperator { space: space.clone(), matrix: m })
}

/// Field operator `A(f ⊕ g) = Σ f_i a*_i + g_i a_i` as a Fock matrix.
pub fn field_operator(space: &ModeSpace, f: &CVec, g: &CVec) -> CMat {
    let mut m = SparseOperator::new(space.dim());
    for i in 0..space.n_modes() {
        m.add_product(space, &[Ladder::create(i)], f[i]);
        m.add_product(space, &[Ladder::annihilate(i)], g[i]);
    }
    m.to_dense()
}

fn laguerre(n: usize, alpha: usize, x: f64) -> f64 {
    let a = alpha as f64;
    let mut prev = 1.0;
    if n == 0 {
        return prev;
    }
    let mut cur = 1.0 + a - x;
    for k in 1..n {
        let kf = k as f64;
        let next = ((2.0 * kf + 1.0 + a - x) * cur - (kf + a) * prev) / (kf + 1.0);
        prev = cur;
        cur = next;
    }
    cur
}

/// `⟨m| exp(β a* − β̄ a) |n⟩` for `m, n ≤ kmax` (untruncated matrix elements).
fn displacement_table(beta: Complex64, kmax: usize) -> Vec<Vec<Complex64>> {
    let x = beta.norm_sqr();
    let pre = (-0.5 * x).exp();
    let mut t = vec![vec![ZERO; kmax + 1]; kmax + 1];
    for (m, row) in t.iter_mut().enumerate() {
        for (n, entry) in row.iter_mut().enumerate() {
            let (lo, hi) = (m.min(n), m.max(n));
            // sqrt(lo!/hi!)
            let ratio = (lo + 1..=hi).fold(1.0, |acc, k| acc / (k as f64).sqrt());
            let l = laguerre(lo, hi - lo, x);
            let power = if m >= n { beta.powu((m - n) as u32) } else { (-beta.conj()).powu((n - m) as u32) };
            *entry = power * (pre * ratio * l);
        }
    }
    t
}

/// `exp(Σ β_k a*_k − β̄_k a_k)` compressed onto `space` (exact matrix elements).
fn displacement_matrix(space: &ModeSpace, beta: &CVec) -> CMat {
    let n = space.n_modes();
    let k = space.cutoff();
    let tables: Vec<_> = (0..n).map(|i| displacement_table(beta[i], k)).collect();
    let d = space.dim();
    CMat::from_fn(d, d, |r, col| {
        let (or, oc) = (space.occupation(r), space.occupation(col));
        (0..n).fold(ONE, |acc, i| acc * tables[i][or[i] as usize][oc[i] as usize])
    })
}

fn check_displacement_safe(space: &ModeSpace, m: &CMat, mass_tol: f64) -> Result<()> {
    let level = space.cutoff().saturating_sub(2);
    let col0 = m.column(0);
    let kept: f64 = (0..space.dim()).filter(|&j| space.total(j) <= level).map(|j| col0[j].norm_sqr()).sum();
    let mass = 1.0 - kept;
    if mass > mass_tol {
        return Err(QfError::CutoffUnsafe { mass, level, threshold: mass_tol });
    }
    Ok(())
}

/// `𝕎(f) = exp(iΦ(f))` with `Φ(f) = (a*(f) + a(f)) / √2`.
pub fn weyl_operator(f: &CVec, space: &ModeSpace) -> Result<FockOperator> {
    weyl_operator_with(f, space, IMPLEMENT_MASS_TOL)
}

pub fn weyl_operator_with(f: &CVec, space: &ModeSpace, mass_tol: f64) -> Result<FockOperator> {
    if space.statistics() != Statistics::Boson {
        return Err(QfError::SpeciesMismatch("Weyl operators act on boson spaces".into()));
    }
    if f.len() != space.n_modes() {
        return Err(QfError::Shape("displacement length differs from the mode count".into()));
    }
    // iΦ(f) = Σ β_k a*_k − β̄_k a_k with β = i f / √2.
    let beta = f.map(|z| z * c(0.0, std::f64::consts::FRAC_1_SQRT_2));
    let m = displacement_matrix(space, &beta);
    check_displacement_safe(space, &m, mass_tol)?;
    Ok(FockOperator { space: space.clone(), matrix: m })
}

/// Weyl transformation `𝕎_g = 𝕎(i√2 g)`, so that `𝕎_g a*(f) 𝕎_g* = a*(f) + ⟨g, f⟩`.
pub fn weyl_transformation(g: &CVec, space: &ModeSpace) -> Result<FockOperator> {
    weyl_operator(&(g * c(0.0, std::f64::consts::SQRT_2)), space)
}

/// Second quantization `Γ(C) = ⊕ C^{⊗N}` on the truncated space.
pub fn second_quantize(cmat: &CMat, space: &ModeSpace) -> Result<FockOperator> {
    let n = space.n_modes();
    if cmat.shape() != (n, n) {
        return Err(QfError::Shape("C must be n x n".into()));
    }
    if space.statistics() == Statistics::Boson {
        let nrm = spectral_norm(cmat);
        if nrm > 1.0 + 1e-12 {
            return Err(QfError::NormViolation(format!("boson Γ(C) needs ‖C‖ ≤ 1, got {nrm:.6}")));
        }
    }
    let d = space.dim();
    let mut out = CMat::zeros(d, d);
    for j in 0..d {
        let occ = space.occupation(j).to_vec();
        let mut v = CVec::zeros(d);
        v[0] = ONE;
        let mut norm = 1.0;
        for k in (0..n).rev() {
            for rep in 0..occ[k] as usize {
                norm *= (rep + 1) as f64;
                let mut w = CVec::zeros(d);
                for i in 0..n {
                    let cik = cmat[(i, k)];
                    if cik != ZERO {
                        w += space.apply(Ladder::create(i), &v) * cik;
                    }
                }
                v = w;
            }
        }
        out.set_column(j, &(v / cr(norm.sqrt())));
    }
    Ok(FockOperator { space: space.clone(), matrix: out })
}

/// The Bogoliubov map of a pure centered state's generalized 1-pdm:
/// bosons `u = (1+γ)^{1/2}`, `v = α(1+γ̄)^{−1/2}`; fermions `u = (1−γ)^{1/2}`,
/// `v = α(1−γ̄)^{−1/2}P⊥ + P` with `P` the eigenvalue-1 projection of `γ̄`.
/// In both cases `U diag(0, 1) U* = γ̃`.
pub fn bogoliubov_from_gaussian(g: &GaussianData, tol: f64) -> Result<BogoliubovMap> {
    let n = g.n_modes();
    let report = gaussian::check_purity(g, tol)?;
    if g.statistics == Statistics::Boson && g.b.norm() > 1e-12 {
        return Err(QfError::InvalidArgument("bogoliubov_from_gaussian needs centered data".into()));
    }
    if !report.pure {
        return Err(QfError::NotPure { residual: report.residual.max(report.reduced_residual.unwrap_or(0.0)) });
    }
    let gbar = conj(&g.gamma);
    let map = match g.statistics {
        Statistics::Boson => {
            let u = linalg::sqrtm_psd(&(eye(n) + &g.gamma))?;
            let v = &g.alpha * linalg::inv_sqrtm_pd(&(eye(n) + &gbar))?;
            BogoliubovMap { u, v, statistics: Statistics::Boson }
        }
        Statistics::Fermion => {
            let u = linalg::sqrtm_psd(&(eye(n) - &g.gamma))?;
            let (vals, vecs) = linalg::eigh(&gbar);
            let mut p = zeros(n, n);
            let mut inv_root = zeros(n, n);
            for (k, &l) in vals.iter().enumerate() {
                let col = vecs.column(k);
                let proj = col * col.adjoint();
                if (1.0 - l) <= 1e-9 {
                    p += proj;
                } else {
                    inv_root += proj * cr(1.0 / (1.0 - l).sqrt());
                }
            }
            let v = &g.alpha * inv_root + p;
            BogoliubovMap { u, v, statistics: Statistics::Fermion }
        }
    };
    let mut d = zeros(2 * n, 2 * n);
    for i in n..2 * n {
        d[(i, i)] = ONE;
    }
    let m = map.block();
    let err = max_abs(&(&m * d * m.adjoint() - gaussian::gen1pdm(g)));
    if err > 1e-8 * (1.0 + max_abs(&g.gamma)) {
        return Err(QfError::NotPure { residual: err });
    }
    Ok(map)
}

/// A map `W` whose implementation prepares the pure state with data `g`
/// from the vacuum: `𝕎 = implement_unitary(W)`, `𝕎Ω` has generalized 1-pdm
/// `γ̃(g)`. For fermions `W` is [`bogoliubov_from_gaussian`]; for bosons it is
/// `S U S`, since `𝕌Ω` itself carries the pairing `−α`.
pub fn vacuum_preparation(g: &GaussianData, tol: f64) -> Result<BogoliubovMap> {
    let u = bogoliubov_from_gaussian(g, tol)?;
    Ok(match g.statistics {
        Statistics::Fermion => u,
        Statistics::Boson => BogoliubovMap { u: u.u, v: -u.v, statistics: Statistics::Boson },
    })
}

/// Random map `exp(−iK)` with generator entries of size `scale`.
pub fn random_map<R: Rng + ?Sized>(rng: &mut R, n: usize, statistics: Statistics, scale: f64) -> BogoliubovMap {
    let a = linalg::random_hermitian(rng, n, scale);
    let b = match statistics {
        Statistics::Boson => linalg::random_symmetric(rng, n, scale),
        Statistics::Fermion => linalg::random_antisymmetric(rng, n, scale),
    };
    BogoliubovMap::from_generator(&a, &b, statistics).expect("square generator blocks")
}
