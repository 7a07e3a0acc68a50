//! Dense complex linear algebra helpers shared by every module.
//!
//! Matrix functions of Hermitian arguments go through the Hermitian
//! eigendecomposition. General exponentials use scaling and squaring with a
//! Taylor kernel; general logarithms use inverse scaling and squaring with
//! Denman–Beavers square roots.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;

use crate::error::{QfError, Result};

pub type CMat = DMatrix<Complex64>;
pub type CVec = DVector<Complex64>;

pub const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub const ONE: Complex64 = Complex64::new(1.0, 0.0);
pub const I: Complex64 = Complex64::new(0.0, 1.0);

#[inline]
pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

#[inline]
pub fn cr(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

pub fn eye(n: usize) -> CMat {
    CMat::identity(n, n)
}

pub fn zeros(r: usize, c: usize) -> CMat {
    CMat::zeros(r, c)
}

/// Largest singular value.
pub fn spectral_norm(m: &CMat) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    m.clone().singular_values().max()
}

/// Largest absolute entry.
pub fn max_abs(m: &CMat) -> f64 {
    m.iter().fold(0.0_f64, |acc, z| acc.max(z.norm()))
}

/// Maximum absolute column sum.
pub fn norm1(m: &CMat) -> f64 {
    (0..m.ncols())
        .map(|j| m.column(j).iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

pub fn hermitian_part(m: &CMat) -> CMat {
    (m + m.adjoint()) * cr(0.5)
}

pub fn hermiticity_residual(m: &CMat) -> f64 {
    max_abs(&(m - m.adjoint()))
}

/// Entrywise complex conjugate.
pub fn conj(m: &CMat) -> CMat {
    m.map(|z| z.conj())
}

pub fn conj_vec(v: &CVec) -> CVec {
    v.map(|z| z.conj())
}

/// Eigenvalues (ascending) and orthonormal eigenvectors of the Hermitian part of `m`.
pub fn eigh(m: &CMat) -> (Vec<f64>, CMat) {
    let n = m.nrows();
    if n == 0 {
        return (Vec::new(), zeros(0, 0));
    }
    let eig = hermitian_part(m).symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let vals = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let mut vecs = zeros(n, n);
    for (col, &k) in order.iter().enumerate() {
        vecs.set_column(col, &eig.eigenvectors.column(k));
    }
    (vals, vecs)
}

/// Eigenvalues of the Hermitian part, ascending.
pub fn eigvalsh(m: &CMat) -> Vec<f64> {
    if m.nrows() == 0 {
        return Vec::new();
    }
    let mut v: Vec<f64> = hermitian_part(m).symmetric_eigenvalues().iter().copied().collect();
    v.sort_by(f64::total_cmp);
    v
}

pub fn min_eigh(m: &CMat) -> f64 {
    eigvalsh(m).first().copied().unwrap_or(0.0)
}

/// `V f(Λ) V*` for Hermitian `m`.
pub fn herm_apply(m: &CMat, f: impl Fn(f64) -> Complex64) -> CMat {
    let (vals, vecs) = eigh(m);
    let mut scaled = vecs.clone();
    for (j, &l) in vals.iter().enumerate() {
        let fl = f(l);
        for z in scaled.column_mut(j).iter_mut() {
            *z *= fl;
        }
    }
    scaled * vecs.adjoint()
}

/// Square root of a positive semi-definite matrix. Eigenvalues in
/// `[-1e-12, 0)` are clamped to zero; anything more negative is an error.
pub fn sqrtm_psd(m: &CMat) -> Result<CMat> {
    let lo = min_eigh(m);
    if lo < -1e-12 {
        return Err(QfError::InvalidArgument(format!(
            "square root of a matrix with eigenvalue {lo:.3e}"
        )));
    }
    Ok(herm_apply(m, |l| cr(l.max(0.0).sqrt())))
}

/// Inverse square root of a positive definite matrix.
pub fn inv_sqrtm_pd(m: &CMat) -> Result<CMat> {
    let lo = min_eigh(m);
    if lo <= 1e-14 {
        return Err(QfError::InvalidArgument(format!(
            "inverse square root of a matrix with eigenvalue {lo:.3e}"
        )));
    }
    Ok(herm_apply(m, |l| cr(1.0 / l.sqrt())))
}

/// `exp(-i t H)` for Hermitian `H`.
pub fn expm_herm_i(h: &CMat, t: f64) -> CMat {
    herm_apply(h, |l| Complex64::from_polar(1.0, -t * l))
}

/// General matrix exponential (scaling and squaring, Taylor kernel).
pub fn expm(m: &CMat) -> CMat {
    let n = m.nrows();
    let nrm = norm1(m);
    let s = if nrm > 0.5 { (nrm / 0.5).log2().ceil() as i32 } else { 0 };
    let x = m * cr(0.5_f64.powi(s));
    let mut result = eye(n);
    let mut term = eye(n);
    for k in 1..=24 {
        term = &term * &x * cr(1.0 / k as f64);
        result += &term;
        if norm1(&term) < 1e-18 {
            break;
        }
    }
    for _ in 0..s {
        result = &result * &result;
    }
    result
}

/// Eigenvalues of a general square matrix via the complex Schur form.
pub fn eigvals_general(m: &CMat) -> Result<Vec<Complex64>> {
    if m.nrows() == 0 {
        return Ok(Vec::new());
    }
    nalgebra::linalg::Schur::try_new(m.clone(), 1e-15, 10_000)
        .and_then(|s| s.eigenvalues())
        .map(|v| v.iter().copied().collect())
        .ok_or_else(|| QfError::NonConvergence("Schur decomposition".into()))
}

fn sqrtm_denman_beavers(a: &CMat) -> Result<CMat> {
    let n = a.nrows();
    let mut y = a.clone();
    let mut z = eye(n);
    for _ in 0..200 {
        let yi = y
            .clone()
            .try_inverse()
            .ok_or_else(|| QfError::BranchAmbiguity("singular iterate in square root".into()))?;
        let zi = z
            .clone()
            .try_inverse()
            .ok_or_else(|| QfError::BranchAmbiguity("singular iterate in square root".into()))?;
        let y_next = (&y + zi) * cr(0.5);
        let z_next = (&z + yi) * cr(0.5);
        let delta = norm1(&(&y_next - &y));
        y = y_next;
        z = z_next;
        if delta <= 1e-15 * norm1(&y).max(1.0) {
            return Ok(y);
        }
    }
    Err(QfError::NonConvergence("Denman-Beavers square root".into()))
}

/// Principal matrix logarithm.
///
/// Fails with `BranchAmbiguity` when an eigenvalue sits on (or numerically
/// next to) the closed negative real axis, where the principal branch is
/// discontinuous.
pub fn logm(m: &CMat) -> Result<CMat> {
    let n = m.nrows();
    for l in eigvals_general(m)? {
        if l.norm() < 1e-12 {
            return Err(QfError::BranchAmbiguity("singular matrix".into()));
        }
        if l.re < 0.0 && l.im.abs() <= 1e-9 * l.norm() {
            return Err(QfError::BranchAmbiguity(format!(
                "eigenvalue {:.6}{:+.6}i on the negative real axis",
                l.re, l.im
            )));
        }
    }
    let mut x = m.clone();
    let mut k = 0;
    while norm1(&(&x - eye(n))) > 0.25 {
        x = sqrtm_denman_beavers(&x)?;
        k += 1;
        if k > 64 {
            return Err(QfError::NonConvergence("inverse scaling and squaring".into()));
        }
    }
    let denom = (&x + eye(n))
        .try_inverse()
        .ok_or_else(|| QfError::BranchAmbiguity("singular Cayley denominator".into()))?;
    let z = (&x - eye(n)) * denom;
    let z2 = &z * &z;
    let mut term = z.clone();
    let mut sum = z.clone();
    for j in 1..200 {
        term = &term * &z2;
        let add = &term * cr(1.0 / (2 * j + 1) as f64);
        sum += &add;
        if norm1(&add) < 1e-18 {
            break;
        }
    }
    Ok(sum * cr(2.0 * 2f64.powi(k)))
}

/// Pivoted Cholesky factor `R` with `m ≈ R R*` for positive semi-definite `m`.
/// Stops once the largest remaining diagonal entry is at most `rel_tol` times
/// the largest initial one, so `R` has as many columns as the numerical rank.
pub fn psd_factor(m: &CMat, rel_tol: f64) -> CMat {
    let d = m.nrows();
    let mut a = hermitian_part(m);
    let scale = (0..d).map(|i| a[(i, i)].re).fold(0.0, f64::max);
    let mut cols: Vec<CVec> = Vec::new();
    while cols.len() < d {
        let (p, piv) = (0..d).map(|i| (i, a[(i, i)].re)).fold((0, f64::MIN), |x, y| if y.1 > x.1 { y } else { x });
        if piv <= rel_tol * scale || piv <= 0.0 {
            break;
        }
        let col = a.column(p) / cr(piv.sqrt());
        a.ger(-ONE, &col, &col.conjugate(), ONE);
        cols.push(col);
    }
    if cols.is_empty() {
        return zeros(d, 0);
    }
    CMat::from_columns(&cols)
}

/// Kronecker product `a ⊗ b` with row-major pair index `(i, j) ↦ i·dim(b) + j`.
pub fn kron(a: &CMat, b: &CMat) -> CMat {
    a.kronecker(b)
}

/// Block matrix from a row-major grid of equally compatible blocks.
pub fn block(rows: &[&[&CMat]]) -> CMat {
    let heights: Vec<usize> = rows.iter().map(|r| r[0].nrows()).collect();
    let widths: Vec<usize> = rows[0].iter().map(|b| b.ncols()).collect();
    let mut out = zeros(heights.iter().sum(), widths.iter().sum());
    let mut r0 = 0;
    for (bi, row) in rows.iter().enumerate() {
        let mut c0 = 0;
        for (bj, blk) in row.iter().enumerate() {
            assert_eq!(blk.nrows(), heights[bi]);
            assert_eq!(blk.ncols(), widths[bj]);
            out.view_mut((r0, c0), (blk.nrows(), blk.ncols())).copy_from(*blk);
            c0 += widths[bj];
        }
        r0 += heights[bi];
    }
    out
}

pub fn sub(m: &CMat, r0: usize, c0: usize, nr: usize, nc: usize) -> CMat {
    m.view((r0, c0), (nr, nc)).into_owned()
}

/// Uniform complex number with real and imaginary parts in `[-1, 1)`.
pub fn random_c<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
}

pub fn random_matrix<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize, scale: f64) -> CMat {
    CMat::from_fn(rows, cols, |_, _| random_c(rng) * scale)
}

pub fn random_vector<R: Rng + ?Sized>(rng: &mut R, n: usize, scale: f64) -> CVec {
    CVec::from_fn(n, |_, _| random_c(rng) * scale)
}

pub fn random_hermitian<R: Rng + ?Sized>(rng: &mut R, n: usize, scale: f64) -> CMat {
    hermitian_part(&random_matrix(rng, n, n, scale))
}

pub fn random_symmetric<R: Rng + ?Sized>(rng: &mut R, n: usize, scale: f64) -> CMat {
    let m = random_matrix(rng, n, n, scale);
    (&m + m.transpose()) * cr(0.5)
}

pub fn random_antisymmetric<R: Rng + ?Sized>(rng: &mut R, n: usize, scale: f64) -> CMat {
    let m = random_matrix(rng, n, n, scale);
    (&m - m.transpose()) * cr(0.5)
}

/// Random unitary `exp(-iH)` with a random Hermitian `H`.
pub fn random_unitary<R: Rng + ?Sized>(rng: &mut R, n: usize) -> CMat {
    let h = random_hermitian(rng, n, std::f64::consts::PI);
    expm_herm_i(&h, 1.0)
}
