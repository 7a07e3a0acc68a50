//! Builders for quasifree density matrices on truncated spaces, together with
//! the one-particle data they should carry.
//!
//! The general form is `ρ = 𝕎_f 𝕌 ρ₀ 𝕌* 𝕎_f*` where `ρ₀` is a product state
//! diagonal in the occupation basis: geometric weights `c_k^{n_k}` for bosons,
//! and for fermions a Slater factor on the `occupied` modes times
//! `Γ(diag b)/tr` on the rest.

use rand::Rng;

use crate::bogoliubov::{self, BogoliubovMap};
use crate::error::{QfError, Result};
use crate::fock::{FockOperator, FockVector, ModeSpace, Statistics};
use crate::gaussian::{self, GaussianData};
use crate::linalg::{self, c, cr, CMat, CVec};

/// Diagonal product density `ρ₀`, normalized on the truncated space.
pub fn product_state(space: &ModeSpace, mixing: &[f64], occupied: &[usize]) -> Result<FockOperator> {
    let n = space.n_modes();
    if mixing.len() != n {
        return Err(QfError::Shape("one mixing weight per mode is required".into()));
    }
    if occupied.iter().any(|&k| k >= n) {
        return Err(QfError::InvalidArgument("occupied mode out of range".into()));
    }
    let st = space.statistics();
    if st == Statistics::Boson && !occupied.is_empty() {
        return Err(QfError::InvalidArgument("Slater factors are fermionic".into()));
    }
    for &w in mixing {
        let ok = match st {
            Statistics::Boson => (0.0..1.0).contains(&w),
            Statistics::Fermion => w >= 0.0 && w.is_finite(),
        };
        if !ok {
            return Err(QfError::InvalidArgument(format!("mixing weight {w} outside its domain")));
        }
    }
    let d = space.dim();
    let mut diag = vec![0.0; d];
    for (j, slot) in diag.iter_mut().enumerate() {
        let occ = space.occupation(j);
        let mut w = 1.0;
        for k in 0..n {
            let nk = occ[k] as i32;
            w *= if occupied.contains(&k) {
                if nk == 1 { 1.0 } else { 0.0 }
            } else {
                mixing[k].powi(nk)
            };
        }
        *slot = w;
    }
    let total: f64 = diag.iter().sum();
    let m = CMat::from_fn(d, d, |i, j| if i == j { cr(diag[i] / total) } else { cr(0.0) });
    FockOperator::new(space, m)
}

/// Untruncated one-particle data of [`product_state`].
pub fn product_data(statistics: Statistics, mixing: &[f64], occupied: &[usize]) -> GaussianData {
    let n = mixing.len();
    let mut gamma = CMat::zeros(n, n);
    for k in 0..n {
        let w = mixing[k];
        gamma[(k, k)] = cr(match statistics {
            _ if occupied.contains(&k) => 1.0,
            Statistics::Boson => w / (1.0 - w),
            Statistics::Fermion => w / (1.0 + w),
        });
    }
    GaussianData::centered(gamma, CMat::zeros(n, n), statistics)
}

/// `O ρ O*`, renormalized to unit trace.
pub fn conjugate(rho: &FockOperator, op: &FockOperator) -> Result<FockOperator> {
    let m = &op.matrix * &rho.matrix * op.matrix.adjoint();
    let tr = m.trace().re;
    if tr <= 0.0 {
        return Err(QfError::NotADensityMatrix("conjugated state has no weight".into()));
    }
    let m = linalg::hermitian_part(&m) / cr(tr);
    FockOperator::new(&rho.space, m)
}

/// `𝕎_f 𝕌 ρ₀ 𝕌* 𝕎_f*`.
pub fn quasifree_state(
    space: &ModeSpace,
    map: &BogoliubovMap,
    base: &FockOperator,
    displacement: Option<&CVec>,
) -> Result<FockOperator> {
    let u = bogoliubov::implement_unitary(map, space)?;
    let mut rho = conjugate(base, &u)?;
    if let Some(f) = displacement {
        let w = bogoliubov::weyl_transformation(f, space)?;
        rho = conjugate(&rho, &w)?;
    }
    Ok(rho)
}

/// Data of `𝕎_f 𝕌 ρ₀ 𝕌* 𝕎_f*` from the data of `ρ₀`; the first moment is `−f`.
pub fn quasifree_data(map: &BogoliubovMap, base: &GaussianData, displacement: Option<&CVec>) -> Result<GaussianData> {
    let gt = bogoliubov::push_forward_gen1pdm(&gaussian::gen1pdm(base), map)?;
    let g = GaussianData::from_gen1pdm(&gt, base.statistics)?;
    match displacement {
        Some(f) => gaussian::displace(&g, &(-f)),
        None => Ok(g),
    }
}

/// Coherent state `𝕎_φ* Ω`, whose first moment is `φ`.
pub fn coherent_state(space: &ModeSpace, phi: &CVec) -> Result<FockVector> {
    let w = bogoliubov::weyl_transformation(&(-phi), space)?;
    FockVector::new(space, w.matrix.column(0).into_owned())
}

/// Single-mode squeezing `u = cosh r`, `v = sinh r` on `mode`, identity elsewhere.
pub fn squeeze_map(n: usize, mode: usize, r: f64) -> BogoliubovMap {
    let mut u = linalg::eye(n);
    let mut v = CMat::zeros(n, n);
    u[(mode, mode)] = cr(r.cosh());
    v[(mode, mode)] = cr(r.sinh());
    BogoliubovMap { u, v, statistics: Statistics::Boson }
}

/// `𝕌Ω` for the given map.
pub fn transformed_vacuum(space: &ModeSpace, map: &BogoliubovMap) -> Result<FockVector> {
    let u = bogoliubov::implement_unitary(map, space)?;
    FockVector::new(space, u.matrix.column(0).into_owned())
}

/// A random Bogoliubov-rotated (and for bosons Weyl-displaced) vacuum with
/// its predicted data.
pub fn random_pure<R: Rng + ?Sized>(rng: &mut R, space: &ModeSpace, scale: f64) -> Result<(FockOperator, GaussianData)> {
    let n = space.n_modes();
    let st = space.statistics();
    let map = bogoliubov::random_map(rng, n, st, scale);
    let f = (st == Statistics::Boson).then(|| linalg::random_vector(rng, n, scale));
    let base = product_state(space, &vec![0.0; n], &[])?;
    let rho = quasifree_state(space, &map, &base, f.as_ref())?;
    let data = quasifree_data(&map, &GaussianData::vacuum(n, st), f.as_ref())?;
    Ok((rho, data))
}

/// A random mixed quasifree state: random map, displacement (bosons) and
/// mixing weights drawn from `mixing_range`.
pub fn random_mixed<R: Rng + ?Sized>(
    rng: &mut R,
    space: &ModeSpace,
    scale: f64,
    mixing_range: (f64, f64),
) -> Result<(FockOperator, GaussianData)> {
    let n = space.n_modes();
    let st = space.statistics();
    let map = bogoliubov::random_map(rng, n, st, scale);
    let f = (st == Statistics::Boson).then(|| linalg::random_vector(rng, n, scale));
    let mixing: Vec<f64> = (0..n).map(|_| rng.random_range(mixing_range.0..mixing_range.1)).collect();
    let base = product_state(space, &mixing, &[])?;
    let rho = quasifree_state(space, &map, &base, f.as_ref())?;
    let data = quasifree_data(&map, &product_data(st, &mixing, &[]), f.as_ref())?;
    Ok((rho, data))
}

/// `Γ(C)/tr Γ(C)` for a general positive `C`.
pub fn gibbs_state(space: &ModeSpace, cmat: &CMat) -> Result<FockOperator> {
    let g = bogoliubov::second_quantize(cmat, space)?;
    let tr = g.trace().re;
    FockOperator::new(space, linalg::hermitian_part(&g.matrix) / cr(tr))
}

/// Unit complex number `e^{iθ}`.
pub fn phase(theta: f64) -> num_complex::Complex64 {
    c(theta.cos(), theta.sin())
}
