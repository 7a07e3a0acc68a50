//! Fixed reference models.

use super::Hamiltonian;
use crate::fock::Statistics;
use crate::linalg::{c, cr, CMat, CVec};

fn density_density(w: &[Vec<f64>]) -> CMat {
    let n = w.len();
    CMat::from_fn(n * n, n * n, |x, y| if x == y { cr(w[x / n][x % n]) } else { cr(0.0) })
}

/// `ℍ = N̂` for `n` boson modes.
pub fn number_operator(n: usize) -> Hamiltonian {
    Hamiltonian::new(Statistics::Boson, CMat::identity(n, n), CMat::zeros(n * n, n * n)).expect("valid model")
}

/// Two fermion modes with `h = diag(−1, 1)` and no interaction.
pub fn two_level_fermion() -> Hamiltonian {
    let h = CMat::from_diagonal(&CVec::from_vec(vec![cr(-1.0), cr(1.0)]));
    Hamiltonian::new(Statistics::Fermion, h, CMat::zeros(4, 4)).expect("valid model")
}

/// Three fermion modes: complex hopping plus an antisymmetric pairing term.
pub fn quadratic_fermion() -> Hamiltonian {
    let h = CMat::from_row_slice(
        3,
        3,
        &[cr(-1.0), cr(0.3), c(0.0, 0.1), cr(0.3), cr(0.5), cr(0.2), c(0.0, -0.1), cr(0.2), cr(1.2)],
    );
    let p = CMat::from_row_slice(3, 3, &[cr(0.0), cr(0.4), cr(0.0), cr(-0.4), cr(0.0), cr(0.25), cr(0.0), cr(-0.25), cr(0.0)]);
    let mut ham = Hamiltonian::new(Statistics::Fermion, h, CMat::zeros(9, 9)).expect("valid model");
    ham.pairing = Some(p);
    ham
}

/// Three fermion modes with hopping and a repulsive density-density term
/// `V_(ij),(kl) = w_ij δ_ik δ_jl`. On three modes every pure state of definite
/// parity is quasifree, so the BHF energy equals the exact ground energy.
pub fn repulsive_fermion() -> Hamiltonian {
    let h = CMat::from_row_slice(3, 3, &[cr(-2.0), cr(0.2), cr(0.0), cr(0.2), cr(-1.8), cr(0.15), cr(0.0), cr(0.15), cr(-1.5)]);
    let w = vec![vec![0.0, 1.0, 0.6], vec![1.0, 0.0, 0.8], vec![0.6, 0.8, 0.0]];
    Hamiltonian::new(Statistics::Fermion, h, density_density(&w)).expect("valid model")
}

/// One boson mode, `ℍ = a*a + 0.1 a*a*aa − 0.5 (a* + a)`.
pub fn driven_boson() -> Hamiltonian {
    let mut ham =
        Hamiltonian::new(Statistics::Boson, CMat::identity(1, 1), CMat::from_element(1, 1, cr(0.2))).expect("valid model");
    ham.drive = Some(CVec::from_element(1, cr(-0.5)));
    ham
}
