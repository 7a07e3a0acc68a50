//! Convex decomposition of a mixed fermion quasifree state into pure ones.
//!
//! With `ρ = 𝕌 (Slater_S₀ ⊗ Γ(diag b)/tr) 𝕌*`, each free mode `k` is occupied
//! with probability `p_k = b_k/(1+b_k)` independently, so
//! `ρ = Σ_S Π_{k∈S} p_k Π_{k∉S} (1−p_k) · 𝕌 |S₀ ∪ S⟩⟨S₀ ∪ S| 𝕌*`. Truncating
//! at `|S| ≤ K` leaves a positive remainder whose trace is the trace-norm
//! error.

use serde::Serialize;

use super::params::{realize_state, QuasifreeParams};
use crate::error::{QfError, Result};
use crate::fock::{ModeSpace, Statistics};
use crate::linalg::{self, cr, CMat};

#[derive(Clone, Debug, Serialize)]
pub struct DecompositionTerm {
    pub weight: f64,
    pub params: QuasifreeParams,
}

/// Terms with at most `k` extra occupied free modes; zero weights are dropped.
pub fn convex_decompose(p: &QuasifreeParams, k: usize) -> Result<Vec<DecompositionTerm>> {
    p.validate()?;
    if p.statistics != Statistics::Fermion {
        return Err(QfError::SpeciesMismatch("the convex decomposition is fermionic".into()));
    }
    let n = p.n_modes();
    let free: Vec<usize> = (0..n).filter(|m| !p.occupied.contains(m)).collect();
    let prob: Vec<f64> = free.iter().map(|&m| p.mixing[m] / (1.0 + p.mixing[m])).collect();
    let mut terms = Vec::new();
    for mask in 0u32..(1u32 << free.len()) {
        if mask.count_ones() as usize > k {
            continue;
        }
        let mut weight = 1.0;
        let mut occupied = p.occupied.clone();
        for (bit, (&m, &pk)) in free.iter().zip(&prob).enumerate() {
            if mask >> bit & 1 == 1 {
                weight *= pk;
                occupied.push(m);
            } else {
                weight *= 1.0 - pk;
            }
        }
        if weight == 0.0 {
            continue;
        }
        occupied.sort_unstable();
        let params = QuasifreeParams { mixing: vec![0.0; n], occupied, ..p.clone() };
        terms.push(DecompositionTerm { weight, params });
    }
    Ok(terms)
}

/// `‖ρ − Σ w_k ρ_k‖₁` on the fermion Fock space.
pub fn decomposition_error(p: &QuasifreeParams, terms: &[DecompositionTerm], space: &ModeSpace) -> Result<f64> {
    let rho = realize_state(p, space)?;
    let mut diff: CMat = rho.matrix.clone();
    for t in terms {
        diff -= realize_state(&t.params, space)?.matrix * cr(t.weight);
    }
    Ok(linalg::eigvalsh(&linalg::hermitian_part(&diff)).iter().map(|v| v.abs()).sum())
}
