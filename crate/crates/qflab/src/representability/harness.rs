//! Sampling `ω(P P*)` over random polynomials of degree at most two and
//! comparing the verdict with the matrix conditions.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::gen2pdm::{assemble_gen2pdm, check_gen2pdm_psd, coordinate_operators, sim_dim, Gen2Pdm};
use super::{apply_monomial, check_g, check_p, default_trials, state_factor, two_pdm_from_state};
use crate::error::Result;
use crate::fock::{FockOperator, Statistics};
use crate::gaussian;
use crate::linalg::{self, c, max_abs, CMat, CVec, ZERO};
use crate::wick::{Factor, LadderPolynomial, Term, ORACLE_MASS_TOL};

#[derive(Clone, Copy, Debug)]
pub struct HarnessOptions {
    pub samples: usize,
    pub tol: f64,
    pub seed: u64,
}

impl Default for HarnessOptions {
    fn default() -> Self {
        HarnessOptions { samples: 100, tol: 1e-8, seed: 0 }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct HarnessReport {
    pub samples: usize,
    /// Smallest `ω(P P*) / ‖v‖²` seen.
    pub min_value: f64,
    pub sampling_ok: bool,
    /// Largest `|ω(P P*) − ⟨v, Γ̂ v⟩| / ‖v‖²`; zero in Γ̂-only mode.
    pub max_form_mismatch: f64,
    pub gen2pdm_ok: bool,
    pub gen2pdm_min_eig: f64,
    pub agrees_with_gen2pdm: bool,
    pub particle_conserving: bool,
    /// `γ ≥ 0`, P and G, evaluated for particle-conserving states.
    pub conditions_ok: Option<bool>,
    pub agrees_with_conditions: Option<bool>,
    /// Polynomial attaining `min_value`, when it is negative beyond tolerance.
    pub witness: Option<String>,
}

/// `P(v) = Σ v_x O_x` over the coordinate operators.
pub fn polynomial_of(v: &CVec, n: usize) -> LadderPolynomial {
    let terms = coordinate_operators(n)
        .into_iter()
        .zip(v.iter())
        .filter(|(_, z)| **z != ZERO)
        .map(|(ops, &coeff)| Term {
            coeff,
            factors: ops.into_iter().map(|op| Factor { op, statistics: Statistics::Boson }).collect(),
        })
        .collect();
    LadderPolynomial { terms }
}

/// Random coefficient vector; the sparsity pattern rotates with `k` through
/// full, two-body, one-body, particle-conserving and single-block supports.
fn random_coefficients(rng: &mut ChaCha8Rng, n: usize, k: usize) -> CVec {
    let n2 = n * n;
    let d = sim_dim(n);
    let keep: Box<dyn Fn(usize) -> bool> = match k % 5 {
        0 => Box::new(|_| true),
        1 => Box::new(move |x| x < 4 * n2),
        2 => Box::new(move |x| x >= 4 * n2),
        3 => Box::new(move |x| (n2..3 * n2).contains(&x) || x == d - 1),
        _ => {
            let b = rng.random_range(0..4);
            Box::new(move |x| (b * n2..(b + 1) * n2).contains(&x))
        }
    };
    CVec::from_fn(d, |x, _| if keep(x) { linalg::random_c(rng) } else { ZERO })
}

fn is_particle_conserving(rho: &FockOperator) -> bool {
    let s = &rho.space;
    let scale = max_abs(&rho.matrix).max(1e-300);
    (0..s.dim()).all(|i| (0..s.dim()).all(|j| s.total(i) == s.total(j) || rho.matrix[(i, j)].norm() <= 1e-12 * scale))
}

struct Tracker {
    min_value: f64,
    worst: Option<CVec>,
}

impl Tracker {
    fn see(&mut self, value: f64, v: &CVec) {
        if value < self.min_value {
            self.min_value = value;
            self.worst = Some(v.clone());
        }
    }
}

/// Samples for a state: `ω(P P*) = ‖P* R‖²` with `ρ = R R*`, against the
/// assembled `Γ̂`. The last sample is the lowest eigenvector of `Γ̂`.
pub fn polynomial_positivity_harness(rho: &FockOperator, opts: HarnessOptions) -> Result<HarnessReport> {
    rho.space.guard_cutoff(&rho.matrix, 4, ORACLE_MASS_TOL)?;
    let n = rho.space.n_modes();
    let g = assemble_gen2pdm(rho)?;
    let psd = check_gen2pdm_psd(&g, opts.tol);
    let r = state_factor(rho)?;
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut track = Tracker { min_value: f64::INFINITY, worst: None };
    let mut mismatch: f64 = 0.0;
    let (_, vecs) = linalg::eigh(&g.matrix);
    for k in 0..opts.samples {
        let v = if k + 1 == opts.samples { vecs.column(0).into_owned() } else { random_coefficients(&mut rng, n, k) };
        let norm2 = v.norm_squared();
        let p_star = polynomial_of(&v, n).adjoint();
        let mut image = CMat::zeros(r.nrows(), r.ncols());
        for t in &p_star.terms {
            image += apply_monomial(rho, &t.ladders(), &r) * t.coeff;
        }
        let value = image.norm_squared() / norm2;
        let form = v.dotc(&(&g.matrix * &v)).re / norm2;
        mismatch = mismatch.max((value - form).abs());
        track.see(value, &v);
    }
    let scale = psd.scale;
    let sampling_ok = track.min_value >= -opts.tol * scale;
    let particle_conserving = is_particle_conserving(rho);
    let conditions_ok = if particle_conserving {
        let data = gaussian::gaussian_from_density_matrix_with(rho, ORACLE_MASS_TOL)?;
        let gamma2 = two_pdm_from_state(rho)?;
        let trials = default_trials(&mut rng, n, 50, 20);
        let gamma_ok = linalg::min_eigh(&data.gamma) >= -opts.tol;
        Some(gamma_ok && check_p(&gamma2, opts.tol).ok && check_g(&data.gamma, &gamma2, &trials, opts.tol)?.ok)
    } else {
        None
    };
    Ok(HarnessReport {
        samples: opts.samples,
        min_value: track.min_value,
        sampling_ok,
        max_form_mismatch: mismatch,
        gen2pdm_ok: psd.ok,
        gen2pdm_min_eig: psd.min_eig,
        agrees_with_gen2pdm: sampling_ok == psd.ok,
        particle_conserving,
        conditions_ok,
        agrees_with_conditions: conditions_ok.map(|ok| ok == sampling_ok),
        witness: (!sampling_ok).then(|| polynomial_of(track.worst.as_ref().expect("at least one sample"), n).to_string()),
    })
}

/// Samples `⟨v, Γ̂ v⟩` for a bare `Γ̂`, which is `ω(P P*)` by definition.
/// The last sample is the lowest eigenvector, so a non-PSD `Γ̂` always yields
/// a violating polynomial.
pub fn gen2pdm_sampling(g: &Gen2Pdm, opts: HarnessOptions) -> HarnessReport {
    let n = g.n_modes();
    let psd = check_gen2pdm_psd(g, opts.tol);
    let (_, vecs) = linalg::eigh(&g.matrix);
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut track = Tracker { min_value: f64::INFINITY, worst: None };
    for k in 0..opts.samples {
        let v = if k + 1 == opts.samples { vecs.column(0).into_owned() } else { random_coefficients(&mut rng, n, k) };
        let value = v.dotc(&(&g.matrix * &v)).re / v.norm_squared();
        track.see(value, &v);
    }
    let sampling_ok = track.min_value >= -opts.tol * psd.scale;
    HarnessReport {
        samples: opts.samples,
        min_value: track.min_value,
        sampling_ok,
        max_form_mismatch: 0.0,
        gen2pdm_ok: psd.ok,
        gen2pdm_min_eig: psd.min_eig,
        agrees_with_gen2pdm: sampling_ok == psd.ok,
        particle_conserving: false,
        conditions_ok: None,
        agrees_with_conditions: None,
        witness: (!sampling_ok).then(|| polynomial_of(track.worst.as_ref().expect("at least one sample"), n).to_string()),
    }
}

/// Rounds coefficients so witness text stays readable.
pub fn rounded(v: &CVec, digits: i32) -> CVec {
    let f = 10f64.powi(digits);
    v.map(|z| c((z.re * f).round() / f, (z.im * f).round() / f))
}
