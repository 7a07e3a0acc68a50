//! Multi-start simplex minimization of `ω(ℍ)` over quasifree families.
//!
//! Pure fermion states split into two parity sectors, `𝕌Ω` and `𝕌 a*_1 Ω`,
//! because `𝕌 = exp(−iQ)` preserves parity; both are searched. Every
//! (restart, sector) job has its own ChaCha stream derived from the seed, so
//! results do not depend on scheduling.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::nelder_mead::{nelder_mead, NelderMeadOptions};
use super::params::{Layout, QuasifreeParams};
use super::{boundedness_probe, exact_ground_energy, BoundednessProbe, EnergyEvaluator, Hamiltonian};
use crate::error::{QfError, Result};
use crate::fock::{ModeSpace, Statistics};
use crate::linalg::{c, CVec};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Pure,
    Mixed,
}

#[derive(Clone, Copy, Debug)]
pub struct BhfOptions {
    pub restarts: usize,
    pub seed: u64,
    pub simplex: NelderMeadOptions,
    /// Half-width of the uniform box for initial generator and displacement
    /// coordinates.
    pub init_scale: f64,
    /// Slack for analytic equalities and for the sampled-mixed comparison.
    pub tol: f64,
    /// Allowed `|E_pure − E_mixed|` between two optimizer runs.
    pub tol_opt: f64,
    pub parallel: bool,
}

impl Default for BhfOptions {
    fn default() -> Self {
        BhfOptions {
            restarts: 20,
            seed: 0,
            simplex: NelderMeadOptions::default(),
            init_scale: 1.0,
            tol: 1e-6,
            tol_opt: 1e-4,
            parallel: true,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct RestartTrace {
    pub restart: usize,
    pub occupied: Vec<usize>,
    pub energy: f64,
    pub evals: usize,
    pub converged: bool,
    /// Best energy after every simplex iteration; non-increasing.
    pub energies: Vec<f64>,
    /// Where each re-initialised simplex phase starts in `energies`.
    pub phase_starts: Vec<usize>,
}

#[derive(Clone, Debug, Serialize)]
pub struct MinimizeResult {
    pub mode: Mode,
    pub energy: f64,
    pub params: QuasifreeParams,
    /// The best job met the simplex tolerance; otherwise `energy` is the best
    /// value found within the evaluation budget.
    pub converged: bool,
    pub best_restart: usize,
    pub seed: u64,
    pub probe: BoundednessProbe,
    pub restarts: Vec<RestartTrace>,
}

fn sectors(st: Statistics, mode: Mode) -> Vec<Vec<usize>> {
    match (st, mode) {
        (Statistics::Fermion, Mode::Pure) => vec![vec![], vec![0]],
        _ => vec![vec![]],
    }
}

fn job_rng(seed: u64, job: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(job as u64 + 1);
    rng
}

fn initial_point(rng: &mut ChaCha8Rng, layout: &Layout, scale: f64) -> Vec<f64> {
    let mix = layout.mixing_range();
    (0..layout.dim())
        .map(|i| {
            if mix.contains(&i) {
                match layout.statistics {
                    Statistics::Boson => rng.random_range(-4.0..0.0),
                    Statistics::Fermion => rng.random_range(-3.0..3.0),
                }
            } else {
                rng.random_range(-scale..scale)
            }
        })
        .collect()
}

fn check_space(ham: &Hamiltonian, space: &ModeSpace) -> Result<()> {
    if space.statistics() != ham.statistics || space.n_modes() != ham.n_modes() {
        return Err(QfError::SpeciesMismatch("model and space disagree on statistics or modes".into()));
    }
    Ok(())
}

/// Minimizes `ω(ℍ)` over pure or mixed quasifree states. Boson models must
/// first pass the boundedness probe on `space`.
pub fn minimize(ham: &Hamiltonian, space: &ModeSpace, mode: Mode, opts: &BhfOptions) -> Result<MinimizeResult> {
    check_space(ham, space)?;
    let probe = boundedness_probe(ham, space)?;
    if !probe.ok {
        return Err(QfError::InvalidArgument(format!(
            "Hamiltonian fails the boundedness probe: ground energies {:.6e} and {:.6e} at cutoffs {} and {}",
            probe.energies[0], probe.energies[1], probe.cutoffs[0], probe.cutoffs[1]
        )));
    }
    if opts.restarts == 0 {
        return Err(QfError::InvalidArgument("at least one restart is required".into()));
    }
    let eval = EnergyEvaluator::new(ham)?;
    let n = ham.n_modes();
    let secs = sectors(ham.statistics, mode);
    let jobs: Vec<(usize, Vec<usize>)> =
        (0..opts.restarts).flat_map(|r| secs.iter().map(move |s| (r, s.clone()))).collect();
    let run = |(job, (restart, occupied)): (usize, &(usize, Vec<usize>))| {
        let layout = Layout { n, statistics: ham.statistics, mixed: mode == Mode::Mixed, occupied: occupied.clone() };
        let mut rng = job_rng(opts.seed, job);
        let x0 = initial_point(&mut rng, &layout, opts.init_scale);
        let objective = |x: &[f64]| layout.decode(x).data().map(|g| eval.energy(&g)).unwrap_or(f64::INFINITY);
        let r = nelder_mead(objective, &x0, opts.simplex);
        let trace = RestartTrace {
            restart: *restart,
            occupied: occupied.clone(),
            energy: r.f,
            evals: r.evals,
            converged: r.converged,
            energies: r.trace,
            phase_starts: r.phase_starts,
        };
        (trace, layout.decode(&r.x))
    };
    let results: Vec<(RestartTrace, QuasifreeParams)> = if opts.parallel {
        jobs.par_iter().enumerate().map(run).collect()
    } else {
        jobs.iter().enumerate().map(run).collect()
    };
    let best = results
        .iter()
        .enumerate()
        .min_by(|a, b| a.1 .0.energy.total_cmp(&b.1 .0.energy))
        .map(|(i, _)| i)
        .expect("at least one job");
    let (best_trace, params) = results[best].clone();
    if !best_trace.energy.is_finite() {
        return Err(QfError::NonConvergence("no finite energy was found".into()));
    }
    Ok(MinimizeResult {
        mode,
        energy: best_trace.energy,
        params,
        converged: best_trace.converged,
        best_restart: best_trace.restart,
        seed: opts.seed,
        probe,
        restarts: results.into_iter().map(|(t, _)| t).collect(),
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct GapReport {
    pub e_pure: f64,
    pub e_mixed: f64,
    /// `E_mixed − E_pure`.
    pub gap: f64,
    pub e_exact: f64,
    /// `E_pure ≥ E_exact` up to rounding.
    pub above_exact: bool,
    pub samples: usize,
    pub sampled_min: f64,
    /// Sampled mixed energies below `E_pure − tol`.
    pub sampled_violations: usize,
    pub sampled_ok: bool,
    pub gap_ok: bool,
    pub tol: f64,
    pub tol_opt: f64,
    pub ok: bool,
    pub pure: MinimizeResult,
    pub mixed: MinimizeResult,
}

/// Rounding slack for `E_pure ≥ E_exact`.
const EXACT_SLACK: f64 = 1e-9;

/// Mixed states near the pure optimum (odd samples) and uniformly drawn ones
/// (even samples).
fn sample_mixed(rng: &mut ChaCha8Rng, best: &QuasifreeParams, scale: f64) -> QuasifreeParams {
    let n = best.n_modes();
    let st = best.statistics;
    let local = rng.random_bool(0.5);
    let mut p = if local { best.clone() } else { QuasifreeParams::vacuum(n, st) };
    let width = if local { 0.05 } else { scale };
    for z in p.a.iter_mut().chain(p.b.iter_mut()) {
        *z += c(rng.random_range(-width..width), rng.random_range(-width..width));
    }
    p.a = (&p.a + p.a.adjoint()) * c(0.5, 0.0);
    p.b = match st {
        Statistics::Boson => (&p.b + p.b.transpose()) * c(0.5, 0.0),
        Statistics::Fermion => (&p.b - p.b.transpose()) * c(0.5, 0.0),
    };
    if st == Statistics::Boson {
        let f = p.displacement.clone().unwrap_or_else(|| CVec::zeros(n));
        p.displacement = Some(f.map(|z| z + c(rng.random_range(-width..width), rng.random_range(-width..width))));
    }
    for k in 0..n {
        if !p.occupied.contains(&k) {
            p.mixing[k] = match st {
                Statistics::Boson => rng.random_range(0.0..0.3),
                Statistics::Fermion => rng.random_range(0.0..0.5),
            };
        }
    }
    p
}

/// Pure and mixed minima, their gap, and `n_mixed_samples` sampled mixed
/// energies checked against the pure minimum. Failures are reported, not
/// raised; errors come only from invalid input.
pub fn verify_pure_equals_mixed(
    ham: &Hamiltonian,
    space: &ModeSpace,
    n_mixed_samples: usize,
    opts: &BhfOptions,
) -> Result<GapReport> {
    let pure = minimize(ham, space, Mode::Pure, opts)?;
    let mixed = minimize(ham, space, Mode::Mixed, opts)?;
    let e_exact = exact_ground_energy(ham, space)?;
    let eval = EnergyEvaluator::new(ham)?;
    let mut rng = job_rng(opts.seed, usize::MAX >> 1);
    let mut sampled_min = f64::INFINITY;
    let mut violations = 0;
    for _ in 0..n_mixed_samples {
        let p = sample_mixed(&mut rng, &pure.params, opts.init_scale);
        let e = p.data().map(|g| eval.energy(&g)).unwrap_or(f64::INFINITY);
        sampled_min = sampled_min.min(e);
        if e < pure.energy - opts.tol {
            violations += 1;
        }
    }
    let gap = mixed.energy - pure.energy;
    let above_exact = pure.energy >= e_exact - EXACT_SLACK * e_exact.abs().max(1.0);
    let sampled_ok = violations == 0;
    let gap_ok = gap.abs() <= opts.tol_opt;
    Ok(GapReport {
        e_pure: pure.energy,
        e_mixed: mixed.energy,
        gap,
        e_exact,
        above_exact,
        samples: n_mixed_samples,
        sampled_min,
        sampled_violations: violations,
        sampled_ok,
        gap_ok,
        tol: opts.tol,
        tol_opt: opts.tol_opt,
        ok: above_exact && sampled_ok && gap_ok,
        pure,
        mixed,
    })
}
