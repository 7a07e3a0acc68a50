//! Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any FAIL.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use qflab::bhf::{
    convex_decompose, decomposition_error, models, realize_state, verify_pure_equals_mixed, BhfOptions, Hamiltonian,
    Layout, QuasifreeParams,
};
use qflab::bogoliubov::{self, implement_unitary, second_quantize, weyl_operator};
use qflab::fock::{algebra, FockOperator, FockVector, Ladder, ModeSpace, Statistics};
use qflab::gaussian::{
    check_purity, conjugate_gen1pdm, further_gen1pdm, gaussian_from_density_matrix, gaussian_from_density_matrix_with,
    gen1pdm,
};
use qflab::linalg::{self, c, cr, eye, max_abs, CMat, CVec};
use qflab::representability::{
    assemble_gen2pdm, check_g, check_gen2pdm_psd, check_p, check_q, default_trials, gen2pdm_sampling,
    polynomial_positivity_harness, two_pdm_from_state, Gen2Pdm, HarnessOptions,
};
use qflab::states;
use qflab::wick::pfaffian::pfaffian;
use qflab::wick::{oracle_monomial, quasifree_expectation, ORACLE_MASS_TOL};
use qflab_cli::input::{PdmSpec, StateSpec};
use qflab_cli::{execute, EXIT_OK, EXIT_PROPERTY_FAILS};

const CCR_TOL: f64 = 1e-12;
const WEYL_TOL: f64 = 1e-8;
const PURE_TOL: f64 = 1e-7;
const MIXED_FLOOR: f64 = 1e-3;
const TRANSFORM_TOL: f64 = 1e-7;
const FERMION_WICK_TOL: f64 = 1e-9;
const BOSON_WICK_TOL: f64 = 1e-7;
const PFAFFIAN_REL_TOL: f64 = 1e-8;
const PSD_TOL: f64 = 1e-8;
const GAP_TOL: f64 = 1e-4;
const QUADRATIC_TOL: f64 = 1e-6;
const ROUND_TRIP_TOL: f64 = 1e-7;
const DECOMPOSITION_TOL: f64 = 1e-10;

type Verdict = Result<(bool, String), String>;

struct Runner {
    failures: usize,
}

impl Runner {
    fn check(&mut self, id: usize, name: &str, budget_s: Option<f64>, f: impl FnOnce() -> Verdict) {
        let t = Instant::now();
        let out = f();
        let secs = t.elapsed().as_secs_f64();
        let (mut ok, mut detail) = out.unwrap_or_else(|e| (false, format!("error: {e}")));
        if let Some(b) = budget_s {
            if secs > b {
                ok = false;
                detail.push_str(&format!("; over the {b:.0} s budget"));
            }
        }
        if !ok {
            self.failures += 1;
        }
        println!("{} [{id}] {name}: {detail} ({secs:.1} s)", if ok { "PASS" } else { "FAIL" });
    }
}

fn err<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

fn letters(n: usize) -> Vec<Ladder> {
    (0..n).flat_map(|k| [Ladder::create(k), Ladder::annihilate(k)]).collect()
}

fn monomials(n: usize, degree: usize) -> Vec<Vec<Ladder>> {
    let l = letters(n);
    let mut out: Vec<Vec<Ladder>> = vec![vec![]];
    for _ in 0..degree {
        out = out.into_iter().flat_map(|m| l.iter().map(move |&x| [m.clone(), vec![x]].concat())).collect();
    }
    out
}

fn algebra_suite() -> Verdict {
    let car = (1..=4).map(|n| ModeSpace::fermion(n).map(|s| algebra::car_residual(&s))).collect::<Result<Vec<_>, _>>();
    let car_max = car.map_err(err)?.into_iter().fold(0.0, f64::max);
    let mut ccr: f64 = 0.0;
    for (n, k) in [(1, 12), (2, 8), (3, 5)] {
        ccr = ccr.max(algebra::ccr_residual(&ModeSpace::boson(n, k).map_err(err)?));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let space = ModeSpace::boson(2, 22).map_err(err)?;
    let mut weyl: f64 = 0.0;
    for _ in 0..50 {
        let f = linalg::random_vector(&mut rng, 2, 0.35);
        let g = linalg::random_vector(&mut rng, 2, 0.35);
        let wf = weyl_operator(&f, &space).map_err(err)?.matrix;
        let wg = weyl_operator(&g, &space).map_err(err)?.matrix;
        let wfg = weyl_operator(&(&f + &g), &space).map_err(err)?.matrix;
        let im = f.dotc(&g).im;
        let d = space.dim_up_to(3);
        let fg = wf.rows(0, d) * wg.columns(0, d);
        let gf = wg.rows(0, d) * wf.columns(0, d);
        let product = &fg - wfg.view((0, 0), (d, d)) * Complex64::from_polar(1.0, -0.5 * im);
        let commutation = &fg - gf * Complex64::from_polar(1.0, -im);
        weyl = weyl.max(max_abs(&product)).max(max_abs(&commutation));
    }
    let ok = car_max == 0.0 && ccr <= CCR_TOL && weyl <= WEYL_TOL;
    Ok((ok, format!("CAR {car_max:e}, CCR {ccr:.1e}, Weyl over 50 pairs {weyl:.1e}")))
}

fn purity_suite() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(102);
    let mut misclassified = 0;
    let mut disagreements = 0;
    let mut worst_pure: f64 = 0.0;
    let mut least_mixed = f64::INFINITY;
    for space in [ModeSpace::fermion(3).map_err(err)?, ModeSpace::boson(2, 22).map_err(err)?] {
        for _ in 0..50 {
            let (rho, _) = states::random_pure(&mut rng, &space, 0.15).map_err(err)?;
            let rep = check_purity(&gaussian_from_density_matrix(&rho).map_err(err)?, PURE_TOL).map_err(err)?;
            worst_pure = worst_pure.max(rep.residual);
            misclassified += usize::from(!rep.pure);
            disagreements += usize::from(!rep.verdicts_agree);
        }
        let range = match space.statistics() {
            Statistics::Boson => (0.02, 0.08),
            Statistics::Fermion => (0.1, 2.0),
        };
        for _ in 0..50 {
            let (rho, _) = states::random_mixed(&mut rng, &space, 0.12, range).map_err(err)?;
            let rep = check_purity(&gaussian_from_density_matrix(&rho).map_err(err)?, PURE_TOL).map_err(err)?;
            least_mixed = least_mixed.min(rep.residual);
            misclassified += usize::from(rep.pure || rep.residual < MIXED_FLOOR);
            disagreements += usize::from(!rep.verdicts_agree);
        }
    }
    let ok = misclassified == 0 && disagreements == 0 && worst_pure <= PURE_TOL && least_mixed >= MIXED_FLOOR;
    Ok((
        ok,
        format!(
            "worst pure residual {worst_pure:.1e}, smallest mixed residual {least_mixed:.1e}, \
             {misclassified} misclassified, {disagreements} boson verdict disagreements"
        ),
    ))
}

fn transformation_suite() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(103);
    let mut worst: f64 = 0.0;
    for (space, scale, map_scale, range) in [
        (ModeSpace::fermion(3).map_err(err)?, 0.4, 0.5, (0.1, 2.0)),
        (ModeSpace::boson(2, 24).map_err(err)?, 0.1, 0.1, (0.02, 0.08)),
    ] {
        for _ in 0..30 {
            let (rho, _) = states::random_mixed(&mut rng, &space, scale, range).map_err(err)?;
            let map = bogoliubov::random_map(&mut rng, space.n_modes(), space.statistics(), map_scale);
            let u = implement_unitary(&map, &space).map_err(err)?;
            let moved = states::conjugate(&rho, &u.adjoint()).map_err(err)?;
            let before = gen1pdm(&gaussian_from_density_matrix(&rho).map_err(err)?);
            let predicted = conjugate_gen1pdm(&before, &map).map_err(err)?;
            let after = gen1pdm(&gaussian_from_density_matrix(&moved).map_err(err)?);
            worst = worst.max(max_abs(&(after - predicted)));
        }
    }
    Ok((worst <= TRANSFORM_TOL, format!("worst deviation over 30 pairs per species {worst:.1e}")))
}

fn boson_family(space: &ModeSpace, rng: &mut ChaCha8Rng) -> Result<Vec<(&'static str, FockOperator)>, String> {
    let phi = CVec::from_vec(vec![c(0.3, -0.2), c(-0.1, 0.25)]);
    let thermal = CMat::from_row_slice(2, 2, &[cr(0.15), c(0.03, 0.02), c(0.03, -0.02), cr(0.1)]);
    let (displaced_squeezed, _) = states::random_pure(rng, space, 0.15).map_err(err)?;
    Ok(vec![
        ("vacuum", qflab::fock::vacuum(space).density_matrix()),
        ("coherent", states::coherent_state(space, &phi).map_err(err)?.density_matrix()),
        ("squeezed", states::transformed_vacuum(space, &states::squeeze_map(2, 0, 0.2)).map_err(err)?.density_matrix()),
        ("thermal", states::gibbs_state(space, &thermal).map_err(err)?),
        ("displaced squeezed", displaced_squeezed),
    ])
}

fn wick_suite() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(104);
    let fspace = ModeSpace::fermion(3).map_err(err)?;
    let (pure, _) = states::random_pure(&mut rng, &fspace, 0.8).map_err(err)?;
    let (mixed, _) = states::random_mixed(&mut rng, &fspace, 0.6, (0.2, 3.0)).map_err(err)?;
    let mut fermion_worst: f64 = 0.0;
    let mut count = 0;
    for rho in [pure, mixed] {
        let g = gaussian_from_density_matrix(&rho).map_err(err)?;
        for d in 0..=6 {
            for m in monomials(3, d) {
                let w = quasifree_expectation(&g, &m).map_err(err)?;
                let o = oracle_monomial(&rho, &m, ORACLE_MASS_TOL).map_err(err)?;
                fermion_worst = fermion_worst.max((w - o).norm());
                count += 1;
            }
        }
    }

    let mut pf_worst: f64 = 0.0;
    let mut odd_nonzero = 0;
    for k in 0..100 {
        let dim = 1 + k % 8;
        let m = linalg::random_antisymmetric(&mut rng, dim, 1.0);
        let pf = pfaffian(&m).map_err(err)?;
        if dim % 2 == 1 {
            odd_nonzero += usize::from(pf != linalg::ZERO);
        } else {
            let det = m.determinant();
            pf_worst = pf_worst.max((pf * pf - det).norm() / det.norm());
        }
    }

    let bspace = ModeSpace::boson(2, 22).map_err(err)?;
    let mut boson_worst: f64 = 0.0;
    for (_, rho) in boson_family(&bspace, &mut rng)? {
        let g = gaussian_from_density_matrix(&rho).map_err(err)?;
        for d in 0..=4 {
            for m in monomials(2, d) {
                let w = quasifree_expectation(&g, &m).map_err(err)?;
                let o = oracle_monomial(&rho, &m, ORACLE_MASS_TOL).map_err(err)?;
                boson_worst = boson_worst.max((w - o).norm());
            }
        }
    }
    let ok = fermion_worst <= FERMION_WICK_TOL
        && pf_worst <= PFAFFIAN_REL_TOL
        && odd_nonzero == 0
        && boson_worst <= BOSON_WICK_TOL;
    Ok((
        ok,
        format!(
            "fermion {count} monomials worst {fermion_worst:.1e}, Pf²/det relative {pf_worst:.1e} \
             (odd nonzero {odd_nonzero}), boson 5-state family worst {boson_worst:.1e}"
        ),
    ))
}

fn boson_corpus(rng: &mut ChaCha8Rng) -> Result<Vec<(String, FockOperator)>, String> {
    let one = ModeSpace::boson(1, 24).map_err(err)?;
    let two = ModeSpace::boson(2, 22).map_err(err)?;
    let mut out = Vec::new();
    for (k, phi) in [[c(0.3, -0.2), c(-0.1, 0.25)], [c(0.5, 0.0), cr(0.0)], [c(0.0, 0.4), c(0.2, 0.2)], [c(-0.35, 0.1), c(0.1, -0.45)]]
        .into_iter()
        .enumerate()
    {
        let v = states::coherent_state(&two, &CVec::from_vec(phi.to_vec())).map_err(err)?;
        out.push((format!("coherent-{k}"), v.density_matrix()));
    }
    for r in [0.1, 0.15, 0.2] {
        let v = states::transformed_vacuum(&one, &states::squeeze_map(1, 0, r)).map_err(err)?;
        out.push((format!("squeezed-{r}"), v.density_matrix()));
    }
    for (k, (a, b, z)) in [(0.18, 0.12, c(0.03, 0.02)), (0.1, 0.2, cr(0.0)), (0.25, 0.05, c(0.0, 0.04)), (0.05, 0.05, cr(0.02))]
        .into_iter()
        .enumerate()
    {
        let cmat = CMat::from_row_slice(2, 2, &[cr(a), z, z.conj(), cr(b)]);
        out.push((format!("thermal-{k}"), states::gibbs_state(&two, &cmat).map_err(err)?));
    }
    for k in 0..5 {
        let (rho, _) = states::random_mixed(rng, &two, 0.12, (0.02, 0.1)).map_err(err)?;
        out.push((format!("mixed-{k}"), rho));
    }
    for k in 0..3 {
        let (rho, _) = states::random_pure(rng, &two, 0.12).map_err(err)?;
        out.push((format!("pure-{k}"), rho));
    }
    for occ in [[1u8, 0], [2, 1], [0, 3]] {
        out.push((format!("fock-{}{}", occ[0], occ[1]), FockVector::basis(&two, &occ).map_err(err)?.density_matrix()));
    }
    let cat = FockVector::basis(&two, &[0, 0]).map_err(err)?.amplitudes + FockVector::basis(&two, &[1, 1]).map_err(err)?.amplitudes * c(0.0, 0.7);
    out.push(("superposition".into(), FockVector::new(&two, cat).map_err(err)?.normalized().density_matrix()));
    Ok(out)
}

fn representability_physical() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(105);
    let corpus = boson_corpus(&mut rng)?;
    let mut failed = Vec::new();
    let mut worst_eig = f64::INFINITY;
    for (k, (name, rho)) in corpus.iter().enumerate() {
        let data = gaussian_from_density_matrix_with(rho, 1e-10).map_err(err)?;
        let g2 = two_pdm_from_state(rho).map_err(err)?;
        let n = data.n_modes();
        let p = check_p(&g2, PSD_TOL).ok;
        let g = check_g(&data.gamma, &g2, &default_trials(&mut rng, n, 50, 20), PSD_TOL).map_err(err)?.ok;
        let q = check_q(&data.gamma, &g2, Statistics::Boson, PSD_TOL).ok;
        let hat = assemble_gen2pdm(rho).map_err(err)?;
        let psd = check_gen2pdm_psd(&hat, PSD_TOL);
        worst_eig = worst_eig.min(psd.min_eig / psd.scale);
        let corners = hat.gen1pdm_corner() == gen1pdm(&data) && hat.further_corner() == further_gen1pdm(&data);
        let h = polynomial_positivity_harness(rho, HarnessOptions { samples: 100, tol: PSD_TOL, seed: k as u64 })
            .map_err(err)?;
        let harness = h.sampling_ok && h.agrees_with_gen2pdm && h.agrees_with_conditions != Some(false);
        if !(p && g && q && psd.ok && corners && harness) {
            failed.push(format!("{name} (P {p}, G {g}, Q {q}, Γ̂ {}, corners {corners}, sampling {harness})", psd.ok));
        }
    }
    let ok = corpus.len() >= 20 && failed.is_empty();
    Ok((
        ok,
        format!(
            "{} physical states, smallest Γ̂ eigenvalue / scale {worst_eig:.1e}, failures: {}",
            corpus.len(),
            if failed.is_empty() { "none".to_string() } else { failed.join("; ") }
        ),
    ))
}

fn representability_corrupted() -> Verdict {
    let mut found = Vec::new();
    let one = ModeSpace::boson(1, 20).map_err(err)?;
    let coherent = states::coherent_state(&one, &CVec::from_vec(vec![c(0.35, 0.2)])).map_err(err)?.density_matrix();

    let mut flipped = assemble_gen2pdm(&coherent).map_err(err)?;
    let blk = flipped.block(5, 7);
    flipped.set_block(5, 7, &(-blk));
    let rep = gen2pdm_sampling(&flipped, HarnessOptions::default());
    found.push(("sign-flipped first-moment block", !rep.sampling_ok && rep.witness.is_some()));

    let mut fake = Gen2Pdm::new(1, eye(7)).map_err(err)?;
    fake.set_block(1, 1, &CMat::from_element(1, 1, cr(-0.5)));
    let rep = gen2pdm_sampling(&fake, HarnessOptions::default());
    found.push(("negative pair block", !rep.sampling_ok && rep.witness.is_some()));

    let mut scaled = assemble_gen2pdm(&coherent).map_err(err)?;
    let blk = scaled.block(5, 6);
    scaled.set_block(5, 6, &(blk * cr(3.0)));
    scaled.set_block(6, 5, &(scaled.block(5, 6).adjoint()));
    let psd = check_gen2pdm_psd(&scaled, PSD_TOL);
    found.push(("inflated pairing block", !psd.ok && psd.witness.is_some()));

    let fspace = ModeSpace::fermion(2).map_err(err)?;
    let slater = states::product_state(&fspace, &[0.0, 0.0], &[0, 1]).map_err(err)?;
    let negated = two_pdm_from_state(&slater).map_err(err)? * cr(-1.0);
    let rep = check_p(&negated, PSD_TOL);
    found.push(("negated fermion 2-pdm (P)", !rep.ok && rep.witness.is_some()));

    let mut psi = CVec::zeros(4);
    psi[1] = cr(0.5f64.sqrt());
    psi[2] = cr(0.5f64.sqrt());
    let pair = &psi * psi.adjoint();
    let mut rng = ChaCha8Rng::seed_from_u64(106);
    let rep = check_g(&CMat::zeros(2, 2), &pair, &default_trials(&mut rng, 2, 50, 20), PSD_TOL).map_err(err)?;
    found.push(("pair without one-body part (G)", !rep.ok && rep.witness.is_some()));

    let bad_q = (eye(4) + qflab::representability::exchange_operator(2)) * cr(-3.0);
    let rep = check_q(&CMat::zeros(2, 2), &bad_q, Statistics::Boson, PSD_TOL);
    found.push(("negative boson 2-pdm (Q)", !rep.ok && rep.witness.is_some()));

    let caught = found.iter().filter(|(_, ok)| *ok).count();
    let missed: Vec<&str> = found.iter().filter(|(_, ok)| !*ok).map(|(n, _)| *n).collect();
    Ok((
        caught >= 5 && missed.is_empty(),
        format!("{caught}/{} corrupted instances caught with witnesses; missed: {missed:?}", found.len()),
    ))
}

fn bhf_suite() -> Verdict {
    let cases: [(&str, Hamiltonian, ModeSpace); 3] = [
        ("quadratic fermion", models::quadratic_fermion(), ModeSpace::fermion(3).map_err(err)?),
        ("repulsive fermion", models::repulsive_fermion(), ModeSpace::fermion(3).map_err(err)?),
        ("driven boson", models::driven_boson(), ModeSpace::boson(1, 30).map_err(err)?),
    ];
    let opts = BhfOptions { restarts: 20, seed: 0, ..BhfOptions::default() };
    let mut ok = true;
    let mut parts = Vec::new();
    for (name, ham, space) in &cases {
        let rep = verify_pure_equals_mixed(ham, space, 50, &opts).map_err(err)?;
        let above = rep.e_pure >= rep.e_exact - 1e-9 * rep.e_exact.abs().max(1.0);
        let gap_ok = rep.gap.abs() <= GAP_TOL;
        let mut case_ok = above && gap_ok && rep.sampled_ok;
        let mut line = format!(
            "{name}: E_pure {:.10} E_mixed {:.10} E_exact {:.10} gap {:.1e}",
            rep.e_pure, rep.e_mixed, rep.e_exact, rep.gap
        );
        if *name == "quadratic fermion" {
            let d = (rep.e_pure - rep.e_exact).abs();
            case_ok &= d <= QUADRATIC_TOL;
            line.push_str(&format!(" |E_pure − diag| {d:.1e}"));
        }
        ok &= case_ok;
        parts.push(line);
    }
    Ok((ok, parts.join("; ")))
}

fn decomposition_suite() -> Verdict {
    let space = ModeSpace::boson(2, 24).map_err(err)?;
    let l = Layout { n: 2, statistics: Statistics::Boson, mixed: true, occupied: vec![] };
    let mut rng = ChaCha8Rng::seed_from_u64(107);
    let mut round_trip: f64 = 0.0;
    for _ in 0..5 {
        let mut x: Vec<f64> = (0..l.dim()).map(|_| rng.random_range(-0.1..0.1)).collect();
        for t in &mut x[l.mixing_range()] {
            *t = rng.random_range(-4.5..-3.0);
        }
        let p = l.decode(&x);
        let g = gaussian_from_density_matrix(&realize_state(&p, &space).map_err(err)?).map_err(err)?;
        let want = p.data().map_err(err)?;
        round_trip = round_trip.max(max_abs(&(gen1pdm(&g) - gen1pdm(&want)))).max((g.b - want.b).norm());
    }
    let fspace = ModeSpace::fermion(3).map_err(err)?;
    let fl = Layout { n: 3, statistics: Statistics::Fermion, mixed: true, occupied: vec![] };
    for _ in 0..5 {
        let x: Vec<f64> = (0..fl.dim()).map(|_| rng.random_range(-0.8..0.8)).collect();
        let p = fl.decode(&x);
        let g = gaussian_from_density_matrix(&realize_state(&p, &fspace).map_err(err)?).map_err(err)?;
        round_trip = round_trip.max(max_abs(&(gen1pdm(&g) - gen1pdm(&p.data().map_err(err)?))));
    }

    let two = ModeSpace::fermion(2).map_err(err)?;
    let mut decomposition: f64 = 0.0;
    for mixing in [[0.4, 1.7], [0.05, 3.0], [1.0, 1.0]] {
        let mut p = QuasifreeParams::vacuum(2, Statistics::Fermion);
        p.mixing = mixing.to_vec();
        let terms = convex_decompose(&p, 2).map_err(err)?;
        decomposition = decomposition.max(decomposition_error(&p, &terms, &two).map_err(err)?);
    }

    let b = [0.3, 1.5, 2.0];
    let diag = CMat::from_diagonal(&CVec::from_iterator(3, b.iter().map(|&x| cr(x))));
    let trace = second_quantize(&diag, &fspace).map_err(err)?.trace();
    let want: f64 = b.iter().map(|x| 1.0 + x).product();
    let trace_ok = trace.re == want && trace.im == 0.0;

    let ok = round_trip <= ROUND_TRIP_TOL && decomposition <= DECOMPOSITION_TOL && trace_ok;
    Ok((
        ok,
        format!(
            "round trip {round_trip:.1e}, 2-mode thermal decomposition error {decomposition:.1e}, \
             tr Γ(B) = {} vs Π(1+b) = {want}",
            trace.re
        ),
    ))
}

fn write_json(dir: &Path, name: &str, v: &impl serde::Serialize) -> Result<String, String> {
    let p = dir.join(name);
    fs::write(&p, serde_json::to_string(v).map_err(err)?).map_err(err)?;
    Ok(p.display().to_string())
}

fn cli(args: &[&str]) -> i32 {
    execute(std::iter::once("qflab").chain(args.iter().copied()))
}

fn replay_suite() -> Verdict {
    let dir: PathBuf = std::env::temp_dir().join(format!("qflab-acceptance-{}", std::process::id()));
    let _ = fs::remove_dir_all(&dir);
    fs::create_dir_all(&dir).map_err(err)?;
    let fermion_space = write_json(&dir, "fspace.json", &serde_json::json!({"species": "fermion", "modes": 2}))?;
    let mut slater = QuasifreeParams::vacuum(2, Statistics::Fermion);
    slater.occupied = vec![0];
    let slater = write_json(&dir, "slater.json", &StateSpec::Params(slater))?;
    let bspace = ModeSpace::boson(1, 16).map_err(err)?;
    let coh = states::coherent_state(&bspace, &CVec::from_element(1, c(0.3, -0.2))).map_err(err)?;
    let coherent = write_json(&dir, "coherent.json", &StateSpec::Vector { amplitudes: coh.amplitudes })?;
    let boson_space = write_json(&dir, "bspace.json", &serde_json::json!({"species": "boson", "modes": 1, "cutoff": 16}))?;
    let fs2 = ModeSpace::fermion(2).map_err(err)?;
    let g2 = two_pdm_from_state(&states::product_state(&fs2, &[0.0, 0.0], &[0, 1]).map_err(err)?).map_err(err)? * cr(-1.0);
    let corrupt = write_json(
        &dir,
        "corrupt.json",
        &StateSpec::Pdm(PdmSpec { species: Statistics::Fermion, gamma: eye(2), gamma2: g2, particles: None }),
    )?;
    let model = write_json(&dir, "model.json", &models::quadratic_fermion())?;

    let runs: Vec<(&str, Vec<&str>, i32)> = vec![
        ("purity", vec!["purity", &slater, &fermion_space], EXIT_OK),
        ("repr", vec!["repr", &coherent, &boson_space, "--samples", "30"], EXIT_OK),
        ("repr corrupted", vec!["repr", &corrupt], EXIT_PROPERTY_FAILS),
        ("wick", vec!["wick", "c*(1) c(1) + (0,1) c*(1) c*(2) c(2) c(1)", &slater, "--cross-check"], EXIT_OK),
        ("bhf", vec!["bhf", &model, "--mode", "both", "--restarts", "2", "--samples", "10", "--seed", "3"], EXIT_OK),
    ];
    let mut failures = Vec::new();
    for (k, (name, args, want)) in runs.iter().enumerate() {
        let report = dir.join(format!("report-{k}.json"));
        let manifest = dir.join(format!("manifest-{k}.json"));
        let mut full = args.clone();
        let (r, m) = (report.display().to_string(), manifest.display().to_string());
        full.extend(["--report", &r, "--manifest", &m]);
        let code = cli(&full);
        if code != *want {
            failures.push(format!("{name} exited {code}"));
            continue;
        }
        let replay_report = dir.join(format!("replay-{k}.json")).display().to_string();
        let replay_manifest = dir.join(format!("replay-{k}.manifest.json")).display().to_string();
        let code = cli(&["replay", &m, "--report", &replay_report, "--manifest", &replay_manifest]);
        let out: serde_json::Value =
            serde_json::from_str(&fs::read_to_string(&replay_report).map_err(err)?).map_err(err)?;
        if code != EXIT_OK || out["identical"] != serde_json::Value::Bool(true) {
            failures.push(format!("{name} replay differs"));
        }
    }
    let _ = fs::remove_dir_all(&dir);
    Ok((
        failures.is_empty(),
        format!("{} commands replayed from manifests; differences: {failures:?}", runs.len()),
    ))
}

fn main() {
    let mut r = Runner { failures: 0 };
    r.check(1, "algebra suite", Some(10.0), algebra_suite);
    r.check(2, "purity characterization", None, purity_suite);
    r.check(3, "transformation law", None, transformation_suite);
    r.check(4, "Wick and Pfaffian", Some(60.0), wick_suite);
    r.check(5, "representability on physical boson states", None, representability_physical);
    r.check(5, "representability on corrupted instances", None, representability_corrupted);
    r.check(6, "BHF pure vs mixed on three models", Some(300.0), bhf_suite);
    r.check(7, "round trip, decomposition and tr Γ(B)", None, decomposition_suite);
    r.check(8, "CLI replay from manifests", None, replay_suite);
    if r.failures > 0 {
        println!("{} criteria failed", r.failures);
        std::process::exit(1);
    }
    println!("all criteria passed");
}
