use qflab::bhf::{
    convex_decompose, decomposition_error, energy_functional, energy_of_data, exact_ground_energy, minimize, models,
    realize_state, verify_pure_equals_mixed, BhfOptions, Hamiltonian, Layout, Mode, NelderMeadOptions, QuasifreeParams,
};
use qflab::bogoliubov::second_quantize;
use qflab::fock::{expectation, ModeSpace, Statistics};
use qflab::gaussian::{check_purity, gaussian_from_density_matrix, gen1pdm};
use qflab::linalg::{self, c, cr, max_abs, CMat, CVec};
use qflab::representability::{exchange_operator, two_pdm_from_state};
use qflab::states;
use qflab::QfError;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn quick() -> BhfOptions {
    BhfOptions { restarts: 4, simplex: NelderMeadOptions { max_evals: 20_000, ..Default::default() }, ..Default::default() }
}

fn random_model<R: rand::Rng>(rng: &mut R, n: usize, st: Statistics) -> Hamiltonian {
    let h = linalg::random_hermitian(rng, n, 1.0);
    let w = linalg::random_hermitian(rng, n * n, 0.5);
    let ex = exchange_operator(n);
    let v = (&w + &ex * &w * &ex) * cr(0.5);
    Hamiltonian::new(st, h, v).unwrap()
}

#[test]
fn slater_energy_by_hand() {
    let h = CMat::from_diagonal(&CVec::from_vec(vec![cr(-0.7), cr(0.4)]));
    let mut v = CMat::zeros(4, 4);
    v[(1, 1)] = cr(0.9);
    v[(2, 2)] = cr(0.9);
    let ham = Hamiltonian::new(Statistics::Fermion, h, v).unwrap();
    let mut p = QuasifreeParams::vacuum(2, Statistics::Fermion);
    p.occupied = vec![0, 1];
    let rho = realize_state(&p, &ModeSpace::fermion(2).unwrap()).unwrap();
    let g = gaussian_from_density_matrix(&rho).unwrap();
    let e = energy_functional(&g.gamma, &two_pdm_from_state(&rho).unwrap(), &ham).unwrap();
    assert!((e - (-0.7 + 0.4 + 0.9)).abs() < 1e-12, "{e}");
}

#[test]
fn energy_functional_matches_fock_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let fermions = ModeSpace::fermion(3).unwrap();
    let bosons = ModeSpace::boson(2, 24).unwrap();
    for k in 0..20 {
        let space = if k % 2 == 0 { &fermions } else { &bosons };
        let st = space.statistics();
        let ham = random_model(&mut rng, space.n_modes(), st);
        let (rho, _) = states::random_mixed(&mut rng, space, 0.12, (0.02, 0.1)).unwrap();
        let oracle = expectation(&rho, &ham.fock_matrix(space).unwrap()).unwrap();
        assert!(oracle.im.abs() < 1e-10);
        let g = gaussian_from_density_matrix(&rho).unwrap();
        let e = energy_functional(&g.gamma, &two_pdm_from_state(&rho).unwrap(), &ham).unwrap();
        assert!((e - oracle.re).abs() < 1e-8, "state {k}: {e} vs {}", oracle.re);
    }
}

#[test]
fn wick_energy_with_pairing_and_drive_matches_fock_oracle() {
    let mut ham = models::driven_boson();
    ham.pairing = Some(CMat::from_element(1, 1, c(0.1, 0.05)));
    let space = ModeSpace::boson(1, 40).unwrap();
    let l = Layout { n: 1, statistics: Statistics::Boson, mixed: true, occupied: vec![] };
    let p = l.decode(&[0.1, 0.15, -0.1, 0.3, -0.2, -2.0]);
    let rho = realize_state(&p, &space).unwrap();
    let direct = expectation(&rho, &ham.fock_matrix(&space).unwrap()).unwrap().re;
    assert!((direct - energy_of_data(&ham, &p.data().unwrap()).unwrap()).abs() < 1e-9);
    let ham = models::quadratic_fermion();
    let space = ModeSpace::fermion(3).unwrap();
    let l = Layout { n: 3, statistics: Statistics::Fermion, mixed: true, occupied: vec![] };
    let x: Vec<f64> = (0..l.dim()).map(|i| (1.3 * i as f64).cos()).collect();
    let p = l.decode(&x);
    let direct = expectation(&realize_state(&p, &space).unwrap(), &ham.fock_matrix(&space).unwrap()).unwrap().re;
    assert!((direct - energy_of_data(&ham, &p.data().unwrap()).unwrap()).abs() < 1e-10);
}

#[test]
fn displaced_squeezed_state_is_pure() {
    let space = ModeSpace::boson(1, 30).unwrap();
    let mut p = QuasifreeParams::vacuum(1, Statistics::Boson);
    p.b[(0, 0)] = c(0.15, 0.0);
    p.displacement = Some(CVec::from_element(1, c(0.3, -0.2)));
    let rho = realize_state(&p, &space).unwrap();
    let g = gaussian_from_density_matrix(&rho).unwrap();
    assert!(check_purity(&g, 1e-7).unwrap().pure);
    p.mixing = vec![0.2];
    let g = gaussian_from_density_matrix(&realize_state(&p, &space).unwrap()).unwrap();
    assert!(!check_purity(&g, 1e-7).unwrap().pure);
}

#[test]
fn purity_verdict_follows_mode() {
    let space = ModeSpace::fermion(3).unwrap();
    for mixed in [false, true] {
        let l = Layout { n: 3, statistics: Statistics::Fermion, mixed, occupied: vec![] };
        let x: Vec<f64> = (0..l.dim()).map(|i| 0.4 * (i as f64).sin()).collect();
        let p = l.decode(&x);
        assert_eq!(p.is_pure(), !mixed);
        let g = gaussian_from_density_matrix(&realize_state(&p, &space).unwrap()).unwrap();
        assert_eq!(check_purity(&g, 1e-7).unwrap().pure, !mixed);
    }
}

#[test]
fn realize_extract_round_trip() {
    let space = ModeSpace::boson(2, 24).unwrap();
    let l = Layout { n: 2, statistics: Statistics::Boson, mixed: true, occupied: vec![] };
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..3 {
        let mut x: Vec<f64> = (0..l.dim()).map(|_| rand::Rng::random_range(&mut rng, -0.1..0.1)).collect();
        for t in &mut x[l.mixing_range()] {
            *t = rand::Rng::random_range(&mut rng, -4.5..-3.0);
        }
        let p = l.decode(&x);
        let g = gaussian_from_density_matrix(&realize_state(&p, &space).unwrap()).unwrap();
        let want = p.data().unwrap();
        assert!(max_abs(&(gen1pdm(&g) - gen1pdm(&want))) < 1e-7);
        assert!((g.b - want.b).norm() < 1e-7);
    }
}

#[test]
fn number_operator_minimum_is_vacuum() {
    let ham = models::number_operator(1);
    let r = minimize(&ham, &ModeSpace::boson(1, 12).unwrap(), Mode::Pure, &quick()).unwrap();
    assert!(r.energy.abs() < 1e-8, "{}", r.energy);
    let g = r.params.data().unwrap();
    assert!(max_abs(&g.gamma) < 1e-4);
}

#[test]
fn two_level_fermion_fills_lower_mode() {
    let r = minimize(&models::two_level_fermion(), &ModeSpace::fermion(2).unwrap(), Mode::Pure, &quick()).unwrap();
    assert!((r.energy + 1.0).abs() < 1e-8, "{}", r.energy);
    assert_eq!(r.params.occupied, vec![0]);
}

#[test]
fn quadratic_model_matches_diagonalization() {
    let ham = models::quadratic_fermion();
    let space = ModeSpace::fermion(3).unwrap();
    let exact = exact_ground_energy(&ham, &space).unwrap();
    let r = minimize(&ham, &space, Mode::Pure, &quick()).unwrap();
    assert!((r.energy - exact).abs() < 1e-6, "{} vs {exact}", r.energy);
    assert!(r.energy >= exact - 1e-9);
}

#[test]
fn driven_boson_above_exact_and_coherent_squeezed() {
    let ham = models::driven_boson();
    let space = ModeSpace::boson(1, 30).unwrap();
    let exact = exact_ground_energy(&ham, &space).unwrap();
    let r = minimize(&ham, &space, Mode::Pure, &quick()).unwrap();
    assert!(r.energy > exact, "{} vs {exact}", r.energy);
    // Best coherent state alone, found by a scan over real amplitudes.
    let coherent = (0..=2000)
        .map(|i| {
            let phi = i as f64 * 1e-3;
            phi * phi + 0.1 * phi.powi(4) - phi
        })
        .fold(f64::INFINITY, f64::min);
    assert!(r.energy <= coherent + 1e-9);
    let rho = realize_state(&r.params, &space).unwrap();
    let direct = expectation(&rho, &ham.fock_matrix(&space).unwrap()).unwrap().re;
    assert!((direct - r.energy).abs() < 1e-8);
}

#[test]
fn traces_are_monotone_and_runs_reproducible() {
    let ham = models::repulsive_fermion();
    let space = ModeSpace::fermion(3).unwrap();
    let opts = BhfOptions { restarts: 3, ..quick() };
    let a = minimize(&ham, &space, Mode::Mixed, &opts).unwrap();
    for t in &a.restarts {
        assert!(t.energies.windows(2).all(|w| w[1] <= w[0]), "restart {}", t.restart);
        assert_eq!(*t.energies.last().unwrap(), t.energy);
    }
    let b = minimize(&ham, &space, Mode::Mixed, &BhfOptions { parallel: false, ..opts }).unwrap();
    assert_eq!(a.energy.to_bits(), b.energy.to_bits());
    assert_eq!(a.params, b.params);
    let e: Vec<u64> = a.restarts.iter().map(|t| t.energy.to_bits()).collect();
    let f: Vec<u64> = b.restarts.iter().map(|t| t.energy.to_bits()).collect();
    assert_eq!(e, f);
    let c = minimize(&ham, &space, Mode::Mixed, &BhfOptions { seed: 1, ..opts }).unwrap();
    assert_ne!(a.restarts[0].energies[0].to_bits(), c.restarts[0].energies[0].to_bits());
}

#[test]
fn pure_fermion_search_covers_both_parities() {
    let r = minimize(&models::repulsive_fermion(), &ModeSpace::fermion(3).unwrap(), Mode::Pure, &quick()).unwrap();
    assert_eq!(r.restarts.len(), 8);
    assert!(r.restarts.iter().any(|t| t.occupied.is_empty()));
    assert!(r.restarts.iter().any(|t| t.occupied == vec![0]));
}

#[test]
fn gap_report_on_quadratic_models() {
    let ham = models::quadratic_fermion();
    let rep = verify_pure_equals_mixed(&ham, &ModeSpace::fermion(3).unwrap(), 30, &quick()).unwrap();
    assert!(rep.gap.abs() <= 1e-6, "{}", rep.gap);
    assert!(rep.sampled_ok && rep.above_exact && rep.ok);
    assert!(rep.sampled_min >= rep.e_pure - 1e-6);
    let rep = verify_pure_equals_mixed(&models::number_operator(2), &ModeSpace::boson(2, 8).unwrap(), 10, &quick()).unwrap();
    assert!(rep.gap.abs() <= 1e-6 && rep.ok);
}

#[test]
fn unbounded_boson_model_is_refused() {
    let ham = Hamiltonian::new(Statistics::Boson, CMat::identity(1, 1), CMat::from_element(1, 1, cr(-1.0))).unwrap();
    match minimize(&ham, &ModeSpace::boson(1, 10).unwrap(), Mode::Pure, &quick()) {
        Err(QfError::InvalidArgument(msg)) => assert!(msg.contains("boundedness")),
        other => panic!("expected refusal, got {other:?}"),
    }
}

#[test]
fn convex_decomposition_two_mode_thermal() {
    let space = ModeSpace::fermion(2).unwrap();
    let mut p = QuasifreeParams::vacuum(2, Statistics::Fermion);
    p.mixing = vec![0.4, 1.7];
    let mut last = f64::INFINITY;
    for k in 0..=2 {
        let terms = convex_decompose(&p, k).unwrap();
        let total: f64 = terms.iter().map(|t| t.weight).sum();
        assert!(terms.iter().all(|t| t.weight >= 0.0 && t.params.is_pure()));
        let err = decomposition_error(&p, &terms, &space).unwrap();
        assert!(err <= last);
        assert!((err - (1.0 - total)).abs() < 1e-12);
        last = err;
    }
    assert!(last <= 1e-10, "{last}");
}

#[test]
fn convex_decomposition_of_rotated_state() {
    let space = ModeSpace::fermion(3).unwrap();
    let l = Layout { n: 3, statistics: Statistics::Fermion, mixed: true, occupied: vec![] };
    let x: Vec<f64> = (0..l.dim()).map(|i| 0.5 * (0.7 * i as f64).sin()).collect();
    let p = l.decode(&x);
    let terms = convex_decompose(&p, 3).unwrap();
    assert_eq!(terms.len(), 8);
    assert!(decomposition_error(&p, &terms, &space).unwrap() <= 1e-10);
}

#[test]
fn fermion_second_quantized_trace() {
    let space = ModeSpace::fermion(3).unwrap();
    let b = [0.3, 1.5, 2.0];
    let g = second_quantize(&CMat::from_diagonal(&CVec::from_iterator(3, b.iter().map(|&x| cr(x)))), &space).unwrap();
    let want: f64 = b.iter().map(|x| 1.0 + x).product();
    assert_eq!(g.trace().re, want);
}

#[test]
fn model_json_round_trip() {
    let ham = models::driven_boson();
    let text = serde_json::to_string(&ham).unwrap();
    assert!(text.contains("\"species\":\"boson\"") && text.contains("\"V\"") && text.contains("\"drive\""));
    let back: Hamiltonian = serde_json::from_str(&text).unwrap();
    assert_eq!(back, ham);
    let parsed: Hamiltonian = serde_json::from_str(
        r#"{"species": "fermion", "h": {"rows": 1, "cols": 1, "re": [2.0]}, "V": {"rows": 1, "cols": 1, "re": [0.0]}}"#,
    )
    .unwrap();
    parsed.validate().unwrap();
    assert!(parsed.is_two_body_only());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn wick_energy_equals_fock_expectation(x in prop::collection::vec(-1.0f64..1.0, 18), seed in 0u64..1000) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let ham = random_model(&mut rng, 3, Statistics::Fermion);
        let space = ModeSpace::fermion(3).unwrap();
        let p = Layout { n: 3, statistics: Statistics::Fermion, mixed: true, occupied: vec![] }.decode(&x);
        let direct = expectation(&realize_state(&p, &space).unwrap(), &ham.fock_matrix(&space).unwrap()).unwrap().re;
        let wick = energy_of_data(&ham, &p.data().unwrap()).unwrap();
        prop_assert!((direct - wick).abs() < 1e-9);
    }

    #[test]
    fn decomposition_weights_are_a_distribution(b in prop::collection::vec(0.0f64..5.0, 1..4)) {
        let mut p = QuasifreeParams::vacuum(b.len(), Statistics::Fermion);
        p.mixing = b.clone();
        let terms = convex_decompose(&p, b.len()).unwrap();
        let total: f64 = terms.iter().map(|t| t.weight).sum();
        prop_assert!((total - 1.0).abs() < 1e-12);
    }
}
