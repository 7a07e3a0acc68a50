use std::fs;
use std::path::{Path, PathBuf};

use qflab::bhf::{models, QuasifreeParams};
use qflab::fock::{ModeSpace, Statistics};
use qflab::linalg::{self, c, cr, CMat, CVec};
use qflab::representability::two_pdm_from_state;
use qflab::states;
use qflab_cli::input::{PdmSpec, StateSpec};
use qflab_cli::{execute, EXIT_NUMERICAL, EXIT_OK, EXIT_PROPERTY_FAILS, EXIT_USAGE};
use serde_json::Value;

fn workdir(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("qflab-cli-{}-{name}", std::process::id()));
    let _ = fs::remove_dir_all(&dir);
    fs::create_dir_all(&dir).unwrap();
    dir
}

fn write_json(dir: &Path, name: &str, v: &impl serde::Serialize) -> String {
    let p = dir.join(name);
    fs::write(&p, serde_json::to_string(v).unwrap()).unwrap();
    p.display().to_string()
}

fn space_file(dir: &Path, species: &str, modes: usize, cutoff: Option<usize>) -> String {
    let v = serde_json::json!({ "species": species, "modes": modes, "cutoff": cutoff });
    write_json(dir, "space.json", &v)
}

fn run(args: &[&str]) -> i32 {
    execute(std::iter::once("qflab").chain(args.iter().copied()))
}

fn read_report(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn slater(n: usize, occupied: &[usize]) -> StateSpec {
    let mut p = QuasifreeParams::vacuum(n, Statistics::Fermion);
    p.occupied = occupied.to_vec();
    StateSpec::Params(p)
}

#[test]
fn vacuum_is_pure_and_thermal_is_not() {
    let dir = workdir("purity");
    let state = write_json(&dir, "vac.json", &slater(2, &[]));
    let space = space_file(&dir, "fermion", 2, None);
    let report = dir.join("r.json");
    assert_eq!(run(&["purity", &state, &space, "--report", report.to_str().unwrap()]), EXIT_OK);
    assert_eq!(read_report(&report)["pure"], Value::Bool(true));
    assert!(dir.join("r.json.manifest.json").exists());

    let bspace = ModeSpace::boson(1, 40).unwrap();
    let rho = states::gibbs_state(&bspace, &CMat::from_element(1, 1, cr(0.25))).unwrap();
    let thermal = write_json(&dir, "thermal.json", &StateSpec::Density { matrix: rho.matrix });
    let bspace_file = space_file(&dir, "boson", 1, Some(40));
    assert_eq!(run(&["purity", &thermal, &bspace_file, "--report", report.to_str().unwrap()]), EXIT_PROPERTY_FAILS);
    let r = read_report(&report);
    assert_eq!(r["pure"], Value::Bool(false));
    assert!(r["purity"]["residual"].as_f64().unwrap() > 1e-3);
}

#[test]
fn bad_inputs_exit_with_usage_code() {
    let dir = workdir("bad");
    let bad = dir.join("bad.json");
    fs::write(&bad, "{ not json").unwrap();
    let space = space_file(&dir, "fermion", 2, None);
    let report = dir.join("r.json");
    let r = report.to_str().unwrap();
    assert_eq!(run(&["purity", bad.to_str().unwrap(), &space, "--report", r]), EXIT_USAGE);
    assert_eq!(run(&["purity", dir.join("missing.json").to_str().unwrap(), &space, "--report", r]), EXIT_USAGE);
    assert_eq!(run(&["frobnicate"]), EXIT_USAGE);
    let state = write_json(&dir, "vac.json", &slater(2, &[]));
    assert_eq!(run(&["wick", "c*(1", &state, "--report", r]), EXIT_USAGE);
    assert_eq!(run(&["wick", "a*(1) a(1)", &state, "--report", r]), EXIT_USAGE);
    let boson_space = space_file(&dir, "boson", 2, Some(6));
    assert_eq!(run(&["purity", &state, &boson_space, "--report", r]), EXIT_USAGE);
    assert!(!report.exists());
}

#[test]
fn unsafe_cutoff_is_a_numerical_failure() {
    let dir = workdir("cutoff");
    let space = ModeSpace::boson(1, 6).unwrap();
    let flat = CVec::from_element(space.dim(), cr(1.0)).normalize();
    let state = write_json(&dir, "flat.json", &StateSpec::Vector { amplitudes: flat });
    let space_path = space_file(&dir, "boson", 1, Some(6));
    let report = dir.join("r.json");
    assert_eq!(run(&["purity", &state, &space_path, "--report", report.to_str().unwrap()]), EXIT_NUMERICAL);
}

#[test]
fn repr_passes_on_physical_states() {
    let dir = workdir("repr-ok");
    let report = dir.join("r.json");
    let r = report.to_str().unwrap();

    let fspace = ModeSpace::fermion(3).unwrap();
    let mut rng = <rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(4);
    let (rho, _) = states::random_mixed(&mut rng, &fspace, 0.5, (0.1, 2.0)).unwrap();
    let state = write_json(&dir, "f.json", &StateSpec::Density { matrix: rho.matrix });
    let space = space_file(&dir, "fermion", 3, None);
    assert_eq!(run(&["repr", &state, &space, "--report", r]), EXIT_OK);
    assert!(read_report(&report).get("gen2pdm").is_none());

    let bspace = ModeSpace::boson(1, 16).unwrap();
    let v = states::coherent_state(&bspace, &CVec::from_element(1, c(0.3, -0.2))).unwrap();
    let state = write_json(&dir, "b.json", &StateSpec::Vector { amplitudes: v.amplitudes });
    let space = space_file(&dir, "boson", 1, Some(16));
    assert_eq!(run(&["repr", &state, &space, "--samples", "40", "--report", r]), EXIT_OK);
    let out = read_report(&report);
    assert_eq!(out["gen2pdm"]["ok"], Value::Bool(true));
    assert!(out["gen2pdm"]["gen1pdm_corner_error"].as_f64().unwrap() <= 1e-10);
}

#[test]
fn corrupted_two_pdm_fails_p_with_witness() {
    let dir = workdir("repr-bad");
    let space = ModeSpace::fermion(2).unwrap();
    let rho = states::product_state(&space, &[0.0, 0.0], &[0, 1]).unwrap();
    let mut gamma2 = two_pdm_from_state(&rho).unwrap();
    gamma2 *= cr(-1.0);
    let spec = StateSpec::Pdm(PdmSpec { species: Statistics::Fermion, gamma: linalg::eye(2), gamma2, particles: None });
    let state = write_json(&dir, "pdm.json", &spec);
    let report = dir.join("r.json");
    assert_eq!(run(&["repr", &state, "--report", report.to_str().unwrap()]), EXIT_PROPERTY_FAILS);
    let out = read_report(&report);
    assert_eq!(out["p"]["ok"], Value::Bool(false));
    assert!(out["p"]["witness"].is_object());
}

#[test]
fn wick_on_slater_and_odd_terms() {
    let dir = workdir("wick");
    let state = write_json(&dir, "s.json", &slater(2, &[0]));
    let report = dir.join("r.json");
    let r = report.to_str().unwrap();
    assert_eq!(run(&["wick", "c*(1) c(1)", &state, "--cross-check", "--report", r]), EXIT_OK);
    let out = read_report(&report);
    assert_eq!(out["value"]["re"].as_f64(), Some(1.0));
    assert_eq!(out["cross_check"]["agree"], Value::Bool(true));
    assert_eq!(run(&["wick", "c*(1) c(1) c(2)", &state, "--report", r]), EXIT_OK);
    assert_eq!(read_report(&report)["value"]["re"].as_f64(), Some(0.0));
}

#[test]
fn wick_cross_check_on_boson_params() {
    let dir = workdir("wick-boson");
    let mut p = QuasifreeParams::vacuum(1, Statistics::Boson);
    p.a[(0, 0)] = cr(0.2);
    p.b[(0, 0)] = c(0.1, 0.05);
    p.displacement = Some(CVec::from_element(1, c(0.2, -0.1)));
    p.mixing = vec![0.05];
    let state = write_json(&dir, "p.json", &StateSpec::Params(p));
    let report = dir.join("r.json");
    let code = run(&["wick", "a*(1) a*(1) a(1) + (0,1) a(1)", &state, "--cross-check", "--cutoff", "24", "--report", report.to_str().unwrap()]);
    assert_eq!(code, EXIT_OK);
    assert!(read_report(&report)["cross_check"]["difference"].as_f64().unwrap() <= 1e-7);
}

#[test]
fn bhf_on_small_models() {
    let dir = workdir("bhf");
    let report = dir.join("r.json");
    let r = report.to_str().unwrap();
    let model = write_json(&dir, "n.json", &models::number_operator(2));
    assert_eq!(run(&["bhf", &model, "--mode", "pure", "--restarts", "2", "--report", r]), EXIT_OK);
    let out = read_report(&report);
    assert!(out["result"]["energy"].as_f64().unwrap().abs() <= 1e-6);
    assert!(out["result"]["restarts"][0].get("energies").is_none());

    let model = write_json(&dir, "two.json", &models::two_level_fermion());
    assert_eq!(run(&["bhf", &model, "--restarts", "2", "--samples", "10", "--report", r]), EXIT_OK);
    let out = read_report(&report);
    let gap = &out["gap_report"];
    assert!((gap["e_pure"].as_f64().unwrap() + 1.0).abs() <= 1e-6);
    assert!(gap["gap"].as_f64().unwrap().abs() <= 1e-4);
}

#[test]
fn bhf_quadratic_matches_diagonalization() {
    let dir = workdir("bhf-quad");
    let report = dir.join("r.json");
    let model = write_json(&dir, "q.json", &models::quadratic_fermion());
    let code = run(&["bhf", &model, "--mode", "pure", "--restarts", "4", "--trace", "--report", report.to_str().unwrap()]);
    assert_eq!(code, EXIT_OK);
    let out = read_report(&report);
    let e = out["result"]["energy"].as_f64().unwrap();
    let exact = out["e_exact"].as_f64().unwrap();
    assert!((e - exact).abs() <= 1e-6, "{e} vs {exact}");
    assert!(out["result"]["restarts"][0]["energies"].is_array());
}

#[test]
fn replay_reproduces_and_detects_changes() {
    let dir = workdir("replay");
    let model = write_json(&dir, "n.json", &models::number_operator(1));
    let report = dir.join("r.json");
    let manifest = dir.join("m.json");
    let code = run(&[
        "bhf", &model, "--mode", "both", "--restarts", "2", "--samples", "5", "--seed", "7",
        "--report", report.to_str().unwrap(), "--manifest", manifest.to_str().unwrap(),
    ]);
    assert_eq!(code, EXIT_OK);
    let replay_report = dir.join("replay.json");
    let rr = replay_report.to_str().unwrap();
    assert_eq!(run(&["replay", manifest.to_str().unwrap(), "--report", rr]), EXIT_OK);
    let out = read_report(&replay_report);
    assert_eq!(out["identical"], Value::Bool(true));
    assert_eq!(out["recorded_sha256"], out["replayed_sha256"]);

    let mut ham = models::number_operator(1);
    ham.h[(0, 0)] = cr(2.0);
    fs::write(&model, serde_json::to_string(&ham).unwrap()).unwrap();
    assert_eq!(run(&["replay", manifest.to_str().unwrap(), "--report", rr]), EXIT_USAGE);
}
