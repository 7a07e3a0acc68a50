//! Command implementations. Each returns a report and an exit code.

use std::path::Path;

use anyhow::{bail, Context, Result};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use qflab::bhf::{minimize, verify_pure_equals_mixed, BhfOptions, Mode};
use qflab::fock::{expectation, number_operator, FockOperator, ModeSpace, Statistics};
use qflab::gaussian::{check_purity, gaussian_from_density_matrix, gen1pdm, further_gen1pdm};
use qflab::linalg::{max_abs, CMat};
use qflab::representability::{
    assemble_gen2pdm, check_admissible, check_g, check_gen2pdm_psd, check_p, check_q, default_trials,
    polynomial_positivity_harness, two_pdm_from_state, HarnessOptions, CONDITION_TOL,
};
use qflab::wick::{oracle_expectation, parse, polynomial_expectation};

use crate::input::{read_digest, Inputs, SpaceSpec, StateSpec};
use crate::manifest::RunManifest;
use crate::{sha256_hex, Cli, Command, ModeArg, Outcome, EXIT_OK, EXIT_PROPERTY_FAILS};

pub const PURITY_TOL: f64 = 1e-7;
pub const FERMION_WICK_TOL: f64 = 1e-9;
pub const BOSON_WICK_TOL: f64 = 1e-7;
pub const DEFAULT_BOSON_CUTOFF: usize = 20;

fn verdict(ok: bool) -> i32 {
    if ok {
        EXIT_OK
    } else {
        EXIT_PROPERTY_FAILS
    }
}

fn complex(z: num_complex::Complex64) -> Value {
    json!({ "re": z.re, "im": z.im })
}

pub fn dispatch(cli: &Cli) -> Result<Outcome> {
    let mut inputs = Inputs::default();
    let (report, code) = match &cli.command {
        Command::Purity { state, space } => purity(cli, &mut inputs, state, space.as_deref())?,
        Command::Repr { state, space, samples } => repr(cli, &mut inputs, state, space.as_deref(), *samples)?,
        Command::Wick { expr, state, cross_check, space } => {
            wick(cli, &mut inputs, expr, state, *cross_check, space.as_deref())?
        }
        Command::Bhf { model, mode, samples, trace } => bhf(cli, &mut inputs, model, *mode, *samples, *trace)?,
        Command::Replay { manifest_path } => replay(&mut inputs, manifest_path)?,
    };
    Ok(Outcome { report, code, inputs: inputs.digests })
}

fn load_space(cli: &Cli, inputs: &mut Inputs, path: Option<&Path>) -> Result<Option<ModeSpace>> {
    match path {
        Some(p) => {
            let spec: SpaceSpec = inputs.load(p)?;
            Ok(Some(spec.build(cli.cutoff)?))
        }
        None => Ok(None),
    }
}

fn check_species(state: &StateSpec, space: Option<&ModeSpace>) -> Result<()> {
    if let (Some(st), Some(sp)) = (state.species(), space) {
        if st != sp.statistics() {
            bail!("state is {st} but the space is {}", sp.statistics());
        }
    }
    Ok(())
}

fn purity(cli: &Cli, inputs: &mut Inputs, state: &Path, space: Option<&Path>) -> Result<(Value, i32)> {
    let spec: StateSpec = inputs.load(state)?;
    let space = load_space(cli, inputs, space)?;
    check_species(&spec, space.as_ref())?;
    let tol = cli.tol.unwrap_or(PURITY_TOL);
    let data = match &spec {
        StateSpec::Data(d) => d.to_data()?,
        StateSpec::Pdm(_) => bail!("purity needs a state, not a bare 2-pdm"),
        other => gaussian_from_density_matrix(&other.density(space.as_ref())?.expect("state kinds carry a density"))?,
    };
    let rep = check_purity(&data, tol)?;
    let report = json!({
        "command": "purity",
        "input_kind": spec.kind(),
        "species": data.statistics,
        "modes": data.n_modes(),
        "pure": rep.pure,
        "purity": rep,
        "particles": data.gamma.trace().re,
        "first_moment_norm": data.b.norm(),
    });
    Ok((report, verdict(rep.pure)))
}

fn boson_gen2pdm(rho: &FockOperator, tol: f64, samples: usize, seed: u64) -> Result<(Value, bool)> {
    let data = gaussian_from_density_matrix(rho)?;
    let g = assemble_gen2pdm(rho)?;
    let psd = check_gen2pdm_psd(&g, tol);
    let corner = max_abs(&(g.gen1pdm_corner() - gen1pdm(&data)));
    let further = max_abs(&(g.further_corner() - further_gen1pdm(&data)));
    let harness = polynomial_positivity_harness(rho, HarnessOptions { samples, tol, seed })?;
    let ok = psd.ok && harness.sampling_ok && harness.agrees_with_gen2pdm && corner <= 1e-10 && further <= 1e-10;
    let v = json!({
        "psd": psd,
        "gen1pdm_corner_error": corner,
        "further_corner_error": further,
        "harness": harness,
        "ok": ok,
    });
    Ok((v, ok))
}

fn repr(cli: &Cli, inputs: &mut Inputs, state: &Path, space: Option<&Path>, samples: usize) -> Result<(Value, i32)> {
    let spec: StateSpec = inputs.load(state)?;
    let space = load_space(cli, inputs, space)?;
    check_species(&spec, space.as_ref())?;
    let tol = cli.tol.unwrap_or(CONDITION_TOL);
    let rho = spec.density(space.as_ref())?;
    let (gamma, gamma2, st, particles, pair_number): (CMat, CMat, Statistics, f64, Option<f64>) = match (&spec, &rho) {
        (StateSpec::Pdm(p), _) => {
            let n = p.particles.unwrap_or_else(|| p.gamma.trace().re);
            (p.gamma.clone(), p.gamma2.clone(), p.species, n, None)
        }
        (_, Some(rho)) => {
            let data = gaussian_from_density_matrix(rho)?;
            let n_op = number_operator(&rho.space);
            let n = expectation(rho, &n_op)?.re;
            let n2 = expectation(rho, &FockOperator::new(&rho.space, &n_op.matrix * &n_op.matrix)?)?.re;
            (data.gamma, two_pdm_from_state(rho)?, rho.space.statistics(), n, Some(n2 - n))
        }
        (StateSpec::Data(_), None) => bail!("repr needs a state or a (γ, Γ) pair, not bare one-particle data"),
        _ => unreachable!("density-carrying kinds return a density or an error"),
    };
    let n = gamma.nrows();
    let admissible = check_admissible(&gamma, &gamma2, particles, st, tol)?;
    let p = check_p(&gamma2, tol);
    let mut rng = ChaCha8Rng::seed_from_u64(cli.seed);
    let trials = default_trials(&mut rng, n, 50, 20);
    let g = check_g(&gamma, &gamma2, &trials, tol)?;
    let q = check_q(&gamma, &gamma2, st, tol);
    let pair_trace = gamma2.trace().re;
    let pair_trace_ok = pair_number.is_none_or(|m| (pair_trace - m).abs() <= tol * m.abs().max(1.0));
    let mut ok = admissible.ok && p.ok && g.ok && q.ok && pair_trace_ok;
    let mut report = json!({
        "command": "repr",
        "input_kind": spec.kind(),
        "species": st,
        "modes": n,
        "tol": tol,
        "admissible": admissible,
        "p": p,
        "g": g,
        "q": q,
        "pair_trace": pair_trace,
        "expected_pair_trace": pair_number,
        "pair_trace_ok": pair_trace_ok,
    });
    if let (Some(rho), Statistics::Boson) = (&rho, st) {
        let (v, gen_ok) = boson_gen2pdm(rho, tol, samples, cli.seed)?;
        report["gen2pdm"] = v;
        ok &= gen_ok;
    }
    report["ok"] = json!(ok);
    Ok((report, verdict(ok)))
}

fn wick(
    cli: &Cli,
    inputs: &mut Inputs,
    expr: &str,
    state: &Path,
    cross_check: bool,
    space: Option<&Path>,
) -> Result<(Value, i32)> {
    let poly = parse(expr)?;
    let spec: StateSpec = inputs.load(state)?;
    let mut space = load_space(cli, inputs, space)?;
    check_species(&spec, space.as_ref())?;
    if space.is_none() {
        if let StateSpec::Params(p) = &spec {
            let cutoff = match p.statistics {
                Statistics::Boson => cli.cutoff.unwrap_or(DEFAULT_BOSON_CUTOFF),
                Statistics::Fermion => 1,
            };
            space = Some(ModeSpace::new(p.n_modes(), p.statistics, cutoff)?);
        }
    }
    let data = match &spec {
        StateSpec::Params(p) => p.data()?,
        StateSpec::Data(d) => d.to_data()?,
        StateSpec::Pdm(_) => bail!("Wick expectations need quasifree data, not a bare 2-pdm"),
        other => gaussian_from_density_matrix(&other.density(space.as_ref())?.expect("state kinds carry a density"))?,
    };
    let value = polynomial_expectation(&data, &poly)?;
    let mut report = json!({
        "command": "wick",
        "expr": expr,
        "degree": poly.degree(),
        "species": data.statistics,
        "value": complex(value),
    });
    let mut code = EXIT_OK;
    if cross_check {
        let rho = match &spec {
            StateSpec::Data(_) => bail!("--cross-check needs a state that determines a density matrix"),
            other => other.density(space.as_ref())?.context("--cross-check needs a space")?,
        };
        let oracle = oracle_expectation(&rho, &poly)?;
        let tol = cli.tol.unwrap_or(match data.statistics {
            Statistics::Fermion => FERMION_WICK_TOL,
            Statistics::Boson => BOSON_WICK_TOL,
        });
        let diff = (value - oracle).norm();
        let agree = diff <= tol;
        report["cross_check"] = json!({
            "oracle": complex(oracle),
            "difference": diff,
            "tol": tol,
            "agree": agree,
            "cutoff": rho.space.cutoff(),
        });
        code = verdict(agree);
    }
    Ok((report, code))
}

/// Replaces per-iteration traces by their lengths.
fn strip_traces(v: &mut Value) {
    match v {
        Value::Object(map) => {
            if let Some(Value::Array(e)) = map.get("energies") {
                let len = e.len();
                map.remove("energies");
                map.insert("iterations".into(), json!(len));
            }
            map.values_mut().for_each(strip_traces);
        }
        Value::Array(items) => items.iter_mut().for_each(strip_traces),
        _ => {}
    }
}

fn bhf(cli: &Cli, inputs: &mut Inputs, model: &Path, mode: ModeArg, samples: usize, trace: bool) -> Result<(Value, i32)> {
    let ham = inputs.model(model)?;
    let cutoff = match ham.statistics {
        Statistics::Boson => cli.cutoff.unwrap_or(DEFAULT_BOSON_CUTOFF),
        Statistics::Fermion => 1,
    };
    let space = ModeSpace::new(ham.n_modes(), ham.statistics, cutoff)?;
    let mut opts = BhfOptions { restarts: cli.restarts, seed: cli.seed, ..BhfOptions::default() };
    if let Some(t) = cli.tol {
        opts.tol_opt = t;
    }
    let (mut report, ok) = match mode {
        ModeArg::Pure | ModeArg::Mixed => {
            let m = if mode == ModeArg::Pure { Mode::Pure } else { Mode::Mixed };
            let res = minimize(&ham, &space, m, &opts)?;
            let e_exact = qflab::bhf::exact_ground_energy(&ham, &space)?;
            let above = res.energy >= e_exact - 1e-9 * e_exact.abs().max(1.0);
            (json!({ "result": res, "e_exact": e_exact, "above_exact": above, "ok": above }), above)
        }
        ModeArg::Both => {
            let rep = verify_pure_equals_mixed(&ham, &space, samples, &opts)?;
            let ok = rep.ok;
            (json!({ "gap_report": rep, "ok": ok }), ok)
        }
    };
    if !trace {
        strip_traces(&mut report);
    }
    report["command"] = json!("bhf");
    report["mode"] = json!(mode);
    report["species"] = json!(ham.statistics);
    report["modes"] = json!(ham.n_modes());
    report["cutoff"] = json!(cutoff);
    report["restarts"] = json!(opts.restarts);
    report["seed"] = json!(opts.seed);
    Ok((report, verdict(ok)))
}

fn replay(inputs: &mut Inputs, manifest_path: &Path) -> Result<(Value, i32)> {
    let (_, digest) = read_digest(manifest_path)?;
    inputs.digests.push((manifest_path.to_path_buf(), digest));
    let manifest = RunManifest::read(manifest_path)?;
    for input in &manifest.inputs {
        let (_, now) = read_digest(Path::new(&input.path))?;
        if now != input.sha256 {
            bail!("input {} changed since the recorded run", input.path);
        }
    }
    let mut cli = manifest.config.clone();
    cli.report = None;
    cli.manifest = None;
    let outcome = dispatch(&cli)?;
    let replayed = sha256_hex(outcome.report_text().as_bytes());
    let identical = replayed == manifest.report_sha256 && outcome.code == manifest.exit_code;
    let report = json!({
        "command": "replay",
        "replayed_command": manifest.command,
        "recorded_version": manifest.version,
        "version": env!("CARGO_PKG_VERSION"),
        "recorded_sha256": manifest.report_sha256,
        "replayed_sha256": replayed,
        "recorded_exit_code": manifest.exit_code,
        "replayed_exit_code": outcome.code,
        "identical": identical,
    });
    Ok((report, verdict(identical)))
}
