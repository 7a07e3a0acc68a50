//! Derivative-free simplex descent with adaptive coefficients and simplex
//! re-initialisation at the incumbent ("polishing" phases).

#[derive(Clone, Copy, Debug)]
pub struct NelderMeadOptions {
    /// Evaluation budget across all phases.
    pub max_evals: usize,
    /// A phase stops when the simplex value spread is below
    /// `ftol · (1 + |f_best|)` and its diameter below `xtol`.
    pub ftol: f64,
    pub xtol: f64,
    pub initial_step: f64,
    /// Further phases restarted at the incumbent; the run stops early once a
    /// phase improves by less than the phase tolerance.
    pub max_phases: usize,
}

impl Default for NelderMeadOptions {
    fn default() -> Self {
        NelderMeadOptions { max_evals: 40_000, ftol: 1e-14, xtol: 1e-9, initial_step: 0.5, max_phases: 8 }
    }
}

#[derive(Clone, Debug)]
pub struct NelderMeadResult {
    pub x: Vec<f64>,
    pub f: f64,
    pub evals: usize,
    /// The last phase met the tolerance and did not improve on the previous one.
    pub converged: bool,
    /// Best value after every iteration; non-increasing.
    pub trace: Vec<f64>,
    /// Index into `trace` where each phase starts.
    pub phase_starts: Vec<usize>,
}

struct Counter<F> {
    f: F,
    evals: usize,
}

impl<F: FnMut(&[f64]) -> f64> Counter<F> {
    fn eval(&mut self, x: &[f64]) -> f64 {
        self.evals += 1;
        let v = (self.f)(x);
        if v.is_finite() { v } else { f64::INFINITY }
    }
}

pub fn nelder_mead(f: impl FnMut(&[f64]) -> f64, x0: &[f64], opts: NelderMeadOptions) -> NelderMeadResult {
    let mut counter = Counter { f, evals: 0 };
    let mut best_x = x0.to_vec();
    let mut best_f = counter.eval(x0);
    let mut trace = vec![best_f];
    let mut phase_starts = Vec::new();
    let mut converged = false;
    let mut step = opts.initial_step;
    for phase in 0..opts.max_phases.max(1) {
        if counter.evals >= opts.max_evals {
            break;
        }
        phase_starts.push(trace.len());
        let before = best_f;
        let (x, fx, met) = run_phase(&mut counter, &best_x, best_f, step, opts, &mut trace);
        if fx <= best_f {
            best_x = x;
            best_f = fx;
        }
        let improvement = before - best_f;
        converged = met && phase > 0 && improvement <= opts.ftol * (1.0 + best_f.abs()) * 10.0;
        if converged {
            break;
        }
        step = (step * 0.5).max(1e-3);
    }
    NelderMeadResult { x: best_x, f: best_f, evals: counter.evals, converged, trace, phase_starts }
}

fn run_phase<F: FnMut(&[f64]) -> f64>(
    counter: &mut Counter<F>,
    x0: &[f64],
    f0: f64,
    step: f64,
    opts: NelderMeadOptions,
    trace: &mut Vec<f64>,
) -> (Vec<f64>, f64, bool) {
    let n = x0.len();
    if n == 0 {
        return (x0.to_vec(), f0, true);
    }
    let nf = n as f64;
    let (alpha, beta, gamma, delta) = (1.0, 1.0 + 2.0 / nf, 0.75 - 1.0 / (2.0 * nf), 1.0 - 1.0 / nf);
    let mut pts: Vec<Vec<f64>> = vec![x0.to_vec()];
    let mut vals = vec![f0];
    for i in 0..n {
        let mut p = x0.to_vec();
        p[i] += step;
        vals.push(counter.eval(&p));
        pts.push(p);
    }
    let mut order: Vec<usize> = (0..=n).collect();
    loop {
        order.sort_by(|&a, &b| vals[a].total_cmp(&vals[b]));
        let (lo, hi, second) = (order[0], order[n], order[n - 1]);
        trace.push(vals[lo].min(*trace.last().unwrap_or(&f64::INFINITY)));
        let spread = vals[hi] - vals[lo];
        let diameter = pts
            .iter()
            .map(|p| p.iter().zip(&pts[lo]).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max))
            .fold(0.0, f64::max);
        if spread <= opts.ftol * (1.0 + vals[lo].abs()) && diameter <= opts.xtol {
            return (pts[lo].clone(), vals[lo], true);
        }
        if counter.evals >= opts.max_evals {
            return (pts[lo].clone(), vals[lo], false);
        }
        let mut centroid = vec![0.0; n];
        for &k in &order[..n] {
            for (c, v) in centroid.iter_mut().zip(&pts[k]) {
                *c += v / nf;
            }
        }
        let along = |t: f64| -> Vec<f64> { centroid.iter().zip(&pts[hi]).map(|(c, h)| c + t * (c - h)).collect() };
        let xr = along(alpha);
        let fr = counter.eval(&xr);
        if fr < vals[lo] {
            let xe = along(alpha * beta);
            let fe = counter.eval(&xe);
            if fe < fr {
                pts[hi] = xe;
                vals[hi] = fe;
            } else {
                pts[hi] = xr;
                vals[hi] = fr;
            }
            continue;
        }
        if fr < vals[second] {
            pts[hi] = xr;
            vals[hi] = fr;
            continue;
        }
        let (xc, fc) = if fr < vals[hi] {
            let xc = along(alpha * gamma);
            let fc = counter.eval(&xc);
            (xc, fc)
        } else {
            let xc = along(-gamma);
            let fc = counter.eval(&xc);
            (xc, fc)
        };
        if fc < vals[hi].min(fr) {
            pts[hi] = xc;
            vals[hi] = fc;
            continue;
        }
        let base = pts[lo].clone();
        for &k in &order[1..] {
            let p: Vec<f64> = base.iter().zip(&pts[k]).map(|(b, x)| b + delta * (x - b)).collect();
            vals[k] = counter.eval(&p);
            pts[k] = p;
        }
    }
}
