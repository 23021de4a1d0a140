//! Derivative-free Nelder-Mead simplex minimizer with restarts.
//!
//! Estimation runs in unconstrained transformed coordinates, so plain
//! simplex moves suffice; a stalled or converged run is restarted from a
//! perturbed simplex around the incumbent a configurable number of times.

/// Tolerances and iteration budget.
#[derive(Debug, Clone, Copy)]
pub struct NelderMeadOptions {
    /// Relative simplex diameter below which the run stops.
    pub tol_x: f64,
    /// Objective spread (relative to the incumbent) below which the run stops.
    pub tol_f: f64,
    pub max_iter: usize,
    /// Additional runs from a perturbed simplex around the incumbent.
    pub restarts: usize,
}

impl Default for NelderMeadOptions {
    fn default() -> Self {
        NelderMeadOptions { tol_x: 1e-8, tol_f: 1e-10, max_iter: 100_000, restarts: 2 }
    }
}

#[derive(Debug, Clone)]
pub struct OptimOutcome {
    pub x: Vec<f64>,
    pub f: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Incumbent objective after each improvement; nonincreasing.
    pub best_trace: Vec<f64>,
}

const REFLECT: f64 = 1.0;
const EXPAND: f64 = 2.0;
const CONTRACT: f64 = 0.5;
const SHRINK: f64 = 0.5;

/// Minimize `f` from `x0`, building the initial simplex with per-coordinate
/// steps `scale`. NaN objective values are treated as +inf.
pub fn minimize<F: FnMut(&[f64]) -> f64>(
    mut f: F,
    x0: &[f64],
    scale: &[f64],
    opts: &NelderMeadOptions,
) -> OptimOutcome {
    assert_eq!(x0.len(), scale.len());
    let mut eval = |x: &[f64]| -> f64 {
        let v = f(x);
        if v.is_nan() {
            f64::INFINITY
        } else {
            v
        }
    };
    let mut best_trace = Vec::new();
    let mut total_iters = 0;
    let mut incumbent = x0.to_vec();
    let mut incumbent_f = eval(&incumbent);
    best_trace.push(incumbent_f);
    let mut converged = false;
    for run in 0..=opts.restarts {
        let step: Vec<f64> = scale
            .iter()
            .map(|&s| if run == 0 { s } else { s * 0.25 })
            .collect();
        let (x, fx, iters, ok) = single_run(&mut eval, &incumbent, &step, opts, &mut best_trace);
        total_iters += iters;
        if fx < incumbent_f {
            incumbent = x;
            incumbent_f = fx;
        }
        converged = ok;
    }
    OptimOutcome {
        x: incumbent,
        f: incumbent_f,
        iterations: total_iters,
        converged,
        best_trace,
    }
}

fn single_run<F: FnMut(&[f64]) -> f64>(
    eval: &mut F,
    x0: &[f64],
    scale: &[f64],
    opts: &NelderMeadOptions,
    best_trace: &mut Vec<f64>,
) -> (Vec<f64>, f64, usize, bool) {
    let n = x0.len();
    let mut simplex: Vec<(f64, Vec<f64>)> = Vec::with_capacity(n + 1);
    simplex.push((eval(x0), x0.to_vec()));
    for i in 0..n {
        let mut v = x0.to_vec();
        v[i] += if scale[i] != 0.0 { scale[i] } else { 0.1 };
        simplex.push((eval(&v), v));
    }
    let order = |s: &mut Vec<(f64, Vec<f64>)>| {
        s.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap_or(std::cmp::Ordering::Equal));
    };
    order(&mut simplex);
    let mut best_seen = simplex[0].0;
    best_trace.push(best_seen);

    let mut iterations = 0;
    let mut converged = false;
    while iterations < opts.max_iter {
        iterations += 1;

        // convergence: relative diameter and objective spread
        let best = &simplex[0];
        let worst = &simplex[n];
        let diam = simplex[1..]
            .iter()
            .map(|(_, v)| {
                v.iter()
                    .zip(&best.1)
                    .map(|(a, b)| (a - b).abs() / b.abs().max(1.0))
                    .fold(0.0_f64, f64::max)
            })
            .fold(0.0_f64, f64::max);
        let spread = worst.0 - best.0;
        if diam < opts.tol_x && spread.abs() < opts.tol_f * best.0.abs().max(1.0) {
            converged = true;
            break;
        }

        let mut centroid = vec![0.0; n];
        for (_, v) in &simplex[..n] {
            for (c, x) in centroid.iter_mut().zip(v) {
                *c += x / n as f64;
            }
        }
        let worst_f = simplex[n].0;
        let second_worst_f = simplex[n - 1].0;
        let best_f = simplex[0].0;

        let at = |coef: f64, toward: &[f64]| -> Vec<f64> {
            centroid
                .iter()
                .zip(toward)
                .map(|(c, w)| c + coef * (c - w))
                .collect()
        };
        let reflected = at(REFLECT, &simplex[n].1);
        let f_r = eval(&reflected);
        if f_r < best_f {
            let expanded = at(REFLECT * EXPAND, &simplex[n].1);
            let f_e = eval(&expanded);
            if f_e < f_r {
                simplex[n] = (f_e, expanded);
            } else {
                simplex[n] = (f_r, reflected);
            }
        } else if f_r < second_worst_f {
            simplex[n] = (f_r, reflected);
        } else {
            let (contracted, f_c) = if f_r < worst_f {
                let c = at(REFLECT * CONTRACT, &simplex[n].1);
                let fc = eval(&c);
                (c, fc)
            } else {
                let c = at(-CONTRACT, &simplex[n].1);
                let fc = eval(&c);
                (c, fc)
            };
            if f_c < worst_f.min(f_r) {
                simplex[n] = (f_c, contracted);
            } else {
                // shrink toward the best vertex
                let best_x = simplex[0].1.clone();
                for (fv, v) in simplex.iter_mut().skip(1) {
                    for (x, b) in v.iter_mut().zip(&best_x) {
                        *x = b + SHRINK * (*x - *b);
                    }
                    *fv = eval(v);
                }
            }
        }
        order(&mut simplex);
        if simplex[0].0 < best_seen {
            best_seen = simplex[0].0;
            best_trace.push(best_seen);
        }
    }
    let (f, x) = simplex.swap_remove(0);
    (x, f, iterations, converged)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimizes_rosenbrock() {
        let f = |x: &[f64]| (1.0 - x[0]).powi(2) + 100.0 * (x[1] - x[0] * x[0]).powi(2);
        let out = minimize(f, &[-1.2, 1.0], &[0.5, 0.5], &NelderMeadOptions::default());
        assert!(out.converged);
        assert!((out.x[0] - 1.0).abs() < 1e-5, "x = {:?}", out.x);
        assert!((out.x[1] - 1.0).abs() < 1e-5);
    }

    #[test]
    fn best_trace_is_nonincreasing() {
        let f = |x: &[f64]| x.iter().map(|v| v * v).sum::<f64>() + (x[0] * 3.0).sin();
        let out = minimize(f, &[2.0, -3.0, 1.0], &[0.4; 3], &NelderMeadOptions::default());
        for w in out.best_trace.windows(2) {
            assert!(w[1] <= w[0]);
        }
    }

    #[test]
    fn nan_objective_is_rejected_not_propagated() {
        let f = |x: &[f64]| {
            if x[0] < 0.0 {
                f64::NAN
            } else {
                (x[0] - 2.0).powi(2)
            }
        };
        let out = minimize(f, &[1.0], &[0.5], &NelderMeadOptions::default());
        assert!((out.x[0] - 2.0).abs() < 1e-6);
        assert!(out.f.is_finite());
    }
}
