//! Central finite differences for gradients, Jacobians, and Hessians of
//! objective functions evaluated in raw parameter space.

fn step(x: f64, rel: f64) -> f64 {
    rel * x.abs().max(1.0)
}

pub fn gradient<F: FnMut(&[f64]) -> f64>(mut f: F, x: &[f64], rel_step: f64) -> Vec<f64> {
    let mut g = vec![0.0; x.len()];
    let mut xp = x.to_vec();
    for i in 0..x.len() {
        let h = step(x[i], rel_step);
        xp[i] = x[i] + h;
        let fp = f(&xp);
        xp[i] = x[i] - h;
        let fm = f(&xp);
        xp[i] = x[i];
        g[i] = (fp - fm) / (2.0 * h);
    }
    g
}

/// Jacobian of a vector-valued map; `out[k][i] = d f_k / d x_i`.
pub fn jacobian<F: FnMut(&[f64]) -> Vec<f64>>(
    mut f: F,
    x: &[f64],
    n_out: usize,
    rel_step: f64,
) -> Vec<Vec<f64>> {
    let mut jac = vec![vec![0.0; x.len()]; n_out];
    let mut xp = x.to_vec();
    for i in 0..x.len() {
        let h = step(x[i], rel_step);
        xp[i] = x[i] + h;
        let fp = f(&xp);
        xp[i] = x[i] - h;
        let fm = f(&xp);
        xp[i] = x[i];
        for k in 0..n_out {
            jac[k][i] = (fp[k] - fm[k]) / (2.0 * h);
        }
    }
    jac
}

pub fn hessian<F: FnMut(&[f64]) -> f64>(mut f: F, x: &[f64], rel_step: f64) -> Vec<Vec<f64>> {
    let n = x.len();
    let f0 = f(x);
    let mut h = vec![vec![0.0; n]; n];
    let mut xp = x.to_vec();
    for i in 0..n {
        let hi = step(x[i], rel_step);
        xp[i] = x[i] + hi;
        let fp = f(&xp);
        xp[i] = x[i] - hi;
        let fm = f(&xp);
        xp[i] = x[i];
        h[i][i] = (fp - 2.0 * f0 + fm) / (hi * hi);
        for j in (i + 1)..n {
            let hj = step(x[j], rel_step);
            xp[i] = x[i] + hi;
            xp[j] = x[j] + hj;
            let fpp = f(&xp);
            xp[j] = x[j] - hj;
            let fpm = f(&xp);
            xp[i] = x[i] - hi;
            xp[j] = x[j] + hj;
            let fmp = f(&xp);
            xp[j] = x[j] - hj;
            let fmm = f(&xp);
            xp[i] = x[i];
            xp[j] = x[j];
            let v = (fpp - fpm - fmp + fmm) / (4.0 * hi * hj);
            h[i][j] = v;
            h[j][i] = v;
        }
    }
    h
}
