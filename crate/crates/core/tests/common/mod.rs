//! Shared oracles for the integration tests: numeric quadrature and central
//! finite differences, kept independent of the library's own evaluation
//! paths.

#![allow(dead_code)]

/// Adaptive Simpson quadrature of `f` over [a, b] to absolute tolerance
/// `tol`. A minimum subdivision depth guards against the early-termination
/// trap when the first probe points all miss the integrand's mass.
pub fn simpson<F: Fn(f64) -> f64 + Copy>(f: F, a: f64, b: f64, tol: f64) -> f64 {
    fn rule<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> f64 {
        let m = 0.5 * (a + b);
        (b - a) / 6.0 * (f(a) + 4.0 * f(m) + f(b))
    }
    fn recurse<F: Fn(f64) -> f64>(
        f: &F,
        a: f64,
        b: f64,
        whole: f64,
        tol: f64,
        depth: usize,
        min_depth: usize,
    ) -> f64 {
        let m = 0.5 * (a + b);
        let left = rule(f, a, m);
        let right = rule(f, m, b);
        let settled = min_depth == 0 && (left + right - whole).abs() <= 15.0 * tol;
        if depth == 0 || settled {
            left + right + (left + right - whole) / 15.0
        } else {
            let next_min = min_depth.saturating_sub(1);
            recurse(f, a, m, left, tol / 2.0, depth - 1, next_min)
                + recurse(f, m, b, right, tol / 2.0, depth - 1, next_min)
        }
    }
    recurse(&f, a, b, rule(&f, a, b), tol, 48, 8)
}

/// Central finite difference of `f` at `x`.
pub fn central_diff<F: Fn(f64) -> f64>(f: F, x: f64, h: f64) -> f64 {
    (f(x + h) - f(x - h)) / (2.0 * h)
}

/// Sample mean.
pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Sample standard deviation (n - 1 denominator).
pub fn sample_sd(xs: &[f64]) -> f64 {
    let m = mean(xs);
    (xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (xs.len() - 1) as f64).sqrt()
}

/// Coefficient of variation.
pub fn cv(xs: &[f64]) -> f64 {
    sample_sd(xs) / mean(xs)
}
