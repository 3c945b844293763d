//! Special functions: factorial ratios in log space and Hermite polynomials.

/// `ln((n + p)! / n!)`, accumulated as `Σ_{k=1}^{p} ln(n + k)`.
///
/// Exact up to rounding for any `n`; never forms a factorial.
pub fn ln_factorial_ratio(n: usize, p: usize) -> f64 {
    (1..=p).map(|k| ((n + k) as f64).ln()).sum()
}

/// Physicists' Hermite polynomial `H_n(x)` by three-term recurrence.
///
/// Grows like `2^n sqrt(n!)`; use [`hermite_functions`] for large `n`.
pub fn hermite(n: usize, x: f64) -> f64 {
    let mut h_prev = 1.0;
    if n == 0 {
        return h_prev;
    }
    let mut h = 2.0 * x;
    for k in 1..n {
        let next = 2.0 * x * h - 2.0 * k as f64 * h_prev;
        h_prev = h;
        h = next;
    }
    h
}

/// Normalized oscillator eigenfunctions
/// `φ_k(x) = H_k(x) e^{-x²/2} / sqrt(2^k k! sqrt(π))` for `k = 0..=n`.
pub fn hermite_functions(n: usize, x: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(n + 1);
    let phi0 = std::f64::consts::PI.powf(-0.25) * (-0.5 * x * x).exp();
    out.push(phi0);
    if n == 0 {
        return out;
    }
    out.push(std::f64::consts::SQRT_2 * x * phi0);
    for k in 1..n {
        let kf = k as f64;
        let next = (2.0 / (kf + 1.0)).sqrt() * x * out[k] - (kf / (kf + 1.0)).sqrt() * out[k - 1];
        out.push(next);
    }
    out
}
