//! Harmonic molecular bath: thermal phonon weights, the visibility factor
//! they produce, the Ohmic memory function and the dissipation rate.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::constants::{HBAR, K_B};
use crate::error::{Error, Result};
use crate::quad::{self, QuadOptions};

pub const DEFAULT_GIBBS_TAIL_TOL: f64 = 1e-12;
/// Relative accuracy requested from the dissipation-rate quadrature.
pub const DISSIPATION_REL_TOL: f64 = 1e-10;
const MAX_GIBBS_TERMS: usize = 50_000_000;
/// Starting-panel budget for the rate quadrature; reached near `ω_cτ_L ≈ 10⁵`.
pub const MAX_RATE_PANELS: usize = 4_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BathSpec {
    /// Vibrational mode frequency, rad/s.
    pub omega_phonon: f64,
    /// Kelvin.
    pub temperature: f64,
    /// Spectral cutoff, rad/s.
    pub omega_c: f64,
    pub gibbs_tail_tol: f64,
}

impl BathSpec {
    pub fn new(omega_phonon: f64, temperature: f64, omega_c: f64) -> Result<Self> {
        let bath = BathSpec { omega_phonon, temperature, omega_c, gibbs_tail_tol: DEFAULT_GIBBS_TAIL_TOL };
        bath.validate()?;
        Ok(bath)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.omega_phonon > 0.0 && self.omega_phonon.is_finite()) {
            return Err(Error::invalid("omega_phonon", format!("{} must be positive", self.omega_phonon)));
        }
        if !(self.temperature >= 0.0 && self.temperature.is_finite()) {
            return Err(Error::invalid("temperature", format!("{} must be non-negative", self.temperature)));
        }
        if !(self.omega_c > 0.0 && self.omega_c.is_finite()) {
            return Err(Error::invalid("omega_c", format!("{} must be positive", self.omega_c)));
        }
        if !(self.gibbs_tail_tol > 0.0 && self.gibbs_tail_tol < 1.0) {
            return Err(Error::invalid("gibbs_tail_tol", format!("{} not in (0, 1)", self.gibbs_tail_tol)));
        }
        Ok(())
    }

    pub fn is_zero_temperature(&self) -> bool {
        self.temperature == 0.0
    }

    /// `ħΩ / k_B T`; infinite at zero temperature.
    pub fn phonon_energy_ratio(&self) -> f64 {
        if self.is_zero_temperature() {
            f64::INFINITY
        } else {
            HBAR * self.omega_phonon / (K_B * self.temperature)
        }
    }

    /// A bath at temperature `T` whose phonon satisfies `ħΩ/k_BT = ratio`.
    pub fn with_energy_ratio(ratio: f64, omega_phonon: f64, omega_c: f64) -> Result<Self> {
        if !(ratio > 0.0) {
            return Err(Error::invalid("ratio", "must be positive"));
        }
        BathSpec::new(omega_phonon, HBAR * omega_phonon / (K_B * ratio), omega_c)
    }
}

/// Boltzmann weights `p_s = (1 − q) q^s`, `q = e^{−ħΩ/k_BT}`, truncated where
/// the remaining mass `q^{s_max+1}` drops below the bath's tail tolerance and
/// renormalized over the kept terms.
pub fn gibbs_weights(bath: &BathSpec) -> Result<(Vec<f64>, usize)> {
    bath.validate()?;
    if bath.is_zero_temperature() {
        return Ok((vec![1.0], 0));
    }
    let a = bath.phonon_energy_ratio();
    let q = (-a).exp();
    if q == 0.0 {
        return Ok((vec![1.0], 0));
    }
    // q^{S+1} < tol  <=>  S + 1 > ln(tol) / ln(q)
    let needed = (bath.gibbs_tail_tol.ln() / -a).floor();
    if needed >= MAX_GIBBS_TERMS as f64 {
        return Err(Error::invalid("temperature", format!("needs more than {MAX_GIBBS_TERMS} Gibbs terms")));
    }
    let s_max = needed as usize;
    let one_minus_q = -(-a).exp_m1();
    let mut weights = Vec::with_capacity(s_max + 1);
    let mut w = one_minus_q;
    for _ in 0..=s_max {
        weights.push(w);
        w *= q;
    }
    let total: f64 = weights.iter().sum();
    weights.iter_mut().for_each(|w| *w /= total);
    Ok((weights, s_max))
}

/// `|Σ_s p_s e^{−2ixsk}|`, summed term by term.
pub fn visibility_direct(bath: &BathSpec, x: f64, k: i64) -> Result<f64> {
    if k == 0 {
        return Err(Error::ZeroModeDifference);
    }
    let (weights, _) = gibbs_weights(bath)?;
    let theta = -2.0 * x * k as f64;
    let sum: Complex64 = weights
        .iter()
        .enumerate()
        .map(|(s, &w)| Complex64::from_polar(w, theta * s as f64))
        .sum();
    Ok(sum.norm().min(1.0))
}

/// `(1/2Z)/|sinh(ħΩ/2k_BT + ixk)|`, evaluated as
/// `1/sqrt(1 + sin²(xk)/sinh²(ħΩ/2k_BT))` so it neither overflows at low
/// temperature nor cancels at high temperature.
pub fn visibility_closed(bath: &BathSpec, x: f64, k: i64) -> Result<f64> {
    bath.validate()?;
    if k == 0 {
        return Err(Error::ZeroModeDifference);
    }
    if bath.is_zero_temperature() {
        return Err(Error::ZeroTemperature);
    }
    let half = 0.5 * bath.phonon_energy_ratio();
    let s = (x * k as f64).sin();
    let sh = half.sinh();
    Ok(1.0 / (1.0 + (s / sh).powi(2)).sqrt())
}

/// Visibility for any temperature: 1 for `k = 0` or `T = 0`, else the
/// closed form.
pub fn visibility(bath: &BathSpec, x: f64, k: i64) -> Result<f64> {
    if k == 0 || bath.is_zero_temperature() {
        bath.validate()?;
        return Ok(1.0);
    }
    visibility_closed(bath, x, k)
}

/// Mass-normalized Ohmic memory `ω² e^{−ω/ω_c}`.
pub fn ohmic_memory(omega: f64, omega_c: f64) -> f64 {
    omega * omega * (-omega / omega_c).exp()
}

/// Dissipation rate `ω_c² x²(3 + x²)/(1 + x²)²`, `x = ω_c τ_L`, exact at
/// zero temperature. Rises to `9ω_c²/8` at `x = √3` and then relaxes to `ω_c²`.
pub fn dissipation_rate_closed(omega_c: f64, tau_l: f64) -> f64 {
    let x = omega_c * tau_l;
    let x2 = x * x;
    let d = 1.0 + x2;
    omega_c * omega_c * (x2 / d) * ((3.0 + x2) / d)
}

/// `∫₀^∞ 2ω coth(ħω/2k_BT) e^{−ω/ω_c} sin²(ωτ_L/2) dω` by adaptive
/// quadrature, with `coth ≡ 1` at zero temperature.
///
/// Works in `u = ω/ω_c`. The upper limit is raised until the exponential
/// tail is below the requested relative accuracy, and starting panels are
/// no wider than a quarter period of the `sin²` factor.
pub fn dissipation_rate_quadrature(bath: &BathSpec, tau_l: f64) -> Result<f64> {
    bath.validate()?;
    if !(tau_l >= 0.0 && tau_l.is_finite()) {
        return Err(Error::invalid("tau_l", format!("{tau_l} must be non-negative")));
    }
    let x = bath.omega_c * tau_l;
    if x == 0.0 {
        return Ok(0.0);
    }
    // ħω_c / (2 k_B T), the coth argument per unit u.
    let c = if bath.is_zero_temperature() {
        f64::INFINITY
    } else {
        HBAR * bath.omega_c / (2.0 * K_B * bath.temperature)
    };
    let u_coth = move |u: f64| -> f64 {
        if c.is_infinite() {
            u
        } else if c * u < 1e-8 {
            1.0 / c
        } else {
            u / (c * u).tanh()
        }
    };
    let integrand = |u: f64| 2.0 * u_coth(u) * (-u).exp() * (0.5 * u * x).sin().powi(2);

    // The zero-temperature value bounds the thermal one from below.
    let floor = dissipation_rate_closed(1.0, x);
    let target = DISSIPATION_REL_TOL * floor;
    // ∫_W^∞ 2u coth e^{−u} du ≤ 2(W + 1 + 1/c) e^{−W}.
    let extra = if c.is_infinite() { 0.0 } else { 1.0 / c };
    let mut upper: f64 = 40.0;
    while 2.0 * (upper + 1.0 + extra) * (-upper).exp() > 0.1 * target {
        upper += 5.0;
        if upper > 745.0 {
            return Err(Error::QuadratureNonConvergence { lo: 0.0, hi: upper, error: f64::INFINITY });
        }
    }
    let panel = (std::f64::consts::PI / (2.0 * x)).min(1.0);
    let n_panels = (upper / panel).ceil();
    if n_panels > MAX_RATE_PANELS as f64 {
        return Err(Error::QuadratureNonConvergence { lo: 0.0, hi: upper, error: f64::INFINITY });
    }
    let n_panels = n_panels as usize;
    let opts = QuadOptions {
        abs_tol: 0.5 * target,
        rel_tol: DISSIPATION_REL_TOL,
        max_intervals: n_panels + 200_000,
    };
    Ok(bath.omega_c * bath.omega_c * quad::integrate(integrand, 0.0, upper, panel, opts)?)
}

/// Largest `ω_c τ_L` evaluated by quadrature in [`dissipation_rate_thermal`];
/// beyond it the oscillatory integrand needs millions of panels.
pub const QUADRATURE_MAX_X: f64 = 1e3;

const MAX_SERIES_TERMS: usize = 50_000_000;

/// The same integral as [`dissipation_rate_quadrature`] from the expansion
/// `coth(cu) = 1 + 2Σ_k e^{−2kcu}`, `c = ħω_c/2k_BT`. Each term is an
/// elementary Laplace transform,
/// `∫ u e^{−au}(1 − cos xu) du = x²(3a² + x²)/(a²(a² + x²)²)`, `a = 1 + 2kc`,
/// and the remainder is closed with the Euler–Maclaurin midpoint formula.
/// Cost does not grow with `x`.
pub fn dissipation_rate_series(bath: &BathSpec, tau_l: f64) -> Result<f64> {
    bath.validate()?;
    if !(tau_l >= 0.0 && tau_l.is_finite()) {
        return Err(Error::invalid("tau_l", format!("{tau_l} must be non-negative")));
    }
    let x = bath.omega_c * tau_l;
    if x == 0.0 {
        return Ok(0.0);
    }
    let wc2 = bath.omega_c * bath.omega_c;
    if bath.is_zero_temperature() {
        return Ok(dissipation_rate_closed(bath.omega_c, tau_l));
    }
    let x2 = x * x;
    let term = |a: f64| {
        let a2 = a * a;
        x2 * (3.0 * a2 + x2) / (a2 * (a2 + x2) * (a2 + x2))
    };
    // ∫_A^∞ term(a) da.
    let tail_integral = |a: f64| x2 / (a * (a * a + x2));
    // Odd derivatives of term(a) = a⁻² − Re (a − ix)⁻².
    let d1 = |a: f64| -2.0 / (a * a * a) + 2.0 * Complex64::new(a, -x).powi(-3).re;
    let d3 = |a: f64| -24.0 / a.powi(5) + 24.0 * Complex64::new(a, -x).powi(-5).re;

    let h = HBAR * bath.omega_c / (K_B * bath.temperature);
    let mut sum = term(1.0);
    let mut k = 0usize;
    let mut chunk = 64usize;
    loop {
        for _ in 0..chunk {
            k += 1;
            sum += 2.0 * term(1.0 + k as f64 * h);
        }
        let edge = 1.0 + (k as f64 + 0.5) * h;
        let tail = 2.0 * (tail_integral(edge) / h + h / 24.0 * d1(edge));
        let error = 2.0 * 7.0 * h.powi(3) / 5760.0 * d3(edge).abs();
        let total = sum + tail;
        if error <= 0.1 * DISSIPATION_REL_TOL * total {
            return Ok(wc2 * total);
        }
        if k >= MAX_SERIES_TERMS {
            return Err(Error::TailNotConverged { tail_tol: DISSIPATION_REL_TOL, limit: MAX_SERIES_TERMS });
        }
        chunk *= 2;
    }
}

/// Thermal dissipation rate: quadrature up to [`QUADRATURE_MAX_X`], the
/// coth expansion beyond, the closed form at zero temperature.
pub fn dissipation_rate_thermal(bath: &BathSpec, tau_l: f64) -> Result<f64> {
    if bath.omega_c * tau_l <= QUADRATURE_MAX_X {
        dissipation_rate_quadrature(bath, tau_l)
    } else {
        dissipation_rate_series(bath, tau_l)
    }
}

/// Zero-temperature dissipation rate from the time-ordered double integral
/// `∫₀^{τ_L} dt ∫₀^t dt′ C(t − t′)`, with the bath kernel
/// `C(u) = ∫ ω³ e^{−ω/ω_c} cos(ωu) dω = Re 6/(1/ω_c − iu)⁴`
/// reduced to `∫₀^{τ_L} (τ_L − u) C(u) du`.
///
/// Independent of the frequency-domain reduction; used to confirm it.
pub fn dissipation_rate_time_domain(omega_c: f64, tau_l: f64) -> Result<f64> {
    if !(omega_c > 0.0) {
        return Err(Error::invalid("omega_c", "must be positive"));
    }
    let x = omega_c * tau_l;
    if x == 0.0 {
        return Ok(0.0);
    }
    // In s = ω_c u the kernel is ω_c⁴ Re 6/(1 − is)⁴ and du = ds/ω_c.
    let kernel = |s: f64| {
        let z = Complex64::new(1.0, -s);
        (6.0 / (z * z * z * z)).re
    };
    let opts = QuadOptions { abs_tol: 1e-14, rel_tol: 1e-12, max_intervals: 100_000 };
    let v = quad::integrate(|s| (x - s) * kernel(s), 0.0, x, 0.5, opts)?;
    Ok(omega_c * omega_c * v)
}
