//! Propagation of a manifold state through the fiber: collective dephasing
//! against a thermal phonon bath, and the Gaussian decay left by
//! segment-to-segment fluctuations of the decoupled Hamiltonian.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::bath::{self, BathSpec};
use crate::error::{Error, Result};
use crate::linalg::{c, CMatrix};
use crate::states::{ManifoldDensityMatrix, NonGaussianState};

/// Decay exponents above this underflow; the factor is set to zero.
pub const MAX_DECAY_EXPONENT: f64 = 700.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChannelParams {
    /// Mode frequencies, rad/s.
    pub omega_a: f64,
    pub omega_b: f64,
    /// Collective dephasing rate coupling `n_a + n_b` to the phonon number, rad/s.
    pub gamma_plus: f64,
    /// Differential dephasing rate coupling `n_a − n_b`, rad/s.
    pub gamma_minus: f64,
    /// Transit time, s.
    pub tau_l: f64,
    /// Fluctuation strength, s (defaults to the segment time).
    pub epsilon: f64,
}

impl ChannelParams {
    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("omega_a", self.omega_a),
            ("omega_b", self.omega_b),
            ("gamma_plus", self.gamma_plus),
            ("gamma_minus", self.gamma_minus),
            ("tau_l", self.tau_l),
            ("epsilon", self.epsilon),
        ];
        for (name, v) in fields {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::invalid(name, format!("{v} must be finite and non-negative")));
            }
        }
        Ok(())
    }

    pub fn omega_tot(&self) -> f64 {
        self.omega_a + self.omega_b
    }
}

/// How the dissipation rate is obtained for the fluctuation decay.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RateSource {
    /// Zero-temperature closed form.
    Closed,
    /// Thermal rate at the bath temperature (closed form when `T = 0`).
    Thermal,
}

fn check(state: &NonGaussianState, params: &ChannelParams, bath: &BathSpec) -> Result<()> {
    params.validate()?;
    bath.validate()?;
    let _ = state;
    Ok(())
}

/// Gibbs-averaged phase for off-diagonal order `k = n − m`:
/// `Σ_s p_s exp(−iτ_L[(E_n − E_m) + s(Γ₊ΔA₊ + Γ₋ΔA₋)])`.
///
/// On the manifold `E_n − E_m = ω_tot k`, `ΔA₊ = 2k` and `ΔA₋ = 0`, so the
/// differential term never contributes.
fn coherence_factor(params: &ChannelParams, weights: &[f64], p: usize, n: usize, m: usize) -> Complex64 {
    let k = n as f64 - m as f64;
    let a_minus = |j: usize| j as f64 - (j + p) as f64;
    let d_minus = a_minus(n) - a_minus(m);
    debug_assert_eq!(d_minus, 0.0);
    let d_plus = (2 * n + p) as f64 - (2 * m + p) as f64;
    let deterministic = Complex64::from_polar(1.0, -params.tau_l * params.omega_tot() * k);
    let per_phonon = -params.tau_l * (params.gamma_plus * d_plus + params.gamma_minus * d_minus);
    let thermal: Complex64 = weights
        .iter()
        .enumerate()
        .map(|(s, &w)| Complex64::from_polar(w, per_phonon * s as f64))
        .sum();
    deterministic * thermal
}

/// `ρ_nm = c_n c_m* Σ_s p_s e^{−iτ_L(ω_tot + 2Γ₊s)(n−m)}`.
pub fn evolve_dephasing(
    state: &NonGaussianState,
    params: &ChannelParams,
    bath: &BathSpec,
) -> Result<ManifoldDensityMatrix> {
    check(state, params, bath)?;
    let (weights, _) = bath::gibbs_weights(bath)?;
    let dim = state.coeffs().len();
    // The factor depends on n − m only; compute each order once.
    let factors: Vec<Complex64> = (0..dim)
        .map(|k| if k == 0 { c(1.0) } else { coherence_factor(params, &weights, state.p(), k, 0) })
        .collect();
    let coeffs = state.coeffs();
    let rho = CMatrix::from_fn(dim, dim, |n, m| {
        let f = if n >= m { factors[n - m] } else { factors[m - n].conj() };
        coeffs[n] * coeffs[m].conj() * f
    });
    Ok(ManifoldDensityMatrix::from_parts_unchecked(state.p(), rho))
}

/// `⟨ψ|ρ(τ_L)|ψ⟩ = Σ_s p_s |Σ_n |c_n|² e^{−iτ_L n(ω_tot + 2Γ₊s)}|²`.
pub fn fidelity(state: &NonGaussianState, params: &ChannelParams, bath: &BathSpec) -> Result<f64> {
    check(state, params, bath)?;
    let (weights, _) = bath::gibbs_weights(bath)?;
    let probs: Vec<f64> = state.coeffs().iter().map(|z| z.norm_sqr()).collect();
    let f: f64 = weights
        .iter()
        .enumerate()
        .map(|(s, &w)| {
            let rate = params.omega_tot() + 2.0 * params.gamma_plus * s as f64;
            let amp: Complex64 = probs
                .iter()
                .enumerate()
                .map(|(n, &pn)| Complex64::from_polar(pn, -params.tau_l * rate * n as f64))
                .sum();
            w * amp.norm_sqr()
        })
        .sum();
    Ok(f.clamp(0.0, 1.0))
}

/// Transit times `lπ/(ω_tot + 2Γ₊s)`, `l = 1..=l_max`.
///
/// The `s`-phonon branch picks up the phase `e^{−iθn}` with `θ = lπ`, so only
/// even `l` return the state to itself; odd `l` leave the parity-weighted
/// fidelity `|Σ_n |c_n|² (−1)^n|²`. See [`revival_period`].
pub fn recovery_times(params: &ChannelParams, s: usize, l_max: usize) -> Result<Vec<f64>> {
    params.validate()?;
    let rate = params.omega_tot() + 2.0 * params.gamma_plus * s as f64;
    if rate <= 0.0 {
        return Err(Error::ZeroFrequency);
    }
    Ok((1..=l_max).map(|l| l as f64 * std::f64::consts::PI / rate).collect())
}

/// Shortest transit time `2π/(ω_tot + 2Γ₊s)` after which the `s`-phonon
/// branch is back to the initial state.
pub fn revival_period(params: &ChannelParams, s: usize) -> Result<f64> {
    Ok(2.0 * recovery_times(params, s, 1)?[0])
}

/// Transit time `π/Γ₊` at which every visibility factor returns to one.
pub fn visibility_revival_time(params: &ChannelParams) -> Result<f64> {
    params.validate()?;
    if params.gamma_plus <= 0.0 {
        return Err(Error::ZeroFrequency);
    }
    Ok(std::f64::consts::PI / params.gamma_plus)
}

/// `Σ_{k≥1} 2 w(k) Σ_n |c_n||c_{n+k}|` for a per-order weight `w`.
fn weighted_pair_sum(state: &NonGaussianState, mut weight: impl FnMut(usize) -> Result<f64>) -> Result<f64> {
    let mags: Vec<f64> = state.coeffs().iter().map(|z| z.norm()).collect();
    let mut total = 0.0;
    for k in 1..mags.len() {
        let w = weight(k)?;
        if w == 0.0 {
            continue;
        }
        let pairs: f64 = mags.iter().zip(&mags[k..]).map(|(a, b)| a * b).sum();
        total += 2.0 * w * pairs;
    }
    Ok(total)
}

/// Negativity after dephasing: each off-diagonal pair weighted by the
/// phonon visibility `v(τ_LΓ₊, n − m)`.
pub fn negativity_after_dephasing(
    state: &NonGaussianState,
    params: &ChannelParams,
    bath: &BathSpec,
) -> Result<f64> {
    check(state, params, bath)?;
    let x = params.tau_l * params.gamma_plus;
    weighted_pair_sum(state, |k| bath::visibility(bath, x, k as i64))
}

/// Dissipation rate at the transit time from the chosen source.
pub fn dissipation_rate(params: &ChannelParams, bath: &BathSpec, source: RateSource) -> Result<f64> {
    match source {
        RateSource::Thermal if !bath.is_zero_temperature() => bath::dissipation_rate_thermal(bath, params.tau_l),
        _ => Ok(bath::dissipation_rate_closed(bath.omega_c, params.tau_l)),
    }
}

/// `exp(−4ε²Γ k²)`, zero once the exponent passes [`MAX_DECAY_EXPONENT`].
pub fn decay_factor(epsilon: f64, rate: f64, k: usize) -> f64 {
    let exponent = 4.0 * epsilon * epsilon * rate * (k * k) as f64;
    if exponent > MAX_DECAY_EXPONENT {
        0.0
    } else {
        (-exponent).exp()
    }
}

/// Dephased state with every coherence of order `k` further multiplied by
/// `exp(−4ε²Γ(τ_L)k²)`. Diagonal entries are untouched.
pub fn evolve_with_dissipation(
    state: &NonGaussianState,
    params: &ChannelParams,
    bath: &BathSpec,
) -> Result<ManifoldDensityMatrix> {
    let dephased = evolve_dephasing(state, params, bath)?;
    let rate = dissipation_rate(params, bath, RateSource::Thermal)?;
    let mut rho = dephased.matrix().clone();
    let dim = rho.nrows();
    for n in 0..dim {
        for m in 0..dim {
            if n != m {
                rho[(n, m)] *= decay_factor(params.epsilon, rate, n.abs_diff(m));
            }
        }
    }
    Ok(ManifoldDensityMatrix::from_parts_unchecked(state.p(), rho))
}

/// Low-temperature negativity with fluctuation decay:
/// `Σ_{n≠m} e^{−4ε²Γ(τ_L)(n−m)²} |c_n||c_m|`, Γ from the closed form.
/// The bath temperature is ignored; see [`negativity_combined`].
pub fn negativity_dissipative(
    state: &NonGaussianState,
    params: &ChannelParams,
    bath: &BathSpec,
) -> Result<f64> {
    check(state, params, bath)?;
    let rate = dissipation_rate(params, bath, RateSource::Closed)?;
    weighted_pair_sum(state, |k| Ok(decay_factor(params.epsilon, rate, k)))
}

/// Visibility and fluctuation decay multiplied pair by pair, with the
/// thermal Γ at the bath temperature. Any interplay between the two
/// mechanisms beyond this product is not modeled.
pub fn negativity_combined(
    state: &NonGaussianState,
    params: &ChannelParams,
    bath: &BathSpec,
) -> Result<f64> {
    check(state, params, bath)?;
    let rate = dissipation_rate(params, bath, RateSource::Thermal)?;
    let x = params.tau_l * params.gamma_plus;
    weighted_pair_sum(state, |k| Ok(bath::visibility(bath, x, k as i64)? * decay_factor(params.epsilon, rate, k)))
}
