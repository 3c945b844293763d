//! Fiber design calculator: transit time, the largest admissible
//! phase-shifter spacing, segment timing, and the amorphous-silica preset.

use serde::{Deserialize, Serialize};

use crate::bath::{dissipation_rate_closed, BathSpec};
use crate::channel::ChannelParams;
use crate::constants::{C_LIGHT, HBAR, K_B};
use crate::error::{Error, Result};

/// How a quoted cutoff frequency is read.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum FrequencyUnit {
    /// The number is already in rad/s. With this reading `ħω_c/k_B` for
    /// 2.62e10 gives the quoted 0.2 K.
    #[default]
    Angular,
    /// The number is a cyclic frequency and is multiplied by 2π.
    Hertz,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FiberSpec {
    /// Meters.
    pub length: f64,
    pub group_index: f64,
    /// Cutoff as quoted; see `unit`.
    pub omega_c: f64,
    #[serde(default)]
    pub unit: FrequencyUnit,
    /// Allowed error probability over the whole fiber.
    pub error_budget: f64,
    /// Phase-shifter spacing in meters, when chosen.
    pub delta_spacing: Option<f64>,
}

impl FiberSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.length > 0.0 && self.length.is_finite()) {
            return Err(Error::invalid("length", format!("{} must be positive", self.length)));
        }
        if !(self.group_index >= 1.0 && self.group_index.is_finite()) {
            return Err(Error::invalid("group_index", format!("{} must be at least 1", self.group_index)));
        }
        if !(self.omega_c > 0.0 && self.omega_c.is_finite()) {
            return Err(Error::invalid("omega_c", format!("{} must be positive", self.omega_c)));
        }
        if !(self.error_budget > 0.0 && self.error_budget < 1.0) {
            return Err(Error::invalid("error_budget", format!("{} not in (0, 1)", self.error_budget)));
        }
        if let Some(d) = self.delta_spacing {
            if !(d >= 0.0 && d.is_finite()) {
                return Err(Error::invalid("delta_spacing", format!("{d} must be non-negative")));
            }
        }
        Ok(())
    }

    /// Cutoff in rad/s.
    pub fn angular_cutoff(&self) -> f64 {
        match self.unit {
            FrequencyUnit::Angular => self.omega_c,
            FrequencyUnit::Hertz => 2.0 * std::f64::consts::PI * self.omega_c,
        }
    }

    /// Group velocity `c/n_g`.
    pub fn velocity(&self) -> f64 {
        C_LIGHT / self.group_index
    }
}

/// `τ_L = L n_g / c`.
pub fn transit_time(fiber: &FiberSpec) -> Result<f64> {
    fiber.validate()?;
    Ok(fiber.length / fiber.velocity())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SpacingBound {
    /// `ω_c τ_L` the bound was evaluated at.
    pub x: f64,
    /// Meters; infinite at `x = 0`.
    pub finite: f64,
    /// The `x → ∞` limit `v/(2ω_c) sqrt(ln 1/(1−δ))`, meters.
    pub asymptotic: f64,
}

/// Largest spacing keeping the first-order coherence decay
/// `exp(−4(Δ/v)²Γ(τ_L))` above `1 − δ`. Uses the fiber's transit time when
/// `tau_l` is `None`.
pub fn max_spacing(fiber: &FiberSpec, tau_l: Option<f64>) -> Result<SpacingBound> {
    fiber.validate()?;
    let tau_l = match tau_l {
        Some(t) if t >= 0.0 && t.is_finite() => t,
        Some(t) => return Err(Error::invalid("tau_l", format!("{t} must be non-negative"))),
        None => transit_time(fiber)?,
    };
    let wc = fiber.angular_cutoff();
    let x = wc * tau_l;
    let log_budget = -(-fiber.error_budget).ln_1p();
    let asymptotic = fiber.velocity() / (2.0 * wc) * log_budget.sqrt();
    // (1+x²)²/(x²(3+x²)) is the reciprocal of the normalized rate.
    let rate = dissipation_rate_closed(1.0, x);
    let finite = if rate == 0.0 { f64::INFINITY } else { asymptotic / rate.sqrt() };
    Ok(SpacingBound { x, finite, asymptotic })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SegmentTiming {
    /// Time between phase shifters, `Δ n_g / c`.
    pub tau: f64,
    /// `τ ω_c`, the segment time in units of the bath correlation time.
    pub tau_omega_c: f64,
    /// Whether `τ ω_c < 1`.
    pub separated: bool,
}

pub fn segment_time(fiber: &FiberSpec) -> Result<SegmentTiming> {
    fiber.validate()?;
    let delta = fiber.delta_spacing.ok_or(Error::MissingSpacing)?;
    let tau = delta / fiber.velocity();
    let tau_omega_c = tau * fiber.angular_cutoff();
    Ok(SegmentTiming { tau, tau_omega_c, separated: tau_omega_c < 1.0 })
}

/// `ceil(L/Δ)`.
pub fn segment_count(fiber: &FiberSpec) -> Result<u64> {
    fiber.validate()?;
    let delta = fiber.delta_spacing.ok_or(Error::MissingSpacing)?;
    if delta == 0.0 {
        return Err(Error::invalid("delta_spacing", "must be positive to count segments"));
    }
    Ok((fiber.length / delta).ceil() as u64)
}

/// `4ε²Γ(τ_L)` with `ε = Δ/v`, the exponent the spacing bound constrains.
pub fn fluctuation_exponent(fiber: &FiberSpec, tau_l: f64) -> Result<f64> {
    let timing = segment_time(fiber)?;
    let wc = fiber.angular_cutoff();
    Ok(4.0 * timing.tau * timing.tau * dissipation_rate_closed(wc, tau_l))
}

/// `ħω_c / k_B` in kelvin.
pub fn debye_temperature(omega_c: f64) -> f64 {
    HBAR * omega_c / K_B
}

/// Telecom carrier used for both modes in the preset (1550 nm), rad/s.
pub const TELECOM_OMEGA: f64 = 2.0 * std::f64::consts::PI * C_LIGHT / 1.55e-6;

/// Fluctuation strength and segment time used for the silica figures, s.
pub const SILICA_EPSILON: f64 = 4.325e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Preset {
    pub fiber: FiberSpec,
    pub bath: BathSpec,
    pub channel: ChannelParams,
}

/// One kilometer of amorphous-silica fiber at 0.2 K: `n_g = 1.6`,
/// `ω_c = 2.62e10 rad/s`, `δ = 0.05`, `Δ = 0.8 mm`. Both modes sit at a
/// 1550 nm carrier and there is no collective dephasing.
pub fn silica_preset() -> Preset {
    let fiber = FiberSpec {
        length: 1000.0,
        group_index: 1.6,
        omega_c: 2.62e10,
        unit: FrequencyUnit::Angular,
        error_budget: 0.05,
        delta_spacing: Some(0.8e-3),
    };
    let bath = BathSpec {
        omega_phonon: fiber.angular_cutoff(),
        temperature: 0.2,
        omega_c: fiber.angular_cutoff(),
        gibbs_tail_tol: crate::bath::DEFAULT_GIBBS_TAIL_TOL,
    };
    let channel = ChannelParams {
        omega_a: TELECOM_OMEGA,
        omega_b: TELECOM_OMEGA,
        gamma_plus: 0.0,
        gamma_minus: 0.0,
        tau_l: fiber.length / fiber.velocity(),
        epsilon: SILICA_EPSILON,
    };
    Preset { fiber, bath, channel }
}
