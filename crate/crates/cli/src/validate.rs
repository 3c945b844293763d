//! Cross-oracle checks: each quantity is computed by two independent routes
//! and compared against a named tolerance.

use std::f64::consts::PI;

use clap::ValueEnum;
use ngfiber_core::bath::{self, BathSpec};
use ngfiber_core::bb::{self, JointModel, PulsePlacement, ScanPoint, SegmentProfile, ToyBath, DEFAULT_DIM_BUDGET};
use ngfiber_core::entanglement::{negativity_analytic, negativity_numeric};
use ngfiber_core::linalg::{self, CVector};
use ngfiber_core::states::{build_state, build_state_truncated, DEFAULT_TAIL_TOL};
use ngfiber_core::{Complex64, FockSpace, Result};
use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
pub enum Level {
    Fast,
    Full,
}

/// Acceptance thresholds for every check. Tightening any of them past what
/// the numerics reach makes the named check fail.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Tolerances {
    pub negativity: f64,
    pub visibility: f64,
    pub dissipation_rel: f64,
    pub flip: f64,
    pub dfs: f64,
    pub suppression_ratio: f64,
    /// Expected log-log slope of the amplitude error against segment time.
    pub amplitude_slope: f64,
    pub slope_halfwidth: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            negativity: 1e-9,
            visibility: 1e-10,
            dissipation_rel: 1e-6,
            flip: 1e-13,
            dfs: 1e-12,
            suppression_ratio: 10.0,
            amplitude_slope: 1.0,
            slope_halfwidth: 0.15,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub passed: bool,
    /// Measured discrepancy (or the measured statistic for non-error checks).
    pub measured: f64,
    pub tolerance: f64,
    pub detail: String,
}

impl CheckOutcome {
    fn below(name: &'static str, measured: f64, tolerance: f64, detail: impl Into<String>) -> Self {
        CheckOutcome { name, passed: measured <= tolerance, measured, tolerance, detail: detail.into() }
    }

    fn failed(name: &'static str, tolerance: f64, err: impl std::fmt::Display) -> Self {
        CheckOutcome { name, passed: false, measured: f64::NAN, tolerance, detail: err.to_string() }
    }
}

fn guard(name: &'static str, tolerance: f64, f: impl FnOnce() -> Result<CheckOutcome>) -> CheckOutcome {
    f().unwrap_or_else(|e| CheckOutcome::failed(name, tolerance, e))
}

pub fn negativity_series_vs_eigensolver(tol: &Tolerances) -> CheckOutcome {
    let name = "negativity_series_vs_eigensolver";
    guard(name, tol.negativity, || {
        let mut worst: f64 = 0.0;
        for p in 0..=3 {
            for k in 1..=8 {
                let state = build_state(p, Complex64::new(0.1 * k as f64, 0.0), DEFAULT_TAIL_TOL)?;
                let diff = (negativity_analytic(&state) - negativity_numeric(&state.density_matrix())?).abs();
                worst = worst.max(diff);
            }
        }
        Ok(CheckOutcome::below(name, worst, tol.negativity, "p 0..3, |zeta| 0.1..0.8"))
    })
}

pub fn visibility_closed_vs_direct(tol: &Tolerances) -> CheckOutcome {
    let name = "visibility_closed_vs_direct";
    guard(name, tol.visibility, || {
        let mut worst: f64 = 0.0;
        let mut count = 0;
        for ratio in [0.25, 0.7, 1.5, 3.0] {
            let bath = BathSpec::with_energy_ratio(ratio, 1.0, 1.0)?;
            for k in 1..=5i64 {
                for i in 0..20 {
                    let x = -2.0 + 0.21 * i as f64;
                    let closed = bath::visibility_closed(&bath, x, k)?;
                    worst = worst.max((closed - bath::visibility_direct(&bath, x, k)?).abs());
                    let shifted = bath::visibility_direct(&bath, x + PI / k as f64, k)?;
                    worst = worst.max((shifted - closed).abs());
                    count += 1;
                }
            }
        }
        Ok(CheckOutcome::below(name, worst, tol.visibility, format!("{count} grid points with period shift")))
    })
}

pub fn dissipation_closed_vs_quadrature(tol: &Tolerances) -> CheckOutcome {
    let name = "dissipation_closed_vs_quadrature";
    guard(name, tol.dissipation_rel, || {
        let bath = BathSpec::new(1.0, 0.0, 1.0)?;
        let mut worst: f64 = 0.0;
        for x in [0.01, 0.1, 1.0, 10.0, 100.0] {
            let closed = bath::dissipation_rate_closed(1.0, x);
            let quad = bath::dissipation_rate_quadrature(&bath, x)?;
            worst = worst.max((quad - closed).abs() / closed);
        }
        Ok(CheckOutcome::below(name, worst, tol.dissipation_rel, "x in {0.01, 0.1, 1, 10, 100}, relative"))
    })
}

/// `Π H_Raman Π† + H_Raman` on a joint space of the given shape.
pub fn raman_flip_defect(system_cut: usize, phonon_cut: usize) -> Result<(usize, f64)> {
    let bath = ToyBath {
        frequencies: vec![0.7, 1.3],
        raman_couplings: vec![0.3, 0.2],
        dephasing_a: vec![0.05, 0.01],
        dephasing_b: vec![0.02, 0.03],
        phonon_cut,
    };
    let model = JointModel::new(system_cut, bath, 2.0, 1.0, DEFAULT_DIM_BUDGET)?;
    let terms = bb::build_terms(&model, 0, None)?;
    let pi = model.space.phase_shifter_diagonal();
    let raman = terms.raman.conjugate_by_diagonal(&pi).plus(&terms.raman).max_norm();
    let deph = terms.dephasing.conjugate_by_diagonal(&pi).plus(&terms.dephasing.scaled(Complex64::new(-1.0, 0.0)));
    let system = model.space.system();
    let t = ngfiber_core::fock::transfer(system, ngfiber_core::Mode::A);
    let flipped = linalg::conjugate_by_diagonal(&ngfiber_core::fock::phase_shifter_diagonal(system), t.matrix());
    let exchange = linalg::max_norm(&(flipped + t.matrix()));
    Ok((model.space.dim(), raman.max(exchange).max(deph.max_norm())))
}

pub fn phase_shifter_flip(tol: &Tolerances, system_cut: usize, phonon_cut: usize) -> CheckOutcome {
    let name = if phonon_cut > 5 { "phase_shifter_flip_at_budget" } else { "phase_shifter_flip" };
    guard(name, tol.flip, || {
        let (dim, defect) = raman_flip_defect(system_cut, phonon_cut)?;
        Ok(CheckOutcome::below(name, defect, tol.flip, format!("joint dimension {dim}")))
    })
}

pub fn dfs_residuals(tol: &Tolerances) -> CheckOutcome {
    let name = "dfs_residual";
    guard(name, tol.dfs, || {
        let mut worst: f64 = 0.0;
        for p in 0..=3 {
            for k in 1..=8 {
                let state = build_state(p, Complex64::from_polar(0.1 * k as f64, 0.4 * k as f64), DEFAULT_TAIL_TOL)?;
                let space = FockSpace::new(state.required_cut());
                worst = worst.max(bb::dfs_check(&state, &space)?);
            }
        }
        Ok(CheckOutcome::below(name, worst, tol.dfs, "p 0..3, |zeta| 0.1..0.8"))
    })
}

/// Detuned Raman-only toy model used for the decoupling scan.
pub fn reference_model() -> Result<JointModel> {
    JointModel::new(5, ToyBath::single(0.7, 0.3, 0.0, 0.0, 4), 2.0, 1.0, DEFAULT_DIM_BUDGET)
}

/// `p = 1`, `ζ = 0.5` truncated to three manifold terms.
pub fn reference_state(model: &JointModel) -> Result<CVector> {
    build_state_truncated(1, Complex64::new(0.5, 0.0), 2)?.embed(model.space.system())
}

pub const REFERENCE_TRANSIT: f64 = 10.0;
pub const REFERENCE_SEGMENTS: [usize; 5] = [8, 16, 32, 64, 128];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScanSummary {
    pub placement: PulsePlacement,
    pub points: Vec<ScanPoint>,
    /// Slope of `ln(1 − F)` against `ln τ`.
    pub infidelity_slope: f64,
    /// Slope of `ln sqrt(1 − F)` against `ln τ`.
    pub amplitude_slope: f64,
    /// Free over pulsed infidelity at the smallest segment time.
    pub suppression: f64,
}

pub fn reference_scan(placement: PulsePlacement) -> Result<ScanSummary> {
    let model = reference_model()?;
    let psi = reference_state(&model)?;
    let points = bb::suppression_scan(&model, &psi, REFERENCE_TRANSIT, &REFERENCE_SEGMENTS, placement)?;
    let taus: Vec<f64> = points.iter().map(|p| p.tau).collect();
    let inf: Vec<f64> = points.iter().map(|p| p.infidelity_bb).collect();
    let amp: Vec<f64> = inf.iter().map(|v| v.sqrt()).collect();
    let last = points.last().expect("non-empty scan");
    Ok(ScanSummary {
        placement,
        infidelity_slope: bb::loglog_slope(&taus, &inf)?,
        amplitude_slope: bb::loglog_slope(&taus, &amp)?,
        suppression: last.infidelity_free / last.infidelity_bb,
        points,
    })
}

pub fn bb_checks(tol: &Tolerances) -> Vec<CheckOutcome> {
    let scan = match reference_scan(PulsePlacement::Bracketed) {
        Ok(s) => s,
        Err(e) => {
            return vec![
                CheckOutcome::failed("bb_suppression", tol.suppression_ratio, &e),
                CheckOutcome::failed("bb_error_order", tol.slope_halfwidth, &e),
            ]
        }
    };
    let paired = reference_scan(PulsePlacement::Paired).map(|s| s.amplitude_slope).unwrap_or(f64::NAN);
    let suppression = CheckOutcome {
        name: "bb_suppression",
        passed: scan.suppression >= tol.suppression_ratio,
        measured: scan.suppression,
        tolerance: tol.suppression_ratio,
        detail: "free / pulsed infidelity at the smallest segment time".into(),
    };
    let gap = (scan.amplitude_slope - tol.amplitude_slope).abs();
    let order = CheckOutcome {
        name: "bb_error_order",
        passed: gap <= tol.slope_halfwidth,
        measured: scan.amplitude_slope,
        tolerance: tol.slope_halfwidth,
        detail: format!(
            "amplitude slope {:.4} (paired pulses {:.4}), infidelity slope {:.4}",
            scan.amplitude_slope, paired, scan.infidelity_slope
        ),
    };
    vec![suppression, order]
}

pub fn seeded_profiles(seed: u64) -> CheckOutcome {
    let name = "seeded_profile_reproducible";
    guard(name, 0.0, || {
        let a = SegmentProfile::gaussian(8, 1e-3, 2, 0.1, seed)?;
        let b = SegmentProfile::gaussian(8, 1e-3, 2, 0.1, seed)?;
        let model = JointModel::new(
            3,
            ToyBath {
                frequencies: vec![0.7, 1.3],
                raman_couplings: vec![0.3, 0.1],
                dephasing_a: vec![0.02, 0.0],
                dephasing_b: vec![0.0, 0.04],
                phonon_cut: 2,
            },
            2.0,
            1.0,
            DEFAULT_DIM_BUDGET,
        )?;
        let ua = bb::segment_hamiltonians(&model, &a)?;
        let ub = bb::segment_hamiltonians(&model, &b)?;
        let mut worst: f64 = 0.0;
        for (ha, hb) in ua.iter().zip(&ub) {
            let d = linalg::expm_hermitian(ha, 0.1)? - linalg::expm_hermitian(hb, 0.1)?;
            worst = worst.max(linalg::max_norm(&d));
        }
        Ok(CheckOutcome::below(name, worst, 0.0, format!("seed {seed}, 8 segments")))
    })
}

pub fn run_checks(level: Level, tol: &Tolerances, seed: u64) -> Vec<CheckOutcome> {
    let mut out = vec![
        negativity_series_vs_eigensolver(tol),
        visibility_closed_vs_direct(tol),
        dissipation_closed_vs_quadrature(tol),
        phase_shifter_flip(tol, 4, 3),
        dfs_residuals(tol),
    ];
    if level == Level::Full {
        out.push(phase_shifter_flip(tol, 6, 11));
        out.extend(bb_checks(tol));
        out.push(seeded_profiles(seed));
    }
    out
}

pub fn render_text(outcomes: &[CheckOutcome]) -> String {
    outcomes
        .iter()
        .map(|o| {
            format!(
                "{} {} measured={:.6e} tolerance={:.6e} {}\n",
                if o.passed { "PASS" } else { "FAIL" },
                o.name,
                o.measured,
                o.tolerance,
                o.detail
            )
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fast_suite_passes() {
        let outcomes = run_checks(Level::Fast, &Tolerances::default(), 0);
        assert_eq!(outcomes.len(), 5);
        for o in &outcomes {
            assert!(o.passed, "{o:?}");
        }
    }

    #[test]
    fn tampered_tolerance_fails_the_named_check() {
        let tol = Tolerances { visibility: 1e-300, ..Tolerances::default() };
        let outcomes = run_checks(Level::Fast, &tol, 0);
        let failed: Vec<&str> = outcomes.iter().filter(|o| !o.passed).map(|o| o.name).collect();
        assert_eq!(failed, vec!["visibility_closed_vs_direct"]);
    }

    #[test]
    fn report_lines() {
        let text = render_text(&run_checks(Level::Fast, &Tolerances::default(), 0));
        assert_eq!(text.lines().count(), 5);
        assert!(text.lines().all(|l| l.starts_with("PASS ")));
    }
}
