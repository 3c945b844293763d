//! Negativity of manifold states: the closed series, and the partial-transpose
//! eigenvalue route it is checked against.
//!
//! Negativity is reported on the scale of the series `Σ_{n≠m} |c_n||c_m|`,
//! which equals `‖ρ^{T_b}‖₁ − 1`. Each pair `n < m` contributes a single
//! eigenvalue `−|c_n||c_m|`, so this is twice the absolute sum of the negative
//! eigenvalues; [`negative_eigenvalue_sum`] returns that raw sum.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::fock::{FockOperator, FockSpace, Mode};
use crate::linalg;
use crate::states::{build_state, ManifoldDensityMatrix, NonGaussianState};
use num_complex::Complex64;

/// Eigenvalues in `[−NEGATIVE_TOL, 0)` are not counted as negative when
/// classifying a spectrum. Negativity itself sums every eigenvalue: a
/// manifold state has legitimate pair eigenvalues far below this level and
/// dropping them loses up to ~1e-8 at `|ζ| = 0.8`.
pub const NEGATIVE_TOL: f64 = 1e-10;
/// Dense full-space eigensolves are used only up to this manifold size.
pub const DENSE_NMAX_LIMIT: usize = 12;

/// Partial-transpose spectrum of a pure manifold state: `|c_n|²` on the
/// diagonal, and one `±|c_n||c_m|` pair per `n < m`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PptSpectrum {
    pub diagonal_eigs: Vec<f64>,
    pub offdiag_pairs: Vec<(usize, usize, f64)>,
}

impl PptSpectrum {
    /// Absolute sum of the negative eigenvalues.
    pub fn negative_sum(&self) -> f64 {
        self.offdiag_pairs.iter().map(|&(_, _, m)| m).sum()
    }

    /// `2 ×` [`Self::negative_sum`], the scale used throughout the crate.
    pub fn negativity(&self) -> f64 {
        2.0 * self.negative_sum()
    }

    pub fn trace(&self) -> f64 {
        self.diagonal_eigs.iter().sum()
    }

    /// All eigenvalues on the state's support, ascending.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let mut out = self.diagonal_eigs.clone();
        for &(_, _, m) in &self.offdiag_pairs {
            out.push(m);
            out.push(-m);
        }
        out.sort_by(f64::total_cmp);
        out
    }
}

pub fn ppt_spectrum_analytic(state: &NonGaussianState) -> PptSpectrum {
    let mags: Vec<f64> = state.coeffs().iter().map(|z| z.norm()).collect();
    let diagonal_eigs = mags.iter().map(|m| m * m).collect();
    let mut offdiag_pairs = Vec::with_capacity(mags.len() * mags.len().saturating_sub(1) / 2);
    for n in 0..mags.len() {
        for m in n + 1..mags.len() {
            offdiag_pairs.push((n, m, mags[n] * mags[m]));
        }
    }
    PptSpectrum { diagonal_eigs, offdiag_pairs }
}

/// `Σ_{n≠m} |c_n||c_m|` over the state's own truncation.
///
/// Uses `(Σ|c_n|)² − Σ|c_n|²`, which is linear in `n_max`.
pub fn negativity_analytic(state: &NonGaussianState) -> f64 {
    let (s1, s2) = state
        .coeffs()
        .iter()
        .fold((0.0, 0.0), |(a, b), z| (a + z.norm(), b + z.norm_sqr()));
    (s1 * s1 - s2).max(0.0)
}

/// Negativity of the untruncated state, accurate to `tol` absolute.
///
/// The state is rebuilt with tighter truncations until the geometric tail
/// bounds on both `Σ|c_n|` and `P²` move the result by less than `tol`.
pub fn negativity_series(p: usize, zeta: Complex64, tol: f64) -> Result<f64> {
    if !(tol > 0.0) {
        return Err(Error::invalid("tol", "must be positive"));
    }
    let mut tail_tol = (tol * 1e-2).min(1e-12);
    loop {
        let state = build_state(p, zeta, tail_tol)?;
        let value = negativity_analytic(&state);
        if series_error_bound(&state) < tol {
            return Ok(value);
        }
        if tail_tol < 1e-280 {
            return Err(Error::TailNotConverged { tail_tol, limit: state.n_max() });
        }
        tail_tol *= 1e-4;
    }
}

/// Upper bound on `|𝒩_full − 𝒩_truncated|` from geometric majorants of the
/// amplitude and probability tails.
fn series_error_bound(state: &NonGaussianState) -> f64 {
    let modulus = state.zeta().norm();
    if modulus == 0.0 {
        return 0.0;
    }
    let n = state.n_max();
    let r = modulus * modulus * (1.0 + state.p() as f64 / (n + 1) as f64);
    if r >= 1.0 {
        return f64::INFINITY;
    }
    let last = state.coeffs()[n].norm();
    // Tails relative to the normalized coefficients.
    let amp_tail = last * r.sqrt() / (1.0 - r.sqrt());
    let prob_tail = last * last * r / (1.0 - r);
    let s1: f64 = state.coeffs().iter().map(|z| z.norm()).sum();
    // 𝒩 + 1 = (Σa)²/Σa² with both sums scaled by the same constant.
    let upper = (s1 + amp_tail).powi(2);
    let lower = s1 * s1 / (1.0 + prob_tail);
    (upper - s1 * s1).max(s1 * s1 - lower)
}

/// Absolute sum of the negative eigenvalues, `(Σ|λ| − Σλ)/2`.
pub fn negative_eigenvalue_sum(eigs: impl IntoIterator<Item = f64>) -> f64 {
    eigs.into_iter().filter(|&e| e < 0.0).map(|e| -e).sum()
}

/// Number of eigenvalues below `−NEGATIVE_TOL`.
pub fn count_negative(eigs: &[f64]) -> usize {
    eigs.iter().filter(|&&e| e < -NEGATIVE_TOL).count()
}

/// Whether the partial transpose has an eigenvalue below `−NEGATIVE_TOL`.
pub fn is_npt(eigs: &[f64]) -> bool {
    count_negative(eigs) > 0
}

/// Partial-transpose eigenvalues of a manifold density matrix on its support.
///
/// The transposed matrix conserves total photon number, so its eigenvalues
/// are found per connected block; nothing is approximated.
pub fn ppt_eigenvalues(rho: &ManifoldDensityMatrix, space: &FockSpace) -> Result<Vec<f64>> {
    rho.check_invariants()?;
    rho.embed_sparse(space)?.partial_transpose(Mode::B)?.support_eigenvalues()
}

/// Negativity of a manifold density matrix by partial transpose in the
/// smallest Fock space that holds it.
pub fn negativity_numeric(rho: &ManifoldDensityMatrix) -> Result<f64> {
    negativity_numeric_in(rho, &rho.minimal_space())
}

pub fn negativity_numeric_in(rho: &ManifoldDensityMatrix, space: &FockSpace) -> Result<f64> {
    Ok(2.0 * negative_eigenvalue_sum(ppt_eigenvalues(rho, space)?))
}

/// Same quantity through a single dense eigensolve of the full Fock space.
pub fn negativity_numeric_dense(rho: &ManifoldDensityMatrix) -> Result<f64> {
    if rho.n_max() > DENSE_NMAX_LIMIT {
        return Err(Error::DimensionBudgetExceeded {
            dim: rho.minimal_space().dim(),
            budget: FockSpace::new(2 * DENSE_NMAX_LIMIT + rho.p()).dim(),
        });
    }
    rho.check_invariants()?;
    negativity_dense(&rho.embed_dense(&rho.minimal_space())?)
}

/// Negativity of an arbitrary two-mode density matrix.
pub fn negativity_dense(rho: &FockOperator) -> Result<f64> {
    let pt = crate::fock::partial_transpose(rho, Mode::B)?;
    Ok(2.0 * negative_eigenvalue_sum(linalg::eigvalsh(pt.matrix())?))
}
