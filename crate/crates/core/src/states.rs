//! Photon-subtracted two-mode squeezed vacuum.
//!
//! `|ψ⟩ = (1/P) Σ_n ζ^{n+p} sqrt((n+p)!/n!) |n, n+p⟩`, obtained by removing
//! `p` photons from mode `a` of `Σ_n ζ^n |n, n⟩`. The state lives on the
//! fixed-difference manifold `{|n, n+p⟩}`; all channel work happens there.

use std::cell::RefCell;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fock::{FockOperator, FockSpace, SparseOperator, HERMITIAN_TOL, TRACE_TOL};
use crate::linalg::{self, c, CMatrix, CVector};
use crate::quad::{self, QuadOptions};
use crate::special::{hermite_functions, ln_factorial_ratio};

pub const DEFAULT_TAIL_TOL: f64 = 1e-12;
/// Smallest eigenvalue tolerated in a density matrix.
pub const PSD_TOL: f64 = 1e-10;
const MAX_TERMS: usize = 2_000_000;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NonGaussianState {
    p: usize,
    #[serde(skip)]
    zeta: Complex64,
    n_max: usize,
    #[serde(skip)]
    coeffs: Vec<Complex64>,
    norm_p2: f64,
    /// `None` for an explicitly truncated state.
    tail_tol: Option<f64>,
}

fn validate(p: usize, zeta: Complex64, tail_tol: f64) -> Result<()> {
    if !(zeta.re.is_finite() && zeta.im.is_finite()) {
        return Err(Error::invalid("zeta", "must be finite"));
    }
    if !(tail_tol > 0.0 && tail_tol < 1.0) {
        return Err(Error::invalid("tail_tol", format!("{tail_tol} not in (0, 1)")));
    }
    let modulus = zeta.norm();
    if modulus >= 1.0 {
        return Err(Error::DivergentState { modulus });
    }
    if modulus == 0.0 && p > 0 {
        return Err(Error::DegenerateState { p });
    }
    Ok(())
}

/// `ln(|ζ|^{2(n+p)} (n+p)!/n!)`.
fn ln_term(p: usize, ln_mod: f64, n: usize) -> f64 {
    2.0 * (n + p) as f64 * ln_mod + ln_factorial_ratio(n, p)
}

/// Squared normalization `P²` summed to the smallest `n_max` whose
/// geometric tail bound is below `tail_tol`, both as an absolute amount and
/// as a fraction of `P²` (the probability missing from the normalized state).
///
/// Beyond `n_max` consecutive terms shrink by at most
/// `r = |ζ|²(1 + p/(n_max+1))`, so the tail is at most `t_{n_max} r/(1−r)`.
pub fn normalization(p: usize, zeta: Complex64, tail_tol: f64) -> Result<(f64, usize)> {
    validate(p, zeta, tail_tol)?;
    let modulus = zeta.norm();
    if modulus == 0.0 {
        return Ok((1.0, 0));
    }
    let ln_mod = modulus.ln();
    let x = modulus * modulus;
    let mut sum = 0.0;
    for n in 0..MAX_TERMS {
        let term = ln_term(p, ln_mod, n).exp();
        sum += term;
        if !sum.is_finite() {
            return Err(Error::invalid("zeta", "normalization overflows f64"));
        }
        let r = x * (1.0 + p as f64 / (n + 1) as f64);
        if r < 1.0 && term * r / (1.0 - r) < tail_tol * sum.min(1.0) {
            return Ok((sum, n));
        }
    }
    Err(Error::TailNotConverged { tail_tol, limit: MAX_TERMS })
}

/// Build the normalized manifold coefficients.
pub fn build_state(p: usize, zeta: Complex64, tail_tol: f64) -> Result<NonGaussianState> {
    let (norm_p2, n_max) = normalization(p, zeta, tail_tol)?;
    let coeffs = if zeta.norm() == 0.0 {
        vec![c(1.0)]
    } else {
        let ln_mod = zeta.norm().ln();
        let arg = zeta.arg();
        let half_ln_p2 = 0.5 * norm_p2.ln();
        (0..=n_max)
            .map(|n| {
                let k = (n + p) as f64;
                let ln_mag = k * ln_mod + 0.5 * ln_factorial_ratio(n, p) - half_ln_p2;
                Complex64::from_polar(ln_mag.exp(), k * arg)
            })
            .collect()
    };
    Ok(NonGaussianState { p, zeta, n_max, coeffs, norm_p2, tail_tol: Some(tail_tol) })
}

/// The state cut off at a fixed `n_max` and renormalized over the kept terms,
/// for spaces too small to hold the converged series.
pub fn build_state_truncated(p: usize, zeta: Complex64, n_max: usize) -> Result<NonGaussianState> {
    validate(p, zeta, 0.5)?;
    if zeta.norm() == 0.0 {
        return build_state(p, zeta, DEFAULT_TAIL_TOL);
    }
    let ln_mod = zeta.norm().ln();
    let ln_terms: Vec<f64> = (0..=n_max).map(|n| ln_term(p, ln_mod, n)).collect();
    let top = ln_terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let scaled: f64 = ln_terms.iter().map(|t| (t - top).exp()).sum();
    let ln_p2 = top + scaled.ln();
    let arg = zeta.arg();
    let coeffs = ln_terms
        .iter()
        .enumerate()
        .map(|(n, t)| Complex64::from_polar((0.5 * (t - ln_p2)).exp(), (n + p) as f64 * arg))
        .collect();
    Ok(NonGaussianState { p, zeta, n_max, coeffs, norm_p2: ln_p2.exp(), tail_tol: None })
}

impl NonGaussianState {
    pub fn p(&self) -> usize {
        self.p
    }

    pub fn zeta(&self) -> Complex64 {
        self.zeta
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    /// `c_n` for `n = 0..=n_max`.
    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    /// `P²` over the retained terms.
    pub fn norm_p2(&self) -> f64 {
        self.norm_p2
    }

    pub fn tail_tol(&self) -> Option<f64> {
        self.tail_tol
    }

    /// Smallest total photon cut that holds every `|n, n+p⟩` of the state.
    pub fn required_cut(&self) -> usize {
        2 * self.n_max + self.p
    }

    pub fn density_matrix(&self) -> ManifoldDensityMatrix {
        let v = CVector::from_column_slice(&self.coeffs);
        ManifoldDensityMatrix { p: self.p, rho: &v * v.adjoint() }
    }

    pub fn embed(&self, space: &FockSpace) -> Result<CVector> {
        embed(self, space)
    }

    pub fn wavefunction(&self, x: f64, y: f64) -> Complex64 {
        wavefunction(self, x, y)
    }
}

/// Place the state in a two-mode Fock space: amplitude `c_n` at `(n, n+p)`.
pub fn embed(state: &NonGaussianState, space: &FockSpace) -> Result<CVector> {
    let required = state.required_cut();
    if space.total_cut() < required {
        return Err(Error::TruncationTooSmall { required, actual: space.total_cut() });
    }
    let mut psi = CVector::zeros(space.dim());
    for (n, &cn) in state.coeffs.iter().enumerate() {
        let idx = space.index_of(n, n + state.p).expect("cut checked above");
        psi[idx] = cn;
    }
    Ok(psi)
}

/// Coordinate-space wavefunction in the printed form
/// `(ζ^p / sqrt(2^p π)) Σ_n ((ζ/2)^n / n!) H_n(x) H_{n+p}(y) e^{−(x²+y²)/2}`.
///
/// That expression carries no `1/P`: it equals `P Σ_n c_n φ_n(x) φ_{n+p}(y)`
/// with `φ_k` the normalized oscillator eigenfunctions, so its squared L²
/// norm is `P²` (see [`wavefunction_norm_sq`]). It is evaluated in the
/// eigenfunction form because `H_n` overflows long before the series ends.
pub fn wavefunction(state: &NonGaussianState, x: f64, y: f64) -> Complex64 {
    let phi_x = hermite_functions(state.n_max, x);
    let phi_y = hermite_functions(state.n_max + state.p, y);
    let p_norm = state.norm_p2.sqrt();
    state
        .coeffs
        .iter()
        .enumerate()
        .map(|(n, &cn)| cn * (p_norm * phi_x[n] * phi_y[n + state.p]))
        .sum()
}

/// `∫∫ |ψ(x, y)|² dx dy` over `[−half_width, half_width]²` by nested
/// adaptive quadrature.
pub fn wavefunction_norm_sq(state: &NonGaussianState, half_width: f64) -> Result<f64> {
    let opts = QuadOptions { abs_tol: 1e-13, rel_tol: 1e-10, max_intervals: 20_000 };
    let panel = 1.0;
    let inner = |x: f64| -> Result<f64> {
        quad::integrate(|y| state.wavefunction(x, y).norm_sqr(), -half_width, half_width, panel, opts)
    };
    let failure = RefCell::new(None);
    let outer = quad::integrate(
        |x| match inner(x) {
            Ok(v) => v,
            Err(e) => {
                failure.borrow_mut().get_or_insert(e);
                f64::NAN
            }
        },
        -half_width,
        half_width,
        panel,
        opts,
    );
    if let Some(e) = failure.into_inner() {
        return Err(e);
    }
    outer
}

/// Density matrix on the manifold `{|n, n+p⟩}`: entry `(n, m)` multiplies
/// `|n, n+p⟩⟨m, m+p|`.
#[derive(Debug, Clone, PartialEq)]
pub struct ManifoldDensityMatrix {
    p: usize,
    rho: CMatrix,
}

impl ManifoldDensityMatrix {
    /// Wrap a matrix after checking Hermiticity, unit trace and positivity.
    pub fn new(p: usize, rho: CMatrix) -> Result<Self> {
        if rho.nrows() != rho.ncols() || rho.nrows() == 0 {
            return Err(Error::InvalidDensityMatrix(format!(
                "shape {}x{} is not square and nonempty",
                rho.nrows(),
                rho.ncols()
            )));
        }
        let m = ManifoldDensityMatrix { p, rho };
        m.check_invariants()?;
        Ok(m)
    }

    pub(crate) fn from_parts_unchecked(p: usize, rho: CMatrix) -> Self {
        ManifoldDensityMatrix { p, rho }
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn n_max(&self) -> usize {
        self.rho.nrows() - 1
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.rho
    }

    pub fn get(&self, n: usize, m: usize) -> Complex64 {
        self.rho[(n, m)]
    }

    pub fn trace(&self) -> Complex64 {
        self.rho.trace()
    }

    pub fn min_eigenvalue(&self) -> Result<f64> {
        Ok(linalg::eigvalsh(&self.rho)?.into_iter().fold(f64::INFINITY, f64::min))
    }

    pub fn check_invariants(&self) -> Result<()> {
        let defect = linalg::hermiticity_defect(&self.rho);
        if defect >= HERMITIAN_TOL {
            return Err(Error::NonHermitianInput { defect });
        }
        let tr = self.trace();
        if (tr - c(1.0)).norm() > TRACE_TOL {
            return Err(Error::InvalidDensityMatrix(format!("trace {tr} differs from 1")));
        }
        let min = self.min_eigenvalue()?;
        if min < -PSD_TOL {
            return Err(Error::InvalidDensityMatrix(format!("negative eigenvalue {min:e}")));
        }
        Ok(())
    }

    /// `⟨ψ|ρ|ψ⟩` for a state on the same manifold.
    pub fn overlap(&self, state: &NonGaussianState) -> Result<f64> {
        if state.p != self.p || state.coeffs.len() != self.rho.nrows() {
            return Err(Error::DimensionMismatch { expected: self.rho.nrows(), actual: state.coeffs.len() });
        }
        let v = CVector::from_column_slice(&state.coeffs);
        Ok((v.adjoint() * &self.rho * &v)[(0, 0)].re)
    }

    fn required_cut(&self) -> usize {
        2 * self.n_max() + self.p
    }

    /// Dense embedding into a two-mode Fock space.
    pub fn embed_dense(&self, space: &FockSpace) -> Result<FockOperator> {
        let sparse = self.embed_sparse(space)?;
        Ok(sparse.to_dense())
    }

    /// Sparse embedding into a two-mode Fock space.
    pub fn embed_sparse(&self, space: &FockSpace) -> Result<SparseOperator> {
        let required = self.required_cut();
        if space.total_cut() < required {
            return Err(Error::TruncationTooSmall { required, actual: space.total_cut() });
        }
        let mut op = SparseOperator::new(space.clone());
        for n in 0..self.rho.nrows() {
            for m in 0..self.rho.ncols() {
                let v = self.rho[(n, m)];
                if v != c(0.0) {
                    op.insert((n, n + self.p), (m, m + self.p), v)?;
                }
            }
        }
        Ok(op)
    }

    pub fn minimal_space(&self) -> FockSpace {
        FockSpace::new(self.required_cut())
    }
}
