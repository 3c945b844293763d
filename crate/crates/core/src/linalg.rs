//! Dense complex linear algebra shared by the Fock-space and decoupling code.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

pub const I: Complex64 = Complex64::new(0.0, 1.0);

pub fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

/// Largest entry modulus.
pub fn max_norm(m: &CMatrix) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

/// `max |m - m†|`.
pub fn hermiticity_defect(m: &CMatrix) -> f64 {
    let n = m.nrows();
    let mut worst: f64 = 0.0;
    for j in 0..n {
        for i in 0..=j {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

/// `max |u† u - 1|`.
pub fn unitarity_defect(u: &CMatrix) -> f64 {
    let prod = u.adjoint() * u;
    let id = CMatrix::identity(u.nrows(), u.ncols());
    max_norm(&(prod - id))
}

pub fn commutator(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a * b - b * a
}

/// Kronecker product `a ⊗ b`, with `a` as the slow (outer) index.
pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

/// Hermitian eigendecomposition. The input is symmetrized first so that
/// rounding-level anti-Hermitian noise cannot leak into the spectrum.
pub fn eigh(m: &CMatrix) -> Result<(Vec<f64>, CMatrix)> {
    let n = m.nrows();
    if n == 0 {
        return Ok((Vec::new(), CMatrix::zeros(0, 0)));
    }
    let sym = (m + m.adjoint()) * c(0.5);
    let eig = SymmetricEigen::try_new(sym, f64::EPSILON, 10_000 * n.max(10))
        .ok_or(Error::EigenFailure { dim: n })?;
    if eig.eigenvalues.iter().any(|v| !v.is_finite()) {
        return Err(Error::EigenFailure { dim: n });
    }
    Ok((eig.eigenvalues.iter().copied().collect(), eig.eigenvectors))
}

pub fn eigvalsh(m: &CMatrix) -> Result<Vec<f64>> {
    eigh(m).map(|(vals, _)| vals)
}

/// `exp(-i h t)` for Hermitian `h`, through its eigendecomposition.
pub fn expm_hermitian(h: &CMatrix, t: f64) -> Result<CMatrix> {
    let (vals, vecs) = eigh(h)?;
    let phases = DVector::from_iterator(
        vals.len(),
        vals.iter().map(|&l| Complex64::from_polar(1.0, -l * t)),
    );
    let mut scaled = vecs.clone();
    for (j, mut col) in scaled.column_iter_mut().enumerate() {
        col *= phases[j];
    }
    Ok(scaled * vecs.adjoint())
}

/// Diagonal conjugation `d m d†` for a diagonal `d` given by its entries.
pub fn conjugate_by_diagonal(diag: &[Complex64], m: &CMatrix) -> CMatrix {
    let mut out = m.clone();
    for j in 0..m.ncols() {
        for i in 0..m.nrows() {
            out[(i, j)] = diag[i] * m[(i, j)] * diag[j].conj();
        }
    }
    out
}
