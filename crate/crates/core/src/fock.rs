//! Two-mode bosonic Fock space truncated by total photon number.
//!
//! Basis states `(n_a, n_b)` with `n_a + n_b <= total_cut` are ordered by
//! total photon number first and `n_a` second, so every fixed-total block
//! is a contiguous index range. Operators that conserve `n_a + n_b`
//! (`a†b`, `ab†`, `n_a`, `n_b`, the phase shifter) are exact on this space.

use std::collections::BTreeMap;
use std::ops::{Add, Mul, Range, Sub};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{self, c, CMatrix, CVector};

/// Tolerance for Hermiticity assertions on operators and states.
pub const HERMITIAN_TOL: f64 = 1e-12;
/// Tolerance on `tr ρ = 1` for density matrices.
pub const TRACE_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Mode {
    A,
    B,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FockSpace {
    total_cut: usize,
    basis: Vec<(usize, usize)>,
}

impl FockSpace {
    pub fn new(total_cut: usize) -> Self {
        let basis = (0..=total_cut)
            .flat_map(|n| (0..=n).map(move |na| (na, n - na)))
            .collect();
        FockSpace { total_cut, basis }
    }

    pub fn total_cut(&self) -> usize {
        self.total_cut
    }

    pub fn dim(&self) -> usize {
        (self.total_cut + 1) * (self.total_cut + 2) / 2
    }

    pub fn basis(&self) -> &[(usize, usize)] {
        &self.basis
    }

    pub fn state(&self, index: usize) -> (usize, usize) {
        self.basis[index]
    }

    pub fn index_of(&self, na: usize, nb: usize) -> Option<usize> {
        let n = na + nb;
        (n <= self.total_cut).then(|| n * (n + 1) / 2 + na)
    }

    /// Index range of the block with `n_a + n_b = total`.
    pub fn block(&self, total: usize) -> Range<usize> {
        let start = total * (total + 1) / 2;
        start..start + total + 1
    }

    fn diagonal(&self, f: impl Fn(usize, usize) -> Complex64) -> FockOperator {
        let d = CMatrix::from_diagonal(&CVector::from_iterator(
            self.dim(),
            self.basis.iter().map(|&(na, nb)| f(na, nb)),
        ));
        FockOperator { space: self.clone(), matrix: d }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FockOperator {
    space: FockSpace,
    matrix: CMatrix,
}

impl FockOperator {
    pub fn new(space: FockSpace, matrix: CMatrix) -> Result<Self> {
        let dim = space.dim();
        if matrix.nrows() != dim || matrix.ncols() != dim {
            return Err(Error::DimensionMismatch { expected: dim, actual: matrix.nrows() });
        }
        Ok(FockOperator { space, matrix })
    }

    pub fn zeros(space: &FockSpace) -> Self {
        FockOperator { space: space.clone(), matrix: CMatrix::zeros(space.dim(), space.dim()) }
    }

    pub fn identity(space: &FockSpace) -> Self {
        FockOperator { space: space.clone(), matrix: CMatrix::identity(space.dim(), space.dim()) }
    }

    /// `|ψ⟩⟨ψ|`.
    pub fn projector(space: &FockSpace, psi: &CVector) -> Result<Self> {
        if psi.len() != space.dim() {
            return Err(Error::DimensionMismatch { expected: space.dim(), actual: psi.len() });
        }
        Ok(FockOperator { space: space.clone(), matrix: psi * psi.adjoint() })
    }

    pub fn space(&self) -> &FockSpace {
        &self.space
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    pub fn get(&self, left: (usize, usize), right: (usize, usize)) -> Complex64 {
        match (self.space.index_of(left.0, left.1), self.space.index_of(right.0, right.1)) {
            (Some(i), Some(j)) => self.matrix[(i, j)],
            _ => Complex64::new(0.0, 0.0),
        }
    }

    pub fn adjoint(&self) -> Self {
        FockOperator { space: self.space.clone(), matrix: self.matrix.adjoint() }
    }

    pub fn scale(&self, z: Complex64) -> Self {
        FockOperator { space: self.space.clone(), matrix: &self.matrix * z }
    }

    pub fn commutator(&self, other: &Self) -> Self {
        FockOperator { space: self.space.clone(), matrix: linalg::commutator(&self.matrix, &other.matrix) }
    }

    pub fn max_norm(&self) -> f64 {
        linalg::max_norm(&self.matrix)
    }

    pub fn hermiticity_defect(&self) -> f64 {
        linalg::hermiticity_defect(&self.matrix)
    }

    pub fn is_hermitian(&self) -> bool {
        self.hermiticity_defect() < HERMITIAN_TOL
    }

    pub fn is_unitary(&self) -> bool {
        linalg::unitarity_defect(&self.matrix) < HERMITIAN_TOL
    }

    pub fn trace(&self) -> Complex64 {
        self.matrix.trace()
    }

    pub fn apply(&self, psi: &CVector) -> CVector {
        &self.matrix * psi
    }

    /// Eigenvalues of a Hermitian operator, ascending.
    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        let defect = self.hermiticity_defect();
        if defect >= HERMITIAN_TOL {
            return Err(Error::NonHermitianInput { defect });
        }
        let mut vals = linalg::eigvalsh(&self.matrix)?;
        vals.sort_by(f64::total_cmp);
        Ok(vals)
    }
}

impl Mul for &FockOperator {
    type Output = FockOperator;
    fn mul(self, rhs: &FockOperator) -> FockOperator {
        FockOperator { space: self.space.clone(), matrix: &self.matrix * &rhs.matrix }
    }
}

impl Add for &FockOperator {
    type Output = FockOperator;
    fn add(self, rhs: &FockOperator) -> FockOperator {
        FockOperator { space: self.space.clone(), matrix: &self.matrix + &rhs.matrix }
    }
}

impl Sub for &FockOperator {
    type Output = FockOperator;
    fn sub(self, rhs: &FockOperator) -> FockOperator {
        FockOperator { space: self.space.clone(), matrix: &self.matrix - &rhs.matrix }
    }
}

/// Annihilation operator of one mode. Matrix elements that would lead out of
/// the truncated basis do not exist: lowering never leaves it.
pub fn annihilation(space: &FockSpace, mode: Mode) -> FockOperator {
    let mut m = CMatrix::zeros(space.dim(), space.dim());
    for (j, &(na, nb)) in space.basis().iter().enumerate() {
        let target = match mode {
            Mode::A if na > 0 => Some((na - 1, nb, na)),
            Mode::B if nb > 0 => Some((na, nb - 1, nb)),
            _ => None,
        };
        if let Some((ta, tb, n)) = target {
            let i = space.index_of(ta, tb).expect("lowering stays in basis");
            m[(i, j)] = c((n as f64).sqrt());
        }
    }
    FockOperator { space: space.clone(), matrix: m }
}

/// Creation operator; transitions above the cut are dropped.
pub fn creation(space: &FockSpace, mode: Mode) -> FockOperator {
    annihilation(space, mode).adjoint()
}

pub fn number_operator(space: &FockSpace, mode: Mode) -> FockOperator {
    space.diagonal(|na, nb| match mode {
        Mode::A => c(na as f64),
        Mode::B => c(nb as f64),
    })
}

/// Photon transfer `a†b` (into mode A) or `b†a` (into mode B), built directly
/// so that no intermediate state leaves the truncation. A product such as
/// `a·b†` of truncated matrices loses its top-layer elements instead.
pub fn transfer(space: &FockSpace, into: Mode) -> FockOperator {
    let mut m = CMatrix::zeros(space.dim(), space.dim());
    for (j, &(na, nb)) in space.basis().iter().enumerate() {
        let target = match into {
            Mode::A if nb > 0 => Some((na + 1, nb - 1)),
            Mode::B if na > 0 => Some((na - 1, nb + 1)),
            _ => None,
        };
        if let Some((ta, tb)) = target {
            let i = space.index_of(ta, tb).expect("transfer conserves the total");
            m[(i, j)] = c(((ta.max(na)) as f64 * (tb.max(nb)) as f64).sqrt());
        }
    }
    FockOperator { space: space.clone(), matrix: m }
}

/// `A₊ = n_a + n_b`.
pub fn total_number(space: &FockSpace) -> FockOperator {
    space.diagonal(|na, nb| c((na + nb) as f64))
}

/// `A₋ = n_a − n_b`.
pub fn number_difference(space: &FockSpace) -> FockOperator {
    space.diagonal(|na, nb| c(na as f64 - nb as f64))
}

/// Diagonal entries of `Π = exp(iπ(n_a − n_b)/2)`, exact powers of `i`.
pub fn phase_shifter_diagonal(space: &FockSpace) -> Vec<Complex64> {
    space.basis().iter().map(|&(na, nb)| quarter_turn(na as i64 - nb as i64)).collect()
}

/// `i^k` without trigonometric rounding.
pub(crate) fn quarter_turn(k: i64) -> Complex64 {
    match k.rem_euclid(4) {
        0 => Complex64::new(1.0, 0.0),
        1 => Complex64::new(0.0, 1.0),
        2 => Complex64::new(-1.0, 0.0),
        _ => Complex64::new(0.0, -1.0),
    }
}

/// The phase shifter `Π = exp(iπ(n_a − n_b)/2)`. It is unitary but not
/// self-adjoint on states with odd `n_a − n_b`; conjugations must use `Π†`.
pub fn phase_shifter(space: &FockSpace) -> FockOperator {
    let diag = phase_shifter_diagonal(space);
    space.diagonal(|na, nb| diag[space.index_of(na, nb).unwrap()])
}

/// `exp(−i h t)` for Hermitian `h`.
pub fn expm(h: &FockOperator, t: f64) -> Result<FockOperator> {
    let defect = h.hermiticity_defect();
    if defect >= HERMITIAN_TOL {
        return Err(Error::NonHermitianInput { defect });
    }
    let u = linalg::expm_hermitian(&h.matrix, t)?;
    Ok(FockOperator { space: h.space.clone(), matrix: u })
}

fn check_density(rho: &FockOperator) -> Result<()> {
    let defect = rho.hermiticity_defect();
    if defect >= HERMITIAN_TOL {
        return Err(Error::NonHermitianInput { defect });
    }
    let tr = rho.trace();
    if (tr - c(1.0)).norm() > TRACE_TOL {
        return Err(Error::InvalidDensityMatrix(format!("trace {tr} differs from 1")));
    }
    Ok(())
}

/// Swap the indices of `mode` between bra and ket. Elements whose swapped
/// indices leave the truncated basis are dropped.
fn swapped(mode: Mode, left: (usize, usize), right: (usize, usize)) -> ((usize, usize), (usize, usize)) {
    let ((na, nb), (ma, mb)) = (left, right);
    match mode {
        Mode::B => ((na, mb), (ma, nb)),
        Mode::A => ((ma, nb), (na, mb)),
    }
}

/// Partial transpose of a density matrix with respect to one mode:
/// `⟨n_a, n_b|ρ^{T_b}|m_a, m_b⟩ = ⟨n_a, m_b|ρ|m_a, n_b⟩`.
pub fn partial_transpose(rho: &FockOperator, mode: Mode) -> Result<FockOperator> {
    check_density(rho)?;
    let space = &rho.space;
    let mut out = CMatrix::zeros(space.dim(), space.dim());
    for (i, &left) in space.basis().iter().enumerate() {
        for (j, &right) in space.basis().iter().enumerate() {
            let (l, r) = swapped(mode, left, right);
            if let (Some(si), Some(sj)) = (space.index_of(l.0, l.1), space.index_of(r.0, r.1)) {
                out[(i, j)] = rho.matrix[(si, sj)];
            }
        }
    }
    Ok(FockOperator { space: space.clone(), matrix: out })
}

/// Operator stored by its nonzero entries, for truncations whose dense
/// matrix would not fit in memory.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseOperator {
    space: FockSpace,
    entries: BTreeMap<(usize, usize), Complex64>,
}

impl SparseOperator {
    pub fn new(space: FockSpace) -> Self {
        SparseOperator { space, entries: BTreeMap::new() }
    }

    pub fn space(&self) -> &FockSpace {
        &self.space
    }

    /// Accumulate `value` at `⟨left|·|right⟩`.
    pub fn insert(&mut self, left: (usize, usize), right: (usize, usize), value: Complex64) -> Result<()> {
        let cut = self.space.total_cut();
        let (Some(i), Some(j)) = (self.space.index_of(left.0, left.1), self.space.index_of(right.0, right.1)) else {
            let actual = (left.0 + left.1).max(right.0 + right.1);
            return Err(Error::TruncationTooSmall { required: actual, actual: cut });
        };
        *self.entries.entry((i, j)).or_insert(Complex64::new(0.0, 0.0)) += value;
        Ok(())
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.entries.get(&(i, j)).copied().unwrap_or(Complex64::new(0.0, 0.0))
    }

    pub fn hermiticity_defect(&self) -> f64 {
        self.entries
            .iter()
            .map(|(&(i, j), &v)| (v - self.get(j, i).conj()).norm())
            .fold(0.0, f64::max)
    }

    pub fn trace(&self) -> Complex64 {
        self.entries.iter().filter(|(&(i, j), _)| i == j).map(|(_, v)| *v).sum()
    }

    pub fn to_dense(&self) -> FockOperator {
        let mut op = FockOperator::zeros(&self.space);
        for (&(i, j), &v) in &self.entries {
            op.matrix[(i, j)] = v;
        }
        op
    }

    /// Sparse counterpart of [`partial_transpose`]; same dropping rule.
    pub fn partial_transpose(&self, mode: Mode) -> Result<SparseOperator> {
        let defect = self.hermiticity_defect();
        if defect >= HERMITIAN_TOL {
            return Err(Error::NonHermitianInput { defect });
        }
        let tr = self.trace();
        if (tr - c(1.0)).norm() > TRACE_TOL {
            return Err(Error::InvalidDensityMatrix(format!("trace {tr} differs from 1")));
        }
        let mut out = SparseOperator::new(self.space.clone());
        for (&(i, j), &v) in &self.entries {
            let (l, r) = swapped(mode, self.space.state(i), self.space.state(j));
            if let (Some(si), Some(sj)) = (self.space.index_of(l.0, l.1), self.space.index_of(r.0, r.1)) {
                out.entries.insert((si, sj), v);
            }
        }
        Ok(out)
    }

    /// Eigenvalues of the Hermitian operator restricted to basis states that
    /// carry a nonzero entry (every other state contributes an exact zero).
    ///
    /// The nonzero pattern is split into connected components and each
    /// component is diagonalized densely. Returned ascending.
    pub fn support_eigenvalues(&self) -> Result<Vec<f64>> {
        let defect = self.hermiticity_defect();
        if defect >= HERMITIAN_TOL {
            return Err(Error::NonHermitianInput { defect });
        }
        let mut compact: BTreeMap<usize, usize> = BTreeMap::new();
        for &(i, j) in self.entries.keys() {
            let next = compact.len();
            compact.entry(i).or_insert(next);
            let next = compact.len();
            compact.entry(j).or_insert(next);
        }
        let mut parent: Vec<usize> = (0..compact.len()).collect();
        fn find(parent: &mut [usize], mut x: usize) -> usize {
            while parent[x] != x {
                parent[x] = parent[parent[x]];
                x = parent[x];
            }
            x
        }
        for &(i, j) in self.entries.keys() {
            let (ri, rj) = (find(&mut parent, compact[&i]), find(&mut parent, compact[&j]));
            if ri != rj {
                parent[ri.max(rj)] = ri.min(rj);
            }
        }
        // Group global indices by component root, in index order.
        let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for (&global, &local) in &compact {
            let root = find(&mut parent, local);
            groups.entry(root).or_default().push(global);
        }
        let mut vals = Vec::with_capacity(compact.len());
        for members in groups.values() {
            let k = members.len();
            let mut block = CMatrix::zeros(k, k);
            for (a, &gi) in members.iter().enumerate() {
                for (b, &gj) in members.iter().enumerate() {
                    block[(a, b)] = self.get(gi, gj);
                }
            }
            vals.extend(linalg::eigvalsh(&block)?);
        }
        vals.sort_by(f64::total_cmp);
        Ok(vals)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn basis_order_and_dimension() {
        let s = FockSpace::new(3);
        assert_eq!(s.dim(), 10);
        assert_eq!(s.basis().len(), 10);
        assert_eq!(&s.basis()[..4], &[(0, 0), (0, 1), (1, 0), (0, 2)]);
        for (i, &(na, nb)) in s.basis().iter().enumerate() {
            assert_eq!(s.index_of(na, nb), Some(i));
        }
        assert_eq!(s.index_of(2, 2), None);
        assert_eq!(s.block(2), 3..6);
    }

    #[test]
    fn annihilation_matrix_elements() {
        let s1 = FockSpace::new(1);
        let a = annihilation(&s1, Mode::A);
        assert_eq!(a.get((0, 0), (1, 0)), c(1.0));
        assert_eq!(a.max_norm(), 1.0);
        let nonzero = a.matrix().iter().filter(|z| z.norm() > 0.0).count();
        assert_eq!(nonzero, 1);

        let s2 = FockSpace::new(2);
        let a = annihilation(&s2, Mode::A);
        assert!((a.get((1, 0), (2, 0)) - c(2f64.sqrt())).norm() < 1e-15);
        let b = annihilation(&s2, Mode::B);
        assert!((b.get((1, 0), (1, 1)) - c(1.0)).norm() < 1e-15);
    }

    #[test]
    fn number_from_ladder_products() {
        let s = FockSpace::new(5);
        for mode in [Mode::A, Mode::B] {
            let a = annihilation(&s, mode);
            let n = &a.adjoint() * &a;
            // sqrt(n)² can differ from n in the last bit.
            assert!((&n - &number_operator(&s, mode)).max_norm() < 1e-14);
        }
        let n = number_operator(&FockSpace::new(2), Mode::A);
        assert_eq!(n.get((2, 0), (2, 0)), c(2.0));
    }

    #[test]
    fn transfer_matches_ladder_products_and_is_exact_at_the_cut() {
        let s = FockSpace::new(4);
        let a = annihilation(&s, Mode::A);
        let b = annihilation(&s, Mode::B);
        let ab = transfer(&s, Mode::A);
        assert!((&ab - &(&a.adjoint() * &b)).max_norm() < 1e-15);
        assert!((&transfer(&s, Mode::B) - &ab.adjoint()).max_norm() == 0.0);
        // (3,1) -> (4,0) sits on the cut and survives.
        assert!((ab.get((4, 0), (3, 1)) - c(2.0)).norm() < 1e-15);
    }

    #[test]
    fn collective_number_eigenvalues() {
        let s = FockSpace::new(8);
        let am = number_difference(&s);
        let ap = total_number(&s);
        for n in 0..3 {
            let p = 2;
            assert_eq!(am.get((n, n + p), (n, n + p)), c(-(p as f64)));
        }
        assert_eq!(ap.get((1, 2), (1, 2)), c(3.0));
    }

    #[test]
    fn canonical_commutator_on_interior() {
        let s = FockSpace::new(6);
        let a = annihilation(&s, Mode::A);
        let comm = a.commutator(&a.adjoint());
        for (i, &(na, nb)) in s.basis().iter().enumerate() {
            if na + nb < s.total_cut() {
                for j in 0..s.dim() {
                    let expected = if i == j { c(1.0) } else { c(0.0) };
                    assert!((comm.matrix()[(i, j)] - expected).norm() < 1e-14);
                }
            }
        }
    }

    #[test]
    fn phase_shifter_entries_and_unitarity() {
        let s = FockSpace::new(6);
        let pi = phase_shifter(&s);
        assert_eq!(pi.get((1, 0), (1, 0)), Complex64::new(0.0, 1.0));
        for n in 0..=3 {
            assert_eq!(pi.get((n, n), (n, n)), c(1.0));
        }
        assert!(pi.is_unitary());
        // Not self-adjoint on odd n_a − n_b.
        assert!((&pi - &pi.adjoint()).max_norm() > 1.0);
        let pi2 = &pi * &pi;
        for &(na, nb) in s.basis() {
            let sign = if (na + nb) % 2 == 0 { 1.0 } else { -1.0 };
            assert_eq!(pi2.get((na, nb), (na, nb)), c(sign));
        }
    }

    #[test]
    fn phase_shifter_flips_raman_terms() {
        for cut in [1, 3, 7] {
            let s = FockSpace::new(cut);
            let a = annihilation(&s, Mode::A);
            let b = annihilation(&s, Mode::B);
            let pi = phase_shifter(&s);
            for raman in [&a.adjoint() * &b, &a * &b.adjoint()] {
                let flipped = &(&pi * &raman) * &pi.adjoint();
                assert!((&flipped + &raman).max_norm() < 1e-14);
            }
            // Π commutes with A₋ and A₊.
            assert!(pi.commutator(&number_difference(&s)).max_norm() < 1e-14);
            assert!(pi.commutator(&total_number(&s)).max_norm() < 1e-14);
        }
    }

    #[test]
    fn expm_special_cases() {
        let s = FockSpace::new(4);
        let u = expm(&FockOperator::zeros(&s), 2.0).unwrap();
        assert_eq!(u, FockOperator::identity(&s));

        let na = number_operator(&s, Mode::A);
        let u = expm(&na, PI).unwrap();
        for &(n, m) in s.basis() {
            let expected = Complex64::from_polar(1.0, -PI * n as f64);
            assert!((u.get((n, m), (n, m)) - expected).norm() < 1e-12);
        }
        let h = &transfer(&s, Mode::A) + &transfer(&s, Mode::B);
        let fwd = expm(&h, 0.9).unwrap();
        let back = expm(&h, -0.9).unwrap();
        assert!((&(&fwd * &back) - &FockOperator::identity(&s)).max_norm() < 1e-10);
        assert!(linalg::unitarity_defect(fwd.matrix()) < 1e-10);
    }

    #[test]
    fn expm_rejects_non_hermitian() {
        let s = FockSpace::new(2);
        let a = annihilation(&s, Mode::A);
        assert!(matches!(expm(&a, 1.0), Err(Error::NonHermitianInput { .. })));
    }

    #[test]
    fn partial_transpose_of_product_state() {
        let s = FockSpace::new(3);
        let mut psi = CVector::zeros(s.dim());
        psi[s.index_of(0, 1).unwrap()] = c(1.0);
        let rho = FockOperator::projector(&s, &psi).unwrap();
        assert_eq!(partial_transpose(&rho, Mode::B).unwrap(), rho);
        assert_eq!(partial_transpose(&rho, Mode::A).unwrap(), rho);
    }

    #[test]
    fn partial_transpose_detects_bell_like_entanglement() {
        // (|0,1⟩ + |1,0⟩)/√2 has PT eigenvalue −1/2.
        let s = FockSpace::new(2);
        let mut psi = CVector::zeros(s.dim());
        psi[s.index_of(0, 1).unwrap()] = c(0.5f64.sqrt());
        psi[s.index_of(1, 0).unwrap()] = c(0.5f64.sqrt());
        let rho = FockOperator::projector(&s, &psi).unwrap();
        let vals = partial_transpose(&rho, Mode::B).unwrap().eigenvalues().unwrap();
        assert!((vals[0] + 0.5).abs() < 1e-14);
    }

    #[test]
    fn partial_transpose_rejects_bad_input() {
        let s = FockSpace::new(2);
        let a = annihilation(&s, Mode::A);
        assert!(matches!(partial_transpose(&a, Mode::B), Err(Error::NonHermitianInput { .. })));
        let two = FockOperator::identity(&s);
        assert!(matches!(partial_transpose(&two, Mode::B), Err(Error::InvalidDensityMatrix(_))));
    }

    #[test]
    fn sparse_matches_dense_partial_transpose() {
        let s = FockSpace::new(4);
        let mut psi = CVector::zeros(s.dim());
        let amps = [(0, 1, 0.6), (1, 2, 0.48), (1, 0, 0.64)];
        let mut sp = SparseOperator::new(s.clone());
        for &(na, nb, v) in &amps {
            psi[s.index_of(na, nb).unwrap()] = c(v);
        }
        for &(na, nb, v) in &amps {
            for &(ma, mb, w) in &amps {
                sp.insert((na, nb), (ma, mb), c(v * w)).unwrap();
            }
        }
        let rho = FockOperator::projector(&s, &psi).unwrap();
        assert_eq!(sp.to_dense(), rho);
        let dense = partial_transpose(&rho, Mode::B).unwrap();
        let sparse = sp.partial_transpose(Mode::B).unwrap();
        assert_eq!(sparse.to_dense(), dense);

        let mut dense_vals = dense.eigenvalues().unwrap();
        dense_vals.retain(|v| v.abs() > 1e-13);
        let mut sparse_vals = sparse.support_eigenvalues().unwrap();
        sparse_vals.retain(|v| v.abs() > 1e-13);
        assert_eq!(dense_vals.len(), sparse_vals.len());
        for (d, s) in dense_vals.iter().zip(&sparse_vals) {
            assert!((d - s).abs() < 1e-13);
        }
    }

    #[test]
    fn sparse_insert_outside_cut_is_an_error() {
        let mut sp = SparseOperator::new(FockSpace::new(2));
        let r = sp.insert((2, 1), (0, 0), c(1.0));
        assert!(matches!(r, Err(Error::TruncationTooSmall { .. })));
    }
}
