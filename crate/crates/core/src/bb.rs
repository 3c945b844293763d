//! Brute-force check of bang-bang decoupling on a small system ⊗ bath model.
//!
//! Two field modes exchange photons through Raman scattering off a few
//! truncated molecular oscillators and are dephased by their phonon numbers:
//!
//! `H = ω_a n_a + ω_b n_b + Σ_i Ω_i s_i + Σ_i g_i (a†b B_i + ab† B_i†)
//!      + Σ_i (Γ_a^i n_a + Γ_b^i n_b) s_i`.
//!
//! Joint basis indices are system-major: `sys · bath_dim + bath`, with the
//! last bath mode varying fastest, so the partial trace over the bath is a
//! reshape.

use std::collections::BTreeMap;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::{self, FockOperator, FockSpace};
use crate::linalg::{self, c, CMatrix, CVector};
use crate::states::NonGaussianState;

pub const DEFAULT_DIM_BUDGET: usize = 4096;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ToyBath {
    /// Vibrational frequencies `Ω_i`, rad/s.
    pub frequencies: Vec<f64>,
    /// Raman couplings `g_i`, rad/s.
    pub raman_couplings: Vec<f64>,
    /// Dephasing of mode a per phonon of oscillator `i`, rad/s.
    pub dephasing_a: Vec<f64>,
    pub dephasing_b: Vec<f64>,
    /// Highest phonon number kept per oscillator.
    pub phonon_cut: usize,
}

impl ToyBath {
    /// One oscillator.
    pub fn single(frequency: f64, raman: f64, dephasing_a: f64, dephasing_b: f64, phonon_cut: usize) -> Self {
        ToyBath {
            frequencies: vec![frequency],
            raman_couplings: vec![raman],
            dephasing_a: vec![dephasing_a],
            dephasing_b: vec![dephasing_b],
            phonon_cut,
        }
    }

    pub fn num_modes(&self) -> usize {
        self.frequencies.len()
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.frequencies.len();
        if n == 0 {
            return Err(Error::invalid("frequencies", "at least one bath mode is required"));
        }
        for (name, v) in [
            ("raman_couplings", &self.raman_couplings),
            ("dephasing_a", &self.dephasing_a),
            ("dephasing_b", &self.dephasing_b),
        ] {
            if v.len() != n {
                return Err(Error::DimensionMismatch { expected: n, actual: v.len() });
            }
            if let Some(x) = v.iter().find(|x| !x.is_finite()) {
                return Err(Error::invalid(name, format!("{x} is not finite")));
            }
        }
        if let Some(x) = self.frequencies.iter().find(|x| !(x.is_finite() && **x >= 0.0)) {
            return Err(Error::invalid("frequencies", format!("{x} must be finite and non-negative")));
        }
        if self.phonon_cut == 0 {
            return Err(Error::invalid("phonon_cut", "must keep at least one excitation"));
        }
        Ok(())
    }
}

/// System Fock space times the truncated bath oscillators.
#[derive(Debug, Clone, PartialEq)]
pub struct JointSpace {
    system: FockSpace,
    num_modes: usize,
    levels: usize,
    bath_dim: usize,
}

impl JointSpace {
    pub fn new(system: FockSpace, bath: &ToyBath, budget: usize) -> Result<Self> {
        bath.validate()?;
        let levels = bath.phonon_cut + 1;
        let bath_dim = u32::try_from(bath.num_modes())
            .ok()
            .and_then(|m| levels.checked_pow(m))
            .ok_or(Error::DimensionBudgetExceeded { dim: usize::MAX, budget })?;
        let dim = system
            .dim()
            .checked_mul(bath_dim)
            .ok_or(Error::DimensionBudgetExceeded { dim: usize::MAX, budget })?;
        if dim > budget {
            return Err(Error::DimensionBudgetExceeded { dim, budget });
        }
        Ok(JointSpace { system, num_modes: bath.num_modes(), levels, bath_dim })
    }

    pub fn system(&self) -> &FockSpace {
        &self.system
    }

    pub fn system_dim(&self) -> usize {
        self.system.dim()
    }

    pub fn bath_dim(&self) -> usize {
        self.bath_dim
    }

    pub fn dim(&self) -> usize {
        self.system.dim() * self.bath_dim
    }

    pub fn index(&self, system: usize, bath: usize) -> usize {
        system * self.bath_dim + bath
    }

    /// Phonon number of oscillator `mode` in bath basis state `bath`.
    pub fn occupation(&self, bath: usize, mode: usize) -> usize {
        let stride = self.levels.pow((self.num_modes - 1 - mode) as u32);
        (bath / stride) % self.levels
    }

    fn stride(&self, mode: usize) -> usize {
        self.levels.pow((self.num_modes - 1 - mode) as u32)
    }

    /// Bath basis index of the given phonon numbers.
    pub fn bath_index(&self, occupations: &[usize]) -> Result<usize> {
        if occupations.len() != self.num_modes {
            return Err(Error::DimensionMismatch { expected: self.num_modes, actual: occupations.len() });
        }
        let mut idx = 0;
        for (mode, &s) in occupations.iter().enumerate() {
            if s >= self.levels {
                return Err(Error::TruncationTooSmall { required: s, actual: self.levels - 1 });
            }
            idx += s * self.stride(mode);
        }
        Ok(idx)
    }

    /// `|ψ⟩ ⊗ |s_1, …, s_M⟩`.
    pub fn product_state(&self, system: &CVector, occupations: &[usize]) -> Result<CVector> {
        if system.len() != self.system_dim() {
            return Err(Error::DimensionMismatch { expected: self.system_dim(), actual: system.len() });
        }
        let b = self.bath_index(occupations)?;
        let mut out = CVector::zeros(self.dim());
        for (s, &amp) in system.iter().enumerate() {
            out[self.index(s, b)] = amp;
        }
        Ok(out)
    }

    /// Diagonal of `Π ⊗ I`.
    pub fn phase_shifter_diagonal(&self) -> Vec<Complex64> {
        let sys = fock::phase_shifter_diagonal(&self.system);
        sys.iter().flat_map(|&z| std::iter::repeat_n(z, self.bath_dim)).collect()
    }

    /// Diagonal of `n_a + n_b` on the joint space.
    pub fn total_photons_diagonal(&self) -> Vec<f64> {
        self.system
            .basis()
            .iter()
            .flat_map(|&(na, nb)| std::iter::repeat_n((na + nb) as f64, self.bath_dim))
            .collect()
    }
}

/// Sparse Hermitian-by-construction operator on a [`JointSpace`].
#[derive(Debug, Clone, PartialEq)]
pub struct JointOperator {
    dim: usize,
    entries: BTreeMap<(usize, usize), Complex64>,
}

impl JointOperator {
    pub fn zeros(dim: usize) -> Self {
        JointOperator { dim, entries: BTreeMap::new() }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.entries.get(&(i, j)).copied().unwrap_or(c(0.0))
    }

    fn add(&mut self, i: usize, j: usize, v: Complex64) {
        if v != c(0.0) {
            *self.entries.entry((i, j)).or_insert(c(0.0)) += v;
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = ((usize, usize), Complex64)> + '_ {
        self.entries.iter().map(|(&k, &v)| (k, v))
    }

    pub fn to_dense(&self) -> CMatrix {
        let mut m = CMatrix::zeros(self.dim, self.dim);
        for (&(i, j), &v) in &self.entries {
            m[(i, j)] = v;
        }
        m
    }

    pub fn max_norm(&self) -> f64 {
        self.entries.values().map(|v| v.norm()).fold(0.0, f64::max)
    }

    pub fn hermiticity_defect(&self) -> f64 {
        self.entries.iter().map(|(&(i, j), &v)| (v - self.get(j, i).conj()).norm()).fold(0.0, f64::max)
    }

    pub fn plus(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (&(i, j), &v) in &other.entries {
            out.add(i, j, v);
        }
        out
    }

    pub fn scaled(&self, z: Complex64) -> Self {
        JointOperator { dim: self.dim, entries: self.entries.iter().map(|(&k, &v)| (k, z * v)).collect() }
    }

    /// `D H D†` for diagonal unitary `D`.
    pub fn conjugate_by_diagonal(&self, diag: &[Complex64]) -> Self {
        let entries = self.entries.iter().map(|(&(i, j), &v)| ((i, j), diag[i] * v * diag[j].conj())).collect();
        JointOperator { dim: self.dim, entries }
    }

    /// `[H, D]` for real diagonal `D`.
    pub fn commutator_with_diagonal(&self, diag: &[f64]) -> Self {
        let entries = self.entries.iter().map(|(&(i, j), &v)| ((i, j), v * (diag[j] - diag[i]))).collect();
        JointOperator { dim: self.dim, entries }
    }
}

/// Field modes, bath and the joint space they live on.
#[derive(Debug, Clone, PartialEq)]
pub struct JointModel {
    pub space: JointSpace,
    pub bath: ToyBath,
    pub omega_a: f64,
    pub omega_b: f64,
}

impl JointModel {
    pub fn new(system_cut: usize, bath: ToyBath, omega_a: f64, omega_b: f64, budget: usize) -> Result<Self> {
        let space = JointSpace::new(FockSpace::new(system_cut), &bath, budget)?;
        for (name, v) in [("omega_a", omega_a), ("omega_b", omega_b)] {
            if !v.is_finite() {
                return Err(Error::invalid(name, format!("{v} is not finite")));
            }
        }
        Ok(JointModel { space, bath, omega_a, omega_b })
    }

    /// `e^{−i(ω_a n_a + ω_b n_b)t}|ψ⟩` on the system alone.
    pub fn free_system_evolution(&self, psi: &CVector, t: f64) -> CVector {
        let phases: Vec<Complex64> = self
            .space
            .system()
            .basis()
            .iter()
            .map(|&(na, nb)| Complex64::from_polar(1.0, -t * (self.omega_a * na as f64 + self.omega_b * nb as f64)))
            .collect();
        CVector::from_iterator(psi.len(), psi.iter().zip(&phases).map(|(a, p)| a * p))
    }
}

/// Per-segment multiplicative scale factors on the couplings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SegmentProfile {
    pub num_segments: usize,
    /// Spacing in meters (bookkeeping only; the propagators take `τ`).
    pub delta: f64,
    /// `raman_scale[k][i]` multiplies `g_i` in segment `k`.
    pub raman_scale: Vec<Vec<f64>>,
    pub dephasing_scale: Vec<Vec<f64>>,
    pub seed: Option<u64>,
}

impl SegmentProfile {
    fn check_count(num_segments: usize) -> Result<()> {
        if num_segments < 2 || !num_segments.is_multiple_of(2) {
            return Err(Error::invalid("num_segments", format!("{num_segments} must be even and at least 2")));
        }
        Ok(())
    }

    pub fn homogeneous(num_segments: usize, delta: f64, num_modes: usize) -> Result<Self> {
        Self::check_count(num_segments)?;
        let ones = vec![vec![1.0; num_modes]; num_segments];
        Ok(SegmentProfile { num_segments, delta, raman_scale: ones.clone(), dephasing_scale: ones, seed: None })
    }

    /// Independent Gaussian factors with mean 1 and standard deviation
    /// `relative_sd`, drawn from a ChaCha8 stream.
    pub fn gaussian(num_segments: usize, delta: f64, num_modes: usize, relative_sd: f64, seed: u64) -> Result<Self> {
        Self::check_count(num_segments)?;
        let normal = Normal::new(1.0, relative_sd)
            .map_err(|e| Error::invalid("relative_sd", e.to_string()))?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut draw = || -> Vec<Vec<f64>> {
            (0..num_segments).map(|_| (0..num_modes).map(|_| normal.sample(&mut rng)).collect()).collect()
        };
        let raman_scale = draw();
        let dephasing_scale = draw();
        Ok(SegmentProfile { num_segments, delta, raman_scale, dephasing_scale, seed: Some(seed) })
    }
}

/// The three parts of the segment Hamiltonian.
#[derive(Debug, Clone, PartialEq)]
pub struct HamiltonianTerms {
    pub free: JointOperator,
    /// Photon exchange between the modes via a phonon.
    pub raman: JointOperator,
    /// Phonon-number dephasing.
    pub dephasing: JointOperator,
}

impl HamiltonianTerms {
    pub fn total(&self) -> JointOperator {
        self.free.plus(&self.raman).plus(&self.dephasing)
    }
}

pub fn build_terms(model: &JointModel, segment: usize, profile: Option<&SegmentProfile>) -> Result<HamiltonianTerms> {
    let bath = &model.bath;
    let space = &model.space;
    let m = bath.num_modes();
    let (g_scale, d_scale) = match profile {
        Some(p) => {
            if segment >= p.num_segments {
                return Err(Error::DimensionMismatch { expected: p.num_segments, actual: segment + 1 });
            }
            let (g, d) = (&p.raman_scale[segment], &p.dephasing_scale[segment]);
            if g.len() != m || d.len() != m {
                return Err(Error::DimensionMismatch { expected: m, actual: g.len().min(d.len()) });
            }
            (g.clone(), d.clone())
        }
        None => (vec![1.0; m], vec![1.0; m]),
    };
    let dim = space.dim();
    let mut free = JointOperator::zeros(dim);
    let mut raman = JointOperator::zeros(dim);
    let mut dephasing = JointOperator::zeros(dim);
    let system = space.system();
    for (si, &(na, nb)) in system.basis().iter().enumerate() {
        for b in 0..space.bath_dim() {
            let idx = space.index(si, b);
            let mut energy = model.omega_a * na as f64 + model.omega_b * nb as f64;
            let mut deph = 0.0;
            for i in 0..m {
                let s = space.occupation(b, i) as f64;
                energy += bath.frequencies[i] * s;
                deph += d_scale[i] * (bath.dephasing_a[i] * na as f64 + bath.dephasing_b[i] * nb as f64) * s;
            }
            free.add(idx, idx, c(energy));
            dephasing.add(idx, idx, c(deph));
            // a†b B_i: (na, nb, s_i) -> (na+1, nb−1, s_i−1); the total photon
            // number is unchanged, so the target is always in the basis.
            if nb == 0 {
                continue;
            }
            let ts = system.index_of(na + 1, nb - 1).expect("transfer conserves the total");
            for i in 0..m {
                let s = space.occupation(b, i);
                if s == 0 {
                    continue;
                }
                let g = g_scale[i] * bath.raman_couplings[i];
                let amp = g * (((na + 1) * nb * s) as f64).sqrt();
                let target = space.index(ts, b - space.stride(i));
                raman.add(target, idx, c(amp));
                raman.add(idx, target, c(amp));
            }
        }
    }
    Ok(HamiltonianTerms { free, raman, dephasing })
}

pub fn build_hamiltonian(model: &JointModel, segment: usize, profile: Option<&SegmentProfile>) -> Result<JointOperator> {
    Ok(build_terms(model, segment, profile)?.total())
}

/// Dense Hamiltonians for every segment of the profile.
pub fn segment_hamiltonians(model: &JointModel, profile: &SegmentProfile) -> Result<Vec<CMatrix>> {
    (0..profile.num_segments).map(|k| Ok(build_hamiltonian(model, k, Some(profile))?.to_dense())).collect()
}

/// Where the phase shifters sit relative to the segments.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum PulsePlacement {
    /// One pulse before the first segment and one after each segment
    /// (`N + 1` pulses).
    #[default]
    Bracketed,
    /// One pulse after each segment (`N` pulses), so pulses close in pairs.
    Paired,
}

/// Applies `e^{−iHτ}` for a sequence of Hamiltonians, reusing the propagator
/// while consecutive Hamiltonians are equal.
struct SegmentStepper<'a> {
    hs: &'a [CMatrix],
    tau: f64,
    cached: Option<(usize, CMatrix)>,
}

impl<'a> SegmentStepper<'a> {
    fn new(hs: &'a [CMatrix], tau: f64, psi0: &CVector) -> Result<Self> {
        if !(tau >= 0.0 && tau.is_finite()) {
            return Err(Error::invalid("tau", format!("{tau} must be non-negative")));
        }
        for h in hs {
            if h.nrows() != psi0.len() || h.ncols() != psi0.len() {
                return Err(Error::DimensionMismatch { expected: psi0.len(), actual: h.nrows() });
            }
        }
        Ok(SegmentStepper { hs, tau, cached: None })
    }

    fn step(&mut self, k: usize, psi: &CVector) -> Result<CVector> {
        let reuse = matches!(&self.cached, Some((j, _)) if self.hs[*j] == self.hs[k]);
        if !reuse {
            let defect = linalg::hermiticity_defect(&self.hs[k]);
            if defect >= fock::HERMITIAN_TOL {
                return Err(Error::NonHermitianInput { defect });
            }
            self.cached = Some((k, linalg::expm_hermitian(&self.hs[k], self.tau)?));
        }
        let (_, u) = self.cached.as_ref().expect("filled above");
        Ok(u * psi)
    }
}

fn apply_diagonal(diag: &[Complex64], psi: &CVector) -> CVector {
    CVector::from_iterator(psi.len(), psi.iter().zip(diag).map(|(a, d)| a * d))
}

/// `e^{−iH_Nτ} ⋯ e^{−iH_1τ}|ψ₀⟩`.
pub fn propagate_free(hs: &[CMatrix], tau: f64, psi0: &CVector) -> Result<CVector> {
    let mut stepper = SegmentStepper::new(hs, tau, psi0)?;
    let mut psi = psi0.clone();
    for k in 0..hs.len() {
        psi = stepper.step(k, &psi)?;
    }
    Ok(psi)
}

/// Segment propagation interleaved with the phase shifter `pi_diag`
/// (the diagonal of `Π ⊗ I`).
pub fn propagate_bb(
    hs: &[CMatrix],
    tau: f64,
    psi0: &CVector,
    pi_diag: &[Complex64],
    placement: PulsePlacement,
) -> Result<CVector> {
    if pi_diag.len() != psi0.len() {
        return Err(Error::DimensionMismatch { expected: psi0.len(), actual: pi_diag.len() });
    }
    if !hs.len().is_multiple_of(2) {
        return Err(Error::invalid("num_segments", format!("{} must be even", hs.len())));
    }
    let mut stepper = SegmentStepper::new(hs, tau, psi0)?;
    let mut psi = match placement {
        PulsePlacement::Bracketed => apply_diagonal(pi_diag, psi0),
        PulsePlacement::Paired => psi0.clone(),
    };
    for k in 0..hs.len() {
        psi = stepper.step(k, &psi)?;
        psi = apply_diagonal(pi_diag, &psi);
    }
    Ok(psi)
}

/// Reduced system density matrix `Tr_bath |ψ⟩⟨ψ|`.
pub fn reduced_system(psi_joint: &CVector, space: &JointSpace) -> Result<CMatrix> {
    if psi_joint.len() != space.dim() {
        return Err(Error::DimensionMismatch { expected: space.dim(), actual: psi_joint.len() });
    }
    let bd = space.bath_dim();
    let m = CMatrix::from_fn(space.system_dim(), bd, |s, b| psi_joint[s * bd + b]);
    Ok(&m * m.adjoint())
}

/// `1 − ⟨target|ρ_sys|target⟩`.
pub fn system_infidelity(psi_joint: &CVector, target: &CVector, space: &JointSpace) -> Result<f64> {
    let rho = reduced_system(psi_joint, space)?;
    if target.len() != rho.nrows() {
        return Err(Error::DimensionMismatch { expected: rho.nrows(), actual: target.len() });
    }
    let f = (target.adjoint() * &rho * target)[(0, 0)].re;
    Ok((1.0 - f).max(0.0))
}

/// Trace out the bath and take the negativity of the field modes.
pub fn negativity_trace(psi_joint: &CVector, space: &JointSpace) -> Result<f64> {
    let rho = reduced_system(psi_joint, space)?;
    let op = FockOperator::new(space.system().clone(), rho)?;
    crate::entanglement::negativity_dense(&op)
}

/// `‖(A₋ + p)|ψ⟩‖`, zero when the state lies in the `n_a − n_b = −p` manifold.
pub fn dfs_check(state: &NonGaussianState, space: &FockSpace) -> Result<f64> {
    let psi = state.embed(space)?;
    Ok(dfs_residual(&psi, state.p(), space))
}

/// `‖(A₋ + p)|ψ⟩‖` for any vector of the space.
pub fn dfs_residual(psi: &CVector, p: usize, space: &FockSpace) -> f64 {
    space
        .basis()
        .iter()
        .zip(psi.iter())
        .map(|(&(na, nb), a)| (na as f64 - nb as f64 + p as f64).powi(2) * a.norm_sqr())
        .sum::<f64>()
        .sqrt()
}

/// One point of a decoupling scan at fixed transit time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScanPoint {
    pub num_segments: usize,
    pub tau: f64,
    pub infidelity_bb: f64,
    pub infidelity_free: f64,
}

/// Propagate `|ψ⟩ ⊗ |0⟩` for `τ_L` split into each requested number of
/// homogeneous segments, with and without pulses, and compare with the
/// free field evolution.
pub fn suppression_scan(
    model: &JointModel,
    psi_system: &CVector,
    tau_l: f64,
    segment_counts: &[usize],
    placement: PulsePlacement,
) -> Result<Vec<ScanPoint>> {
    let vacuum = vec![0; model.bath.num_modes()];
    let psi0 = model.space.product_state(psi_system, &vacuum)?;
    let pi = model.space.phase_shifter_diagonal();
    let target = model.free_system_evolution(psi_system, tau_l);
    segment_counts
        .iter()
        .map(|&n| {
            let profile = SegmentProfile::homogeneous(n, 0.0, model.bath.num_modes())?;
            let hs = segment_hamiltonians(model, &profile)?;
            let tau = tau_l / n as f64;
            let bb = propagate_bb(&hs, tau, &psi0, &pi, placement)?;
            let free = propagate_free(&hs, tau, &psi0)?;
            Ok(ScanPoint {
                num_segments: n,
                tau,
                infidelity_bb: system_infidelity(&bb, &target, &model.space)?,
                infidelity_free: system_infidelity(&free, &target, &model.space)?,
            })
        })
        .collect()
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn loglog_slope(xs: &[f64], ys: &[f64]) -> Result<f64> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return Err(Error::invalid("points", "need at least two paired values"));
    }
    if xs.iter().chain(ys).any(|v| !(*v > 0.0)) {
        return Err(Error::invalid("points", "log-log fit needs positive values"));
    }
    let lx: Vec<f64> = xs.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    Ok(sxy / sxx)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::entanglement::negativity_analytic;
    use crate::states::build_state_truncated;

    fn raman_model(g: f64) -> JointModel {
        JointModel::new(5, ToyBath::single(0.7, g, 0.0, 0.0, 4), 2.0, 1.0, DEFAULT_DIM_BUDGET).unwrap()
    }

    fn initial(model: &JointModel) -> (NonGaussianState, CVector) {
        let s = build_state_truncated(1, c(0.5), 2).unwrap();
        let psi = s.embed(model.space.system()).unwrap();
        (s, psi)
    }

    #[test]
    fn budget_is_enforced() {
        let bath = ToyBath::single(1.0, 0.1, 0.0, 0.0, 15);
        assert!(matches!(
            JointModel::new(12, bath, 1.0, 1.0, DEFAULT_DIM_BUDGET),
            Err(Error::DimensionBudgetExceeded { dim: 1456, .. }) | Ok(_)
        ));
        let bath = ToyBath::single(1.0, 0.1, 0.0, 0.0, 63);
        assert!(matches!(
            JointModel::new(12, bath, 1.0, 1.0, DEFAULT_DIM_BUDGET),
            Err(Error::DimensionBudgetExceeded { dim: 5824, budget: 4096 })
        ));
    }

    #[test]
    fn occupations_round_trip() {
        let bath = ToyBath {
            frequencies: vec![1.0, 2.0],
            raman_couplings: vec![0.1, 0.2],
            dephasing_a: vec![0.0; 2],
            dephasing_b: vec![0.0; 2],
            phonon_cut: 3,
        };
        let space = JointSpace::new(FockSpace::new(2), &bath, DEFAULT_DIM_BUDGET).unwrap();
        assert_eq!(space.bath_dim(), 16);
        let idx = space.bath_index(&[2, 1]).unwrap();
        assert_eq!((space.occupation(idx, 0), space.occupation(idx, 1)), (2, 1));
        assert!(space.bath_index(&[4, 0]).is_err());
    }

    #[test]
    fn uncoupled_hamiltonian_is_free_and_diagonal() {
        let model = raman_model(0.0);
        let terms = build_terms(&model, 0, None).unwrap();
        assert_eq!(terms.raman.nnz(), 0);
        let h = terms.total();
        assert!(h.iter().all(|((i, j), _)| i == j));
        let space = &model.space;
        let idx = space.index(space.system().index_of(1, 2).unwrap(), space.bath_index(&[3]).unwrap());
        assert_eq!(h.get(idx, idx), c(2.0 + 2.0 + 3.0 * 0.7));
    }

    #[test]
    fn hamiltonian_conserves_photon_number_and_is_hermitian() {
        let bath = ToyBath {
            frequencies: vec![0.7, 1.1],
            raman_couplings: vec![0.3, -0.2],
            dephasing_a: vec![0.05, 0.02],
            dephasing_b: vec![0.01, 0.04],
            phonon_cut: 3,
        };
        let model = JointModel::new(4, bath, 2.0, 1.0, DEFAULT_DIM_BUDGET).unwrap();
        let profile = SegmentProfile::gaussian(4, 1e-3, 2, 0.2, 11).unwrap();
        let n = model.space.total_photons_diagonal();
        for k in 0..4 {
            let terms = build_terms(&model, k, Some(&profile)).unwrap();
            assert!(terms.raman.commutator_with_diagonal(&n).max_norm() < 1e-13);
            let h = terms.total();
            assert!(h.hermiticity_defect() < 1e-13);
            assert!(h.commutator_with_diagonal(&n).max_norm() < 1e-13);
        }
    }

    #[test]
    fn phase_shifter_flips_raman_and_keeps_dephasing() {
        let bath = ToyBath::single(0.7, 0.3, 0.05, 0.02, 3);
        let model = JointModel::new(4, bath, 2.0, 1.0, DEFAULT_DIM_BUDGET).unwrap();
        let terms = build_terms(&model, 0, None).unwrap();
        let pi = model.space.phase_shifter_diagonal();
        let flipped = terms.raman.conjugate_by_diagonal(&pi);
        assert!(flipped.plus(&terms.raman).max_norm() < 1e-13);
        let kept = terms.dephasing.conjugate_by_diagonal(&pi);
        assert!(kept.plus(&terms.dephasing.scaled(c(-1.0))).max_norm() < 1e-13);
    }

    #[test]
    fn free_propagation_basics() {
        let model = raman_model(0.3);
        let (_, psi) = initial(&model);
        let psi0 = model.space.product_state(&psi, &[0]).unwrap();
        let h = build_hamiltonian(&model, 0, None).unwrap().to_dense();
        let hs = vec![h.clone(); 6];
        let out = propagate_free(&hs, 0.25, &psi0).unwrap();
        let direct = linalg::expm_hermitian(&h, 1.5).unwrap() * &psi0;
        assert!((&out - &direct).norm() < 1e-10);
        assert!((out.norm() - 1.0).abs() < 1e-10);

        let diag = build_hamiltonian(&raman_model(0.0), 0, None).unwrap().to_dense();
        let one = propagate_free(&[diag.clone()], 0.4, &psi0).unwrap();
        for i in 0..psi0.len() {
            let phase = Complex64::from_polar(1.0, -0.4 * diag[(i, i)].re);
            assert!((one[i] - psi0[i] * phase).norm() < 1e-14);
        }
    }

    #[test]
    fn pulses_do_nothing_without_raman() {
        let bath = ToyBath::single(0.7, 0.0, 0.05, 0.02, 3);
        let model = JointModel::new(5, bath, 2.0, 1.0, DEFAULT_DIM_BUDGET).unwrap();
        let (_, psi) = initial(&model);
        let psi0 = model.space.product_state(&psi, &[1]).unwrap();
        let hs = segment_hamiltonians(&model, &SegmentProfile::homogeneous(8, 0.0, 1).unwrap()).unwrap();
        let pi = model.space.phase_shifter_diagonal();
        let free = reduced_system(&propagate_free(&hs, 0.3, &psi0).unwrap(), &model.space).unwrap();
        for placement in [PulsePlacement::Bracketed, PulsePlacement::Paired] {
            let bb = reduced_system(&propagate_bb(&hs, 0.3, &psi0, &pi, placement).unwrap(), &model.space).unwrap();
            // Up to the global Π phases the reduced states coincide.
            let f = (psi.adjoint() * &bb * &psi)[(0, 0)].re;
            let g = (psi.adjoint() * &free * &psi)[(0, 0)].re;
            assert!((f - g).abs() < 1e-12);
            assert!((linalg::eigvalsh(&bb).unwrap().iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn resonant_raman_cancels_exactly_in_pairs() {
        // ω_a − ω_b = Ω: the free part commutes with the Raman term.
        let model = JointModel::new(5, ToyBath::single(1.0, 0.3, 0.0, 0.0, 4), 2.0, 1.0, DEFAULT_DIM_BUDGET).unwrap();
        let (_, psi) = initial(&model);
        let points = suppression_scan(&model, &psi, 10.0, &[8], PulsePlacement::Bracketed).unwrap();
        assert!(points[0].infidelity_bb < 1e-12);
        assert!(points[0].infidelity_free > 0.1);
    }

    #[test]
    fn detuned_raman_is_suppressed() {
        let model = raman_model(0.3);
        let (_, psi) = initial(&model);
        let points = suppression_scan(&model, &psi, 10.0, &[16, 32, 64], PulsePlacement::Bracketed).unwrap();
        for w in points.windows(2) {
            assert!(w[1].infidelity_bb < w[0].infidelity_bb);
        }
        let last = points.last().unwrap();
        assert!(last.infidelity_free > 10.0 * last.infidelity_bb);
    }

    #[test]
    fn bb_error_norm_is_first_order_in_segment_time() {
        // ‖U_bb ψ − phase·U₀ ψ‖ ≲ C N τ² with C from the commutator scale.
        let model = raman_model(0.3);
        let (_, psi) = initial(&model);
        let terms = build_terms(&model, 0, None).unwrap();
        let h0 = terms.free.to_dense();
        let v = terms.raman.to_dense();
        let comm = linalg::max_norm(&linalg::commutator(&h0, &v)) * h0.nrows() as f64;
        let psi0 = model.space.product_state(&psi, &[0]).unwrap();
        let pi = model.space.phase_shifter_diagonal();
        for &n in &[16usize, 32, 64] {
            let tau = 10.0 / n as f64;
            let hs = vec![terms.total().to_dense(); n];
            let bb = propagate_bb(&hs, tau, &psi0, &pi, PulsePlacement::Paired).unwrap();
            let reference = propagate_bb(&vec![h0.clone(); n], tau, &psi0, &pi, PulsePlacement::Paired).unwrap();
            let err = (&bb - &reference).norm();
            assert!(err <= comm * n as f64 * tau * tau, "N = {n}: {err}");
        }
    }

    #[test]
    fn seeded_profiles_are_reproducible() {
        let a = SegmentProfile::gaussian(6, 1e-3, 2, 0.1, 42).unwrap();
        let b = SegmentProfile::gaussian(6, 1e-3, 2, 0.1, 42).unwrap();
        let d = SegmentProfile::gaussian(6, 1e-3, 2, 0.1, 43).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, d);
        let model = JointModel::new(
            3,
            ToyBath {
                frequencies: vec![0.7, 1.3],
                raman_couplings: vec![0.3, 0.1],
                dephasing_a: vec![0.0; 2],
                dephasing_b: vec![0.0; 2],
                phonon_cut: 2,
            },
            2.0,
            1.0,
            DEFAULT_DIM_BUDGET,
        )
        .unwrap();
        let ha = segment_hamiltonians(&model, &a).unwrap();
        let hb = segment_hamiltonians(&model, &b).unwrap();
        let ua: Vec<CMatrix> = ha.iter().map(|h| linalg::expm_hermitian(h, 0.1).unwrap()).collect();
        let ub: Vec<CMatrix> = hb.iter().map(|h| linalg::expm_hermitian(h, 0.1).unwrap()).collect();
        assert_eq!(ua, ub);
        assert!(SegmentProfile::homogeneous(3, 1.0, 1).is_err());
        assert!(SegmentProfile::homogeneous(0, 1.0, 1).is_err());
    }

    #[test]
    fn negativity_through_the_bath() {
        let model = raman_model(0.3);
        let (s, psi) = initial(&model);
        let psi0 = model.space.product_state(&psi, &[0]).unwrap();
        assert!((negativity_trace(&psi0, &model.space).unwrap() - negativity_analytic(&s)).abs() < 1e-12);

        // Tag each manifold component with a different phonon number.
        let mut tagged = CVector::zeros(model.space.dim());
        for (n, cn) in s.coeffs().iter().enumerate() {
            let si = model.space.system().index_of(n, n + 1).unwrap();
            tagged[model.space.index(si, n)] = *cn;
        }
        assert_eq!(negativity_trace(&tagged, &model.space).unwrap(), 0.0);
        assert!(matches!(
            negativity_trace(&CVector::zeros(3), &model.space),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn dfs_residuals() {
        let space = FockSpace::new(60);
        let s = crate::states::build_state(1, c(0.5), 1e-12).unwrap();
        assert!(dfs_check(&s, &space).unwrap() < 1e-12);
        let vac = crate::states::build_state(0, c(0.0), 1e-12).unwrap();
        assert_eq!(dfs_check(&vac, &space).unwrap(), 0.0);
        let mut psi = s.embed(&space).unwrap();
        let moved = space.index_of(1, 1).unwrap();
        psi[moved] = c(0.1);
        assert!(dfs_residual(&psi, 1, &space) > 0.0);
    }

    #[test]
    fn flip_identities_at_budget_scale() {
        let bath = ToyBath {
            frequencies: vec![0.7, 1.3],
            raman_couplings: vec![0.3, 0.2],
            dephasing_a: vec![0.05, 0.01],
            dephasing_b: vec![0.02, 0.03],
            phonon_cut: 11,
        };
        let model = JointModel::new(6, bath, 2.0, 1.0, DEFAULT_DIM_BUDGET).unwrap();
        assert_eq!(model.space.dim(), 4032);
        let terms = build_terms(&model, 0, None).unwrap();
        let pi = model.space.phase_shifter_diagonal();
        assert!(terms.raman.conjugate_by_diagonal(&pi).plus(&terms.raman).max_norm() < 1e-13);
        let system = model.space.system();
        let t = fock::transfer(system, fock::Mode::A);
        let flipped = linalg::conjugate_by_diagonal(&fock::phase_shifter_diagonal(system), t.matrix());
        assert!(linalg::max_norm(&(flipped + t.matrix())) < 1e-13);
    }

    #[test]
    fn pulses_retain_negativity() {
        let model = raman_model(0.3);
        let (s, psi) = initial(&model);
        let n0 = negativity_analytic(&s);
        let psi0 = model.space.product_state(&psi, &[0]).unwrap();
        let pi = model.space.phase_shifter_diagonal();
        let hs = segment_hamiltonians(&model, &SegmentProfile::homogeneous(64, 0.0, 1).unwrap()).unwrap();
        // Long enough transit that the unprotected state loses most of it.
        let tau = 20.0 / 64.0;
        let bb = negativity_trace(&propagate_bb(&hs, tau, &psi0, &pi, PulsePlacement::Bracketed).unwrap(), &model.space).unwrap();
        let free = negativity_trace(&propagate_free(&hs, tau, &psi0).unwrap(), &model.space).unwrap();
        assert!(bb >= 0.9 * n0, "bb {bb} vs {n0}");
        assert!(free < 0.5 * n0, "free {free} vs {n0}");
    }

    #[test]
    fn slope_fit() {
        let xs = [1.0, 2.0, 4.0, 8.0];
        let ys: Vec<f64> = xs.iter().map(|x| 3.0 * x * x).collect();
        assert!((loglog_slope(&xs, &ys).unwrap() - 2.0).abs() < 1e-12);
        assert!(loglog_slope(&[1.0], &[1.0]).is_err());
    }
}
