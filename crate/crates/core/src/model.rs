//! System parameters, truncated Fock bases and the cavity–magnon Hamiltonians.
//!
//! Every frequency is dimensionless, measured in units of the reference
//! linewidth Γ. The absolute value of Γ is carried on [`SystemSpec`] only so
//! that bath temperatures can be converted into thermal occupations.
//!
//! Mode 0 of every basis is the cavity; modes 1 and 2 are the magnons.

use std::collections::HashMap;
use std::fmt;
use std::ops::{Add, Mul, Sub};
use std::str::FromStr;
use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type CMatrix = DMatrix<C64>;

/// Γ/2π = 1 MHz, expressed as an angular frequency.
pub const DEFAULT_GAMMA: f64 = 2.0 * std::f64::consts::PI * 1.0e6;

/// One Kerr magnon mode (Kittel mode of a sphere).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MagnonSpec {
    /// Δ_m = ω_m − ω_p.
    pub detuning: f64,
    /// Signed Kerr coefficient; positive for a [100] bias, negative for [110].
    pub kerr: f64,
    /// Photon–magnon coupling g.
    pub coupling: f64,
    /// Magnon linewidth κ_m.
    pub decay: f64,
}

impl MagnonSpec {
    pub fn new(detuning: f64, coupling: f64, kerr: f64) -> Self {
        Self {
            detuning,
            kerr,
            coupling,
            decay: 1.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        finite("magnon.detuning", self.detuning)?;
        finite("magnon.kerr", self.kerr)?;
        finite("magnon.coupling", self.coupling)?;
        finite("magnon.decay", self.decay)?;
        if self.decay <= 0.0 {
            return Err(invalid("magnon.decay", "must be > 0"));
        }
        if self.coupling < 0.0 {
            return Err(invalid("magnon.coupling", "must be >= 0"));
        }
        Ok(())
    }
}

/// Driven cavity plus one or two Kerr magnon modes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SystemSpec {
    /// Δ_c = ω_c − ω_p.
    pub cavity_detuning: f64,
    /// Cavity linewidth κ_c.
    pub cavity_decay: f64,
    /// Drive Rabi frequency Ω.
    pub drive: f64,
    pub magnons: Vec<MagnonSpec>,
    /// Absolute Γ in rad/s.
    pub gamma: f64,
}

impl SystemSpec {
    /// One sphere with Δ_c = Δ_m = `delta` and κ_c = κ_m = Γ.
    pub fn single(delta: f64, coupling: f64, kerr: f64, drive: f64) -> Self {
        Self {
            cavity_detuning: delta,
            cavity_decay: 1.0,
            drive,
            magnons: vec![MagnonSpec::new(delta, coupling, kerr)],
            gamma: DEFAULT_GAMMA,
        }
    }

    /// Two spheres sharing the detuning `delta`; all linewidths equal Γ.
    pub fn double(delta: f64, couplings: [f64; 2], kerrs: [f64; 2], drive: f64) -> Self {
        Self {
            cavity_detuning: delta,
            cavity_decay: 1.0,
            drive,
            magnons: vec![
                MagnonSpec::new(delta, couplings[0], kerrs[0]),
                MagnonSpec::new(delta, couplings[1], kerrs[1]),
            ],
            gamma: DEFAULT_GAMMA,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.magnons.is_empty() || self.magnons.len() > 2 {
            return Err(invalid(
                "magnons",
                format!("need 1 or 2 magnon modes, got {}", self.magnons.len()),
            ));
        }
        finite("cavity_detuning", self.cavity_detuning)?;
        finite("cavity_decay", self.cavity_decay)?;
        finite("drive", self.drive)?;
        finite("gamma", self.gamma)?;
        if self.cavity_decay <= 0.0 {
            return Err(invalid("cavity_decay", "must be > 0"));
        }
        if self.drive < 0.0 {
            return Err(invalid("drive", "must be >= 0"));
        }
        if self.gamma <= 0.0 {
            return Err(invalid("gamma", "must be > 0"));
        }
        self.magnons.iter().try_for_each(MagnonSpec::validate)
    }

    /// Number of bosonic modes including the cavity.
    pub fn n_modes(&self) -> usize {
        1 + self.magnons.len()
    }

    /// Sets Δ_c and every Δ_m to `delta`.
    pub fn with_detuning(mut self, delta: f64) -> Self {
        self.cavity_detuning = delta;
        for m in &mut self.magnons {
            m.detuning = delta;
        }
        self
    }

    pub fn with_drive(mut self, drive: f64) -> Self {
        self.drive = drive;
        self
    }

    pub fn with_kerrs(mut self, kerrs: &[f64]) -> Self {
        for (m, k) in self.magnons.iter_mut().zip(kerrs) {
            m.kerr = *k;
        }
        self
    }

    /// ζ_g = g₁/g₂ (two spheres, g₂ ≠ 0).
    pub fn zeta_g(&self) -> Option<f64> {
        match self.magnons.as_slice() {
            [a, b] if b.coupling != 0.0 => Some(a.coupling / b.coupling),
            _ => None,
        }
    }

    /// ζ_K = K₁/K₂ (two spheres, K₂ ≠ 0).
    pub fn zeta_k(&self) -> Option<f64> {
        match self.magnons.as_slice() {
            [a, b] if b.kerr != 0.0 => Some(a.kerr / b.kerr),
            _ => None,
        }
    }

    /// Same system with both magnon labels exchanged.
    pub fn swapped_magnons(&self) -> Self {
        let mut out = self.clone();
        out.magnons.reverse();
        out
    }
}

fn finite(name: &'static str, v: f64) -> Result<()> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(invalid(name, "must be finite"))
    }
}

fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}

/// A named, sweepable system parameter.
///
/// `Delta` moves the cavity and all magnon detunings together. `G` and `K`
/// act on every magnon: `G` sets all couplings, `K` sets |K| while keeping
/// the relative sign pattern of the template (so a K₊₋ template stays K₊₋).
/// `ZetaG` sets g₁ = ζ·g₂ and `ZetaK` sets |K₁| = ζ·|K₂|, both against the
/// template's second sphere.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepParam {
    Delta,
    G,
    G1,
    G2,
    K,
    K1,
    K2,
    Omega,
    ZetaG,
    ZetaK,
}

impl SweepParam {
    pub const ALL: [SweepParam; 10] = [
        SweepParam::Delta,
        SweepParam::G,
        SweepParam::G1,
        SweepParam::G2,
        SweepParam::K,
        SweepParam::K1,
        SweepParam::K2,
        SweepParam::Omega,
        SweepParam::ZetaG,
        SweepParam::ZetaK,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SweepParam::Delta => "delta",
            SweepParam::G => "g",
            SweepParam::G1 => "g1",
            SweepParam::G2 => "g2",
            SweepParam::K => "k",
            SweepParam::K1 => "k1",
            SweepParam::K2 => "k2",
            SweepParam::Omega => "omega",
            SweepParam::ZetaG => "zeta_g",
            SweepParam::ZetaK => "zeta_k",
        }
    }

    /// Returns a copy of `spec` with this parameter set to `value`.
    pub fn apply(self, spec: &SystemSpec, value: f64) -> Result<SystemSpec> {
        let mut out = spec.clone();
        let need = |idx: usize| -> Result<()> {
            if spec.magnons.len() > idx {
                Ok(())
            } else {
                Err(invalid(
                    "sweep",
                    format!("parameter `{}` needs magnon {}", self.name(), idx + 1),
                ))
            }
        };
        match self {
            SweepParam::Delta => out = out.with_detuning(value),
            SweepParam::G => out.magnons.iter_mut().for_each(|m| m.coupling = value),
            SweepParam::G1 => {
                need(0)?;
                out.magnons[0].coupling = value;
            }
            SweepParam::G2 => {
                need(1)?;
                out.magnons[1].coupling = value;
            }
            SweepParam::K => {
                let lead = spec.magnons[0].kerr.signum();
                for m in &mut out.magnons {
                    let rel = if m.kerr == 0.0 || lead == 0.0 {
                        1.0
                    } else {
                        m.kerr.signum() * lead
                    };
                    m.kerr = rel * value;
                }
            }
            SweepParam::K1 => {
                need(0)?;
                out.magnons[0].kerr = value;
            }
            SweepParam::K2 => {
                need(1)?;
                out.magnons[1].kerr = value;
            }
            SweepParam::Omega => out.drive = value,
            SweepParam::ZetaG => {
                need(1)?;
                out.magnons[0].coupling = value * spec.magnons[1].coupling;
            }
            SweepParam::ZetaK => {
                need(1)?;
                let sign = if spec.magnons[0].kerr < 0.0 { -1.0 } else { 1.0 };
                out.magnons[0].kerr = sign * value * spec.magnons[1].kerr.abs();
            }
        }
        Ok(out)
    }
}

impl fmt::Display for SweepParam {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SweepParam {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.trim().to_ascii_lowercase();
        let alias = match key.as_str() {
            "Δ" | "detuning" => "delta",
            "Ω" | "drive" => "omega",
            "zeta_k_abs" | "zetak" => "zeta_k",
            "zetag" => "zeta_g",
            other => other,
        };
        SweepParam::ALL
            .into_iter()
            .find(|p| p.name() == alias)
            .ok_or_else(|| Error::UnknownParameter(s.to_string()))
    }
}

/// Ordered, truncated multimode occupation-number basis.
#[derive(Debug, Clone)]
pub struct FockBasis {
    cutoffs: Vec<usize>,
    total_cutoff: Option<usize>,
    states: Vec<Vec<usize>>,
    index: HashMap<Vec<usize>, usize>,
}

impl PartialEq for FockBasis {
    fn eq(&self, other: &Self) -> bool {
        self.cutoffs == other.cutoffs && self.total_cutoff == other.total_cutoff
    }
}

impl FockBasis {
    /// Builds a basis with arbitrary per-mode cutoffs. States are ordered
    /// lexicographically in their occupation tuples.
    pub fn with_cutoffs(cutoffs: &[usize], total_cutoff: Option<usize>) -> Result<Self> {
        if cutoffs.is_empty() {
            return Err(invalid("n_modes", "need at least one mode"));
        }
        let mut states = Vec::new();
        let mut current = vec![0usize; cutoffs.len()];
        loop {
            let total: usize = current.iter().sum();
            if total_cutoff.is_none_or(|t| total <= t) {
                states.push(current.clone());
            }
            // odometer increment, last mode fastest
            let mut k = cutoffs.len();
            loop {
                if k == 0 {
                    let index = states.iter().enumerate().map(|(i, s)| (s.clone(), i)).collect();
                    return Ok(Self {
                        cutoffs: cutoffs.to_vec(),
                        total_cutoff,
                        states,
                        index,
                    });
                }
                k -= 1;
                if current[k] < cutoffs[k] {
                    current[k] += 1;
                    break;
                }
                current[k] = 0;
            }
        }
    }

    pub fn dim(&self) -> usize {
        self.states.len()
    }

    pub fn n_modes(&self) -> usize {
        self.cutoffs.len()
    }

    pub fn cutoffs(&self) -> &[usize] {
        &self.cutoffs
    }

    pub fn total_cutoff(&self) -> Option<usize> {
        self.total_cutoff
    }

    pub fn states(&self) -> &[Vec<usize>] {
        &self.states
    }

    pub fn state(&self, i: usize) -> &[usize] {
        &self.states[i]
    }

    pub fn index_of(&self, occupations: &[usize]) -> Option<usize> {
        self.index.get(occupations).copied()
    }

    /// Index of the state with `n` quanta in `mode` and none elsewhere.
    pub fn single_mode_state(&self, mode: usize, n: usize) -> Option<usize> {
        let mut occ = vec![0; self.n_modes()];
        *occ.get_mut(mode)? = n;
        self.index_of(&occ)
    }
}

/// Builds the basis for a cavity plus `n_modes - 1` magnons.
///
/// `total_cutoff = Some(2)` gives the few-excitation subspace used by the
/// weak-drive amplitude equations: 6 states for one sphere, 10 for two.
pub fn build_basis(n_modes: usize, per_mode_cutoff: usize, total_cutoff: Option<usize>) -> Result<FockBasis> {
    if !(2..=3).contains(&n_modes) {
        return Err(invalid(
            "n_modes",
            format!("expected 2 or 3 modes (cavity + 1 or 2 magnons), got {n_modes}"),
        ));
    }
    FockBasis::with_cutoffs(&vec![per_mode_cutoff; n_modes], total_cutoff)
}

/// Dense complex operator on a [`FockBasis`].
#[derive(Debug, Clone)]
pub struct ComplexOperator {
    matrix: CMatrix,
    basis: Arc<FockBasis>,
}

impl ComplexOperator {
    pub fn new(matrix: CMatrix, basis: Arc<FockBasis>) -> Result<Self> {
        let d = basis.dim();
        if matrix.nrows() != d || matrix.ncols() != d {
            return Err(Error::BasisMismatch);
        }
        Ok(Self { matrix, basis })
    }

    pub fn zeros(basis: Arc<FockBasis>) -> Self {
        let d = basis.dim();
        Self {
            matrix: CMatrix::zeros(d, d),
            basis,
        }
    }

    pub fn identity(basis: Arc<FockBasis>) -> Self {
        let d = basis.dim();
        Self {
            matrix: CMatrix::identity(d, d),
            basis,
        }
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    pub fn basis(&self) -> &Arc<FockBasis> {
        &self.basis
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn dagger(&self) -> Self {
        Self {
            matrix: self.matrix.adjoint(),
            basis: self.basis.clone(),
        }
    }

    pub fn scale(&self, s: C64) -> Self {
        Self {
            matrix: &self.matrix * s,
            basis: self.basis.clone(),
        }
    }

    /// Largest element-wise deviation from Hermiticity.
    pub fn hermiticity_error(&self) -> f64 {
        let d = self.dim();
        let mut worst = 0.0f64;
        for i in 0..d {
            for j in 0..d {
                worst = worst.max((self.matrix[(i, j)] - self.matrix[(j, i)].conj()).norm());
            }
        }
        worst
    }

    fn check(&self, other: &Self) {
        assert!(
            Arc::ptr_eq(&self.basis, &other.basis) || self.basis == other.basis,
            "operators live on different bases"
        );
    }
}

impl<'a> Mul<&'a ComplexOperator> for &'a ComplexOperator {
    type Output = ComplexOperator;

    fn mul(self, rhs: &'a ComplexOperator) -> ComplexOperator {
        self.check(rhs);
        ComplexOperator {
            matrix: &self.matrix * &rhs.matrix,
            basis: self.basis.clone(),
        }
    }
}

impl<'a> Add<&'a ComplexOperator> for &'a ComplexOperator {
    type Output = ComplexOperator;

    fn add(self, rhs: &'a ComplexOperator) -> ComplexOperator {
        self.check(rhs);
        ComplexOperator {
            matrix: &self.matrix + &rhs.matrix,
            basis: self.basis.clone(),
        }
    }
}

impl<'a> Sub<&'a ComplexOperator> for &'a ComplexOperator {
    type Output = ComplexOperator;

    fn sub(self, rhs: &'a ComplexOperator) -> ComplexOperator {
        self.check(rhs);
        ComplexOperator {
            matrix: &self.matrix - &rhs.matrix,
            basis: self.basis.clone(),
        }
    }
}

/// Lowering operator for `mode`. Transitions that leave the truncated basis
/// are dropped.
pub fn annihilation(basis: &Arc<FockBasis>, mode: usize) -> Result<ComplexOperator> {
    if mode >= basis.n_modes() {
        return Err(Error::InvalidMode {
            index: mode,
            n_modes: basis.n_modes(),
        });
    }
    let d = basis.dim();
    let mut m = CMatrix::zeros(d, d);
    for (col, state) in basis.states().iter().enumerate() {
        let n = state[mode];
        if n == 0 {
            continue;
        }
        let mut lowered = state.clone();
        lowered[mode] -= 1;
        if let Some(row) = basis.index_of(&lowered) {
            m[(row, col)] = C64::new((n as f64).sqrt(), 0.0);
        }
    }
    ComplexOperator::new(m, basis.clone())
}

pub fn creation(basis: &Arc<FockBasis>, mode: usize) -> Result<ComplexOperator> {
    Ok(annihilation(basis, mode)?.dagger())
}

/// Diagonal a†a for `mode`, built from occupations directly.
pub fn number(basis: &Arc<FockBasis>, mode: usize) -> Result<ComplexOperator> {
    if mode >= basis.n_modes() {
        return Err(Error::InvalidMode {
            index: mode,
            n_modes: basis.n_modes(),
        });
    }
    let diag = basis
        .states()
        .iter()
        .map(|s| C64::new(s[mode] as f64, 0.0))
        .collect::<Vec<_>>();
    ComplexOperator::new(
        CMatrix::from_diagonal(&nalgebra::DVector::from_vec(diag)),
        basis.clone(),
    )
}

fn check_modes(spec: &SystemSpec, basis: &FockBasis) -> Result<()> {
    spec.validate()?;
    if basis.n_modes() != spec.n_modes() {
        return Err(Error::ModeCountMismatch {
            basis: basis.n_modes(),
            expected: spec.n_modes(),
        });
    }
    Ok(())
}

/// Rotating-frame Hamiltonian
/// Σ_j[Δ_m m_j†m_j + g_j(m_j†c + c†m_j) + K_j(m_j†m_j)²] + Δ_c c†c + Ω(c + c†).
///
/// Built element by element so the diagonal is exact and the matrix is
/// exactly Hermitian.
pub fn hamiltonian_rf(spec: &SystemSpec, basis: &Arc<FockBasis>) -> Result<ComplexOperator> {
    check_modes(spec, basis)?;
    let d = basis.dim();
    let mut h = CMatrix::zeros(d, d);

    for (col, state) in basis.states().iter().enumerate() {
        let nc = state[0] as f64;
        let mut diag = spec.cavity_detuning * nc;
        for (j, mag) in spec.magnons.iter().enumerate() {
            let nm = state[j + 1] as f64;
            diag += mag.detuning * nm + mag.kerr * nm * nm;
        }
        h[(col, col)] = C64::new(diag, 0.0);

        // Ω c: lowers the cavity
        if state[0] > 0 {
            let mut t = state.clone();
            t[0] -= 1;
            if let Some(row) = basis.index_of(&t) {
                let amp = spec.drive * nc.sqrt();
                h[(row, col)] += amp;
                h[(col, row)] += amp;
            }
        }

        // g m_j† c: moves one quantum from the cavity into magnon j
        for (j, mag) in spec.magnons.iter().enumerate() {
            if state[0] == 0 || mag.coupling == 0.0 {
                continue;
            }
            let mut t = state.clone();
            t[0] -= 1;
            t[j + 1] += 1;
            if let Some(row) = basis.index_of(&t) {
                let amp = mag.coupling * nc.sqrt() * (t[j + 1] as f64).sqrt();
                h[(row, col)] += amp;
                h[(col, row)] += amp;
            }
        }
    }
    ComplexOperator::new(h, basis.clone())
}

/// H_rf − i(κ_c/2)c†c − iΣ_j(κ_m/2)m_j†m_j.
pub fn hamiltonian_eff(spec: &SystemSpec, basis: &Arc<FockBasis>) -> Result<ComplexOperator> {
    let mut h = hamiltonian_rf(spec, basis)?.into_matrix();
    for (i, state) in basis.states().iter().enumerate() {
        let mut loss = 0.5 * spec.cavity_decay * state[0] as f64;
        for (j, mag) in spec.magnons.iter().enumerate() {
            loss += 0.5 * mag.decay * state[j + 1] as f64;
        }
        h[(i, i)] -= C64::new(0.0, loss);
    }
    ComplexOperator::new(h, basis.clone())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    fn arc(b: FockBasis) -> Arc<FockBasis> {
        Arc::new(b)
    }

    #[test]
    fn basis_sizes() {
        assert_eq!(build_basis(2, 2, Some(2)).unwrap().dim(), 6);
        assert_eq!(build_basis(3, 2, Some(2)).unwrap().dim(), 10);
        assert_eq!(build_basis(2, 0, None).unwrap().dim(), 1);
        assert_eq!(build_basis(2, 4, None).unwrap().dim(), 25);
        assert_eq!(build_basis(3, 3, None).unwrap().dim(), 64);
    }

    #[test]
    fn basis_rejects_bad_mode_count() {
        assert!(matches!(
            build_basis(1, 2, None),
            Err(Error::InvalidParameter { .. })
        ));
        assert!(build_basis(4, 2, None).is_err());
    }

    #[test]
    fn basis_is_lexicographic() {
        let b = build_basis(2, 2, Some(2)).unwrap();
        let expect: Vec<Vec<usize>> = vec![
            vec![0, 0],
            vec![0, 1],
            vec![0, 2],
            vec![1, 0],
            vec![1, 1],
            vec![2, 0],
        ];
        assert_eq!(b.states(), expect.as_slice());
        for (i, s) in b.states().iter().enumerate() {
            assert_eq!(b.index_of(s), Some(i));
        }
    }

    #[test]
    fn two_level_ladder() {
        let b = arc(FockBasis::with_cutoffs(&[1], None).unwrap());
        let a = annihilation(&b, 0).unwrap();
        let m = a.matrix();
        assert_eq!(m[(0, 1)], C64::new(1.0, 0.0));
        assert_eq!(m[(0, 0)], C64::new(0.0, 0.0));
        assert_eq!(m[(1, 0)], C64::new(0.0, 0.0));
        assert_eq!(m[(1, 1)], C64::new(0.0, 0.0));
    }

    #[test]
    fn number_operator_eigenvalue() {
        let b = arc(build_basis(2, 3, None).unwrap());
        let a = annihilation(&b, 0).unwrap();
        let n = &a.dagger() * &a;
        let i = b.index_of(&[2, 0]).unwrap();
        assert!(close(n.matrix()[(i, i)].re, 2.0, 1e-12));
        let direct = number(&b, 0).unwrap();
        assert!((n.matrix() - direct.matrix()).norm() < 1e-12);
    }

    #[test]
    fn commutator_is_identity_below_cutoff() {
        let b = arc(build_basis(2, 4, None).unwrap());
        for mode in 0..2 {
            let a = annihilation(&b, mode).unwrap();
            let ad = a.dagger();
            let comm = &(&a * &ad) - &(&ad * &a);
            for (i, s) in b.states().iter().enumerate() {
                if s[mode] < 4 {
                    for j in 0..b.dim() {
                        let expect = if i == j { 1.0 } else { 0.0 };
                        assert!((comm.matrix()[(i, j)] - expect).norm() < 1e-12);
                    }
                }
            }
        }
    }

    #[test]
    fn invalid_mode_index() {
        let b = arc(build_basis(2, 2, None).unwrap());
        assert_eq!(
            annihilation(&b, 2).unwrap_err(),
            Error::InvalidMode { index: 2, n_modes: 2 }
        );
    }

    #[test]
    fn free_modes_count_excitations() {
        let spec = SystemSpec::single(1.0, 0.0, 0.0, 0.0);
        let b = arc(build_basis(2, 3, None).unwrap());
        let h = hamiltonian_rf(&spec, &b).unwrap();
        for (i, s) in b.states().iter().enumerate() {
            for j in 0..b.dim() {
                let expect = if i == j { (s[0] + s[1]) as f64 } else { 0.0 };
                assert_eq!(h.matrix()[(i, j)], C64::new(expect, 0.0));
            }
        }
    }

    #[test]
    fn kerr_diagonal_entries() {
        let (dm, k) = (0.3, 0.004);
        let spec = SystemSpec::single(dm, 9.88, k, 0.1);
        let b = arc(build_basis(2, 2, Some(2)).unwrap());
        let h = hamiltonian_rf(&spec, &b).unwrap();
        let i01 = b.index_of(&[0, 1]).unwrap();
        let i02 = b.index_of(&[0, 2]).unwrap();
        assert!(close(h.matrix()[(i01, i01)].re, dm + k, 1e-15));
        assert!(close(h.matrix()[(i02, i02)].re, 2.0 * dm + 4.0 * k, 1e-15));
    }

    #[test]
    fn effective_hamiltonian_loss() {
        let spec = SystemSpec::single(0.7, 2.0, 0.01, 0.1);
        let b = arc(build_basis(2, 2, Some(2)).unwrap());
        let h = hamiltonian_eff(&spec, &b).unwrap();
        let i = b.index_of(&[1, 0]).unwrap();
        assert!((h.matrix()[(i, i)] - C64::new(0.7, -0.5)).norm() < 1e-15);

        let mut closed = spec.clone();
        closed.cavity_decay = f64::MIN_POSITIVE;
        closed.magnons[0].decay = f64::MIN_POSITIVE;
        let he = hamiltonian_eff(&closed, &b).unwrap();
        let hr = hamiltonian_rf(&closed, &b).unwrap();
        assert!((he.matrix() - hr.matrix()).norm() < 1e-300);
    }

    #[test]
    fn mode_count_mismatch() {
        let spec = SystemSpec::double(0.0, [1.0, 1.0], [0.1, -0.1], 0.1);
        let b = arc(build_basis(2, 2, None).unwrap());
        assert_eq!(
            hamiltonian_rf(&spec, &b).unwrap_err(),
            Error::ModeCountMismatch {
                basis: 2,
                expected: 3
            }
        );
    }

    #[test]
    fn validation() {
        let mut spec = SystemSpec::single(0.0, 1.0, 0.0, 0.1);
        spec.cavity_decay = -1.0;
        assert!(spec.validate().is_err());
        let mut spec = SystemSpec::single(0.0, 1.0, 0.0, 0.1);
        spec.magnons[0].coupling = -1.0;
        assert!(spec.validate().is_err());
        let mut spec = SystemSpec::single(0.0, 1.0, 0.0, 0.1);
        spec.magnons.clear();
        assert!(spec.validate().is_err());
    }

    #[test]
    fn zeta_ratios() {
        let spec = SystemSpec::double(0.0, [12.0, 9.88], [0.004, -0.004], 0.1);
        assert!(close(spec.zeta_g().unwrap(), 12.0 / 9.88, 1e-15));
        assert_eq!(spec.zeta_k(), Some(-1.0));
        assert_eq!(SystemSpec::single(0.0, 1.0, 0.1, 0.1).zeta_g(), None);
    }

    #[test]
    fn sweep_param_semantics() {
        let t = SystemSpec::double(0.1, [9.88, 9.88], [0.004, -0.004], 0.1);
        let s = SweepParam::K.apply(&t, 0.01).unwrap();
        assert_eq!(s.magnons[0].kerr, 0.01);
        assert_eq!(s.magnons[1].kerr, -0.01);
        let s = SweepParam::ZetaG.apply(&t, 0.5).unwrap();
        assert!(close(s.magnons[0].coupling, 4.94, 1e-12));
        let s = SweepParam::ZetaK.apply(&t, 0.25).unwrap();
        assert!(close(s.magnons[0].kerr, 0.001, 1e-15));
        let s = SweepParam::Delta.apply(&t, -0.5).unwrap();
        assert_eq!(s.cavity_detuning, -0.5);
        assert!(s.magnons.iter().all(|m| m.detuning == -0.5));
        let single = SystemSpec::single(0.0, 1.0, 0.1, 0.1);
        assert!(SweepParam::G2.apply(&single, 1.0).is_err());
        assert_eq!("Zeta_G".parse::<SweepParam>().unwrap(), SweepParam::ZetaG);
        assert!(matches!(
            "nope".parse::<SweepParam>(),
            Err(Error::UnknownParameter(_))
        ));
    }
}
