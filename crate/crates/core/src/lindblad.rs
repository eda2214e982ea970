//! Master-equation solver: Liouvillian construction, steady state, time
//! evolution and the thermal-bath extension.
//!
//! Density matrices are vectorized by stacking columns, so entry (i, j) of a
//! d×d matrix sits at index `i + j*d` and vec(AXB) = (Bᵀ ⊗ A) vec(X). This is
//! the native storage order of nalgebra.

use std::sync::Arc;

use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::linalg;
use crate::model::{annihilation, build_basis, hamiltonian_rf, CMatrix, FockBasis, SystemSpec, C64};
use crate::sparse::CsrMatrix;

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };
const ONE: C64 = C64 { re: 1.0, im: 0.0 };

/// Reduced Planck constant, J·s.
pub const HBAR: f64 = 1.054_571_817e-34;
/// Boltzmann constant, J/K.
pub const K_B: f64 = 1.380_649e-23;

/// Element-wise Hermiticity and trace tolerance for density matrices.
pub const DENSITY_TOL: f64 = 1e-10;
/// Most negative eigenvalue accepted as numerical noise.
pub const POSITIVITY_TOL: f64 = 1e-9;
/// Successive-cutoff relative change below which g²(0) counts as converged.
pub const CONVERGENCE_TOL: f64 = 1e-6;

/// Largest vectorized dimension for which dense fallbacks (LU, SVD,
/// eigenvalues) are attempted.
const DENSE_LIMIT: usize = 1600;

/// Default per-mode cutoff: 4 for one sphere, 3 for two.
pub fn default_cutoff(n_magnons: usize) -> usize {
    if n_magnons >= 2 {
        3
    } else {
        4
    }
}

/// Full per-mode basis for `spec` at the given cutoff.
pub fn basis_for(spec: &SystemSpec, cutoff: usize) -> Result<Arc<FockBasis>> {
    Ok(Arc::new(build_basis(spec.n_modes(), cutoff, None)?))
}

#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    matrix: CMatrix,
    basis: Arc<FockBasis>,
}

impl DensityMatrix {
    /// Validates Hermiticity, unit trace and positivity.
    pub fn new(matrix: CMatrix, basis: Arc<FockBasis>) -> Result<Self> {
        let rho = Self { matrix, basis };
        rho.validate()?;
        Ok(rho)
    }

    fn validate(&self) -> Result<()> {
        let d = self.basis.dim();
        if self.matrix.nrows() != d || self.matrix.ncols() != d {
            return Err(Error::BasisMismatch);
        }
        if self.matrix.iter().any(|v| !v.is_finite()) {
            return Err(bad_rho("non-finite entries"));
        }
        let herm = self.hermiticity_error();
        if herm > DENSITY_TOL {
            return Err(bad_rho(format!("not Hermitian (max deviation {herm:.3e})")));
        }
        let tr = self.trace();
        if (tr - 1.0).abs() > DENSITY_TOL {
            return Err(bad_rho(format!("trace {tr:.12} != 1")));
        }
        let lowest = self.eigenvalues()[0];
        if lowest < -POSITIVITY_TOL {
            return Err(bad_rho(format!("negative eigenvalue {lowest:.3e}")));
        }
        Ok(())
    }

    /// Pure Fock state |n₀, n₁, …⟩.
    pub fn fock(basis: &Arc<FockBasis>, occupations: &[usize]) -> Result<Self> {
        let i = basis
            .index_of(occupations)
            .ok_or_else(|| bad_rho(format!("state {occupations:?} not in basis")))?;
        let d = basis.dim();
        let mut m = CMatrix::zeros(d, d);
        m[(i, i)] = ONE;
        Self::new(m, basis.clone())
    }

    pub fn vacuum(basis: &Arc<FockBasis>) -> Result<Self> {
        Self::fock(basis, &vec![0; basis.n_modes()])
    }

    /// Coherent state of amplitude `alpha` in `mode`, other modes in vacuum,
    /// truncated to the basis and renormalized.
    pub fn coherent(basis: &Arc<FockBasis>, mode: usize, alpha: C64) -> Result<Self> {
        let d = basis.dim();
        let mut psi = DVector::<C64>::zeros(d);
        let mut coeff = C64::new((-0.5 * alpha.norm_sqr()).exp(), 0.0);
        for n in 0.. {
            match basis.single_mode_state(mode, n) {
                Some(i) => psi[i] = coeff,
                None => break,
            }
            coeff *= alpha / ((n + 1) as f64).sqrt();
        }
        let norm = psi.norm();
        if norm == 0.0 {
            return Err(bad_rho("empty coherent state"));
        }
        psi /= C64::new(norm, 0.0);
        Self::new(&psi * psi.adjoint(), basis.clone())
    }

    /// Thermal state with mean occupation `nbar` in `mode`, other modes in
    /// vacuum, truncated and renormalized.
    pub fn thermal(basis: &Arc<FockBasis>, mode: usize, nbar: f64) -> Result<Self> {
        if !(nbar >= 0.0 && nbar.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "nbar",
                reason: "must be finite and >= 0".into(),
            });
        }
        let x = nbar / (1.0 + nbar);
        let d = basis.dim();
        let mut m = CMatrix::zeros(d, d);
        let mut total = 0.0;
        let mut p = 1.0;
        for n in 0.. {
            match basis.single_mode_state(mode, n) {
                Some(i) => {
                    m[(i, i)] = C64::new(p, 0.0);
                    total += p;
                }
                None => break,
            }
            p *= x;
        }
        m /= C64::new(total, 0.0);
        Self::new(m, basis.clone())
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

    pub fn trace(&self) -> f64 {
        self.matrix.trace().re
    }

    pub fn hermiticity_error(&self) -> f64 {
        let d = self.matrix.nrows();
        let mut worst = 0.0f64;
        for j in 0..d {
            for i in 0..=j {
                worst = worst.max((self.matrix[(i, j)] - self.matrix[(j, i)].conj()).norm());
            }
        }
        worst
    }

    /// Eigenvalues, ascending.
    pub fn eigenvalues(&self) -> Vec<f64> {
        linalg::hermitian_eigenvalues(&self.matrix)
    }

    /// ⟨a†a⟩ for `mode`.
    pub fn population(&self, mode: usize) -> f64 {
        self.diagonal_moment(mode, |n| n)
    }

    /// Σ f(n_mode)·ρ_ii over the diagonal.
    fn diagonal_moment(&self, mode: usize, f: impl Fn(f64) -> f64) -> f64 {
        self.basis
            .states()
            .iter()
            .enumerate()
            .map(|(i, s)| f(s[mode] as f64) * self.matrix[(i, i)].re)
            .sum()
    }

    /// |⟨ψ|ρ|ψ⟩| for basis state `index`.
    pub fn fidelity_with_basis_state(&self, index: usize) -> f64 {
        self.matrix[(index, index)].re
    }

    pub fn trace_distance(&self, other: &Self) -> f64 {
        linalg::trace_distance(&self.matrix, &other.matrix)
    }
}

fn bad_rho(reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name: "density_matrix",
        reason: reason.into(),
    }
}

/// Thermal environment. Frequencies are absolute angular frequencies (rad/s),
/// one per mode, cavity first.
#[derive(Debug, Clone, PartialEq)]
pub struct BathSpec {
    pub temperature: f64,
    pub mode_frequencies: Vec<f64>,
}

impl BathSpec {
    pub fn new(temperature: f64, mode_frequencies: Vec<f64>) -> Self {
        Self {
            temperature,
            mode_frequencies,
        }
    }

    /// Same temperature and absolute frequency for every mode.
    pub fn uniform(temperature: f64, frequency: f64, n_modes: usize) -> Self {
        Self::new(temperature, vec![frequency; n_modes])
    }

    pub fn validate(&self, n_modes: usize) -> Result<()> {
        if !(self.temperature >= 0.0 && self.temperature.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "bath.temperature",
                reason: "must be finite and >= 0".into(),
            });
        }
        if self.mode_frequencies.len() != n_modes {
            return Err(Error::InvalidParameter {
                name: "bath.mode_frequencies",
                reason: format!(
                    "need one absolute frequency per mode ({n_modes}), got {}",
                    self.mode_frequencies.len()
                ),
            });
        }
        if self.mode_frequencies.iter().any(|w| !(*w > 0.0 && w.is_finite())) {
            return Err(Error::InvalidParameter {
                name: "bath.mode_frequencies",
                reason: "must be finite and > 0".into(),
            });
        }
        Ok(())
    }

    pub fn occupations(&self) -> Vec<f64> {
        self.mode_frequencies
            .iter()
            .map(|&w| thermal_occupation(w, self.temperature))
            .collect()
    }
}

/// Bose–Einstein occupation 1/(exp(ħω/k_BT) − 1); zero at T = 0.
pub fn thermal_occupation(omega: f64, temperature: f64) -> f64 {
    if temperature <= 0.0 {
        return 0.0;
    }
    1.0 / (HBAR * omega / (K_B * temperature)).exp_m1()
}

/// Temperature at which a mode of angular frequency `omega` has occupation
/// `nbar`.
pub fn temperature_for_occupation(omega: f64, nbar: f64) -> f64 {
    if nbar <= 0.0 {
        return 0.0;
    }
    HBAR * omega / (K_B * (1.0 / nbar).ln_1p())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChannelKind {
    /// Jump operator √(κ(n̄+1))·a.
    Lowering,
    /// Jump operator √(κn̄)·a†.
    Raising,
}

/// One dissipative channel D[√rate·o]ρ = rate(oρo† − ½{o†o, ρ}).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Channel {
    pub mode: usize,
    pub kind: ChannelKind,
    pub rate: f64,
}

#[derive(Debug, Clone)]
pub struct Liouvillian {
    superop: CsrMatrix,
    hamiltonian: CMatrix,
    /// Jump operators with √rate folded in, parallel to `channels`.
    jumps: Vec<CMatrix>,
    channels: Vec<Channel>,
    occupations: Vec<f64>,
    /// Typical single-excitation amplitude, used to rescale steady-state
    /// solves.
    excitation_scale: f64,
    basis: Arc<FockBasis>,
}

/// Builds the Liouvillian for `spec`; `bath = None` means zero temperature.
pub fn build_liouvillian(
    spec: &SystemSpec,
    basis: &Arc<FockBasis>,
    bath: Option<&BathSpec>,
) -> Result<Liouvillian> {
    let occupations = match bath {
        Some(b) => {
            b.validate(spec.n_modes())?;
            b.occupations()
        }
        None => vec![0.0; spec.n_modes()],
    };
    build_liouvillian_with_occupations(spec, basis, &occupations)
}

/// As [`build_liouvillian`] but with the thermal occupation of every mode
/// given directly.
pub fn build_liouvillian_with_occupations(
    spec: &SystemSpec,
    basis: &Arc<FockBasis>,
    occupations: &[f64],
) -> Result<Liouvillian> {
    let h = hamiltonian_rf(spec, basis)?.into_matrix();
    if occupations.len() != spec.n_modes() {
        return Err(Error::InvalidParameter {
            name: "occupations",
            reason: format!("need {} values, got {}", spec.n_modes(), occupations.len()),
        });
    }
    if occupations.iter().any(|n| !(*n >= 0.0 && n.is_finite())) {
        return Err(Error::InvalidParameter {
            name: "occupations",
            reason: "must be finite and >= 0".into(),
        });
    }

    let decays: Vec<f64> = std::iter::once(spec.cavity_decay)
        .chain(spec.magnons.iter().map(|m| m.decay))
        .collect();
    let mut channels = Vec::new();
    let mut jumps = Vec::new();
    for (mode, (&kappa, &nbar)) in decays.iter().zip(occupations).enumerate() {
        let a = annihilation(basis, mode)?.into_matrix();
        let down = kappa * (nbar + 1.0);
        channels.push(Channel {
            mode,
            kind: ChannelKind::Lowering,
            rate: down,
        });
        jumps.push(&a * C64::new(down.sqrt(), 0.0));
        if nbar > 0.0 {
            let up = kappa * nbar;
            channels.push(Channel {
                mode,
                kind: ChannelKind::Raising,
                rate: up,
            });
            jumps.push(a.adjoint() * C64::new(up.sqrt(), 0.0));
        }
    }

    let d = basis.dim();
    let id = CMatrix::identity(d, d);
    let mut trip = Vec::new();
    // −i(Hρ − ρH)
    add_sandwich(&mut trip, C64::new(0.0, -1.0), &h, &id);
    add_sandwich(&mut trip, C64::new(0.0, 1.0), &id, &h);
    for l in &jumps {
        let ldag = l.adjoint();
        let m = &ldag * l;
        add_sandwich(&mut trip, ONE, l, &ldag);
        add_sandwich(&mut trip, C64::new(-0.5, 0.0), &m, &id);
        add_sandwich(&mut trip, C64::new(-0.5, 0.0), &id, &m);
    }

    let kappa_min = decays.iter().copied().fold(f64::INFINITY, f64::min);
    let nbar_max = occupations.iter().copied().fold(0.0, f64::max);
    let excitation_scale = (2.0 * spec.drive / kappa_min)
        .max((nbar_max / (1.0 + nbar_max)).sqrt())
        .clamp(1e-6, 1.0);

    Ok(Liouvillian {
        superop: CsrMatrix::from_triplets(d * d, d * d, trip),
        hamiltonian: h,
        jumps,
        channels,
        occupations: occupations.to_vec(),
        excitation_scale,
        basis: basis.clone(),
    })
}

/// Appends the superoperator X ↦ coef·A X B: entry (i + j·d, k + l·d) is
/// coef·A_ik·B_lj.
fn add_sandwich(trip: &mut Vec<(usize, usize, C64)>, coef: C64, a: &CMatrix, b: &CMatrix) {
    let d = a.nrows();
    let nz = |m: &CMatrix| -> Vec<(usize, usize, C64)> {
        let mut out = Vec::new();
        for c in 0..d {
            for r in 0..d {
                if m[(r, c)] != ZERO {
                    out.push((r, c, m[(r, c)]));
                }
            }
        }
        out
    };
    let an = nz(a);
    let bn = nz(b);
    for &(i, k, av) in &an {
        for &(l, j, bv) in &bn {
            trip.push((i + j * d, k + l * d, coef * av * bv));
        }
    }
}

/// Dense Liouvillian written directly from
/// ρ̇ = i[ρ, H_rf] + Σ (κ/2)(2oρo† − o†oρ − ρo†o), zero temperature, by
/// applying the right-hand side to every matrix unit. Independent of the
/// sparse builder; only meant for small bases.
pub fn master_equation_dense(spec: &SystemSpec, basis: &Arc<FockBasis>) -> Result<CMatrix> {
    let h = hamiltonian_rf(spec, basis)?.into_matrix();
    let d = basis.dim();
    if d * d > DENSE_LIMIT * 4 {
        return Err(Error::InvalidParameter {
            name: "basis",
            reason: format!("dense master equation limited to small bases (d = {d})"),
        });
    }
    let mut ops: Vec<(f64, CMatrix)> = vec![(spec.cavity_decay, annihilation(basis, 0)?.into_matrix())];
    for (j, m) in spec.magnons.iter().enumerate() {
        ops.push((m.decay, annihilation(basis, j + 1)?.into_matrix()));
    }
    let i = C64::new(0.0, 1.0);
    let mut out = CMatrix::zeros(d * d, d * d);
    for col in 0..d * d {
        let mut rho = CMatrix::zeros(d, d);
        rho[(col % d, col / d)] = ONE;
        let mut rhs = (&rho * &h - &h * &rho) * i;
        for (kappa, o) in &ops {
            let od = o.adjoint();
            let half = C64::new(kappa / 2.0, 0.0);
            rhs += (o * &rho * &od * C64::new(2.0, 0.0) - &od * o * &rho - &rho * &od * o) * half;
        }
        for (k, v) in rhs.iter().enumerate() {
            out[(k, col)] = *v;
        }
    }
    Ok(out)
}

impl Liouvillian {
    pub fn superoperator(&self) -> &CsrMatrix {
        &self.superop
    }

    pub fn hamiltonian(&self) -> &CMatrix {
        &self.hamiltonian
    }

    pub fn channels(&self) -> &[Channel] {
        &self.channels
    }

    pub fn occupations(&self) -> &[f64] {
        &self.occupations
    }

    pub fn basis(&self) -> &Arc<FockBasis> {
        &self.basis
    }

    /// Hilbert-space dimension d (the superoperator is d²×d²).
    pub fn dim(&self) -> usize {
        self.basis.dim()
    }

    /// L·vec(ρ) reshaped into a matrix.
    pub fn apply(&self, rho: &CMatrix) -> CMatrix {
        let d = self.dim();
        CMatrix::from_column_slice(d, d, &self.superop.matvec(rho.as_slice()))
    }

    /// max |vec(I)ᵀ L|: zero for a trace-preserving generator.
    pub fn trace_preservation_residual(&self) -> f64 {
        let d = self.dim();
        let mut w = vec![ZERO; d * d];
        for i in 0..d {
            w[i + i * d] = ONE;
        }
        self.superop
            .left_matvec(&w)
            .iter()
            .map(|v| v.norm())
            .fold(0.0, f64::max)
    }

    /// The `k` eigenvalues with the largest real part (dense; small bases).
    pub fn leading_eigenvalues(&self, k: usize) -> Result<Vec<C64>> {
        let n = self.superop.nrows();
        if n > DENSE_LIMIT {
            return Err(too_large(n));
        }
        let mut ev = linalg::eigenvalues(&self.superop.to_dense()).ok_or_else(|| Error::Singular {
            context: "Liouvillian Schur decomposition did not converge".into(),
        })?;
        ev.sort_by(|a, b| b.re.total_cmp(&a.re));
        ev.truncate(k);
        Ok(ev)
    }

    /// Two smallest singular values of L (dense; small bases).
    pub fn null_space_gap(&self) -> Result<(f64, f64)> {
        let n = self.superop.nrows();
        if n > DENSE_LIMIT {
            return Err(too_large(n));
        }
        let sv = linalg::singular_values(&self.superop.to_dense());
        Ok((sv[0], sv.get(1).copied().unwrap_or(f64::INFINITY)))
    }

    /// Largest rate in the generator: Hamiltonian entries and linewidths.
    pub fn fastest_rate(&self) -> f64 {
        let h = self.hamiltonian.iter().map(|v| v.norm()).fold(0.0, f64::max);
        let k = self.channels.iter().map(|c| c.rate).fold(0.0, f64::max);
        h.max(k)
    }

    /// Step satisfying dt ≤ 0.05/fastest rate.
    pub fn suggested_dt(&self) -> f64 {
        0.05 / self.fastest_rate().max(1e-12)
    }
}

fn too_large(n: usize) -> Error {
    Error::InvalidParameter {
        name: "liouvillian",
        reason: format!("dense operation limited to dimension {DENSE_LIMIT}, got {n}"),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SteadyMethod {
    /// GMRES on the Sylvester-preconditioned system.
    Iterative,
    /// LU with one row replaced by the trace condition.
    DenseLu,
}

#[derive(Debug, Clone)]
pub struct SteadyState {
    pub rho: DensityMatrix,
    /// max |ρ − ρ†|/2 removed by symmetrization.
    pub symmetrization_residual: f64,
    /// max |L·vec(ρ)| of the returned state.
    pub liouvillian_residual: f64,
    pub method: SteadyMethod,
    pub iterations: usize,
}

/// Steady state of `l`, renormalized to unit trace and symmetrized.
///
/// The generator is split as L = S + J with S(X) = −i(H_eff X − X H_eff†) and
/// J(X) = Σ L_k X L_k†. S is inverted exactly through a Schur decomposition
/// of H_eff, and GMRES solves (I + S⁻¹J + u·trᵀ)x = u with u = I/d, whose
/// unique solution is the trace-one null vector. Small systems fall back to a
/// dense LU solve if GMRES stalls.
pub fn steady_state(l: &Liouvillian) -> Result<SteadyState> {
    match solve_scaled(l, steady_iterative) {
        Ok(out) => Ok(out),
        Err(e) if l.superop.nrows() <= DENSE_LIMIT => steady_state_dense(l).map_err(|dense| match dense {
            Error::DegenerateNullSpace { .. } => dense,
            _ => e,
        }),
        Err(e) => Err(e),
    }
}

/// Dense LU steady state with the trace condition replacing the first row.
/// Checks the null space for degeneracy first.
pub fn steady_state_dense(l: &Liouvillian) -> Result<SteadyState> {
    let n = l.superop.nrows();
    if n > DENSE_LIMIT {
        return Err(too_large(n));
    }
    let (s0, s1) = l.null_space_gap()?;
    if s1 < 1e3 * s0.max(1e-300) || s1 < 1e-10 {
        return Err(Error::DegenerateNullSpace { s0, s1 });
    }
    solve_scaled(l, steady_dense)
}

/// Diagonal of S = diag(ε^N), N the total excitation of each basis state.
///
/// Steady states are solved for ρ̃ = S⁻¹ρS⁻¹, whose entries are all of order
/// one in the weak-drive regime. Without this the few-photon populations sit
/// below the rounding floor of the vacuum entry and g²(0) is lost at small Ω.
fn excitation_weights(l: &Liouvillian, eps: f64) -> Vec<f64> {
    l.basis
        .states()
        .iter()
        .map(|s| eps.powi(s.iter().sum::<usize>() as i32))
        .collect()
}

/// Smallest ε with ρ_ii ≤ ε^(2N_i) for every excited state, so that every
/// entry of the rescaled ρ̃ is at most one.
fn natural_scale(rho: &DensityMatrix) -> f64 {
    rho.basis
        .states()
        .iter()
        .enumerate()
        .filter_map(|(i, s)| {
            let n = s.iter().sum::<usize>();
            let p = rho.matrix[(i, i)].re;
            (n > 0 && p > 0.0).then(|| p.powf(0.5 / n as f64))
        })
        .fold(0.0, f64::max)
}

/// Re-solves at the scale read off the previous solution until it settles.
/// The a-priori scale from the drive strength can be far off when the cavity
/// is hybridized with the magnons.
fn solve_scaled(
    l: &Liouvillian,
    solve: impl Fn(&Liouvillian, f64) -> Result<SteadyState>,
) -> Result<SteadyState> {
    let mut eps = l.excitation_scale;
    let mut out = solve(l, eps)?;
    for _ in 0..3 {
        let next = natural_scale(&out.rho).clamp(1e-7, 1.0);
        if (next / eps).ln().abs() < 2f64.ln() {
            break;
        }
        // a strongly rescaled H_eff is very non-normal and can stall GMRES;
        // shrink gradually and keep the last solve that worked
        eps = next.max(eps / 30.0);
        match solve(l, eps) {
            Ok(o) => out = o,
            Err(Error::DegenerateNullSpace { .. }) => break,
            Err(Error::Singular { .. }) => break,
            Err(e) => return Err(e),
        }
    }
    Ok(out)
}

/// S⁻¹AS for diagonal S.
fn similarity(a: &CMatrix, s: &[f64]) -> CMatrix {
    CMatrix::from_fn(a.nrows(), a.ncols(), |i, j| a[(i, j)] * (s[j] / s[i]))
}

fn steady_dense(l: &Liouvillian, eps: f64) -> Result<SteadyState> {
    let d = l.dim();
    let s = excitation_weights(l, eps);
    // L̃ = D⁻¹LD with D = S ⊗ S on column-stacked vectors
    let dvec: Vec<f64> = (0..d * d).map(|p| s[p % d] * s[p / d]).collect();
    let mut a = CMatrix::zeros(d * d, d * d);
    for r in 0..d * d {
        for (c, v) in l.superop.row(r) {
            a[(r, c)] = v * (dvec[c] / dvec[r]);
        }
    }
    for c in 0..d * d {
        a[(0, c)] = ZERO;
    }
    for i in 0..d {
        a[(0, i + i * d)] = C64::new(s[i] * s[i], 0.0);
    }
    let mut b = DVector::<C64>::zeros(d * d);
    b[0] = ONE;
    let x = a.lu().solve(&b).ok_or_else(|| Error::Singular {
        context: "steady-state LU".into(),
    })?;
    let rho = CMatrix::from_fn(d, d, |i, j| x[i + j * d] * (s[i] * s[j]));
    finish(l, rho, SteadyMethod::DenseLu, 0)
}

fn steady_iterative(l: &Liouvillian, eps: f64) -> Result<SteadyState> {
    let d = l.dim();
    let s = excitation_weights(l, eps);
    let mut heff = l.hamiltonian.clone();
    for j in &l.jumps {
        heff -= (j.adjoint() * j) * C64::new(0.0, 0.5);
    }
    let heff = similarity(&heff, &s);
    let (q, t) = linalg::schur(&heff).ok_or_else(|| Error::Singular {
        context: "Schur decomposition of H_eff".into(),
    })?;
    let qd = q.adjoint();
    let jumps: Vec<(CMatrix, CMatrix)> = l
        .jumps
        .iter()
        .map(|j| {
            let jt = &qd * similarity(j, &s) * &q;
            let jtd = jt.adjoint();
            (jt, jtd)
        })
        .collect();
    // tr ρ = tr(S²ρ̃) = tr(W Y) in Schur coordinates Y = Q†ρ̃Q
    let s2 = CMatrix::from_diagonal(&DVector::from_iterator(d, s.iter().map(|v| C64::new(v * v, 0.0))));
    let w = (&qd * s2 * &q).transpose();
    let trace_w = |y: &CMatrix| -> C64 { w.iter().zip(y.iter()).map(|(a, b)| a * b).sum() };
    let norm = C64::new(1.0 / s.iter().map(|v| v * v).sum::<f64>(), 0.0);
    let i = C64::new(0.0, 1.0);
    let singular = || Error::Singular {
        context: "Sylvester preconditioner (undamped mode)".into(),
    };
    // S̃⁻¹ in Schur coordinates
    let s_inv = |r: &CMatrix| linalg::sylvester_triangular(&t, &(r * i));

    let failed = std::cell::Cell::new(false);
    let mut op = |v: &[C64]| -> Vec<C64> {
        let y = CMatrix::from_column_slice(d, d, v);
        let mut jy = CMatrix::zeros(d, d);
        for (jt, jtd) in &jumps {
            jy += jt * &y * jtd;
        }
        let Some(z) = s_inv(&jy) else {
            failed.set(true);
            return vec![C64::new(f64::NAN, 0.0); d * d];
        };
        let tr = trace_w(&y);
        let mut out = y + z;
        for k in 0..d {
            out[(k, k)] += tr * norm;
        }
        out.as_slice().to_vec()
    };

    let mut rhs = vec![ZERO; d * d];
    for k in 0..d {
        rhs[k + k * d] = norm;
    }
    let mut iterations = 0;
    let mut y = CMatrix::zeros(d, d);
    // Iterative refinement against the exact sparse generator: the Schur
    // form of the rescaled H_eff is only accurate to its conditioning, so
    // the first GMRES solve is of a slightly perturbed problem.
    let mut settled = false;
    let mut best = f64::INFINITY;
    let mut last = (f64::INFINITY, 0);
    for _ in 0..8 {
        // each pass only needs a few digits; refinement supplies the rest
        let outcome = linalg::gmres(&mut op, &rhs, 80, 200, 1e-10);
        if failed.get() {
            return Err(singular());
        }
        iterations += outcome.iterations;
        last = (outcome.residual, outcome.iterations);
        // GMRES minimises the residual, so even a stalled run improves y
        if !outcome.residual.is_finite() || outcome.residual >= 1.0 {
            break;
        }
        y += CMatrix::from_column_slice(d, d, &outcome.x);

        // true residual r̃ = S⁻¹ L(SρS) S⁻¹, back in Schur coordinates
        let scaled = &q * &y * &qd;
        let rho = CMatrix::from_fn(d, d, |a, b| scaled[(a, b)] * (s[a] * s[b]));
        let lr = CMatrix::from_column_slice(d, d, &l.superop.matvec(rho.as_slice()));
        let r = CMatrix::from_fn(d, d, |a, b| lr[(a, b)] / (s[a] * s[b]));
        let rt = &qd * r * &q;
        let size = y.iter().map(|v| v.norm()).fold(0.0, f64::max);
        let resid = rt.iter().map(|v| v.norm()).fold(0.0, f64::max);
        let trace_err = ONE - trace_w(&y);
        let rel = resid / size.max(1e-300) + trace_err.norm();
        if rel <= 1e-14 {
            settled = true;
            break;
        }
        // stagnation means the rounding floor of the residual itself
        if rel > 0.5 * best {
            settled = best <= 1e-10;
            break;
        }
        best = rel;
        let corr = s_inv(&rt).ok_or_else(singular)?;
        for (k, v) in rhs.iter_mut().enumerate() {
            *v = -corr.as_slice()[k];
        }
        for k in 0..d {
            rhs[k + k * d] += trace_err * norm;
        }
    }
    if !settled {
        return Err(Error::Singular {
            context: format!(
                "steady-state GMRES stalled at relative residual {:.3e} after {} iterations",
                last.0, last.1
            ),
        });
    }
    let scaled = &q * y * &qd;
    let rho = CMatrix::from_fn(d, d, |a, b| scaled[(a, b)] * (s[a] * s[b]));
    finish(l, rho, SteadyMethod::Iterative, iterations)
}

fn finish(l: &Liouvillian, x: CMatrix, method: SteadyMethod, iterations: usize) -> Result<SteadyState> {
    let tr = x.trace();
    if tr.norm() == 0.0 || !tr.is_finite() {
        return Err(Error::Singular {
            context: "steady state has zero trace".into(),
        });
    }
    let x = x / tr;
    let sym = (&x + x.adjoint()) * C64::new(0.5, 0.0);
    let symmetrization_residual = (&x - &sym).iter().map(|v| v.norm()).fold(0.0, f64::max);
    let liouvillian_residual = l
        .superop
        .matvec(sym.as_slice())
        .iter()
        .map(|v| v.norm())
        .fold(0.0, f64::max);
    let rho = DensityMatrix::new(sym, l.basis.clone())?;
    Ok(SteadyState {
        rho,
        symmetrization_residual,
        liouvillian_residual,
        method,
        iterations,
    })
}

/// Maximum trace drift tolerated during [`evolve`].
pub const TRACE_DRIFT_TOL: f64 = 1e-8;

/// Fixed-step RK4 integration of dρ/dt = Lρ from `rho0` to `t_final`.
///
/// The last step is shortened to land exactly on `t_final`. Aborts when the
/// trace drifts by more than [`TRACE_DRIFT_TOL`] or any entry exceeds 1 in
/// modulus (the tell-tale of an unstable step).
pub fn evolve(l: &Liouvillian, rho0: &DensityMatrix, t_final: f64, dt: f64) -> Result<DensityMatrix> {
    if rho0.basis() != l.basis() {
        return Err(Error::BasisMismatch);
    }
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::InvalidParameter {
            name: "dt",
            reason: "must be finite and > 0".into(),
        });
    }
    if !(t_final >= 0.0 && t_final.is_finite()) {
        return Err(Error::InvalidParameter {
            name: "t_final",
            reason: "must be finite and >= 0".into(),
        });
    }
    let d = l.dim();
    let n = d * d;
    let a = &l.superop;
    let mut x = rho0.matrix().as_slice().to_vec();
    let mut k1 = vec![ZERO; n];
    let mut k2 = vec![ZERO; n];
    let mut k3 = vec![ZERO; n];
    let mut k4 = vec![ZERO; n];
    let mut tmp = vec![ZERO; n];
    let diag: Vec<usize> = (0..d).map(|i| i + i * d).collect();

    let mut t = 0.0;
    while t < t_final {
        let h = dt.min(t_final - t);
        let hc = C64::new(h, 0.0);
        a.matvec_into(&x, &mut k1);
        axpy(&mut tmp, &x, hc * 0.5, &k1);
        a.matvec_into(&tmp, &mut k2);
        axpy(&mut tmp, &x, hc * 0.5, &k2);
        a.matvec_into(&tmp, &mut k3);
        axpy(&mut tmp, &x, hc, &k3);
        a.matvec_into(&tmp, &mut k4);
        let w = hc / 6.0;
        for i in 0..n {
            x[i] += w * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        t += h;

        let tr: C64 = diag.iter().map(|&i| x[i]).sum();
        let drift = (tr - ONE).norm();
        let peak = x.iter().map(|v| v.norm()).fold(0.0, f64::max);
        if !(drift <= TRACE_DRIFT_TOL) || !(peak <= 1.0 + 1e-6) {
            return Err(Error::StepTooLarge {
                time: t,
                diagnostic: format!(
                    "trace drift {drift:.3e}, max |rho_ij| {peak:.3e} with dt = {dt:.3e} \
                     (suggested dt <= {:.3e})",
                    l.suggested_dt()
                ),
            });
        }
    }
    let m = CMatrix::from_column_slice(d, d, &x);
    let m = (&m + m.adjoint()) * C64::new(0.5, 0.0);
    DensityMatrix::new(m, l.basis.clone())
}

fn axpy(out: &mut [C64], x: &[C64], a: C64, y: &[C64]) {
    for ((o, xi), yi) in out.iter_mut().zip(x).zip(y) {
        *o = xi + a * yi;
    }
}

/// Tr(c†c†cc ρ)/Tr(c†cρ)² for the cavity (mode 0).
pub fn g2_from_density(rho: &DensityMatrix) -> Result<f64> {
    let n1 = rho.diagonal_moment(0, |n| n);
    let n2 = rho.diagonal_moment(0, |n| n * (n - 1.0));
    if !(n1 > 0.0) {
        return Err(Error::Undefined(format!("cavity population {n1:.3e}")));
    }
    Ok((n2 / (n1 * n1)).max(0.0))
}

/// Zero-temperature steady-state g²(0) at the given per-mode cutoff.
pub fn g2(spec: &SystemSpec, cutoff: usize) -> Result<f64> {
    g2_thermal(spec, cutoff, None)
}

/// Steady-state g²(0) with an optional thermal bath.
pub fn g2_thermal(spec: &SystemSpec, cutoff: usize, bath: Option<&BathSpec>) -> Result<f64> {
    let basis = basis_for(spec, cutoff)?;
    let l = build_liouvillian(spec, &basis, bath)?;
    g2_from_density(&steady_state(&l)?.rho)
}

/// Steady-state g²(0) with every mode at thermal occupation `nbar`.
pub fn g2_with_occupation(spec: &SystemSpec, cutoff: usize, nbar: f64) -> Result<f64> {
    let basis = basis_for(spec, cutoff)?;
    let l = build_liouvillian_with_occupations(spec, &basis, &vec![nbar; spec.n_modes()])?;
    g2_from_density(&steady_state(&l)?.rho)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceRow {
    pub cutoff: usize,
    pub g2: f64,
    /// Relative change from the previous cutoff.
    pub relative_change: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceTable {
    pub rows: Vec<ConvergenceRow>,
    /// Last two cutoffs agree to [`CONVERGENCE_TOL`].
    pub converged: bool,
}

/// g²(0) at each cutoff, with successive relative changes.
pub fn convergence_check(spec: &SystemSpec, cutoffs: &[usize]) -> Result<ConvergenceTable> {
    if cutoffs.len() < 2 {
        return Err(Error::InvalidParameter {
            name: "cutoffs",
            reason: "need at least two cutoffs".into(),
        });
    }
    let mut rows: Vec<ConvergenceRow> = Vec::with_capacity(cutoffs.len());
    for &cutoff in cutoffs {
        let value = g2(spec, cutoff)?;
        let relative_change = rows
            .last()
            .map(|prev| (value - prev.g2).abs() / value.abs().max(prev.g2.abs()).max(1e-300));
        rows.push(ConvergenceRow {
            cutoff,
            g2: value,
            relative_change,
        });
    }
    let converged = rows
        .last()
        .and_then(|r| r.relative_change)
        .is_some_and(|c| c < CONVERGENCE_TOL);
    Ok(ConvergenceTable { rows, converged })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn arc(b: FockBasis) -> Arc<FockBasis> {
        Arc::new(b)
    }

    #[test]
    fn fock_and_coherent_statistics() {
        let b = arc(build_basis(2, 3, None).unwrap());
        let one = DensityMatrix::fock(&b, &[1, 0]).unwrap();
        assert_eq!(g2_from_density(&one).unwrap(), 0.0);

        let b = arc(build_basis(2, 10, None).unwrap());
        let coh = DensityMatrix::coherent(&b, 0, C64::new(0.3, 0.0)).unwrap();
        assert!((g2_from_density(&coh).unwrap() - 1.0).abs() < 1e-4);
        let th = DensityMatrix::thermal(&b, 0, 0.1).unwrap();
        assert!((g2_from_density(&th).unwrap() - 2.0).abs() < 1e-6);
    }

    #[test]
    fn vacuum_has_undefined_g2() {
        let b = arc(build_basis(2, 2, None).unwrap());
        let vac = DensityMatrix::vacuum(&b).unwrap();
        assert!(matches!(g2_from_density(&vac), Err(Error::Undefined(_))));
    }

    #[test]
    fn rejects_bad_density_matrices() {
        let b = arc(build_basis(2, 1, None).unwrap());
        let m = CMatrix::identity(4, 4);
        assert!(DensityMatrix::new(m, b.clone()).is_err());
        let mut m = CMatrix::zeros(4, 4);
        m[(0, 0)] = C64::new(1.5, 0.0);
        m[(1, 1)] = C64::new(-0.5, 0.0);
        assert!(DensityMatrix::new(m, b).is_err());
    }

    #[test]
    fn dark_vacuum_and_trace_preservation() {
        let spec = SystemSpec::single(0.3, 2.0, 0.1, 0.0);
        let b = basis_for(&spec, 3).unwrap();
        let l = build_liouvillian(&spec, &b, None).unwrap();
        let vac = DensityMatrix::vacuum(&b).unwrap();
        let lv = l.apply(vac.matrix());
        assert!(lv.iter().all(|v| v.norm() < 1e-12));
        assert!(l.trace_preservation_residual() < 1e-12);
    }

    #[test]
    fn matches_independent_master_equation() {
        let spec = SystemSpec::double(0.2, [1.5, 0.7], [0.3, -0.2], 0.4);
        let b = basis_for(&spec, 2).unwrap();
        let l = build_liouvillian(&spec, &b, Some(&BathSpec::uniform(0.0, 1e10, 3))).unwrap();
        let dense = master_equation_dense(&spec, &b).unwrap();
        let diff = (l.superoperator().to_dense() - dense)
            .iter()
            .map(|v| v.norm())
            .fold(0.0, f64::max);
        assert!(diff < 1e-13, "{diff}");
    }

    #[test]
    fn iterative_and_dense_steady_states_agree() {
        let spec = SystemSpec::single(0.2869, 9.883, 4e-3, 0.1);
        let b = basis_for(&spec, 3).unwrap();
        let l = build_liouvillian(&spec, &b, None).unwrap();
        let it = steady_state(&l).unwrap();
        assert_eq!(it.method, SteadyMethod::Iterative);
        let de = steady_state_dense(&l).unwrap();
        assert!(it.rho.trace_distance(&de.rho) < 1e-10);
        assert!(it.liouvillian_residual < 1e-10);
    }

    #[test]
    fn linear_system_is_coherent_at_weak_drive() {
        // populations of order 1e-12 must still be resolved
        for delta in [-1.0, 0.0, 0.7] {
            let spec = SystemSpec::single(delta, 9.88, 0.0, 0.01);
            let v = g2(&spec, 4).unwrap();
            assert!((v - 1.0).abs() < 1e-6, "delta {delta}: {v}");
        }
    }

    #[test]
    fn thermal_channels_and_detailed_balance() {
        let spec = SystemSpec::single(0.0, 1.0, 0.1, 0.0);
        let b = basis_for(&spec, 2).unwrap();
        let l = build_liouvillian_with_occupations(&spec, &b, &[0.5, 0.5]).unwrap();
        assert_eq!(l.channels().len(), 4);
        let down = l.channels()[0];
        let up = l.channels()[1];
        assert_eq!(down.kind, ChannelKind::Lowering);
        assert!((up.rate / down.rate - 0.5 / 1.5).abs() < 1e-15);
        assert!(l.trace_preservation_residual() < 1e-12);
    }

    #[test]
    fn occupation_round_trip() {
        let w = 2.0 * std::f64::consts::PI * 10e9;
        for nbar in [1e-3, 0.1, 2.0] {
            let t = temperature_for_occupation(w, nbar);
            assert!((thermal_occupation(w, t) - nbar).abs() < 1e-12 * nbar.max(1.0));
        }
        assert_eq!(thermal_occupation(w, 0.0), 0.0);
    }

    #[test]
    fn bath_requires_frequency_per_mode() {
        let spec = SystemSpec::single(0.0, 1.0, 0.1, 0.1);
        let b = basis_for(&spec, 2).unwrap();
        let bath = BathSpec::new(0.01, vec![]);
        assert!(build_liouvillian(&spec, &b, Some(&bath)).is_err());
    }

    #[test]
    fn damped_photon_decays_exponentially() {
        let spec = SystemSpec::single(0.0, 0.0, 0.0, 0.0);
        let b = basis_for(&spec, 2).unwrap();
        let l = build_liouvillian(&spec, &b, None).unwrap();
        let rho0 = DensityMatrix::fock(&b, &[1, 0]).unwrap();
        let rho = evolve(&l, &rho0, 1.0, 1e-3).unwrap();
        assert!((rho.population(0) - (-1.0f64).exp()).abs() < 1e-6);
    }

    #[test]
    fn oversized_step_aborts() {
        let spec = SystemSpec::single(0.0, 10.0, 0.0, 0.5);
        let b = basis_for(&spec, 3).unwrap();
        let l = build_liouvillian(&spec, &b, None).unwrap();
        let rho0 = DensityMatrix::vacuum(&b).unwrap();
        assert!(matches!(
            evolve(&l, &rho0, 20.0, 1.0),
            Err(Error::StepTooLarge { .. })
        ));
    }
}
