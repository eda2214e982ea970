//! Weak-drive steady state in the ≤2-excitation subspace.
//!
//! The state is written as Σ C_s |s⟩ over the basis with total excitation at
//! most two. Setting i·Ċ = H_eff·C to zero, pinning the vacuum amplitude to 1
//! and dropping the vacuum row leaves an inhomogeneous linear system whose
//! source is the drive acting on the vacuum. The equations are generated from
//! [`hamiltonian_eff`] so one and two spheres share the same code path.

use std::sync::Arc;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::model::{build_basis, hamiltonian_eff, FockBasis, SweepParam, SystemSpec, C64};

/// Steady-state amplitudes over the ≤2-excitation basis, vacuum pinned to 1.
#[derive(Debug, Clone)]
pub struct AmplitudeVector {
    basis: Arc<FockBasis>,
    amplitudes: Vec<C64>,
}

impl AmplitudeVector {
    pub fn basis(&self) -> &Arc<FockBasis> {
        &self.basis
    }

    pub fn as_slice(&self) -> &[C64] {
        &self.amplitudes
    }

    pub fn n_magnons(&self) -> usize {
        self.basis.n_modes() - 1
    }

    /// Amplitude of the given occupation tuple, or zero if it is outside the
    /// basis.
    pub fn get(&self, occupations: &[usize]) -> C64 {
        self.basis
            .index_of(occupations)
            .map_or(C64::new(0.0, 0.0), |i| self.amplitudes[i])
    }

    /// C_{n,0,...}: n photons, empty magnons.
    pub fn cavity(&self, n: usize) -> C64 {
        self.basis
            .single_mode_state(0, n)
            .map_or(C64::new(0.0, 0.0), |i| self.amplitudes[i])
    }

    /// ⟨c†c⟩ over the truncated state: Σ n_c |C_s|².
    pub fn photon_number(&self) -> f64 {
        self.basis
            .states()
            .iter()
            .zip(&self.amplitudes)
            .map(|(s, c)| s[0] as f64 * c.norm_sqr())
            .sum()
    }
}

#[derive(Debug, Clone)]
pub struct CorrelationResult {
    pub g2: f64,
    /// ⟨c†c†cc⟩ = 2|C_2photon|².
    pub numerator: f64,
    /// ⟨c†c⟩².
    pub denominator: f64,
    pub amplitudes: AmplitudeVector,
}

/// Basis of the weak-drive hierarchy for `n_magnons` spheres.
pub fn weak_drive_basis(n_magnons: usize) -> Result<FockBasis> {
    build_basis(n_magnons + 1, 2, Some(2))
}

pub fn steady_amplitudes(spec: &SystemSpec) -> Result<AmplitudeVector> {
    spec.validate()?;
    if spec.drive <= 0.0 {
        return Err(Error::InvalidParameter {
            name: "drive",
            reason: "weak-drive amplitudes need drive > 0".into(),
        });
    }
    let basis = Arc::new(weak_drive_basis(spec.magnons.len())?);
    let h = hamiltonian_eff(spec, &basis)?.into_matrix();
    let d = basis.dim();
    let vac = basis
        .index_of(&vec![0; basis.n_modes()])
        .expect("vacuum in basis");
    debug_assert_eq!(vac, 0);

    // rows/cols 1..d, with the vacuum column moved to the right-hand side
    let m = h.view((1, 1), (d - 1, d - 1)).into_owned();
    let rhs = -h.view((1, 0), (d - 1, 1)).column(0).into_owned();
    let x = m.lu().solve(&rhs).ok_or_else(|| Error::Singular {
        context: describe(spec),
    })?;
    if x.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
        return Err(Error::Singular {
            context: describe(spec),
        });
    }

    let mut amplitudes = Vec::with_capacity(d);
    amplitudes.push(C64::new(1.0, 0.0));
    amplitudes.extend(x.iter().copied());
    Ok(AmplitudeVector { basis, amplitudes })
}

fn describe(spec: &SystemSpec) -> String {
    let mags = spec
        .magnons
        .iter()
        .map(|m| format!("(Δm={}, g={}, K={})", m.detuning, m.coupling, m.kerr))
        .collect::<Vec<_>>()
        .join(", ");
    format!(
        "Δc={}, Ω={}, magnons [{}]",
        spec.cavity_detuning, spec.drive, mags
    )
}

/// 2|C_2photon|² / (Σ n_c|C_s|²)², i.e. the truncated-state ⟨c†c†cc⟩/⟨c†c⟩².
pub fn g2_zero(amps: &AmplitudeVector) -> Result<CorrelationResult> {
    let numerator = 2.0 * amps.cavity(2).norm_sqr();
    let n = amps.photon_number();
    let denominator = n * n;
    if denominator == 0.0 || !denominator.is_finite() {
        return Err(Error::Undefined("no cavity excitation".into()));
    }
    Ok(CorrelationResult {
        g2: numerator / denominator,
        numerator,
        denominator,
        amplitudes: amps.clone(),
    })
}

/// Leading-order form 2|C_2photon|²/|C_1photon|⁴.
pub fn g2_leading_order(amps: &AmplitudeVector) -> Result<f64> {
    let c1 = amps.cavity(1).norm_sqr();
    if c1 == 0.0 {
        return Err(Error::Undefined("no single-photon amplitude".into()));
    }
    Ok(2.0 * amps.cavity(2).norm_sqr() / (c1 * c1))
}

/// Convenience: steady state followed by [`g2_zero`].
pub fn g2(spec: &SystemSpec) -> Result<f64> {
    Ok(g2_zero(&steady_amplitudes(spec)?)?.g2)
}

/// One steady-state solve per grid value, in order.
pub fn g2_spectrum(spec: &SystemSpec, param: SweepParam, values: &[f64]) -> Result<Vec<CorrelationResult>> {
    values
        .par_iter()
        .map(|&v| g2_zero(&steady_amplitudes(&param.apply(spec, v)?)?))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    const K: f64 = 4e-3;
    const DELTA_OPT: f64 = 0.286_886_263_538_315_3;
    const G_OPT: f64 = 9.883_292_419_158_707;

    /// Closed-form solve of the decoupled driven cavity (g = 0), keeping the
    /// √2ΩC20 feedback: C10 = −Ω/(Δ' − Ω²/Δ'), C20 = −√2Ω C10/(2Δ').
    fn empty_cavity(delta: f64, omega: f64) -> (C64, C64) {
        let dp = C64::new(delta, -0.5);
        let c10 = -omega / (dp - omega * omega / dp);
        let c20 = -(2f64.sqrt()) * omega * c10 / (2.0 * dp);
        (c10, c20)
    }

    #[test]
    fn basis_sizes() {
        assert_eq!(weak_drive_basis(1).unwrap().dim(), 6);
        assert_eq!(weak_drive_basis(2).unwrap().dim(), 10);
    }

    #[test]
    fn decoupled_cavity_matches_closed_form() {
        for &(delta, omega) in &[(0.3, 0.1), (-1.2, 0.05), (0.0, 0.02)] {
            let spec = SystemSpec::single(delta, 0.0, 0.0, omega);
            let amps = steady_amplitudes(&spec).unwrap();
            let (c10, c20) = empty_cavity(delta, omega);
            assert!((amps.cavity(1) - c10).norm() < 1e-14);
            assert!((amps.cavity(2) - c20).norm() < 1e-14);
            // leading order: C10 ≈ −Ω/Δ', C20 ≈ C10²/√2
            let dp = C64::new(delta, -0.5);
            let r = omega / dp.norm();
            assert!((amps.cavity(1) + omega / dp).norm() < 2.0 * r.powi(3));
            let coherent = amps.cavity(1).powi(2) / 2f64.sqrt();
            assert!((amps.cavity(2) - coherent).norm() < 2.0 * r.powi(4));
        }
    }

    #[test]
    fn amplitudes_vanish_with_drive() {
        let base = SystemSpec::single(0.3, 5.0, K, 0.1);
        let a1 = steady_amplitudes(&base.clone().with_drive(1e-3)).unwrap();
        let a2 = steady_amplitudes(&base.clone().with_drive(5e-4)).unwrap();
        let r1 = a1.cavity(1).norm() / a2.cavity(1).norm();
        let r2 = a1.cavity(2).norm() / a2.cavity(2).norm();
        assert!((r1 - 2.0).abs() < 1e-3);
        assert!((r2 - 4.0).abs() < 1e-3);
    }

    #[test]
    fn zero_drive_rejected() {
        let spec = SystemSpec::single(0.3, 5.0, K, 0.0);
        assert!(matches!(
            steady_amplitudes(&spec),
            Err(Error::InvalidParameter { name: "drive", .. })
        ));
    }

    #[test]
    fn two_photon_amplitude_vanishes_at_optimum() {
        let amps = steady_amplitudes(&SystemSpec::single(DELTA_OPT, G_OPT, K, 0.1)).unwrap();
        let c10 = amps.cavity(1).norm_sqr();
        assert!(amps.cavity(2).norm_sqr() < 1e-10 * c10 * c10);
        let r = g2_zero(&amps).unwrap();
        assert!(r.g2 < 1e-6, "g2 = {}", r.g2);
        assert_eq!(r.g2, r.numerator / r.denominator);
    }

    #[test]
    fn g2_of_hand_built_amplitudes() {
        let basis = Arc::new(weak_drive_basis(1).unwrap());
        let mut c = vec![C64::new(0.0, 0.0); 6];
        c[0] = C64::new(1.0, 0.0);
        c[basis.index_of(&[1, 0]).unwrap()] = C64::new(0.1, 0.0);
        c[basis.index_of(&[2, 0]).unwrap()] = C64::new(0.01 / 2f64.sqrt(), 0.0);
        let amps = AmplitudeVector {
            basis: basis.clone(),
            amplitudes: c.clone(),
        };
        // 2·(1e-4/2) / (0.01 + 2·5e-5)²
        let expect = 1e-4 / (0.01f64 + 1e-4).powi(2);
        let r = g2_zero(&amps).unwrap();
        assert!((r.g2 - expect).abs() < 1e-12);
        assert!((r.g2 - 1.0).abs() < 0.02);
        assert!((g2_leading_order(&amps).unwrap() - 1.0).abs() < 1e-12);

        c[basis.index_of(&[2, 0]).unwrap()] = C64::new(0.0, 0.0);
        let amps = AmplitudeVector {
            basis: basis.clone(),
            amplitudes: c.clone(),
        };
        assert_eq!(g2_zero(&amps).unwrap().g2, 0.0);

        let mut vac = vec![C64::new(0.0, 0.0); 6];
        vac[0] = C64::new(1.0, 0.0);
        let amps = AmplitudeVector {
            basis,
            amplitudes: vac,
        };
        assert!(matches!(g2_zero(&amps), Err(Error::Undefined(_))));
    }

    #[test]
    fn perturbative_ordering() {
        for &(d, g, k) in &[(0.5, 3.0, 0.01), (-0.7, 8.0, -0.004), (1.3, 1.0, 0.02)] {
            let a = steady_amplitudes(&SystemSpec::single(d, g, k, 0.1)).unwrap();
            let c10 = a.get(&[1, 0]).norm_sqr();
            assert!(c10 > a.get(&[1, 1]).norm_sqr());
            assert!(c10 > a.get(&[2, 0]).norm_sqr());
        }
    }

    #[test]
    fn coupling_sweep_shape() {
        let gs: Vec<f64> = (0..=200).map(|i| i as f64 * 0.1).collect();
        let pos = SystemSpec::single(DELTA_OPT, 0.0, K, 0.1);
        let up = g2_spectrum(&pos, SweepParam::G, &gs).unwrap();
        let vals: Vec<f64> = up.iter().map(|r| r.g2).collect();
        // uncoupled: coherent light up to O(Ω²/|Δ′|²)
        assert!((vals[0] - 1.0).abs() < 0.05);
        let (imin, vmin) =
            vals.iter().enumerate().fold(
                (0, f64::INFINITY),
                |acc, (i, &v)| if v < acc.1 { (i, v) } else { acc },
            );
        assert!((gs[imin] - G_OPT).abs() <= 0.1);
        assert!(vmin < 1e-4);
        // a percent-level wiggle below g ≈ 1 (Rabi splitting opens), then a clean descent
        assert!(vals[..imin].iter().all(|&v| v < 1.0));
        assert!(vals[20..imin].windows(2).all(|w| w[1] <= w[0] + 1e-12));
        assert!(vals[imin..].windows(2).all(|w| w[1] >= w[0] - 1e-12));

        let neg = SystemSpec::single(DELTA_OPT, 0.0, -K, 0.1);
        let down: Vec<f64> = g2_spectrum(&neg, SweepParam::G, &gs)
            .unwrap()
            .iter()
            .map(|r| r.g2)
            .collect();
        assert!(down[10..].windows(2).all(|w| w[1] >= w[0] - 1e-12));
        assert!(down[15..].iter().all(|&v| v > 1.0));
    }

    #[test]
    fn linear_cavity_is_coherent() {
        let deltas: Vec<f64> = (0..=40).map(|i| -1.0 + 0.05 * i as f64).collect();
        for omega in [0.1, 0.05] {
            let spec = SystemSpec::single(0.0, 9.88, 0.0, omega);
            for r in g2_spectrum(&spec, SweepParam::Delta, &deltas).unwrap() {
                assert!((r.g2 - 1.0).abs() < 20.0 * omega * omega, "{}", r.g2);
            }
        }
    }

    #[test]
    fn spectrum_rejects_missing_sphere() {
        let spec = SystemSpec::single(0.0, 1.0, K, 0.1);
        assert!(g2_spectrum(&spec, SweepParam::K2, &[0.1]).is_err());
    }
}
