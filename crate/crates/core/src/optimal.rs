//! Perfect-blockade conditions and numeric optimum searches.
//!
//! For one sphere with Δ_c = Δ_m = Δ and κ_c = κ_m = Γ the two-photon
//! amplitude vanishes when
//!
//! ```text
//! 12Δ² + 28ΔK + 14K² = 2Ω² + Γ²,   g² = (4Δ + 3K)/K · ((Δ + 2K)² + Γ²/4).
//! ```
//!
//! The general complex condition is [`blockade_residual`]; the numeric search
//! covers the two-sphere case, which has no closed form.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{SweepParam, SystemSpec, C64};
use crate::weakdrive;

/// Which root of the detuning quadratic.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Branch {
    /// `+` root, the feasible one for K > 0.
    Plus,
    /// `−` root, the feasible one for K < 0.
    Minus,
}

impl Branch {
    /// The feasible branch for a Kerr coefficient of this sign.
    pub fn for_kerr(k: f64) -> Self {
        if k < 0.0 {
            Branch::Minus
        } else {
            Branch::Plus
        }
    }

    pub fn sign(self) -> f64 {
        match self {
            Branch::Plus => 1.0,
            Branch::Minus => -1.0,
        }
    }
}

/// Δ_opt = (−7K ± √(7K² + 6Ω² + 3Γ²))/6.
pub fn delta_opt(k: f64, omega: f64, gamma: f64, branch: Branch) -> f64 {
    (-7.0 * k + branch.sign() * (7.0 * k * k + 6.0 * omega * omega + 3.0 * gamma * gamma).sqrt()) / 6.0
}

/// The K, Ω → 0 limit ±(√3/6)Γ.
pub fn delta_opt_approx(gamma: f64, branch: Branch) -> f64 {
    branch.sign() * 3f64.sqrt() / 6.0 * gamma
}

/// The feasibility product (4Δ + 3K)·K; blockade is possible iff it is > 0.
pub fn feasibility(delta: f64, k: f64) -> f64 {
    (4.0 * delta + 3.0 * k) * k
}

/// g_opt = √((4Δ + 3K)/K · ((Δ + 2K)² + Γ²/4)).
pub fn g_opt(delta: f64, k: f64, gamma: f64) -> Result<f64> {
    if k == 0.0 {
        return Err(Error::ZeroKerr("g_opt diverges"));
    }
    let value = feasibility(delta, k);
    if !(value > 0.0) {
        return Err(Error::Infeasible { value });
    }
    let d = delta + 2.0 * k;
    Ok(((4.0 * delta + 3.0 * k) / k * (d * d + 0.25 * gamma * gamma)).sqrt())
}

/// g²K/(Δ_m′ + 2K) + (Δ_c′ + Δ_m′ + K)(Δ_m′ + K) − Ω² with the complex
/// detunings Δ′ = Δ − iκ/2. Vanishes exactly where the two-photon amplitude
/// of the weak-drive hierarchy does.
pub fn blockade_residual(spec: &SystemSpec) -> Result<C64> {
    let (dc, dm, k, g) = single_primed(spec)?;
    let pole = dm + 2.0 * k;
    if pole.norm() < 1e-300 {
        return Err(Error::ResidualPole);
    }
    Ok(g * g * k / pole + (dc + dm + k) * (dm + k) - spec.drive * spec.drive)
}

fn single_primed(spec: &SystemSpec) -> Result<(C64, C64, f64, f64)> {
    spec.validate()?;
    let [m] = spec.magnons.as_slice() else {
        return Err(Error::InvalidParameter {
            name: "magnons",
            reason: "blockade residual is defined for one sphere".into(),
        });
    };
    let dc = C64::new(spec.cavity_detuning, -0.5 * spec.cavity_decay);
    let dm = C64::new(m.detuning, -0.5 * m.decay);
    Ok((dc, dm, m.kerr, m.coupling))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResidualRoot {
    /// Coupling minimizing |residual| over real g ≥ 0.
    pub g: f64,
    /// |residual| there; zero (to rounding) only on the blockade locus.
    pub residual: f64,
}

/// Minimizes |blockade residual| over g with everything else fixed.
///
/// Writing the residual as (g²K + Q·D)/D with D = Δ_m′ + 2K, the modulus is
/// smallest at g² = −Re(Q·D)/K. This is a genuine root only when the
/// imaginary part also vanishes, i.e. on the detuning locus above.
pub fn residual_root_g(spec: &SystemSpec) -> Result<ResidualRoot> {
    let (dc, dm, k, _) = single_primed(spec)?;
    if k == 0.0 {
        return Err(Error::ZeroKerr("residual is independent of g"));
    }
    let d = dm + 2.0 * k;
    let q = (dc + dm + k) * (dm + k) - spec.drive * spec.drive;
    let g_sq = -(q * d).re / k;
    if !(g_sq > 0.0) {
        return Err(Error::Undefined(format!(
            "residual minimizer needs g² = {g_sq:.6e} > 0"
        )));
    }
    let g = g_sq.sqrt();
    let mut at = spec.clone();
    at.magnons[0].coupling = g;
    Ok(ResidualRoot {
        g,
        residual: blockade_residual(&at)?.norm(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimalPoint {
    pub delta: f64,
    pub g: f64,
    pub branch: Branch,
    /// Blockade residual at the point (re, im).
    pub residual: (f64, f64),
}

/// Closed-form optimum for one sphere with Δ_c = Δ_m and κ_c = κ_m = Γ.
pub fn closed_form_optimum(k: f64, omega: f64, gamma: f64) -> Result<OptimalPoint> {
    let branch = Branch::for_kerr(k);
    let delta = delta_opt(k, omega, gamma, branch);
    let g = g_opt(delta, k, gamma)?;
    let mut spec = SystemSpec::single(delta, g, k, omega);
    spec.cavity_decay = gamma;
    spec.magnons[0].decay = gamma;
    let r = blockade_residual(&spec)?;
    Ok(OptimalPoint {
        delta,
        g,
        branch,
        residual: (r.re, r.im),
    })
}

/// One free coordinate of a numeric search.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FreeParam {
    pub param: SweepParam,
    pub lo: f64,
    pub hi: f64,
}

impl FreeParam {
    pub fn new(param: SweepParam, lo: f64, hi: f64) -> Self {
        Self { param, lo, hi }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SearchOptions {
    /// Seed-grid points per axis.
    pub grid_points: usize,
    /// Coordinate tolerance of the refinement.
    pub tol: f64,
    /// Grid minima within this factor of the best are all refined.
    pub candidate_ratio: f64,
}

impl Default for SearchOptions {
    fn default() -> Self {
        Self {
            grid_points: 200,
            tol: 1e-9,
            candidate_ratio: 2.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Candidate {
    pub point: Vec<f64>,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NumericOptimum {
    pub params: Vec<SweepParam>,
    /// Best refined point, one coordinate per free parameter.
    pub argmin: Vec<f64>,
    pub min_value: f64,
    /// Every refined grid minimum within the candidate ratio, best first.
    pub candidates: Vec<Candidate>,
    pub grid_evaluations: usize,
    /// Grid cells where the objective was undefined.
    pub grid_failures: usize,
}

impl NumericOptimum {
    /// Coordinate of `param`, if it was free.
    pub fn get(&self, param: SweepParam) -> Option<f64> {
        self.params
            .iter()
            .position(|p| *p == param)
            .map(|i| self.argmin[i])
    }
}

/// Minimizes weak-drive g²(0) over one or two free parameters of `template`.
pub fn find_optimum_numeric(
    template: &SystemSpec,
    free: &[FreeParam],
    opts: SearchOptions,
) -> Result<NumericOptimum> {
    template.validate()?;
    let objective = |x: &[f64]| -> f64 {
        let mut spec = template.clone();
        for (fp, &v) in free.iter().zip(x) {
            spec = match fp.param.apply(&spec, v) {
                Ok(s) => s,
                Err(_) => return f64::NAN,
            };
        }
        weakdrive::g2(&spec).unwrap_or(f64::NAN)
    };
    minimize(objective, free, opts)
}

/// Grid-seeded coordinate-descent minimization of an arbitrary objective.
/// Non-finite objective values count as undefined points.
pub fn minimize<F>(f: F, free: &[FreeParam], opts: SearchOptions) -> Result<NumericOptimum>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    if free.is_empty() || free.len() > 2 {
        return Err(Error::Optimizer(format!(
            "need 1 or 2 free parameters, got {}",
            free.len()
        )));
    }
    for fp in free {
        if !(fp.lo < fp.hi) || !fp.lo.is_finite() || !fp.hi.is_finite() {
            return Err(Error::Optimizer(format!(
                "bounds for `{}` must satisfy lo < hi, got [{}, {}]",
                fp.param, fp.lo, fp.hi
            )));
        }
    }
    let n = opts.grid_points.max(3);
    let axes: Vec<Vec<f64>> = free.iter().map(|fp| linspace(fp.lo, fp.hi, n)).collect();
    let shape: Vec<usize> = axes.iter().map(Vec::len).collect();
    let total: usize = shape.iter().product();

    let point = |flat: usize| -> Vec<f64> {
        let mut rem = flat;
        let mut p = vec![0.0; axes.len()];
        for a in (0..axes.len()).rev() {
            p[a] = axes[a][rem % shape[a]];
            rem /= shape[a];
        }
        p
    };
    let values: Vec<f64> = (0..total)
        .into_par_iter()
        .map(|i| {
            let v = f(&point(i));
            if v.is_finite() {
                v
            } else {
                f64::NAN
            }
        })
        .collect();
    let failures = values.iter().filter(|v| v.is_nan()).count();
    let best = values
        .iter()
        .copied()
        .filter(|v| !v.is_nan())
        .fold(f64::INFINITY, f64::min);
    if !best.is_finite() {
        return Err(Error::Optimizer("objective undefined on the whole grid".into()));
    }

    // local minima of the grid within the candidate ratio of the best
    let threshold = best * opts.candidate_ratio;
    let neighbours = |flat: usize| -> Vec<usize> {
        let mut idx = vec![0usize; shape.len()];
        let mut rem = flat;
        for a in (0..shape.len()).rev() {
            idx[a] = rem % shape[a];
            rem /= shape[a];
        }
        let mut out = Vec::new();
        for a in 0..shape.len() {
            for step in [-1isize, 1] {
                let j = idx[a] as isize + step;
                if j < 0 || j as usize >= shape[a] {
                    continue;
                }
                let mut other = idx.clone();
                other[a] = j as usize;
                out.push(other.iter().zip(&shape).fold(0, |acc, (i, s)| acc * s + i));
            }
        }
        out
    };
    let seeds: Vec<usize> = (0..total)
        .filter(|&i| {
            let v = values[i];
            !v.is_nan()
                && v <= threshold
                && neighbours(i)
                    .iter()
                    .all(|&j| values[j].is_nan() || v <= values[j])
        })
        .collect();

    let steps: Vec<f64> = free.iter().map(|fp| (fp.hi - fp.lo) / (n - 1) as f64).collect();
    let mut candidates: Vec<Candidate> = seeds
        .par_iter()
        .map(|&s| refine(&f, point(s), values[s], free, &steps, opts.tol))
        .collect();
    candidates.sort_by(|a, b| a.value.total_cmp(&b.value));
    // collapse seeds that refined to the same point
    let mut unique: Vec<Candidate> = Vec::new();
    for c in candidates {
        let dup = unique.iter().any(|u| {
            u.point
                .iter()
                .zip(&c.point)
                .zip(&steps)
                .all(|((a, b), h)| (a - b).abs() <= 0.5 * h)
        });
        if !dup {
            unique.push(c);
        }
    }
    let top = unique[0].clone();
    Ok(NumericOptimum {
        params: free.iter().map(|fp| fp.param).collect(),
        argmin: top.point,
        min_value: top.value,
        candidates: unique,
        grid_evaluations: total,
        grid_failures: failures,
    })
}

/// Cyclic golden-section line searches within ±1 grid step of the seed,
/// clipped to the bounds, until no coordinate moves by more than `tol`.
fn refine<F>(f: &F, mut x: Vec<f64>, mut fx: f64, free: &[FreeParam], steps: &[f64], tol: f64) -> Candidate
where
    F: Fn(&[f64]) -> f64,
{
    let mut lo: Vec<f64> = x
        .iter()
        .zip(steps)
        .zip(free)
        .map(|((v, h), fp)| (v - h).max(fp.lo))
        .collect();
    let mut hi: Vec<f64> = x
        .iter()
        .zip(steps)
        .zip(free)
        .map(|((v, h), fp)| (v + h).min(fp.hi))
        .collect();
    for _ in 0..200 {
        let mut moved = 0.0f64;
        for a in 0..x.len() {
            let mut probe = x.clone();
            let (xa, va) = golden(
                |t| {
                    probe[a] = t;
                    let v = f(&probe);
                    if v.is_finite() {
                        v
                    } else {
                        f64::INFINITY
                    }
                },
                lo[a],
                hi[a],
                tol,
            );
            if va <= fx {
                moved = moved.max((xa - x[a]).abs());
                x[a] = xa;
                fx = va;
            }
        }
        if moved <= tol {
            break;
        }
        // re-centre the brackets for the next sweep (2-D valleys drift)
        for a in 0..x.len() {
            let h = steps[a];
            lo[a] = (x[a] - h).max(free[a].lo);
            hi[a] = (x[a] + h).min(free[a].hi);
        }
    }
    Candidate { point: x, value: fx }
}

/// Golden-section search on [a, b]; returns the best point seen.
pub fn golden<F: FnMut(f64) -> f64>(mut f: F, mut a: f64, mut b: f64, tol: f64) -> (f64, f64) {
    let r = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    let (mut best_x, mut best_f) = if fc <= fd { (c, fc) } else { (d, fd) };
    while (b - a).abs() > tol {
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = f(c);
            if fc < best_f {
                best_x = c;
                best_f = fc;
            }
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = f(d);
            if fd < best_f {
                best_x = d;
                best_f = fd;
            }
        }
    }
    for end in [a, b] {
        let fe = f(end);
        if fe < best_f {
            best_x = end;
            best_f = fe;
        }
    }
    (best_x, best_f)
}

/// `n` evenly spaced points from `lo` to `hi` inclusive.
pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..n)
            .map(|i| {
                if i == n - 1 {
                    hi
                } else {
                    lo + (hi - lo) * i as f64 / (n - 1) as f64
                }
            })
            .collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const K: f64 = 4e-3;

    #[test]
    fn closed_forms_at_reference_point() {
        let d = delta_opt(K, 0.1, 1.0, Branch::Plus);
        assert!((d - 0.28689).abs() < 1e-5);
        let g = g_opt(d, K, 1.0).unwrap();
        assert!((g - 9.883).abs() < 1e-3);
        assert!((delta_opt(0.0, 0.0, 1.0, Branch::Plus) - 3f64.sqrt() / 6.0).abs() < 1e-15);
    }

    #[test]
    fn quadratic_locus_holds() {
        for &(k, om) in &[(4e-3, 0.1), (-0.3, 0.7), (1.2, 0.0)] {
            for b in [Branch::Plus, Branch::Minus] {
                let d = delta_opt(k, om, 1.0, b);
                let lhs = 12.0 * d * d + 28.0 * d * k + 14.0 * k * k;
                let rhs = 2.0 * om * om + 1.0;
                assert!((lhs - rhs).abs() <= 1e-12 * rhs);
            }
        }
    }

    #[test]
    fn g_opt_errors() {
        assert!(matches!(g_opt(0.3, 0.0, 1.0), Err(Error::ZeroKerr(_))));
        assert!(matches!(g_opt(-0.3, K, 1.0), Err(Error::Infeasible { .. })));
        let edge = g_opt(-0.75 * K + 1e-12, K, 1.0).unwrap();
        assert!(edge < 1e-4);
    }

    #[test]
    fn residual_vanishes_at_closed_form_point() {
        let p = closed_form_optimum(K, 0.1, 1.0).unwrap();
        assert!(p.residual.0.hypot(p.residual.1) < 1e-9);
        let m = closed_form_optimum(-K, 0.1, 1.0).unwrap();
        assert!((m.delta + p.delta).abs() < 1e-15);
        assert!((m.g - p.g).abs() < 1e-12);
    }

    #[test]
    fn residual_root_recovers_g_opt() {
        let p = closed_form_optimum(K, 0.1, 1.0).unwrap();
        let spec = SystemSpec::single(p.delta, 1.0, K, 0.1);
        let root = residual_root_g(&spec).unwrap();
        assert!((root.g - p.g).abs() < 1e-9);
        assert!(root.residual < 1e-9);
    }

    #[test]
    fn golden_finds_parabola_minimum() {
        let (x, fx) = golden(|t| (t - 0.3).powi(2), -1.0, 2.0, 1e-10);
        assert!((x - 0.3).abs() < 1e-8);
        assert!(fx < 1e-15);
    }

    #[test]
    fn numeric_search_matches_closed_form() {
        let p = closed_form_optimum(K, 0.1, 1.0).unwrap();
        let template = SystemSpec::single(0.0, 5.0, K, 0.1);
        let opt = find_optimum_numeric(
            &template,
            &[
                FreeParam::new(SweepParam::G, 5.0, 15.0),
                FreeParam::new(SweepParam::Delta, 0.0, 1.0),
            ],
            SearchOptions {
                grid_points: 60,
                ..Default::default()
            },
        )
        .unwrap();
        assert!((opt.get(SweepParam::G).unwrap() - p.g).abs() < 1e-3, "{opt:?}");
        assert!((opt.get(SweepParam::Delta).unwrap() - p.delta).abs() < 1e-3);
    }

    #[test]
    fn search_rejects_bad_bounds() {
        let template = SystemSpec::single(0.0, 5.0, K, 0.1);
        let r = find_optimum_numeric(
            &template,
            &[FreeParam::new(SweepParam::G, 2.0, 1.0)],
            SearchOptions::default(),
        );
        assert!(matches!(r, Err(Error::Optimizer(_))));
    }
}
