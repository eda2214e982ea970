//! Contrast ratios between Kerr-sign configurations, the parameter-sweep
//! engine and g²(0) = 1 contours.

#[cfg(not(all(target_arch = "wasm32", target_os = "unknown")))]
use std::time::{SystemTime, UNIX_EPOCH};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::contour::{self, Monotonicity, Polyline};
use crate::error::{Error, Result};
use crate::lindblad;
use crate::model::{SweepParam, SystemSpec};
use crate::optimal::linspace;
use crate::weakdrive;

/// Which steady-state engine evaluates g²(0).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum Solver {
    WeakDrive,
    Lindblad { cutoff: usize },
}

impl Solver {
    /// Lindblad at the default cutoff for the system size.
    pub fn lindblad_default(spec: &SystemSpec) -> Self {
        Solver::Lindblad {
            cutoff: lindblad::default_cutoff(spec.magnons.len()),
        }
    }

    pub fn g2(&self, spec: &SystemSpec) -> Result<f64> {
        match *self {
            Solver::WeakDrive => weakdrive::g2(spec),
            Solver::Lindblad { cutoff } => lindblad::g2(spec, cutoff),
        }
    }

    pub fn name(&self) -> String {
        match self {
            Solver::WeakDrive => "weakdrive".into(),
            Solver::Lindblad { cutoff } => format!("lindblad(cutoff={cutoff})"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ContrastResult {
    /// g²(0) for K > 0 (one sphere) or the K₊₋ pattern (two spheres).
    pub g2_forward: f64,
    /// g²(0) for K < 0 or the K₋₊ pattern.
    pub g2_backward: f64,
    pub contrast: f64,
    /// Both values were exactly zero; the contrast is then defined as 0.
    pub both_zero: bool,
}

impl ContrastResult {
    pub fn from_pair(g2_forward: f64, g2_backward: f64) -> Self {
        let sum = g2_forward + g2_backward;
        let both_zero = sum == 0.0;
        let contrast = if both_zero {
            0.0
        } else {
            ((g2_forward - g2_backward).abs() / sum).min(1.0)
        };
        Self {
            g2_forward,
            g2_backward,
            contrast,
            both_zero,
        }
    }
}

/// The (K > 0, K < 0) pair of a single-sphere system.
pub fn single_pair(spec: &SystemSpec) -> Result<(SystemSpec, SystemSpec)> {
    let [m] = spec.magnons.as_slice() else {
        return Err(Error::InvalidParameter {
            name: "magnons",
            reason: "single-sphere contrast needs exactly one magnon".into(),
        });
    };
    if m.kerr == 0.0 {
        return Err(Error::ZeroKerr("contrast needs a Kerr direction"));
    }
    let k = m.kerr.abs();
    Ok((spec.clone().with_kerrs(&[k]), spec.clone().with_kerrs(&[-k])))
}

/// The (K₊₋, K₋₊) pair of a two-sphere system: K₁ = ±|K₁|, K₂ = ∓|K₂|.
pub fn double_pair(spec: &SystemSpec) -> Result<(SystemSpec, SystemSpec)> {
    let [a, b] = spec.magnons.as_slice() else {
        return Err(Error::InvalidParameter {
            name: "magnons",
            reason: "two-sphere contrast needs exactly two magnons".into(),
        });
    };
    if a.kerr == 0.0 || b.kerr == 0.0 {
        return Err(Error::ZeroKerr("contrast needs both Kerr directions"));
    }
    let (k1, k2) = (a.kerr.abs(), b.kerr.abs());
    Ok((
        spec.clone().with_kerrs(&[k1, -k2]),
        spec.clone().with_kerrs(&[-k1, k2]),
    ))
}

/// C = |g²₊ − g²₋|/(g²₊ + g²₋) for one sphere, weak-drive solver.
pub fn contrast_single(spec: &SystemSpec) -> Result<ContrastResult> {
    contrast_single_with(spec, Solver::WeakDrive)
}

pub fn contrast_single_with(spec: &SystemSpec, solver: Solver) -> Result<ContrastResult> {
    let (f, b) = single_pair(spec)?;
    Ok(ContrastResult::from_pair(solver.g2(&f)?, solver.g2(&b)?))
}

/// 𝒞 = |G²₊₋ − G²₋₊|/(G²₊₋ + G²₋₊) for two spheres, weak-drive solver.
pub fn contrast_double(spec: &SystemSpec) -> Result<ContrastResult> {
    contrast_double_with(spec, Solver::WeakDrive)
}

pub fn contrast_double_with(spec: &SystemSpec, solver: Solver) -> Result<ContrastResult> {
    let (f, b) = double_pair(spec)?;
    Ok(ContrastResult::from_pair(solver.g2(&f)?, solver.g2(&b)?))
}

/// Contrast for either system size.
pub fn contrast_with(spec: &SystemSpec, solver: Solver) -> Result<ContrastResult> {
    match spec.magnons.len() {
        1 => contrast_single_with(spec, solver),
        _ => contrast_double_with(spec, solver),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Observable {
    /// g²(0) of the template as given.
    G2,
    /// Contrast between the two Kerr-sign configurations.
    Contrast,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Axis {
    pub param: SweepParam,
    pub values: Vec<f64>,
}

impl Axis {
    pub fn new(param: SweepParam, values: Vec<f64>) -> Self {
        Self { param, values }
    }

    pub fn linspace(param: SweepParam, lo: f64, hi: f64, n: usize) -> Self {
        Self::new(param, linspace(lo, hi, n))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepMetadata {
    pub template: SystemSpec,
    pub solver: Solver,
    pub observable: Observable,
    /// Seconds since the Unix epoch when the sweep finished.
    pub created_unix: u64,
}

/// A failed grid cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellFailure {
    pub index: usize,
    pub reason: String,
}

/// Values are stored row-major: with two axes, cell (i, j) is at
/// `i * axes[1].len() + j`. Failed cells hold NaN and are listed in
/// `failures`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub axes: Vec<Axis>,
    /// g²(0) or contrast per cell.
    pub values: Vec<f64>,
    /// For contrast sweeps: forward and backward g²(0) per cell.
    pub branches: Option<(Vec<f64>, Vec<f64>)>,
    pub failures: Vec<CellFailure>,
    pub metadata: SweepMetadata,
}

impl SweepResult {
    pub fn shape(&self) -> Vec<usize> {
        self.axes.iter().map(|a| a.values.len()).collect()
    }

    /// Axis coordinates of a flat cell index.
    pub fn coords(&self, index: usize) -> Vec<f64> {
        coords(&self.axes, index)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Index and value of the smallest finite cell.
    pub fn argmin(&self) -> Option<(usize, f64)> {
        self.values
            .iter()
            .copied()
            .enumerate()
            .filter(|(_, v)| v.is_finite())
            .min_by(|a, b| a.1.total_cmp(&b.1))
    }
}

// no clock on bare wasm32
#[cfg(not(all(target_arch = "wasm32", target_os = "unknown")))]
fn now_unix() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map_or(0, |d| d.as_secs())
}

#[cfg(all(target_arch = "wasm32", target_os = "unknown"))]
fn now_unix() -> u64 {
    0
}

fn coords(axes: &[Axis], index: usize) -> Vec<f64> {
    let mut rem = index;
    let mut out = vec![0.0; axes.len()];
    for a in (0..axes.len()).rev() {
        let n = axes[a].values.len();
        out[a] = axes[a].values[rem % n];
        rem /= n;
    }
    out
}

/// Evaluates `observable` on the product grid of 1 or 2 axes, in parallel,
/// with deterministic row-major output.
pub fn sweep(
    template: &SystemSpec,
    axes: &[Axis],
    observable: Observable,
    solver: Solver,
) -> Result<SweepResult> {
    template.validate()?;
    if axes.is_empty() || axes.len() > 2 {
        return Err(Error::InvalidSweep(format!(
            "need 1 or 2 axes, got {}",
            axes.len()
        )));
    }
    for a in axes {
        if a.values.len() < 2 {
            return Err(Error::InvalidSweep(format!(
                "axis `{}` needs at least 2 points, got {}",
                a.param,
                a.values.len()
            )));
        }
        if a.values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidSweep(format!(
                "axis `{}` has non-finite values",
                a.param
            )));
        }
    }
    if axes.len() == 2 && axes[0].param == axes[1].param {
        return Err(Error::InvalidSweep(format!(
            "axis `{}` given twice",
            axes[0].param
        )));
    }
    let total: usize = axes.iter().map(|a| a.values.len()).product();

    let cells: Vec<std::result::Result<(f64, f64, f64), String>> = (0..total)
        .into_par_iter()
        .map(|i| {
            let mut spec = template.clone();
            for (axis, v) in axes.iter().zip(coords(axes, i)) {
                spec = axis.param.apply(&spec, v).map_err(|e| e.to_string())?;
            }
            match observable {
                Observable::G2 => solver
                    .g2(&spec)
                    .map(|g| (g, f64::NAN, f64::NAN))
                    .map_err(|e| e.to_string()),
                Observable::Contrast => contrast_with(&spec, solver)
                    .map(|c| (c.contrast, c.g2_forward, c.g2_backward))
                    .map_err(|e| e.to_string()),
            }
        })
        .collect();

    let mut values = Vec::with_capacity(total);
    let mut fwd = Vec::new();
    let mut bwd = Vec::new();
    let mut failures = Vec::new();
    for (index, cell) in cells.into_iter().enumerate() {
        let (v, f, b) = cell.unwrap_or_else(|reason| {
            failures.push(CellFailure { index, reason });
            (f64::NAN, f64::NAN, f64::NAN)
        });
        values.push(v);
        fwd.push(f);
        bwd.push(b);
    }
    let branches = (observable == Observable::Contrast).then_some((fwd, bwd));
    Ok(SweepResult {
        axes: axes.to_vec(),
        values,
        branches,
        failures,
        metadata: SweepMetadata {
            template: template.clone(),
            solver,
            observable,
            created_unix: now_unix(),
        },
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContourResult {
    pub level: f64,
    /// Polylines in axis coordinates (x = first axis, y = second).
    pub polylines: Vec<Polyline>,
    pub monotonicity: Vec<Monotonicity>,
}

impl ContourResult {
    pub fn is_crossed(&self) -> bool {
        !self.polylines.is_empty()
    }
}

/// The g²(0) = 1 level set of a 2-D g² sweep.
pub fn unity_contour(sweep: &SweepResult) -> Result<ContourResult> {
    level_contour(sweep, 1.0)
}

/// Level set of a 2-D g² sweep. A level that is never crossed yields an
/// empty polyline list rather than an error.
pub fn level_contour(sweep: &SweepResult, level: f64) -> Result<ContourResult> {
    if sweep.axes.len() != 2 {
        return Err(Error::InvalidSweep("contour needs a 2-D sweep".into()));
    }
    if sweep.metadata.observable != Observable::G2 {
        return Err(Error::InvalidSweep("contour needs a g2 sweep".into()));
    }
    let polylines =
        contour::marching_squares(&sweep.axes[0].values, &sweep.axes[1].values, &sweep.values, level);
    let monotonicity = polylines.iter().map(Polyline::monotonicity).collect();
    Ok(ContourResult {
        level,
        polylines,
        monotonicity,
    })
}

/// Parameter values in [lo, hi] where `f` crosses `level`, located by an
/// `n_scan`-point scan followed by bisection. Points where `f` fails are
/// skipped.
pub fn level_crossings<F>(f: F, lo: f64, hi: f64, n_scan: usize, level: f64) -> Vec<f64>
where
    F: Fn(f64) -> Result<f64> + Sync,
{
    let xs = linspace(lo, hi, n_scan.max(2));
    let ys: Vec<Option<f64>> = xs
        .par_iter()
        .map(|&x| f(x).ok().filter(|y| y.is_finite()))
        .collect();
    let mut out = Vec::new();
    for i in 0..xs.len() - 1 {
        let (Some(ya), Some(yb)) = (ys[i], ys[i + 1]) else {
            continue;
        };
        if (ya - level) * (yb - level) > 0.0 || ya == yb {
            continue;
        }
        // a grid point on the level belongs to the interval it starts
        if yb == level && i + 2 < xs.len() {
            continue;
        }
        if ya == level {
            out.push(xs[i]);
            continue;
        }
        let (mut a, mut b, mut fa) = (xs[i], xs[i + 1], ya - level);
        for _ in 0..60 {
            let m = 0.5 * (a + b);
            let Some(fm) = f(m).ok().map(|y| y - level) else {
                break;
            };
            if fm == 0.0 {
                a = m;
                b = m;
                break;
            }
            if fa * fm < 0.0 {
                b = m;
            } else {
                a = m;
                fa = fm;
            }
            if (b - a).abs() < 1e-12 * (1.0 + a.abs()) {
                break;
            }
        }
        out.push(0.5 * (a + b));
    }
    out
}

/// Ω at which g²(0) first rises through 1, scanning [lo, hi]. Downward
/// crossings are ignored.
pub fn drive_threshold(
    template: &SystemSpec,
    solver: Solver,
    lo: f64,
    hi: f64,
    n_scan: usize,
) -> Option<f64> {
    let f = |om: f64| solver.g2(&template.clone().with_drive(om));
    let step = (hi - lo) / n_scan.max(2) as f64;
    level_crossings(f, lo, hi, n_scan, 1.0)
        .into_iter()
        .find(|&om| matches!(f(om + 1e-3 * step), Ok(v) if v > 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::optimal::closed_form_optimum;

    const K: f64 = 4e-3;

    #[test]
    fn contrast_conventions() {
        assert_eq!(ContrastResult::from_pair(0.0, 0.0).contrast, 0.0);
        assert!(ContrastResult::from_pair(0.0, 0.0).both_zero);
        assert_eq!(ContrastResult::from_pair(0.0, 3.0).contrast, 1.0);
        assert_eq!(ContrastResult::from_pair(2.0, 2.0).contrast, 0.0);
    }

    #[test]
    fn ideal_nonreciprocity_at_optimum() {
        let p = closed_form_optimum(K, 0.1, 1.0).unwrap();
        let c = contrast_single(&SystemSpec::single(p.delta, p.g, K, 0.1)).unwrap();
        assert!(c.contrast > 0.999, "{c:?}");
    }

    #[test]
    fn decoupled_sphere_is_reciprocal() {
        let c = contrast_single(&SystemSpec::single(0.4, 0.0, K, 0.1)).unwrap();
        assert_eq!(c.contrast, 0.0);
    }

    #[test]
    fn zero_kerr_rejected() {
        assert!(matches!(
            contrast_single(&SystemSpec::single(0.4, 1.0, 0.0, 0.1)),
            Err(Error::ZeroKerr(_))
        ));
        assert!(contrast_double(&SystemSpec::double(0.4, [1.0, 1.0], [K, 0.0], 0.1)).is_err());
    }

    #[test]
    fn sweep_shape_and_determinism() {
        let t = SystemSpec::single(0.0, 9.88, K, 0.1);
        let axes = [
            Axis::linspace(SweepParam::G, 0.0, 20.0, 7),
            Axis::linspace(SweepParam::Delta, -1.0, 1.0, 5),
        ];
        let a = sweep(&t, &axes, Observable::G2, Solver::WeakDrive).unwrap();
        let b = sweep(&t, &axes, Observable::G2, Solver::WeakDrive).unwrap();
        assert_eq!(a.len(), 35);
        assert_eq!(a.coords(6), vec![axes[0].values[1], axes[1].values[1]]);
        let bits = |r: &SweepResult| r.values.iter().map(|v| v.to_bits()).collect::<Vec<_>>();
        assert_eq!(bits(&a), bits(&b));
        let one = [Axis::new(SweepParam::G, vec![1.0])];
        assert!(matches!(
            sweep(&t, &one, Observable::G2, Solver::WeakDrive),
            Err(Error::InvalidSweep(_))
        ));
    }

    #[test]
    fn failed_cells_are_recorded() {
        // Ω = 0 has no weak-drive solution
        let t = SystemSpec::single(0.0, 9.88, K, 0.1);
        let axes = [Axis::new(SweepParam::Omega, vec![0.0, 0.1])];
        let r = sweep(&t, &axes, Observable::G2, Solver::WeakDrive).unwrap();
        assert_eq!(r.failures.len(), 1);
        assert_eq!(r.failures[0].index, 0);
        assert!(r.values[0].is_nan() && r.values[1].is_finite());
    }

    #[test]
    fn crossings_of_a_line() {
        let xs = level_crossings(|x| Ok(2.0 * x), 0.0, 1.0, 11, 1.0);
        assert_eq!(xs.len(), 1);
        assert!((xs[0] - 0.5).abs() < 1e-10);
    }
}
