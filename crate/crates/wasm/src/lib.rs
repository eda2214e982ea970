//! Browser bindings: weak-drive g2 and contrast curves, and the closed-form
//! optimum. Everything is in units of Γ.

use magnon_blockade::nonreciprocity::{self, Axis, Observable, Solver};
use magnon_blockade::optimal::{self, Branch};
use magnon_blockade::{SweepParam, SystemSpec};
use wasm_bindgen::prelude::*;

fn param(name: &str) -> Result<SweepParam, String> {
    SweepParam::ALL
        .into_iter()
        .find(|p| p.name() == name)
        .ok_or_else(|| format!("unknown parameter `{name}`"))
}

fn spec(delta: f64, g: f64, k: f64, omega: f64, two_spheres: bool) -> SystemSpec {
    if two_spheres {
        SystemSpec::double(delta, [g; 2], [k, -k], omega)
    } else {
        SystemSpec::single(delta, g, k, omega)
    }
}

/// Curve of `observable` against `axis` from `lo` to `hi`. For g2 the
/// result is the K>0 (K₊₋) curve followed by the K<0 (K₋₊) curve, each of
/// length `n`; for contrast it is a single curve. Failed points are NaN.
#[allow(clippy::too_many_arguments)]
pub fn curve(
    observable: &str,
    axis: &str,
    lo: f64,
    hi: f64,
    n: usize,
    delta: f64,
    g: f64,
    k: f64,
    omega: f64,
    two_spheres: bool,
) -> Result<Vec<f64>, String> {
    if !(2..=5000).contains(&n) {
        return Err("points must be between 2 and 5000".into());
    }
    let axes = [Axis::linspace(param(axis)?, lo, hi, n)];
    let k = k.abs();
    let run = |k: f64, obs| {
        nonreciprocity::sweep(
            &spec(delta, g, k, omega, two_spheres),
            &axes,
            obs,
            Solver::WeakDrive,
        )
        .map(|r| r.values)
        .map_err(|e| e.to_string())
    };
    match observable {
        "g2" => {
            let mut out = run(k, Observable::G2)?;
            out.extend(run(-k, Observable::G2)?);
            Ok(out)
        }
        "contrast" => run(k, Observable::Contrast),
        other => Err(format!("unknown observable `{other}`")),
    }
}

/// `2n` values: the K>0 curve, then the K<0 curve. See [`curve`].
#[wasm_bindgen]
#[allow(clippy::too_many_arguments)]
pub fn g2_curve(
    axis: &str,
    lo: f64,
    hi: f64,
    n: usize,
    delta: f64,
    g: f64,
    k: f64,
    omega: f64,
    two_spheres: bool,
) -> Result<Vec<f64>, JsError> {
    curve("g2", axis, lo, hi, n, delta, g, k, omega, two_spheres).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
#[allow(clippy::too_many_arguments)]
pub fn contrast_curve(
    axis: &str,
    lo: f64,
    hi: f64,
    n: usize,
    delta: f64,
    g: f64,
    k: f64,
    omega: f64,
    two_spheres: bool,
) -> Result<Vec<f64>, JsError> {
    curve("contrast", axis, lo, hi, n, delta, g, k, omega, two_spheres).map_err(|e| JsError::new(&e))
}

/// `[delta_opt, g_opt, g2 there]` for one sphere, on the branch selected by
/// the sign of `k`.
pub fn optimum_values(k: f64, omega: f64) -> Result<[f64; 3], String> {
    if k == 0.0 || !k.is_finite() || !omega.is_finite() {
        return Err("need a finite, nonzero Kerr coefficient".into());
    }
    let d = optimal::delta_opt(k, omega, 1.0, Branch::for_kerr(k));
    let g = optimal::g_opt(d, k, 1.0).map_err(|e| e.to_string())?;
    let g2 =
        magnon_blockade::weakdrive::g2(&SystemSpec::single(d, g, k, omega)).map_err(|e| e.to_string())?;
    Ok([d, g, g2])
}

#[wasm_bindgen]
pub fn optimum(k: f64, omega: f64) -> Result<Vec<f64>, JsError> {
    optimum_values(k, omega)
        .map(Vec::from)
        .map_err(|e| JsError::new(&e))
}
