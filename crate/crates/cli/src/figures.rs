//! Figure definitions. Parameters follow the reference figures; anything a
//! reference leaves open is listed in the figure's `assumptions`.

use magnon_blockade::contour::Polyline;
use magnon_blockade::lindblad::{self, BathSpec};
use magnon_blockade::nonreciprocity::{self, Axis, Observable, Solver};
use magnon_blockade::optimal::{self, Branch, FreeParam, SearchOptions};
use magnon_blockade::{SweepParam, SystemSpec};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

use crate::config::{RunConfig, SolverChoice};
use crate::CliError;

pub const NAMES: [&str; 14] = [
    "2a", "2b", "3a", "3b", "4a", "4b", "5a", "5b", "6a", "6b", "7a", "7b", "8a", "8b",
];

const K0: f64 = 4e-3;
const OMEGA0: f64 = 0.1;

#[derive(Debug, Clone, Serialize)]
pub struct Curve {
    pub label: String,
    pub values: Vec<f64>,
    /// Forward and backward g2 behind a contrast curve.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub branches: Option<(Vec<f64>, Vec<f64>)>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Overlay {
    pub label: String,
    pub points: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Plot {
    Lines {
        x_name: String,
        x: Vec<f64>,
        curves: Vec<Curve>,
    },
    /// `values[i * y.len() + j]` sits at `(x[i], y[j])`.
    Map {
        x_name: String,
        y_name: String,
        x: Vec<f64>,
        y: Vec<f64>,
        values: Vec<f64>,
        contours: Vec<Polyline>,
        overlays: Vec<Overlay>,
    },
}

#[derive(Debug, Clone, Serialize)]
pub struct Figure {
    pub name: String,
    pub title: String,
    /// Name of the plotted observable.
    pub observable: String,
    pub log_scale: bool,
    pub solvers: Vec<String>,
    pub plot: Plot,
    pub params: serde_json::Value,
    pub assumptions: Vec<String>,
    pub warnings: Vec<String>,
    pub diagnostics: Vec<String>,
}

struct Builder<'a> {
    cfg: &'a RunConfig,
}

fn optimum() -> (f64, f64) {
    let d = optimal::delta_opt(K0, OMEGA0, 1.0, Branch::Plus);
    (d, optimal::g_opt(d, K0, 1.0).expect("feasible"))
}

fn solver_label(s: &Solver) -> &'static str {
    match s {
        Solver::WeakDrive => "weak drive",
        Solver::Lindblad { .. } => "master equation",
    }
}

fn argmin_on(x: &[f64], v: &[f64]) -> Option<(f64, f64)> {
    x.iter()
        .zip(v)
        .filter(|(_, v)| v.is_finite())
        .min_by(|a, b| a.1.total_cmp(b.1))
        .map(|(x, v)| (*x, *v))
}

impl Builder<'_> {
    /// Curves for each (label, template) pair and every selected solver.
    fn lines(
        &self,
        param: SweepParam,
        x: &[f64],
        observable: Observable,
        series: &[(&str, SystemSpec)],
    ) -> Result<(Vec<Curve>, Vec<String>), CliError> {
        let mut curves = Vec::new();
        let mut names = Vec::new();
        for (label, spec) in series {
            let solvers = self.cfg.solvers(spec);
            for solver in &solvers {
                let r = nonreciprocity::sweep(spec, &[Axis::new(param, x.to_vec())], observable, *solver)?;
                let label = if solvers.len() > 1 {
                    format!("{label} ({})", solver_label(solver))
                } else {
                    label.to_string()
                };
                curves.push(Curve {
                    label,
                    values: r.values,
                    branches: r.branches,
                });
                let n = solver.name();
                if !names.contains(&n) {
                    names.push(n);
                }
            }
        }
        Ok((curves, names))
    }

    /// One solver for maps: the master equation only when asked for alone.
    fn map_solver(&self, spec: &SystemSpec) -> Solver {
        match self.cfg.solver {
            SolverChoice::Lindblad => self.cfg.lindblad(spec),
            _ => Solver::WeakDrive,
        }
    }

    fn build(&self, name: &str) -> Result<Figure, CliError> {
        match name {
            "2a" => self.fig2a(),
            "2b" => self.fig2b(),
            "3a" => self.fig3(false),
            "3b" => self.fig3(true),
            "4a" => self.fig4a(),
            "4b" => self.fig4b(),
            "5a" => self.fig5a(),
            "5b" => self.fig5b(),
            "6a" => self.fig6a(),
            "6b" => self.fig6b(),
            "7a" => self.fig7a(),
            "7b" => self.fig7b(),
            "8a" => self.fig8a(),
            "8b" => self.fig8b(),
            other => Err(CliError::Usage(format!(
                "unknown figure `{other}`; expected one of {}",
                NAMES.join(", ")
            ))),
        }
    }

    fn fig2a(&self) -> Result<Figure, CliError> {
        let (d, g) = optimum();
        let x = optimal::linspace(-1.0, 1.0, 201);
        let series = [
            ("K>0", SystemSpec::single(0.0, g, K0, OMEGA0)),
            ("K<0", SystemSpec::single(0.0, g, -K0, OMEGA0)),
        ];
        let (curves, solvers) = self.lines(SweepParam::Delta, &x, Observable::G2, &series)?;
        let mut diagnostics = Vec::new();
        for (label, spec) in &series {
            let r = optimal::find_optimum_numeric(
                spec,
                &[FreeParam::new(SweepParam::Delta, -1.0, 1.0)],
                SearchOptions::default(),
            )?;
            diagnostics.push(format!(
                "{label}: weak-drive minimum g2 = {:.3e} at delta = {:+.4} (closed form {:+.4})",
                r.min_value,
                r.argmin[0],
                if spec.magnons[0].kerr > 0.0 { d } else { -d }
            ));
        }
        Ok(Figure {
            name: "2a".into(),
            title: "g2(0) vs detuning at g = g_opt".into(),
            observable: "g2".into(),
            log_scale: true,
            solvers,
            plot: Plot::Lines {
                x_name: "delta_over_gamma".into(),
                x,
                curves,
            },
            params: json!({"g_over_gamma": g, "abs_kerr_over_gamma": K0, "drive_over_gamma": OMEGA0}),
            assumptions: vec![],
            warnings: vec![],
            diagnostics,
        })
    }

    fn fig2b(&self) -> Result<Figure, CliError> {
        let (d, g) = optimum();
        let x = optimal::linspace(0.0, 20.0, 201);
        let series = [
            ("K>0", SystemSpec::single(d, 1.0, K0, OMEGA0)),
            ("K<0", SystemSpec::single(d, 1.0, -K0, OMEGA0)),
        ];
        let (curves, solvers) = self.lines(SweepParam::G, &x, Observable::G2, &series)?;
        let mut diagnostics = vec![format!("closed-form g_opt = {g:.4}")];
        if let Some((xm, vm)) = argmin_on(&x, &curves[0].values) {
            diagnostics.push(format!("K>0 grid minimum g2 = {vm:.3e} at g = {xm:.2}"));
        }
        diagnostics.push(format!(
            "g = 0: g2 = {:.4} (the truncated weak-drive hierarchy is not exactly 1 for a bare cavity)",
            curves[0].values[0]
        ));
        Ok(Figure {
            name: "2b".into(),
            title: "g2(0) vs coupling at delta = delta_opt".into(),
            observable: "g2".into(),
            log_scale: true,
            solvers,
            plot: Plot::Lines {
                x_name: "g_over_gamma".into(),
                x,
                curves,
            },
            params: json!({"delta_over_gamma": d, "abs_kerr_over_gamma": K0, "drive_over_gamma": OMEGA0}),
            assumptions: vec![],
            warnings: vec![],
            diagnostics,
        })
    }

    /// Figures 3a/3b: g2 maps over (g, Δ) or (g, K), with the g2 = 1 contour and
    /// the closed-form optimal curve.
    fn fig3(&self, kerr_axis: bool) -> Result<Figure, CliError> {
        let (d_opt, _) = optimum();
        let gx = Axis::linspace(SweepParam::G, 0.0, 20.0, 101);
        let (template, ya, y_name) = if kerr_axis {
            (
                SystemSpec::single(d_opt, 1.0, K0, OMEGA0),
                Axis::linspace(SweepParam::K1, -0.02, 0.02, 101),
                "kerr_over_gamma",
            )
        } else {
            (
                SystemSpec::single(0.0, 1.0, K0, OMEGA0),
                Axis::linspace(SweepParam::Delta, -1.0, 1.0, 101),
                "delta_over_gamma",
            )
        };
        let solver = self.map_solver(&template);
        let r = nonreciprocity::sweep(&template, &[gx.clone(), ya.clone()], Observable::G2, solver)?;
        let contour = nonreciprocity::unity_contour(&r)?;

        // optimal-condition curve g_opt(Δ, K), clipped to the plotted window
        let points: Vec<(f64, f64)> = ya
            .values
            .iter()
            .filter_map(|&y| {
                let (d, k) = if kerr_axis { (d_opt, y) } else { (y, K0) };
                optimal::g_opt(d, k, 1.0)
                    .ok()
                    .filter(|g| *g <= 20.0)
                    .map(|g| (g, y))
            })
            .collect();

        let mut diagnostics = Vec::new();
        if let Some((idx, v)) = r.argmin() {
            let c = r.coords(idx);
            let (d, k) = if kerr_axis { (d_opt, c[1]) } else { (c[1], K0) };
            let step = gx.values[1] - gx.values[0];
            let near = optimal::g_opt(d, k, 1.0).map(|g| (g - c[0]).abs() <= step);
            diagnostics.push(format!(
                "minimum cell g2 = {v:.3e} at g = {:.2}, {y_name} = {:+.4}; on the optimal curve within one cell: {}",
                c[0],
                c[1],
                near.map_or("no optimal coupling there".into(), |b| b.to_string())
            ));
        }
        let closed = contour.polylines.iter().filter(|p| p.closed).count();
        diagnostics.push(format!(
            "g2 = 1 contour: {} polylines ({closed} closed)",
            contour.polylines.len()
        ));
        let assumptions = if kerr_axis {
            vec![
                "K range [-0.02, 0.02] Gamma is not given for the reference figure".into(),
                format!("delta fixed at the closed-form optimum {d_opt:.4}"),
            ]
        } else {
            vec![]
        };
        Ok(Figure {
            name: if kerr_axis { "3b" } else { "3a" }.into(),
            title: format!("g2(0) over (g, {y_name})"),
            observable: "g2".into(),
            log_scale: true,
            solvers: vec![solver.name()],
            plot: Plot::Map {
                x_name: "g_over_gamma".into(),
                y_name: y_name.into(),
                x: gx.values,
                y: ya.values,
                values: r.values,
                contours: contour.polylines,
                overlays: vec![Overlay {
                    label: "optimal condition".into(),
                    points,
                }],
            },
            params: json!({"template": template}),
            assumptions,
            warnings: vec![],
            diagnostics,
        })
    }

    fn fig4a(&self) -> Result<Figure, CliError> {
        let (_, g) = optimum();
        let x = optimal::linspace(-1.0, 1.0, 201);
        let series = [
            ("g = g_opt", SystemSpec::single(0.0, g, K0, OMEGA0)),
            ("g = 0.6 g_opt", SystemSpec::single(0.0, 0.6 * g, K0, OMEGA0)),
            ("g = 1.2 g_opt", SystemSpec::single(0.0, 1.2 * g, K0, OMEGA0)),
        ];
        let (curves, solvers) = self.lines(SweepParam::Delta, &x, Observable::Contrast, &series)?;
        let diagnostics = curves
            .iter()
            .map(|c| {
                let max = c
                    .values
                    .iter()
                    .copied()
                    .filter(|v| v.is_finite())
                    .fold(0.0, f64::max);
                format!("{}: max contrast {max:.6}", c.label)
            })
            .collect();
        Ok(Figure {
            name: "4a".into(),
            title: "contrast vs detuning".into(),
            observable: "contrast".into(),
            log_scale: false,
            solvers,
            plot: Plot::Lines {
                x_name: "delta_over_gamma".into(),
                x,
                curves,
            },
            params: json!({"g_opt_over_gamma": g, "abs_kerr_over_gamma": K0, "drive_over_gamma": OMEGA0}),
            assumptions: vec![],
            warnings: vec![],
            diagnostics,
        })
    }

    fn fig4b(&self) -> Result<Figure, CliError> {
        let (d, _) = optimum();
        let x = optimal::linspace(0.0, 20.0, 201);
        let series = [
            ("delta = delta_opt", SystemSpec::single(d, 1.0, K0, OMEGA0)),
            (
                "delta = 0.5 delta_opt",
                SystemSpec::single(0.5 * d, 1.0, K0, OMEGA0),
            ),
            (
                "delta = 1.2 delta_opt",
                SystemSpec::single(1.2 * d, 1.0, K0, OMEGA0),
            ),
        ];
        let (curves, solvers) = self.lines(SweepParam::G, &x, Observable::Contrast, &series)?;
        let diagnostics = curves
            .iter()
            .map(|c| {
                let max = c
                    .values
                    .iter()
                    .copied()
                    .filter(|v| v.is_finite())
                    .fold(0.0, f64::max);
                format!("{}: max contrast {max:.6}", c.label)
            })
            .collect();
        Ok(Figure {
            name: "4b".into(),
            title: "contrast vs coupling".into(),
            observable: "contrast".into(),
            log_scale: false,
            solvers,
            plot: Plot::Lines {
                x_name: "g_over_gamma".into(),
                x,
                curves,
            },
            params: json!({"delta_opt_over_gamma": d, "abs_kerr_over_gamma": K0, "drive_over_gamma": OMEGA0}),
            assumptions: vec![],
            warnings: vec![],
            diagnostics,
        })
    }

    fn fig5a(&self) -> Result<Figure, CliError> {
        let x = optimal::linspace(-4.0, 4.0, 401);
        let series = [
            (
                "g1 = g2 = 15",
                SystemSpec::double(0.0, [15.0; 2], [K0, -K0], OMEGA0),
            ),
            (
                "g1 = g2 = 63",
                SystemSpec::double(0.0, [63.0; 2], [K0, -K0], OMEGA0),
            ),
        ];
        let (curves, solvers) = self.lines(SweepParam::Delta, &x, Observable::G2, &series)?;
        let num = optimal::find_optimum_numeric(
            &SystemSpec::double(0.0, [1.0; 2], [K0, -K0], OMEGA0),
            &[FreeParam::new(SweepParam::G, 1.0, 150.0)],
            SearchOptions::default(),
        )?;
        let mut diagnostics = vec![format!(
            "numeric optimum at delta = 0: g = {:.4}, G2 = {:.3e}",
            num.argmin[0], num.min_value
        )];
        for c in &curves {
            if let Some((xm, vm)) = argmin_on(&x, &c.values) {
                diagnostics.push(format!(
                    "{}: grid minimum G2 = {vm:.3e} at delta = {xm:+.3}",
                    c.label
                ));
            }
        }
        Ok(Figure {
            name: "5a".into(),
            title: "G2(0) vs detuning, two identical spheres, K+-".into(),
            observable: "g2".into(),
            log_scale: true,
            solvers,
            plot: Plot::Lines {
                x_name: "delta_over_gamma".into(),
                x,
                curves,
            },
            params: json!({"kerr_over_gamma": [K0, -K0], "drive_over_gamma": OMEGA0}),
            assumptions: vec!["detuning window [-4, 4] Gamma".into()],
            warnings: vec![],
            diagnostics,
        })
    }

    fn fig5b(&self) -> Result<Figure, CliError> {
        let x = optimal::linspace(-4.0, 4.0, 401);
        let g = [12.0, 9.88];
        let series = [
            ("K+-", SystemSpec::double(0.0, g, [K0, -K0], OMEGA0)),
            ("K-+", SystemSpec::double(0.0, g, [-K0, K0], OMEGA0)),
        ];
        let (curves, solvers) = self.lines(SweepParam::Delta, &x, Observable::G2, &series)?;
        let mut diagnostics = Vec::new();
        for (label, spec) in &series {
            let r = optimal::find_optimum_numeric(
                spec,
                &[FreeParam::new(SweepParam::Delta, -4.0, 4.0)],
                SearchOptions::default(),
            )?;
            diagnostics.push(format!(
                "{label}: minimum G2 = {:.3e} at delta = {:+.4} (reference {}2.87)",
                r.min_value,
                r.argmin[0],
                if *label == "K+-" { "+" } else { "-" }
            ));
        }
        Ok(Figure {
            name: "5b".into(),
            title: "G2(0) vs detuning, asymmetric couplings".into(),
            observable: "g2".into(),
            log_scale: true,
            solvers,
            plot: Plot::Lines {
                x_name: "delta_over_gamma".into(),
                x,
                curves,
            },
            params: json!({"g_over_gamma": g, "abs_kerr_over_gamma": K0, "drive_over_gamma": OMEGA0}),
            assumptions: vec![
                "couplings g1 = 12, g2 = 9.88 Gamma are not given for the reference figure; taken from the asymmetric curve of the contrast-vs-detuning figure".into(),
                "detuning window [-4, 4] Gamma".into(),
            ],
            warnings: vec![],
            diagnostics,
        })
    }

    fn fig6a(&self) -> Result<Figure, CliError> {
        let (d, _) = optimum();
        let x = optimal::linspace(0.0, 2.0, 201);
        let series = [
            ("K+-", SystemSpec::double(-d, [9.88; 2], [K0, -K0], OMEGA0)),
            ("K-+", SystemSpec::double(-d, [9.88; 2], [-K0, K0], OMEGA0)),
        ];
        let (curves, solvers) = self.lines(SweepParam::ZetaG, &x, Observable::G2, &series)?;
        let at = |c: &Curve, i: usize| c.values[i];
        let diagnostics = vec![
            format!(
                "zeta_g = 0: K+- {:.4}, K-+ {:.4}",
                at(&curves[0], 0),
                at(&curves[curves.len() / 2], 0)
            ),
            format!(
                "zeta_g = 1: K+- {:.6}, K-+ {:.6}",
                at(&curves[0], 100),
                at(&curves[curves.len() / 2], 100)
            ),
        ];
        Ok(Figure {
            name: "6a".into(),
            title: "G2(0) vs relative coupling zeta_g at delta = -0.287".into(),
            observable: "g2".into(),
            log_scale: true,
            solvers,
            plot: Plot::Lines {
                x_name: "zeta_g".into(),
                x,
                curves,
            },
            params: json!({"delta_over_gamma": -d, "g2_over_gamma": 9.88, "abs_kerr_over_gamma": K0, "drive_over_gamma": OMEGA0}),
            assumptions: vec!["g1 = zeta_g * g2 with g2 = 9.88 Gamma fixed".into()],
            warnings: vec![],
            diagnostics,
        })
    }

    fn fig6b(&self) -> Result<Figure, CliError> {
        let (d, _) = optimum();
        let template = SystemSpec::double(-d, [9.88; 2], [K0, -K0], OMEGA0);
        let xa = Axis::linspace(SweepParam::ZetaG, 0.0, 2.0, 81);
        let ya = Axis::linspace(SweepParam::ZetaK, 0.0, 2.0, 81);
        let solver = self.map_solver(&template);
        let r = nonreciprocity::sweep(&template, &[xa.clone(), ya.clone()], Observable::G2, solver)?;
        let contour = nonreciprocity::unity_contour(&r)?;
        let diagnostics = contour
            .polylines
            .iter()
            .zip(&contour.monotonicity)
            .map(|(p, m)| {
                format!(
                    "contour with {} points, closed {}, trend {m:?}",
                    p.points.len(),
                    p.closed
                )
            })
            .collect();
        Ok(Figure {
            name: "6b".into(),
            title: "G2(0) = 1 contour over (zeta_g, |zeta_K|)".into(),
            observable: "g2".into(),
            log_scale: true,
            solvers: vec![solver.name()],
            plot: Plot::Map {
                x_name: "zeta_g".into(),
                y_name: "zeta_k_abs".into(),
                x: xa.values,
                y: ya.values,
                values: r.values,
                contours: contour.polylines,
                overlays: vec![],
            },
            params: json!({"template": template}),
            assumptions: vec![
                "K+- sign pattern; |K2| = 4e-3 Gamma fixed and |K1| = |zeta_K| |K2|".into(),
                "delta = -0.287 Gamma and g2 = 9.88 Gamma as in the zeta_g figure".into(),
                "window zeta_g, |zeta_K| in [0, 2]".into(),
            ],
            warnings: vec![],
            diagnostics,
        })
    }

    fn fig7a(&self) -> Result<Figure, CliError> {
        let (d, _) = optimum();
        let x = optimal::linspace(0.0, 2.0, 201);
        let series = [
            (
                "|K1| = |K2|",
                SystemSpec::double(-d, [9.88; 2], [K0, -K0], OMEGA0),
            ),
            (
                "|K2| = 2|K1|",
                SystemSpec::double(-d, [9.88; 2], [K0 / 2.0, -K0], OMEGA0),
            ),
        ];
        let (curves, solvers) = self.lines(SweepParam::ZetaG, &x, Observable::Contrast, &series)?;
        let diagnostics = vec![format!(
            "zeta_g = 1: {} {:.3e}, {} {:.3e}",
            curves[0].label,
            curves[0].values[100],
            curves[curves.len() / 2].label,
            curves[curves.len() / 2].values[100]
        )];
        Ok(Figure {
            name: "7a".into(),
            title: "contrast vs relative coupling zeta_g".into(),
            observable: "contrast".into(),
            log_scale: false,
            solvers,
            plot: Plot::Lines {
                x_name: "zeta_g".into(),
                x,
                curves,
            },
            params: json!({"delta_over_gamma": -d, "g2_over_gamma": 9.88, "drive_over_gamma": OMEGA0}),
            assumptions: vec![
                "detuning not given for the reference figure; delta = -0.287 Gamma as in the zeta_g figure"
                    .into(),
                "g2 = 9.88 Gamma fixed, g1 = zeta_g g2".into(),
            ],
            warnings: vec![],
            diagnostics,
        })
    }

    fn fig7b(&self) -> Result<Figure, CliError> {
        let x = optimal::linspace(-1.0, 1.0, 201);
        let series = [
            (
                "g1 = g2, |K1| = |K2|",
                SystemSpec::double(0.0, [9.88; 2], [K0, -K0], OMEGA0),
            ),
            (
                "g1 = 12, g2 = 9.88",
                SystemSpec::double(0.0, [12.0, 9.88], [K0, -K0], OMEGA0),
            ),
            (
                "|K2| = 4|K1|",
                SystemSpec::double(0.0, [9.88; 2], [K0 / 4.0, -K0], OMEGA0),
            ),
        ];
        let (curves, solvers) = self.lines(SweepParam::Delta, &x, Observable::Contrast, &series)?;
        let diagnostics = curves
            .iter()
            .map(
                |c| match argmin_on(&x, &c.values.iter().map(|v| -v).collect::<Vec<_>>()) {
                    Some((xm, vm)) => format!("{}: max contrast {:.4} at delta = {xm:+.3}", c.label, -vm),
                    None => format!("{}: no finite values", c.label),
                },
            )
            .collect();
        Ok(Figure {
            name: "7b".into(),
            title: "contrast vs detuning, two spheres".into(),
            observable: "contrast".into(),
            log_scale: false,
            solvers,
            plot: Plot::Lines {
                x_name: "delta_over_gamma".into(),
                x,
                curves,
            },
            params: json!({"abs_kerr2_over_gamma": K0, "drive_over_gamma": OMEGA0}),
            assumptions: vec!["detuning window [-1, 1] Gamma".into()],
            warnings: vec![],
            diagnostics,
        })
    }

    fn fig8a(&self) -> Result<Figure, CliError> {
        let (d, g) = optimum();
        let x = optimal::linspace(0.01, 1.5, 60);
        let series = [
            ("one sphere", SystemSpec::single(d, g, K0, OMEGA0)),
            (
                "two spheres",
                SystemSpec::double(0.0, [63.0; 2], [K0, -K0], OMEGA0),
            ),
        ];
        let (curves, solvers) = self.lines(SweepParam::Omega, &x, Observable::G2, &series)?;
        let mut diagnostics = Vec::new();
        for c in &curves {
            let cross = x
                .windows(2)
                .zip(c.values.windows(2))
                .find(|(_, v)| v[0] < 1.0 && v[1] >= 1.0)
                .map(|(xs, v)| xs[0] + (1.0 - v[0]) * (xs[1] - xs[0]) / (v[1] - v[0]));
            diagnostics.push(match cross {
                Some(om) => format!("{}: g2 rises through 1 at Omega = {om:.3}", c.label),
                None => format!("{}: g2 stays on one side of 1 in [0.01, 1.5]", c.label),
            });
        }
        diagnostics.push("reference: blockade for Omega < 0.31 (one sphere) and < 0.84 (two spheres)".into());
        Ok(Figure {
            name: "8a".into(),
            title: "g2(0) vs drive strength".into(),
            observable: "g2".into(),
            log_scale: true,
            solvers,
            plot: Plot::Lines {
                x_name: "drive_over_gamma".into(),
                x,
                curves,
            },
            params: json!({"single": series[0].1, "double": series[1].1}),
            assumptions: vec![
                "one sphere at the closed-form optimum; two spheres at delta = 0, g = 63 Gamma, K+-".into(),
            ],
            warnings: vec![],
            diagnostics,
        })
    }

    fn fig8b(&self) -> Result<Figure, CliError> {
        let (d, g) = optimum();
        let x = optimal::linspace(0.0, 10e-3, 21);
        let freq = self.cfg.bath.mode_frequency_over_2pi_hz;
        let series = [
            ("one sphere", SystemSpec::single(d, g, K0, OMEGA0)),
            (
                "two spheres",
                SystemSpec::double(0.0, [63.0; 2], [K0, -K0], OMEGA0),
            ),
        ];
        let mut curves = Vec::new();
        let mut solvers = Vec::new();
        for (label, spec) in &series {
            let solver = self.cfg.lindblad(spec);
            let Solver::Lindblad { cutoff } = solver else {
                unreachable!()
            };
            let values: Vec<f64> = x
                .par_iter()
                .map(|&t| {
                    let bath = BathSpec::uniform(t, 2.0 * std::f64::consts::PI * freq, spec.n_modes());
                    lindblad::g2_thermal(spec, cutoff, Some(&bath)).unwrap_or(f64::NAN)
                })
                .collect();
            curves.push(Curve {
                label: label.to_string(),
                values,
                branches: None,
            });
            solvers.push(solver.name());
        }
        let diagnostics = curves
            .iter()
            .map(|c| {
                let first = x.iter().zip(&c.values).find(|(_, v)| **v >= 1.0);
                match first {
                    Some((t, _)) => format!("{}: g2 >= 1 from T = {:.2} mK", c.label, t * 1e3),
                    None => format!("{}: g2 < 1 over the scan", c.label),
                }
            })
            .collect();
        Ok(Figure {
            name: "8b".into(),
            title: "g2(0) vs bath temperature".into(),
            observable: "g2".into(),
            log_scale: true,
            solvers,
            plot: Plot::Lines {
                x_name: "temperature_k".into(),
                x,
                curves,
            },
            params: json!({"mode_frequency_over_2pi_hz": freq, "single": series[0].1, "double": series[1].1}),
            assumptions: vec![format!(
                "absolute mode frequency not given; all modes at {:.3} GHz (set bath.mode_frequency_over_2pi_hz)",
                freq / 1e9
            )],
            warnings: vec![
                "absolute temperature thresholds are not reproducible: they scale with the unspecified mode frequency; only the rise with temperature is meaningful".into(),
            ],
            diagnostics,
        })
    }
}

pub fn build(name: &str, cfg: &RunConfig) -> Result<Figure, CliError> {
    Builder { cfg }.build(name)
}
