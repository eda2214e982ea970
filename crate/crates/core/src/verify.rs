//! Numerical acceptance checks. Each criterion recomputes its numbers from
//! the public API and reports expected vs computed at a pinned tolerance.
//! Failing criteria are reported, never adjusted.

use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::lindblad;
use crate::model::{SweepParam, SystemSpec};
use crate::nonreciprocity::{self, Solver};
use crate::optimal::{self, Branch, FreeParam, SearchOptions};
use crate::weakdrive;
use crate::Result;

/// Reference values, in units of Γ.
pub const K0: f64 = 4e-3;
pub const OMEGA0: f64 = 0.1;
pub const REF_DELTA_OPT: f64 = 0.287;
pub const REF_G_OPT: f64 = 9.88;
pub const REF_G_OPT_DOUBLE: f64 = 63.0;
pub const REF_DELTA_ASYM: f64 = 2.87;
pub const REF_THRESHOLD_SINGLE: f64 = 0.31;
pub const REF_THRESHOLD_DOUBLE: f64 = 0.84;

pub const ALL: [u8; 14] = [1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12, 13, 14];
pub const QUICK: [u8; 6] = [1, 2, 3, 5, 6, 7];

/// Deliberate model faults, for checking that the suite notices them.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Mutation {
    /// Negates every Kerr coefficient before the model is evaluated.
    FlipKerrSign,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct VerifyOptions {
    pub mutation: Option<Mutation>,
    /// Seed of the random draws in the property criteria.
    pub seed: u64,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self {
            mutation: None,
            seed: 20_240_607,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CriterionReport {
    pub id: u8,
    pub claim: String,
    pub expected: String,
    pub computed: String,
    pub tolerance: String,
    pub passed: bool,
    pub detail: String,
    #[serde(serialize_with = "secs")]
    pub runtime: Duration,
}

fn secs<S: serde::Serializer>(d: &Duration, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_f64(d.as_secs_f64())
}

impl CriterionReport {
    /// One line: status, id, claim, expected, computed, tolerance, time.
    pub fn line(&self) -> String {
        format!(
            "[{}] {:>2} {} | expected {} | computed {} | tol {} | {:.2}s",
            if self.passed { "PASS" } else { "FAIL" },
            self.id,
            self.claim,
            self.expected,
            self.computed,
            self.tolerance,
            self.runtime.as_secs_f64()
        )
    }
}

struct Outcome {
    expected: String,
    computed: String,
    tolerance: String,
    passed: bool,
    detail: String,
}

pub fn claim(id: u8) -> &'static str {
    match id {
        1 => "closed-form optimal detuning",
        2 => "closed-form optimal coupling",
        3 => "perfect blockade at the optimum",
        4 => "weak-drive vs master equation over detuning",
        5 => "ideal nonreciprocity at the optimum",
        6 => "feasibility gate of the optimal coupling",
        7 => "two identical spheres are reciprocal",
        8 => "two-sphere symmetric optimum",
        9 => "asymmetric two-sphere optima",
        10 => "mirror symmetry g2(D,K) = g2(-D,-K)",
        11 => "linear limit K = 0",
        12 => "drive window thresholds",
        13 => "thermal trend and T = 0 generator identity",
        14 => "blockade-condition root vs numeric argmin",
        _ => "unknown criterion",
    }
}

/// Runs one criterion. Errors inside a criterion become a failed report.
pub fn run(id: u8, opts: &VerifyOptions) -> CriterionReport {
    let start = Instant::now();
    let ctx = Ctx { opts: *opts };
    let result = match id {
        1 => ctx.c1(),
        2 => ctx.c2(),
        3 => ctx.c3(),
        4 => ctx.c4(),
        5 => ctx.c5(),
        6 => ctx.c6(),
        7 => ctx.c7(),
        8 => ctx.c8(),
        9 => ctx.c9(),
        10 => ctx.c10(),
        11 => ctx.c11(),
        12 => ctx.c12(),
        13 => ctx.c13(),
        14 => ctx.c14(),
        _ => Err(crate::Error::InvalidParameter {
            name: "criterion",
            reason: format!("no criterion {id}"),
        }),
    };
    let out = result.unwrap_or_else(|e| Outcome {
        expected: "-".into(),
        computed: "error".into(),
        tolerance: "-".into(),
        passed: false,
        detail: e.to_string(),
    });
    CriterionReport {
        id,
        claim: claim(id).into(),
        expected: out.expected,
        computed: out.computed,
        tolerance: out.tolerance,
        passed: out.passed,
        detail: out.detail,
        runtime: start.elapsed(),
    }
}

pub fn run_ids(ids: &[u8], opts: &VerifyOptions) -> Vec<CriterionReport> {
    ids.iter().map(|&id| run(id, opts)).collect()
}

pub fn run_all(opts: &VerifyOptions) -> Vec<CriterionReport> {
    run_ids(&ALL, opts)
}

pub fn run_quick(opts: &VerifyOptions) -> Vec<CriterionReport> {
    run_ids(&QUICK, opts)
}

fn rel(a: f64, b: f64) -> f64 {
    ((a - b) / b).abs()
}

struct Ctx {
    opts: VerifyOptions,
}

impl Ctx {
    /// The spec the model actually sees, after any injected fault.
    fn model(&self, spec: &SystemSpec) -> SystemSpec {
        match self.opts.mutation {
            None => spec.clone(),
            Some(Mutation::FlipKerrSign) => {
                let mut s = spec.clone();
                s.magnons.iter_mut().for_each(|m| m.kerr = -m.kerr);
                s
            }
        }
    }

    fn wd(&self, spec: &SystemSpec) -> Result<f64> {
        weakdrive::g2(&self.model(spec))
    }

    fn lb(&self, spec: &SystemSpec, cutoff: usize) -> Result<f64> {
        lindblad::g2(&self.model(spec), cutoff)
    }

    fn rng(&self, id: u8) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.opts.seed ^ (id as u64) << 32)
    }

    fn argmin(&self, template: &SystemSpec, free: FreeParam, grid: usize) -> Result<(f64, f64)> {
        let opts = SearchOptions {
            grid_points: grid,
            ..SearchOptions::default()
        };
        let r = optimal::find_optimum_numeric(&self.model(template), &[free], opts)?;
        Ok((r.argmin[0], r.min_value))
    }

    fn optimum(&self) -> (f64, f64) {
        let d = optimal::delta_opt(K0, OMEGA0, 1.0, Branch::Plus);
        let g = optimal::g_opt(d, K0, 1.0).unwrap_or(f64::NAN);
        (d, g)
    }

    fn c1(&self) -> Result<Outcome> {
        let d = optimal::delta_opt(K0, OMEGA0, 1.0, Branch::Plus);
        let limit = optimal::delta_opt(0.0, 0.0, 1.0, Branch::Plus);
        let exact = 3f64.sqrt() / 6.0;
        let g = optimal::g_opt(d, K0, 1.0)?;
        // the closed form must also be where the model actually has its dip
        let (num, _) = self.argmin(
            &SystemSpec::single(0.0, g, K0, OMEGA0),
            FreeParam::new(SweepParam::Delta, -1.0, 1.0),
            201,
        )?;
        let ok_ref = rel(d, REF_DELTA_OPT) <= 5e-3;
        let ok_limit = (limit - exact).abs() <= 1e-12;
        let ok_model = (num - d).abs() <= 1e-3;
        Ok(Outcome {
            expected: format!("{REF_DELTA_OPT} (limit {exact:.15})"),
            computed: format!("{d:.6} (limit {limit:.15}, model argmin {num:.6})"),
            tolerance: "0.5% rel; 1e-12; argmin 1e-3".into(),
            passed: ok_ref && ok_limit && ok_model,
            detail: format!(
                "reference {ok_ref}, limit {ok_limit}, argmin of weak-drive g2 over D at g_opt {ok_model}"
            ),
        })
    }

    fn c2(&self) -> Result<Outcome> {
        let (d, g) = self.optimum();
        let (num, _) = self.argmin(
            &SystemSpec::single(d, 1.0, K0, OMEGA0),
            FreeParam::new(SweepParam::G, 1.0, 20.0),
            191,
        )?;
        let ok_ref = rel(g, REF_G_OPT) <= 5e-3;
        let ok_model = rel(num, g) <= 1e-3;
        Ok(Outcome {
            expected: format!("{REF_G_OPT}"),
            computed: format!("{g:.6} (model argmin {num:.6})"),
            tolerance: "0.5% rel; argmin 0.1% rel".into(),
            passed: ok_ref && ok_model,
            detail: format!("reference {ok_ref}, argmin of weak-drive g2 over g at D_opt {ok_model}"),
        })
    }

    fn c3(&self) -> Result<Outcome> {
        let (d, g) = self.optimum();
        let spec = SystemSpec::single(d, g, K0, OMEGA0);
        let w = self.wd(&spec)?;
        let l = self.lb(&spec, 4)?;
        Ok(Outcome {
            expected: "weak-drive < 1e-6, master equation < 1e-3".into(),
            computed: format!("{w:.3e}, {l:.3e}"),
            tolerance: "upper bounds".into(),
            passed: w < 1e-6 && l < 1e-3,
            detail: "cutoff 4 per mode".into(),
        })
    }

    fn c4(&self) -> Result<Outcome> {
        let (_, g) = self.optimum();
        let deltas = optimal::linspace(-1.0, 1.0, 81);
        let mut worst = (0.0f64, 0.0, 0.0, 0.0, 0.0);
        let mut fails = 0;
        for k in [K0, -K0] {
            for &d in &deltas {
                let spec = SystemSpec::single(d, g, k, OMEGA0);
                let w = self.wd(&spec)?;
                let l = self.lb(&spec, 4)?;
                let tol = (0.05 * l.abs()).max(1e-3);
                let excess = (w - l).abs() / tol;
                if excess > 1.0 {
                    fails += 1;
                }
                if excess > worst.0 {
                    worst = (excess, d, k, w, l);
                }
            }
        }
        let (x, d, k, w, l) = worst;
        Ok(Outcome {
            expected: "agreement at all 162 points".into(),
            computed: format!("{fails} points outside"),
            tolerance: "max(5% rel, 1e-3 abs)".into(),
            passed: fails == 0,
            detail: format!(
                "worst at D={d:+.3}, K={k:+.0e}: weak-drive {w:.4e}, master equation {l:.4e} ({x:.2}x tolerance)"
            ),
        })
    }

    fn c5(&self) -> Result<Outcome> {
        let (d, g) = self.optimum();
        let spec = self.model(&SystemSpec::single(d, g, K0, OMEGA0));
        let c = nonreciprocity::contrast_single(&spec)?;
        Ok(Outcome {
            expected: ">= 0.999".into(),
            computed: format!("{:.9}", c.contrast),
            tolerance: "lower bound".into(),
            passed: c.contrast >= 0.999,
            detail: format!("g2(K>0) {:.3e}, g2(K<0) {:.3e}", c.g2_forward, c.g2_backward),
        })
    }

    fn c6(&self) -> Result<Outcome> {
        let mut rng = self.rng(6);
        let mut mismatches = 0;
        let mut feasible = 0;
        for _ in 0..1000 {
            let d: f64 = rng.random_range(-1.0..1.0);
            let k: f64 = rng.random_range(-0.05..0.05);
            let expect = (4.0 * d + 3.0 * k) * k > 0.0;
            let got = optimal::g_opt(d, k, 1.0);
            let ok = match got {
                Ok(g) => expect && g.is_finite() && g > 0.0,
                Err(_) => !expect,
            };
            feasible += expect as usize;
            mismatches += (!ok) as usize;
        }
        Ok(Outcome {
            expected: "0 mismatches".into(),
            computed: format!("{mismatches} mismatches"),
            tolerance: "exact".into(),
            passed: mismatches == 0,
            detail: format!("{feasible} of 1000 draws feasible"),
        })
    }

    fn c7(&self) -> Result<Outcome> {
        let mut rng = self.rng(7);
        let mut worst = 0.0f64;
        for _ in 0..100 {
            let d = rng.random_range(-3.0..3.0);
            let g = rng.random_range(0.5..80.0);
            let k = rng.random_range(1e-3..5e-2);
            let spec = self.model(&SystemSpec::double(d, [g, g], [k, -k], OMEGA0));
            worst = worst.max(nonreciprocity::contrast_double(&spec)?.contrast);
        }
        Ok(Outcome {
            expected: "< 1e-10".into(),
            computed: format!("{worst:.3e}"),
            tolerance: "upper bound".into(),
            passed: worst < 1e-10,
            detail: "max contrast over 100 draws".into(),
        })
    }

    fn c8(&self) -> Result<Outcome> {
        let template = SystemSpec::double(0.0, [1.0, 1.0], [K0, -K0], OMEGA0);
        let (g, v) = self.argmin(&template, FreeParam::new(SweepParam::G, 1.0, 150.0), 300)?;
        Ok(Outcome {
            expected: format!("g = {REF_G_OPT_DOUBLE}, G2 < 1e-4"),
            computed: format!("g = {g:.4}, G2 = {v:.3e}"),
            tolerance: "2% rel".into(),
            passed: rel(g, REF_G_OPT_DOUBLE) <= 0.02 && v < 1e-4,
            detail: "weak-drive argmin over g in [1, 150], D = 0, K+-".into(),
        })
    }

    fn c9(&self) -> Result<Outcome> {
        let free = FreeParam::new(SweepParam::Delta, -4.0, 4.0);
        let pm = SystemSpec::double(0.0, [12.0, REF_G_OPT], [K0, -K0], OMEGA0);
        let mp = SystemSpec::double(0.0, [12.0, REF_G_OPT], [-K0, K0], OMEGA0);
        let (d_pm, v_pm) = self.argmin(&pm, free, 401)?;
        let (d_mp, v_mp) = self.argmin(&mp, free, 401)?;
        let ok = rel(d_pm, REF_DELTA_ASYM) <= 0.05 && rel(d_mp, -REF_DELTA_ASYM) <= 0.05;
        Ok(Outcome {
            expected: format!("K+- at +{REF_DELTA_ASYM}, K-+ at -{REF_DELTA_ASYM}"),
            computed: format!("K+- at {d_pm:+.4}, K-+ at {d_mp:+.4}"),
            tolerance: "5% rel".into(),
            passed: ok,
            detail: format!("minima G2 {v_pm:.3e}, {v_mp:.3e}; g1 = 12, g2 = 9.88, search D in [-4, 4]"),
        })
    }

    fn c10(&self) -> Result<Outcome> {
        let mut rng = self.rng(10);
        let draw = |rng: &mut ChaCha8Rng| {
            let d = rng.random_range(-1.0..1.0);
            let g = rng.random_range(0.5..15.0);
            let k = rng.random_range(1e-3..5e-2) * if rng.random::<bool>() { 1.0 } else { -1.0 };
            (d, g, k)
        };
        let mut worst_w = 0.0f64;
        for _ in 0..100 {
            let (d, g, k) = draw(&mut rng);
            let a = self.wd(&SystemSpec::single(d, g, k, OMEGA0))?;
            let b = self.wd(&SystemSpec::single(-d, g, -k, OMEGA0))?;
            worst_w = worst_w.max(rel(a, b));
        }
        let mut worst_l = 0.0f64;
        for _ in 0..10 {
            let (d, g, k) = draw(&mut rng);
            let a = self.lb(&SystemSpec::single(d, g, k, OMEGA0), 4)?;
            let b = self.lb(&SystemSpec::single(-d, g, -k, OMEGA0), 4)?;
            worst_l = worst_l.max(rel(a, b));
        }
        Ok(Outcome {
            expected: "weak-drive < 1e-10, master equation < 1e-6".into(),
            computed: format!("{worst_w:.3e}, {worst_l:.3e}"),
            tolerance: "relative".into(),
            passed: worst_w < 1e-10 && worst_l < 1e-6,
            detail: "100 weak-drive draws, 10 master-equation draws at cutoff 4".into(),
        })
    }

    fn c11(&self) -> Result<Outcome> {
        let (_, g) = self.optimum();
        let mut worst_w = 0.0f64;
        let mut worst_l = 0.0f64;
        for d in optimal::linspace(-1.0, 1.0, 21) {
            let spec = SystemSpec::single(d, g, 0.0, 0.01);
            worst_w = worst_w.max((self.wd(&spec)? - 1.0).abs());
            worst_l = worst_l.max((self.lb(&spec, 4)? - 1.0).abs());
        }
        Ok(Outcome {
            expected: "|g2 - 1| < 1e-3 for both".into(),
            computed: format!("{worst_w:.3e}, {worst_l:.3e}"),
            tolerance: "upper bound".into(),
            passed: worst_w < 1e-3 && worst_l < 1e-3,
            detail: format!("g = {g:.4}, Omega = 0.01, 21 detunings in [-1, 1]"),
        })
    }

    fn c12(&self) -> Result<Outcome> {
        let (d, g) = self.optimum();
        let single = self.model(&SystemSpec::single(d, g, K0, OMEGA0));
        let g_double = optimal::find_optimum_numeric(
            &self.model(&SystemSpec::double(0.0, [1.0, 1.0], [K0, -K0], OMEGA0)),
            &[FreeParam::new(SweepParam::G, 1.0, 150.0)],
            SearchOptions::default(),
        )?
        .argmin[0];
        let double = self.model(&SystemSpec::double(0.0, [g_double; 2], [K0, -K0], OMEGA0));
        let show = |x: Option<f64>| x.map_or("none".to_string(), |v| format!("{v:.4}"));

        let l1 = nonreciprocity::drive_threshold(&single, Solver::Lindblad { cutoff: 6 }, 0.05, 1.5, 30);
        let l2 = nonreciprocity::drive_threshold(&double, Solver::Lindblad { cutoff: 3 }, 0.1, 1.5, 8);
        let w1 = nonreciprocity::drive_threshold(&single, Solver::WeakDrive, 0.05, 1.5, 60);
        let w2 = nonreciprocity::drive_threshold(&double, Solver::WeakDrive, 0.05, 1.5, 60);
        let within = |x: Option<f64>, want: f64| x.is_some_and(|v| rel(v, want) <= 0.1);
        Ok(Outcome {
            expected: format!("{REF_THRESHOLD_SINGLE} (one sphere), {REF_THRESHOLD_DOUBLE} (two)"),
            computed: format!("{}, {}", show(l1), show(l2)),
            tolerance: "10% rel".into(),
            passed: within(l1, REF_THRESHOLD_SINGLE) && within(l2, REF_THRESHOLD_DOUBLE),
            detail: format!(
                "master equation (cutoffs 6 and 3) shown; weak-drive gives {}, {}; no crossing in [0.05, 1.5] reads none",
                show(w1),
                show(w2)
            ),
        })
    }

    fn c13(&self) -> Result<Outcome> {
        let (d, g) = self.optimum();
        let spec = self.model(&SystemSpec::single(d, g, K0, OMEGA0));
        let nbars = optimal::linspace(0.0, 0.2, 21);
        let values = nbars
            .iter()
            .map(|&n| lindblad::g2_with_occupation(&spec, 4, n))
            .collect::<Result<Vec<_>>>()?;
        let drops: Vec<(f64, f64)> = values
            .windows(2)
            .zip(&nbars[1..])
            .filter(|(w, _)| w[1] < w[0] * (1.0 - 1e-9))
            .map(|(w, &n)| (n, w[1] - w[0]))
            .collect();

        let basis = lindblad::basis_for(&spec, 4)?;
        let bath = lindblad::BathSpec::uniform(0.0, 2.0 * std::f64::consts::PI * 10e9, spec.n_modes());
        let ours = lindblad::build_liouvillian(&spec, &basis, Some(&bath))?;
        let reference = lindblad::master_equation_dense(&spec, &basis)?;
        let diff = (ours.superoperator().to_dense() - reference)
            .iter()
            .map(|v| v.norm())
            .fold(0.0, f64::max);

        let mono = drops.is_empty();
        let same = diff <= 1e-13;
        Ok(Outcome {
            expected: "non-decreasing g2(n); generator difference 0".into(),
            computed: format!("{} decreasing steps; difference {diff:.1e}", drops.len()),
            tolerance: "monotone; 1e-13".into(),
            passed: mono && same,
            detail: format!(
                "g2 at n = 0, 0.01, 0.2: {:.4e}, {:.4e}, {:.4e}{}",
                values[0],
                values[1],
                values[20],
                drops.first().map_or(String::new(), |(n, dv)| format!(
                    "; first drop at n = {n:.2} by {dv:.2e}"
                ))
            ),
        })
    }

    fn c14(&self) -> Result<Outcome> {
        let mut rng = self.rng(14);
        let search = SearchOptions {
            grid_points: 300,
            ..SearchOptions::default()
        };
        let free = [FreeParam::new(SweepParam::G, 0.05, 150.0)];
        let compare = |spec: &SystemSpec| -> Result<(f64, f64)> {
            let root = optimal::residual_root_g(spec)?;
            let num = optimal::find_optimum_numeric(&self.model(spec), &free, search)?;
            Ok((root.g, num.argmin[0]))
        };
        let mut worst_on = 0.0f64;
        let mut off = Vec::new();
        let mut n = 0;
        while n < 50 {
            let sign = if rng.random::<bool>() { 1.0 } else { -1.0 };
            let k = sign * rng.random_range(1e-3..5e-2);
            let d = sign * rng.random_range(0.3..0.6);
            // on the locus the blockade condition has an exact real root
            let omega2 = (12.0 * d * d + 28.0 * d * k + 14.0 * k * k - 1.0) / 2.0;
            if omega2 <= 0.0 {
                continue;
            }
            let on = SystemSpec::single(d, 1.0, k, omega2.sqrt());
            let (a, b) = compare(&on)?;
            worst_on = worst_on.max((a - b).abs());
            if let Ok((a, b)) = compare(&SystemSpec::single(d, 1.0, k, OMEGA0)) {
                off.push(a - b);
            }
            n += 1;
        }
        let mean_off = off.iter().sum::<f64>() / off.len().max(1) as f64;
        let max_off = off.iter().map(|v| v.abs()).fold(0.0, f64::max);
        Ok(Outcome {
            expected: "root = argmin".into(),
            computed: format!("max |dg| {worst_on:.2e}"),
            tolerance: "1e-3".into(),
            passed: worst_on <= 1e-3,
            detail: format!(
                "50 draws with Omega on the exact-root locus; at Omega = 0.1 (no exact root) the |residual| minimizer differs from the argmin by mean {mean_off:+.3e}, max {max_off:.3e} over {} draws",
                off.len()
            ),
        })
    }
}
