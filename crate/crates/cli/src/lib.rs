//! `magnon-sim`: configuration, figure reproduction, sweeps and the
//! acceptance suite from the command line.

pub mod config;
pub mod figures;
pub mod output;
pub mod svg;

use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use magnon_blockade::nonreciprocity::{self, Axis, Observable, Solver, SweepResult};
use magnon_blockade::optimal::{self, FreeParam, SearchOptions};
use magnon_blockade::verify::{self, Mutation, VerifyOptions};
use magnon_blockade::{lindblad, SweepParam, SystemSpec};

use config::{Format, RunConfig, SolverChoice};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("config error: {0}")]
    Config(String),
    #[error("solver error: {0}")]
    Solver(#[from] magnon_blockade::Error),
    #[error("{0} of {1} verification criteria failed")]
    Verification(usize, usize),
    #[error("i/o error: {0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Config(_) => 3,
            CliError::Solver(_) => 4,
            CliError::Verification(..) => 5,
            CliError::Io(_) => 6,
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "magnon-sim",
    version,
    about = "Nonreciprocal magnon blockade: g2(0), figures, sweeps, verification"
)]
pub struct Cli {
    /// TOML run configuration; unset fields take the defaults.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub solver: Option<SolverChoice>,
    /// Output directory.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Output formats; repeat or comma-separate. `.meta.json` is always written.
    #[arg(long, global = true, value_enum, value_delimiter = ',')]
    pub format: Vec<Format>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Steady-state g2(0) of the configured system.
    G2(Overrides),
    /// Reproduce one figure: 2a 2b 3a 3b 4a 4b 5a 5b 6a 6b 7a 7b 8a 8b.
    Figure { name: String },
    /// Grid sweep over one or two parameters.
    Sweep {
        /// `param:from:to:points`, e.g. `delta:-1:1:101`; overrides config axes.
        #[arg(long = "axis")]
        axes: Vec<String>,
        #[arg(long, value_enum)]
        observable: Option<ObservableArg>,
        /// Base name of the output files.
        #[arg(long, default_value = "sweep")]
        name: String,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Closed-form and numeric blockade optimum.
    Optimal(Overrides),
    /// Contrast between the two Kerr-sign configurations.
    Contrast(Overrides),
    /// Run the acceptance suite.
    Verify {
        #[arg(long)]
        quick: bool,
        #[arg(long, value_enum)]
        mutate: Option<MutationArg>,
        /// Run only these criteria (comma-separated ids).
        #[arg(long, value_delimiter = ',')]
        only: Vec<u8>,
    },
}

#[derive(Debug, Clone, Copy, clap::ValueEnum)]
pub enum ObservableArg {
    G2,
    Contrast,
}

#[derive(Debug, Clone, Copy, clap::ValueEnum)]
pub enum MutationArg {
    FlipKerrSign,
}

/// Point overrides, all in units of Γ. `g` and `k` apply to every sphere;
/// `k` keeps the configured sign pattern.
#[derive(Debug, Clone, Default, Args)]
pub struct Overrides {
    #[arg(long, allow_hyphen_values = true)]
    pub delta: Option<f64>,
    #[arg(long)]
    pub g: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub k: Option<f64>,
    #[arg(long)]
    pub omega: Option<f64>,
    /// Same as `--solver both`.
    #[arg(long)]
    pub both_solvers: bool,
}

impl Overrides {
    fn apply(&self, cfg: &mut RunConfig) -> Result<(), CliError> {
        let s = &mut cfg.system;
        if let Some(d) = self.delta {
            s.delta_over_gamma = d;
            s.magnons.iter_mut().for_each(|m| m.detuning_over_gamma = None);
        }
        if let Some(g) = self.g {
            s.magnons.iter_mut().for_each(|m| m.coupling_over_gamma = g);
        }
        if let Some(k) = self.k {
            let lead = s.magnons[0].kerr_over_gamma.signum();
            for m in &mut s.magnons {
                let rel = if lead == 0.0 || m.kerr_over_gamma == 0.0 {
                    1.0
                } else {
                    m.kerr_over_gamma.signum() * lead
                };
                m.kerr_over_gamma = rel * k;
            }
        }
        if let Some(o) = self.omega {
            s.drive_over_gamma = o;
        }
        if self.both_solvers {
            cfg.solver = SolverChoice::Both;
        }
        cfg.validate()
    }
}

fn parse_axis(text: &str) -> Result<Axis, CliError> {
    let bad = || CliError::Usage(format!("bad --axis `{text}`; expected param:from:to:points"));
    let parts: Vec<&str> = text.split(':').collect();
    let [p, from, to, n] = parts.as_slice() else {
        return Err(bad());
    };
    let param = SweepParam::ALL
        .into_iter()
        .find(|q| q.name() == *p)
        .ok_or_else(|| {
            let names: Vec<_> = SweepParam::ALL.iter().map(|q| q.name()).collect();
            CliError::Usage(format!(
                "unknown sweep parameter `{p}`; expected one of {}",
                names.join(", ")
            ))
        })?;
    let from: f64 = from.parse().map_err(|_| bad())?;
    let to: f64 = to.parse().map_err(|_| bad())?;
    let n: usize = n.parse().map_err(|_| bad())?;
    if n < 2 || !from.is_finite() || !to.is_finite() || from == to {
        return Err(bad());
    }
    Ok(Axis::linspace(param, from, to, n))
}

/// Sizes the global rayon pool from `MAGNON_SIM_THREADS`, if set.
pub fn init_threads() -> Result<(), CliError> {
    if let Ok(v) = std::env::var("MAGNON_SIM_THREADS") {
        let n: usize = v.parse().ok().filter(|n| *n > 0).ok_or_else(|| {
            CliError::Config(format!(
                "MAGNON_SIM_THREADS must be a positive integer, got `{v}`"
            ))
        })?;
        // a pool that already exists (tests, repeated calls) is fine
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    Ok(())
}

fn solver_g2(cfg: &RunConfig, spec: &SystemSpec, solver: Solver) -> Result<f64, CliError> {
    Ok(match (solver, cfg.bath()) {
        (Solver::Lindblad { cutoff }, Some(bath)) => lindblad::g2_thermal(spec, cutoff, Some(&bath))?,
        _ => solver.g2(spec)?,
    })
}

pub fn run(cli: Cli, out: &mut dyn Write) -> Result<(), CliError> {
    let mut cfg = match &cli.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    if let Some(s) = cli.solver {
        cfg.solver = s;
    }
    if let Some(o) = &cli.out {
        cfg.output_dir = o.clone();
    }
    if !cli.format.is_empty() {
        cfg.formats = cli.format.clone();
    }
    let w = |e: std::io::Error| CliError::Io(e.to_string());

    match cli.command {
        Command::G2(ov) => {
            ov.apply(&mut cfg)?;
            let spec = cfg.spec();
            let mut values = Vec::new();
            for solver in cfg.solvers(&spec) {
                let v = solver_g2(&cfg, &spec, solver)?;
                writeln!(out, "g2 [{}] = {}", solver.name(), output::num(v)).map_err(w)?;
                values.push(v);
            }
            if let [a, b] = values[..] {
                let rel = (a - b).abs() / a.abs().max(b.abs());
                writeln!(out, "relative difference = {rel:.3e}").map_err(w)?;
            }
            if cfg.bath().is_some() && cfg.solver == SolverChoice::Weakdrive {
                writeln!(out, "note: the weak-drive solver ignores the thermal bath").map_err(w)?;
            }
        }
        Command::Figure { name } => {
            let fig = figures::build(&name, &cfg)?;
            let snapshot = serde_json::to_value(&cfg).map_err(|e| CliError::Io(e.to_string()))?;
            let files = output::write_figure(&fig, &cfg.output_dir, &cfg.formats, &snapshot)?;
            writeln!(out, "figure {}: {}", fig.name, fig.title).map_err(w)?;
            for line in fig.diagnostics.iter().chain(&fig.warnings) {
                writeln!(out, "  {line}").map_err(w)?;
            }
            for f in files {
                writeln!(out, "  wrote {}", f.display()).map_err(w)?;
            }
        }
        Command::Sweep {
            axes,
            observable,
            name,
            overrides,
        } => {
            overrides.apply(&mut cfg)?;
            let axes: Vec<Axis> = if axes.is_empty() {
                cfg.axes.iter().map(|a| a.to_axis()).collect()
            } else {
                axes.iter().map(|a| parse_axis(a)).collect::<Result<_, _>>()?
            };
            if axes.is_empty() {
                return Err(CliError::Usage(
                    "sweep needs --axis or [[axes]] in the config".into(),
                ));
            }
            let observable = match observable {
                Some(ObservableArg::G2) => Observable::G2,
                Some(ObservableArg::Contrast) => Observable::Contrast,
                None => cfg.observable,
            };
            let spec = cfg.spec();
            let mut results: Vec<(String, SweepResult)> = Vec::new();
            for solver in cfg.solvers(&spec) {
                let r = nonreciprocity::sweep(&spec, &axes, observable, solver)?;
                let col = match (solver, observable) {
                    (Solver::WeakDrive, Observable::G2) => "g2_weakdrive",
                    (Solver::WeakDrive, Observable::Contrast) => "contrast_weakdrive",
                    (Solver::Lindblad { .. }, Observable::G2) => "g2_lindblad",
                    (Solver::Lindblad { .. }, Observable::Contrast) => "contrast_lindblad",
                };
                results.push((col.into(), r));
            }
            let snapshot = serde_json::to_value(&cfg).map_err(|e| CliError::Io(e.to_string()))?;
            let files = output::write_sweep(&name, &results, &cfg.output_dir, &cfg.formats, &snapshot)?;
            let failed: usize = results.iter().map(|(_, r)| r.failures.len()).sum();
            writeln!(out, "sweep {name}: {} cells, {failed} failed", results[0].1.len()).map_err(w)?;
            for f in files {
                writeln!(out, "  wrote {}", f.display()).map_err(w)?;
            }
        }
        Command::Optimal(ov) => {
            ov.apply(&mut cfg)?;
            let spec = cfg.spec();
            if spec.magnons.len() == 1 {
                let k = spec.magnons[0].kerr;
                match optimal::closed_form_optimum(k, spec.drive, 1.0) {
                    Ok(p) => writeln!(
                        out,
                        "closed form: delta_opt = {:.10}, g_opt = {:.10} ({:?} branch, residual |{:.2e}|)",
                        p.delta,
                        p.g,
                        p.branch,
                        p.residual.0.hypot(p.residual.1)
                    )
                    .map_err(w)?,
                    Err(e) => writeln!(out, "closed form: {e}").map_err(w)?,
                }
                let r = optimal::find_optimum_numeric(
                    &spec,
                    &[
                        FreeParam::new(SweepParam::Delta, -1.0, 1.0),
                        FreeParam::new(SweepParam::G, 0.1, 30.0),
                    ],
                    SearchOptions {
                        grid_points: 80,
                        ..SearchOptions::default()
                    },
                )?;
                writeln!(
                    out,
                    "numeric: delta = {:.10}, g = {:.10}, g2 = {:.3e}",
                    r.argmin[0], r.argmin[1], r.min_value
                )
                .map_err(w)?;
            } else {
                let r = optimal::find_optimum_numeric(
                    &spec,
                    &[FreeParam::new(SweepParam::G, 0.1, 150.0)],
                    SearchOptions::default(),
                )?;
                writeln!(
                    out,
                    "numeric at delta = {}: g1 = g2 = {:.10}, G2 = {:.3e}",
                    spec.cavity_detuning, r.argmin[0], r.min_value
                )
                .map_err(w)?;
            }
        }
        Command::Contrast(ov) => {
            ov.apply(&mut cfg)?;
            let spec = cfg.spec();
            for solver in cfg.solvers(&spec) {
                let c = nonreciprocity::contrast_with(&spec, solver)?;
                writeln!(
                    out,
                    "[{}] g2 forward = {}, g2 backward = {}, contrast = {}",
                    solver.name(),
                    output::num(c.g2_forward),
                    output::num(c.g2_backward),
                    output::num(c.contrast)
                )
                .map_err(w)?;
            }
        }
        Command::Verify { quick, mutate, only } => {
            let opts = VerifyOptions {
                mutation: mutate.map(|MutationArg::FlipKerrSign| Mutation::FlipKerrSign),
                ..VerifyOptions::default()
            };
            let ids: Vec<u8> = if !only.is_empty() {
                only
            } else if quick {
                verify::QUICK.to_vec()
            } else {
                verify::ALL.to_vec()
            };
            let mut failed = 0;
            for id in &ids {
                let r = verify::run(*id, &opts);
                writeln!(out, "{}", r.line()).map_err(w)?;
                out.flush().map_err(w)?;
                if !r.passed {
                    failed += 1;
                }
            }
            writeln!(out, "{} passed, {failed} failed", ids.len() - failed).map_err(w)?;
            if failed > 0 {
                return Err(CliError::Verification(failed, ids.len()));
            }
        }
    }
    Ok(())
}
