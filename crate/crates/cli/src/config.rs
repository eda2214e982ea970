//! TOML run configuration. Every frequency field is in units of Γ and says
//! so in its name; only Γ itself and the bath frequency are absolute (Hz,
//! divided by 2π).

use std::path::{Path, PathBuf};

use magnon_blockade::lindblad::BathSpec;
use magnon_blockade::nonreciprocity::{Axis, Observable, Solver};
use magnon_blockade::{MagnonSpec, SweepParam, SystemSpec};
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum SolverChoice {
    Weakdrive,
    Lindblad,
    Both,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
    Svg,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MagnonConfig {
    pub coupling_over_gamma: f64,
    pub kerr_over_gamma: f64,
    pub decay_over_gamma: f64,
    /// Defaults to the cavity detuning (Δ_c = Δ_m).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detuning_over_gamma: Option<f64>,
}

impl Default for MagnonConfig {
    fn default() -> Self {
        Self {
            coupling_over_gamma: 9.88,
            kerr_over_gamma: 4e-3,
            decay_over_gamma: 1.0,
            detuning_over_gamma: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SystemConfig {
    pub gamma_over_2pi_hz: f64,
    pub delta_over_gamma: f64,
    pub cavity_decay_over_gamma: f64,
    pub drive_over_gamma: f64,
    pub magnons: Vec<MagnonConfig>,
}

impl Default for SystemConfig {
    fn default() -> Self {
        Self {
            gamma_over_2pi_hz: 1e6,
            delta_over_gamma: 0.287,
            cavity_decay_over_gamma: 1.0,
            drive_over_gamma: 0.1,
            magnons: vec![MagnonConfig::default()],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BathConfig {
    pub temperature_k: f64,
    /// Absolute mode frequency ω/2π shared by all modes.
    pub mode_frequency_over_2pi_hz: f64,
}

impl Default for BathConfig {
    fn default() -> Self {
        Self {
            temperature_k: 0.0,
            mode_frequency_over_2pi_hz: 5e8,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AxisConfig {
    pub param: SweepParam,
    pub from: f64,
    pub to: f64,
    pub points: usize,
}

impl AxisConfig {
    pub fn to_axis(&self) -> Axis {
        Axis::linspace(self.param, self.from, self.to, self.points)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub system: SystemConfig,
    pub bath: BathConfig,
    pub solver: SolverChoice,
    /// Per-mode Fock cutoff of the master-equation solver; defaults by size.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cutoff: Option<usize>,
    pub observable: Observable,
    pub axes: Vec<AxisConfig>,
    pub output_dir: PathBuf,
    pub formats: Vec<Format>,
    pub seed: u64,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            system: SystemConfig::default(),
            bath: BathConfig::default(),
            solver: SolverChoice::Weakdrive,
            cutoff: None,
            observable: Observable::G2,
            axes: Vec::new(),
            output_dir: PathBuf::from("out"),
            formats: vec![Format::Csv, Format::Json],
            seed: 20_240_607,
        }
    }
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        Self::parse(&text).map_err(|e| match e {
            CliError::Config(m) => CliError::Config(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    pub fn render(&self) -> String {
        toml::to_string_pretty(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let bad = |field: String, why: &str| Err(CliError::Config(format!("field `{field}`: {why}")));
        let s = &self.system;
        let finite = [
            ("system.gamma_over_2pi_hz", s.gamma_over_2pi_hz),
            ("system.delta_over_gamma", s.delta_over_gamma),
            ("system.cavity_decay_over_gamma", s.cavity_decay_over_gamma),
            ("system.drive_over_gamma", s.drive_over_gamma),
            ("bath.temperature_k", self.bath.temperature_k),
            (
                "bath.mode_frequency_over_2pi_hz",
                self.bath.mode_frequency_over_2pi_hz,
            ),
        ];
        for (name, v) in finite {
            if !v.is_finite() {
                return bad(name.into(), "must be finite");
            }
        }
        if s.gamma_over_2pi_hz <= 0.0 {
            return bad("system.gamma_over_2pi_hz".into(), "must be > 0");
        }
        if s.cavity_decay_over_gamma <= 0.0 {
            return bad("system.cavity_decay_over_gamma".into(), "must be > 0");
        }
        if s.drive_over_gamma < 0.0 {
            return bad("system.drive_over_gamma".into(), "must be >= 0");
        }
        if s.magnons.is_empty() || s.magnons.len() > 2 {
            return bad("system.magnons".into(), "need one or two magnon entries");
        }
        for (i, m) in s.magnons.iter().enumerate() {
            let f = |n: &str| format!("system.magnons[{i}].{n}");
            if !(m.coupling_over_gamma.is_finite() && m.coupling_over_gamma >= 0.0) {
                return bad(f("coupling_over_gamma"), "must be finite and >= 0");
            }
            if !m.kerr_over_gamma.is_finite() {
                return bad(f("kerr_over_gamma"), "must be finite");
            }
            if !(m.decay_over_gamma.is_finite() && m.decay_over_gamma > 0.0) {
                return bad(f("decay_over_gamma"), "must be finite and > 0");
            }
            if m.detuning_over_gamma.is_some_and(|d| !d.is_finite()) {
                return bad(f("detuning_over_gamma"), "must be finite");
            }
        }
        if self.bath.temperature_k < 0.0 {
            return bad("bath.temperature_k".into(), "must be >= 0");
        }
        if self.bath.mode_frequency_over_2pi_hz <= 0.0 {
            return bad("bath.mode_frequency_over_2pi_hz".into(), "must be > 0");
        }
        if self.cutoff == Some(0) {
            return bad("cutoff".into(), "must be >= 1");
        }
        for (i, a) in self.axes.iter().enumerate() {
            if a.points < 2 {
                return bad(format!("axes[{i}].points"), "need at least 2 points");
            }
            if !(a.from.is_finite() && a.to.is_finite()) || a.from == a.to {
                return bad(
                    format!("axes[{i}]"),
                    "`from` and `to` must be finite and distinct",
                );
            }
        }
        Ok(())
    }

    pub fn spec(&self) -> SystemSpec {
        let s = &self.system;
        SystemSpec {
            cavity_detuning: s.delta_over_gamma,
            cavity_decay: s.cavity_decay_over_gamma,
            drive: s.drive_over_gamma,
            magnons: s
                .magnons
                .iter()
                .map(|m| MagnonSpec {
                    detuning: m.detuning_over_gamma.unwrap_or(s.delta_over_gamma),
                    kerr: m.kerr_over_gamma,
                    coupling: m.coupling_over_gamma,
                    decay: m.decay_over_gamma,
                })
                .collect(),
            gamma: 2.0 * std::f64::consts::PI * s.gamma_over_2pi_hz,
        }
    }

    pub fn bath(&self) -> Option<BathSpec> {
        (self.bath.temperature_k > 0.0).then(|| {
            BathSpec::uniform(
                self.bath.temperature_k,
                2.0 * std::f64::consts::PI * self.bath.mode_frequency_over_2pi_hz,
                self.system.magnons.len() + 1,
            )
        })
    }

    pub fn lindblad(&self, spec: &SystemSpec) -> Solver {
        match self.cutoff {
            Some(cutoff) => Solver::Lindblad { cutoff },
            None => Solver::lindblad_default(spec),
        }
    }

    /// Solvers selected by `solver`, weak-drive first.
    pub fn solvers(&self, spec: &SystemSpec) -> Vec<Solver> {
        match self.solver {
            SolverChoice::Weakdrive => vec![Solver::WeakDrive],
            SolverChoice::Lindblad => vec![self.lindblad(spec)],
            SolverChoice::Both => vec![Solver::WeakDrive, self.lindblad(spec)],
        }
    }
}
