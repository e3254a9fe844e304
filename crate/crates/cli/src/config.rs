//! Run configuration: the JSON schema, validation, and conversion into core
//! types.

use std::path::Path;

use num_complex::Complex64;
use relqsim_core::circuits::ShotPlan;
use relqsim_core::estimators::{DbcOptions, PotentialSpec};
use relqsim_core::vqe::{AnsatzSpec, Budget, OptimizerKind};
use relqsim_core::{BoundaryCondition, BoundaryVariant, MeasurementMode, PhysicsConfig, WaveFunction};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Task {
    Evaluate,
    Vqe,
    Sweep,
}

impl std::fmt::Display for Task {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Task::Evaluate => "evaluate",
            Task::Vqe => "vqe",
            Task::Sweep => "sweep",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhysicsSection {
    pub mass: f64,
    #[serde(alias = "light_speed")]
    pub c: f64,
    /// Exactly one of `hbar` and `compton_ratio` must be given.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hbar: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub compton_ratio: Option<f64>,
    pub qubits: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PotentialKind {
    None,
    Uniform,
    Well,
    Harmonic,
    CustomWeights,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PotentialSection {
    pub kind: PotentialKind,
    #[serde(default)]
    pub scale: f64,
    #[serde(default)]
    pub offset: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weights: Option<Vec<f64>>,
    /// Well extent `[start, end)` in scaled position.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub interval: Option<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub center: Option<f64>,
}

impl Default for PotentialSection {
    fn default() -> Self {
        Self { kind: PotentialKind::None, scale: 0.0, offset: 0.0, weights: None, interval: None, center: None }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StateKind {
    Uniform,
    Basis,
    PlaneWave,
    DirichletSine,
    Gaussian,
    Amplitudes,
    /// The configured ansatz at `params` (or its initial parameters).
    Ansatz,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateSection {
    pub kind: StateKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub index: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<i64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub center: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub width: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub real: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub imag: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub params: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OptimizerSection {
    #[serde(default)]
    pub method: OptimizerKind,
    #[serde(default = "default_max_evals")]
    pub max_evals: usize,
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default = "default_restarts")]
    pub restarts: usize,
}

fn default_max_evals() -> usize {
    Budget::default().max_evals
}
fn default_tol() -> f64 {
    Budget::default().tol
}
fn default_restarts() -> usize {
    Budget::default().restarts
}

impl Default for OptimizerSection {
    fn default() -> Self {
        Self {
            method: OptimizerKind::NelderMead,
            max_evals: default_max_evals(),
            tol: default_tol(),
            restarts: default_restarts(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepAxis {
    Qubits,
    Order,
    Shots,
    ComptonRatio,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    pub axis: SweepAxis,
    pub values: Vec<f64>,
    /// What each point runs: `evaluate` (default) or `vqe`.
    #[serde(default = "default_inner")]
    pub inner: Task,
}

fn default_inner() -> Task {
    Task::Evaluate
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    /// Absolute energy tolerance in units of `mc²` for exact mode.
    #[serde(default = "default_abs")]
    pub abs: f64,
    /// Relative tolerance against the dense ground energy (VQE).
    #[serde(default = "default_rel")]
    pub rel: f64,
    /// Allowed deviation in combined standard errors for shot mode.
    #[serde(default = "default_sigma")]
    pub sigma: f64,
}

fn default_abs() -> f64 {
    1e-10
}
fn default_rel() -> f64 {
    1e-6
}
fn default_sigma() -> f64 {
    5.0
}

impl Default for Tolerances {
    fn default() -> Self {
        Self { abs: default_abs(), rel: default_rel(), sigma: default_sigma() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub schema_version: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub task: Option<Task>,
    pub physics: PhysicsSection,
    pub boundary: BoundaryCondition,
    pub order: usize,
    #[serde(default)]
    pub dbc_variant: BoundaryVariant,
    #[serde(default)]
    pub allow_complex: bool,
    #[serde(default = "default_mode")]
    pub mode: MeasurementMode,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub shots: Option<u64>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub potential: PotentialSection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub state: Option<StateSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ansatz: Option<AnsatzSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub optimizer: Option<OptimizerSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepSection>,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub workers: Option<usize>,
    #[serde(default)]
    pub oracle_check: bool,
}

fn default_mode() -> MeasurementMode {
    MeasurementMode::Exact
}

fn invalid(msg: impl Into<String>) -> CliError {
    CliError::ConfigInvalid(msg.into())
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: RunConfig = serde_json::from_str(text).map_err(|e| invalid(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| CliError::Io { path: path.to_path_buf(), source })?;
        Self::from_json(&text)
    }

    /// Checks everything that can be checked before computing.
    pub fn validate(&self) -> Result<()> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(invalid(format!(
                "unsupported schema_version {} (expected {SCHEMA_VERSION})",
                self.schema_version
            )));
        }
        if !(1..=2).contains(&self.order) {
            return Err(invalid(format!("order must be 1 or 2, got {}", self.order)));
        }
        match (self.physics.hbar, self.physics.compton_ratio) {
            (Some(_), None) | (None, Some(_)) => {}
            _ => return Err(invalid("physics needs exactly one of hbar or compton_ratio")),
        }
        self.physics_config()?;
        if self.mode == MeasurementMode::Shots && self.shots.unwrap_or(0) == 0 {
            return Err(invalid("shots mode needs shots >= 1"));
        }
        self.potential_spec()?;
        if let Some(o) = &self.optimizer {
            if o.max_evals == 0 || o.restarts == 0 || o.tol.is_nan() || o.tol <= 0.0 {
                return Err(invalid("optimizer needs max_evals, restarts and tol > 0"));
            }
        }
        if let Some(s) = &self.state {
            if s.kind == StateKind::Ansatz && self.ansatz.is_none() {
                return Err(invalid("state kind 'ansatz' needs an ansatz block"));
            }
        }
        if let Some(s) = &self.sweep {
            if s.values.is_empty() {
                return Err(invalid("sweep needs at least one value"));
            }
            if s.inner == Task::Sweep {
                return Err(invalid("sweep inner task must be evaluate or vqe"));
            }
            for &v in &s.values {
                self.with_axis_value(s.axis, v)?;
            }
        }
        if self.task == Some(Task::Sweep) && self.sweep.is_none() {
            return Err(invalid("sweep task needs a sweep block"));
        }
        Ok(())
    }

    pub fn physics_config(&self) -> Result<PhysicsConfig> {
        let p = &self.physics;
        let r = match (p.hbar, p.compton_ratio) {
            (Some(h), None) => PhysicsConfig::new(p.mass, p.c, h, p.qubits),
            (None, Some(r)) => PhysicsConfig::from_compton_ratio(p.mass, p.c, r, p.qubits),
            _ => return Err(invalid("physics needs exactly one of hbar or compton_ratio")),
        };
        r.map_err(|e| invalid(e.to_string()))
    }

    pub fn shot_plan(&self) -> Result<ShotPlan> {
        match self.mode {
            MeasurementMode::Exact => Ok(ShotPlan::exact()),
            MeasurementMode::Shots => {
                ShotPlan::shots(self.shots.unwrap_or(0), self.seed).map_err(|e| invalid(e.to_string()))
            }
        }
    }

    pub fn dbc_options(&self) -> DbcOptions {
        DbcOptions { variant: self.dbc_variant, allow_complex: self.allow_complex }
    }

    pub fn potential_spec(&self) -> Result<PotentialSpec> {
        let q = self.physics.qubits;
        let p = &self.potential;
        let r = match p.kind {
            PotentialKind::None => Ok(PotentialSpec::none(q)),
            PotentialKind::Uniform => Ok(PotentialSpec::uniform(q, p.scale)),
            PotentialKind::Well => {
                let [a, b] = p.interval.unwrap_or([0.25, 0.75]);
                PotentialSpec::well(q, a, b, p.scale, p.offset)
            }
            PotentialKind::Harmonic => PotentialSpec::harmonic(q, p.center.unwrap_or(0.5), p.scale, p.offset),
            PotentialKind::CustomWeights => {
                let w = p.weights.clone().ok_or_else(|| invalid("custom_weights needs a weights array"))?;
                if w.len() != 1usize << q {
                    return Err(invalid(format!("custom weights have {} entries, grid has {}", w.len(), 1usize << q)));
                }
                PotentialSpec::new(w, p.scale, p.offset)
            }
        };
        let spec = r.map_err(|e| invalid(e.to_string()))?;
        if p.kind == PotentialKind::Uniform && p.offset != 0.0 {
            return PotentialSpec::new(spec.weights().to_vec(), p.scale, p.offset).map_err(|e| invalid(e.to_string()));
        }
        Ok(spec)
    }

    pub fn ansatz_spec(&self) -> AnsatzSpec {
        self.ansatz.clone().unwrap_or_else(AnsatzSpec::grid_direct)
    }

    pub fn budget(&self) -> (OptimizerKind, Budget) {
        let o = self.optimizer.unwrap_or_default();
        (o.method, Budget { max_evals: o.max_evals, tol: o.tol, restarts: o.restarts })
    }

    /// The state evaluated by the `evaluate` task. Defaults to uniform.
    pub fn build_state(&self) -> Result<WaveFunction> {
        let config = self.physics_config()?;
        let q = config.qubits();
        let Some(s) = &self.state else {
            return Ok(WaveFunction::uniform(q)?);
        };
        let state = match s.kind {
            StateKind::Uniform => WaveFunction::uniform(q),
            StateKind::Basis => WaveFunction::basis(q, s.index.ok_or_else(|| invalid("basis state needs index"))?),
            StateKind::PlaneWave => WaveFunction::plane_wave(q, s.k.unwrap_or(1)),
            StateKind::DirichletSine => WaveFunction::dirichlet_sine(q),
            StateKind::Gaussian => {
                let params = [s.center.unwrap_or(0.5), s.width.unwrap_or(0.1)];
                relqsim_core::vqe::build_ansatz(&AnsatzSpec::gaussian(), &params, &config)
            }
            StateKind::Amplitudes => {
                let re = s.real.clone().ok_or_else(|| invalid("amplitudes state needs 'real'"))?;
                let im = s.imag.clone().unwrap_or_else(|| vec![0.0; re.len()]);
                if im.len() != re.len() {
                    return Err(invalid("'real' and 'imag' lengths differ"));
                }
                if re.len() != 1usize << q {
                    return Err(invalid(format!("{} amplitudes for a {}-point grid", re.len(), 1usize << q)));
                }
                WaveFunction::new(re.into_iter().zip(im).map(|(a, b)| Complex64::new(a, b)).collect())
            }
            StateKind::Ansatz => {
                let spec = self.ansatz_spec();
                let params = s.params.clone().unwrap_or_else(|| spec.initial_params.clone());
                relqsim_core::vqe::build_ansatz(&spec, &params, &config)
            }
        };
        state.map_err(|e| invalid(e.to_string()))
    }

    /// Copy of this config with one sweep axis set to `value`.
    pub fn with_axis_value(&self, axis: SweepAxis, value: f64) -> Result<RunConfig> {
        let mut c = self.clone();
        c.sweep = None;
        c.task = None;
        let as_int = |v: f64| -> Result<u64> {
            if v.fract() != 0.0 || v < 0.0 {
                return Err(invalid(format!("sweep value {v} must be a nonnegative integer")));
            }
            Ok(v as u64)
        };
        match axis {
            SweepAxis::Qubits => c.physics.qubits = as_int(value)? as u32,
            SweepAxis::Order => c.order = as_int(value)? as usize,
            SweepAxis::Shots => {
                c.mode = MeasurementMode::Shots;
                c.shots = Some(as_int(value)?);
            }
            SweepAxis::ComptonRatio => {
                c.physics.hbar = None;
                c.physics.compton_ratio = Some(value);
            }
        }
        c.validate()?;
        Ok(c)
    }

    pub fn potential_is_free(&self) -> bool {
        self.potential.kind == PotentialKind::None || self.potential.scale == 0.0
    }

    pub fn boundary(&self) -> BoundaryCondition {
        self.boundary
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn base() -> String {
        r#"{"schema_version":1,"physics":{"mass":1,"c":1,"compton_ratio":0.2,"qubits":3},"boundary":"dbc","order":1}"#.into()
    }

    #[test]
    fn minimal_config_parses() {
        let c = RunConfig::from_json(&base()).unwrap();
        assert_eq!(c.mode, MeasurementMode::Exact);
        assert_eq!(c.dbc_variant, BoundaryVariant::Full);
        assert_eq!(c.physics_config().unwrap().compton_ratio(), 0.2);
    }

    #[test]
    fn rejects_bad_configs() {
        let cases = [
            base().replace("\"schema_version\":1", "\"schema_version\":7"),
            base().replace("\"order\":1", "\"order\":3"),
            base().replace("\"compton_ratio\":0.2", "\"compton_ratio\":0.2,\"hbar\":1"),
            base().replace("\"boundary\":\"dbc\"", "\"boundary\":\"open\""),
            base().replace("\"order\":1", "\"order\":1,\"mode\":\"shots\""),
            base().replace("\"order\":1", "\"order\":1,\"typo\":true"),
            base().replace(
                "\"order\":1",
                "\"order\":1,\"potential\":{\"kind\":\"custom_weights\",\"scale\":1,\"weights\":[0.5,0.5]}",
            ),
        ];
        for text in cases {
            let err = RunConfig::from_json(&text).unwrap_err();
            assert_eq!(err.exit_code(), 2, "{text}");
        }
    }

    #[test]
    fn sweep_axis_overrides() {
        let c = RunConfig::from_json(&base()).unwrap();
        assert_eq!(c.with_axis_value(SweepAxis::Qubits, 5.0).unwrap().physics.qubits, 5);
        assert!(c.with_axis_value(SweepAxis::Qubits, 2.5).is_err());
        let s = c.with_axis_value(SweepAxis::Shots, 1000.0).unwrap();
        assert_eq!(s.shot_plan().unwrap().shot_count, 1000);
        let r = c.with_axis_value(SweepAxis::ComptonRatio, 0.05).unwrap();
        assert_eq!(r.physics_config().unwrap().compton_ratio(), 0.05);
    }

    #[test]
    fn uniform_potential_keeps_offset() {
        let text = base().replace("\"order\":1", "\"order\":1,\"potential\":{\"kind\":\"uniform\",\"scale\":2,\"offset\":-1}");
        let p = RunConfig::from_json(&text).unwrap().potential_spec().unwrap();
        assert_eq!(p.offset(), -1.0);
        assert_eq!(p.scale(), 2.0);
    }
}
