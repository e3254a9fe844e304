//! Task execution: evaluate, vqe and sweep, plus the oracle comparison and
//! result serialisation.

use std::path::{Path, PathBuf};

use rayon::prelude::*;
use relqsim_core::operators::MAX_DENSE_QUBITS;
use relqsim_core::oracle::{exact_ground, exact_sqrt_kinetic_ground, hamiltonian, truncation_bound};
use relqsim_core::vqe::{build_ansatz, derive_seed, minimize, Objective, RestartSummary};
use relqsim_core::{
    estimators::literal_variant_residual, total_energy, BoundaryCondition, BoundaryVariant, CoefficientSet,
    EnergyBreakdown, MeasurementMode, OptimizerKind, WaveFunction,
};
use serde::{Deserialize, Serialize};

use crate::config::{RunConfig, SweepAxis, Task, SCHEMA_VERSION};
use crate::error::{CliError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Meta {
    pub software: String,
    pub version: String,
    pub schema_version: u32,
    pub task: Task,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OracleTarget {
    /// Dense `⟨ψ|H|ψ⟩` for the evaluated state.
    StateExpectation,
    /// Lowest eigenvalue of the dense Hamiltonian.
    GroundEnergy,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TruncationReport {
    pub sqrt_ground: f64,
    pub truncated_ground: f64,
    pub gap: f64,
    pub bound: f64,
    pub within_bound: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleReport {
    pub target: OracleTarget,
    pub reference_energy: f64,
    pub estimate: f64,
    pub abs_gap: f64,
    pub rel_gap: f64,
    /// Expected offset of the literal boundary variant; zero otherwise.
    pub predicted_residual: f64,
    pub tolerance: f64,
    pub pass: bool,
    pub ground_energy: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub truncation: Option<TruncationReport>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VqeBlock {
    pub optimizer: OptimizerKind,
    pub best_energy: f64,
    pub best_params: Vec<f64>,
    pub iterations: usize,
    pub evaluations: usize,
    pub converged: bool,
    pub seed: u64,
    pub best_eval_seed: u64,
    pub history: Vec<f64>,
    pub restarts: Vec<RestartSummary>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub value: f64,
    pub kinetic: f64,
    pub potential: f64,
    pub total: f64,
    pub std_error: f64,
    pub oracle_gap: Option<f64>,
    pub validity_ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepBlock {
    pub axis: SweepAxis,
    pub inner: Task,
    pub points: Vec<SweepPoint>,
}

/// The full result document written to `--out`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunOutput {
    pub config: RunConfig,
    pub coefficients: CoefficientSet,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub energy: Option<EnergyBreakdown>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub vqe: Option<VqeBlock>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepBlock>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub oracle: Option<OracleReport>,
    pub warnings: Vec<String>,
    pub meta: Meta,
}

impl RunOutput {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("result serialises");
        s.push('\n');
        s
    }

    /// Sweep table as CSV, `None` for other tasks.
    pub fn sweep_csv(&self) -> Option<String> {
        let sweep = self.sweep.as_ref()?;
        let mut w = csv::Writer::from_writer(Vec::new());
        let axis = serde_json::to_value(sweep.axis).ok()?.as_str()?.to_string();
        w.write_record([axis.as_str(), "kinetic", "potential", "total", "std_error", "oracle_gap"]).ok()?;
        for p in &sweep.points {
            w.write_record([
                p.value.to_string(),
                p.kinetic.to_string(),
                p.potential.to_string(),
                p.total.to_string(),
                p.std_error.to_string(),
                p.oracle_gap.map(|g| g.to_string()).unwrap_or_default(),
            ])
            .ok()?;
        }
        String::from_utf8(w.into_inner().ok()?).ok()
    }

    /// One-line human summary.
    pub fn summary(&self) -> String {
        let mut s = match (&self.sweep, &self.energy) {
            (Some(sw), _) => {
                let totals: Vec<String> = sw.points.iter().map(|p| format!("{:.10e}", p.total)).collect();
                format!("{}: {} points, total=[{}]", self.meta.task, sw.points.len(), totals.join(", "))
            }
            (None, Some(e)) => format!(
                "{}: total={:.12e} kinetic={:.12e} potential={:.12e} std_error={:.3e} validity={:.4}",
                self.meta.task, e.total, e.kinetic, e.potential, e.std_error, e.validity_ratio
            ),
            (None, None) => format!("{}: no result", self.meta.task),
        };
        if let Some(o) = &self.oracle {
            s.push_str(&format!(" oracle_gap={:.3e} oracle={}", o.abs_gap, if o.pass { "pass" } else { "FAIL" }));
        }
        if !self.warnings.is_empty() {
            s.push_str(&format!(" warnings={}", self.warnings.len()));
        }
        s
    }
}

/// Options coming from the command line; they override the config file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub workers: Option<usize>,
    pub oracle_check: bool,
    pub out: Option<PathBuf>,
}

pub fn apply_overrides(mut cfg: RunConfig, task: Task, ov: &Overrides) -> Result<RunConfig> {
    if let Some(t) = cfg.task {
        if t != task {
            return Err(CliError::ConfigInvalid(format!("config is for task '{t}', command is '{task}'")));
        }
    }
    cfg.task = Some(task);
    if let Some(s) = ov.seed {
        cfg.seed = s;
    }
    if let Some(w) = ov.workers {
        cfg.workers = Some(w);
    }
    if matches!(cfg.workers, Some(0)) {
        return Err(CliError::ConfigInvalid("workers must be at least 1".into()));
    }
    cfg.oracle_check |= ov.oracle_check;
    if task == Task::Sweep && cfg.sweep.is_none() {
        return Err(CliError::ConfigInvalid("sweep task needs a sweep block".into()));
    }
    cfg.validate()?;
    Ok(cfg)
}

fn warnings_for(e: &EnergyBreakdown) -> Vec<String> {
    let mut w = Vec::new();
    if e.validity_warning {
        w.push(format!(
            "validity ratio <p^2>/(mc)^2 = {:.4} exceeds 0.1; the truncated expansion is unreliable",
            e.validity_ratio
        ));
    }
    if e.complex_override {
        w.push("complex amplitudes accepted under dbc by override; boundary estimators assume real amplitudes".into());
    }
    w
}

/// Compares an estimate with the dense-matrix oracle.
pub fn compare_with_oracle(
    cfg: &RunConfig,
    state: &WaveFunction,
    energy: &EnergyBreakdown,
    target: OracleTarget,
) -> Result<OracleReport> {
    let config = cfg.physics_config()?;
    let pot = cfg.potential_spec()?;
    let bc = cfg.boundary();
    let ground = exact_ground(&config, bc, cfg.order, &pot)?;
    let reference_energy = match target {
        OracleTarget::StateExpectation => hamiltonian(&config, bc, cfg.order, &pot)?.expectation(state)?,
        OracleTarget::GroundEnergy => ground.ground_energy,
    };
    let predicted_residual = if bc == BoundaryCondition::Dbc && cfg.dbc_variant == BoundaryVariant::PaperLiteral {
        literal_variant_residual(state, &config, cfg.order)
    } else {
        0.0
    };
    let gap = energy.total - reference_energy;
    let deviation = (gap - predicted_residual).abs();
    let mc2 = config.rest_energy();
    let tolerance = match (cfg.mode, target) {
        (MeasurementMode::Exact, OracleTarget::StateExpectation) => cfg.tolerances.abs * mc2,
        (MeasurementMode::Exact, OracleTarget::GroundEnergy) => {
            cfg.tolerances.rel * reference_energy.abs() + cfg.tolerances.abs * mc2
        }
        (MeasurementMode::Shots, _) => cfg.tolerances.sigma * energy.std_error + cfg.tolerances.abs * mc2,
    };
    let truncation = if cfg.order == 2 {
        let sqrt_ground = exact_sqrt_kinetic_ground(&config, bc, &pot)?.ground_energy;
        let gap = (ground.ground_energy - sqrt_ground).abs();
        let bound = truncation_bound(&config, bc);
        Some(TruncationReport {
            sqrt_ground,
            truncated_ground: ground.ground_energy,
            gap,
            bound,
            within_bound: gap <= bound,
        })
    } else {
        None
    };
    Ok(OracleReport {
        target,
        reference_energy,
        estimate: energy.total,
        abs_gap: gap.abs(),
        rel_gap: if reference_energy != 0.0 { (gap / reference_energy).abs() } else { gap.abs() },
        predicted_residual,
        tolerance,
        pass: deviation <= tolerance,
        ground_energy: ground.ground_energy,
        truncation,
    })
}

struct Single {
    state: WaveFunction,
    energy: EnergyBreakdown,
    vqe: Option<VqeBlock>,
}

fn evaluate_single(cfg: &RunConfig) -> Result<Single> {
    let config = cfg.physics_config()?;
    let state = cfg.build_state()?;
    let energy = total_energy(
        &state,
        &config,
        cfg.boundary(),
        cfg.order,
        &cfg.potential_spec()?,
        &cfg.shot_plan()?,
        &cfg.dbc_options(),
    )?;
    Ok(Single { state, energy, vqe: None })
}

fn vqe_single(cfg: &RunConfig) -> Result<Single> {
    let config = cfg.physics_config()?;
    let objective = Objective {
        config,
        bc: cfg.boundary(),
        order: cfg.order,
        potential: cfg.potential_spec()?,
        plan: cfg.shot_plan()?,
        dbc: cfg.dbc_options(),
    };
    let spec = cfg.ansatz_spec();
    let (method, budget) = cfg.budget();
    let r = minimize(&spec, &objective, method, &budget, cfg.seed)?;
    let state = build_ansatz(&spec, &r.best_params, &config)?;
    let block = VqeBlock {
        optimizer: method,
        best_energy: r.best_energy,
        best_params: r.best_params,
        iterations: r.iterations,
        evaluations: r.evaluations,
        converged: r.converged,
        seed: r.seed,
        best_eval_seed: r.best_eval_seed,
        history: r.history,
        restarts: r.restarts,
    };
    Ok(Single { state, energy: r.breakdown, vqe: Some(block) })
}

fn run_single(cfg: &RunConfig, task: Task) -> Result<Single> {
    match task {
        Task::Vqe => vqe_single(cfg),
        _ => evaluate_single(cfg),
    }
}

fn oracle_target(task: Task) -> OracleTarget {
    match task {
        Task::Vqe => OracleTarget::GroundEnergy,
        _ => OracleTarget::StateExpectation,
    }
}

fn run_sweep(cfg: &RunConfig) -> Result<(SweepBlock, Vec<String>)> {
    let sweep = cfg.sweep.clone().expect("validated");
    let points: Vec<Result<(SweepPoint, Vec<String>)>> = sweep
        .values
        .par_iter()
        .enumerate()
        .map(|(i, &value)| {
            let mut point_cfg = cfg.with_axis_value(sweep.axis, value)?;
            if point_cfg.mode == MeasurementMode::Shots {
                point_cfg.seed = derive_seed(cfg.seed, i as u64);
            }
            let single = run_single(&point_cfg, sweep.inner)?;
            let oracle_gap = if point_cfg.physics.qubits <= MAX_DENSE_QUBITS {
                let rep = compare_with_oracle(&point_cfg, &single.state, &single.energy, oracle_target(sweep.inner))?;
                Some(single.energy.total - rep.reference_energy)
            } else {
                None
            };
            let e = &single.energy;
            let warnings = warnings_for(e).into_iter().map(|w| format!("point {i} ({value}): {w}")).collect();
            Ok((
                SweepPoint {
                    value,
                    kinetic: e.kinetic,
                    potential: e.potential,
                    total: e.total,
                    std_error: e.std_error,
                    oracle_gap,
                    validity_ratio: e.validity_ratio,
                },
                warnings,
            ))
        })
        .collect();
    let mut out = Vec::with_capacity(points.len());
    let mut warnings = Vec::new();
    for p in points {
        let (point, w) = p?;
        out.push(point);
        warnings.extend(w);
    }
    Ok((SweepBlock { axis: sweep.axis, inner: sweep.inner, points: out }, warnings))
}

fn execute_inner(cfg: &RunConfig, task: Task) -> Result<RunOutput> {
    let config = cfg.physics_config()?;
    let coefficients = CoefficientSet::new(&config, cfg.order)?;
    let meta = Meta {
        software: "relqsim".into(),
        version: relqsim_core::VERSION.into(),
        schema_version: SCHEMA_VERSION,
        task,
    };
    if task == Task::Sweep {
        let (sweep, warnings) = run_sweep(cfg)?;
        return Ok(RunOutput {
            config: cfg.clone(),
            coefficients,
            energy: None,
            vqe: None,
            sweep: Some(sweep),
            oracle: None,
            warnings,
            meta,
        });
    }
    let single = run_single(cfg, task)?;
    let oracle = if cfg.oracle_check {
        Some(compare_with_oracle(cfg, &single.state, &single.energy, oracle_target(task))?)
    } else {
        None
    };
    Ok(RunOutput {
        config: cfg.clone(),
        coefficients,
        warnings: warnings_for(&single.energy),
        energy: Some(single.energy),
        vqe: single.vqe,
        sweep: None,
        oracle,
        meta,
    })
}

/// Runs `task` on an already validated config, inside a worker pool when
/// `workers` is set.
pub fn execute(cfg: &RunConfig, task: Task) -> Result<RunOutput> {
    match cfg.workers {
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| CliError::ConfigInvalid(format!("cannot start {n} workers: {e}")))?;
            pool.install(|| execute_inner(cfg, task))
        }
        None => execute_inner(cfg, task),
    }
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|source| CliError::Io { path: dir.to_path_buf(), source })?;
    }
    std::fs::write(path, contents).map_err(|source| CliError::Io { path: path.to_path_buf(), source })
}

/// Path of the sweep table written next to the result file.
pub fn csv_path(out: &Path) -> PathBuf {
    out.with_extension("csv")
}

/// Loads the config, runs the task and writes the result files. Returns the
/// output and the path of the JSON result.
pub fn run(task: Task, config_path: &Path, ov: &Overrides) -> Result<(RunOutput, PathBuf)> {
    let cfg = apply_overrides(RunConfig::load(config_path)?, task, ov)?;
    let out_path = match (&ov.out, &cfg.output) {
        (Some(p), _) => p.clone(),
        (None, Some(p)) => PathBuf::from(p),
        (None, None) => return Err(CliError::ConfigInvalid("no output path: pass --out or set 'output'".into())),
    };
    let output = execute(&cfg, task)?;
    write_file(&out_path, &output.to_json())?;
    if let Some(csv) = output.sweep_csv() {
        write_file(&csv_path(&out_path), &csv)?;
    }
    Ok((output, out_path))
}
