//! Variational minimisation of the total energy over ansatz parameters.

mod ansatz;
mod optimizer;

pub use ansatz::{build_ansatz, hyperspherical_amplitudes, hyperspherical_angles, AnsatzKind, AnsatzSpec, InitStrategy};
pub use optimizer::{NelderMead, OptOutcome, Spsa};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::circuits::ShotPlan;
use crate::error::{Error, Result};
use crate::estimators::{total_energy, DbcOptions, EnergyBreakdown, PotentialSpec};
use crate::grid::PhysicsConfig;
use crate::operators::BoundaryCondition;

/// Nelder–Mead on shot-noise objectives is refused below this many shots.
pub const MIN_SHOTS_FOR_NELDER_MEAD: u64 = 100_000;

/// Everything that defines the energy being minimised.
#[derive(Debug, Clone, PartialEq)]
pub struct Objective {
    pub config: PhysicsConfig,
    pub bc: BoundaryCondition,
    pub order: usize,
    pub potential: PotentialSpec,
    pub plan: ShotPlan,
    pub dbc: DbcOptions,
}

impl Objective {
    /// Energy at `params`; shot-mode evaluations use `plan_seed`.
    pub fn evaluate(&self, spec: &AnsatzSpec, params: &[f64], plan_seed: u64) -> Result<EnergyBreakdown> {
        let state = build_ansatz(spec, params, &self.config)?;
        total_energy(
            &state,
            &self.config,
            self.bc,
            self.order,
            &self.potential,
            &self.plan.reseeded(plan_seed),
            &self.dbc,
        )
    }

    /// Characteristic energy used to normalise SPSA gains.
    fn energy_scale(&self) -> f64 {
        let k = self.config.rest_energy() * self.config.compton_ratio().powi(2);
        let v = self.potential.scale().abs() / self.config.grid_points() as f64;
        (k + v).max(f64::MIN_POSITIVE)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OptimizerKind {
    #[default]
    NelderMead,
    Spsa,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Budget {
    /// Per restart.
    pub max_evals: usize,
    pub tol: f64,
    pub restarts: usize,
}

impl Default for Budget {
    fn default() -> Self {
        Self { max_evals: 20_000, tol: 1e-9, restarts: 8 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RestartSummary {
    pub seed: u64,
    pub best_energy: f64,
    pub evaluations: usize,
    pub iterations: usize,
    pub converged: bool,
    pub history: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VqeResult {
    pub best_energy: f64,
    pub best_params: Vec<f64>,
    pub breakdown: EnergyBreakdown,
    pub iterations: usize,
    pub evaluations: usize,
    pub converged: bool,
    /// History of the winning restart.
    pub history: Vec<f64>,
    pub seed: u64,
    /// Seed of the evaluation that produced `best_energy`.
    pub best_eval_seed: u64,
    pub restarts: Vec<RestartSummary>,
}

/// SplitMix64 step, used to derive independent seeds from one master seed.
pub fn derive_seed(master: u64, stream: u64) -> u64 {
    let mut z = master ^ stream.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

struct RestartRun {
    summary: RestartSummary,
    x: Vec<f64>,
    best_eval_seed: u64,
}

fn run_restart(
    spec: &AnsatzSpec,
    objective: &Objective,
    optimizer: OptimizerKind,
    budget: &Budget,
    restart: usize,
    seed: u64,
) -> Result<RestartRun> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let x0 = spec.starting_params(objective.config.qubits(), restart, &mut rng)?;
    let exact = objective.plan.is_exact();

    // In shot mode every call draws fresh samples; remember which seed
    // produced the best value so it can be re-evaluated exactly.
    let mut counter = 0u64;
    let mut best_seen = (f64::INFINITY, seed, x0.clone());
    let mut f = |x: &[f64]| -> Result<f64> {
        counter += 1;
        let s = if exact { 0 } else { derive_seed(seed, counter) };
        let e = match objective.evaluate(spec, x, s) {
            Ok(b) => b.total,
            // Outside the ansatz domain: infeasible, not fatal.
            Err(Error::NonpositiveWidth(_)) => return Ok(f64::INFINITY),
            Err(e) => return Err(e),
        };
        if e < best_seen.0 {
            best_seen = (e, s, x.to_vec());
        }
        Ok(e)
    };

    let out = match optimizer {
        OptimizerKind::NelderMead => {
            let nm = NelderMead::default();
            // Re-seed the simplex around the incumbent until it stops moving.
            let mut out = nm.minimize(&mut f, &x0, budget.max_evals, budget.tol)?;
            while out.converged && out.evaluations < budget.max_evals {
                let remaining = budget.max_evals - out.evaluations;
                let next = nm.minimize(&mut f, &out.x, remaining, budget.tol)?;
                let improved = next.fx < out.fx - 1e-15 * out.fx.abs().max(1e-300);
                let mut history = std::mem::take(&mut out.history);
                history.extend(next.history.iter().map(|v| v.min(out.fx)));
                out = OptOutcome {
                    x: if next.fx < out.fx { next.x } else { out.x },
                    fx: next.fx.min(out.fx),
                    evaluations: out.evaluations + next.evaluations,
                    iterations: out.iterations + next.iterations,
                    converged: next.converged,
                    history,
                };
                if !improved {
                    break;
                }
            }
            out
        }
        OptimizerKind::Spsa => {
            let scale = objective.energy_scale();
            let mut scaled = |x: &[f64]| f(x).map(|e| e / scale);
            let mut out = Spsa::default().minimize(&mut scaled, &x0, budget.max_evals, budget.tol, &mut rng)?;
            out.fx *= scale;
            out.history.iter_mut().for_each(|h| *h *= scale);
            out
        }
    };
    let (best_energy, best_eval_seed, x) = best_seen;
    Ok(RestartRun {
        summary: RestartSummary {
            seed,
            best_energy,
            evaluations: out.evaluations,
            iterations: out.iterations,
            converged: out.converged,
            history: out.history,
        },
        x,
        best_eval_seed,
    })
}

/// Multi-start minimisation. Restarts run in parallel and are merged by
/// index, so the result depends only on `seed`.
pub fn minimize(
    spec: &AnsatzSpec,
    objective: &Objective,
    optimizer: OptimizerKind,
    budget: &Budget,
    seed: u64,
) -> Result<VqeResult> {
    if budget.max_evals == 0 || budget.restarts == 0 || budget.tol.is_nan() || budget.tol <= 0.0 {
        return Err(Error::InvalidPlan("budget needs max_evals, restarts and tol > 0".into()));
    }
    if optimizer == OptimizerKind::NelderMead
        && !objective.plan.is_exact()
        && objective.plan.shot_count < MIN_SHOTS_FOR_NELDER_MEAD
    {
        return Err(Error::InvalidPlan(format!(
            "nelder_mead needs at least {MIN_SHOTS_FOR_NELDER_MEAD} shots; use spsa"
        )));
    }
    let runs: Vec<Result<RestartRun>> = (0..budget.restarts)
        .into_par_iter()
        .map(|r| run_restart(spec, objective, optimizer, budget, r, derive_seed(seed, r as u64)))
        .collect();
    let runs = runs.into_iter().collect::<Result<Vec<_>>>()?;

    let best = runs
        .iter()
        .enumerate()
        .min_by(|(_, a), (_, b)| a.summary.best_energy.total_cmp(&b.summary.best_energy))
        .map(|(i, _)| i)
        .expect("at least one restart");
    let winner = &runs[best];
    let breakdown = objective.evaluate(spec, &winner.x, winner.best_eval_seed)?;
    let best_energy = breakdown.total;
    Ok(VqeResult {
        best_energy,
        best_params: winner.x.clone(),
        iterations: runs.iter().map(|r| r.summary.iterations).sum(),
        evaluations: runs.iter().map(|r| r.summary.evaluations).sum(),
        converged: winner.summary.converged,
        history: winner.summary.history.clone(),
        seed,
        best_eval_seed: winner.best_eval_seed,
        breakdown,
        restarts: runs.into_iter().map(|r| r.summary).collect(),
    })
}
