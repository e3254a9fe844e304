//! Kinetic and potential energies for {non-relativistic, relativistic} ×
//! {PBC, DBC}.
//!
//! Every estimator is written as a linear combination of primitive probes
//! (Hadamard-test real parts and reference-state overlaps). In exact mode
//! the probes are read directly off the amplitudes; in shot mode they come
//! from the simulated circuits. Both paths feed the same combinations.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::circuits::{
    boundary_combination, measure_diagonal, measure_probes, BoundaryVariant, Combination, Estimate,
    MeasuredOperator, MeasurementMode, Probe, RefLabel, ShotPlan,
};
use crate::coefficients::{alpha_f64, beta, gamma, VALIDITY_THRESHOLD};
use crate::error::{Error, Result};
use crate::grid::{PhysicsConfig, WaveFunction, NORM_TOLERANCE};
use crate::operators::{expectation_adjoint_shift, BoundaryCondition};

/// Diagonal potential `V = 𝒮 ρ_V + offset` with `ρ_V = Σ_w 𝒱_w |w⟩⟨w|`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PotentialSpec {
    weights: Vec<f64>,
    scale: f64,
    offset: f64,
}

impl PotentialSpec {
    pub fn new(weights: Vec<f64>, scale: f64, offset: f64) -> Result<Self> {
        let n = weights.len();
        if n < 4 || !n.is_power_of_two() {
            return Err(Error::InvalidPotential(format!("{n} weights is not a power-of-two grid")));
        }
        if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(Error::InvalidPotential("weights must be finite and nonnegative".into()));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > NORM_TOLERANCE {
            return Err(Error::InvalidPotential(format!("weights sum to {total}, not 1")));
        }
        if !(scale.is_finite() && offset.is_finite()) {
            return Err(Error::InvalidPotential("scale and offset must be finite".into()));
        }
        Ok(Self { weights, scale, offset })
    }

    /// Normalises arbitrary nonnegative shape values into `𝒱_w`.
    pub fn from_shape(shape: Vec<f64>, scale: f64, offset: f64) -> Result<Self> {
        let total: f64 = shape.iter().sum();
        if !(total.is_finite() && total > 0.0) {
            return Err(Error::InvalidPotential("potential shape has no weight".into()));
        }
        if shape.iter().any(|w| *w < 0.0) {
            return Err(Error::InvalidPotential("weights must be nonnegative".into()));
        }
        Self::new(shape.into_iter().map(|w| w / total).collect(), scale, offset)
    }

    /// Free particle: uniform weights with zero scale.
    pub fn none(qubits: u32) -> Self {
        Self::uniform(qubits, 0.0)
    }

    pub fn uniform(qubits: u32, scale: f64) -> Self {
        let n = 1usize << qubits;
        Self { weights: vec![1.0 / n as f64; n], scale, offset: 0.0 }
    }

    /// Uniform weight on grid points with `start ≤ x_j < end`, zero outside.
    /// A negative scale makes an attractive well.
    pub fn well(qubits: u32, start: f64, end: f64, scale: f64, offset: f64) -> Result<Self> {
        let n = 1usize << qubits;
        let shape = (0..n)
            .map(|j| {
                let x = j as f64 / n as f64;
                if x >= start && x < end { 1.0 } else { 0.0 }
            })
            .collect();
        Self::from_shape(shape, scale, offset)
    }

    /// `𝒱_j ∝ (x_j − center)²`.
    pub fn harmonic(qubits: u32, center: f64, scale: f64, offset: f64) -> Result<Self> {
        let n = 1usize << qubits;
        let shape = (0..n).map(|j| (j as f64 / n as f64 - center).powi(2)).collect();
        Self::from_shape(shape, scale, offset)
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }

    pub fn qubits(&self) -> u32 {
        self.weights.len().trailing_zeros()
    }

    /// `𝒮 𝒱_j + offset` at every grid point.
    pub fn diagonal(&self) -> Vec<f64> {
        self.weights.iter().map(|w| self.scale * w + self.offset).collect()
    }
}

/// How Dirichlet boundary terms are measured.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct DbcOptions {
    pub variant: BoundaryVariant,
    /// Accept complex amplitudes even though the overlap protocol assumes
    /// real ones.
    pub allow_complex: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BreakdownMeta {
    pub mode: MeasurementMode,
    pub bc: BoundaryCondition,
    pub order: usize,
    pub variant: Option<BoundaryVariant>,
    pub seed: u64,
    pub shot_count: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnergyBreakdown {
    pub kinetic: f64,
    pub potential: f64,
    pub total: f64,
    /// `"order1"` is the `p²/2m` piece, `"order2"` the `−p⁴/8m³c²` piece.
    pub per_order_terms: BTreeMap<String, f64>,
    /// `γ_d⟨F̂_d⟩` (or `½mc²ℒ²⟨Ê₀⟩` at order 1); empty for PBC.
    pub boundary_terms: BTreeMap<String, f64>,
    pub std_error: f64,
    pub kinetic_std_error: f64,
    pub potential_std_error: f64,
    pub validity_ratio: f64,
    pub validity_warning: bool,
    pub complex_override: bool,
    pub metadata: BreakdownMeta,
}

fn hr(l: usize) -> Probe {
    Probe::HadamardReal(l)
}

/// Probe values computed straight from the amplitudes.
fn direct_probes<I>(state: &WaveFunction, probes: I) -> BTreeMap<Probe, Estimate>
where
    I: IntoIterator<Item = Probe>,
{
    let c = state.amplitudes();
    let n = c.len();
    probes
        .into_iter()
        .map(|p| {
            let v = match p {
                Probe::HadamardReal(l) => expectation_adjoint_shift(state, l).re,
                Probe::HadamardImag(l) => expectation_adjoint_shift(state, l).im,
                Probe::Overlap(row, label) => {
                    let (f, g) = row.indices(n);
                    match label {
                        RefLabel::F => c[f].norm_sqr(),
                        RefLabel::G => c[g].norm_sqr(),
                        RefLabel::S => 0.5 * (c[f] + c[g]).norm_sqr(),
                    }
                }
                Probe::Histogram => f64::NAN,
            };
            (p, Estimate::exact(v))
        })
        .collect()
}

fn measure_all<I>(state: &WaveFunction, probes: I, plan: &ShotPlan) -> Result<BTreeMap<Probe, Estimate>>
where
    I: IntoIterator<Item = Probe>,
{
    match plan.mode {
        MeasurementMode::Exact => Ok(direct_probes(state, probes)),
        MeasurementMode::Shots => measure_probes(state, probes, plan),
    }
}

/// Probe combinations making up one kinetic estimate.
struct KineticPlan {
    kinetic: Combination,
    per_order: Vec<(String, Combination)>,
    boundary: Vec<(String, Combination)>,
    validity: Combination,
}

/// `Re⟨Â_x†⟩` and friends enter as `⟨Â⁽ˡ⁾⟩ = 2 Re⟨(Â_x†)^l⟩`.
fn pbc_combinations(config: &PhysicsConfig, order: usize) -> Result<KineticPlan> {
    let mc2 = config.rest_energy();
    let l2 = config.compton_ratio().powi(2);
    let b = beta(config, order)?;

    let mut kinetic = Combination::default();
    if order == 1 {
        // mc²ℒ²(1 − Re⟨Â_x†⟩)
        kinetic.constant = mc2 * l2;
        kinetic.add(hr(1), -mc2 * l2);
    } else {
        kinetic.constant = b[0];
        kinetic.add(hr(1), 2.0 * b[1]);
        kinetic.add(hr(2), 2.0 * b[2]);
    }

    // ⟨D⟩ = 2 − 2R₁,  ⟨D²⟩ = 6 − 8R₁ + 2R₂ with D = 2 − Â⁽¹⁾.
    let mut d = Combination { constant: 2.0, terms: vec![] };
    d.add(hr(1), -2.0);
    let mut per_order = vec![("order1".to_string(), d.scaled(mc2 * alpha_f64(1) * l2))];
    if order == 2 {
        let mut d2 = Combination { constant: 6.0, terms: vec![] };
        d2.add(hr(1), -8.0);
        d2.add(hr(2), 2.0);
        per_order.push(("order2".to_string(), d2.scaled(-mc2 * alpha_f64(2) * l2 * l2)));
    }
    Ok(KineticPlan { kinetic, per_order, boundary: vec![], validity: d.scaled(l2) })
}

fn dbc_combinations(config: &PhysicsConfig, order: usize, variant: BoundaryVariant) -> Result<KineticPlan> {
    let mut plan = pbc_combinations(config, order)?;
    let mc2 = config.rest_energy();
    let l2 = config.compton_ratio().powi(2);
    let e0 = boundary_combination(MeasuredOperator::E0, variant);

    plan.validity.extend(&e0.scaled(l2));
    let order1_boundary = e0.scaled(0.5 * mc2 * l2);
    plan.per_order[0].1.extend(&order1_boundary);

    if order == 1 {
        plan.kinetic.extend(&order1_boundary);
        plan.boundary.push(("E0".to_string(), order1_boundary));
        return Ok(plan);
    }

    let g = gamma(config);
    let ops = [
        ("E0", MeasuredOperator::E0),
        ("E1", MeasuredOperator::E1),
        ("E2", MeasuredOperator::E2),
        ("E0sq", MeasuredOperator::E0Sq),
    ];
    // ⟨D_D²⟩ − ⟨D_P²⟩ = 4⟨Ê₀⟩ − ⟨Ê₁⟩ − ⟨Ê₂⟩ + ⟨Ê₀²⟩
    let weights = [4.0, -1.0, -1.0, 1.0];
    let p4 = -mc2 * alpha_f64(2) * l2 * l2;
    for (d, (label, op)) in ops.iter().enumerate() {
        let f = boundary_combination(*op, variant);
        let term = f.scaled(g[d]);
        plan.kinetic.extend(&term);
        plan.boundary.push((label.to_string(), term));
        plan.per_order[1].1.extend(&f.scaled(p4 * weights[d]));
    }
    Ok(plan)
}

fn check_order(order: usize) -> Result<()> {
    if (1..=2).contains(&order) {
        Ok(())
    } else {
        Err(Error::UnsupportedOrder(order))
    }
}

struct KineticResult {
    kinetic: Estimate,
    per_order: BTreeMap<String, f64>,
    boundary: BTreeMap<String, f64>,
    validity: f64,
    complex_override: bool,
}

fn kinetic_parts(
    state: &WaveFunction,
    config: &PhysicsConfig,
    bc: BoundaryCondition,
    order: usize,
    plan: &ShotPlan,
    opts: &DbcOptions,
) -> Result<KineticResult> {
    check_order(order)?;
    if state.qubits() != config.qubits() {
        return Err(Error::LengthMismatch { expected: config.grid_points(), found: state.len() });
    }
    let mut complex_override = false;
    let combos = match bc {
        BoundaryCondition::Pbc => pbc_combinations(config, order)?,
        BoundaryCondition::Dbc => {
            if !state.is_real() {
                if !opts.allow_complex {
                    return Err(Error::ComplexAmplitudesRejected);
                }
                complex_override = true;
            }
            dbc_combinations(config, order, opts.variant)?
        }
    };
    let probes = combos
        .kinetic
        .probes()
        .chain(combos.validity.probes())
        .chain(combos.per_order.iter().flat_map(|(_, c)| c.probes()))
        .collect::<Vec<_>>();
    let measured = measure_all(state, probes, plan)?;
    Ok(KineticResult {
        kinetic: combos.kinetic.evaluate(&measured),
        per_order: combos.per_order.iter().map(|(k, c)| (k.clone(), c.evaluate(&measured).value)).collect(),
        boundary: combos.boundary.iter().map(|(k, c)| (k.clone(), c.evaluate(&measured).value)).collect(),
        validity: combos.validity.evaluate(&measured).value,
        complex_override,
    })
}

/// Periodic kinetic energy at order 1 (`p²/2m`) or 2 (adds `−p⁴/8m³c²`).
pub fn kinetic_pbc(state: &WaveFunction, config: &PhysicsConfig, order: usize, plan: &ShotPlan) -> Result<Estimate> {
    kinetic_parts(state, config, BoundaryCondition::Pbc, order, plan, &DbcOptions::default()).map(|r| r.kinetic)
}

/// Dirichlet kinetic energy: the periodic value plus boundary corrections.
pub fn kinetic_dbc(
    state: &WaveFunction,
    config: &PhysicsConfig,
    order: usize,
    plan: &ShotPlan,
    opts: &DbcOptions,
) -> Result<Estimate> {
    kinetic_parts(state, config, BoundaryCondition::Dbc, order, plan, opts).map(|r| r.kinetic)
}

pub fn kinetic_energy(
    state: &WaveFunction,
    config: &PhysicsConfig,
    bc: BoundaryCondition,
    order: usize,
    plan: &ShotPlan,
    opts: &DbcOptions,
) -> Result<Estimate> {
    kinetic_parts(state, config, bc, order, plan, opts).map(|r| r.kinetic)
}

/// `𝒮 Σ_j 𝒱_j 𝒫_j + offset`.
pub fn potential_energy(state: &WaveFunction, pot: &PotentialSpec, plan: &ShotPlan) -> Result<Estimate> {
    if pot.weights.len() != state.len() {
        return Err(Error::LengthMismatch { expected: state.len(), found: pot.weights.len() });
    }
    if pot.scale == 0.0 {
        return Ok(Estimate::exact(pot.offset));
    }
    let m = measure_diagonal(state, &pot.weights, plan)?;
    Ok(Estimate { value: pot.scale * m.value + pot.offset, std_error: pot.scale.abs() * m.std_error })
}

/// Kinetic plus potential energy with the per-term breakdown.
pub fn total_energy(
    state: &WaveFunction,
    config: &PhysicsConfig,
    bc: BoundaryCondition,
    order: usize,
    pot: &PotentialSpec,
    plan: &ShotPlan,
    opts: &DbcOptions,
) -> Result<EnergyBreakdown> {
    let k = kinetic_parts(state, config, bc, order, plan, opts)?;
    let v = potential_energy(state, pot, plan)?;
    let std_error = (k.kinetic.std_error.powi(2) + v.std_error.powi(2)).sqrt();
    Ok(EnergyBreakdown {
        kinetic: k.kinetic.value,
        potential: v.value,
        total: k.kinetic.value + v.value,
        per_order_terms: k.per_order,
        boundary_terms: k.boundary,
        std_error,
        kinetic_std_error: k.kinetic.std_error,
        potential_std_error: v.std_error,
        validity_ratio: k.validity,
        validity_warning: k.validity > VALIDITY_THRESHOLD,
        complex_override: k.complex_override,
        metadata: BreakdownMeta {
            mode: plan.mode,
            bc,
            order,
            variant: (bc == BoundaryCondition::Dbc).then_some(opts.variant),
            seed: plan.seed,
            shot_count: plan.shot_count,
        },
    })
}

/// Energy shift of the literal boundary variant relative to the full
/// operators: `−2 α₂ mc² ℒ⁴ (𝒫₀ + 𝒫_{N−1})` at order 2, zero at order 1.
pub fn literal_variant_residual(state: &WaveFunction, config: &PhysicsConfig, order: usize) -> f64 {
    if order < 2 {
        return 0.0;
    }
    let n = state.len();
    let edge = state.amplitude(0).norm_sqr() + state.amplitude(n - 1).norm_sqr();
    -2.0 * alpha_f64(2) * config.rest_energy() * config.compton_ratio().powi(4) * edge
}
