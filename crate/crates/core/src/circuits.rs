//! Measurement circuits: the Hadamard test for `Re⟨(Â_x†)^l⟩` and the
//! reference-state overlap test that yields `𝒫_f`, `𝒫_g`, `𝒫_s`.
//!
//! Both run either in exact mode (outcome probabilities read off the
//! simulated register) or in shot mode, where each observable gets
//! `shot_count` independent samples from its own RNG stream. Streams are
//! derived from the plan seed with fixed offsets so that results do not
//! depend on evaluation order.

use std::collections::BTreeMap;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::WaveFunction;
use crate::operators::{apply_shift, ShiftDirection};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MeasurementMode {
    Exact,
    Shots,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ShotPlan {
    pub mode: MeasurementMode,
    pub shot_count: u64,
    pub seed: u64,
}

impl ShotPlan {
    pub fn exact() -> Self {
        Self { mode: MeasurementMode::Exact, shot_count: 0, seed: 0 }
    }

    pub fn shots(shot_count: u64, seed: u64) -> Result<Self> {
        if shot_count == 0 {
            return Err(Error::InvalidPlan("shot_count must be at least 1".into()));
        }
        Ok(Self { mode: MeasurementMode::Shots, shot_count, seed })
    }

    pub fn is_exact(&self) -> bool {
        self.mode == MeasurementMode::Exact
    }

    /// Same plan with a different seed.
    pub fn reseeded(&self, seed: u64) -> Self {
        Self { seed, ..*self }
    }

    fn rng(&self, stream: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(stream);
        rng
    }
}

/// A measured value with its standard error (zero in exact mode).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub std_error: f64,
}

impl Estimate {
    pub fn exact(value: f64) -> Self {
        Self { value, std_error: 0.0 }
    }
}

/// One independently sampled quantity. The ordering fixes the merge order
/// of combined estimates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Probe {
    HadamardReal(usize),
    HadamardImag(usize),
    Overlap(ReferenceRow, RefLabel),
    Histogram,
}

impl Probe {
    fn stream(&self) -> u64 {
        match *self {
            Probe::HadamardReal(l) => l as u64,
            Probe::HadamardImag(l) => (1 << 32) + l as u64,
            Probe::Overlap(row, label) => (2 << 32) + 3 * row as u64 + label as u64,
            Probe::Histogram => 3 << 32,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TestPart {
    Real,
    /// Control prepared with an extra `S†`; not used by the energy
    /// estimators.
    Imaginary,
}

/// Probability that the control qubit of the Hadamard test reads `0`.
///
/// The register is `control ⊗ system`; the two control branches are kept
/// as separate system vectors. `H`, then `l` controlled-`Â_x†` gates, then
/// (for the imaginary part) `S†` on the control, then `H`.
fn hadamard_control_zero(state: &WaveFunction, l: usize, part: TestPart) -> f64 {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let psi = state.amplitudes();
    let mut branch0: Vec<Complex64> = psi.iter().map(|c| c * h).collect();
    let mut branch1 = WaveFunction::from_normalized(branch0.clone(), state.qubits());
    for _ in 0..l {
        branch1 = apply_shift(&branch1, 1, ShiftDirection::Backward);
    }
    let mut branch1 = branch1.amplitudes().to_vec();
    if part == TestPart::Imaginary {
        let phase = Complex64::new(0.0, -1.0);
        branch1.iter_mut().for_each(|c| *c *= phase);
    }
    for (a, b) in branch0.iter_mut().zip(branch1.iter_mut()) {
        let (x, y) = (*a, *b);
        *a = (x + y) * h;
        *b = (x - y) * h;
    }
    branch0.iter().map(|c| c.norm_sqr()).sum()
}

fn sample_pm_one(plan: &ShotPlan, probe: Probe, p_plus: f64) -> Estimate {
    let n = plan.shot_count;
    let ups = bernoulli_count(plan, probe, p_plus);
    let mean = 2.0 * ups as f64 / n as f64 - 1.0;
    Estimate { value: mean, std_error: ((1.0 - mean * mean).max(0.0) / n as f64).sqrt() }
}

fn bernoulli_count(plan: &ShotPlan, probe: Probe, p: f64) -> u64 {
    let p = p.clamp(0.0, 1.0);
    let mut rng = plan.rng(probe.stream());
    Binomial::new(plan.shot_count, p).expect("probability in [0, 1]").sample(&mut rng)
}

/// `Re⟨ψ|(Â_x†)^l|ψ⟩` from the control-qubit `Z` statistics.
pub fn hadamard_test(state: &WaveFunction, l: usize, plan: &ShotPlan) -> Estimate {
    hadamard_test_part(state, l, TestPart::Real, plan)
}

pub fn hadamard_test_part(state: &WaveFunction, l: usize, part: TestPart, plan: &ShotPlan) -> Estimate {
    let p0 = hadamard_control_zero(state, l, part);
    match plan.mode {
        MeasurementMode::Exact => Estimate::exact(2.0 * p0 - 1.0),
        MeasurementMode::Shots => {
            let probe = match part {
                TestPart::Real => Probe::HadamardReal(l),
                TestPart::Imaginary => Probe::HadamardImag(l),
            };
            sample_pm_one(plan, probe, p0)
        }
    }
}

/// Boundary quantities that the overlap protocol can target.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum MeasuredOperator {
    E0,
    E1,
    E2,
    E0Sq,
}

/// Row of the reference-state table; `Ê₀` and `Ê₀²` share a row.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ReferenceRow {
    E0 = 0,
    E1 = 1,
    E2 = 2,
}

impl ReferenceRow {
    /// Basis indices `(f, g)` of the row on an `n`-point grid.
    pub fn indices(&self, n: usize) -> (usize, usize) {
        match self {
            ReferenceRow::E0 => (0, n - 1),
            ReferenceRow::E1 => (1, n - 1),
            ReferenceRow::E2 => (0, n - 2),
        }
    }
}

impl MeasuredOperator {
    pub fn row(&self) -> ReferenceRow {
        match self {
            MeasuredOperator::E0 | MeasuredOperator::E0Sq => ReferenceRow::E0,
            MeasuredOperator::E1 => ReferenceRow::E1,
            MeasuredOperator::E2 => ReferenceRow::E2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RefLabel {
    F = 0,
    G = 1,
    S = 2,
}

/// A reference state prepared in the `R` register.
#[derive(Debug, Clone, PartialEq)]
pub struct ReferenceState {
    pub label: RefLabel,
    pub row: ReferenceRow,
    /// Basis indices with nonzero amplitude (one for `f`/`g`, two for `s`).
    pub support: Vec<usize>,
    pub state: WaveFunction,
}

impl ReferenceState {
    fn new(row: ReferenceRow, label: RefLabel, qubits: u32) -> Result<Self> {
        let n = 1usize << qubits;
        let (f, g) = row.indices(n);
        let support = match label {
            RefLabel::F => vec![f],
            RefLabel::G => vec![g],
            RefLabel::S => vec![f, g],
        };
        let mut amps = vec![Complex64::new(0.0, 0.0); n];
        for &j in &support {
            amps[j] = Complex64::new(1.0, 0.0);
        }
        Ok(Self { label, row, support, state: WaveFunction::new(amps)? })
    }

    fn probe(&self) -> Probe {
        Probe::Overlap(self.row, self.label)
    }
}

/// Reference states needed for `target`. `Ê₀²` uses only `f` and `g`.
pub fn reference_states_for(target: MeasuredOperator, qubits: u32) -> Result<Vec<ReferenceState>> {
    if qubits < 2 {
        return Err(Error::BadLength(1usize << qubits));
    }
    let labels: &[RefLabel] = match target {
        MeasuredOperator::E0Sq => &[RefLabel::F, RefLabel::G],
        _ => &[RefLabel::F, RefLabel::G, RefLabel::S],
    };
    labels
        .iter()
        .map(|&label| ReferenceState::new(target.row(), label, qubits))
        .collect()
}

/// `|⟨ref|ψ⟩|²`, exact or Bernoulli-sampled.
pub fn overlap_probability(state: &WaveFunction, reference: &ReferenceState, plan: &ShotPlan) -> Result<Estimate> {
    let p = state.inner(&reference.state)?.norm_sqr();
    Ok(match plan.mode {
        MeasurementMode::Exact => Estimate::exact(p),
        MeasurementMode::Shots => {
            let n = plan.shot_count as f64;
            let phat = bernoulli_count(plan, reference.probe(), p) as f64 / n;
            Estimate { value: phat, std_error: (phat * (1.0 - phat) / n).sqrt() }
        }
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundaryVariant {
    /// Operator definitions under the cyclic adder; matches the dense matrices.
    #[default]
    Full,
    /// Off-diagonal couplings only for `Ê₁`/`Ê₂`.
    PaperLiteral,
}

/// A linear combination of independently sampled probes.
#[derive(Debug, Clone, Default)]
pub struct Combination {
    pub constant: f64,
    pub terms: Vec<(Probe, f64)>,
}

impl Combination {
    pub fn add(&mut self, probe: Probe, coef: f64) {
        match self.terms.iter_mut().find(|(p, _)| *p == probe) {
            Some((_, c)) => *c += coef,
            None => self.terms.push((probe, coef)),
        }
    }

    pub fn scaled(&self, k: f64) -> Self {
        Self {
            constant: self.constant * k,
            terms: self.terms.iter().map(|&(p, c)| (p, c * k)).collect(),
        }
    }

    pub fn extend(&mut self, other: &Combination) {
        self.constant += other.constant;
        for &(p, c) in &other.terms {
            self.add(p, c);
        }
    }
}

/// Probe-level combination for a boundary expectation.
pub fn boundary_combination(which: MeasuredOperator, variant: BoundaryVariant) -> Combination {
    let mut c = Combination::default();
    let row = which.row();
    match which {
        MeasuredOperator::E0Sq => {
            c.add(Probe::Overlap(row, RefLabel::F), 1.0);
            c.add(Probe::Overlap(row, RefLabel::G), 1.0);
        }
        _ => {
            // 𝒫_s = |c_f + c_g|² is twice the overlap with (|f⟩+|g⟩)/√2.
            c.add(Probe::Overlap(row, RefLabel::S), 2.0);
            c.add(Probe::Overlap(row, RefLabel::F), -1.0);
            c.add(Probe::Overlap(row, RefLabel::G), -1.0);
        }
    }
    if variant == BoundaryVariant::Full {
        // 2𝒫₀ and 2𝒫_{N−1} reuse the Ê₀-row f and g measurements.
        match which {
            MeasuredOperator::E1 => c.add(Probe::Overlap(ReferenceRow::E0, RefLabel::F), 2.0),
            MeasuredOperator::E2 => c.add(Probe::Overlap(ReferenceRow::E0, RefLabel::G), 2.0),
            _ => {}
        }
    }
    c
}

impl Combination {
    pub fn probes(&self) -> impl Iterator<Item = Probe> + '_ {
        self.terms.iter().map(|(p, _)| *p)
    }

    /// Combines already-measured probes; errors add in quadrature since
    /// every probe is sampled independently.
    pub fn evaluate(&self, measured: &BTreeMap<Probe, Estimate>) -> Estimate {
        let mut terms = self.terms.clone();
        terms.sort_by_key(|(p, _)| *p);
        let mut value = self.constant;
        let mut var = 0.0;
        for (probe, coef) in terms {
            let e = measured[&probe];
            value += coef * e.value;
            var += (coef * e.std_error).powi(2);
        }
        Estimate { value, std_error: var.sqrt() }
    }
}

/// Runs each distinct probe once through the simulated circuits.
pub fn measure_probes<I>(state: &WaveFunction, probes: I, plan: &ShotPlan) -> Result<BTreeMap<Probe, Estimate>>
where
    I: IntoIterator<Item = Probe>,
{
    let mut out = BTreeMap::new();
    for probe in probes {
        if let std::collections::btree_map::Entry::Vacant(e) = out.entry(probe) {
            e.insert(measure_probe(state, probe, plan)?);
        }
    }
    Ok(out)
}

pub fn evaluate_combination(state: &WaveFunction, combo: &Combination, plan: &ShotPlan) -> Result<Estimate> {
    let measured = measure_probes(state, combo.probes(), plan)?;
    Ok(combo.evaluate(&measured))
}

fn measure_probe(state: &WaveFunction, probe: Probe, plan: &ShotPlan) -> Result<Estimate> {
    match probe {
        Probe::HadamardReal(l) => Ok(hadamard_test(state, l, plan)),
        Probe::HadamardImag(l) => Ok(hadamard_test_part(state, l, TestPart::Imaginary, plan)),
        Probe::Overlap(row, label) => {
            let r = ReferenceState::new(row, label, state.qubits())?;
            overlap_probability(state, &r, plan)
        }
        Probe::Histogram => Err(Error::InvalidPlan("histogram probes need weights".into())),
    }
}

/// `⟨F̂⟩` from the reference-state overlap protocol.
pub fn estimate_boundary(
    state: &WaveFunction,
    which: MeasuredOperator,
    plan: &ShotPlan,
    variant: BoundaryVariant,
) -> Result<Estimate> {
    evaluate_combination(state, &boundary_combination(which, variant), plan)
}

/// `Σ_j w_j 𝒫_j` from a `Z`-basis histogram of the system register.
pub fn measure_diagonal(state: &WaveFunction, weights: &[f64], plan: &ShotPlan) -> Result<Estimate> {
    if weights.len() != state.len() {
        return Err(Error::LengthMismatch { expected: state.len(), found: weights.len() });
    }
    let probs = state.probabilities();
    match plan.mode {
        MeasurementMode::Exact => Ok(Estimate::exact(weights.iter().zip(&probs).map(|(w, p)| w * p).sum())),
        MeasurementMode::Shots => {
            let counts = sample_histogram(&probs, plan);
            let n = plan.shot_count as f64;
            let mean: f64 = weights.iter().zip(&counts).map(|(w, &k)| w * k as f64).sum::<f64>() / n;
            let second: f64 = weights.iter().zip(&counts).map(|(w, &k)| w * w * k as f64).sum::<f64>() / n;
            Ok(Estimate { value: mean, std_error: ((second - mean * mean).max(0.0) / n).sqrt() })
        }
    }
}

/// Multinomial counts over grid points via conditional binomials.
pub fn sample_histogram(probs: &[f64], plan: &ShotPlan) -> Vec<u64> {
    let mut rng = plan.rng(Probe::Histogram.stream());
    let mut remaining = plan.shot_count;
    let mut mass_left = 1.0f64;
    let mut counts = vec![0u64; probs.len()];
    for (j, &p) in probs.iter().enumerate() {
        if remaining == 0 {
            break;
        }
        if j + 1 == probs.len() {
            counts[j] = remaining;
            break;
        }
        let q = if mass_left > 0.0 { (p / mass_left).clamp(0.0, 1.0) } else { 0.0 };
        let k = Binomial::new(remaining, q).expect("valid binomial").sample(&mut rng);
        counts[j] = k;
        remaining -= k;
        mass_left -= p;
    }
    counts
}
