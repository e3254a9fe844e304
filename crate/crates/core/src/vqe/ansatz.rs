//! Parameterised trial states.

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{PhysicsConfig, WaveFunction};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AnsatzKind {
    /// Real amplitudes through `N − 1` hyperspherical angles.
    GridDirect,
    /// `R_y` on every qubit followed by a CNOT chain, repeated per layer.
    LayeredRotation,
    /// `c_j ∝ exp(−(x_j − μ)²/4σ²)`, parameters `[μ, σ]`.
    Gaussian,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitStrategy {
    #[default]
    RandomUniform,
    Zero,
    Provided,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnsatzSpec {
    pub kind: AnsatzKind,
    #[serde(default = "one")]
    pub layers: usize,
    #[serde(default)]
    pub init: InitStrategy,
    #[serde(default)]
    pub initial_params: Vec<f64>,
}

fn one() -> usize {
    1
}

impl AnsatzSpec {
    pub fn grid_direct() -> Self {
        Self { kind: AnsatzKind::GridDirect, layers: 1, init: InitStrategy::RandomUniform, initial_params: vec![] }
    }

    pub fn layered(layers: usize) -> Self {
        Self { kind: AnsatzKind::LayeredRotation, layers, ..Self::grid_direct() }
    }

    pub fn gaussian() -> Self {
        Self { kind: AnsatzKind::Gaussian, ..Self::grid_direct() }
    }

    pub fn parameter_count(&self, qubits: u32) -> usize {
        match self.kind {
            AnsatzKind::GridDirect => (1usize << qubits) - 1,
            AnsatzKind::LayeredRotation => qubits as usize * self.layers,
            AnsatzKind::Gaussian => 2,
        }
    }

    /// Starting point for one restart. Restart 0 honours `init`; later
    /// restarts always draw random parameters.
    pub fn starting_params<R: Rng>(&self, qubits: u32, restart: usize, rng: &mut R) -> Result<Vec<f64>> {
        let n = self.parameter_count(qubits);
        let strategy = if restart == 0 { self.init } else { InitStrategy::RandomUniform };
        match strategy {
            InitStrategy::Provided => {
                if self.initial_params.len() != n {
                    return Err(Error::ParamLengthMismatch { expected: n, found: self.initial_params.len() });
                }
                Ok(self.initial_params.clone())
            }
            InitStrategy::Zero => Ok(match self.kind {
                AnsatzKind::Gaussian => vec![0.5, 0.25],
                _ => vec![0.0; n],
            }),
            InitStrategy::RandomUniform => Ok(match self.kind {
                AnsatzKind::GridDirect => (0..n).map(|_| rng.random_range(0.0..std::f64::consts::PI)).collect(),
                AnsatzKind::LayeredRotation => (0..n).map(|_| rng.random_range(0.0..std::f64::consts::TAU)).collect(),
                AnsatzKind::Gaussian => vec![rng.random_range(0.0..1.0), rng.random_range(0.05..0.5)],
            }),
        }
    }
}

pub fn build_ansatz(spec: &AnsatzSpec, params: &[f64], config: &PhysicsConfig) -> Result<WaveFunction> {
    let expected = spec.parameter_count(config.qubits());
    if params.len() != expected {
        return Err(Error::ParamLengthMismatch { expected, found: params.len() });
    }
    match spec.kind {
        AnsatzKind::GridDirect => WaveFunction::from_real(&hyperspherical_amplitudes(params)),
        AnsatzKind::LayeredRotation => layered_state(config.qubits(), spec.layers, params),
        AnsatzKind::Gaussian => {
            let (mu, sigma) = (params[0], params[1]);
            if sigma.is_nan() || sigma <= 0.0 {
                return Err(Error::NonpositiveWidth(sigma));
            }
            let amps: Vec<f64> = (0..config.grid_points())
                .map(|j| (-(config.position(j) - mu).powi(2) / (4.0 * sigma * sigma)).exp())
                .collect();
            WaveFunction::from_real(&amps)
        }
    }
}

/// `c_0 = cos θ₁`, `c_k = sin θ₁ ⋯ sin θ_k cos θ_{k+1}`, last = product of sines.
pub fn hyperspherical_amplitudes(angles: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(angles.len() + 1);
    let mut tail = 1.0;
    for &t in angles {
        out.push(tail * t.cos());
        tail *= t.sin();
    }
    out.push(tail);
    out
}

/// Inverse of [`hyperspherical_amplitudes`] for a real unit vector.
pub fn hyperspherical_angles(amps: &[f64]) -> Vec<f64> {
    let n = amps.len();
    let mut angles = Vec::with_capacity(n - 1);
    for k in 0..n - 1 {
        let rest: f64 = amps[k + 1..].iter().map(|a| a * a).sum::<f64>().sqrt();
        if k == n - 2 {
            angles.push(amps[n - 1].atan2(amps[n - 2]));
        } else {
            angles.push(rest.atan2(amps[k]));
        }
    }
    angles
}

fn layered_state(qubits: u32, layers: usize, params: &[f64]) -> Result<WaveFunction> {
    let n = 1usize << qubits;
    let mut psi = vec![0.0f64; n];
    psi[0] = 1.0;
    let q = qubits as usize;
    for layer in 0..layers {
        for bit in 0..q {
            let theta = params[layer * q + bit];
            let (c, s) = ((theta / 2.0).cos(), (theta / 2.0).sin());
            let mask = 1usize << bit;
            for j in 0..n {
                if j & mask == 0 {
                    let (a, b) = (psi[j], psi[j | mask]);
                    psi[j] = c * a - s * b;
                    psi[j | mask] = s * a + c * b;
                }
            }
        }
        for bit in 0..q.saturating_sub(1) {
            let (ctrl, tgt) = (1usize << bit, 1usize << (bit + 1));
            for j in 0..n {
                if j & ctrl != 0 && j & tgt == 0 {
                    psi.swap(j, j | tgt);
                }
            }
        }
    }
    WaveFunction::new(psi.into_iter().map(|a| Complex64::new(a, 0.0)).collect())
}
