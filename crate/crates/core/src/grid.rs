//! Physical parameters and the discretised position-space state.
//!
//! Everything lives on the scaled coordinate `x ∈ [0, 1)` sampled at
//! `x_j = j / 2^L`. The mass, light speed and Planck constant are free
//! positive numbers of that scaled problem, so the reduced Compton
//! wavelength `ħ/(mc)` is also measured in units of the scaled box.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const NORM_TOLERANCE: f64 = 1e-12;

/// Mass, light speed, Planck constant and qubit count of a run, with the
/// derived grid quantities.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhysicsConfig {
    mass: f64,
    light_speed: f64,
    hbar: f64,
    qubits: u32,
    compton: f64,
}

impl PhysicsConfig {
    pub fn new(mass: f64, light_speed: f64, hbar: f64, qubits: u32) -> Result<Self> {
        Self::check(mass, light_speed, qubits)?;
        if !(hbar.is_finite() && hbar > 0.0) {
            return Err(Error::InvalidConfig(format!("hbar must be positive, got {hbar}")));
        }
        Ok(Self {
            mass,
            light_speed,
            hbar,
            qubits,
            compton: hbar / (mass * light_speed),
        })
    }

    /// Builds a config with a prescribed ratio `λ̄/δx`; ħ is derived from it.
    pub fn from_compton_ratio(mass: f64, light_speed: f64, ratio: f64, qubits: u32) -> Result<Self> {
        Self::check(mass, light_speed, qubits)?;
        if !(ratio.is_finite() && ratio > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "compton ratio must be positive, got {ratio}"
            )));
        }
        let compton = ratio / 2f64.powi(qubits as i32);
        Ok(Self {
            mass,
            light_speed,
            hbar: compton * mass * light_speed,
            qubits,
            compton,
        })
    }

    fn check(mass: f64, light_speed: f64, qubits: u32) -> Result<()> {
        if !(mass.is_finite() && mass > 0.0) {
            return Err(Error::InvalidConfig(format!("mass must be positive, got {mass}")));
        }
        if !(light_speed.is_finite() && light_speed > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "light speed must be positive, got {light_speed}"
            )));
        }
        if !(2..=30).contains(&qubits) {
            return Err(Error::InvalidConfig(format!(
                "qubit count must lie in 2..=30, got {qubits}"
            )));
        }
        Ok(())
    }

    /// Same physics on a different grid. ħ is kept, so ℒ_m changes.
    pub fn with_qubits(&self, qubits: u32) -> Result<Self> {
        Self::new(self.mass, self.light_speed, self.hbar, qubits)
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }

    pub fn light_speed(&self) -> f64 {
        self.light_speed
    }

    pub fn hbar(&self) -> f64 {
        self.hbar
    }

    pub fn qubits(&self) -> u32 {
        self.qubits
    }

    pub fn grid_points(&self) -> usize {
        1usize << self.qubits
    }

    pub fn delta_x(&self) -> f64 {
        1.0 / self.grid_points() as f64
    }

    /// Reduced Compton wavelength `ħ/(mc)` in scaled units.
    pub fn compton_wavelength(&self) -> f64 {
        self.compton
    }

    /// `ℒ_m = λ̄_m / δx`.
    pub fn compton_ratio(&self) -> f64 {
        self.compton * self.grid_points() as f64
    }

    pub fn rest_energy(&self) -> f64 {
        self.mass * self.light_speed * self.light_speed
    }

    /// `(m c ℒ_m)²`, the prefactor of the lattice `p²`.
    pub fn momentum_scale_sq(&self) -> f64 {
        let p = self.mass * self.light_speed * self.compton_ratio();
        p * p
    }

    pub fn position(&self, j: usize) -> f64 {
        j as f64 * self.delta_x()
    }
}

/// Normalised amplitudes `c_j` over the `2^L` grid points.
#[derive(Debug, Clone)]
pub struct WaveFunction {
    amps: Vec<Complex64>,
    qubits: u32,
    input_norm: f64,
}

impl PartialEq for WaveFunction {
    fn eq(&self, other: &Self) -> bool {
        self.qubits == other.qubits && self.amps == other.amps
    }
}

impl WaveFunction {
    /// Normalises `amplitudes`; the length must be a power of two of at
    /// least four.
    pub fn new(amplitudes: Vec<Complex64>) -> Result<Self> {
        let n = amplitudes.len();
        if n < 4 || !n.is_power_of_two() {
            return Err(Error::BadLength(n));
        }
        let norm = amplitudes.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        if !(norm.is_finite() && norm > 0.0) {
            return Err(Error::ZeroNorm);
        }
        let amps = amplitudes.into_iter().map(|c| c / norm).collect();
        Ok(Self {
            amps,
            qubits: n.trailing_zeros(),
            input_norm: norm,
        })
    }

    pub fn from_real(amplitudes: &[f64]) -> Result<Self> {
        Self::new(amplitudes.iter().map(|&a| Complex64::new(a, 0.0)).collect())
    }

    /// Samples `f` at `x_j = j/2^L` and normalises.
    pub fn sample<F>(f: F, config: &PhysicsConfig) -> Result<Self>
    where
        F: Fn(f64) -> Complex64,
    {
        let amps = (0..config.grid_points())
            .map(|j| f(config.position(j)))
            .collect::<Vec<_>>();
        if amps.iter().any(|c| !(c.re.is_finite() && c.im.is_finite())) {
            return Err(Error::InvalidConfig("sampled function is not finite on the grid".into()));
        }
        Self::new(amps)
    }

    pub fn basis(qubits: u32, index: usize) -> Result<Self> {
        let n = 1usize << qubits;
        if index >= n {
            return Err(Error::IndexOutOfRange { index, len: n });
        }
        let mut amps = vec![Complex64::new(0.0, 0.0); n];
        amps[index] = Complex64::new(1.0, 0.0);
        Self::new(amps)
    }

    pub fn uniform(qubits: u32) -> Result<Self> {
        Self::new(vec![Complex64::new(1.0, 0.0); 1usize << qubits])
    }

    /// `exp(2πi k j / N)/√N`.
    pub fn plane_wave(qubits: u32, k: i64) -> Result<Self> {
        let n = 1usize << qubits;
        let amps = (0..n)
            .map(|j| {
                let phase = 2.0 * std::f64::consts::PI * (k as f64) * (j as f64) / n as f64;
                Complex64::from_polar(1.0, phase)
            })
            .collect();
        Self::new(amps)
    }

    /// Lowest eigenvector of the Dirichlet second-difference matrix,
    /// `sin(π(j+1)/(N+1))`.
    pub fn dirichlet_sine(qubits: u32) -> Result<Self> {
        let n = 1usize << qubits;
        let amps = (0..n)
            .map(|j| {
                let s = (std::f64::consts::PI * (j + 1) as f64 / (n + 1) as f64).sin();
                Complex64::new(s, 0.0)
            })
            .collect();
        Self::new(amps)
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn amplitude(&self, j: usize) -> Complex64 {
        self.amps[j]
    }

    pub fn qubits(&self) -> u32 {
        self.qubits
    }

    pub fn len(&self) -> usize {
        self.amps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.amps.is_empty()
    }

    /// Norm of the vector handed to the constructor.
    pub fn input_norm(&self) -> f64 {
        self.input_norm
    }

    /// `𝒫_j = |c_j|²`.
    pub fn probability(&self, j: usize) -> Result<f64> {
        self.amps
            .get(j)
            .map(|c| c.norm_sqr())
            .ok_or(Error::IndexOutOfRange { index: j, len: self.amps.len() })
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.amps.iter().map(|c| c.norm_sqr()).collect()
    }

    /// True when every imaginary part is negligible, up to one global phase.
    pub fn is_real(&self) -> bool {
        let phase = self
            .amps
            .iter()
            .max_by(|a, b| a.norm_sqr().total_cmp(&b.norm_sqr()))
            .map(|c| c.conj() / c.norm())
            .unwrap_or(Complex64::new(1.0, 0.0));
        self.amps.iter().all(|c| (c * phase).im.abs() <= 1e-12)
    }

    pub fn inner(&self, other: &WaveFunction) -> Result<Complex64> {
        if self.len() != other.len() {
            return Err(Error::LengthMismatch { expected: self.len(), found: other.len() });
        }
        Ok(self
            .amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    pub(crate) fn from_normalized(amps: Vec<Complex64>, qubits: u32) -> Self {
        Self { amps, qubits, input_norm: 1.0 }
    }
}
