//! Shared fixtures for the kernel benchmarks.

use relqsim_core::{PhysicsConfig, WaveFunction};

pub fn config(qubits: u32) -> PhysicsConfig {
    PhysicsConfig::from_compton_ratio(1.0, 1.0, 0.2, qubits).expect("valid benchmark config")
}

/// A smooth, non-symmetric real state so no probe is degenerate.
pub fn smooth_state(qubits: u32) -> WaveFunction {
    let cfg = config(qubits);
    let amps: Vec<f64> = (0..cfg.grid_points())
        .map(|j| {
            let x = cfg.position(j);
            (std::f64::consts::PI * x).sin() * (1.0 + x) + 0.01
        })
        .collect();
    WaveFunction::from_real(&amps).expect("nonzero state")
}
