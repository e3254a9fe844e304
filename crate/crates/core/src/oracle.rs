//! Ground truth by dense diagonalisation, closed-form stencil spectra, and
//! the non-perturbative square-root kinetic energy on the lattice.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::coefficients::alpha_f64;
use crate::error::{Error, Result};
use crate::estimators::PotentialSpec;
use crate::grid::{PhysicsConfig, WaveFunction};
use crate::operators::{build_kinetic_matrix, build_p2_matrix, BoundaryCondition, LatticeOperator, MAX_DENSE_QUBITS};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SpectralMethod {
    Dense,
    Analytic,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectralResult {
    /// Ascending.
    pub eigenvalues: Vec<f64>,
    pub ground_energy: f64,
    pub ground_vector: WaveFunction,
    pub method: SpectralMethod,
    /// `‖H v − E₀ v‖` of the returned ground vector.
    pub residual: f64,
}

fn check_size(config: &PhysicsConfig) -> Result<()> {
    if config.qubits() > MAX_DENSE_QUBITS {
        return Err(Error::TooLarge { qubits: config.qubits(), max: MAX_DENSE_QUBITS });
    }
    Ok(())
}

/// Full spectrum of a real symmetric matrix, ground vector sign-fixed so its
/// largest component is positive.
pub fn diagonalize(matrix: &DMatrix<f64>) -> Result<SpectralResult> {
    let n = matrix.nrows();
    let eig = SymmetricEigen::new(matrix.clone());
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let eigenvalues: Vec<f64> = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let ground = eigenvalues[0];
    let v = eig.eigenvectors.column(order[0]).into_owned();
    let sign = if v.iter().copied().fold(0.0f64, |m, x| if x.abs() > m.abs() { x } else { m }) < 0.0 {
        -1.0
    } else {
        1.0
    };
    let v = v * sign;
    let residual = (matrix * &v - &v * ground).norm();
    let ground_vector = WaveFunction::new(v.iter().map(|&x| Complex64::new(x, 0.0)).collect())?;
    Ok(SpectralResult {
        eigenvalues,
        ground_energy: ground,
        ground_vector,
        method: SpectralMethod::Dense,
        residual,
    })
}

fn add_potential(mut m: DMatrix<f64>, pot: &PotentialSpec) -> Result<DMatrix<f64>> {
    if pot.weights().len() != m.nrows() {
        return Err(Error::LengthMismatch { expected: m.nrows(), found: pot.weights().len() });
    }
    for (j, v) in pot.diagonal().into_iter().enumerate() {
        m[(j, j)] += v;
    }
    Ok(m)
}

/// Lattice Hamiltonian: truncated kinetic matrix plus the diagonal potential.
pub fn hamiltonian(
    config: &PhysicsConfig,
    bc: BoundaryCondition,
    order: usize,
    pot: &PotentialSpec,
) -> Result<LatticeOperator> {
    let k = build_kinetic_matrix(config, bc, order)?;
    let m = add_potential(k.matrix, pot)?;
    Ok(LatticeOperator::new(m, format!("H{order}"), Some(bc)))
}

pub fn exact_ground(
    config: &PhysicsConfig,
    bc: BoundaryCondition,
    order: usize,
    pot: &PotentialSpec,
) -> Result<SpectralResult> {
    check_size(config)?;
    diagonalize(&hamiltonian(config, bc, order, pot)?.matrix)
}

/// Closed-form `p²` spectrum, ascending.
pub fn analytic_p2_spectrum(config: &PhysicsConfig, bc: BoundaryCondition) -> Vec<f64> {
    let n = config.grid_points();
    let s = config.momentum_scale_sq();
    let pi = std::f64::consts::PI;
    let mut e: Vec<f64> = match bc {
        BoundaryCondition::Pbc => (0..n)
            .map(|k| s * (2.0 - 2.0 * (2.0 * pi * k as f64 / n as f64).cos()))
            .collect(),
        BoundaryCondition::Dbc => (1..=n)
            .map(|k| s * (2.0 - 2.0 * (k as f64 * pi / (n + 1) as f64).cos()))
            .collect(),
    };
    e.sort_by(f64::total_cmp);
    e
}

/// `mc²(√(1 + P₂/m²c²) − 1)` as a matrix function of the lattice `p²`.
pub fn sqrt_kinetic_matrix(config: &PhysicsConfig, bc: BoundaryCondition) -> Result<LatticeOperator> {
    check_size(config)?;
    let p2 = build_p2_matrix(config, bc)?;
    let m2c2 = (config.mass() * config.light_speed()).powi(2);
    let mc2 = config.rest_energy();
    let eig = SymmetricEigen::new(p2.matrix);
    let f = eig.eigenvalues.map(|lam| mc2 * ((1.0 + lam.max(0.0) / m2c2).sqrt() - 1.0));
    let q = &eig.eigenvectors;
    let k = q * DMatrix::from_diagonal(&f) * q.transpose();
    // Symmetrise away round-off.
    let k = (&k + k.transpose()) * 0.5;
    Ok(LatticeOperator::new(k, "Ksqrt", Some(bc)))
}

pub fn exact_sqrt_kinetic_ground(
    config: &PhysicsConfig,
    bc: BoundaryCondition,
    pot: &PotentialSpec,
) -> Result<SpectralResult> {
    let k = sqrt_kinetic_matrix(config, bc)?;
    diagonalize(&add_potential(k.matrix, pot)?)
}

/// Bound on the order-2 truncation error of any kinetic eigenvalue:
/// `α₃ mc² x_max³` with `x_max` the largest eigenvalue of `p²/m²c²`.
///
/// For `0 ≤ x ≤ 1` the series of `√(1+x) − 1` alternates with decreasing
/// terms, so the remainder after `x²` lies in `[0, α₃x³]`.
pub fn truncation_bound(config: &PhysicsConfig, bc: BoundaryCondition) -> f64 {
    let m2c2 = (config.mass() * config.light_speed()).powi(2);
    let x_max = analytic_p2_spectrum(config, bc).last().copied().unwrap_or(0.0) / m2c2;
    alpha_f64(3) * config.rest_energy() * x_max.powi(3)
}

/// Analytic free-particle ground state: only the lowest `p²` eigenvalue
/// matters and every truncation order is increasing in it for `x < 1`.
pub fn analytic_free_ground(config: &PhysicsConfig, bc: BoundaryCondition, order: usize) -> f64 {
    let lam = analytic_p2_spectrum(config, bc)[0];
    let x = lam / (config.mass() * config.light_speed()).powi(2);
    let mc2 = config.rest_energy();
    (1..=order)
        .map(|l| {
            let sign = if l % 2 == 1 { 1.0 } else { -1.0 };
            sign * alpha_f64(l) * x.powi(l as i32)
        })
        .sum::<f64>()
        * mc2
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    fn cfg(ratio: f64, qubits: u32) -> PhysicsConfig {
        PhysicsConfig::from_compton_ratio(1.0, 1.0, ratio, qubits).unwrap()
    }

    #[test]
    fn free_pbc_ground_is_uniform() {
        let c = cfg(0.3, 3);
        let r = exact_ground(&c, BoundaryCondition::Pbc, 1, &PotentialSpec::none(3)).unwrap();
        assert_abs_diff_eq!(r.ground_energy, 0.0, epsilon = 1e-14);
        for a in r.ground_vector.amplitudes() {
            assert_abs_diff_eq!(a.re, 1.0 / 8f64.sqrt(), epsilon = 1e-10);
        }
        assert!(r.residual < 1e-12);
    }

    #[test]
    fn free_dbc_ground_l2() {
        let c = cfg(1.0, 2);
        let r = exact_ground(&c, BoundaryCondition::Dbc, 1, &PotentialSpec::none(2)).unwrap();
        assert_abs_diff_eq!(r.ground_energy, 0.5 * (2.0 - 2.0 * (PI / 5.0).cos()), epsilon = 1e-12);
        assert_abs_diff_eq!(r.ground_energy, 0.190_983_005_625_052_6, epsilon = 1e-12);
        assert!(r.eigenvalues.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn order_two_ground_is_lower() {
        for bc in [BoundaryCondition::Pbc, BoundaryCondition::Dbc] {
            let c = cfg(0.3, 3);
            let pot = PotentialSpec::harmonic(3, 0.5, 0.05, 0.0).unwrap();
            let g1 = exact_ground(&c, bc, 1, &pot).unwrap().ground_energy;
            let g2 = exact_ground(&c, bc, 2, &pot).unwrap().ground_energy;
            assert!(g2 <= g1);
        }
    }

    #[test]
    fn analytic_spectrum_examples() {
        let c = cfg(0.5, 3);
        let s = c.momentum_scale_sq();
        let pbc = analytic_p2_spectrum(&c, BoundaryCondition::Pbc);
        assert_eq!(pbc[0], 0.0);
        assert_abs_diff_eq!(*pbc.last().unwrap(), 4.0 * s, epsilon = 1e-15);
        let c2 = cfg(0.5, 2);
        assert_abs_diff_eq!(analytic_p2_spectrum(&c2, BoundaryCondition::Dbc)[0], 0.25 * 0.381_966_011_250_105_1, epsilon = 1e-15);
    }

    #[test]
    fn sqrt_examples() {
        let c = cfg(0.2, 3);
        let r = exact_sqrt_kinetic_ground(&c, BoundaryCondition::Pbc, &PotentialSpec::none(3)).unwrap();
        assert_abs_diff_eq!(r.ground_energy, 0.0, epsilon = 1e-14);
        let r = exact_sqrt_kinetic_ground(&c, BoundaryCondition::Dbc, &PotentialSpec::none(3)).unwrap();
        let expected = (1.0 + 0.04 * (2.0 - 2.0 * (PI / 9.0).cos())).sqrt() - 1.0;
        assert_abs_diff_eq!(r.ground_energy, expected, epsilon = 1e-14);
    }

    #[test]
    fn sqrt_matrix_squares_back() {
        for bc in [BoundaryCondition::Pbc, BoundaryCondition::Dbc] {
            let c = PhysicsConfig::from_compton_ratio(1.7, 0.9, 0.35, 4).unwrap();
            let k = sqrt_kinetic_matrix(&c, bc).unwrap().matrix / c.rest_energy();
            let id = DMatrix::<f64>::identity(16, 16);
            let lhs = (&k + &id) * (&k + &id);
            let rhs = &id + build_p2_matrix(&c, bc).unwrap().matrix / (c.mass() * c.light_speed()).powi(2);
            assert!((lhs - rhs).amax() < 1e-10);
        }
    }

    #[test]
    fn dense_matches_analytic_free_ground() {
        for l in 2..=5 {
            for order in 1..=3 {
                let c = cfg(0.3, l);
                let dense = exact_ground(&c, BoundaryCondition::Dbc, order, &PotentialSpec::none(l)).unwrap();
                assert_abs_diff_eq!(dense.ground_energy, analytic_free_ground(&c, BoundaryCondition::Dbc, order), epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn too_large() {
        let c = cfg(0.3, 11);
        assert_eq!(
            exact_ground(&c, BoundaryCondition::Pbc, 1, &PotentialSpec::none(11)).unwrap_err(),
            Error::TooLarge { qubits: 11, max: 10 }
        );
    }
}
