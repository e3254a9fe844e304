//! Coefficients of the relativistic kinetic-energy expansion.
//!
//! `α_l` multiplies `(p²/m²c²)^l` in the series of `√(1+x) − 1`. The `β_l`
//! regroup the periodic kinetic energy into `⟨Â⁽ˡ⁾⟩` terms and the `γ_d`
//! weight the boundary corrections `⟨F̂_d⟩` for Dirichlet grids.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{PhysicsConfig, WaveFunction};
use crate::operators::{expectation_a_sum, expectation_boundary, BoundaryCondition, BoundaryOperator};

/// Ratio `⟨p²⟩/m²c²` above which the truncated series is flagged.
pub const VALIDITY_THRESHOLD: f64 = 0.1;

/// `α_l = (2l)! / ((l!)² (2l−1) 4^l)`, exact.
pub fn alpha(l: usize) -> BigRational {
    assert!(l >= 1, "alpha is defined for l >= 1");
    // C(2l, l) by the multiplicative recurrence C(2k,k) = C(2k-2,k-1)·2(2k-1)/k.
    let mut central = BigInt::one();
    for k in 1..=l {
        central = central * BigInt::from(2 * (2 * k - 1)) / BigInt::from(k);
    }
    let denom = BigInt::from(2 * l - 1) * BigInt::from(4).pow(l as u32);
    BigRational::new(central, denom)
}

pub fn alpha_f64(l: usize) -> f64 {
    alpha(l).to_f64().expect("alpha fits in f64")
}

/// `β₀..β_order` for the periodic decomposition.
pub fn beta(config: &PhysicsConfig, order: usize) -> Result<Vec<f64>> {
    let mc2 = config.rest_energy();
    let l2 = config.compton_ratio().powi(2);
    let a1 = alpha_f64(1) * l2;
    match order {
        1 => Ok(vec![2.0 * mc2 * a1, -mc2 * a1]),
        2 => {
            let a2 = alpha_f64(2) * l2 * l2;
            Ok(vec![
                2.0 * mc2 * (a1 - 3.0 * a2),
                mc2 * (-a1 + 4.0 * a2),
                -mc2 * a2,
            ])
        }
        _ => Err(Error::UnsupportedOrder(order)),
    }
}

/// `γ₀..γ₃` for `F̂ = {Ê₀, Ê₁, Ê₂, Ê₀²}`.
pub fn gamma(config: &PhysicsConfig) -> [f64; 4] {
    let mc2 = config.rest_energy();
    let l2 = config.compton_ratio().powi(2);
    let a2 = mc2 * alpha_f64(2) * l2 * l2;
    [mc2 * alpha_f64(1) * l2 * (1.0 - l2), a2, a2, -a2]
}

/// `⟨p²⟩_bc / m²c²` for `state`.
pub fn validity_ratio(state: &WaveFunction, config: &PhysicsConfig, bc: BoundaryCondition) -> f64 {
    let mut d = 2.0 - expectation_a_sum(state, 1);
    if bc == BoundaryCondition::Dbc {
        d += expectation_boundary(state, BoundaryOperator::E0);
    }
    config.compton_ratio().powi(2) * d
}

/// Precomputed coefficients for one run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoefficientSet {
    pub order: usize,
    /// `α_l` as exact fractions, `"1/2"` style.
    pub alpha_exact: Vec<String>,
    pub alpha: Vec<f64>,
    pub beta: Vec<f64>,
    /// Present from order 2 on.
    pub gamma: Option<[f64; 4]>,
}

impl CoefficientSet {
    pub fn new(config: &PhysicsConfig, order: usize) -> Result<Self> {
        let beta = beta(config, order)?;
        let alphas: Vec<BigRational> = (1..=order).map(alpha).collect();
        Ok(Self {
            order,
            alpha_exact: alphas.iter().map(|a| a.to_string()).collect(),
            alpha: alphas.iter().map(|a| a.to_f64().unwrap_or(f64::NAN)).collect(),
            beta,
            gamma: (order >= 2).then(|| gamma(config)),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operators::a_sum_matrix;
    use approx::assert_abs_diff_eq;
    use nalgebra::DMatrix;
    use proptest::prelude::*;

    fn rat(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    fn cfg(ratio: f64) -> PhysicsConfig {
        PhysicsConfig::from_compton_ratio(1.0, 1.0, ratio, 3).unwrap()
    }

    /// Taylor coefficient of x^l in √(1+x): binom(1/2, l).
    fn sqrt_series_coefficient(l: usize) -> BigRational {
        let half = rat(1, 2);
        let mut acc = BigRational::one();
        for k in 0..l {
            acc = acc * (&half - BigRational::from_integer(BigInt::from(k))) / BigRational::from_integer(BigInt::from(k + 1));
        }
        acc
    }

    #[test]
    fn alpha_low_orders() {
        assert_eq!(alpha(1), rat(1, 2));
        assert_eq!(alpha(2), rat(1, 8));
        assert_eq!(alpha(3), rat(1, 16));
        assert_eq!(alpha(4), rat(5, 128));
    }

    #[test]
    fn alpha_matches_sqrt_series() {
        for l in 1..=25 {
            let sign = if l % 2 == 1 { BigRational::one() } else { -BigRational::one() };
            assert_eq!(alpha(l) * sign, sqrt_series_coefficient(l), "l = {l}");
        }
    }

    #[test]
    fn alpha_factorial_identity() {
        let fact = |n: usize| (1..=n).fold(BigInt::one(), |a, k| a * BigInt::from(k));
        for l in 1..=10usize {
            let lhs = alpha(l)
                * BigRational::from_integer(BigInt::from(2 * l - 1) * BigInt::from(4).pow(l as u32) * fact(l) * fact(l));
            assert!(lhs.is_integer());
            assert_eq!(lhs.to_integer(), fact(2 * l));
        }
    }

    #[test]
    fn beta_hand_values() {
        let b = beta(&cfg(0.1), 2).unwrap();
        assert_abs_diff_eq!(b[0], 0.009_925, epsilon = 1e-15);
        assert_abs_diff_eq!(b[1], -0.004_95, epsilon = 1e-15);
        assert_abs_diff_eq!(b[2], -1.25e-5, epsilon = 1e-18);

        let b1 = beta(&cfg(0.1), 1).unwrap();
        assert_eq!(b1.len(), 2);
        assert_abs_diff_eq!(b1[0], 0.01, epsilon = 1e-15);
        assert_abs_diff_eq!(b1[1], -0.005, epsilon = 1e-15);

        let tiny = beta(&cfg(1e-9), 2).unwrap();
        assert!(tiny.iter().all(|b| b.abs() < 1e-17));
        assert_eq!(beta(&cfg(0.1), 3), Err(Error::UnsupportedOrder(3)));
    }

    #[test]
    fn gamma_hand_values() {
        let g = gamma(&cfg(0.1));
        let expected = [0.004_95, 1.25e-5, 1.25e-5, -1.25e-5];
        for (a, b) in g.iter().zip(expected) {
            assert_abs_diff_eq!(*a, b, epsilon = 1e-17);
        }
        assert_eq!(gamma(&cfg(1.0))[0], 0.0);
    }

    #[test]
    fn validity_examples() {
        let c = cfg(0.3);
        let u = WaveFunction::uniform(3).unwrap();
        assert_abs_diff_eq!(validity_ratio(&u, &c, BoundaryCondition::Pbc), 0.0, epsilon = 1e-15);
        let b = WaveFunction::basis(3, 4).unwrap();
        assert_abs_diff_eq!(validity_ratio(&b, &c, BoundaryCondition::Pbc), 2.0 * 0.09, epsilon = 1e-15);

        let c2 = PhysicsConfig::from_compton_ratio(1.0, 1.0, 0.3, 2).unwrap();
        let d = WaveFunction::dirichlet_sine(2).unwrap();
        let expected = 0.09 * (2.0 - 2.0 * (std::f64::consts::PI / 5.0).cos());
        assert_abs_diff_eq!(validity_ratio(&d, &c2, BoundaryCondition::Dbc), expected, epsilon = 1e-15);
    }

    #[test]
    fn coefficient_set_shape() {
        let s1 = CoefficientSet::new(&cfg(0.1), 1).unwrap();
        assert_eq!(s1.beta.len(), 2);
        assert!(s1.gamma.is_none());
        let s2 = CoefficientSet::new(&cfg(0.1), 2).unwrap();
        assert_eq!(s2.alpha_exact, vec!["1/2", "1/8"]);
        assert_eq!(s2.beta.len(), 3);
        assert_abs_diff_eq!(s2.beta[2], -1.25e-5, epsilon = 1e-18);
        assert!(s2.gamma.is_some());
    }

    proptest! {
        #[test]
        fn beta_sums_to_zero(ratio in 1e-3f64..1.0, mass in 0.1f64..5.0, c in 0.1f64..5.0) {
            let conf = PhysicsConfig::from_compton_ratio(mass, c, ratio, 3).unwrap();
            let b = beta(&conf, 2).unwrap();
            prop_assert!((b[0] + 2.0 * b[1] + 2.0 * b[2]).abs() <= 1e-14 * conf.rest_energy());
        }

        #[test]
        fn gamma_structure(ratio in 1e-3f64..1.0) {
            let g = gamma(&cfg(ratio));
            prop_assert_eq!(g[1], g[2]);
            prop_assert_eq!(g[1], -g[3]);
        }

        #[test]
        fn beta_regrouping_is_an_operator_identity(v in prop::collection::vec(-1.0f64..1.0, 16), ratio in 0.01f64..0.5) {
            prop_assume!(v.iter().any(|x| x.abs() > 1e-3));
            let s = WaveFunction::from_real(&v).unwrap();
            let conf = PhysicsConfig::from_compton_ratio(1.0, 1.0, ratio, 4).unwrap();
            let b = beta(&conf, 2).unwrap();
            let decomposed = b[0] + b[1] * expectation_a_sum(&s, 1) + b[2] * expectation_a_sum(&s, 2);
            let a1 = a_sum_matrix(4, 1).unwrap().matrix;
            let d = DMatrix::<f64>::identity(16, 16) * 2.0 - a1;
            let l2 = ratio * ratio;
            let op = &d * (alpha_f64(1) * l2) - (&d * &d) * (alpha_f64(2) * l2 * l2);
            let direct = crate::operators::LatticeOperator::new(op, "k", None).expectation(&s).unwrap();
            prop_assert!((decomposed - direct).abs() <= 1e-12);
        }
    }
}
