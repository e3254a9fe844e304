//! Cyclic translation (the quantum adder), the boundary operators that turn
//! periodic expectations into Dirichlet ones, and dense lattice matrices for
//! oracle work.
//!
//! Index convention: `Â_x |j⟩ = |j+1 mod N⟩`, so on amplitudes the forward
//! shift moves `c_j` to position `j+1`. Every operator built here is real
//! symmetric, which is how Hermiticity shows up in the dense matrices.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::coefficients::alpha_f64;
use crate::error::{Error, Result};
use crate::grid::{PhysicsConfig, WaveFunction};

/// Largest grid for which dense matrices are materialised.
pub const MAX_DENSE_QUBITS: u32 = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundaryCondition {
    Pbc,
    Dbc,
}

impl std::fmt::Display for BoundaryCondition {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            BoundaryCondition::Pbc => f.write_str("pbc"),
            BoundaryCondition::Dbc => f.write_str("dbc"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ShiftDirection {
    /// `Â_x`, the adder.
    Forward,
    /// `Â_x†`, the subtractor.
    Backward,
}

/// The edge-coupling operators.
///
/// `E1Full`/`E2Full` are the operators `Â_xÊ₀ + Ê₀Â_x†` and `Ê₀Â_x + Â_x†Ê₀`
/// evaluated under the cyclic adder; they carry the diagonal pieces
/// `2|0⟩⟨0|` and `2|N−1⟩⟨N−1|`. `E1Paper`/`E2Paper` are only the
/// off-diagonal couplings `|1⟩⟨N−1| + h.c.` and `|0⟩⟨N−2| + h.c.`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum BoundaryOperator {
    E0,
    E1Full,
    E2Full,
    E0Sq,
    E1Paper,
    E2Paper,
}

impl BoundaryOperator {
    pub fn label(&self) -> &'static str {
        match self {
            BoundaryOperator::E0 => "E0",
            BoundaryOperator::E1Full => "E1full",
            BoundaryOperator::E2Full => "E2full",
            BoundaryOperator::E0Sq => "E0sq",
            BoundaryOperator::E1Paper => "E1paper",
            BoundaryOperator::E2Paper => "E2paper",
        }
    }
}

/// Cyclic shift of the amplitudes by `power` grid points.
pub fn apply_shift(state: &WaveFunction, power: usize, direction: ShiftDirection) -> WaveFunction {
    let n = state.len();
    let p = power % n;
    let src = state.amplitudes();
    let mut out = vec![Complex64::new(0.0, 0.0); n];
    for (j, &c) in src.iter().enumerate() {
        let dest = match direction {
            ShiftDirection::Forward => (j + p) % n,
            ShiftDirection::Backward => (j + n - p) % n,
        };
        out[dest] = c;
    }
    WaveFunction::from_normalized(out, state.qubits())
}

/// `⟨ψ|(Â_x†)^l|ψ⟩ = Σ_j c_j* c_{j+l}`. Twice its real part is `⟨Â⁽ˡ⁾⟩`.
pub fn expectation_adjoint_shift(state: &WaveFunction, l: usize) -> Complex64 {
    let c = state.amplitudes();
    let n = c.len();
    (0..n).map(|j| c[j].conj() * c[(j + l) % n]).sum()
}

/// `⟨Â⁽ˡ⁾⟩ = ⟨Â_x^l + Â_x†^l⟩`, real for every state.
pub fn expectation_a_sum(state: &WaveFunction, l: usize) -> f64 {
    2.0 * expectation_adjoint_shift(state, l).re
}

fn pair_term(c: &[Complex64], a: usize, b: usize) -> f64 {
    2.0 * (c[a].conj() * c[b]).re
}

pub fn expectation_boundary(state: &WaveFunction, which: BoundaryOperator) -> f64 {
    let c = state.amplitudes();
    let n = c.len();
    let p0 = c[0].norm_sqr();
    let plast = c[n - 1].norm_sqr();
    match which {
        BoundaryOperator::E0 => pair_term(c, n - 1, 0),
        BoundaryOperator::E0Sq => p0 + plast,
        BoundaryOperator::E1Paper => pair_term(c, 1, n - 1),
        BoundaryOperator::E2Paper => pair_term(c, 0, n - 2),
        BoundaryOperator::E1Full => pair_term(c, 1, n - 1) + 2.0 * p0,
        BoundaryOperator::E2Full => pair_term(c, 0, n - 2) + 2.0 * plast,
    }
}

/// A dense real-symmetric lattice operator.
#[derive(Debug, Clone, PartialEq)]
pub struct LatticeOperator {
    pub matrix: DMatrix<f64>,
    pub label: String,
    pub boundary: Option<BoundaryCondition>,
}

impl LatticeOperator {
    pub fn new(matrix: DMatrix<f64>, label: impl Into<String>, boundary: Option<BoundaryCondition>) -> Self {
        Self { matrix, label: label.into(), boundary }
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        let m = &self.matrix;
        m.is_square()
            && (0..m.nrows()).all(|i| (0..i).all(|j| (m[(i, j)] - m[(j, i)]).abs() <= tol))
    }

    /// `⟨ψ|M|ψ⟩` for a complex state.
    pub fn expectation(&self, state: &WaveFunction) -> Result<f64> {
        let n = self.dim();
        if state.len() != n {
            return Err(Error::LengthMismatch { expected: n, found: state.len() });
        }
        let c = state.amplitudes();
        let mut acc = Complex64::new(0.0, 0.0);
        for i in 0..n {
            let mut row = Complex64::new(0.0, 0.0);
            for (j, cj) in c.iter().enumerate() {
                let m = self.matrix[(i, j)];
                if m != 0.0 {
                    row += cj * m;
                }
            }
            acc += c[i].conj() * row;
        }
        Ok(acc.re)
    }

    pub fn pow(&self, k: u32) -> Self {
        let mut out = DMatrix::identity(self.dim(), self.dim());
        for _ in 0..k {
            out = &out * &self.matrix;
        }
        Self::new(out, format!("({})^{k}", self.label), self.boundary)
    }
}

fn check_dense(qubits: u32) -> Result<usize> {
    if qubits > MAX_DENSE_QUBITS {
        return Err(Error::TooLarge { qubits, max: MAX_DENSE_QUBITS });
    }
    Ok(1usize << qubits)
}

/// Dense `Â_x^power`, a permutation matrix.
pub fn shift_matrix(qubits: u32, power: usize) -> Result<DMatrix<f64>> {
    let n = check_dense(qubits)?;
    let mut m = DMatrix::zeros(n, n);
    for j in 0..n {
        m[((j + power) % n, j)] = 1.0;
    }
    Ok(m)
}

/// Dense `Â⁽ˡ⁾ = Â_x^l + Â_x†^l`.
pub fn a_sum_matrix(qubits: u32, l: usize) -> Result<LatticeOperator> {
    let a = shift_matrix(qubits, l)?;
    let m = &a + a.transpose();
    Ok(LatticeOperator::new(m, format!("A{l}"), None))
}

/// Dense boundary operator. The full variants are assembled from their
/// operator definitions rather than from the closed form.
pub fn boundary_matrix(qubits: u32, which: BoundaryOperator) -> Result<LatticeOperator> {
    let n = check_dense(qubits)?;
    let mut e0 = DMatrix::zeros(n, n);
    e0[(n - 1, 0)] = 1.0;
    e0[(0, n - 1)] = 1.0;
    let a = shift_matrix(qubits, 1)?;
    let at = a.transpose();
    let pair = |i: usize, j: usize| {
        let mut m = DMatrix::zeros(n, n);
        m[(i, j)] = 1.0;
        m[(j, i)] = 1.0;
        m
    };
    let m = match which {
        BoundaryOperator::E0 => e0,
        BoundaryOperator::E0Sq => &e0 * &e0,
        BoundaryOperator::E1Full => &a * &e0 + &e0 * &at,
        BoundaryOperator::E2Full => &e0 * &a + &at * &e0,
        BoundaryOperator::E1Paper => pair(1, n - 1),
        BoundaryOperator::E2Paper => pair(0, n - 2),
    };
    Ok(LatticeOperator::new(m, which.label(), Some(BoundaryCondition::Dbc)))
}

/// Lattice `p²`: `(mcℒ_m)²` times the second-difference stencil, cyclic for
/// PBC and with the corner couplings removed for DBC.
pub fn build_p2_matrix(config: &PhysicsConfig, bc: BoundaryCondition) -> Result<LatticeOperator> {
    let n = check_dense(config.qubits())?;
    let scale = config.momentum_scale_sq();
    let mut m = DMatrix::zeros(n, n);
    for j in 0..n {
        m[(j, j)] = 2.0 * scale;
        m[(j, (j + 1) % n)] -= scale;
        m[((j + 1) % n, j)] -= scale;
    }
    if bc == BoundaryCondition::Dbc {
        m[(0, n - 1)] = 0.0;
        m[(n - 1, 0)] = 0.0;
    }
    Ok(LatticeOperator::new(m, "p2", Some(bc)))
}

/// Highest kinetic order with matrix support (`p⁶`).
pub const MAX_MATRIX_ORDER: usize = 3;

/// `Σ_{l=1..order} mc² (−1)^{l+1} α_l (p²/m²c²)^l` built from powers of the
/// lattice `p²`.
pub fn build_kinetic_matrix(
    config: &PhysicsConfig,
    bc: BoundaryCondition,
    order: usize,
) -> Result<LatticeOperator> {
    if !(1..=MAX_MATRIX_ORDER).contains(&order) {
        return Err(Error::UnsupportedOrder(order));
    }
    let p2 = build_p2_matrix(config, bc)?;
    let mc2 = config.rest_energy();
    let x = p2.matrix / (config.mass() * config.mass() * config.light_speed() * config.light_speed());
    let n = x.nrows();
    let mut power = DMatrix::identity(n, n);
    let mut k = DMatrix::zeros(n, n);
    for l in 1..=order {
        power = &power * &x;
        let sign = if l % 2 == 1 { 1.0 } else { -1.0 };
        k += &power * (mc2 * sign * alpha_f64(l));
    }
    Ok(LatticeOperator::new(k, format!("K{order}"), Some(bc)))
}
