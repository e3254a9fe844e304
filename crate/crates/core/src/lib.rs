//! First-quantised simulation of a single particle on a `2^L`-point grid,
//! with non-relativistic and leading relativistic kinetic energies under
//! periodic and Dirichlet boundaries.
//!
//! The kinetic energy is built from expectation values of the cyclic
//! translation operator and a handful of edge-coupling operators, which are
//! the quantities the measurement circuits in [`circuits`] can estimate.
//! [`oracle`] provides dense-matrix ground truth for all of it.

pub mod circuits;
pub mod coefficients;
pub mod error;
pub mod estimators;
pub mod grid;
pub mod operators;
pub mod oracle;
pub mod vqe;

pub use circuits::{BoundaryVariant, Estimate, MeasurementMode, ShotPlan};
pub use coefficients::CoefficientSet;
pub use error::{Error, Result};
pub use estimators::{total_energy, DbcOptions, EnergyBreakdown, PotentialSpec};
pub use grid::{PhysicsConfig, WaveFunction};
pub use operators::BoundaryCondition;
pub use oracle::SpectralResult;
pub use vqe::{AnsatzKind, AnsatzSpec, Budget, Objective, OptimizerKind, VqeResult};

/// Crate version, recorded in result files.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
