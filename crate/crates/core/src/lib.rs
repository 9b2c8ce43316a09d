//! Penalized variational solver for the semiclassical magnetic nonlinear Schrödinger
//! equation in cylindrical symmetry, with concentration diagnostics.

pub mod asymptotics;
pub mod cli;
pub mod error;
pub mod limit2d;
pub mod numerics;
pub mod potentials;
pub mod real;
pub mod reduced;
pub mod solver;
pub mod verify;
pub mod vortex;

pub use error::{Error, Result};
pub use real::Real;

pub type Grid = reduced::HalfPlaneGrid<f64>;
pub type Field = reduced::ComplexField<f64>;
pub type Context = reduced::ReducedContext<f64>;
pub type Disc = reduced::Discretization<f64>;
pub type MagneticPotential = potentials::CylMagneticPotential<f64>;
pub type Scalar = potentials::ScalarPotential<f64>;
pub type Domain = potentials::ConcentrationDomain<f64>;
pub type Penalization = potentials::PenalizationParams<f64>;
pub type GroundState = limit2d::GroundState1D<f64>;
pub type Solution = solver::SolveResult<f64>;
pub type Vortex = vortex::VortexConfig<f64>;
