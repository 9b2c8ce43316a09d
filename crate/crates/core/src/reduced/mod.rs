//! Cylindrically reduced problem on a truncated (rho, x3) half-plane.

mod fastsolve;
mod grid;
pub mod io;
mod nonlinearity;
mod operator;

pub use fastsolve::{Dst1, FastSolver, SeparablePreconditioner, SolveStats};
pub use grid::{ComplexField, HalfPlaneGrid, Measure};
pub use nonlinearity::{penalized_big_g, penalized_g};
pub use operator::{Discretization, NodeCoefficients, ReducedContext};

/// Discrete `||u||_eps^2` of the reduced quadratic form.
pub fn energy_norm<T: crate::Real>(disc: &Discretization<T>, u: &ComplexField<T>) -> T {
    disc.energy_norm(u)
}

/// Nodal `((i eps d_rho + phi) u, (i eps d_x3 + A3) u)`.
pub fn magnetic_gradient<T: crate::Real>(
    disc: &Discretization<T>,
    u: &ComplexField<T>,
) -> (ComplexField<T>, ComplexField<T>) {
    disc.magnetic_gradient(u)
}

#[allow(non_snake_case)]
pub fn J_eps<T: crate::Real>(disc: &Discretization<T>, u: &ComplexField<T>) -> T {
    disc.functional(u)
}

#[allow(non_snake_case)]
pub fn grad_J_eps<T: crate::Real>(disc: &Discretization<T>, u: &ComplexField<T>) -> ComplexField<T> {
    disc.gradient(u)
}
