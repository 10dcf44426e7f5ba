//! Shared numerical kernel: dense complex linear algebra, an adaptive
//! Runge–Kutta integrator with dense output, and quadrature.

pub mod linalg;
pub mod ode;
pub mod quadrature;

use nalgebra as na;

pub use linalg::{
    cholesky, commutator, hermitian_eigen, kron, levi_civita, nullspace, qr, real_scale,
    solve_lower, solve_upper, svd_right, times_i, unitarity_defect, ComplexMatrixExt,
    HermitianEigen, LinalgError,
};
pub use ode::{integrate_to_blowup, ode_integrate, OdeError, OdeOptions, Outcome, Trajectory};
pub use quadrature::{gauss_legendre_unit, l2_inner_product, Quadrature};

pub type C<T> = na::Complex<T>;
pub type CMat<T> = na::DMatrix<C<T>>;
pub type CVec<T> = na::DVector<C<T>>;

/// Complex number from a real.
#[inline]
pub fn re<T: crate::Real>(x: T) -> C<T> {
    C::new(x, T::zero())
}

/// `i·x`.
#[inline]
pub fn im<T: crate::Real>(x: T) -> C<T> {
    C::new(T::zero(), x)
}
