//! Symmetric solutions of Nahm's equations and the numerical Nahm transform.
//!
//! The core is generic over the real scalar (see [`Real`]); the `*64`
//! aliases below fix it to `f64`.

pub mod axial;
pub mod intertwiners;
pub mod nahm;
pub mod numerics;
pub mod scalar;
pub mod so3rep;
pub mod spherical;
pub mod transform;

pub use scalar::Real;

pub type NahmTriple64 = nahm::NahmTriple<f64>;
pub type NahmSolution64 = nahm::NahmSolution<f64>;
pub type GeneratorTriple64 = so3rep::GeneratorTriple<f64>;
pub type IntertwinerTriple64 = intertwiners::IntertwinerTriple<f64>;
pub type ChainProfile64 = spherical::ChainProfile<f64>;
pub type CokernelBasis64 = transform::CokernelBasis<f64>;
pub type HiggsSample64 = transform::HiggsSample<f64>;

/// Any failure surfaced by the toolkit.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error(transparent)]
    Linalg(#[from] numerics::LinalgError),
    #[error(transparent)]
    Ode(#[from] numerics::OdeError),
    #[error(transparent)]
    Rep(#[from] so3rep::RepError),
    #[error(transparent)]
    Intertwiner(#[from] intertwiners::IntertwinerError),
    #[error(transparent)]
    Nahm(#[from] nahm::NahmError),
    #[error(transparent)]
    Axial(#[from] axial::AxialError),
    #[error(transparent)]
    Spherical(#[from] spherical::SphericalError),
    #[error(transparent)]
    Transform(#[from] transform::TransformError),
}
