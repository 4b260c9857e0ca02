//! Continuous-time primal-dual dynamics for equality-constrained convex
//! problems: simulation, contraction certificates in a skew metric, and
//! steady-state tracking bounds for perturbed, observer-driven and layered
//! systems.
//!
//! The numerical core is generic over [`Scalar`] (`f32`/`f64`); the aliases
//! at the crate root fix it to `f64`, which is what the CLI and the
//! acceptance suite use.

pub mod agc;
pub mod contraction;
pub mod dynamics;
pub mod error;
pub mod hierarchy;
pub mod matrixcore;
pub mod problem;
pub mod robustness;
pub mod scalar;
pub mod signal;

pub use contraction::{certify, ContractionCertificate};
pub use dynamics::{integrate, pd_vector_field, ObserverConfig, Trajectory, VectorField};
pub use error::{Error, Result};
pub use matrixcore::DenseMatrix;
pub use problem::{incidence_from_edges, make_callable_problem, make_quadratic_problem, PDState, SaddleProblem};
pub use scalar::Scalar;
pub use signal::{Signal, VectorSignal};

pub type Matrix = DenseMatrix<f64>;
pub type Matrix32 = DenseMatrix<f32>;
pub type Problem = SaddleProblem<f64>;
pub type Field = VectorField<f64>;
pub type Traj = Trajectory<f64>;
