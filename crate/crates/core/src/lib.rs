//! Vakonomic and nonholonomic mechanics on iterated tangent and cotangent
//! bundles.
//!
//! The crate covers the canonical maps between `TT*Q`, `T*TQ` and `T*T*Q`,
//! the vakonomic Lagrangian `𝔏 = L + λ·φ` with its Dirac differential,
//! residual tests for the associated Dirac structures, a numerical check of
//! whether the vakonomic and nonholonomic dynamical submanifolds are
//! Lagrangian, and integrators for both kinds of dynamics.
//!
//! Everything is generic over the scalar type; the aliases below fix it to
//! `f64`.
//!
//! ```
//! use vakonomic::{builtin, integrate_vakonomic, InitialData, Mode, SolverConfig};
//!
//! let spec = builtin("particle").unwrap();
//! let init = InitialData::new(vec![0.0, 1.0, 0.0], vec![1.0, 0.0, 1.0], vec![2.0], Mode::Vakonomic);
//! let traj = integrate_vakonomic(&spec, &init, &SolverConfig::new(1e-2, 1.0)).unwrap();
//! assert_eq!(traj.len(), 101);
//! assert!(traj.momentum_drift(0) < 1e-10);
//! ```

// `!(x <= tol)` is used on purpose so that NaN fails the check
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod dirac;
pub mod dual;
pub mod dynamics;
pub mod error;
pub mod export;
pub mod expr;
pub mod field;
pub mod geometry;
pub mod linalg;
pub mod scalar;
pub mod submanifold;
pub mod system;
pub mod systems;

pub use dirac::{Aggregation, DiracResidual};
pub use dual::Dual;
pub use dynamics::{
    energy_series, integrate, integrate_nonholonomic, integrate_vakonomic, theorem_equivalence_report, InitialData, Integrator,
    Mode, SolverConfig,
};
pub use error::{Error, Result};
pub use expr::{parse, parse_with_params, Expression, ParseError};
pub use field::{GradientMode, ScalarField};
pub use scalar::{Coefficient, Real, Scalar};
pub use submanifold::SubmanifoldKind;
pub use system::SystemDefinition;
pub use systems::BUILTIN_NAMES;

pub type SystemSpec = system::SystemSpec<f64>;
pub type VakState = geometry::VakState<f64>;
pub type Trajectory = dynamics::Trajectory<f64>;
pub type StepDiagnostics = dynamics::StepDiagnostics<f64>;
pub type EquivalenceReport = dynamics::EquivalenceReport<f64>;
pub type SubmanifoldChart = submanifold::SubmanifoldChart<f64>;
pub type PullbackMatrix = submanifold::PullbackMatrix<f64>;
pub type LinearDiracData = dirac::LinearDiracData<f64>;
pub type TTStarPoint = geometry::TTStarPoint<f64>;
pub type Matrix = linalg::Matrix<f64>;

/// Built-in system in double precision.
pub fn builtin(name: &str) -> Result<SystemSpec> {
    systems::builtin(name)
}
