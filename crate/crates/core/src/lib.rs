//! Finite-volume solvers for one-dimensional nonlocal conservation and
//! balance laws of the form
//!
//! ```text
//! ∂t ρ + ∂x ( g(ρ) v(ω_η ∗ ρ) ) = S
//! ```
//!
//! on periodic grids, with a forward-looking kernel `ω_η` supported on
//! `[0, η]`. Provided schemes:
//!
//! - first-order central-upwind (CU) flux with explicit Euler,
//! - first-order Godunov/upwind flux with explicit Euler,
//! - second-order CU with minmod reconstruction and SSP-RK2,
//! - the fully-discrete second-order Kurganov–Tadmor (KT) scheme.
//!
//! Weakly coupled systems (coupling only through the source term) are
//! handled component-wise.

pub mod error;
pub mod flux;
pub mod kt;
pub mod models;
pub mod nonlocal;
pub mod output;
pub mod recon;
pub mod scenario;
pub mod study;
pub mod systems;
pub mod timeint;

pub use error::{Result, SolverError};
pub use models::{
    Grid, InitialData, Interval, Kernel, NormBounds, ScalarModel, State, SystemModel,
};
pub use nonlocal::KernelWeights;
pub use scenario::{Scenario, ScenarioName};
pub use study::{ConvergenceReport, ConvergenceRow};
pub use timeint::{Problem, RunResult, Scheme, SchemeConfig};
