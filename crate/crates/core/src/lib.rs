//! Normalized ground states of two-component Schrödinger systems
//!
//! ```text
//! −Δu + λ₁u = μ₁|u|^{p−2}u + βr₁|u|^{r₁−2}|v|^{r₂}u
//! −Δv + λ₂v = μ₂|v|^{q−2}v + βr₂|u|^{r₁}|v|^{r₂−2}v
//! |u|₂ = a₁, |v|₂ = a₂
//! ```
//!
//! for radial states in `R^N`. The numerical core is generic over [`Real`]
//! (`f32` or `f64`); the aliases below fix `f64`, which the solvers and the
//! command-line tool use.

pub mod banded;
pub mod cli;
pub mod error;
pub mod expsum;
pub mod fiber;
pub mod io;
pub mod landscape;
pub mod ode;
pub mod params;
pub mod radial;
pub mod real;
pub mod scalar;
pub mod solver;

pub use error::{Error, Result};
pub use real::Real;

pub type Params = params::ProblemParams<f64>;
pub type Grid = radial::RadialGrid<f64>;
pub type Field = radial::RadialField<f64>;
pub type Pair = radial::StatePair<f64>;
pub type ScalarState = scalar::ScalarGroundState<f64>;
pub type GroundState = solver::GroundStateResult<f64>;
pub type Summary = solver::ResultSummary<f64>;
