//! Recovery of the semilinear term `F` in `−Δu = F(u)` on the unit square
//! from Neumann flux data measured under the Dirichlet excitations `δ·y`.
//!
//! The pipeline is: [`measure::synthesize`] noisy flux traces for levels
//! `δ_k = k/N`, recover the sources `G_k = F(u_k)` level by level with
//! [`invert::run_all`], and turn them back into samples of `F` with
//! [`invert::reconstruct`]. [`experiment`] wraps this behind a flat config and
//! carries the parameter tables of the original experiments; [`checks`]
//! certifies the discrete maximum principle, the comparison bounds and the
//! Green identity the method rests on.
//!
//! The numerical core is generic over [`Real`] (`f32` or `f64`); the aliases
//! below fix the scalar type for the common cases.
//!
//! ```
//! use semilin::{forward::{solve_semilinear, SolverSettings}, Grid, Nonlinearity};
//!
//! let grid = Grid::new(16).unwrap();
//! let u = solve_semilinear(&grid, &Nonlinearity::NegCube, 1.0, &SolverSettings::default()).unwrap();
//! assert!(u.min_value() >= 0.0 && u.max_value() <= 1.0);
//! ```

pub mod checks;
pub mod error;
pub mod experiment;
pub mod forward;
pub mod grid;
pub mod invert;
pub mod measure;
pub mod nonlinearity;
pub mod scalar;

pub use error::{Error, Result};
pub use nonlinearity::Nonlinearity;
pub use scalar::Real;

pub type Grid = grid::Grid2D<f64>;
pub type Field = grid::ScalarField<f64>;
pub type Trace = grid::BoundaryTrace<f64>;
pub type Measurements = measure::MeasurementSet<f64>;
pub type Level = invert::LevelInversion<f64>;
pub type Reconstruction = invert::ReconstructedF<f64>;

pub type GridF32 = grid::Grid2D<f32>;
pub type FieldF32 = grid::ScalarField<f32>;
pub type MeasurementsF32 = measure::MeasurementSet<f32>;
pub type LevelF32 = invert::LevelInversion<f32>;
