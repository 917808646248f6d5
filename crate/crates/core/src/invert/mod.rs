//! Iterative-thresholding recovery of the sources `G_k = F(u_{δ_k})`.
//!
//! For each excitation level the source is updated by
//!
//! ```text
//! G ← φ/(λ+M) + M·G/(λ+M)
//! ```
//!
//! where `ψ` solves `−Δψ = G`, `ψ = δ_k·g`, and `φ` is the harmonic extension
//! of the flux misfit `(∂_ν ψ − m_k)` on the observed nodes (zero elsewhere
//! on the boundary). The sources are turned back into `F` by [`reconstruct`].

mod operator;
mod reconstruct;

pub use operator::MisfitOperator;

pub use reconstruct::{
    level_crossings, reconstruct, relative_error, Crossing, ReconstructedF, RelativeError, Sample,
};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::forward::{solve_linear_from, solve_semilinear, LinearProblem, SolverSettings};
use crate::grid::{dirichlet_g, l2_norm, normal_derivative, BoundaryTrace, Grid2D, ScalarField};
use crate::measure::MeasurementSet;
use crate::nonlinearity::Nonlinearity;
use crate::scalar::Real;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegularizationParams {
    /// Thresholding weight `M > 0`.
    pub m: f64,
    /// Tikhonov weight `λ ≥ 0`.
    pub lambda: f64,
    /// Relative L² change below which a level stops. Zero disables early stopping.
    pub eps_stop: f64,
    pub max_outer: usize,
}

impl Default for RegularizationParams {
    fn default() -> Self {
        Self { m: 0.8, lambda: 9.2e-4, eps_stop: 1e-3, max_outer: 500 }
    }
}

impl RegularizationParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.m > 0.0) {
            return Err(Error::InvalidArgument(format!("M = {} must be positive", self.m)));
        }
        if !(self.lambda >= 0.0) {
            return Err(Error::InvalidArgument(format!("lambda = {} must be >= 0", self.lambda)));
        }
        if !(self.eps_stop >= 0.0) {
            return Err(Error::InvalidArgument(format!("eps_stop = {} must be >= 0", self.eps_stop)));
        }
        if self.max_outer == 0 {
            return Err(Error::InvalidArgument("max_outer must be at least 1".into()));
        }
        Ok(())
    }
}

/// Converged state of one excitation level.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct LevelInversion<T> {
    pub delta: T,
    pub source: ScalarField<T>,
    /// Solution of `−Δψ = source`, `ψ = δ·g`.
    pub psi: ScalarField<T>,
    pub iterations: usize,
    pub converged: bool,
}

/// Plain summary of a level, for reports.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct LevelSummary<T> {
    pub delta: T,
    pub iterations: usize,
    pub converged: bool,
    pub source_l2: T,
}

impl<T: Real> LevelInversion<T> {
    pub fn summary(&self) -> LevelSummary<T> {
        LevelSummary {
            delta: self.delta,
            iterations: self.iterations,
            converged: self.converged,
            source_l2: l2_norm(&self.source),
        }
    }
}

/// Output of one thresholding update.
#[derive(Debug, Clone)]
pub struct StepOutput<T> {
    pub next: ScalarField<T>,
    pub psi: ScalarField<T>,
    pub phi: ScalarField<T>,
}

/// Warm-start fields carried between successive updates of a level.
#[derive(Debug, Clone, Default)]
pub struct WarmStart<T> {
    pub psi: Option<ScalarField<T>>,
    pub phi: Option<ScalarField<T>>,
}

fn state_solve<T: Real>(
    source: &ScalarField<T>,
    delta: T,
    settings: &SolverSettings,
    warm: Option<&ScalarField<T>>,
) -> Result<ScalarField<T>> {
    let bc = dirichlet_g(source.grid(), delta)?;
    solve_linear_from(&LinearProblem::new(source.clone(), T::zero(), bc)?, settings, warm)
}

/// Harmonic field whose boundary values are the flux misfit on the observed nodes.
fn misfit_lift<T: Real>(
    psi: &ScalarField<T>,
    data: &BoundaryTrace<T>,
    settings: &SolverSettings,
    warm: Option<&ScalarField<T>>,
) -> Result<ScalarField<T>> {
    let grid = *psi.grid();
    let flux = normal_derivative(psi, &data.nodes)?;
    let mut boundary = ScalarField::zeros(grid);
    for ((&(i, j), &f), &m) in data.nodes.iter().zip(&flux.values).zip(&data.values) {
        boundary.set(i, j, f - m);
    }
    solve_linear_from(&LinearProblem::new(ScalarField::zeros(grid), T::zero(), boundary)?, settings, warm)
}

/// One thresholding update of the source for level `δ`.
pub fn threshold_step<T: Real>(
    source: &ScalarField<T>,
    delta: T,
    data: &BoundaryTrace<T>,
    params: &RegularizationParams,
    settings: &SolverSettings,
) -> Result<StepOutput<T>> {
    threshold_step_warm(source, delta, data, params, settings, &WarmStart::default())
}

pub fn threshold_step_warm<T: Real>(
    source: &ScalarField<T>,
    delta: T,
    data: &BoundaryTrace<T>,
    params: &RegularizationParams,
    settings: &SolverSettings,
    warm: &WarmStart<T>,
) -> Result<StepOutput<T>> {
    if data.nodes.len() != data.values.len() {
        return Err(Error::InvalidArgument("trace nodes and values differ in length".into()));
    }
    let psi = state_solve(source, delta, settings, warm.psi.as_ref())?;
    let phi = misfit_lift(&psi, data, settings, warm.phi.as_ref())?;
    let denom = T::lit(params.lambda + params.m);
    let (a, b) = (T::one() / denom, T::lit(params.m) / denom);
    let next = phi.zip_with(source, |p, g| a * p + b * g);
    if !next.is_finite() {
        return Err(Error::NonFinite("thresholding update"));
    }
    Ok(StepOutput { next, psi, phi })
}

/// Runs the thresholding iteration for one level, starting from `F0(u_{δ,F0})`.
///
/// Stops once `‖G_{ℓ+1} − G_ℓ‖ ≤ eps_stop·‖G_ℓ‖` or after `max_outer` updates; the
/// returned `psi` is re-solved from the final source. Changes below the linear
/// solver tolerance also count as converged, since they are solver round-off.
pub fn run_level<T: Real>(
    grid: &Grid2D<T>,
    delta: T,
    data: &BoundaryTrace<T>,
    initial: &Nonlinearity,
    params: &RegularizationParams,
    settings: &SolverSettings,
) -> Result<LevelInversion<T>> {
    let op = MisfitOperator::new(*grid, &data.nodes, settings)?;
    run_level_with(&op, delta, data, initial, params, settings)
}

/// [`run_level`] with a prebuilt operator; each update costs two dense
/// products instead of two SOR solves.
pub fn run_level_with<T: Real>(
    op: &MisfitOperator<T>,
    delta: T,
    data: &BoundaryTrace<T>,
    initial: &Nonlinearity,
    params: &RegularizationParams,
    settings: &SolverSettings,
) -> Result<LevelInversion<T>> {
    params.validate()?;
    op.check_nodes(&data.nodes)?;
    let grid = op.grid();
    let u0 = solve_semilinear(grid, initial, delta, settings)?;
    let mut source = u0.map(|v| initial.eval(v.max(T::zero()).min(delta)));
    let lift_flux = op.lift_flux(delta, settings)?;
    let denom = T::lit(params.lambda + params.m);
    let (a, b) = (T::one() / denom, T::lit(params.m) / denom);
    let eps = T::lit(params.eps_stop);
    let floor = T::lit(settings.sor_tol);
    let mut iterations = 0;
    let mut converged = false;
    while iterations < params.max_outer {
        let flux = op.flux(&source, &lift_flux);
        let misfit: Vec<T> = flux.iter().zip(&data.values).map(|(&f, &m)| f - m).collect();
        let phi = op.lift(&misfit);
        let next = phi.zip_with(&source, |p, g| a * p + b * g);
        if !next.is_finite() {
            return Err(Error::NonFinite("thresholding update"));
        }
        iterations += 1;
        let change = l2_norm(&next.zip_with(&source, |x, y| x - y));
        let stop = params.eps_stop > 0.0 && (change <= eps * l2_norm(&source) || change <= floor);
        source = next;
        if stop {
            converged = true;
            break;
        }
    }
    let psi = state_solve(&source, delta, settings, Some(&u0))?;
    Ok(LevelInversion { delta, source, psi, iterations, converged })
}

/// Inverts every level of a measurement set on its coarse grid, in parallel.
pub fn run_all<T: Real>(
    data: &MeasurementSet<T>,
    initial: &Nonlinearity,
    params: &RegularizationParams,
    settings: &SolverSettings,
) -> Result<Vec<LevelInversion<T>>> {
    data.validate()?;
    let grid = data.coarse_grid()?;
    let op = MisfitOperator::new(grid, &data.geometry.nodes(&grid)?, settings)?;
    (0..data.levels())
        .into_par_iter()
        .map(|k| run_level_with(&op, data.deltas[k], &data.trace(k)?, initial, params, settings))
        .collect()
}
