//! Precomputed representers for the thresholding update.
//!
//! With `c_j` the stencil functional giving the flux at observed node `j`,
//! the flux of `ψ` is `c_j·ψ_lift + w_j·G` where `w_j` solves `−Δ_h w_j = c_j`
//! with zero boundary data (the discrete Laplacian is symmetric). The misfit
//! lift is `φ = Σ_j r_j·H_j` with `H_j` the discrete harmonic field equal to 1
//! at node `j` and 0 on the rest of the boundary. Both families depend only on
//! the grid and the observed nodes, so they are shared by every level.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::forward::{solve_linear, LinearProblem, SolverSettings};
use crate::grid::{normal_derivative, Grid2D, ScalarField};
use crate::scalar::Real;

#[derive(Debug, Clone)]
pub struct MisfitOperator<T> {
    grid: Grid2D<T>,
    nodes: Vec<(usize, usize)>,
    flux_representers: Vec<ScalarField<T>>,
    harmonic_basis: Vec<ScalarField<T>>,
}

impl<T: Real> MisfitOperator<T> {
    pub fn new(grid: Grid2D<T>, nodes: &[(usize, usize)], settings: &SolverSettings) -> Result<Self> {
        let two_h = T::lit(2.0) * grid.h();
        let built = nodes
            .par_iter()
            .map(|&(i, j)| {
                let edge = grid.edge_of(i, j)?;
                let zeros = ScalarField::zeros(grid);
                // stencil weights on the two inward neighbours; the boundary value is data
                let mut functional = zeros.clone();
                let (i1, j1, i2, j2) = inward_pair(&grid, i, j, edge);
                functional.set(i1, j1, T::lit(-4.0) / two_h);
                functional.set(i2, j2, T::one() / two_h);
                let w = solve_linear(&LinearProblem::new(functional, T::zero(), zeros.clone())?, settings)?;
                let mut unit = zeros.clone();
                unit.set(i, j, T::one());
                let hj = solve_linear(&LinearProblem::new(zeros, T::zero(), unit)?, settings)?;
                Ok((w, hj))
            })
            .collect::<Result<Vec<_>>>()?;
        let (flux_representers, harmonic_basis) = built.into_iter().unzip();
        Ok(Self { grid, nodes: nodes.to_vec(), flux_representers, harmonic_basis })
    }

    pub fn grid(&self) -> &Grid2D<T> {
        &self.grid
    }

    pub fn nodes(&self) -> &[(usize, usize)] {
        &self.nodes
    }

    /// Flux of the state with source `source` and boundary lift flux `lift_flux`.
    pub fn flux(&self, source: &ScalarField<T>, lift_flux: &[T]) -> Vec<T> {
        let n = self.grid.n();
        self.flux_representers
            .iter()
            .zip(lift_flux)
            .map(|(w, &base)| {
                let mut acc = T::zero();
                for j in 1..n {
                    for i in 1..n {
                        acc = acc + w.get(i, j) * source.get(i, j);
                    }
                }
                base + acc
            })
            .collect()
    }

    /// Harmonic field with boundary values `misfit` on the observed nodes, zero elsewhere.
    pub fn lift(&self, misfit: &[T]) -> ScalarField<T> {
        let mut out = ScalarField::zeros(self.grid);
        for (h, &r) in self.harmonic_basis.iter().zip(misfit) {
            if r == T::zero() {
                continue;
            }
            for (o, &v) in out.values_mut().iter_mut().zip(h.values()) {
                *o = *o + r * v;
            }
        }
        out
    }

    /// Flux of the source-free state `ψ = δ·g`, needed once per level.
    pub fn lift_flux(&self, delta: T, settings: &SolverSettings) -> Result<Vec<T>> {
        let bc = crate::grid::dirichlet_g(&self.grid, delta)?;
        let psi = solve_linear(&LinearProblem::new(ScalarField::zeros(self.grid), T::zero(), bc)?, settings)?;
        Ok(normal_derivative(&psi, &self.nodes)?.values)
    }

    pub fn check_nodes(&self, nodes: &[(usize, usize)]) -> Result<()> {
        if nodes != self.nodes.as_slice() {
            return Err(Error::InvalidArgument("trace nodes differ from the operator's nodes".into()));
        }
        Ok(())
    }
}

fn inward_pair<T: Real>(grid: &Grid2D<T>, i: usize, j: usize, edge: crate::grid::Edge) -> (usize, usize, usize, usize) {
    use crate::grid::Edge::*;
    let n = grid.n();
    match edge {
        Right => (n - 1, j, n - 2, j),
        Left => (1, j, 2, j),
        Top => (i, n - 1, i, n - 2),
        Bottom => (i, 1, i, 2),
    }
}
