//! Finite-difference solvers on the unit square.
//!
//! The linear solver handles `−Δv + τv = f` with Dirichlet data by SOR on the
//! 5-point stencil. The semilinear problem `−Δu = F(u)`, `u = δ·y` on the
//! boundary, is solved by Picard iteration with one SOR solve per step.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{dirichlet_g, Grid2D, ScalarField};
use crate::nonlinearity::Nonlinearity;
use crate::scalar::Real;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverSettings {
    /// Relaxation factor in (1, 2). `None` selects `2 / (1 + sin πh)`.
    pub omega: Option<f64>,
    /// Relative ℓ² residual tolerance of the linear solve.
    pub sor_tol: f64,
    /// Sweep cap. `None` selects `100·n²`.
    pub sor_max_iter: Option<usize>,
    /// Sup-norm change tolerance between Picard iterates.
    pub picard_tol: f64,
    pub picard_max_iter: usize,
}

impl Default for SolverSettings {
    fn default() -> Self {
        Self { omega: None, sor_tol: 1e-10, sor_max_iter: None, picard_tol: 1e-8, picard_max_iter: 200 }
    }
}

impl SolverSettings {
    /// Defaults loosened to what the scalar type can resolve.
    pub fn for_scalar<T: Real>() -> Self {
        let eps = T::epsilon().to_f64_lossy();
        let base = Self::default();
        Self {
            sor_tol: base.sor_tol.max(100.0 * eps),
            picard_tol: base.picard_tol.max(1000.0 * eps),
            ..base
        }
    }

    pub fn validate(&self) -> Result<()> {
        if let Some(w) = self.omega {
            if !(w > 1.0 && w < 2.0) {
                return Err(Error::InvalidArgument(format!("omega = {w} outside (1, 2)")));
            }
        }
        if !(self.sor_tol > 0.0 && self.picard_tol > 0.0) {
            return Err(Error::InvalidArgument("solver tolerances must be positive".into()));
        }
        if self.sor_max_iter == Some(0) || self.picard_max_iter == 0 {
            return Err(Error::InvalidArgument("iteration caps must be at least 1".into()));
        }
        Ok(())
    }

    pub fn omega_for<T: Real>(&self, grid: &Grid2D<T>) -> T {
        match self.omega {
            Some(w) => T::lit(w),
            None => T::lit(2.0) / (T::one() + (T::PI() * grid.h()).sin()),
        }
    }

    pub fn sweep_cap(&self, n: usize) -> usize {
        self.sor_max_iter.unwrap_or(100 * n * n)
    }
}

/// `−Δv + τv = source` in the interior, `v = dirichlet` on the boundary.
#[derive(Debug, Clone)]
pub struct LinearProblem<T> {
    pub source: ScalarField<T>,
    pub tau: T,
    /// Only the boundary nodes of this field are read.
    pub dirichlet: ScalarField<T>,
}

impl<T: Real> LinearProblem<T> {
    pub fn new(source: ScalarField<T>, tau: T, dirichlet: ScalarField<T>) -> Result<Self> {
        if source.grid().n() != dirichlet.grid().n() {
            return Err(Error::InvalidArgument("source and boundary data on different grids".into()));
        }
        if !(tau >= T::zero()) {
            return Err(Error::InvalidArgument(format!("reaction coefficient {tau} must be >= 0")));
        }
        Ok(Self { source, tau, dirichlet })
    }

    pub fn grid(&self) -> &Grid2D<T> {
        self.source.grid()
    }
}

/// Solves the linear problem from a zero interior guess.
pub fn solve_linear<T: Real>(p: &LinearProblem<T>, s: &SolverSettings) -> Result<ScalarField<T>> {
    solve_linear_from(p, s, None)
}

/// Solves the linear problem, starting SOR from `initial` when given.
///
/// Converged when `‖f − A v‖₂ ≤ sor_tol · ‖f‖₂`, with boundary data folded into `f`.
pub fn solve_linear_from<T: Real>(
    p: &LinearProblem<T>,
    s: &SolverSettings,
    initial: Option<&ScalarField<T>>,
) -> Result<ScalarField<T>> {
    s.validate()?;
    let grid = *p.grid();
    let n = grid.n();
    let side = grid.side();
    let h2 = grid.h() * grid.h();
    let omega = s.omega_for(&grid);
    let diag = T::lit(4.0) + p.tau * h2;
    let tol = T::lit(s.sor_tol);

    let mut v = match initial {
        Some(f) if f.grid().n() == n => f.clone(),
        _ => ScalarField::zeros(grid),
    };
    for (i, j) in grid.boundary_nodes() {
        v.set(i, j, p.dirichlet.get(i, j));
    }

    // Scaled right-hand side h²f with boundary neighbours moved over.
    let src = p.source.values();
    let bnd = p.dirichlet.values();
    let mut rhs_norm2 = T::zero();
    for j in 1..n {
        for i in 1..n {
            let k = j * side + i;
            let mut b = h2 * src[k];
            for nb in [k - 1, k + 1, k - side, k + side] {
                let (ni, nj) = (nb % side, nb / side);
                if grid.is_boundary(ni, nj) {
                    b = b + bnd[nb];
                }
            }
            rhs_norm2 = rhs_norm2 + b * b;
        }
    }
    if rhs_norm2 == T::zero() {
        let mut z = ScalarField::zeros(grid);
        for (i, j) in grid.boundary_nodes() {
            z.set(i, j, p.dirichlet.get(i, j));
        }
        return Ok(z);
    }
    let rhs_norm = rhs_norm2.sqrt();

    let residual = |v: &[T]| {
        let mut r2 = T::zero();
        for j in 1..n {
            for i in 1..n {
                let k = j * side + i;
                let r = h2 * src[k] + v[k - 1] + v[k + 1] + v[k - side] + v[k + side] - diag * v[k];
                r2 = r2 + r * r;
            }
        }
        r2.sqrt() / rhs_norm
    };

    let cap = s.sweep_cap(n);
    let mut res = residual(v.values());
    let mut sweeps = 0;
    while res > tol {
        if sweeps >= cap {
            return Err(Error::SorDiverged { iterations: sweeps, residual: res.to_f64_lossy() });
        }
        let vals = v.values_mut();
        for j in 1..n {
            for i in 1..n {
                let k = j * side + i;
                let gs = (h2 * src[k] + vals[k - 1] + vals[k + 1] + vals[k - side] + vals[k + side]) / diag;
                vals[k] = vals[k] + omega * (gs - vals[k]);
            }
        }
        sweeps += 1;
        res = residual(v.values());
        if !res.is_finite() {
            return Err(Error::NonFinite("SOR sweep"));
        }
    }
    Ok(v)
}

/// Solves `−Δu = F(u)`, `u = δ·y` on the boundary, by Picard iteration.
///
/// Starts from the harmonic lift; `F` is evaluated on the iterate clamped to `[0, δ]`.
pub fn solve_semilinear<T: Real>(
    grid: &Grid2D<T>,
    f: &Nonlinearity,
    delta: T,
    s: &SolverSettings,
) -> Result<ScalarField<T>> {
    let bc = dirichlet_g(grid, delta)?;
    let mut u = solve_linear(&LinearProblem::new(ScalarField::zeros(*grid), T::zero(), bc.clone())?, s)?;
    if matches!(f, Nonlinearity::Zero) {
        return Ok(u);
    }
    let tol = T::lit(s.picard_tol);
    let mut change = T::infinity();
    for _ in 0..s.picard_max_iter {
        let source = u.map(|v| f.eval(v.max(T::zero()).min(delta)));
        let next = solve_linear_from(&LinearProblem::new(source, T::zero(), bc.clone())?, s, Some(&u))?;
        change = next.zip_with(&u, |a, b| a - b).sup_norm();
        u = next;
        if !change.is_finite() {
            return Err(Error::NonFinite("Picard iteration"));
        }
        if change <= tol {
            return Ok(u);
        }
    }
    Err(Error::PicardDiverged { iterations: s.picard_max_iter, change: change.to_f64_lossy() })
}

/// Applies the discrete operator `−Δ_h v + τv` at interior nodes; boundary entries are zero.
pub fn apply_operator<T: Real>(v: &ScalarField<T>, tau: T) -> ScalarField<T> {
    let grid = *v.grid();
    let n = grid.n();
    let h2 = grid.h() * grid.h();
    let mut out = ScalarField::zeros(grid);
    for j in 1..n {
        for i in 1..n {
            let lap = v.get(i + 1, j) + v.get(i - 1, j) + v.get(i, j + 1) + v.get(i, j - 1)
                - T::lit(4.0) * v.get(i, j);
            out.set(i, j, -lap / h2 + tau * v.get(i, j));
        }
    }
    out
}
