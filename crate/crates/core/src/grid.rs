//! Uniform node lattice on the unit square, grid functions and boundary traces.
//!
//! Node `(i, j)` sits at `(i·h, j·h)`; `i` runs along `x` and `j` along `y`.
//! Field values are stored row-major by `j`, so a row of the storage is a
//! line of constant `y`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Smallest accepted number of cells per side.
pub const MIN_CELLS: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "GridRepr", into = "GridRepr", bound = "T: Real")]
pub struct Grid2D<T> {
    n: usize,
    h: T,
}

impl<T: Real> Grid2D<T> {
    /// Builds the lattice with `n` cells per side. `n` must be even and at least 8.
    pub fn new(n: usize) -> Result<Self> {
        if n < MIN_CELLS {
            return Err(Error::InvalidGrid(format!("n = {n} is below the minimum {MIN_CELLS}")));
        }
        if n % 2 != 0 {
            return Err(Error::InvalidGrid(format!("n = {n} must be even")));
        }
        Ok(Self { n, h: T::one() / T::of(n) })
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn h(&self) -> T {
        self.h
    }

    /// Nodes per side, `n + 1`.
    #[inline]
    pub fn side(&self) -> usize {
        self.n + 1
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.side() * self.side()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        false
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize) -> usize {
        debug_assert!(i <= self.n && j <= self.n);
        j * self.side() + i
    }

    /// Physical coordinate of a lattice index.
    #[inline]
    pub fn coord(&self, k: usize) -> T {
        T::of(k) / T::of(self.n)
    }

    #[inline]
    pub fn point(&self, i: usize, j: usize) -> (T, T) {
        (self.coord(i), self.coord(j))
    }

    #[inline]
    pub fn is_boundary(&self, i: usize, j: usize) -> bool {
        i == 0 || j == 0 || i == self.n || j == self.n
    }

    #[inline]
    pub fn is_corner(&self, i: usize, j: usize) -> bool {
        (i == 0 || i == self.n) && (j == 0 || j == self.n)
    }

    /// Edge a boundary node belongs to. Corners have no well-defined normal.
    pub fn edge_of(&self, i: usize, j: usize) -> Result<Edge> {
        if i > self.n || j > self.n || !self.is_boundary(i, j) {
            return Err(Error::NotOnBoundary(i, j));
        }
        if self.is_corner(i, j) {
            return Err(Error::InvalidArgument(format!(
                "corner node ({i}, {j}) has no unique outward normal"
            )));
        }
        Ok(if i == self.n {
            Edge::Right
        } else if i == 0 {
            Edge::Left
        } else if j == self.n {
            Edge::Top
        } else {
            Edge::Bottom
        })
    }

    /// All boundary nodes, counter-clockwise from the origin, each listed once.
    pub fn boundary_nodes(&self) -> Vec<(usize, usize)> {
        let n = self.n;
        let mut out = Vec::with_capacity(4 * n);
        out.extend((0..n).map(|i| (i, 0)));
        out.extend((0..n).map(|j| (n, j)));
        out.extend((1..=n).rev().map(|i| (i, n)));
        out.extend((1..=n).rev().map(|j| (0, j)));
        out
    }

    /// Interior nodes of the right edge `x = 1`, corners excluded.
    pub fn right_edge_nodes(&self) -> Vec<(usize, usize)> {
        (1..self.n).map(|j| (self.n, j)).collect()
    }

    /// Lattice index of a coordinate if it coincides with a node.
    pub fn node_at(&self, x: f64) -> Option<usize> {
        let k = x * self.n as f64;
        let r = k.round();
        ((k - r).abs() < 1e-9 && r >= 0.0 && r <= self.n as f64).then_some(r as usize)
    }
}

#[derive(Serialize, Deserialize)]
struct GridRepr {
    n: usize,
}

impl<T: Real> TryFrom<GridRepr> for Grid2D<T> {
    type Error = Error;

    fn try_from(r: GridRepr) -> Result<Self> {
        Grid2D::new(r.n)
    }
}

impl<T: Real> From<Grid2D<T>> for GridRepr {
    fn from(g: Grid2D<T>) -> Self {
        GridRepr { n: g.n }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Edge {
    Left,
    Right,
    Bottom,
    Top,
}

impl Edge {
    /// Index offset pointing from a node on this edge into the domain.
    fn inward(self) -> (isize, isize) {
        match self {
            Edge::Left => (1, 0),
            Edge::Right => (-1, 0),
            Edge::Bottom => (0, 1),
            Edge::Top => (0, -1),
        }
    }
}

/// A real value at every node of a grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "FieldRepr<T>", bound = "T: Real")]
pub struct ScalarField<T> {
    grid: Grid2D<T>,
    values: Vec<T>,
}

impl<T: Real> ScalarField<T> {
    pub fn zeros(grid: Grid2D<T>) -> Self {
        Self::constant(grid, T::zero())
    }

    pub fn constant(grid: Grid2D<T>, c: T) -> Self {
        Self { values: vec![c; grid.len()], grid }
    }

    /// Samples `f(x, y)` at every node.
    pub fn from_fn(grid: Grid2D<T>, f: impl Fn(T, T) -> T) -> Self {
        let side = grid.side();
        let values = (0..grid.len())
            .map(|k| {
                let (x, y) = grid.point(k % side, k / side);
                f(x, y)
            })
            .collect();
        Self { grid, values }
    }

    pub fn from_values(grid: Grid2D<T>, values: Vec<T>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::InvalidArgument(format!(
                "expected {} values, got {}",
                grid.len(),
                values.len()
            )));
        }
        Ok(Self { grid, values })
    }

    #[inline]
    pub fn grid(&self) -> &Grid2D<T> {
        &self.grid
    }

    #[inline]
    pub fn values(&self) -> &[T] {
        &self.values
    }

    #[inline]
    pub fn values_mut(&mut self) -> &mut [T] {
        &mut self.values
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> T {
        self.values[self.grid.index(i, j)]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: T) {
        let k = self.grid.index(i, j);
        self.values[k] = v;
    }

    pub fn map(&self, f: impl Fn(T) -> T) -> Self {
        Self { grid: self.grid, values: self.values.iter().map(|&v| f(v)).collect() }
    }

    pub fn zip_with(&self, other: &Self, f: impl Fn(T, T) -> T) -> Self {
        assert_eq!(self.grid.n(), other.grid.n(), "fields live on different grids");
        let values = self.values.iter().zip(&other.values).map(|(&a, &b)| f(a, b)).collect();
        Self { grid: self.grid, values }
    }

    pub fn scale(&self, a: T) -> Self {
        self.map(|v| a * v)
    }

    pub fn sup_norm(&self) -> T {
        self.values.iter().fold(T::zero(), |m, v| m.max(v.abs()))
    }

    pub fn min_value(&self) -> T {
        self.values.iter().fold(T::infinity(), |m, &v| m.min(v))
    }

    pub fn max_value(&self) -> T {
        self.values.iter().fold(T::neg_infinity(), |m, &v| m.max(v))
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    /// Restriction to a coarser nested grid by taking coincident nodes.
    pub fn restrict(&self, coarse: Grid2D<T>) -> Result<Self> {
        let (fine_n, coarse_n) = (self.grid.n(), coarse.n());
        if coarse_n == 0 || fine_n % coarse_n != 0 {
            return Err(Error::NonNested { fine: fine_n, coarse: coarse_n });
        }
        let r = fine_n / coarse_n;
        let mut out = Self::zeros(coarse);
        for j in 0..=coarse_n {
            for i in 0..=coarse_n {
                out.set(i, j, self.get(r * i, r * j));
            }
        }
        Ok(out)
    }
}

#[derive(Deserialize)]
#[serde(bound = "T: Real")]
struct FieldRepr<T> {
    grid: Grid2D<T>,
    values: Vec<T>,
}

impl<T: Real> TryFrom<FieldRepr<T>> for ScalarField<T> {
    type Error = Error;

    fn try_from(r: FieldRepr<T>) -> Result<Self> {
        ScalarField::from_values(r.grid, r.values)
    }
}

/// Flux values at an ordered list of boundary nodes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundaryTrace<T> {
    pub nodes: Vec<(usize, usize)>,
    pub values: Vec<T>,
}

impl<T: Real> BoundaryTrace<T> {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn max_abs(&self) -> T {
        self.values.iter().fold(T::zero(), |m, v| m.max(v.abs()))
    }
}

/// Dirichlet lift of the excitation `δ·g` with `g(x, y) = y`.
///
/// Boundary nodes carry `δ·y`; interior nodes are zero and never read by the solvers.
pub fn dirichlet_g<T: Real>(grid: &Grid2D<T>, delta: T) -> Result<ScalarField<T>> {
    if !(delta >= T::zero() && delta <= T::one()) {
        return Err(Error::InvalidArgument(format!("delta = {delta} outside [0, 1]")));
    }
    let mut f = ScalarField::zeros(*grid);
    for (i, j) in grid.boundary_nodes() {
        f.set(i, j, delta * grid.coord(j));
    }
    Ok(f)
}

/// Discrete L² norm with nodal weight `h²` over every node, boundary included.
pub fn l2_norm<T: Real>(f: &ScalarField<T>) -> T {
    let h = f.grid().h();
    let sum = f.values().iter().fold(T::zero(), |acc, &v| acc + v * v);
    (h * h * sum).sqrt()
}

/// Outward normal derivative from the one-sided three-point stencil
/// `(3u_b − 4u_{b−1} + u_{b−2}) / 2h`, taken along the inward direction.
pub fn normal_derivative<T: Real>(
    u: &ScalarField<T>,
    nodes: &[(usize, usize)],
) -> Result<BoundaryTrace<T>> {
    let grid = u.grid();
    if grid.n() < 2 {
        return Err(Error::InvalidGrid("need at least two interior layers".into()));
    }
    let two_h = T::lit(2.0) * grid.h();
    let (three, four) = (T::lit(3.0), T::lit(4.0));
    let values = nodes
        .iter()
        .map(|&(i, j)| {
            let (di, dj) = grid.edge_of(i, j)?.inward();
            let step = |k: isize| {
                let ii = (i as isize + k * di) as usize;
                let jj = (j as isize + k * dj) as usize;
                u.get(ii, jj)
            };
            Ok((three * step(0) - four * step(1) + step(2)) / two_h)
        })
        .collect::<Result<Vec<T>>>()?;
    Ok(BoundaryTrace { nodes: nodes.to_vec(), values })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    #[test]
    fn builds_paper_grids() {
        let g = Grid2D::<f64>::new(32).unwrap();
        assert_eq!(g.h(), 0.03125);
        let g = Grid2D::<f64>::new(64).unwrap();
        assert_eq!(g.h(), 0.015625);
        assert_eq!(g.len(), 65 * 65);
    }

    #[test]
    fn rejects_small_or_odd() {
        assert!(Grid2D::<f64>::new(7).is_err());
        assert!(Grid2D::<f64>::new(4).is_err());
        assert!(Grid2D::<f64>::new(33).is_err());
        assert!(Grid2D::<f32>::new(8).is_ok());
    }

    #[test]
    fn boundary_nodes_cover_perimeter_once() {
        let g = Grid2D::<f64>::new(8).unwrap();
        let nodes = g.boundary_nodes();
        assert_eq!(nodes.len(), 32);
        let mut sorted = nodes.clone();
        sorted.sort();
        sorted.dedup();
        assert_eq!(sorted.len(), 32);
        assert!(nodes.iter().all(|&(i, j)| g.is_boundary(i, j)));
    }

    #[test]
    fn dirichlet_profile() {
        let g = Grid2D::<f64>::new(32).unwrap();
        let d = dirichlet_g(&g, 1.0).unwrap();
        assert_eq!(d.get(32, 16), 0.5);
        let d = dirichlet_g(&g, 0.5).unwrap();
        assert_eq!(d.get(0, 32), 0.5);
        assert_eq!(d.get(32, 32), 0.5);
        assert_eq!(d.get(17, 0), 0.0);
        let d = dirichlet_g(&g, 0.0).unwrap();
        assert!(d.values().iter().all(|&v| v == 0.0));
        assert!(dirichlet_g(&g, 1.5).is_err());
    }

    #[test]
    fn l2_of_constants() {
        let g = Grid2D::<f64>::new(32).unwrap();
        assert_eq!(l2_norm(&ScalarField::zeros(g)), 0.0);
        assert_abs_diff_eq!(l2_norm(&ScalarField::constant(g, 1.0)), 1.03125, epsilon = 1e-15);
    }

    #[test]
    fn l2_of_x_matches_nodal_sum() {
        // h² · 65 · Σ (i/64)², i = 0..64
        let g = Grid2D::<f64>::new(64).unwrap();
        let f = ScalarField::from_fn(g, |x, _| x);
        let closed = (65.0 * 89440.0 / 64f64.powi(4)).sqrt();
        assert_abs_diff_eq!(l2_norm(&f), closed, epsilon = 1e-14);
        // nodal weights overcount the boundary layers by O(h)
        assert!((l2_norm(&f) - (1.0f64 / 3.0).sqrt()).abs() < 1.5 * g.h());
    }

    #[test]
    fn flux_of_harmonic_lift_vanishes_on_right_edge() {
        let g = Grid2D::<f64>::new(32).unwrap();
        let u = ScalarField::from_fn(g, |_, y| 0.7 * y);
        let t = normal_derivative(&u, &g.right_edge_nodes()).unwrap();
        assert!(t.values.iter().all(|v| v.abs() < 1e-12));
    }

    #[test]
    fn stencil_exact_on_quadratics_every_edge() {
        let g = Grid2D::<f64>::new(16).unwrap();
        let u = ScalarField::from_fn(g, |x, y| x * x + 3.0 * y * y - x * y + 0.5);
        for j in 1..16 {
            let r = normal_derivative(&u, &[(16, j), (0, j)]).unwrap();
            let y = g.coord(j);
            assert_abs_diff_eq!(r.values[0], 2.0 - y, epsilon = 1e-12);
            assert_abs_diff_eq!(r.values[1], y, epsilon = 1e-12);
        }
        for i in 1..16 {
            let r = normal_derivative(&u, &[(i, 16), (i, 0)]).unwrap();
            let x = g.coord(i);
            assert_abs_diff_eq!(r.values[0], 6.0 - x, epsilon = 1e-12);
            assert_abs_diff_eq!(r.values[1], x, epsilon = 1e-12);
        }
    }

    #[test]
    fn x_squared_flux_is_two() {
        let g = Grid2D::<f64>::new(32).unwrap();
        let u = ScalarField::from_fn(g, |x, _| x * x);
        let t = normal_derivative(&u, &g.right_edge_nodes()).unwrap();
        assert!(t.values.iter().all(|v| (v - 2.0).abs() < 1e-12));
    }

    #[test]
    fn second_order_refinement() {
        let err = |n: usize| {
            let g = Grid2D::<f64>::new(n).unwrap();
            let u = ScalarField::from_fn(g, |x, y| (PI * x).sin() * y);
            let t = normal_derivative(&u, &g.right_edge_nodes()).unwrap();
            t.nodes
                .iter()
                .zip(&t.values)
                .map(|(&(_, j), v)| (v + PI * g.coord(j)).abs())
                .fold(0.0, f64::max)
        };
        let mid = {
            let g = Grid2D::<f64>::new(32).unwrap();
            let u = ScalarField::from_fn(g, |x, y| (PI * x).sin() * y);
            normal_derivative(&u, &[(32, 16)]).unwrap().values[0]
        };
        assert!((mid + PI / 2.0).abs() < 1e-2);
        let order = (err(32) / err(64)).log2();
        assert!((1.7..=2.3).contains(&order), "order {order}");
    }

    #[test]
    fn rejects_interior_and_corner_nodes() {
        let g = Grid2D::<f64>::new(8).unwrap();
        let u = ScalarField::zeros(g);
        assert_eq!(normal_derivative(&u, &[(3, 3)]).unwrap_err(), Error::NotOnBoundary(3, 3));
        assert!(normal_derivative(&u, &[(8, 8)]).is_err());
    }

    #[test]
    fn field_json_validates_length() {
        let g = Grid2D::<f64>::new(8).unwrap();
        let f = ScalarField::from_fn(g, |x, y| x - 0.1 * y);
        let text = serde_json::to_string(&f).unwrap();
        assert_eq!(serde_json::from_str::<ScalarField<f64>>(&text).unwrap(), f);
        assert!(serde_json::from_str::<ScalarField<f64>>(r#"{"grid":{"n":8},"values":[1.0]}"#).is_err());
        assert!(serde_json::from_str::<Grid2D<f64>>(r#"{"n":7}"#).is_err());
    }

    #[test]
    fn restriction_picks_coincident_nodes() {
        let fine = Grid2D::<f64>::new(16).unwrap();
        let coarse = Grid2D::<f64>::new(8).unwrap();
        let f = ScalarField::from_fn(fine, |x, y| x + 10.0 * y);
        let c = f.restrict(coarse).unwrap();
        assert_eq!(c, ScalarField::from_fn(coarse, |x, y| x + 10.0 * y));
        assert!(ScalarField::zeros(coarse).restrict(fine).is_err());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn l2_is_absolutely_homogeneous(alpha in -1e3f64..1e3, seed in 0u64..1000) {
                let g = Grid2D::<f64>::new(8).unwrap();
                let f = ScalarField::from_fn(g, |x, y| ((seed as f64 + 1.0) * x).sin() + y * y);
                let lhs = l2_norm(&f.scale(alpha));
                let rhs = alpha.abs() * l2_norm(&f);
                prop_assert!((lhs - rhs).abs() <= 1e-12 * rhs.max(1.0));
            }

            #[test]
            fn stencil_exact_for_normal_quadratics(a in -5.0f64..5.0, b in -5.0f64..5.0, c in -5.0f64..5.0, j in 1usize..16) {
                let g = Grid2D::<f64>::new(16).unwrap();
                let u = ScalarField::from_fn(g, |x, y| a * x * x + b * x + c + y.sin());
                let t = normal_derivative(&u, &[(16, j)]).unwrap();
                prop_assert!((t.values[0] - (2.0 * a + b)).abs() <= 1e-12);
            }
        }
    }
}
