//! Synthetic flux measurements and the `d_δ` diagnostic.
//!
//! Data are generated on a fine grid and sampled at the boundary nodes the
//! inversion grid shares with it, so the forward model used for inversion is
//! never the one that produced the data.

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::forward::{solve_semilinear, SolverSettings};
use crate::grid::{l2_norm, normal_derivative, BoundaryTrace, Grid2D};
use crate::nonlinearity::Nonlinearity;
use crate::scalar::Real;

/// Where the flux is observed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MeasurementGeometry {
    /// The open right edge `x = 1`, `0 < y < 1`.
    EdgeRight,
    /// A single boundary point, `(1, 0.5)` by default.
    SinglePoint { x: f64, y: f64 },
}

impl Default for MeasurementGeometry {
    fn default() -> Self {
        MeasurementGeometry::EdgeRight
    }
}

impl MeasurementGeometry {
    pub fn midpoint() -> Self {
        MeasurementGeometry::SinglePoint { x: 1.0, y: 0.5 }
    }

    pub fn label(&self) -> &'static str {
        match self {
            MeasurementGeometry::EdgeRight => "gamma1",
            MeasurementGeometry::SinglePoint { .. } => "gamma2",
        }
    }

    /// Observed nodes of `grid`, ordered by increasing `y` (then `x`).
    pub fn nodes<T: Real>(&self, grid: &Grid2D<T>) -> Result<Vec<(usize, usize)>> {
        match *self {
            MeasurementGeometry::EdgeRight => Ok(grid.right_edge_nodes()),
            MeasurementGeometry::SinglePoint { x, y } => {
                let (i, j) = grid.node_at(x).zip(grid.node_at(y)).ok_or_else(|| {
                    Error::InvalidArgument(format!("point ({x}, {y}) is not a node of the n = {} grid", grid.n()))
                })?;
                grid.edge_of(i, j)?;
                Ok(vec![(i, j)])
            }
        }
    }
}

/// Noisy flux data for every excitation level `δ_k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct MeasurementSet<T> {
    pub geometry: MeasurementGeometry,
    pub coarse_n: usize,
    pub fine_n: usize,
    pub epsilon0: f64,
    pub seed: u64,
    pub f_true: Nonlinearity,
    /// `ε_k` is scaled by the amplitude of each level's own noiseless trace.
    pub noise_scaling: String,
    pub deltas: Vec<T>,
    pub noise_levels: Vec<T>,
    pub traces: Vec<Vec<T>>,
}

impl<T: Real> MeasurementSet<T> {
    pub fn levels(&self) -> usize {
        self.deltas.len()
    }

    pub fn coarse_grid(&self) -> Result<Grid2D<T>> {
        Grid2D::new(self.coarse_n)
    }

    /// Trace `m_k` (0-based `k`) on the coarse-grid nodes of the geometry.
    pub fn trace(&self, k: usize) -> Result<BoundaryTrace<T>> {
        let nodes = self.geometry.nodes(&self.coarse_grid()?)?;
        Ok(BoundaryTrace { nodes, values: self.traces[k].clone() })
    }

    pub fn validate(&self) -> Result<()> {
        let nodes = self.geometry.nodes(&self.coarse_grid()?)?;
        if self.deltas.is_empty() {
            return Err(Error::InvalidArgument("measurement set has no levels".into()));
        }
        if self.deltas.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidArgument("deltas must be strictly increasing".into()));
        }
        if self.traces.len() != self.deltas.len() || self.traces.iter().any(|t| t.len() != nodes.len()) {
            return Err(Error::InvalidArgument("trace shape does not match geometry".into()));
        }
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let m: Self = serde_json::from_str(s)?;
        m.validate()?;
        Ok(m)
    }
}

/// Uniform `[−1, 1)` draws from ChaCha20 with the 64-bit `seed`, stream `k`.
///
/// Each draw takes the top 53 bits `b` of one `u64` and returns `2·b·2⁻⁵³ − 1`.
pub struct NoiseStream {
    rng: ChaCha20Rng,
}

impl NoiseStream {
    pub fn new(seed: u64, k: u64) -> Self {
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        rng.set_stream(k);
        Self { rng }
    }

    pub fn next_symmetric(&mut self) -> f64 {
        let bits = self.rng.next_u64() >> 11;
        2.0 * (bits as f64) * (1.0 / (1u64 << 53) as f64) - 1.0
    }
}

/// Noiseless fine-grid flux at the coarse-grid observation nodes for `δ`.
pub fn noiseless_trace<T: Real>(
    f_true: &Nonlinearity,
    geometry: &MeasurementGeometry,
    delta: T,
    fine: &Grid2D<T>,
    coarse: &Grid2D<T>,
    settings: &SolverSettings,
) -> Result<BoundaryTrace<T>> {
    if fine.n() % coarse.n() != 0 {
        return Err(Error::NonNested { fine: fine.n(), coarse: coarse.n() });
    }
    let r = fine.n() / coarse.n();
    let coarse_nodes = geometry.nodes(coarse)?;
    let fine_nodes: Vec<_> = coarse_nodes.iter().map(|&(i, j)| (r * i, r * j)).collect();
    let u = solve_semilinear(fine, f_true, delta, settings)?;
    let t = normal_derivative(&u, &fine_nodes)?;
    Ok(BoundaryTrace { nodes: coarse_nodes, values: t.values })
}

/// Generates `m_k = ∂_ν u_{δ_k} + ε_k·rand(−1, 1)` for `δ_k = k/N`, `k = 1..N`.
#[allow(clippy::too_many_arguments)]
pub fn synthesize<T: Real>(
    f_true: &Nonlinearity,
    geometry: MeasurementGeometry,
    levels: usize,
    epsilon0: f64,
    fine_n: usize,
    coarse_n: usize,
    seed: u64,
    settings: &SolverSettings,
) -> Result<MeasurementSet<T>> {
    if levels == 0 {
        return Err(Error::InvalidArgument("need at least one level".into()));
    }
    if !(0.0..1.0).contains(&epsilon0) {
        return Err(Error::InvalidArgument(format!("epsilon0 = {epsilon0} outside [0, 1)")));
    }
    if fine_n % coarse_n != 0 {
        return Err(Error::NonNested { fine: fine_n, coarse: coarse_n });
    }
    let fine = Grid2D::<T>::new(fine_n)?;
    let coarse = Grid2D::<T>::new(coarse_n)?;
    let deltas: Vec<T> = (1..=levels).map(|k| T::of(k) / T::of(levels)).collect();

    let per_level = deltas
        .par_iter()
        .enumerate()
        .map(|(k, &delta)| {
            let clean = noiseless_trace(f_true, &geometry, delta, &fine, &coarse, settings)?;
            let eps_k = T::lit(epsilon0) * clean.max_abs();
            let mut noise = NoiseStream::new(seed, k as u64 + 1);
            let noisy = clean.values.iter().map(|&v| v + eps_k * T::lit(noise.next_symmetric())).collect();
            Ok((eps_k, noisy))
        })
        .collect::<Result<Vec<(T, Vec<T>)>>>()?;
    let (noise_levels, traces) = per_level.into_iter().unzip();

    Ok(MeasurementSet {
        geometry,
        coarse_n,
        fine_n,
        epsilon0,
        seed,
        f_true: f_true.clone(),
        noise_scaling: "per-level max |flux|".into(),
        deltas,
        noise_levels,
        traces,
    })
}

/// `d_δ(F, G) = ‖G(u_{δ,G}) − F(u_{δ,F})‖_{L²}` on `grid`.
pub fn d_delta<T: Real>(
    f: &Nonlinearity,
    g: &Nonlinearity,
    delta: T,
    grid: &Grid2D<T>,
    settings: &SolverSettings,
) -> Result<T> {
    let clamp = |v: T| v.max(T::zero()).min(delta);
    let uf = solve_semilinear(grid, f, delta, settings)?;
    let ug = solve_semilinear(grid, g, delta, settings)?;
    let diff = ug.zip_with(&uf, |a, b| g.eval(clamp(a)) - f.eval(clamp(b)));
    Ok(l2_norm(&diff))
}
