//! Reading `F` off the recovered sources along level sets of the states.
//!
//! Each level `k` represents `F` through `F(ψ_k(x)) = G_k(x)`. For a sample
//! value `s` we locate `{ψ_k = s}` by linear interpolation on every grid edge
//! whose endpoints straddle `s`, average `G_k` over those crossings, and then
//! average across the levels `k > m` that can reach `s`.

use serde::{Deserialize, Serialize};

use super::LevelInversion;
use crate::error::{Error, Result};
use crate::grid::ScalarField;
use crate::nonlinearity::Nonlinearity;
use crate::scalar::Real;

/// A point where a grid edge crosses a level set.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Crossing<T> {
    pub x: T,
    pub y: T,
    /// Node at the start of the edge and the edge direction (`true` for `+x`).
    pub node: (usize, usize),
    pub horizontal: bool,
    /// Fraction along the edge, in `[0, 1)`.
    pub t: T,
}

impl<T: Real> Crossing<T> {
    /// Linear interpolation of `f` at the crossing.
    pub fn sample(&self, f: &ScalarField<T>) -> T {
        let (i, j) = self.node;
        let a = f.get(i, j);
        let b = if self.horizontal { f.get(i + 1, j) } else { f.get(i, j + 1) };
        a + self.t * (b - a)
    }
}

/// All edge crossings of `{psi = s}`. A node counts as above the level when `psi ≥ s`.
pub fn level_crossings<T: Real>(psi: &ScalarField<T>, s: T) -> Vec<Crossing<T>> {
    let grid = *psi.grid();
    let n = grid.n();
    let h = grid.h();
    let mut out = Vec::new();
    let mut edge = |i: usize, j: usize, horizontal: bool| {
        let a = psi.get(i, j);
        let b = if horizontal { psi.get(i + 1, j) } else { psi.get(i, j + 1) };
        if (a >= s) != (b >= s) {
            let t = (s - a) / (b - a);
            let (x0, y0) = grid.point(i, j);
            let (x, y) = if horizontal { (x0 + t * h, y0) } else { (x0, y0 + t * h) };
            out.push(Crossing { x, y, node: (i, j), horizontal, t });
        }
    };
    for j in 0..=n {
        for i in 0..n {
            edge(i, j, true);
        }
    }
    for j in 0..n {
        for i in 0..=n {
            edge(i, j, false);
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct Sample<T> {
    pub s: T,
    /// `None` when no contributing level reaches `s`.
    pub value: Option<T>,
    pub levels_used: usize,
    pub crossings: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct ReconstructedF<T> {
    pub samples: Vec<Sample<T>>,
}

impl<T: Real> ReconstructedF<T> {
    pub fn missing(&self) -> Vec<T> {
        self.samples.iter().filter(|p| p.value.is_none()).map(|p| p.s).collect()
    }

    /// Piecewise-linear interpolant through `(0, 0)` and the present samples,
    /// held constant past the last one.
    pub fn eval(&self, s: T) -> T {
        let mut prev = (T::zero(), T::zero());
        for p in &self.samples {
            let Some(v) = p.value else { continue };
            if s <= p.s {
                let w = (s - prev.0) / (p.s - prev.0);
                return prev.1 + w * (v - prev.1);
            }
            prev = (p.s, v);
        }
        prev.1
    }

    /// CSV with header `s,F_true,F_hat,missing`; missing samples leave `F_hat` empty.
    pub fn to_csv(&self, truth: &Nonlinearity) -> String {
        let mut out = String::from("s,F_true,F_hat,missing\n");
        for p in &self.samples {
            let s = p.s.to_f64_lossy();
            let hat = p.value.map(|v| format!("{}", v.to_f64_lossy())).unwrap_or_default();
            out.push_str(&format!("{},{},{},{}\n", s, truth.eval(s), hat, p.value.is_none()));
        }
        out
    }
}

/// Builds `F̂(s_m)` for `s_m = δ_m + 1/(2N)`, `δ_0 = 0`, averaging levels `k = m+1..N`.
pub fn reconstruct<T: Real>(levels: &[LevelInversion<T>]) -> Result<ReconstructedF<T>> {
    let n_levels = levels.len();
    if n_levels == 0 {
        return Err(Error::InvalidArgument("no levels to reconstruct from".into()));
    }
    if levels.windows(2).any(|w| w[1].delta <= w[0].delta) {
        return Err(Error::InvalidArgument("levels must be sorted by increasing delta".into()));
    }
    let n0 = levels[0].psi.grid().n();
    if levels.iter().any(|l| l.psi.grid().n() != n0 || l.source.grid().n() != n0) {
        return Err(Error::InvalidArgument("levels live on different grids".into()));
    }
    let half_step = T::one() / (T::lit(2.0) * T::of(n_levels));
    let samples = (0..n_levels)
        .map(|m| {
            let base = if m == 0 { T::zero() } else { levels[m - 1].delta };
            let s = base + half_step;
            let mut total = T::zero();
            let mut used = 0;
            let mut crossings = 0;
            for lvl in &levels[m..] {
                let cs = level_crossings(&lvl.psi, s);
                if cs.is_empty() {
                    continue;
                }
                let sum = cs.iter().fold(T::zero(), |acc, c| acc + c.sample(&lvl.source));
                total = total + sum / T::of(cs.len());
                used += 1;
                crossings += cs.len();
            }
            let value = (used > 0).then(|| total / T::of(used));
            Sample { s, value, levels_used: used, crossings }
        })
        .collect();
    Ok(ReconstructedF { samples })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RelativeError {
    /// Relative L² error over the present samples, or the absolute one when
    /// `zero_denominator` is set.
    pub value: f64,
    pub zero_denominator: bool,
    pub samples_used: usize,
}

/// `‖F − F̂‖ / ‖F‖` over the sample points that have a value.
pub fn relative_error<T: Real>(truth: &Nonlinearity, fhat: &ReconstructedF<T>) -> Result<RelativeError> {
    let (mut num, mut den, mut used) = (0.0f64, 0.0f64, 0);
    for p in &fhat.samples {
        let Some(v) = p.value else { continue };
        let s = p.s.to_f64_lossy();
        let f = truth.eval(s);
        num += (f - v.to_f64_lossy()).powi(2);
        den += f * f;
        used += 1;
    }
    if used == 0 {
        return Err(Error::AllSamplesMissing);
    }
    let (num, den) = (num.sqrt(), den.sqrt());
    Ok(if den == 0.0 {
        RelativeError { value: num, zero_denominator: true, samples_used: used }
    } else {
        RelativeError { value: num / den, zero_denominator: false, samples_used: used }
    })
}
