//! Registry of semilinear terms `s ↦ F(s)`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub enum Nonlinearity {
    Zero,
    /// `−u`
    NegLinear,
    /// `−u²`
    NegSquare,
    /// `−u³`
    NegCube,
    /// `−ln(1 + u)`
    NegLog1p,
    /// `(1 − eᵘ)/2`
    HalfOneMinusExp,
    /// `−sin u`
    NegSin,
    /// `(cos(πu) − 1)/2.5`
    CosineBump,
    /// `+u²`; increasing, kept for negative tests of the admissibility check.
    PosSquare,
    /// Linear interpolation through `(s, F(s))` knots sorted by `s`; constant
    /// extrapolation outside the knot range.
    PiecewiseLinear(Vec<(f64, f64)>),
}

/// Names accepted by [`Nonlinearity::from_str`] for the fixed registry entries.
pub const REGISTRY: [&str; 8] = ["zero", "-u", "-u^2", "-u^3", "-ln(1+u)", "(1-e^u)/2", "-sin(u)", "(cos(pi*u)-1)/2.5"];

impl Nonlinearity {
    /// Every admissible fixed entry.
    pub fn registry() -> Vec<Nonlinearity> {
        REGISTRY.iter().map(|s| s.parse().expect("registry names parse")).collect()
    }

    pub fn name(&self) -> String {
        match self {
            Nonlinearity::Zero => "zero".into(),
            Nonlinearity::NegLinear => "-u".into(),
            Nonlinearity::NegSquare => "-u^2".into(),
            Nonlinearity::NegCube => "-u^3".into(),
            Nonlinearity::NegLog1p => "-ln(1+u)".into(),
            Nonlinearity::HalfOneMinusExp => "(1-e^u)/2".into(),
            Nonlinearity::NegSin => "-sin(u)".into(),
            Nonlinearity::CosineBump => "(cos(pi*u)-1)/2.5".into(),
            Nonlinearity::PosSquare => "u^2".into(),
            Nonlinearity::PiecewiseLinear(knots) => {
                let body: Vec<String> = knots.iter().map(|(s, f)| format!("{s}:{f}")).collect();
                format!("pwl[{}]", body.join(","))
            }
        }
    }

    pub fn eval<T: Real>(&self, s: T) -> T {
        let one = T::one();
        match self {
            Nonlinearity::Zero => T::zero(),
            Nonlinearity::NegLinear => -s,
            Nonlinearity::NegSquare => -s * s,
            Nonlinearity::NegCube => -s * s * s,
            Nonlinearity::NegLog1p => -s.ln_1p(),
            Nonlinearity::HalfOneMinusExp => -s.exp_m1() / T::lit(2.0),
            Nonlinearity::NegSin => -s.sin(),
            Nonlinearity::CosineBump => ((T::PI() * s).cos() - one) / T::lit(2.5),
            Nonlinearity::PosSquare => s * s,
            Nonlinearity::PiecewiseLinear(knots) => eval_pwl(knots, s.to_f64_lossy())
                .map(T::lit)
                .unwrap_or_else(T::zero),
        }
    }

    /// Upper bound for `sup |F′|` on `[0, 1]`, known in closed form for the fixed entries.
    pub fn lipschitz_bound(&self) -> f64 {
        match self {
            Nonlinearity::Zero => 0.0,
            Nonlinearity::NegLinear => 1.0,
            Nonlinearity::NegSquare => 2.0,
            Nonlinearity::NegCube => 3.0,
            Nonlinearity::NegLog1p => 1.0,
            Nonlinearity::HalfOneMinusExp => std::f64::consts::E / 2.0,
            Nonlinearity::NegSin => 1.0,
            Nonlinearity::CosineBump => std::f64::consts::PI / 2.5,
            Nonlinearity::PosSquare => 2.0,
            Nonlinearity::PiecewiseLinear(knots) => knots
                .windows(2)
                .filter(|w| w[1].0 > w[0].0)
                .map(|w| ((w[1].1 - w[0].1) / (w[1].0 - w[0].0)).abs())
                .fold(0.0, f64::max),
        }
    }
}

fn eval_pwl(knots: &[(f64, f64)], s: f64) -> Option<f64> {
    let first = knots.first()?;
    let last = knots.last()?;
    if s <= first.0 {
        return Some(first.1);
    }
    if s >= last.0 {
        return Some(last.1);
    }
    let k = knots.partition_point(|&(x, _)| x <= s);
    let (x0, y0) = knots[k - 1];
    let (x1, y1) = knots[k];
    Some(y0 + (s - x0) / (x1 - x0) * (y1 - y0))
}

impl fmt::Display for Nonlinearity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

impl FromStr for Nonlinearity {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        let nl = match key.as_str() {
            "zero" | "0" => Nonlinearity::Zero,
            "-u" => Nonlinearity::NegLinear,
            "-u^2" => Nonlinearity::NegSquare,
            "-u^3" => Nonlinearity::NegCube,
            "-ln(1+u)" => Nonlinearity::NegLog1p,
            "(1-e^u)/2" => Nonlinearity::HalfOneMinusExp,
            "-sin(u)" => Nonlinearity::NegSin,
            "(cos(pi*u)-1)/2.5" | "(cos(πu)-1)/2.5" => Nonlinearity::CosineBump,
            "u^2" | "+u^2" => Nonlinearity::PosSquare,
            other => {
                let body = other
                    .strip_prefix("pwl[")
                    .and_then(|b| b.strip_suffix(']'))
                    .ok_or_else(|| Error::UnknownNonlinearity(s.to_string()))?;
                return parse_pwl(body).ok_or_else(|| Error::UnknownNonlinearity(s.to_string()));
            }
        };
        Ok(nl)
    }
}

fn parse_pwl(body: &str) -> Option<Nonlinearity> {
    let mut knots = Vec::new();
    for pair in body.split(',') {
        let (s, f) = pair.split_once(':')?;
        knots.push((s.parse::<f64>().ok()?, f.parse::<f64>().ok()?));
    }
    if knots.is_empty() || knots.windows(2).any(|w| w[1].0 <= w[0].0) {
        return None;
    }
    Some(Nonlinearity::PiecewiseLinear(knots))
}

impl From<Nonlinearity> for String {
    fn from(n: Nonlinearity) -> String {
        n.name()
    }
}

impl TryFrom<String> for Nonlinearity {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_round_trip() {
        for nl in Nonlinearity::registry() {
            assert_eq!(nl.name().parse::<Nonlinearity>().unwrap(), nl);
        }
        let p: Nonlinearity = "pwl[0:0, 0.5:-0.25, 1:-1]".parse().unwrap();
        assert_eq!(p.name().parse::<Nonlinearity>().unwrap(), p);
        assert!("u^5".parse::<Nonlinearity>().is_err());
        assert!("pwl[0:0,0:1]".parse::<Nonlinearity>().is_err());
    }

    #[test]
    fn values() {
        assert_eq!(Nonlinearity::NegCube.eval(0.5f64), -0.125);
        assert!((Nonlinearity::CosineBump.eval(1.0f64) + 0.8).abs() < 1e-15);
        assert!((Nonlinearity::HalfOneMinusExp.eval(1.0f64) - (1.0 - 1f64.exp()) / 2.0).abs() < 1e-15);
        let p: Nonlinearity = "pwl[0:0,0.5:-0.25,1:-1]".parse().unwrap();
        assert_eq!(p.eval(0.25f64), -0.125);
        assert_eq!(p.eval(0.75f64), -0.625);
        assert_eq!(p.eval(2.0f64), -1.0);
        assert!((p.lipschitz_bound() - 1.5).abs() < 1e-15);
    }

    #[test]
    fn zero_at_origin_in_f32_too() {
        for nl in Nonlinearity::registry() {
            assert_eq!(nl.eval(0.0f32), 0.0);
            assert_eq!(nl.eval(0.0f64), 0.0);
        }
    }
}
