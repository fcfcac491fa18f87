//! One-dimensional polynomial maps `x -> f(x)`.

use std::borrow::Cow;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::stability::polynomial_roots;

/// Imaginary parts below this are treated as real root candidates.
const REAL_ROOT_CANDIDATE_TOL: f64 = 1e-6;
/// Largest admissible |f(x*) - x*| for a reported fixed point.
const FIXED_POINT_RESIDUAL_TOL: f64 = 1e-10;

/// A smooth one-dimensional map.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MapSpec {
    /// `f(x) = p x (1 - x)`.
    Logistic { p: f64 },
    /// `f(x) = sum_k coeffs[k] x^k`, lowest degree first.
    Polynomial { coeffs: Vec<f64> },
}

impl MapSpec {
    pub fn logistic(p: f64) -> Self {
        MapSpec::Logistic { p }
    }

    /// Builds a polynomial map. The coefficient list must be non-empty, finite,
    /// and end in a nonzero entry.
    pub fn polynomial(coeffs: Vec<f64>) -> Result<Self> {
        match coeffs.last() {
            None => Err(Error::domain("polynomial map needs at least one coefficient")),
            Some(&c) if c == 0.0 => Err(Error::domain(
                "leading polynomial coefficient must be nonzero",
            )),
            _ if coeffs.iter().any(|c| !c.is_finite()) => {
                Err(Error::domain("polynomial coefficients must be finite"))
            }
            _ => Ok(MapSpec::Polynomial { coeffs }),
        }
    }

    /// Coefficients of `f`, lowest degree first. The logistic map is `[0, p, -p]`.
    pub fn coefficients(&self) -> Cow<'_, [f64]> {
        match self {
            MapSpec::Logistic { p } => Cow::Owned(vec![0.0, *p, -*p]),
            MapSpec::Polynomial { coeffs } => Cow::Borrowed(coeffs),
        }
    }

    pub fn degree(&self) -> usize {
        self.coefficients().len() - 1
    }

    /// `f(x)`.
    pub fn eval(&self, x: f64) -> Result<f64> {
        check_finite(x)?;
        Ok(self.eval_unchecked(x))
    }

    /// `f'(x)`, by term-wise differentiation.
    pub fn deriv(&self, x: f64) -> Result<f64> {
        check_finite(x)?;
        Ok(self.deriv_unchecked(x))
    }

    /// Horner evaluation without the finiteness check; used on hot integration paths.
    #[inline]
    pub fn eval_unchecked(&self, x: f64) -> f64 {
        match self {
            // Same operation sequence as Horner on [0, p, -p].
            MapSpec::Logistic { p } => (-p * x + p) * x + 0.0,
            MapSpec::Polynomial { coeffs } => horner(coeffs, x),
        }
    }

    #[inline]
    pub fn deriv_unchecked(&self, x: f64) -> f64 {
        match self {
            MapSpec::Logistic { p } => 2.0 * -p * x + p,
            MapSpec::Polynomial { coeffs } => {
                let mut acc = 0.0;
                for (k, c) in coeffs.iter().enumerate().skip(1).rev() {
                    acc = acc * x + k as f64 * c;
                }
                acc
            }
        }
    }

    /// All real solutions of `f(x) = x`, sorted ascending.
    pub fn fixed_points(&self) -> Result<Vec<f64>> {
        let mut g: Vec<f64> = self.coefficients().into_owned();
        if g.len() < 2 {
            g.resize(2, 0.0);
        }
        g[1] -= 1.0;
        while g.last() == Some(&0.0) {
            g.pop();
        }
        match g.len() {
            0 => return Err(Error::domain("degenerate: f(x)-x ≡ 0")),
            1 => return Ok(Vec::new()),
            _ => {}
        }

        let roots = polynomial_roots(&g)?;
        let mut fixed = Vec::new();
        let mut residuals = Vec::new();
        for z in roots {
            if z.im.abs() > REAL_ROOT_CANDIDATE_TOL * (1.0 + z.re.abs()) {
                continue;
            }
            let x = self.nearest_float_fixed_point(polish_real_root(&g, z.re));
            let r = (self.eval_unchecked(x) - x).abs();
            if r < FIXED_POINT_RESIDUAL_TOL {
                fixed.push(x);
            } else if z.im.abs() < 1e-9 * (1.0 + z.re.abs()) {
                residuals.push(r);
            }
        }
        if !residuals.is_empty() {
            return Err(Error::numeric(
                "fixed point residual above tolerance",
                residuals,
            ));
        }
        fixed.sort_by(f64::total_cmp);
        // A multiple root comes back as a cluster of nearby candidates.
        fixed.dedup_by(|a, b| (*a - *b).abs() <= 1e-7 * (1.0 + b.abs()));
        Ok(fixed)
    }

    /// Among the floats within a few ulps of `x`, the one with the smallest
    /// computed `|f(x) - x|`.
    fn nearest_float_fixed_point(&self, x: f64) -> f64 {
        let resid = |y: f64| (self.eval_unchecked(y) - y).abs();
        let mut best = (resid(x), x);
        let (mut up, mut down) = (x, x);
        for _ in 0..8 {
            up = up.next_up();
            down = down.next_down();
            for y in [up, down] {
                let r = resid(y);
                if r < best.0 {
                    best = (r, y);
                }
            }
        }
        best.1
    }
}

fn check_finite(x: f64) -> Result<()> {
    if x.is_finite() {
        Ok(())
    } else {
        Err(Error::domain(format!("map argument must be finite, got {x}")))
    }
}

#[inline]
fn horner(coeffs: &[f64], x: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, c| acc * x + c)
}

fn polish_real_root(coeffs: &[f64], mut x: f64) -> f64 {
    let deriv: Vec<f64> = coeffs
        .iter()
        .enumerate()
        .skip(1)
        .map(|(k, c)| k as f64 * c)
        .collect();
    let mut best = (horner(coeffs, x).abs(), x);
    for _ in 0..60 {
        let d = horner(&deriv, x);
        if d == 0.0 {
            break;
        }
        let next = x - horner(coeffs, x) / d;
        if !next.is_finite() {
            break;
        }
        x = next;
        let r = horner(coeffs, x).abs();
        if r < best.0 {
            best = (r, x);
        }
        if r == 0.0 {
            break;
        }
    }
    best.1
}

impl fmt::Display for MapSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MapSpec::Logistic { p } => write!(f, "logistic:{p}"),
            MapSpec::Polynomial { coeffs } => {
                let parts: Vec<String> = coeffs.iter().map(|c| c.to_string()).collect();
                write!(f, "poly:{}", parts.join(","))
            }
        }
    }
}

/// Parses `logistic:<p>` or `poly:<c0>,<c1>,...`.
impl FromStr for MapSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (kind, body) = s
            .split_once(':')
            .ok_or_else(|| Error::domain(format!("map spec `{s}` must be `logistic:<p>` or `poly:<c0>,...`")))?;
        let number = |t: &str| {
            t.trim()
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| Error::domain(format!("bad number `{t}` in map spec")))
        };
        match kind.trim() {
            "logistic" => Ok(MapSpec::logistic(number(body)?)),
            "poly" => MapSpec::polynomial(body.split(',').map(number).collect::<Result<_>>()?),
            other => Err(Error::domain(format!("unknown map kind `{other}`"))),
        }
    }
}
