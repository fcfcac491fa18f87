//! Routh-Hurwitz stability of truncations linearized about a reference point.
//!
//! Everything that decides a verdict runs on exact rationals: the Hurwitz
//! minors span factorially many orders of magnitude, and floating-point
//! determinants lose their sign for moderate `N`. Root finding is floating-point
//! and serves as a cross-check.

mod hurwitz;
mod rational;
mod roots;

pub use hurwitz::{
    char_poly, char_poly_f64, closed_form_u, hurwitz_sequence, CharPoly, HurwitzReport, Verdict,
};
pub use rational::{
    factorial, inverse_factorial, parse_rational, rational_from_f64, rational_to_f64,
};
pub use roots::{polynomial_roots, roots};

use num_rational::BigRational;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Search range for [`stable_alpha_window`].
pub const ALPHA_SEARCH_RANGE: (f64, f64) = (-100.0, 100.0);
const ALPHA_SCAN_STEP: f64 = 0.125;
const ALPHA_BOUNDARY_TOL: f64 = 1e-9;

/// Open interval of `α` values with a `Stable` verdict.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AlphaWindow {
    pub lo: f64,
    pub hi: f64,
}

fn is_stable(order: usize, alpha: f64) -> Result<bool> {
    let cp = char_poly(order, rational_from_f64(alpha)?)?;
    Ok(hurwitz_sequence(&cp).verdict == Verdict::Stable)
}

/// Largest interval of `α` in the search range for which the order-`N`
/// truncation is linearly stable, or `None` when no `α` is.
///
/// The range is scanned on a grid of step 1/8 (exact dyadic rationals), then
/// each edge of the widest stable run is bisected down to 1e-9.
pub fn stable_alpha_window(order: usize) -> Result<Option<AlphaWindow>> {
    if !(1..=8).contains(&order) {
        return Err(Error::domain(format!(
            "stable_alpha_window supports 1 <= N <= 8, got {order}"
        )));
    }
    let (lo, hi) = ALPHA_SEARCH_RANGE;
    let steps = ((hi - lo) / ALPHA_SCAN_STEP).round() as usize;
    let grid: Vec<f64> = (0..=steps).map(|k| lo + k as f64 * ALPHA_SCAN_STEP).collect();
    let stable: Vec<bool> = grid
        .iter()
        .map(|&a| is_stable(order, a))
        .collect::<Result<_>>()?;

    // Widest run of consecutive stable grid points.
    let mut best: Option<(usize, usize)> = None;
    let mut k = 0;
    while k < stable.len() {
        if stable[k] {
            let start = k;
            while k + 1 < stable.len() && stable[k + 1] {
                k += 1;
            }
            if best.is_none_or(|(s, e)| k - start > e - s) {
                best = Some((start, k));
            }
        }
        k += 1;
    }
    let Some((first, last)) = best else {
        return Ok(None);
    };

    let edge = |inside: f64, outside: f64| -> Result<f64> {
        let (mut a, mut b) = (inside, outside);
        while (a - b).abs() > ALPHA_BOUNDARY_TOL {
            let mid = 0.5 * (a + b);
            if is_stable(order, mid)? {
                a = mid;
            } else {
                b = mid;
            }
        }
        Ok(0.5 * (a + b))
    };
    let lo_edge = if first == 0 { lo } else { edge(grid[first], grid[first - 1])? };
    let hi_edge = if last + 1 == grid.len() { hi } else { edge(grid[last], grid[last + 1])? };
    Ok(Some(AlphaWindow {
        lo: lo_edge,
        hi: hi_edge,
    }))
}

/// Convenience: full report for an exact `α`.
pub fn analyze(order: usize, alpha: BigRational) -> Result<HurwitzReport> {
    Ok(hurwitz_sequence(&char_poly(order, alpha)?))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn windows_for_low_orders() {
        let w = stable_alpha_window(3).unwrap().unwrap();
        assert!(w.lo.abs() < 1e-6 && (w.hi - 3.0).abs() < 1e-6, "{w:?}");
        let w = stable_alpha_window(4).unwrap().unwrap();
        assert!(w.lo.abs() < 1e-6 && (w.hi - 1.5).abs() < 1e-6, "{w:?}");
        // First and second order: stable for every positive α in range.
        let w = stable_alpha_window(1).unwrap().unwrap();
        assert!(w.lo.abs() < 1e-6 && w.hi == 100.0);
    }

    #[test]
    fn no_window_from_order_five() {
        for n in 5..=8 {
            assert_eq!(stable_alpha_window(n).unwrap(), None, "N={n}");
        }
    }

    #[test]
    fn window_order_range_checked() {
        assert!(stable_alpha_window(0).is_err());
        assert!(stable_alpha_window(9).is_err());
    }
}
