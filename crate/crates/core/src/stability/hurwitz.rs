//! Characteristic polynomial of a truncation and its Hurwitz determinant sequence.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use super::rational::{inverse_factorial, rational_from_f64, serde_rationals};
use crate::error::{Error, Result};

/// `a_0 μ^N + a_1 μ^(N-1) + ... + a_N` with `a_j = 1/(N-j)!` for `j < N` and `a_N = α`.
///
/// This is `sum_{j=1..N} μ^j / j! + α`, the exponential-ansatz polynomial of the
/// order-`N` truncation linearized about a reference point with `α = 1 - f'(x*)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CharPoly {
    pub order: usize,
    /// `a_0 ..= a_N`, leading coefficient first.
    #[serde(with = "serde_rationals")]
    pub coeffs: Vec<BigRational>,
}

impl CharPoly {
    pub fn alpha(&self) -> &BigRational {
        &self.coeffs[self.order]
    }

    /// Coefficients as floats, lowest degree first (`a_N, ..., a_0`).
    pub fn to_f64_ascending(&self) -> Vec<f64> {
        self.coeffs
            .iter()
            .rev()
            .map(super::rational::rational_to_f64)
            .collect()
    }
}

pub fn char_poly(order: usize, alpha: BigRational) -> Result<CharPoly> {
    if order == 0 {
        return Err(Error::domain("characteristic polynomial needs order N >= 1"));
    }
    let mut coeffs: Vec<BigRational> = (0..order).map(|j| inverse_factorial(order - j)).collect();
    coeffs.push(alpha);
    Ok(CharPoly { order, coeffs })
}

/// Same as [`char_poly`] with `α` taken as the exact binary value of the float.
pub fn char_poly_f64(order: usize, alpha: f64) -> Result<CharPoly> {
    char_poly(order, rational_from_f64(alpha)?)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    Stable,
    Unstable,
    /// Some Hurwitz determinant is exactly zero; the criterion is at a boundary.
    Marginal,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HurwitzReport {
    /// `U_0 = a_0`, then the leading principal minors `U_1 ..= U_N` of the Hurwitz matrix.
    #[serde(with = "serde_rationals")]
    pub u_sequence: Vec<BigRational>,
    /// Sign changes along the Routh column `U_0, U_1, U_2/U_1, ..., U_N/U_(N-1)`.
    pub sign_changes: usize,
    /// Sign flips between consecutive nonzero entries of `u_sequence` itself.
    pub minor_sign_flips: usize,
    pub n_unstable_roots: usize,
    pub verdict: Verdict,
}

impl HurwitzReport {
    pub fn has_zero(&self) -> bool {
        self.u_sequence.iter().any(Zero::is_zero)
    }
}

/// Exact Hurwitz determinant sequence and Routh-Hurwitz verdict.
///
/// The Hurwitz matrix has entry `a_(2i-k)` at (1-based) row `i`, column `k`,
/// with `a_m = 0` outside `0..=N`. All minors are computed exactly.
pub fn hurwitz_sequence(cp: &CharPoly) -> HurwitzReport {
    let n = cp.order;
    let a = &cp.coeffs;

    // Scale to integers so the minors can use fraction-free elimination.
    let denom = a
        .iter()
        .fold(BigInt::one(), |acc, c| acc.lcm(c.denom()));
    let scaled: Vec<BigInt> = a
        .iter()
        .map(|c| (c * BigRational::from_integer(denom.clone())).to_integer())
        .collect();
    let entry = |row: usize, col: usize| -> BigInt {
        // 0-based row/col: a_(2(row+1) - (col+1)) = a_(2 row - col + 1)
        let idx = 2 * row as isize - col as isize + 1;
        if (0..=n as isize).contains(&idx) {
            scaled[idx as usize].clone()
        } else {
            BigInt::zero()
        }
    };

    let mut u_sequence = Vec::with_capacity(n + 1);
    u_sequence.push(a[0].clone());
    let mut denom_power = BigInt::one();
    for size in 1..=n {
        denom_power *= &denom;
        let minor: Vec<Vec<BigInt>> = (0..size)
            .map(|r| (0..size).map(|c| entry(r, c)).collect())
            .collect();
        u_sequence.push(BigRational::new(bareiss_determinant(minor), denom_power.clone()));
    }

    let signs: Vec<i8> = u_sequence.iter().map(sign_of).collect();
    let sign_changes = routh_column_sign_changes(&signs);
    let nonzero: Vec<i8> = signs.iter().copied().filter(|s| *s != 0).collect();
    let minor_sign_flips = nonzero.windows(2).filter(|w| w[0] != w[1]).count();

    let verdict = if signs.contains(&0) || a[n].is_zero() {
        Verdict::Marginal
    } else if sign_changes == 0 {
        Verdict::Stable
    } else {
        Verdict::Unstable
    };

    HurwitzReport {
        u_sequence,
        sign_changes,
        minor_sign_flips,
        n_unstable_roots: sign_changes,
        verdict,
    }
}

fn sign_of(r: &BigRational) -> i8 {
    if r.is_zero() {
        0
    } else if r.is_positive() {
        1
    } else {
        -1
    }
}

/// Sign changes in `U_0, U_1, U_2/U_1, ..., U_N/U_(N-1)`.
///
/// A zero minor is replaced by a small quantity of either sign; the smallest count
/// over those choices is returned, so roots on the imaginary axis are not counted.
fn routh_column_sign_changes(minor_signs: &[i8]) -> usize {
    let zeros: Vec<usize> = (0..minor_signs.len())
        .filter(|&i| minor_signs[i] == 0)
        .collect();
    let choices = 1usize << zeros.len().min(16);
    let mut best = usize::MAX;
    let mut signs = minor_signs.to_vec();
    for mask in 0..choices {
        for (bit, &i) in zeros.iter().enumerate().take(16) {
            signs[i] = if mask >> bit & 1 == 1 { -1 } else { 1 };
        }
        let column: Vec<i8> = (0..signs.len())
            .map(|k| if k < 2 { signs[k] } else { signs[k] * signs[k - 1] })
            .collect();
        let flips = column.windows(2).filter(|w| w[0] != w[1]).count();
        best = best.min(flips);
    }
    best
}

/// Determinant by fraction-free (Bareiss) elimination with row pivoting.
pub(crate) fn bareiss_determinant(mut m: Vec<Vec<BigInt>>) -> BigInt {
    let n = m.len();
    if n == 0 {
        return BigInt::one();
    }
    let mut negate = false;
    let mut prev = BigInt::one();
    for k in 0..n - 1 {
        if m[k][k].is_zero() {
            match (k + 1..n).find(|&i| !m[i][k].is_zero()) {
                Some(i) => {
                    m.swap(i, k);
                    negate = !negate;
                }
                None => return BigInt::zero(),
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let v = (&m[i][j] * &m[k][k] - &m[i][k] * &m[k][j]) / &prev;
                m[i][j] = v;
            }
        }
        prev = m[k][k].clone();
    }
    let det = m[n - 1][n - 1].clone();
    if negate {
        -det
    } else {
        det
    }
}

/// Printed closed forms for the leading Hurwitz determinants.
///
/// For `N > 5` returns `[U_0, U_1, U_2, U_3]`; for `N = 5` returns `[U_0 ..= U_4]`.
/// These are evaluated directly from the formulas, independently of
/// [`hurwitz_sequence`].
pub fn closed_form_u(order: usize, alpha: &BigRational) -> Result<Vec<BigRational>> {
    let f = |k: usize| BigRational::from_integer(super::rational::factorial(k));
    let int = |k: i64| BigRational::from_integer(BigInt::from(k));
    match order {
        5 => {
            let shifted = alpha - BigRational::new(5.into(), 3.into());
            let u4 = -(&shifted * &shifted + BigRational::new(20.into(), 9.into())) / (f(5) * f(5));
            Ok(vec![
                f(5).recip(),
                f(4).recip(),
                int(2) / (f(5) * f(3)),
                (alpha - int(1)) / (f(5) * f(4)),
                u4,
            ])
        }
        n if n > 5 => Ok(vec![
            f(n).recip(),
            f(n - 1).recip(),
            int(2) / (f(n) * f(n - 2)),
            -int(2) * int(n as i64 - 5) / (f(n) * f(n - 1) * f(n - 3)),
        ]),
        n => Err(Error::Unsupported(format!(
            "no closed form for the Hurwitz determinants at order {n} (need N >= 5)"
        ))),
    }
}
