//! Closed-form propagation of the linearized truncation `ξ' = Mξ + v`.
//!
//! Two independent routes: diagonalization through the companion matrix's
//! Vandermonde eigenvectors, and the exponential of the augmented block matrix
//! `[[M, v], [0, 0]]`, which carries the constant forcing along and needs no
//! spectral assumptions.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::embedding::LinearizedSystem;
use crate::error::{Error, Result};
use crate::stability::{char_poly, rational_from_f64};

/// Eigenvalue pairs closer than this are treated as a repeated eigenvalue.
pub const DEGENERACY_GAP: f64 = 1e-8;
/// Below this modulus `(e^{μt} − 1)/μ` is replaced by its series `t + μt²/2`.
pub const ZERO_EIGENVALUE: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq)]
pub struct EigenSolution {
    pub eigenvalues: Vec<Complex64>,
    /// Columns are eigenvectors `(1, μ, …, μ^{N−1})` scaled to unit max-norm.
    pub similarity: DMatrix<Complex64>,
    pub s_inverse: DMatrix<Complex64>,
    /// 1-norm condition number of `similarity`.
    pub condition: f64,
}

/// Monic characteristic polynomial of the companion matrix, lowest degree first.
fn monic_coeffs(ls: &LinearizedSystem) -> Vec<f64> {
    let n = ls.order;
    let mut c: Vec<f64> = (0..n).map(|k| -ls.companion[(n - 1, k)]).collect();
    c.push(1.0);
    c
}

fn horner(c: &[f64], z: Complex64) -> (Complex64, Complex64) {
    let mut p = Complex64::zero();
    let mut dp = Complex64::zero();
    for &a in c.iter().rev() {
        dp = dp * z + p;
        p = p * z + a;
    }
    (p, dp)
}

/// Whether `Σ μ^j/j! + α` has a repeated root, decided exactly from
/// `gcd(p, p')` over the rationals.
fn has_repeated_root(order: usize, alpha: f64) -> Result<bool> {
    let cp = char_poly(order, rational_from_f64(alpha)?)?;
    // Descending powers.
    let p = cp.coeffs.clone();
    let dp: Vec<BigRational> = p[..order]
        .iter()
        .enumerate()
        .map(|(i, a)| a * BigRational::from_integer((order - i).into()))
        .collect();
    Ok(poly_gcd_degree(p, dp) > 0)
}

fn trim(mut p: Vec<BigRational>) -> Vec<BigRational> {
    let lead = p.iter().position(|a| !a.is_zero()).unwrap_or(p.len());
    p.drain(..lead);
    p
}

/// Degree of the gcd of two polynomials in descending-power form.
fn poly_gcd_degree(a: Vec<BigRational>, b: Vec<BigRational>) -> usize {
    let (mut a, mut b) = (trim(a), trim(b));
    while !b.is_empty() {
        // a mod b
        while a.len() >= b.len() && !a.is_empty() {
            let q = &a[0] / &b[0];
            for (ai, bi) in a.iter_mut().zip(&b) {
                *ai -= &q * bi;
            }
            a = trim(a);
        }
        std::mem::swap(&mut a, &mut b);
    }
    a.len().saturating_sub(1)
}

/// Diagonalizes the companion matrix.
///
/// Eigenvalues come from the dense eigensolver and are then Newton-polished on
/// the characteristic polynomial. Repeated or nearly repeated eigenvalues are
/// reported as [`Error::DegenerateSpectrum`]; use [`propagate_series`] there.
pub fn eigendecompose(ls: &LinearizedSystem) -> Result<EigenSolution> {
    let n = ls.order;
    if n == 0 || ls.companion.nrows() != n || !ls.alpha.is_finite() {
        return Err(Error::domain("linearized system must have order >= 1 and finite alpha"));
    }
    let coeffs = monic_coeffs(ls);
    let mut mu: Vec<Complex64> = ls.companion.complex_eigenvalues().iter().copied().collect();
    for z in &mut mu {
        for _ in 0..4 {
            let (p, dp) = horner(&coeffs, *z);
            if dp.norm() == 0.0 {
                break;
            }
            let next = *z - p / dp;
            // Near a repeated root p/dp is noise; keep only improving steps.
            if !next.re.is_finite() || !next.im.is_finite() || horner(&coeffs, next).0.norm() >= p.norm() {
                break;
            }
            *z = next;
        }
        if z.im.abs() <= 1e-14 * (1.0 + z.norm()) {
            z.im = 0.0;
        }
    }
    mu.sort_by(|a, b| a.re.total_cmp(&b.re).then(b.im.total_cmp(&a.im)));

    if has_repeated_root(n, ls.alpha)? {
        let (i, j) = closest_pair(&mu);
        return Err(Error::DegenerateSpectrum {
            first: i,
            second: j,
            gap: (mu[i] - mu[j]).norm(),
        });
    }
    if n > 1 {
        let (i, j) = closest_pair(&mu);
        let gap = (mu[i] - mu[j]).norm();
        if gap < DEGENERACY_GAP {
            return Err(Error::DegenerateSpectrum {
                first: i,
                second: j,
                gap,
            });
        }
    }

    let mut s = DMatrix::<Complex64>::zeros(n, n);
    for (k, &z) in mu.iter().enumerate() {
        let mut col: Vec<Complex64> = std::iter::successors(Some(Complex64::one()), |w| Some(w * z))
            .take(n)
            .collect();
        let scale = col.iter().fold(0.0f64, |m, w| m.max(w.norm()));
        for w in &mut col {
            *w /= scale;
        }
        s.set_column(k, &DVector::from_vec(col));
    }
    let s_inverse = s
        .clone()
        .try_inverse()
        .ok_or_else(|| Error::numeric("eigenvector matrix is singular", vec![]))?;
    let norm1 = |m: &DMatrix<Complex64>| {
        m.column_iter()
            .map(|c| c.iter().map(|w| w.norm()).sum::<f64>())
            .fold(0.0, f64::max)
    };
    let condition = norm1(&s) * norm1(&s_inverse);
    Ok(EigenSolution {
        eigenvalues: mu,
        similarity: s,
        s_inverse,
        condition,
    })
}

fn closest_pair(mu: &[Complex64]) -> (usize, usize) {
    let mut best = (0, 0, f64::INFINITY);
    for i in 0..mu.len() {
        for j in i + 1..mu.len() {
            let d = (mu[i] - mu[j]).norm();
            if d < best.2 {
                best = (i, j, d);
            }
        }
    }
    (best.0, best.1)
}

fn check_inputs(ls: &LinearizedSystem, xi0: &[f64], t: f64) -> Result<()> {
    if xi0.len() != ls.order || xi0.iter().any(|v| !v.is_finite()) {
        return Err(Error::domain("initial state must be finite with the system dimension"));
    }
    if !(t >= 0.0) || !t.is_finite() {
        return Err(Error::domain("propagation time must be finite and non-negative"));
    }
    Ok(())
}

/// `S·diag(e^{μt})·S⁻¹ξ₀ + S·diag((e^{μt} − 1)/μ)·S⁻¹v`.
pub fn propagate_closed(ls: &LinearizedSystem, xi0: &[f64], t: f64) -> Result<Vec<f64>> {
    check_inputs(ls, xi0, t)?;
    if t == 0.0 {
        return Ok(xi0.to_vec());
    }
    let eig = eigendecompose(ls)?;
    Ok(closed_with(&eig, ls, xi0, t))
}

/// [`propagate_closed`] with a precomputed decomposition.
pub fn closed_with(eig: &EigenSolution, ls: &LinearizedSystem, xi0: &[f64], t: f64) -> Vec<f64> {
    let to_c = |v: &[f64]| DVector::from_iterator(v.len(), v.iter().map(|&x| Complex64::new(x, 0.0)));
    let a = &eig.s_inverse * to_c(xi0);
    let b = &eig.s_inverse * to_c(ls.inhomogeneous.as_slice());
    let modal = DVector::from_iterator(
        a.len(),
        eig.eigenvalues.iter().enumerate().map(|(k, &mu)| {
            let e = (mu * t).exp();
            let phi = if mu.norm() < ZERO_EIGENVALUE {
                t + mu * t * t / 2.0
            } else {
                (e - 1.0) / mu
            };
            e * a[k] + phi * b[k]
        }),
    );
    (&eig.similarity * modal).iter().map(|z| z.re).collect()
}

/// Same result through `exp(t·[[M, v], [0, 0]])`; valid for any spectrum.
pub fn propagate_series(ls: &LinearizedSystem, xi0: &[f64], t: f64) -> Result<Vec<f64>> {
    check_inputs(ls, xi0, t)?;
    if t == 0.0 {
        return Ok(xi0.to_vec());
    }
    let n = ls.order;
    let mut aug = DMatrix::<f64>::zeros(n + 1, n + 1);
    aug.view_mut((0, 0), (n, n)).copy_from(&(&ls.companion * t));
    aug.view_mut((0, n), (n, 1)).copy_from(&(&ls.inhomogeneous * t));
    let e = aug.exp();
    let mut x0 = DVector::from_column_slice(xi0).push(1.0);
    x0 = e * x0;
    let out: Vec<f64> = x0.iter().take(n).copied().collect();
    if out.iter().any(|v| !v.is_finite()) {
        return Err(Error::numeric("matrix exponential overflowed", out));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::embedding::truncate;
    use crate::maps::MapSpec;

    fn rel(a: &[f64], b: &[f64]) -> f64 {
        let scale = b.iter().fold(1e-300f64, |m, v| m.max(v.abs()));
        a.iter().zip(b).fold(0.0f64, |m, (x, y)| m.max((x - y).abs())) / scale
    }

    #[test]
    fn scalar_decay() {
        let ls = LinearizedSystem::from_coefficients(1, 2.0, 0.0).unwrap();
        let eig = eigendecompose(&ls).unwrap();
        assert!((eig.eigenvalues[0].re + 2.0).abs() < 1e-14);
        assert_eq!(eig.similarity[(0, 0)], Complex64::one());
        let expected = (-2.0f64).exp();
        assert!((propagate_closed(&ls, &[1.0], 1.0).unwrap()[0] - expected).abs() < 1e-14);
        assert!((propagate_series(&ls, &[1.0], 1.0).unwrap()[0] - expected).abs() < 1e-14);
    }

    #[test]
    fn cubic_hopf_spectrum() {
        let sys = truncate(MapSpec::logistic(4.0), 3).unwrap();
        let ls = sys.linearize(0.75).unwrap();
        let eig = eigendecompose(&ls).unwrap();
        let s6 = 6f64.sqrt();
        let want = [Complex64::new(-3.0, 0.0), Complex64::new(0.0, s6), Complex64::new(0.0, -s6)];
        for (got, w) in eig.eigenvalues.iter().zip(want) {
            assert!((got - w).norm() < 1e-12, "{got} vs {w}");
        }
        // M S = S D
        let m = ls.companion.map(|v| Complex64::new(v, 0.0));
        let d = DMatrix::from_diagonal(&DVector::from_vec(eig.eigenvalues.clone()));
        let resid = (&m * &eig.similarity - &eig.similarity * d).camax();
        assert!(resid < 1e-8 * ls.companion.amax());
    }

    #[test]
    fn double_root_is_degenerate() {
        let ls = LinearizedSystem::from_coefficients(2, 0.5, 0.0).unwrap();
        assert!(matches!(eigendecompose(&ls), Err(Error::DegenerateSpectrum { .. })));
        assert!(propagate_closed(&ls, &[1.0, 0.0], 1.0).is_err());
        let x = propagate_series(&ls, &[1.0, 0.0], 1.0).unwrap();
        let e = (-1.0f64).exp();
        assert!(rel(&x, &[2.0 * e, -e]) < 1e-13, "{x:?}");
    }

    #[test]
    fn zero_time_is_identity() {
        let ls = LinearizedSystem::from_coefficients(4, 0.7, 0.3).unwrap();
        let xi0 = [0.1, -0.2, 0.3, 0.4];
        assert_eq!(propagate_closed(&ls, &xi0, 0.0).unwrap(), xi0);
        assert_eq!(propagate_series(&ls, &xi0, 0.0).unwrap(), xi0);
    }

    #[test]
    fn zero_eigenvalue_forcing() {
        // α = 0: μ = 0 is a root, the forcing integrates linearly in ξ₁.
        let ls = LinearizedSystem::from_coefficients(1, 0.0, 0.25).unwrap();
        let x = propagate_closed(&ls, &[1.0], 2.0).unwrap();
        assert!((x[0] - 1.5).abs() < 1e-14);
        let ls = LinearizedSystem::from_coefficients(3, 0.0, 0.25).unwrap();
        let xi0 = [0.2, -0.1, 0.05];
        for t in [0.1, 1.0, 5.0] {
            let a = propagate_closed(&ls, &xi0, t).unwrap();
            let b = propagate_series(&ls, &xi0, t).unwrap();
            assert!(rel(&a, &b) < 1e-8, "t={t}: {a:?} {b:?}");
        }
    }

    #[test]
    fn closed_matches_series_and_semigroup() {
        let sys = truncate(MapSpec::logistic(3.5), 3).unwrap();
        let ls = sys.linearize(1.0 - 1.0 / 3.5).unwrap();
        let xi0 = [0.3, -0.7, 0.2];
        let a = propagate_closed(&ls, &xi0, 2.0).unwrap();
        let b = propagate_series(&ls, &xi0, 2.0).unwrap();
        assert!(rel(&a, &b) < 1e-9);
        let half = propagate_closed(&ls, &xi0, 0.7).unwrap();
        let c = propagate_closed(&ls, &half, 1.3).unwrap();
        assert!(rel(&c, &a) < 1e-8);
    }

    #[test]
    fn exact_repeated_root_detection() {
        assert!(has_repeated_root(2, 0.5).unwrap());
        assert!(!has_repeated_root(2, 0.5 + 1e-12).unwrap());
        assert!(!has_repeated_root(5, 1.0).unwrap());
    }
}
