//! Durand-Kerner (Weierstrass) simultaneous root finding for real polynomials.

use num_complex::Complex64;

use super::hurwitz::CharPoly;
use crate::error::{Error, Result};

const MAX_SWEEPS: usize = 1000;
/// Accepted normwise backward error `|p(z)| / sum |a_j| |z|^j`.
const BACKWARD_ERROR_TOL: f64 = 1e-10;

/// All complex roots of `sum_k coeffs[k] z^k` (lowest degree first, leading entry nonzero).
///
/// Roots come out sorted by real part, each complex pair adjacent with the
/// positive imaginary part first, and exactly conjugate-symmetric.
pub fn polynomial_roots(coeffs: &[f64]) -> Result<Vec<Complex64>> {
    let degree = coeffs.len().saturating_sub(1);
    let lead = *coeffs
        .last()
        .ok_or_else(|| Error::domain("empty polynomial"))?;
    if lead == 0.0 || coeffs.iter().any(|c| !c.is_finite()) {
        return Err(Error::domain("polynomial needs finite coefficients and a nonzero leading term"));
    }
    if degree == 0 {
        return Ok(Vec::new());
    }
    // Exact zero roots are split off: the relative backward error cannot
    // certify a root at the origin.
    let zeros = coeffs.iter().take_while(|&&c| c == 0.0).count();
    if zeros > 0 {
        let mut z = polynomial_roots(&coeffs[zeros..])?;
        z.extend(std::iter::repeat_n(Complex64::new(0.0, 0.0), zeros));
        return Ok(pair_conjugates(z));
    }
    let monic: Vec<f64> = coeffs.iter().map(|c| c / lead).collect();
    if degree == 1 {
        return Ok(vec![Complex64::new(-monic[0], 0.0)]);
    }

    // Fujiwara bound on root moduli sets the starting circle.
    let radius = (0..degree)
        .map(|k| {
            let c = monic[k].abs();
            let c = if k == 0 { c / 2.0 } else { c };
            c.powf(1.0 / (degree - k) as f64)
        })
        .fold(0.0f64, f64::max)
        * 2.0;
    let radius = if radius > 0.0 { radius } else { 1.0 };
    let mut z: Vec<Complex64> = (0..degree)
        .map(|k| {
            let angle = std::f64::consts::TAU * k as f64 / degree as f64 + 0.4;
            // Small radial perturbation breaks symmetric stalls.
            Complex64::from_polar(radius * (1.0 + 0.01 * k as f64 / degree as f64), angle)
        })
        .collect();

    for _ in 0..MAX_SWEEPS {
        let mut max_step = 0.0f64;
        for i in 0..degree {
            let zi = z[i];
            let mut denom = Complex64::new(1.0, 0.0);
            for (j, zj) in z.iter().enumerate() {
                if j != i {
                    denom *= zi - zj;
                }
            }
            if denom.norm() == 0.0 {
                denom = Complex64::new(1e-300, 0.0);
            }
            let step = eval(&monic, zi) / denom;
            if step.is_finite() {
                z[i] = zi - step;
                max_step = max_step.max(step.norm() / (1.0 + z[i].norm()));
            }
        }
        if max_step < 1e-15 || z.iter().all(|&r| backward_error(&monic, r) < 1e-15) {
            break;
        }
    }

    let residuals: Vec<f64> = z.iter().map(|&r| backward_error(&monic, r)).collect();
    if residuals.iter().any(|r| !(*r < BACKWARD_ERROR_TOL)) {
        return Err(Error::numeric(
            format!("Durand-Kerner did not converge in {MAX_SWEEPS} sweeps"),
            residuals,
        ));
    }
    Ok(pair_conjugates(z))
}

/// Roots of the characteristic polynomial `a_0 μ^N + ... + a_N`.
pub fn roots(cp: &CharPoly) -> Result<Vec<Complex64>> {
    polynomial_roots(&cp.to_f64_ascending())
}

fn eval(coeffs: &[f64], z: Complex64) -> Complex64 {
    coeffs
        .iter()
        .rev()
        .fold(Complex64::new(0.0, 0.0), |acc, &c| acc * z + c)
}

pub(crate) fn backward_error(coeffs: &[f64], z: Complex64) -> f64 {
    let scale = coeffs
        .iter()
        .rev()
        .fold(0.0, |acc, c| acc * z.norm() + c.abs());
    let value = eval(coeffs, z).norm();
    if scale == 0.0 {
        value
    } else {
        value / scale
    }
}

/// Makes the root set exactly closed under conjugation.
fn pair_conjugates(mut z: Vec<Complex64>) -> Vec<Complex64> {
    for r in z.iter_mut() {
        if r.im.abs() <= 1e-12 * (1.0 + r.norm()) {
            r.im = 0.0;
        }
    }
    z.sort_by(|a, b| b.im.total_cmp(&a.im));
    let mut used = vec![false; z.len()];
    let mut out = Vec::with_capacity(z.len());
    for i in 0..z.len() {
        if used[i] {
            continue;
        }
        used[i] = true;
        let zi = z[i];
        if zi.im <= 0.0 {
            // Unpaired: real root (up to rounding).
            out.push(Complex64::new(zi.re, 0.0));
            continue;
        }
        let partner = (0..z.len())
            .filter(|&j| !used[j] && z[j].im < 0.0)
            .min_by(|&a, &b| {
                (z[a] - zi.conj())
                    .norm()
                    .total_cmp(&(z[b] - zi.conj()).norm())
            });
        match partner {
            Some(j) => {
                used[j] = true;
                let re = 0.5 * (zi.re + z[j].re);
                let im = 0.5 * (zi.im - z[j].im);
                out.push(Complex64::new(re, im));
                out.push(Complex64::new(re, -im));
            }
            None => out.push(Complex64::new(zi.re, 0.0)),
        }
    }
    // Stable sort keeps each pair's (+im, -im) order.
    out.sort_by(|a, b| a.re.total_cmp(&b.re));
    out
}
