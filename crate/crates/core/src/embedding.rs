//! Truncated ODEs built from a map.
//!
//! The order-`N` truncation is carried in first-order form with state
//! `ξ = (x, x', ..., x^(N-1))`:
//!
//! ```text
//! ξ_k' = ξ_(k+1)                                   k < N
//! ξ_N' = N! f(ξ_1) - sum_{j=0..N-1} (N!/j!) ξ_(j+1)
//! ```
//!
//! The N = 3 logistic truncation is also available in the scaled jerk form
//! `X''' + X'' + ν X' - λ X + X² = 0` with `X = (2p/9) x` and `τ = 3t`.
//! Substituting into the unscaled cubic shows the time scale must be `τ = 3t`
//! (so that `d/dt = 3 d/dτ`); `τ = t/3` does not give unit coefficients on
//! `X'''` and `X''`.

use nalgebra::{DMatrix, DVector};
use num_rational::BigRational;
use serde::{Deserialize, Serialize};

use crate::dynamics::{TangentField, VectorField};
use crate::error::{Error, Result};
use crate::maps::MapSpec;
use crate::stability::{inverse_factorial, rational_to_f64};

/// `N!` must stay exactly representable in both `u64` and `f64`.
pub const MAX_ORDER: usize = 20;

/// `sum_{j=0..N} x^(j)/j! = f(x)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TruncatedSystem {
    map: MapSpec,
    order: usize,
    /// `N!/j!` for `j = 0..N`; multiplying the equation by `N!` gives these integer weights.
    weights: Vec<f64>,
}

pub fn truncate(map: MapSpec, order: usize) -> Result<TruncatedSystem> {
    if order == 0 {
        return Err(Error::domain(
            "order N = 0 gives an algebraic equation, not an ODE",
        ));
    }
    if order > MAX_ORDER {
        return Err(Error::domain(format!("order N must be at most {MAX_ORDER}")));
    }
    let weights = integer_weights(order).into_iter().map(|w| w as f64).collect();
    Ok(TruncatedSystem { map, order, weights })
}

fn integer_weights(order: usize) -> Vec<u64> {
    // N!/j! for j = 0..=N
    let mut w = vec![1u64; order + 1];
    for j in (0..order).rev() {
        w[j] = w[j + 1] * (j as u64 + 1);
    }
    w
}

impl TruncatedSystem {
    pub fn map(&self) -> &MapSpec {
        &self.map
    }

    pub fn order(&self) -> usize {
        self.order
    }

    /// Exact Taylor weights `[1/0!, 1/1!, ..., 1/N!]`.
    pub fn taylor_coeffs(&self) -> Vec<BigRational> {
        (0..=self.order).map(inverse_factorial).collect()
    }

    /// Coefficients of `x^(N), x^(N-1), ..., x` after multiplying through by `N!`.
    ///
    /// For N = 3 this is `[1, 3, 6, 6]`: `x''' + 3x'' + 6x' + 6(x - f(x)) = 0`.
    pub fn integer_coefficients(&self) -> Vec<u64> {
        integer_weights(self.order).into_iter().rev().collect()
    }

    /// Right-hand side of the first-order system; checks the state length.
    pub fn vector_field(&self, state: &[f64]) -> Result<Vec<f64>> {
        if state.len() != self.order {
            return Err(Error::domain(format!(
                "state has {} components, order is {}",
                state.len(),
                self.order
            )));
        }
        if state.iter().any(|v| !v.is_finite()) {
            return Err(Error::domain("state must be finite"));
        }
        let mut out = vec![0.0; self.order];
        self.eval(state, &mut out);
        Ok(out)
    }

    /// Linearization about the reference point `x*` (not necessarily a fixed point).
    pub fn linearize(&self, x_star: f64) -> Result<LinearizedSystem> {
        let alpha = 1.0 - self.map.deriv(x_star)?;
        let beta = self.map.eval(x_star)? - x_star;
        let mut ls = LinearizedSystem::from_coefficients(self.order, alpha, beta)?;
        ls.ref_point = x_star;
        Ok(ls)
    }
}

impl VectorField for TruncatedSystem {
    fn dim(&self) -> usize {
        self.order
    }

    #[inline]
    fn eval(&self, state: &[f64], out: &mut [f64]) {
        let n = self.order;
        out[..n - 1].copy_from_slice(&state[1..n]);
        // Difference first, so equilibria cancel before the N! scaling.
        let mut acc = self.weights[0] * (self.map.eval_unchecked(state[0]) - state[0]);
        for j in 1..n {
            acc -= self.weights[j] * state[j];
        }
        out[n - 1] = acc;
    }
}

impl TangentField for TruncatedSystem {
    #[inline]
    fn tangent(&self, state: &[f64], tangent: &[f64], out: &mut [f64]) {
        let n = self.order;
        out[..n - 1].copy_from_slice(&tangent[1..n]);
        let mut acc = self.weights[0] * (self.map.deriv_unchecked(state[0]) - 1.0) * tangent[0];
        for j in 1..n {
            acc -= self.weights[j] * tangent[j];
        }
        out[n - 1] = acc;
    }
}

/// `dξ/dt = M ξ + v` for the deviation `ξ = (δx, δx', ...)` from a reference point.
#[derive(Clone, Debug, PartialEq)]
pub struct LinearizedSystem {
    /// `1 - f'(x*)`
    pub alpha: f64,
    /// `f(x*) - x*`
    pub beta: f64,
    pub ref_point: f64,
    pub order: usize,
    /// Companion matrix: ones on the superdiagonal, last row `-a_(N-k)/a_0`.
    pub companion: DMatrix<f64>,
    /// Zero except the last entry, `β N!`.
    pub inhomogeneous: DVector<f64>,
}

impl LinearizedSystem {
    /// Builds the linear system directly from `α` and `β` (reference point unset, NaN).
    pub fn from_coefficients(order: usize, alpha: f64, beta: f64) -> Result<Self> {
        if order == 0 || order > MAX_ORDER {
            return Err(Error::domain(format!("order must be in 1..={MAX_ORDER}")));
        }
        if !alpha.is_finite() || !beta.is_finite() {
            return Err(Error::domain("alpha and beta must be finite"));
        }
        let w = integer_weights(order);
        let n_fact = w[0] as f64;
        let mut m = DMatrix::zeros(order, order);
        for k in 0..order - 1 {
            m[(k, k + 1)] = 1.0;
        }
        // a_N / a_0 = α N!, a_(N-k) / a_0 = N!/k!
        m[(order - 1, 0)] = -alpha * n_fact;
        for k in 1..order {
            m[(order - 1, k)] = -(w[k] as f64);
        }
        let mut v = DVector::zeros(order);
        v[order - 1] = beta * n_fact;
        Ok(LinearizedSystem {
            alpha,
            beta,
            ref_point: f64::NAN,
            order,
            companion: m,
            inhomogeneous: v,
        })
    }
}

impl VectorField for LinearizedSystem {
    fn dim(&self) -> usize {
        self.order
    }

    fn eval(&self, state: &[f64], out: &mut [f64]) {
        let n = self.order;
        out[..n - 1].copy_from_slice(&state[1..n]);
        let last = (0..n)
            .map(|k| self.companion[(n - 1, k)] * state[k])
            .sum::<f64>();
        out[n - 1] = last + self.inhomogeneous[n - 1];
    }
}

impl TangentField for LinearizedSystem {
    fn tangent(&self, _state: &[f64], tangent: &[f64], out: &mut [f64]) {
        let n = self.order;
        out[..n - 1].copy_from_slice(&tangent[1..n]);
        out[n - 1] = (0..n)
            .map(|k| self.companion[(n - 1, k)] * tangent[k])
            .sum();
    }
}

/// `X''' + X'' + ν X' - λ X + X² = 0` in first-order form `(X, X', X'')`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScaledCubic {
    pub nu: f64,
    pub lambda: f64,
}

impl ScaledCubic {
    pub fn new(nu: f64, lambda: f64) -> Result<Self> {
        if !nu.is_finite() || !lambda.is_finite() {
            return Err(Error::domain("nu and lambda must be finite"));
        }
        Ok(ScaledCubic { nu, lambda })
    }

    /// Right-hand side of the first-order jerk system.
    pub fn vector_field(&self, state: [f64; 3]) -> [f64; 3] {
        let mut out = [0.0; 3];
        self.eval(&state, &mut out);
        out
    }

    /// The nonzero equilibrium `X = λ`.
    pub fn equilibrium(&self) -> [f64; 3] {
        [self.lambda, 0.0, 0.0]
    }
}

/// `ν = 2/3`, `λ = 2(p - 1)/9`.
pub fn to_scaled(p: f64) -> Result<ScaledCubic> {
    ScaledCubic::new(2.0 / 3.0, 2.0 * (p - 1.0) / 9.0)
}

impl VectorField for ScaledCubic {
    fn dim(&self) -> usize {
        3
    }

    #[inline]
    fn eval(&self, s: &[f64], out: &mut [f64]) {
        out[0] = s[1];
        out[1] = s[2];
        out[2] = -s[2] - self.nu * s[1] + self.lambda * s[0] - s[0] * s[0];
    }
}

impl TangentField for ScaledCubic {
    #[inline]
    fn tangent(&self, s: &[f64], v: &[f64], out: &mut [f64]) {
        out[0] = v[1];
        out[1] = v[2];
        out[2] = -v[2] - self.nu * v[1] + (self.lambda - 2.0 * s[0]) * v[0];
    }
}

/// Maps an unscaled N = 3 logistic state `(x, dx/dt, d²x/dt²)` to `(X, dX/dτ, d²X/dτ²)`.
///
/// With `X = (2p/9) x` and `τ = 3t`, each τ-derivative carries a factor `1/3`.
pub fn scaled_from_unscaled(x_state: [f64; 3], p: f64) -> Result<[f64; 3]> {
    if p == 0.0 || !p.is_finite() {
        return Err(Error::domain("scaling needs a finite nonzero p"));
    }
    let s = 2.0 * p / 9.0;
    Ok([s * x_state[0], s * x_state[1] / 3.0, s * x_state[2] / 9.0])
}

/// Inverse of [`scaled_from_unscaled`].
pub fn unscaled_from_scaled(scaled: [f64; 3], p: f64) -> Result<[f64; 3]> {
    if p == 0.0 || !p.is_finite() {
        return Err(Error::domain("scaling needs a finite nonzero p"));
    }
    let s = 9.0 / (2.0 * p);
    Ok([s * scaled[0], s * scaled[1] * 3.0, s * scaled[2] * 9.0])
}

/// The weights as floats, for display alongside the exact form.
pub fn taylor_coeffs_f64(sys: &TruncatedSystem) -> Vec<f64> {
    sys.taylor_coeffs().iter().map(rational_to_f64).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::One;
    use proptest::prelude::*;

    fn logistic3(p: f64) -> TruncatedSystem {
        truncate(MapSpec::logistic(p), 3).unwrap()
    }

    #[test]
    fn taylor_weights_are_inverse_factorials() {
        let s = logistic3(4.0);
        let c = s.taylor_coeffs();
        let q = |d: i64| BigRational::new(1.into(), d.into());
        assert_eq!(c, vec![BigRational::one(), q(1), q(2), q(6)]);
        assert_eq!(s.integer_coefficients(), vec![1, 3, 6, 6]);
        let s5 = truncate(MapSpec::logistic(4.0), 5).unwrap();
        assert_eq!(s5.integer_coefficients(), vec![1, 5, 20, 60, 120, 120]);
    }

    #[test]
    fn order_bounds() {
        assert!(truncate(MapSpec::logistic(4.0), 0).is_err());
        assert!(truncate(MapSpec::logistic(4.0), MAX_ORDER + 1).is_err());
        let s = truncate(MapSpec::logistic(4.0), MAX_ORDER).unwrap();
        assert_eq!(s.integer_coefficients()[MAX_ORDER], 2_432_902_008_176_640_000);
    }

    #[test]
    fn vector_field_examples() {
        let s = logistic3(4.0);
        assert_eq!(s.vector_field(&[0.0, 0.0, 0.0]).unwrap(), vec![0.0; 3]);
        assert_eq!(s.vector_field(&[0.75, 0.0, 0.0]).unwrap(), vec![0.0; 3]);
        let s1 = truncate(MapSpec::logistic(3.2), 1).unwrap();
        let x = 0.3;
        let out = s1.vector_field(&[x]).unwrap();
        assert!((out[0] - (3.2 * x * (1.0 - x) - x)).abs() < 1e-15);
        assert!(s.vector_field(&[0.1, 0.2]).is_err());
        assert!(s.vector_field(&[f64::NAN, 0.0, 0.0]).is_err());
    }

    #[test]
    fn equation_matches_cubic_form() {
        // x''' = -3x'' - 6x' - 6(x - f(x))
        let p = 3.7;
        let s = logistic3(p);
        let st = [0.3, -0.2, 0.5];
        let out = s.vector_field(&st).unwrap();
        let f = p * st[0] * (1.0 - st[0]);
        let want = -3.0 * st[2] - 6.0 * st[1] - 6.0 * (st[0] - f);
        assert!((out[2] - want).abs() < 1e-14);
        assert_eq!(&out[..2], &st[1..]);
    }

    #[test]
    fn linearize_examples() {
        let p = 3.5;
        let s = logistic3(p);
        let ls = s.linearize(1.0 - 1.0 / p).unwrap();
        assert!((ls.alpha - 2.5).abs() < 1e-12);
        assert!(ls.beta.abs() < 1e-12);
        let ls0 = s.linearize(0.0).unwrap();
        assert_eq!(ls0.alpha, 1.0 - p);
        assert_eq!(ls0.beta, 0.0);
        let ls = s.linearize(0.2).unwrap();
        assert_eq!(ls.beta, MapSpec::logistic(p).eval(0.2).unwrap() - 0.2);
    }

    #[test]
    fn companion_shape() {
        let ls = LinearizedSystem::from_coefficients(4, 0.7, 0.25).unwrap();
        let m = &ls.companion;
        for i in 0..3 {
            for j in 0..4 {
                let want = if j == i + 1 { 1.0 } else { 0.0 };
                assert_eq!(m[(i, j)], want);
            }
        }
        // a_j = 1/(4-j)!, a_0 = 1/24: last row = -(24 α, 24, 12, 4)
        assert_eq!(
            m.row(3).iter().copied().collect::<Vec<_>>(),
            vec![-24.0 * 0.7, -24.0, -12.0, -4.0]
        );
        assert_eq!(ls.inhomogeneous.as_slice(), &[0.0, 0.0, 0.0, 6.0]);
    }

    #[test]
    fn scaled_examples() {
        let c = to_scaled(4.0).unwrap();
        assert!((c.nu - 2.0 / 3.0).abs() < 1e-15 && (c.lambda - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(to_scaled(1.0).unwrap().lambda, 0.0);
        assert!((to_scaled(5.5).unwrap().lambda - 1.0).abs() < 1e-15);

        assert_eq!(c.vector_field([0.0; 3]), [0.0; 3]);
        assert_eq!(c.vector_field(c.equilibrium()), [0.0; 3]);
        let out = c.vector_field([1.0, 0.0, 0.0]);
        assert!((out[2] + 1.0 / 3.0).abs() < 1e-15 && out[0] == 0.0 && out[1] == 0.0);
    }

    #[test]
    fn scaling_transform() {
        assert_eq!(scaled_from_unscaled([0.4, 0.0, 0.0], 4.5).unwrap(), [0.4, 0.0, 0.0]);
        assert_eq!(scaled_from_unscaled([1.0, 1.0, 1.0], 4.5).unwrap(), [1.0, 1.0 / 3.0, 1.0 / 9.0]);
        assert_eq!(scaled_from_unscaled([0.0; 3], 2.0).unwrap(), [0.0; 3]);
        assert!(scaled_from_unscaled([1.0; 3], 0.0).is_err());
        let back = unscaled_from_scaled(scaled_from_unscaled([0.3, -0.1, 0.7], 3.9).unwrap(), 3.9).unwrap();
        for (a, b) in back.iter().zip([0.3, -0.1, 0.7]) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn scaled_field_is_the_rescaled_cubic() {
        // dX/dτ-field at scaled(state) equals the scaled unscaled field, with d/dτ = (1/3) d/dt.
        let p = 4.2;
        let sys = logistic3(p);
        let cubic = to_scaled(p).unwrap();
        let st = [0.4, 0.3, -0.8];
        let f_unscaled = sys.vector_field(&st).unwrap();
        let lhs = cubic.vector_field(scaled_from_unscaled(st, p).unwrap());
        let s = 2.0 * p / 9.0;
        let rhs = [s * f_unscaled[0] / 3.0, s * f_unscaled[1] / 9.0, s * f_unscaled[2] / 27.0];
        for (a, b) in lhs.iter().zip(rhs) {
            assert!((a - b).abs() < 1e-13, "{a} vs {b}");
        }
    }

    proptest! {
        #[test]
        // From N = 7 on, N! times one rounding of f(x*) already exceeds 1e-12.
        fn equilibria_are_fixed_points(p in 0.5f64..5.0, n in 1usize..=6) {
            let s = truncate(MapSpec::logistic(p), n).unwrap();
            for x in MapSpec::logistic(p).fixed_points().unwrap() {
                let mut st = vec![0.0; n];
                st[0] = x;
                let out = s.vector_field(&st).unwrap();
                prop_assert!(out.iter().all(|v| v.abs() < 1e-12));
            }
        }

        #[test]
        fn linearization_is_first_order_accurate(
            p in 0.5f64..5.0, n in 1usize..7, x_star in -0.5f64..1.5,
            dir in prop::collection::vec(-1.0f64..1.0, 7),
        ) {
            let s = truncate(MapSpec::logistic(p), n).unwrap();
            let ls = s.linearize(x_star).unwrap();
            let residual = |eps: f64| {
                let delta: Vec<f64> = dir[..n].iter().map(|d| eps * d).collect();
                let mut st = delta.clone();
                st[0] += x_star;
                let full = s.vector_field(&st).unwrap();
                let lin = &ls.companion * DVector::from_vec(delta) + &ls.inhomogeneous;
                full.iter().zip(lin.iter()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
            };
            // Quadratic remainder: halving the step quarters the residual.
            let (r1, r2) = (residual(1e-3), residual(5e-4));
            if r1 > 1e-9 {
                let ratio = r1 / r2;
                prop_assert!((3.5..4.5).contains(&ratio), "ratio {}", ratio);
            }
        }

        #[test]
        fn tangent_matches_finite_difference(
            p in 0.5f64..5.0, n in 1usize..6,
            st in prop::collection::vec(-1.0f64..1.0, 6),
            v in prop::collection::vec(-1.0f64..1.0, 6),
        ) {
            let s = truncate(MapSpec::logistic(p), n).unwrap();
            let h = 1e-6;
            let plus: Vec<f64> = (0..n).map(|k| st[k] + h * v[k]).collect();
            let minus: Vec<f64> = (0..n).map(|k| st[k] - h * v[k]).collect();
            let fp = s.vector_field(&plus).unwrap();
            let fm = s.vector_field(&minus).unwrap();
            let mut jv = vec![0.0; n];
            s.tangent(&st[..n], &v[..n], &mut jv);
            for k in 0..n {
                let fd = (fp[k] - fm[k]) / (2.0 * h);
                prop_assert!((fd - jv[k]).abs() < 1e-5 * (1.0 + jv[k].abs()));
            }
        }
    }
}
