//! Numerical integration, Lyapunov exponents, and attractor classification.

mod classify;
mod integrator;
mod lyapunov;

pub use classify::{
    classify, classify_detailed, AttractorClass, AttractorLabel, ClassifierThresholds,
    Classification,
};
pub use integrator::{
    integrate, integrate_with, Flow, IntegratorConfig, Method, Status, Trajectory,
    MIN_ADAPTIVE_STEP,
};
pub use lyapunov::{largest_lyapunov, largest_lyapunov_with, LyapunovSettings};

/// Autonomous first-order system `dξ/dt = F(ξ)`.
pub trait VectorField: Sync {
    fn dim(&self) -> usize;
    /// Writes `F(state)` into `out`; both slices have length [`VectorField::dim`].
    fn eval(&self, state: &[f64], out: &mut [f64]);
}

/// A vector field with an analytic Jacobian-vector product.
pub trait TangentField: VectorField {
    /// Writes `J(state) · tangent` into `out`.
    fn tangent(&self, state: &[f64], tangent: &[f64], out: &mut [f64]);
}

impl<T: VectorField + ?Sized> VectorField for &T {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn eval(&self, state: &[f64], out: &mut [f64]) {
        (**self).eval(state, out)
    }
}

impl<T: TangentField + ?Sized> TangentField for &T {
    fn tangent(&self, state: &[f64], tangent: &[f64], out: &mut [f64]) {
        (**self).tangent(state, tangent, out)
    }
}
