//! Largest Lyapunov exponent by tangent-vector renormalization (Benettin).

use serde::{Deserialize, Serialize};

use super::integrator::{exceeds, IntegratorConfig, StepResult, Stepper};
use super::{TangentField, VectorField};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LyapunovSettings {
    pub t_transient: f64,
    pub t_measure: f64,
    /// Time between tangent renormalizations.
    pub renorm_interval: f64,
}

impl Default for LyapunovSettings {
    fn default() -> Self {
        LyapunovSettings {
            t_transient: 500.0,
            t_measure: 2000.0,
            renorm_interval: 1.0,
        }
    }
}

/// State and tangent integrated together: `(F(x), J(x) v)`.
struct WithTangent<'a, F: ?Sized> {
    inner: &'a F,
    n: usize,
}

impl<F: TangentField + ?Sized> VectorField for WithTangent<'_, F> {
    fn dim(&self) -> usize {
        2 * self.n
    }

    #[inline]
    fn eval(&self, s: &[f64], out: &mut [f64]) {
        let (x, v) = s.split_at(self.n);
        let (fx, jv) = out.split_at_mut(self.n);
        self.inner.eval(x, fx);
        self.inner.tangent(x, v, jv);
    }
}

/// Largest Lyapunov exponent in nats per unit time, renormalizing every unit of time.
pub fn largest_lyapunov<F: TangentField + ?Sized>(
    field: &F,
    x0: &[f64],
    cfg: &IntegratorConfig,
    t_transient: f64,
    t_measure: f64,
) -> Result<f64> {
    largest_lyapunov_with(
        field,
        x0,
        cfg,
        &LyapunovSettings {
            t_transient,
            t_measure,
            renorm_interval: 1.0,
        },
    )
}

/// Benettin estimate with explicit settings.
///
/// The transient is integrated without the tangent. Divergence past
/// `cfg.divergence_bound` at any point returns [`Error::Diverged`] with the
/// time measured from the start of the run.
pub fn largest_lyapunov_with<F: TangentField + ?Sized>(
    field: &F,
    x0: &[f64],
    cfg: &IntegratorConfig,
    settings: &LyapunovSettings,
) -> Result<f64> {
    cfg.validate()?;
    let n = field.dim();
    if x0.len() != n || x0.iter().any(|v| !v.is_finite()) {
        return Err(Error::domain("initial state must be finite with the system dimension"));
    }
    if !(settings.t_measure > 0.0) || !(settings.renorm_interval > 0.0) || !(settings.t_transient >= 0.0) {
        return Err(Error::domain("lyapunov times must be positive"));
    }

    let mut x = x0.to_vec();
    if settings.t_transient > 0.0 {
        let mut stepper = Stepper::new(field, x0, 0.0, cfg.method);
        while stepper.t < settings.t_transient {
            let res = stepper.step(settings.t_transient);
            if res == StepResult::Underflow || exceeds(&stepper.x, cfg.divergence_bound) {
                return Err(Error::Diverged { at_time: stepper.t });
            }
        }
        x = stepper.x;
    }

    let augmented = WithTangent { inner: field, n };
    let mut s0 = x;
    let unit = 1.0 / (n as f64).sqrt();
    s0.extend(std::iter::repeat_n(unit, n));
    let mut stepper = Stepper::new(&augmented, &s0, 0.0, cfg.method);

    let mut log_sum = 0.0;
    let segments = (settings.t_measure / settings.renorm_interval).ceil() as usize;
    let mut buf = vec![0.0; 2 * n];
    for k in 1..=segments {
        let t_seg = (k as f64 * settings.renorm_interval).min(settings.t_measure);
        while stepper.t < t_seg {
            let res = stepper.step(t_seg);
            if res == StepResult::Underflow || exceeds(&stepper.x[..n], cfg.divergence_bound) {
                return Err(Error::Diverged {
                    at_time: settings.t_transient + stepper.t,
                });
            }
        }
        let norm = stepper.x[n..].iter().map(|v| v * v).sum::<f64>().sqrt();
        if !(norm > 0.0) || !norm.is_finite() {
            return Err(Error::numeric("tangent vector degenerated", vec![norm]));
        }
        log_sum += norm.ln();
        buf.copy_from_slice(&stepper.x);
        for v in &mut buf[n..] {
            *v /= norm;
        }
        stepper.set_state(&buf);
    }
    Ok(log_sum / settings.t_measure)
}
