use serde::{Deserialize, Serialize};

use super::VectorField;
use crate::error::{Error, Result};

/// Smallest adaptive step before the integrator gives up.
pub const MIN_ADAPTIVE_STEP: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Method {
    /// Classical fourth-order Runge-Kutta with fixed step `h`.
    Rk4Fixed { h: f64 },
    /// Dormand-Prince 5(4) with PI step-size control.
    Rk45Adaptive { rel_tol: f64, abs_tol: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct IntegratorConfig {
    pub method: Method,
    pub t_end: f64,
    /// A run stops as `Diverged` once any |state component| exceeds this.
    pub divergence_bound: f64,
    /// Output spacing; samples are taken at integer multiples of this.
    pub sample_stride: f64,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        IntegratorConfig {
            method: Method::Rk4Fixed { h: 1e-2 },
            t_end: 100.0,
            divergence_bound: 1e8,
            sample_stride: 2e-2,
        }
    }
}

impl IntegratorConfig {
    pub fn adaptive(rel_tol: f64, abs_tol: f64) -> Self {
        IntegratorConfig {
            method: Method::Rk45Adaptive { rel_tol, abs_tol },
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = match self.method {
            Method::Rk4Fixed { h } => h > 0.0 && h.is_finite(),
            Method::Rk45Adaptive { rel_tol, abs_tol } => rel_tol > 0.0 && abs_tol > 0.0,
        };
        if !ok {
            return Err(Error::domain("integrator step size and tolerances must be positive"));
        }
        if !(self.divergence_bound > 0.0) {
            return Err(Error::domain("divergence_bound must be positive"));
        }
        if !(self.sample_stride > 0.0) || !self.sample_stride.is_finite() {
            return Err(Error::domain("sample_stride must be positive"));
        }
        if !(self.t_end >= 0.0) || !self.t_end.is_finite() {
            return Err(Error::domain("t_end must be finite and non-negative"));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", content = "at_time", rename_all = "snake_case")]
pub enum Status {
    Completed,
    Diverged(f64),
    StepFailure(f64),
}

/// Sampled solution `ξ(t)`, one row per sample.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<Vec<f64>>,
    pub status: Status,
}

impl Trajectory {
    pub fn last_state(&self) -> Option<&[f64]> {
        self.states.last().map(Vec::as_slice)
    }
}

/// Result of a single step attempt sequence.
#[derive(Clone, Copy, Debug, PartialEq)]
pub(crate) enum StepResult {
    Ok,
    Underflow,
}

// Dormand-Prince 5(4) tableau.
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;
// Dense output (fourth order).
const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

/// Single-trajectory stepping engine with dense output over the last step.
///
/// The derivative at the current point is cached (first-same-as-last), so a
/// caller that edits the state must go through [`Stepper::set_state`].
pub(crate) struct Stepper<'a, F: VectorField + ?Sized> {
    field: &'a F,
    method: Method,
    pub t: f64,
    pub x: Vec<f64>,
    fx: Vec<f64>,
    // Previous point and dense-output data for the last accepted step.
    t_prev: f64,
    x_prev: Vec<f64>,
    f_prev: Vec<f64>,
    h_last: f64,
    rcont: [Vec<f64>; 5],
    // Adaptive state.
    h: f64,
    err_old: f64,
    k: [Vec<f64>; 6],
    tmp: Vec<f64>,
    // Fixed-step time grid: t = grid_origin + grid_steps * h.
    grid_origin: f64,
    grid_steps: u64,
}

impl<'a, F: VectorField + ?Sized> Stepper<'a, F> {
    pub fn new(field: &'a F, x0: &[f64], t0: f64, method: Method) -> Self {
        let n = field.dim();
        let mut fx = vec![0.0; n];
        field.eval(x0, &mut fx);
        let h = match method {
            Method::Rk4Fixed { h } => h,
            Method::Rk45Adaptive { .. } => 0.0,
        };
        let z = || vec![0.0; n];
        Stepper {
            field,
            method,
            t: t0,
            x: x0.to_vec(),
            fx,
            t_prev: t0,
            x_prev: x0.to_vec(),
            f_prev: z(),
            h_last: 0.0,
            rcont: [z(), z(), z(), z(), z()],
            h,
            err_old: 1e-4,
            k: [z(), z(), z(), z(), z(), z()],
            tmp: z(),
            grid_origin: t0,
            grid_steps: 0,
        }
    }

    pub fn set_state(&mut self, x: &[f64]) {
        self.x.copy_from_slice(x);
        self.field.eval(&self.x, &mut self.fx);
    }

    /// Advances by one accepted step without passing `t_max`.
    pub fn step(&mut self, t_max: f64) -> StepResult {
        let remaining = t_max - self.t;
        self.t_prev = self.t;
        self.x_prev.copy_from_slice(&self.x);
        self.f_prev.copy_from_slice(&self.fx);
        match self.method {
            Method::Rk4Fixed { h } => {
                // Land exactly on t_max when within a hair of it.
                if remaining <= h * (1.0 + 1e-9) {
                    self.rk4(remaining);
                    self.h_last = remaining;
                    self.t = t_max;
                    self.grid_origin = t_max;
                    self.grid_steps = 0;
                } else {
                    self.rk4(h);
                    self.h_last = h;
                    // Counting steps keeps long runs on the exact time grid.
                    self.grid_steps += 1;
                    self.t = self.grid_origin + self.grid_steps as f64 * h;
                }
                StepResult::Ok
            }
            Method::Rk45Adaptive { rel_tol, abs_tol } => {
                self.dopri_step(remaining, t_max, rel_tol, abs_tol)
            }
        }
    }

    fn rk4(&mut self, h: f64) {
        let n = self.x.len();
        let [k2, k3, k4, ..] = &mut self.k;
        let tmp = &mut self.tmp;
        let x = &self.x;
        let k1 = &self.fx;
        for i in 0..n {
            tmp[i] = x[i] + 0.5 * h * k1[i];
        }
        self.field.eval(tmp, k2);
        for i in 0..n {
            tmp[i] = x[i] + 0.5 * h * k2[i];
        }
        self.field.eval(tmp, k3);
        for i in 0..n {
            tmp[i] = x[i] + h * k3[i];
        }
        self.field.eval(tmp, k4);
        for i in 0..n {
            self.x[i] += h / 6.0 * (k1[i] + 2.0 * (k2[i] + k3[i]) + k4[i]);
        }
        self.field.eval(&self.x, &mut self.fx);
    }

    fn initial_step(&mut self, remaining: f64, rel_tol: f64, abs_tol: f64) -> f64 {
        let n = self.x.len();
        let sc: Vec<f64> = self.x.iter().map(|v| abs_tol + rel_tol * v.abs()).collect();
        let rms = |v: &[f64]| {
            (v.iter().zip(&sc).map(|(a, s)| (a / s).powi(2)).sum::<f64>() / n as f64).sqrt()
        };
        let d0 = rms(&self.x);
        let d1 = rms(&self.fx);
        let mut h0 = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
        h0 = h0.min(remaining);
        for i in 0..n {
            self.tmp[i] = self.x[i] + h0 * self.fx[i];
        }
        let mut f1 = vec![0.0; n];
        self.field.eval(&self.tmp, &mut f1);
        let diff: Vec<f64> = f1.iter().zip(&self.fx).map(|(a, b)| a - b).collect();
        let d2 = rms(&diff) / h0;
        let h1 = if d1.max(d2) <= 1e-15 {
            (h0 * 1e-3).max(1e-6)
        } else {
            (0.01 / d1.max(d2)).powf(0.2)
        };
        (100.0 * h0).min(h1).min(remaining)
    }

    fn dopri_step(&mut self, remaining: f64, t_max: f64, rel_tol: f64, abs_tol: f64) -> StepResult {
        const SAFE: f64 = 0.9;
        const BETA: f64 = 0.04;
        const EXPO1: f64 = 0.2 - BETA * 0.75;
        const FAC_MIN: f64 = 0.2;
        const FAC_MAX: f64 = 10.0;
        let n = self.x.len();
        if self.h <= 0.0 {
            self.h = self.initial_step(remaining, rel_tol, abs_tol);
        }
        let mut h = self.h.min(remaining);
        loop {
            if h < MIN_ADAPTIVE_STEP && h < remaining {
                return StepResult::Underflow;
            }
            let x = &self.x;
            let k1 = &self.fx;
            let [k2, k3, k4, k5, k6, k7] = &mut self.k;
            let tmp = &mut self.tmp;
            for i in 0..n {
                tmp[i] = x[i] + h * A21 * k1[i];
            }
            self.field.eval(tmp, k2);
            for i in 0..n {
                tmp[i] = x[i] + h * (A31 * k1[i] + A32 * k2[i]);
            }
            self.field.eval(tmp, k3);
            for i in 0..n {
                tmp[i] = x[i] + h * (A41 * k1[i] + A42 * k2[i] + A43 * k3[i]);
            }
            self.field.eval(tmp, k4);
            for i in 0..n {
                tmp[i] = x[i] + h * (A51 * k1[i] + A52 * k2[i] + A53 * k3[i] + A54 * k4[i]);
            }
            self.field.eval(tmp, k5);
            for i in 0..n {
                tmp[i] = x[i]
                    + h * (A61 * k1[i] + A62 * k2[i] + A63 * k3[i] + A64 * k4[i] + A65 * k5[i]);
            }
            self.field.eval(tmp, k6);
            // 5th-order solution (stored in tmp) and its derivative k7.
            for i in 0..n {
                tmp[i] = x[i]
                    + h * (A71 * k1[i] + A73 * k3[i] + A74 * k4[i] + A75 * k5[i] + A76 * k6[i]);
            }
            self.field.eval(tmp, k7);
            let mut err = 0.0;
            for i in 0..n {
                let e = h
                    * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i]
                        + E7 * k7[i]);
                let sc = abs_tol + rel_tol * x[i].abs().max(tmp[i].abs());
                err += (e / sc).powi(2);
            }
            let err = (err / n as f64).sqrt();
            if !err.is_finite() {
                h *= FAC_MIN;
                continue;
            }
            let fac11 = err.powf(EXPO1);
            if err <= 1.0 {
                let fac = (fac11 / self.err_old.powf(BETA) / SAFE).clamp(1.0 / FAC_MAX, 1.0 / FAC_MIN);
                self.err_old = err.max(1e-4);
                // Dense output coefficients.
                for i in 0..n {
                    let ydiff = tmp[i] - x[i];
                    let bspl = h * k1[i] - ydiff;
                    self.rcont[0][i] = x[i];
                    self.rcont[1][i] = ydiff;
                    self.rcont[2][i] = bspl;
                    self.rcont[3][i] = ydiff - h * k7[i] - bspl;
                    self.rcont[4][i] = h
                        * (D1 * k1[i] + D3 * k3[i] + D4 * k4[i] + D5 * k5[i] + D6 * k6[i]
                            + D7 * k7[i]);
                }
                let last = h >= remaining;
                self.x.copy_from_slice(tmp);
                self.fx.copy_from_slice(k7);
                self.h_last = h;
                self.t = if last { t_max } else { self.t_prev + h };
                self.h = h / fac;
                return StepResult::Ok;
            }
            h /= (fac11 / SAFE).min(1.0 / FAC_MIN);
        }
    }

    /// State at `t` in `[t_prev, t]` of the last accepted step.
    pub fn interpolate(&self, t: f64, out: &mut [f64]) {
        let h = self.h_last;
        if h == 0.0 {
            out.copy_from_slice(&self.x);
            return;
        }
        let theta = (t - self.t_prev) / h;
        match self.method {
            Method::Rk4Fixed { .. } => {
                // Cubic Hermite through both endpoint values and slopes.
                let t2 = theta * theta;
                let t3 = t2 * theta;
                let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
                let h10 = t3 - 2.0 * t2 + theta;
                let h01 = -2.0 * t3 + 3.0 * t2;
                let h11 = t3 - t2;
                for i in 0..out.len() {
                    out[i] = h00 * self.x_prev[i]
                        + h10 * h * self.f_prev[i]
                        + h01 * self.x[i]
                        + h11 * h * self.fx[i];
                }
            }
            Method::Rk45Adaptive { .. } => {
                let theta1 = 1.0 - theta;
                let r = &self.rcont;
                for i in 0..out.len() {
                    out[i] = r[0][i]
                        + theta * (r[1][i] + theta1 * (r[2][i] + theta * (r[3][i] + theta1 * r[4][i])));
                }
            }
        }
    }
}

pub(crate) fn exceeds(x: &[f64], bound: f64) -> bool {
    x.iter().any(|v| !(v.abs() <= bound))
}

/// What the sample observer wants next.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Flow {
    Continue,
    Stop,
}

/// Integrates from `t = 0` to `cfg.t_end`, handing each sample `(t, ξ)` to `observer`.
///
/// Samples are taken at `k * sample_stride` (including `t = 0` and, if it is
/// not on the grid, `t_end`) by dense interpolation inside each step.
/// Returns the termination status and the final state.
pub fn integrate_with<F, O>(
    field: &F,
    x0: &[f64],
    cfg: &IntegratorConfig,
    mut observer: O,
) -> Result<(Status, Vec<f64>)>
where
    F: VectorField + ?Sized,
    O: FnMut(f64, &[f64]) -> Flow,
{
    cfg.validate()?;
    if x0.len() != field.dim() {
        return Err(Error::domain(format!(
            "initial state has {} components, system dimension is {}",
            x0.len(),
            field.dim()
        )));
    }
    if x0.iter().any(|v| !v.is_finite()) {
        return Err(Error::domain("initial state must be finite"));
    }
    if exceeds(x0, cfg.divergence_bound) {
        return Ok((Status::Diverged(0.0), x0.to_vec()));
    }
    let mut stepper = Stepper::new(field, x0, 0.0, cfg.method);
    if observer(0.0, x0) == Flow::Stop {
        return Ok((Status::Completed, x0.to_vec()));
    }
    let mut next_sample = 1u64;
    let mut buf = vec![0.0; x0.len()];
    while stepper.t < cfg.t_end {
        if stepper.step(cfg.t_end) == StepResult::Underflow {
            return Ok((Status::StepFailure(stepper.t), stepper.x));
        }
        if exceeds(&stepper.x, cfg.divergence_bound) {
            return Ok((Status::Diverged(stepper.t), stepper.x));
        }
        loop {
            let ts = next_sample as f64 * cfg.sample_stride;
            if ts > stepper.t * (1.0 + 1e-12) || ts > cfg.t_end * (1.0 + 1e-12) {
                break;
            }
            let flow = if (ts - stepper.t).abs() <= 1e-9 * cfg.sample_stride {
                observer(ts, &stepper.x)
            } else {
                stepper.interpolate(ts, &mut buf);
                observer(ts, &buf)
            };
            next_sample += 1;
            if flow == Flow::Stop {
                return Ok((Status::Completed, stepper.x));
            }
        }
    }
    // Final point when t_end is off the sample grid.
    let last_grid = (next_sample - 1) as f64 * cfg.sample_stride;
    if cfg.t_end - last_grid > 1e-9 * cfg.sample_stride {
        observer(cfg.t_end, &stepper.x);
    }
    Ok((Status::Completed, stepper.x))
}

/// Integrates and records every sample.
pub fn integrate<F: VectorField + ?Sized>(
    field: &F,
    x0: &[f64],
    cfg: &IntegratorConfig,
) -> Result<Trajectory> {
    let mut times = Vec::new();
    let mut states = Vec::new();
    let (status, last) = integrate_with(field, x0, cfg, |t, x| {
        times.push(t);
        states.push(x.to_vec());
        Flow::Continue
    })?;
    if !matches!(status, Status::Completed) {
        // Record the state at the point of failure.
        let t_fail = match status {
            Status::Diverged(t) | Status::StepFailure(t) => t,
            Status::Completed => unreachable!(),
        };
        if times.last().is_none_or(|&t| t_fail > t) {
            times.push(t_fail);
            states.push(last);
        }
    }
    Ok(Trajectory {
        times,
        states,
        status,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    /// x'' = -x, state (x, x').
    struct Oscillator;
    impl VectorField for Oscillator {
        fn dim(&self) -> usize {
            2
        }
        fn eval(&self, s: &[f64], out: &mut [f64]) {
            out[0] = s[1];
            out[1] = -s[0];
        }
    }

    /// x' = x²: blows up at t = 1/x0.
    struct Blowup;
    impl VectorField for Blowup {
        fn dim(&self) -> usize {
            1
        }
        fn eval(&self, s: &[f64], out: &mut [f64]) {
            out[0] = s[0] * s[0];
        }
    }

    fn endpoint_error(h: f64) -> f64 {
        let cfg = IntegratorConfig {
            method: Method::Rk4Fixed { h },
            t_end: 2.0,
            sample_stride: 2.0,
            ..Default::default()
        };
        let tr = integrate(&Oscillator, &[1.0, 0.0], &cfg).unwrap();
        let x = tr.last_state().unwrap();
        ((x[0] - 2f64.cos()).powi(2) + (x[1] + 2f64.sin()).powi(2)).sqrt()
    }

    #[test]
    fn rk4_is_fourth_order() {
        let ratio = endpoint_error(0.1) / endpoint_error(0.05);
        assert!((16.0 * 0.8..16.0 * 1.2).contains(&ratio), "ratio {ratio}");
    }

    #[test]
    fn adaptive_meets_tolerance() {
        let cfg = IntegratorConfig {
            t_end: 20.0,
            sample_stride: 0.1,
            ..IntegratorConfig::adaptive(1e-10, 1e-12)
        };
        let tr = integrate(&Oscillator, &[1.0, 0.0], &cfg).unwrap();
        assert_eq!(tr.status, Status::Completed);
        assert_eq!(tr.times.len(), 201);
        for (t, x) in tr.times.iter().zip(&tr.states) {
            // Dense output is fourth order; allow a little over the step tolerance.
            assert!((x[0] - t.cos()).abs() < 1e-8, "t={t}");
        }
        assert!((tr.times[200] - 20.0).abs() < 1e-12);
    }

    #[test]
    fn samples_on_grid_and_final_point() {
        let cfg = IntegratorConfig {
            method: Method::Rk4Fixed { h: 0.01 },
            t_end: 1.05,
            sample_stride: 0.25,
            ..Default::default()
        };
        let tr = integrate(&Oscillator, &[1.0, 0.0], &cfg).unwrap();
        assert_eq!(tr.times, vec![0.0, 0.25, 0.5, 0.75, 1.0, 1.05]);
        for (t, x) in tr.times.iter().zip(&tr.states) {
            assert!((x[0] - t.cos()).abs() < 1e-9);
        }
    }

    #[test]
    fn hermite_interpolation_between_steps() {
        let cfg = IntegratorConfig {
            method: Method::Rk4Fixed { h: 0.1 },
            t_end: 3.0,
            sample_stride: 0.037,
            ..Default::default()
        };
        let tr = integrate(&Oscillator, &[1.0, 0.0], &cfg).unwrap();
        for (t, x) in tr.times.iter().zip(&tr.states) {
            assert!((x[0] - t.cos()).abs() < 2e-5, "t={t}");
        }
    }

    #[test]
    fn divergence_is_reported() {
        let cfg = IntegratorConfig {
            method: Method::Rk4Fixed { h: 1e-3 },
            t_end: 5.0,
            divergence_bound: 1e6,
            sample_stride: 0.1,
        };
        let tr = integrate(&Blowup, &[1.0], &cfg).unwrap();
        match tr.status {
            Status::Diverged(t) => assert!((0.99..1.01).contains(&t), "t={t}"),
            s => panic!("expected divergence, got {s:?}"),
        }
        assert!(tr.times.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn adaptive_step_failure_near_blowup() {
        let cfg = IntegratorConfig {
            t_end: 5.0,
            divergence_bound: 1e300,
            ..IntegratorConfig::adaptive(1e-10, 1e-12)
        };
        let tr = integrate(&Blowup, &[1.0], &cfg).unwrap();
        assert!(
            matches!(tr.status, Status::StepFailure(t) | Status::Diverged(t) if (0.99..1.01).contains(&t)),
            "{:?}",
            tr.status
        );
    }

    #[test]
    fn config_validation() {
        let bad = IntegratorConfig {
            method: Method::Rk4Fixed { h: 0.0 },
            ..Default::default()
        };
        assert!(integrate(&Oscillator, &[1.0, 0.0], &bad).is_err());
        let bad = IntegratorConfig {
            divergence_bound: -1.0,
            ..Default::default()
        };
        assert!(integrate(&Oscillator, &[1.0, 0.0], &bad).is_err());
        assert!(integrate(&Oscillator, &[1.0], &IntegratorConfig::default()).is_err());
    }

    #[test]
    fn observer_can_stop_early() {
        let mut seen = 0;
        let (status, _) = integrate_with(&Oscillator, &[1.0, 0.0], &IntegratorConfig::default(), |t, _| {
            seen += 1;
            if t >= 1.0 {
                Flow::Stop
            } else {
                Flow::Continue
            }
        })
        .unwrap();
        assert_eq!(status, Status::Completed);
        assert_eq!(seen, 51);
    }
}
