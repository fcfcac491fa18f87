//! Attractor classification from the maxima of the first state component.

use std::collections::VecDeque;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::integrator::{integrate_with, Flow, IntegratorConfig, Status};
use super::lyapunov::{largest_lyapunov_with, LyapunovSettings};
use super::TangentField;
use crate::error::{Error, Result};

/// Number of most recent raw maxima kept with a classification.
pub const RECENT_PEAKS: usize = 64;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassifierThresholds {
    pub t_transient: f64,
    /// Length of the observation window, and of the Lyapunov run when one is needed.
    pub t_measure: f64,
    pub renorm_interval: f64,
    /// Relative tolerance for grouping peak values.
    pub peak_tol: f64,
    /// Max-norm of the vector field below which the window counts as at rest.
    pub fp_tol: f64,
    pub chaos_tol: f64,
    pub max_period: usize,
    pub min_maxima: usize,
}

impl Default for ClassifierThresholds {
    fn default() -> Self {
        ClassifierThresholds {
            t_transient: 500.0,
            t_measure: 2000.0,
            renorm_interval: 1.0,
            peak_tol: 1e-3,
            fp_tol: 1e-6,
            chaos_tol: 5e-3,
            max_period: 16,
            min_maxima: 8,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum AttractorLabel {
    FixedPoint,
    /// `k` maxima of the first component per cycle.
    Periodic(usize),
    Chaotic,
    Unstable,
}

impl AttractorLabel {
    /// Integer class code used in raster CSV output.
    pub fn code(&self) -> u8 {
        match self {
            AttractorLabel::FixedPoint => 0,
            AttractorLabel::Periodic(_) => 1,
            AttractorLabel::Chaotic => 2,
            AttractorLabel::Unstable => 3,
        }
    }

    pub fn period(&self) -> Option<usize> {
        match self {
            AttractorLabel::Periodic(k) => Some(*k),
            _ => None,
        }
    }

    pub fn from_code(code: u8, period: Option<usize>) -> Option<Self> {
        match (code, period) {
            (0, _) => Some(AttractorLabel::FixedPoint),
            (1, Some(k)) if k >= 1 => Some(AttractorLabel::Periodic(k)),
            (2, _) => Some(AttractorLabel::Chaotic),
            (3, _) => Some(AttractorLabel::Unstable),
            _ => None,
        }
    }
}

impl fmt::Display for AttractorLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AttractorLabel::FixedPoint => write!(f, "fixed-point"),
            AttractorLabel::Periodic(k) => write!(f, "periodic({k})"),
            AttractorLabel::Chaotic => write!(f, "chaotic"),
            AttractorLabel::Unstable => write!(f, "unstable"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AttractorClass {
    pub label: AttractorLabel,
    pub lyapunov: Option<f64>,
    /// Cluster centres for fixed points and cycles; recent raw maxima otherwise.
    pub peak_values: Vec<f64>,
    pub escape_time: Option<f64>,
}

/// A classification together with what a continuation run needs next.
#[derive(Clone, Debug, PartialEq)]
pub struct Classification {
    pub class: AttractorClass,
    pub final_state: Vec<f64>,
    /// Up to [`RECENT_PEAKS`] most recent maxima, oldest first.
    pub recent_peaks: Vec<f64>,
}

pub fn classify<F: TangentField + ?Sized>(
    field: &F,
    x0: &[f64],
    cfg: &IntegratorConfig,
    thresholds: &ClassifierThresholds,
) -> Result<AttractorClass> {
    classify_detailed(field, x0, cfg, thresholds).map(|c| c.class)
}

struct WindowStats {
    peaks: Vec<f64>,
    max_speed: f64,
    // Oscillation range of the first component in each half of the window.
    first_half: (f64, f64),
    second_half: (f64, f64),
}

/// Classifies the attractor reached from `x0`.
///
/// The run covers `t_transient + t_measure`; `cfg.t_end` is ignored. Maxima
/// of the first component in the window are located by quadratic interpolation
/// through consecutive samples.
pub fn classify_detailed<F: TangentField + ?Sized>(
    field: &F,
    x0: &[f64],
    cfg: &IntegratorConfig,
    th: &ClassifierThresholds,
) -> Result<Classification> {
    if !(th.t_measure > 0.0) || !(th.t_transient >= 0.0) || th.max_period == 0 {
        return Err(Error::domain("classifier window and max_period must be positive"));
    }
    let window_start = th.t_transient;
    let midpoint = th.t_transient + 0.5 * th.t_measure;
    let run = IntegratorConfig {
        t_end: th.t_transient + th.t_measure,
        ..*cfg
    };

    let mut stats = WindowStats {
        peaks: Vec::new(),
        max_speed: 0.0,
        first_half: (f64::INFINITY, f64::NEG_INFINITY),
        second_half: (f64::INFINITY, f64::NEG_INFINITY),
    };
    let mut last3: VecDeque<f64> = VecDeque::with_capacity(3);
    let mut speed = vec![0.0; field.dim()];
    let (status, final_state) = integrate_with(field, x0, &run, |t, x| {
        if last3.len() == 3 {
            last3.pop_front();
        }
        last3.push_back(x[0]);
        if t < window_start {
            return Flow::Continue;
        }
        field.eval(x, &mut speed);
        let s = speed.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        stats.max_speed = stats.max_speed.max(s);
        let half = if t < midpoint { &mut stats.first_half } else { &mut stats.second_half };
        half.0 = half.0.min(x[0]);
        half.1 = half.1.max(x[0]);
        if last3.len() == 3 {
            let (y0, y1, y2) = (last3[0], last3[1], last3[2]);
            if y1 > y0 && y1 >= y2 {
                let curvature = y0 - 2.0 * y1 + y2;
                let peak = if curvature < 0.0 {
                    let d = 0.5 * (y0 - y2) / curvature;
                    y1 - 0.25 * (y0 - y2) * d
                } else {
                    y1
                };
                stats.peaks.push(peak);
            }
        }
        Flow::Continue
    })?;

    let recent = |peaks: &[f64]| peaks[peaks.len().saturating_sub(RECENT_PEAKS)..].to_vec();
    let escape = match status {
        Status::Diverged(t) | Status::StepFailure(t) => Some(t),
        Status::Completed => None,
    };
    if let Some(t) = escape {
        return Ok(Classification {
            class: AttractorClass {
                label: AttractorLabel::Unstable,
                lyapunov: None,
                peak_values: Vec::new(),
                escape_time: Some(t),
            },
            final_state,
            recent_peaks: recent(&stats.peaks),
        });
    }

    let fixed_point = |final_state: Vec<f64>, lyapunov: Option<f64>, peaks: &[f64]| Classification {
        class: AttractorClass {
            label: AttractorLabel::FixedPoint,
            lyapunov,
            peak_values: vec![final_state[0]],
            escape_time: None,
        },
        recent_peaks: recent(peaks),
        final_state,
    };

    if stats.max_speed < th.fp_tol {
        return Ok(fixed_point(final_state, None, &stats.peaks));
    }
    if stats.peaks.len() < th.min_maxima {
        return Err(Error::InconclusiveWindow {
            maxima: stats.peaks.len(),
            required: th.min_maxima,
        });
    }

    let scale = stats.peaks.iter().fold(0.0f64, |m, p| m.max(p.abs())).max(1e-12);
    let tol = th.peak_tol * scale;
    let (labels, centres) = cluster(&stats.peaks, tol);
    let k = centres.len();
    let range = |h: (f64, f64)| h.1 - h.0;
    let settling = range(stats.second_half) < 0.9 * range(stats.first_half);
    // Gap clustering chains a dense band of peaks into one cluster; a periodic
    // orbit's clusters are also narrow.
    let narrow = max_spread(&stats.peaks, &labels, k) <= tol;
    if !settling && narrow && k <= th.max_period && is_cyclic(&labels, k) {
        return Ok(Classification {
            class: AttractorClass {
                label: AttractorLabel::Periodic(k),
                lyapunov: None,
                peak_values: centres,
                escape_time: None,
            },
            recent_peaks: recent(&stats.peaks),
            final_state,
        });
    }

    let settings = LyapunovSettings {
        t_transient: 0.0,
        t_measure: th.t_measure,
        renorm_interval: th.renorm_interval,
    };
    let exponent = match largest_lyapunov_with(field, &final_state, cfg, &settings) {
        Ok(l) => l,
        Err(Error::Diverged { at_time }) => {
            return Ok(Classification {
                class: AttractorClass {
                    label: AttractorLabel::Unstable,
                    lyapunov: None,
                    peak_values: Vec::new(),
                    escape_time: Some(run.t_end + at_time),
                },
                recent_peaks: recent(&stats.peaks),
                final_state,
            })
        }
        Err(e) => return Err(e),
    };

    let class = if exponent > th.chaos_tol {
        AttractorClass {
            label: AttractorLabel::Chaotic,
            lyapunov: Some(exponent),
            peak_values: recent(&stats.peaks),
            escape_time: None,
        }
    } else if exponent < -th.chaos_tol {
        return Ok(fixed_point(final_state, Some(exponent), &stats.peaks));
    } else {
        let k = best_period(&stats.peaks, th.max_period, tol);
        let (_, centres) = cluster(&stats.peaks[stats.peaks.len().saturating_sub(4 * k)..], tol);
        AttractorClass {
            label: AttractorLabel::Periodic(k),
            lyapunov: Some(exponent),
            peak_values: centres,
            escape_time: None,
        }
    };
    Ok(Classification {
        class,
        recent_peaks: recent(&stats.peaks),
        final_state,
    })
}

/// Groups sorted values whose neighbours are within `tol`; returns each input's
/// cluster index and the cluster means (ascending).
fn cluster(values: &[f64], tol: f64) -> (Vec<usize>, Vec<f64>) {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut labels = vec![0; values.len()];
    let mut centres: Vec<f64> = Vec::new();
    let mut sum = 0.0;
    let mut count = 0usize;
    let mut prev: Option<f64> = None;
    for &i in &order {
        let v = values[i];
        if let Some(p) = prev {
            if v - p > tol {
                centres.push(sum / count as f64);
                sum = 0.0;
                count = 0;
            }
        }
        labels[i] = centres.len();
        sum += v;
        count += 1;
        prev = Some(v);
    }
    if count > 0 {
        centres.push(sum / count as f64);
    }
    (labels, centres)
}

/// Widest cluster, max - min.
fn max_spread(values: &[f64], labels: &[usize], k: usize) -> f64 {
    let mut lo = vec![f64::INFINITY; k];
    let mut hi = vec![f64::NEG_INFINITY; k];
    for (&v, &l) in values.iter().zip(labels) {
        lo[l] = lo[l].min(v);
        hi[l] = hi[l].max(v);
    }
    lo.iter().zip(&hi).map(|(a, b)| b - a).fold(0.0, f64::max)
}

/// The cluster sequence repeats with period `k` and shows at least two full cycles.
fn is_cyclic(labels: &[usize], k: usize) -> bool {
    labels.len() >= 2 * k && labels.iter().zip(&labels[k..]).all(|(a, b)| a == b)
}

/// Smallest shift whose peak-to-peak mismatch is within `tol` of the best shift.
fn best_period(peaks: &[f64], max_period: usize, tol: f64) -> usize {
    let mismatch = |k: usize| {
        let pairs = peaks.len().saturating_sub(k);
        if pairs == 0 {
            return f64::INFINITY;
        }
        peaks.iter().zip(&peaks[k..]).map(|(a, b)| (a - b).abs()).sum::<f64>() / pairs as f64
    };
    let scores: Vec<f64> = (1..=max_period).map(mismatch).collect();
    let best = scores.iter().copied().fold(f64::INFINITY, f64::min);
    scores
        .iter()
        .position(|&s| s <= best + tol)
        .map_or(1, |i| i + 1)
}
