//! One-parameter bifurcation sweeps and two-parameter plane scans.
//!
//! Records are assembled in grid order regardless of how work is scheduled,
//! and all floating output is printed with 17 significant digits, so the same
//! plan always produces the same bytes.

use std::collections::BTreeMap;
use std::fmt::{self, Write as _};
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dynamics::{
    classify_detailed, largest_lyapunov_with, AttractorClass, AttractorLabel, ClassifierThresholds,
    IntegratorConfig, LyapunovSettings, TangentField,
};
use crate::embedding::{to_scaled, truncate, ScaledCubic};
use crate::error::{Error, Result};
use crate::maps::MapSpec;

/// Cap on peaks kept per record.
pub const MAX_RECORD_PEAKS: usize = 64;
/// Extra attempts, each doubling the measurement window, when too few maxima are seen.
const INCONCLUSIVE_RETRIES: usize = 2;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SystemKind {
    ScaledCubic,
    /// Order-N truncation of the logistic map, N in {3, 4}.
    TruncatedLogistic(usize),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Param {
    P,
    Nu,
    Lambda,
}

impl Param {
    pub fn name(&self) -> &'static str {
        match self {
            Param::P => "p",
            Param::Nu => "nu",
            Param::Lambda => "lambda",
        }
    }
}

impl fmt::Display for Param {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Param {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "p" => Ok(Param::P),
            "nu" => Ok(Param::Nu),
            "lambda" => Ok(Param::Lambda),
            _ => Err(Error::domain(format!("unknown parameter `{s}`; expected p, nu or lambda"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Axis {
    pub param: Param,
    pub lo: f64,
    pub hi: f64,
    /// Number of grid points, endpoints included.
    pub steps: usize,
}

impl Axis {
    pub fn new(param: Param, lo: f64, hi: f64, steps: usize) -> Self {
        Axis { param, lo, hi, steps }
    }

    pub fn value(&self, k: usize) -> f64 {
        if k + 1 == self.steps {
            self.hi
        } else {
            self.lo + (self.hi - self.lo) * k as f64 / (self.steps - 1) as f64
        }
    }

    pub fn values(&self) -> Vec<f64> {
        (0..self.steps).map(|k| self.value(k)).collect()
    }

    fn validate(&self) -> Result<()> {
        if self.steps < 2 || !(self.lo < self.hi) || !self.lo.is_finite() || !self.hi.is_finite() {
            return Err(Error::domain(format!(
                "axis {} needs finite lo < hi and at least 2 steps",
                self.param
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum Continuation {
    /// Every point starts from the given state, or the system default.
    ColdStart(Option<Vec<f64>>),
    /// Each point starts from the previous point's final state.
    FollowAttractor,
}

/// Parameter values held fixed when they are not on an axis.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BaseParams {
    pub p: f64,
    pub nu: f64,
    pub lambda: f64,
}

impl Default for BaseParams {
    fn default() -> Self {
        BaseParams {
            p: 4.0,
            nu: 2.0 / 3.0,
            lambda: 2.0 / 3.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepPlan {
    pub system: SystemKind,
    pub axis1: Axis,
    pub axis2: Option<Axis>,
    pub continuation: Continuation,
    pub integrator: IntegratorConfig,
    pub thresholds: ClassifierThresholds,
    pub base: BaseParams,
}

impl SweepPlan {
    pub fn bifurcation(system: SystemKind, axis: Axis) -> Self {
        SweepPlan {
            system,
            axis1: axis,
            axis2: None,
            continuation: Continuation::FollowAttractor,
            integrator: IntegratorConfig::default(),
            thresholds: ClassifierThresholds::default(),
            base: BaseParams::default(),
        }
    }

    pub fn plane(system: SystemKind, axis1: Axis, axis2: Axis) -> Self {
        SweepPlan {
            system,
            axis1,
            axis2: Some(axis2),
            continuation: Continuation::ColdStart(None),
            integrator: IntegratorConfig::default(),
            thresholds: ClassifierThresholds::default(),
            base: BaseParams::default(),
        }
    }

    pub fn dim(&self) -> usize {
        match self.system {
            SystemKind::ScaledCubic => 3,
            SystemKind::TruncatedLogistic(n) => n,
        }
    }

    pub fn default_start(&self) -> Vec<f64> {
        let mut x0 = vec![0.0; self.dim()];
        x0[0] = match self.system {
            SystemKind::ScaledCubic => 0.1,
            SystemKind::TruncatedLogistic(_) => 0.3,
        };
        x0
    }

    fn cold_start(&self) -> Vec<f64> {
        match &self.continuation {
            Continuation::ColdStart(Some(x0)) => x0.clone(),
            _ => self.default_start(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.integrator.validate()?;
        if let SystemKind::TruncatedLogistic(n) = self.system {
            if !(n == 3 || n == 4) {
                return Err(Error::domain(format!("sweeps support logistic truncations of order 3 or 4, got {n}")));
            }
        }
        let axes: Vec<&Axis> = std::iter::once(&self.axis1).chain(self.axis2.as_ref()).collect();
        for a in &axes {
            a.validate()?;
            if matches!(self.system, SystemKind::TruncatedLogistic(_)) && a.param != Param::P {
                return Err(Error::domain("logistic truncations are swept in p only"));
            }
        }
        if let Some(a2) = &self.axis2 {
            if a2.param == self.axis1.param {
                return Err(Error::domain("plane axes must be different parameters"));
            }
            if a2.param == Param::P || self.axis1.param == Param::P {
                return Err(Error::domain("plane scans use the (nu, lambda) axes"));
            }
        }
        if let Continuation::ColdStart(Some(x0)) = &self.continuation {
            if x0.len() != self.dim() || x0.iter().any(|v| !v.is_finite()) {
                return Err(Error::domain(format!("cold start must be {} finite values", self.dim())));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRecord {
    pub params: BTreeMap<Param, f64>,
    pub class: AttractorClass,
    /// Most recent maxima of the first component, at most [`MAX_RECORD_PEAKS`].
    pub peaks: Vec<f64>,
    pub lyapunov: Option<f64>,
    pub escape_time: Option<f64>,
    /// Set when the point needed a fallback (longer window, Lyapunov-only label, solver error).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

/// Records of a plane scan; `records[i * axis2.steps + j]` sits at `(axis1[i], axis2[j])`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlaneGrid {
    pub axis1: Axis,
    pub axis2: Axis,
    pub records: Vec<SweepRecord>,
}

impl PlaneGrid {
    pub fn at(&self, i: usize, j: usize) -> &SweepRecord {
        &self.records[i * self.axis2.steps + j]
    }

    /// Labels as rows over `axis1`, columns over `axis2`.
    pub fn labels(&self) -> Vec<Vec<AttractorLabel>> {
        self.records
            .chunks(self.axis2.steps)
            .map(|row| row.iter().map(|r| r.class.label).collect())
            .collect()
    }
}

fn resolve(plan: &SweepPlan, params: &BTreeMap<Param, f64>) -> Result<(f64, f64, f64)> {
    let get = |k: Param, d: f64| params.get(&k).copied().unwrap_or(d);
    let p = get(Param::P, plan.base.p);
    let (mut nu, mut lambda) = (plan.base.nu, plan.base.lambda);
    if params.contains_key(&Param::P) {
        let c = to_scaled(p)?;
        nu = c.nu;
        lambda = c.lambda;
    }
    Ok((p, get(Param::Nu, nu), get(Param::Lambda, lambda)))
}

struct PointResult {
    record: SweepRecord,
    final_state: Option<Vec<f64>>,
}

fn classify_with_retries<F: TangentField>(
    field: &F,
    x0: &[f64],
    plan: &SweepPlan,
    params: BTreeMap<Param, f64>,
) -> PointResult {
    let mut th = plan.thresholds;
    let mut note = None;
    for attempt in 0..=INCONCLUSIVE_RETRIES {
        match classify_detailed(field, x0, &plan.integrator, &th) {
            Ok(c) => {
                let escaped = c.class.label == AttractorLabel::Unstable;
                let mut peaks = c.recent_peaks;
                let cut = peaks.len().saturating_sub(MAX_RECORD_PEAKS);
                peaks.drain(..cut);
                return PointResult {
                    record: SweepRecord {
                        params,
                        lyapunov: c.class.lyapunov,
                        escape_time: c.class.escape_time,
                        class: c.class,
                        peaks,
                        note,
                    },
                    final_state: (!escaped).then_some(c.final_state),
                };
            }
            Err(Error::InconclusiveWindow { maxima, .. }) if attempt < INCONCLUSIVE_RETRIES => {
                th.t_measure *= 2.0;
                note = Some(format!("window lengthened to {} after {maxima} maxima", th.t_measure));
            }
            Err(Error::InconclusiveWindow { maxima, .. }) => {
                return lyapunov_fallback(field, x0, plan, &th, params, maxima);
            }
            Err(e) => return failed(params, e),
        }
    }
    unreachable!("retry loop always returns")
}

/// Too few oscillations to group peaks: label by the sign of the exponent.
fn lyapunov_fallback<F: TangentField>(
    field: &F,
    x0: &[f64],
    plan: &SweepPlan,
    th: &ClassifierThresholds,
    params: BTreeMap<Param, f64>,
    maxima: usize,
) -> PointResult {
    let settings = LyapunovSettings {
        t_transient: th.t_transient,
        t_measure: th.t_measure,
        renorm_interval: th.renorm_interval,
    };
    let note = Some(format!("only {maxima} maxima; labelled by Lyapunov exponent"));
    match largest_lyapunov_with(field, x0, &plan.integrator, &settings) {
        Ok(l) => {
            let label = if l > th.chaos_tol {
                AttractorLabel::Chaotic
            } else {
                AttractorLabel::FixedPoint
            };
            PointResult {
                record: SweepRecord {
                    params,
                    class: AttractorClass {
                        label,
                        lyapunov: Some(l),
                        peak_values: Vec::new(),
                        escape_time: None,
                    },
                    peaks: Vec::new(),
                    lyapunov: Some(l),
                    escape_time: None,
                    note,
                },
                final_state: None,
            }
        }
        Err(Error::Diverged { at_time }) => PointResult {
            record: SweepRecord {
                params,
                class: AttractorClass {
                    label: AttractorLabel::Unstable,
                    lyapunov: None,
                    peak_values: Vec::new(),
                    escape_time: Some(at_time),
                },
                peaks: Vec::new(),
                lyapunov: None,
                escape_time: Some(at_time),
                note,
            },
            final_state: None,
        },
        Err(e) => failed(params, e),
    }
}

fn failed(params: BTreeMap<Param, f64>, e: Error) -> PointResult {
    PointResult {
        record: SweepRecord {
            params,
            class: AttractorClass {
                label: AttractorLabel::Unstable,
                lyapunov: None,
                peak_values: Vec::new(),
                escape_time: None,
            },
            peaks: Vec::new(),
            lyapunov: None,
            escape_time: None,
            note: Some(format!("failed: {e}")),
        },
        final_state: None,
    }
}

fn run_point(plan: &SweepPlan, params: BTreeMap<Param, f64>, x0: &[f64]) -> PointResult {
    let (p, nu, lambda) = match resolve(plan, &params) {
        Ok(v) => v,
        Err(e) => return failed(params, e),
    };
    match plan.system {
        SystemKind::ScaledCubic => match ScaledCubic::new(nu, lambda) {
            Ok(field) => classify_with_retries(&field, x0, plan, params),
            Err(e) => failed(params, e),
        },
        SystemKind::TruncatedLogistic(n) => match truncate(MapSpec::logistic(p), n) {
            Ok(field) => classify_with_retries(&field, x0, plan, params),
            Err(e) => failed(params, e),
        },
    }
}

/// One record per point of `axis1`, in ascending order.
///
/// Per-point failures are recorded (label `Unstable` with a note), never raised.
pub fn bifurcation_sweep(plan: &SweepPlan) -> Result<Vec<SweepRecord>> {
    plan.validate()?;
    if plan.axis2.is_some() {
        return Err(Error::domain("bifurcation sweeps take a single axis"));
    }
    let axis = plan.axis1;
    let params_at = |k: usize| BTreeMap::from([(axis.param, axis.value(k))]);
    match &plan.continuation {
        Continuation::ColdStart(_) => {
            let x0 = plan.cold_start();
            Ok((0..axis.steps)
                .into_par_iter()
                .map(|k| run_point(plan, params_at(k), &x0).record)
                .collect())
        }
        Continuation::FollowAttractor => {
            let cold = plan.default_start();
            let mut seed = cold.clone();
            let mut out = Vec::with_capacity(axis.steps);
            for k in 0..axis.steps {
                let res = run_point(plan, params_at(k), &seed);
                seed = res.final_state.unwrap_or_else(|| cold.clone());
                out.push(res.record);
            }
            Ok(out)
        }
    }
}

/// Independent cold-start classification of every `(axis1, axis2)` grid point.
pub fn plane_scan(plan: &SweepPlan) -> Result<PlaneGrid> {
    plan.validate()?;
    let axis2 = plan
        .axis2
        .ok_or_else(|| Error::domain("plane scan needs two axes"))?;
    if !matches!(plan.continuation, Continuation::ColdStart(_)) {
        return Err(Error::domain("plane scans require cold starts"));
    }
    let axis1 = plan.axis1;
    let x0 = plan.cold_start();
    // Rows are the scheduling unit: one row of points is well above the
    // dispatch overhead.
    let records = (0..axis1.steps * axis2.steps)
        .into_par_iter()
        .with_min_len(axis2.steps)
        .map(|idx| {
            let (i, j) = (idx / axis2.steps, idx % axis2.steps);
            let params = BTreeMap::from([(axis1.param, axis1.value(i)), (axis2.param, axis2.value(j))]);
            run_point(plan, params, &x0).record
        })
        .collect();
    Ok(PlaneGrid {
        axis1,
        axis2,
        records,
    })
}

/// Runs `f` on a pool of `threads` workers, or on the global pool when `None`.
pub fn with_threads<R: Send>(threads: Option<usize>, f: impl FnOnce() -> R + Send) -> Result<R> {
    match threads {
        None => Ok(f()),
        Some(0) => Err(Error::domain("thread count must be at least 1")),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map(|pool| pool.install(f))
            .map_err(|e| Error::domain(format!("cannot build thread pool: {e}"))),
    }
}

/// Fraction of cells whose four corners do not all share a label, at
/// resolutions `2^l × 2^l` for `l = 1..=levels`.
///
/// Corners are subsampled from the grid at indices `round(a (n-1) / 2^l)`.
pub fn boundary_density<T: PartialEq>(labels: &[Vec<T>], levels: usize) -> Result<Vec<f64>> {
    let rows = labels.len();
    let cols = labels.first().map_or(0, Vec::len);
    if labels.iter().any(|r| r.len() != cols) {
        return Err(Error::domain("label grid must be rectangular"));
    }
    if levels < 2 {
        return Err(Error::domain("boundary density needs at least 2 refinement levels"));
    }
    let cells = 1usize << levels;
    if rows < 2 || cols < 2 || cells > rows - 1 || cells > cols - 1 {
        return Err(Error::domain(format!(
            "a {rows}x{cols} grid is too small for {levels} refinement levels"
        )));
    }
    let pick = |a: usize, n: usize, m: usize| ((a * (n - 1)) as f64 / m as f64).round() as usize;
    Ok((1..=levels)
        .map(|l| {
            let m = 1usize << l;
            let ri: Vec<usize> = (0..=m).map(|a| pick(a, rows, m)).collect();
            let ci: Vec<usize> = (0..=m).map(|a| pick(a, cols, m)).collect();
            let mut mixed = 0usize;
            for a in 0..m {
                for b in 0..m {
                    let c = &labels[ri[a]][ci[b]];
                    if *c != labels[ri[a + 1]][ci[b]]
                        || *c != labels[ri[a]][ci[b + 1]]
                        || *c != labels[ri[a + 1]][ci[b + 1]]
                    {
                        mixed += 1;
                    }
                }
            }
            mixed as f64 / (m * m) as f64
        })
        .collect())
}

/// Mean factor by which the mixed-cell fraction shrinks per level,
/// `(f_first / f_last)^(1 / (levels - 1))`; infinite when the last level has none.
pub fn density_decay(fractions: &[f64]) -> f64 {
    let (first, last) = (fractions[0], fractions[fractions.len() - 1]);
    if last == 0.0 {
        return f64::INFINITY;
    }
    (first / last).powf(1.0 / (fractions.len() - 1) as f64)
}

/// Sub-grid `rows[r0..r0+h]`, `cols[c0..c0+w]`.
pub fn window<T: Clone>(labels: &[Vec<T>], r0: usize, c0: usize, h: usize, w: usize) -> Vec<Vec<T>> {
    labels[r0..r0 + h].iter().map(|row| row[c0..c0 + w].to_vec()).collect()
}

/// 17 significant digits, the shortest format that round-trips every f64.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

fn opt(v: Option<f64>) -> String {
    v.map(fmt_f64).unwrap_or_default()
}

/// `param,peak` with one row per retained peak.
pub fn bifurcation_csv(plan: &SweepPlan, records: &[SweepRecord]) -> String {
    let param = plan.axis1.param;
    let mut s = String::from("param,peak\n");
    for r in records {
        let x = fmt_f64(r.params[&param]);
        for pk in &r.peaks {
            let _ = writeln!(s, "{x},{}", fmt_f64(*pk));
        }
    }
    s
}

#[derive(Serialize)]
struct PointSummary<'a> {
    param: f64,
    class: &'a AttractorLabel,
    period: Option<usize>,
    lyapunov: Option<f64>,
    escape_time: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    note: &'a Option<String>,
}

/// Sidecar JSON with the per-point class, Lyapunov exponent and escape time.
pub fn bifurcation_sidecar(plan: &SweepPlan, records: &[SweepRecord]) -> String {
    let summary: Vec<PointSummary> = records
        .iter()
        .map(|r| PointSummary {
            param: r.params[&plan.axis1.param],
            class: &r.class.label,
            period: r.class.label.period(),
            lyapunov: r.lyapunov,
            escape_time: r.escape_time,
            note: &r.note,
        })
        .collect();
    serde_json::to_string_pretty(&serde_json::json!({
        "param": plan.axis1.param.name(),
        "points": summary,
    }))
    .expect("summary serializes")
}

/// `<axis1>,<axis2>,class,period,lyapunov,escape_time` in grid order; class codes
/// 0 fixed point, 1 periodic, 2 chaotic, 3 unstable.
pub fn plane_csv(grid: &PlaneGrid) -> String {
    let mut s = format!(
        "{},{},class,period,lyapunov,escape_time\n",
        grid.axis1.param, grid.axis2.param
    );
    for (idx, r) in grid.records.iter().enumerate() {
        let (i, j) = (idx / grid.axis2.steps, idx % grid.axis2.steps);
        let _ = writeln!(
            s,
            "{},{},{},{},{},{}",
            fmt_f64(grid.axis1.value(i)),
            fmt_f64(grid.axis2.value(j)),
            r.class.label.code(),
            r.class.label.period().map(|k| k.to_string()).unwrap_or_default(),
            opt(r.lyapunov),
            opt(r.escape_time),
        );
    }
    s
}

/// Reads a plane CSV back into labels (rows over the first column's values).
pub fn labels_from_plane_csv(csv: &str) -> Result<Vec<Vec<AttractorLabel>>> {
    let mut rows: Vec<(String, Vec<AttractorLabel>)> = Vec::new();
    for (n, line) in csv.lines().enumerate().skip(1) {
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 6 {
            return Err(Error::domain(format!("line {}: expected 6 fields", n + 1)));
        }
        let code: u8 = f[2]
            .parse()
            .map_err(|_| Error::domain(format!("line {}: bad class code", n + 1)))?;
        let period = if f[3].is_empty() {
            None
        } else {
            Some(f[3].parse().map_err(|_| Error::domain(format!("line {}: bad period", n + 1)))?)
        };
        let label = AttractorLabel::from_code(code, period)
            .ok_or_else(|| Error::domain(format!("line {}: bad class/period", n + 1)))?;
        match rows.last_mut() {
            Some((key, row)) if key == f[0] => row.push(label),
            _ => rows.push((f[0].to_string(), vec![label])),
        }
    }
    Ok(rows.into_iter().map(|(_, r)| r).collect())
}

/// Bifurcation diagram as an SVG scatter, one dot per peak.
pub fn bifurcation_svg(plan: &SweepPlan, records: &[SweepRecord]) -> String {
    let (w, h, m) = (900.0, 600.0, 50.0);
    let param = plan.axis1.param;
    let (lo, hi) = (plan.axis1.lo, plan.axis1.hi);
    let peaks = records.iter().flat_map(|r| r.peaks.iter().copied());
    let (ymin, ymax) = peaks.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
    let (ymin, ymax) = if ymin < ymax { (ymin, ymax) } else { (ymin - 1.0, ymin + 1.0) };
    let sx = |x: f64| m + (x - lo) / (hi - lo) * (w - 2.0 * m);
    let sy = |y: f64| h - m - (y - ymin) / (ymax - ymin) * (h - 2.0 * m);
    let mut s = format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\" viewBox=\"0 0 {w} {h}\">\n\
         <rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n\
         <rect x=\"{m}\" y=\"{m}\" width=\"{}\" height=\"{}\" fill=\"none\" stroke=\"black\"/>\n",
        w - 2.0 * m,
        h - 2.0 * m
    );
    let _ = writeln!(
        s,
        "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\" font-size=\"14\">{param}</text>",
        w / 2.0,
        h - 15.0
    );
    let _ = writeln!(s, "<text x=\"{m}\" y=\"{}\" font-size=\"12\">{}</text>", h - m + 15.0, fmt_f64(lo));
    let _ = writeln!(
        s,
        "<text x=\"{}\" y=\"{}\" text-anchor=\"end\" font-size=\"12\">{}</text>",
        w - m,
        h - m + 15.0,
        fmt_f64(hi)
    );
    let _ = writeln!(s, "<g fill=\"black\">");
    for r in records {
        let x = sx(r.params[&param]);
        for &pk in &r.peaks {
            let _ = writeln!(s, "<circle cx=\"{x:.2}\" cy=\"{:.2}\" r=\"0.6\"/>", sy(pk));
        }
    }
    s.push_str("</g>\n</svg>\n");
    s
}
