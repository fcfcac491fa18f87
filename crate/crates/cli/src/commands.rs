use std::fmt::{self, Write as _};
use std::path::{Path, PathBuf};

use anyhow::Context;
use mapode::dynamics::{
    classify, integrate, largest_lyapunov_with, ClassifierThresholds, IntegratorConfig,
    LyapunovSettings, Method, Status, TangentField,
};
use mapode::embedding::{to_scaled, truncate, ScaledCubic};
use mapode::linear_solution::{propagate_closed, propagate_series};
use mapode::maps::MapSpec;
use mapode::scenarios;
use mapode::stability::{
    analyze, char_poly, rational_from_f64, roots, HurwitzReport,
};
use mapode::sweep::{
    bifurcation_csv, bifurcation_sidecar, bifurcation_svg, bifurcation_sweep, fmt_f64, plane_csv,
    plane_scan, Axis, Continuation, Param, SweepPlan, SystemKind,
};
use num_complex::Complex64;
use num_rational::BigRational;
use serde::Serialize;

use crate::config::{parse_range, ConfigError, RunConfig};
use crate::{
    BifurcateOpts, ClassifyOpts, Command, IntegratorArgs, LinearOpts, ReproduceOpts, RunOpts,
    ScanOpts, StabilityOpts, SystemArgs, ThresholdArgs, TruncateOpts,
};

const DEFAULT_MAP: &str = "logistic:4";
const DEFAULT_ORDER: usize = 3;

/// A `reproduce` scenario ran to completion and failed its checks.
#[derive(Debug)]
pub struct ReproductionFailed(pub String);

impl fmt::Display for ReproductionFailed {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "scenario {} failed", self.0)
    }
}

impl std::error::Error for ReproductionFailed {}

pub struct Output {
    path: Option<PathBuf>,
}

impl Output {
    pub fn new(path: Option<PathBuf>) -> Self {
        Output { path }
    }

    fn write(&self, text: &str) -> anyhow::Result<()> {
        match &self.path {
            Some(p) => std::fs::write(p, text).with_context(|| format!("writing {}", p.display())),
            None => {
                print!("{text}");
                Ok(())
            }
        }
    }
}

fn usage(msg: impl Into<String>) -> anyhow::Error {
    ConfigError(msg.into()).into()
}

fn json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("output serializes");
    s.push('\n');
    s
}

#[derive(Clone, Copy, PartialEq)]
enum Format {
    Text,
    Json,
    Csv,
    Svg,
}

fn format(cfg: &RunConfig, flag: &Option<String>, default: Format, allowed: &[Format]) -> anyhow::Result<Format> {
    let f = match cfg.string(flag, "format").as_deref() {
        None => default,
        Some("text") => Format::Text,
        Some("json") => Format::Json,
        Some("csv") => Format::Csv,
        Some("svg") => Format::Svg,
        Some(other) => return Err(usage(format!("unknown format `{other}`"))),
    };
    if !allowed.contains(&f) {
        return Err(usage("format not available for this command"));
    }
    Ok(f)
}

fn map_spec(cfg: &RunConfig, flag: &Option<String>) -> anyhow::Result<MapSpec> {
    Ok(cfg.string(flag, "map").as_deref().unwrap_or(DEFAULT_MAP).parse()?)
}

fn pad(mut x: Vec<f64>, n: usize) -> anyhow::Result<Vec<f64>> {
    if x.len() > n {
        return Err(mapode::Error::Domain(format!(
            "initial state has {} components, system dimension is {n}",
            x.len()
        ))
        .into());
    }
    x.resize(n, 0.0);
    Ok(x)
}

fn vec_line(v: &[f64]) -> String {
    v.iter().map(|x| fmt_f64(*x)).collect::<Vec<_>>().join(", ")
}

fn complex_pair(z: &Complex64) -> [f64; 2] {
    [z.re, z.im]
}

pub fn dispatch(command: Command, cfg: &RunConfig, out: &Output) -> anyhow::Result<()> {
    match command {
        Command::Truncate(o) => truncate_cmd(&o, cfg, out),
        Command::Stability(o) => stability_cmd(&o, cfg, out),
        Command::Roots(o) => roots_cmd(&o, cfg, out),
        Command::Linear(o) => linear_cmd(&o, cfg, out),
        Command::Integrate(o) => integrate_cmd(&o, cfg, out),
        Command::Lyapunov(o) => lyapunov_cmd(&o, cfg, out),
        Command::Classify(o) => classify_cmd(&o, cfg, out),
        Command::Bifurcate(o) => bifurcate_cmd(&o, cfg, out),
        Command::Scan(o) => scan_cmd(&o, cfg, out),
        Command::Reproduce(o) => reproduce_cmd(&o),
    }
}

#[derive(Serialize)]
struct TruncationJson {
    map: String,
    order: usize,
    coefficients: Vec<u64>,
    reference_point: f64,
    alpha: f64,
    beta: f64,
    companion: Vec<Vec<f64>>,
    inhomogeneous: Vec<f64>,
}

fn derivative_name(k: usize) -> String {
    match k {
        0 => "x".into(),
        1..=3 => format!("x{}", "'".repeat(k)),
        _ => format!("x^({k})"),
    }
}

fn truncate_cmd(o: &TruncateOpts, cfg: &RunConfig, out: &Output) -> anyhow::Result<()> {
    let map = map_spec(cfg, &o.map.map)?;
    let order = cfg.integer(o.map.order, "order", DEFAULT_ORDER)?;
    let at = cfg.number(o.at, "at", 0.0)?;
    let fmt = format(cfg, &o.format, Format::Text, &[Format::Text, Format::Json])?;
    let sys = truncate(map.clone(), order)?;
    let ls = sys.linearize(at)?;
    let coeffs = sys.integer_coefficients();
    let companion: Vec<Vec<f64>> = (0..order)
        .map(|i| (0..order).map(|j| ls.companion[(i, j)]).collect())
        .collect();

    let text = if fmt == Format::Json {
        json(&TruncationJson {
            map: map.to_string(),
            order,
            coefficients: coeffs,
            reference_point: at,
            alpha: ls.alpha,
            beta: ls.beta,
            companion,
            inhomogeneous: ls.inhomogeneous.iter().copied().collect(),
        })
    } else {
        let mut s = String::new();
        let _ = writeln!(s, "map: {map}");
        let _ = writeln!(s, "order: {order}");
        let listed: Vec<String> = coeffs.iter().map(u64::to_string).collect();
        let _ = writeln!(s, "coefficients: {}", listed.join(","));
        let mut terms: Vec<String> = coeffs[..order]
            .iter()
            .enumerate()
            .map(|(i, c)| {
                let name = derivative_name(order - i);
                if *c == 1 { name } else { format!("{c} {name}") }
            })
            .collect();
        terms.push(format!("{} (x - f(x))", coeffs[order]));
        let _ = writeln!(s, "ode: {} = 0", terms.join(" + "));
        let _ = writeln!(s, "state: xi_(k+1) = x^(k), k = 0..{}", order - 1);
        let _ = writeln!(s, "companion form at x* = {}:", fmt_f64(at));
        let _ = writeln!(s, "alpha: {}", fmt_f64(ls.alpha));
        let _ = writeln!(s, "beta: {}", fmt_f64(ls.beta));
        let _ = writeln!(s, "M:");
        for row in &companion {
            let _ = writeln!(s, "  [{}]", vec_line(row));
        }
        let _ = writeln!(s, "v: [{}]", vec_line(ls.inhomogeneous.as_slice()));
        s
    };
    out.write(&text)
}

fn stability_alpha(o: &StabilityOpts, cfg: &RunConfig) -> anyhow::Result<(usize, BigRational)> {
    let order = cfg.integer(o.order, "order", DEFAULT_ORDER)?;
    let alpha = cfg.rational(&o.alpha, "alpha")?;
    let map = cfg.string(&o.map, "map");
    match (alpha, map) {
        (Some(a), None) => Ok((order, a)),
        (None, Some(m)) => {
            let map: MapSpec = m.parse()?;
            let at = cfg
                .number_opt(o.at, "at")?
                .ok_or_else(|| usage("--map needs --at"))?;
            Ok((order, rational_from_f64(1.0 - map.deriv(at)?)?))
        }
        (Some(_), Some(_)) => Err(usage("give either --alpha or --map, not both")),
        (None, None) => Err(usage("give --alpha, or --map with --at")),
    }
}

#[derive(Serialize)]
struct StabilityJson<'a> {
    order: usize,
    #[serde(serialize_with = "ser_rational")]
    alpha: &'a BigRational,
    #[serde(flatten)]
    report: &'a HurwitzReport,
    roots: Vec<[f64; 2]>,
}

fn ser_rational<S: serde::Serializer>(r: &&BigRational, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&r.to_string())
}

fn stability_cmd(o: &StabilityOpts, cfg: &RunConfig, out: &Output) -> anyhow::Result<()> {
    let (order, alpha) = stability_alpha(o, cfg)?;
    let fmt = format(cfg, &o.format, Format::Text, &[Format::Text, Format::Json])?;
    let report = analyze(order, alpha.clone())?;
    let zs = roots(&char_poly(order, alpha.clone())?)?;
    let text = if fmt == Format::Json {
        json(&StabilityJson {
            order,
            alpha: &alpha,
            report: &report,
            roots: zs.iter().map(complex_pair).collect(),
        })
    } else {
        let mut s = String::new();
        let _ = writeln!(s, "order: {order}");
        let _ = writeln!(s, "alpha: {alpha}");
        for (k, u) in report.u_sequence.iter().enumerate() {
            let _ = writeln!(s, "U_{k} = {u}");
        }
        let _ = writeln!(s, "sign changes: {}", report.sign_changes);
        let _ = writeln!(s, "unstable roots: {}", report.n_unstable_roots);
        let _ = writeln!(s, "verdict: {:?}", report.verdict);
        let _ = writeln!(s, "roots:");
        s.push_str(&roots_text(&zs));
        s
    };
    out.write(&text)
}

fn roots_text(zs: &[Complex64]) -> String {
    let mut s = String::new();
    for z in zs {
        let _ = writeln!(s, "  {} {}", fmt_f64(z.re), fmt_f64(z.im));
    }
    s
}

#[derive(Serialize)]
struct RootsJson {
    order: usize,
    alpha: String,
    roots: Vec<[f64; 2]>,
    right_half_plane: usize,
}

fn roots_cmd(o: &StabilityOpts, cfg: &RunConfig, out: &Output) -> anyhow::Result<()> {
    let (order, alpha) = stability_alpha(o, cfg)?;
    let fmt = format(cfg, &o.format, Format::Text, &[Format::Text, Format::Json])?;
    let zs = roots(&char_poly(order, alpha.clone())?)?;
    let rhp = zs.iter().filter(|z| z.re > 0.0).count();
    let text = if fmt == Format::Json {
        json(&RootsJson {
            order,
            alpha: alpha.to_string(),
            roots: zs.iter().map(complex_pair).collect(),
            right_half_plane: rhp,
        })
    } else {
        format!("# re im (order {order}, alpha {alpha}, {rhp} with re > 0)\n{}", roots_text(&zs))
    };
    out.write(&text)
}

#[derive(Serialize)]
struct LinearJson {
    order: usize,
    reference_point: f64,
    alpha: f64,
    beta: f64,
    t: f64,
    xi0: Vec<f64>,
    closed_form: Option<Vec<f64>>,
    series: Vec<f64>,
    max_difference: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    note: Option<String>,
}

fn linear_cmd(o: &LinearOpts, cfg: &RunConfig, out: &Output) -> anyhow::Result<()> {
    let map = map_spec(cfg, &o.map.map)?;
    let order = cfg.integer(o.map.order, "order", DEFAULT_ORDER)?;
    let fmt = format(cfg, &o.format, Format::Text, &[Format::Text, Format::Json])?;
    let at = match cfg.number_opt(o.at, "at")? {
        Some(x) => x,
        None => *map
            .fixed_points()?
            .first()
            .ok_or_else(|| mapode::Error::Domain(format!("{map} has no real fixed point; give --at")))?,
    };
    let t = cfg.number(o.t, "t", 1.0)?;
    let xi0 = pad(cfg.list(&o.xi0, "xi0")?.unwrap_or_else(|| vec![0.1]), order)?;
    let ls = truncate(map, order)?.linearize(at)?;
    let series = propagate_series(&ls, &xi0, t)?;
    let (closed, note) = match propagate_closed(&ls, &xi0, t) {
        Ok(v) => (Some(v), None),
        Err(e @ mapode::Error::DegenerateSpectrum { .. }) => {
            (None, Some(format!("closed form unavailable: {e}")))
        }
        Err(e) => return Err(e.into()),
    };
    let diff = closed.as_ref().map(|c| {
        c.iter()
            .zip(&series)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    });
    let text = if fmt == Format::Json {
        json(&LinearJson {
            order,
            reference_point: at,
            alpha: ls.alpha,
            beta: ls.beta,
            t,
            xi0,
            closed_form: closed,
            series,
            max_difference: diff,
            note,
        })
    } else {
        let mut s = String::new();
        let _ = writeln!(s, "order: {order}");
        let _ = writeln!(s, "x*: {}", fmt_f64(at));
        let _ = writeln!(s, "alpha: {}", fmt_f64(ls.alpha));
        let _ = writeln!(s, "beta: {}", fmt_f64(ls.beta));
        let _ = writeln!(s, "t: {}", fmt_f64(t));
        let _ = writeln!(s, "xi0: {}", vec_line(&xi0));
        match &closed {
            Some(c) => {
                let _ = writeln!(s, "closed form: {}", vec_line(c));
            }
            None => {
                let _ = writeln!(s, "{}", note.as_deref().unwrap_or_default());
            }
        }
        let _ = writeln!(s, "matrix exponential: {}", vec_line(&series));
        if let Some(d) = diff {
            let _ = writeln!(s, "max |difference|: {}", fmt_f64(d));
        }
        s
    };
    out.write(&text)
}

fn integrator(cfg: &RunConfig, a: &IntegratorArgs, t_end: f64) -> anyhow::Result<IntegratorConfig> {
    let d = IntegratorConfig::default();
    let method = match cfg.string(&a.method, "method").as_deref().unwrap_or("rk4") {
        "rk4" => Method::Rk4Fixed {
            h: cfg.number(a.h, "h", 1e-2)?,
        },
        "rk45" => Method::Rk45Adaptive {
            rel_tol: cfg.number(a.rel_tol, "rel_tol", 1e-9)?,
            abs_tol: cfg.number(a.abs_tol, "abs_tol", 1e-12)?,
        },
        other => return Err(usage(format!("unknown method `{other}`; use rk4 or rk45"))),
    };
    Ok(IntegratorConfig {
        method,
        t_end,
        divergence_bound: cfg.number(a.divergence_bound, "divergence_bound", d.divergence_bound)?,
        sample_stride: cfg.number(a.sample_stride, "sample_stride", d.sample_stride)?,
    })
}

fn thresholds(cfg: &RunConfig, a: &ThresholdArgs) -> anyhow::Result<ClassifierThresholds> {
    let d = ClassifierThresholds::default();
    Ok(ClassifierThresholds {
        t_transient: cfg.number(a.t_transient, "t_transient", d.t_transient)?,
        t_measure: cfg.number(a.t_measure, "t_measure", d.t_measure)?,
        renorm_interval: cfg.number(a.renorm_interval, "renorm_interval", d.renorm_interval)?,
        peak_tol: cfg.number(a.peak_tol, "peak_tol", d.peak_tol)?,
        fp_tol: cfg.number(a.fp_tol, "fp_tol", d.fp_tol)?,
        chaos_tol: cfg.number(a.chaos_tol, "chaos_tol", d.chaos_tol)?,
        max_period: cfg.integer(a.max_period, "max_period", d.max_period)?,
        min_maxima: cfg.integer(a.min_maxima, "min_maxima", d.min_maxima)?,
    })
}

/// A system chosen on the command line, with its initial state.
struct Selected {
    field: Box<dyn TangentField>,
    x0: Vec<f64>,
    description: String,
}

fn cubic_params(cfg: &RunConfig, a: &SystemArgs) -> anyhow::Result<ScaledCubic> {
    let base = match cfg.number_opt(a.p, "p")? {
        Some(p) => to_scaled(p)?,
        None => ScaledCubic::new(2.0 / 3.0, 2.0 / 3.0)?,
    };
    let nu = cfg.number(a.nu, "nu", base.nu)?;
    let lambda = cfg.number(a.lambda, "lambda", base.lambda)?;
    Ok(ScaledCubic::new(nu, lambda)?)
}

fn select(cfg: &RunConfig, a: &SystemArgs) -> anyhow::Result<Selected> {
    let x0 = cfg.list(&a.x0, "x0")?;
    match cfg.string(&a.system, "system").as_deref().unwrap_or("truncated") {
        "truncated" => {
            let map = map_spec(cfg, &a.map.map)?;
            let order = cfg.integer(a.map.order, "order", DEFAULT_ORDER)?;
            let sys = truncate(map.clone(), order)?;
            Ok(Selected {
                x0: pad(x0.unwrap_or_else(|| vec![0.3]), order)?,
                description: format!("truncated {map} order {order}"),
                field: Box::new(sys),
            })
        }
        "cubic" => {
            let c = cubic_params(cfg, a)?;
            Ok(Selected {
                x0: pad(x0.unwrap_or_else(|| vec![0.1]), 3)?,
                description: format!("cubic nu {} lambda {}", fmt_f64(c.nu), fmt_f64(c.lambda)),
                field: Box::new(c),
            })
        }
        other => Err(usage(format!("unknown system `{other}`; use truncated or cubic"))),
    }
}

fn integrate_cmd(o: &RunOpts, cfg: &RunConfig, out: &Output) -> anyhow::Result<()> {
    let sel = select(cfg, &o.system)?;
    let t_end = cfg.number(o.t_end, "t_end", 100.0)?;
    let run = integrator(cfg, &o.integrator, t_end)?;
    let traj = integrate(sel.field.as_ref(), &sel.x0, &run)?;
    let n = sel.x0.len();
    let mut s = String::new();
    let _ = writeln!(s, "# {}", sel.description);
    let header: Vec<String> = (1..=n).map(|k| format!("xi{k}")).collect();
    let _ = writeln!(s, "t,{}", header.join(","));
    for (t, x) in traj.times.iter().zip(&traj.states) {
        let row: Vec<String> = x.iter().map(|v| fmt_f64(*v)).collect();
        let _ = writeln!(s, "{},{}", fmt_f64(*t), row.join(","));
    }
    let _ = match traj.status {
        Status::Completed => writeln!(s, "# status: completed"),
        Status::Diverged(t) => writeln!(s, "# status: diverged at_time={}", fmt_f64(t)),
        Status::StepFailure(t) => writeln!(s, "# status: step_failure at_time={}", fmt_f64(t)),
    };
    out.write(&s)
}

#[derive(Serialize)]
struct LyapunovJson {
    system: String,
    x0: Vec<f64>,
    settings: LyapunovSettings,
    lyapunov: f64,
}

fn lyapunov_cmd(o: &ClassifyOpts, cfg: &RunConfig, out: &Output) -> anyhow::Result<()> {
    let sel = select(cfg, &o.system)?;
    let run = integrator(cfg, &o.integrator, 0.0)?;
    let th = thresholds(cfg, &o.thresholds)?;
    let settings = LyapunovSettings {
        t_transient: th.t_transient,
        t_measure: th.t_measure,
        renorm_interval: th.renorm_interval,
    };
    let l = largest_lyapunov_with(sel.field.as_ref(), &sel.x0, &run, &settings)?;
    out.write(&json(&LyapunovJson {
        system: sel.description,
        x0: sel.x0,
        settings,
        lyapunov: l,
    }))
}

fn classify_cmd(o: &ClassifyOpts, cfg: &RunConfig, out: &Output) -> anyhow::Result<()> {
    let sel = select(cfg, &o.system)?;
    let run = integrator(cfg, &o.integrator, 0.0)?;
    let th = thresholds(cfg, &o.thresholds)?;
    let class = classify(sel.field.as_ref(), &sel.x0, &run, &th)?;
    out.write(&json(&class))
}

fn bifurcate_cmd(o: &BifurcateOpts, cfg: &RunConfig, out: &Output) -> anyhow::Result<()> {
    let system = match cfg.string(&o.system, "system").as_deref().unwrap_or("cubic") {
        "cubic" => SystemKind::ScaledCubic,
        "logistic3" => SystemKind::TruncatedLogistic(3),
        "logistic4" => SystemKind::TruncatedLogistic(4),
        other => return Err(usage(format!("unknown system `{other}`; use cubic, logistic3 or logistic4"))),
    };
    let (param_default, lo_d, hi_d, steps_d) = match system {
        SystemKind::ScaledCubic => (Param::Lambda, 0.2, 1.3, 1101),
        SystemKind::TruncatedLogistic(_) => (Param::P, 3.0, 4.5, 301),
    };
    let param = match cfg.string(&o.param, "param") {
        Some(s) => s.parse::<Param>()?,
        None => param_default,
    };
    let axis = Axis::new(
        param,
        cfg.number(o.lo, "lo", lo_d)?,
        cfg.number(o.hi, "hi", hi_d)?,
        cfg.integer(o.steps, "steps", steps_d)?,
    );
    let mut plan = SweepPlan::bifurcation(system, axis);
    plan.base.nu = cfg.number(o.nu, "nu", plan.base.nu)?;
    plan.base.lambda = cfg.number(o.lambda, "lambda", plan.base.lambda)?;
    let x0 = cfg.list(&o.x0, "x0")?;
    plan.continuation = match cfg.string(&o.continuation, "continuation").as_deref().unwrap_or("follow") {
        "follow" => Continuation::FollowAttractor,
        "cold" => Continuation::ColdStart(x0.map(|x| pad(x, plan.dim())).transpose()?),
        other => return Err(usage(format!("unknown continuation `{other}`; use follow or cold"))),
    };
    plan.integrator = integrator(cfg, &o.integrator, 0.0)?;
    plan.thresholds = thresholds(cfg, &o.thresholds)?;
    let fmt = format(cfg, &o.format, Format::Csv, &[Format::Csv, Format::Json, Format::Svg])?;
    let records = bifurcation_sweep(&plan)?;
    match fmt {
        Format::Json => out.write(&json(&records)),
        Format::Svg => out.write(&bifurcation_svg(&plan, &records)),
        _ => {
            out.write(&bifurcation_csv(&plan, &records))?;
            let sidecar = o
                .sidecar
                .clone()
                .or_else(|| out.path.as_deref().map(|p| p.with_extension("json")));
            if let Some(path) = sidecar {
                write_file(&path, &bifurcation_sidecar(&plan, &records))?;
            }
            Ok(())
        }
    }
}

fn write_file(path: &Path, text: &str) -> anyhow::Result<()> {
    std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn axis_from(cfg: &RunConfig, flag: &Option<String>, key: &str, param: Param, default: (f64, f64, usize)) -> anyhow::Result<Axis> {
    let (lo, hi, steps) = match cfg.string(flag, key) {
        Some(s) => parse_range(&s).map_err(|e| usage(format!("{key}: {e}")))?,
        None => default,
    };
    Ok(Axis::new(param, lo, hi, steps))
}

fn scan_cmd(o: &ScanOpts, cfg: &RunConfig, out: &Output) -> anyhow::Result<()> {
    let nu = axis_from(cfg, &o.nu_range, "nu_range", Param::Nu, (0.3, 1.2, 200))?;
    let lambda = axis_from(cfg, &o.lambda_range, "lambda_range", Param::Lambda, (0.2, 1.4, 200))?;
    let mut plan = SweepPlan::plane(SystemKind::ScaledCubic, nu, lambda);
    plan.continuation = Continuation::ColdStart(cfg.list(&o.x0, "x0")?.map(|x| pad(x, 3)).transpose()?);
    plan.integrator = integrator(cfg, &o.integrator, 0.0)?;
    plan.thresholds = thresholds(cfg, &o.thresholds)?;
    let grid = plane_scan(&plan)?;
    out.write(&plane_csv(&grid))
}

fn reproduce_cmd(o: &ReproduceOpts) -> anyhow::Result<()> {
    if o.list {
        for s in scenarios::registry() {
            println!("{:<20} [{:>2}] {}", s.id, s.criterion, s.title);
        }
        return Ok(());
    }
    let id = o.id.as_deref().expect("clap requires an id without --list");
    let scenario = scenarios::find(id)?;
    let outcome = scenario.run()?;
    let tag = if outcome.passed { "PASS" } else { "FAIL" };
    println!("{tag} {id}: {} ({:.2?})", outcome.summary, outcome.elapsed);
    if o.verbose {
        for d in &outcome.details {
            println!("  {d}");
        }
    }
    if outcome.passed {
        Ok(())
    } else {
        Err(ReproductionFailed(id.to_string()).into())
    }
}
