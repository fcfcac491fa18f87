use std::path::Path;
use std::process::{Command, Output};

use mapode::dynamics::AttractorClass;
use mapode::stability::{analyze, HurwitzReport, Verdict};
use mapode::sweep::SweepRecord;
use num_rational::BigRational;

fn mapode(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mapode"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn config(dir: &Path, text: &str) -> String {
    let path = dir.join("run.cfg");
    std::fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn order_six_unit_alpha_is_unstable() {
    let o = mapode(&["stability", "--order", "6", "--alpha", "1"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let out = stdout(&o);
    // -2/518400 in lowest terms.
    assert!(out.contains("U_3 = -1/259200"), "{out}");
    assert!(out.contains("verdict: Unstable"), "{out}");
}

#[test]
fn cubic_truncation_coefficients() {
    let o = mapode(&["truncate", "--map", "logistic:4", "--order", "3"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert!(out.contains("coefficients: 1,3,6,6"), "{out}");
    assert!(out.contains("x''' + 3 x'' + 6 x' + 6 (x - f(x)) = 0"), "{out}");

    let o = mapode(&["truncate", "--map", "logistic:4", "--order", "3", "--at", "3/4", "--format", "json"]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["coefficients"], serde_json::json!([1, 3, 6, 6]));
    assert_eq!(v["map"], "logistic:4");
    // alpha = 1 - f'(3/4) = 3 at the nontrivial fixed point; last row [-6 alpha, -6, -3].
    assert_eq!(v["companion"][2], serde_json::json!([-18.0, -6.0, -3.0]));
}

#[test]
fn reproduce_prints_pass() {
    let o = mapode(&["reproduce", "n5-instability"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stdout(&o).starts_with("PASS n5-instability"), "{}", stdout(&o));

    let o = mapode(&["reproduce", "--list"]);
    let listed = stdout(&o);
    for s in mapode::scenarios::registry() {
        assert!(listed.contains(s.id), "{listed}");
    }
}

#[test]
fn exit_codes() {
    assert_eq!(mapode(&["stability", "--bogus"]).status.code(), Some(64));
    assert_eq!(mapode(&[]).status.code(), Some(64));
    assert_eq!(mapode(&["--help"]).status.code(), Some(0));
    assert_eq!(mapode(&["stability"]).status.code(), Some(64));
    assert_eq!(mapode(&["stability", "--alpha", "1", "--order", "0"]).status.code(), Some(1));
    assert_eq!(mapode(&["truncate", "--map", "tent:2"]).status.code(), Some(1));
    assert_eq!(mapode(&["reproduce", "no-such-claim"]).status.code(), Some(1));
    // A run that escapes is a numeric failure for the Lyapunov estimate.
    let o = mapode(&["lyapunov", "--system", "cubic", "--lambda", "3", "--t-transient", "50", "--t-measure", "50"]);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
}

#[test]
fn help_documents_defaults() {
    for cmd in ["integrate", "classify", "bifurcate", "scan", "linear"] {
        let o = mapode(&[cmd, "--help"]);
        assert_eq!(o.status.code(), Some(0));
        let text = stdout(&o);
        assert!(text.contains("[default:"), "{cmd}: {text}");
    }
    let text = stdout(&mapode(&["--help"]));
    assert!(text.contains("--seed") && text.contains("no effect"), "{text}");
}

#[test]
fn config_values_and_precedence() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(dir.path(), "# vertex of the U_4 parabola\nalpha = 5/3\norder = 5\n");
    let o = mapode(&["--config", &cfg, "stability"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let out = stdout(&o);
    assert!(out.contains("alpha: 5/3") && out.contains("order: 5"), "{out}");
    // U_4 = -(20/9) / 5!^2 at the vertex.
    assert!(out.contains("U_4 = -1/6480"), "{out}");

    let o = mapode(&["--config", &cfg, "stability", "--alpha", "1"]);
    let out = stdout(&o);
    assert!(out.contains("alpha: 1\n") && out.contains("order: 5"), "{out}");

    let empty = config(dir.path(), "");
    let a = mapode(&["--config", &empty, "truncate"]);
    let b = mapode(&["truncate"]);
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn config_divergence_bound_applies() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["integrate", "--system", "cubic", "--lambda", "3", "--t-end", "30", "--sample-stride", "1"];
    let footer = |o: &Output| stdout(o).lines().last().unwrap().to_string();
    let default = footer(&mapode(&args));
    let cfg = config(dir.path(), "divergence_bound = 1e6\n");
    let mut with_cfg = vec!["--config", cfg.as_str()];
    with_cfg.extend(args);
    let tight = footer(&mapode(&with_cfg));
    let time = |s: &str| -> f64 { s.split('=').nth(1).unwrap().parse().unwrap() };
    assert!(default.starts_with("# status: diverged") && tight.starts_with("# status: diverged"));
    assert!(time(&tight) < time(&default), "{tight} vs {default}");
}

#[test]
fn config_errors_name_line_and_keys() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(dir.path(), "order = 3\nstepsize = 2\n");
    let o = mapode(&["--config", &cfg, "truncate"]);
    assert_eq!(o.status.code(), Some(64));
    let err = stderr(&o);
    assert!(err.contains("line 2") && err.contains("valid keys") && err.contains("divergence_bound"), "{err}");

    let cfg = config(dir.path(), "order 3\n");
    let o = mapode(&["--config", &cfg, "truncate"]);
    assert_eq!(o.status.code(), Some(64));
    assert!(stderr(&o).contains("line 1"));
}

#[test]
fn stability_json_round_trips() {
    let o = mapode(&["stability", "--order", "5", "--alpha", "5/3", "--format", "json"]);
    assert_eq!(o.status.code(), Some(0));
    let report: HurwitzReport = serde_json::from_slice(&o.stdout).unwrap();
    let alpha: BigRational = mapode::stability::parse_rational("5/3").unwrap();
    assert_eq!(report, analyze(5, alpha).unwrap());
    assert_eq!(report.verdict, Verdict::Unstable);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["roots"].as_array().unwrap().len(), 5);
}

#[test]
fn map_derived_alpha() {
    // f'(3/4) = -2 for the p = 4 logistic map, so alpha = 3: the N = 3 boundary.
    let o = mapode(&["stability", "--order", "3", "--map", "logistic:4", "--at", "0.75"]);
    let out = stdout(&o);
    assert!(out.contains("alpha: 3\n") && out.contains("verdict: Marginal"), "{out}");
    let o = mapode(&["roots", "--order", "3", "--map", "logistic:4", "--at", "0.75", "--format", "json"]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let on_axis = v["roots"]
        .as_array()
        .unwrap()
        .iter()
        .filter(|z| z[0].as_f64().unwrap().abs() < 1e-12)
        .count();
    assert_eq!(on_axis, 2, "{v}");
}

#[test]
fn classify_json_round_trips() {
    let o = mapode(&[
        "classify", "--system", "cubic", "--p", "3", "--t-transient", "100", "--t-measure", "200",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let class: AttractorClass = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(class.label, mapode::dynamics::AttractorLabel::FixedPoint);
    let again = serde_json::to_string_pretty(&class).unwrap() + "\n";
    assert_eq!(again, stdout(&o));
}

#[test]
fn bifurcation_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("sweep.csv");
    let common = [
        "bifurcate", "--lo", "0.3", "--hi", "0.9", "--steps", "4", "--t-transient", "100", "--t-measure", "200",
    ];
    let mut args = vec!["-o", csv.to_str().unwrap()];
    args.extend(common);
    let o = mapode(&args);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = std::fs::read_to_string(&csv).unwrap();
    assert!(text.starts_with("param,peak\n"));
    let sidecar: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("sweep.json")).unwrap()).unwrap();
    assert_eq!(sidecar["param"], "lambda");
    assert_eq!(sidecar["points"].as_array().unwrap().len(), 4);

    let mut args = common.to_vec();
    args.extend(["--format", "json"]);
    let o = mapode(&args);
    let records: Vec<SweepRecord> = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(records.len(), 4);
    let again = serde_json::to_string_pretty(&records).unwrap() + "\n";
    assert_eq!(again, stdout(&o));

    let mut args = common.to_vec();
    args.extend(["--format", "svg"]);
    assert!(stdout(&mapode(&args)).starts_with("<svg"));
}

#[test]
fn scan_is_thread_count_invariant() {
    let args = [
        "scan", "--nu-range", "0.5,0.8,3", "--lambda-range", "0.3,1.6,3", "--t-transient", "100", "--t-measure", "200",
    ];
    let mut one = vec!["--threads", "1"];
    one.extend(args);
    let mut three = vec!["--threads", "3", "--seed", "7"];
    three.extend(args);
    let a = mapode(&one);
    let b = mapode(&three);
    assert_eq!(a.status.code(), Some(0), "{}", stderr(&a));
    assert_eq!(a.stdout, b.stdout);
    let labels = mapode::sweep::labels_from_plane_csv(&stdout(&a)).unwrap();
    assert_eq!((labels.len(), labels[0].len()), (3, 3));
}

#[test]
fn linear_reports_both_propagators() {
    let o = mapode(&["linear", "--order", "3", "--at", "0.75", "--t", "2", "--xi0", "0.1,-0.05"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert!(out.contains("closed form:") && out.contains("matrix exponential:"), "{out}");
    let diff: f64 = out
        .lines()
        .find_map(|l| l.strip_prefix("max |difference|: "))
        .unwrap()
        .parse()
        .unwrap();
    assert!(diff < 1e-10, "{diff}");

    // Double root at -1: the closed form is refused, the exponential still answers.
    let o = mapode(&["linear", "--order", "2", "--map", "poly:0,0.5", "--at", "0", "--xi0", "1", "--format", "json"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!(v["closed_form"].is_null());
    let e = (-1.0f64).exp();
    let s: Vec<f64> = serde_json::from_value(v["series"].clone()).unwrap();
    assert!((s[0] - 2.0 * e).abs() < 1e-12 && (s[1] + e).abs() < 1e-12, "{s:?}");
}
