use mapode::dynamics::{
    classify, integrate, largest_lyapunov, AttractorLabel, ClassifierThresholds, IntegratorConfig, Method, Status,
};
use mapode::embedding::{truncate, LinearizedSystem, ScaledCubic, TruncatedSystem};
use mapode::linear_solution::propagate_series;
use mapode::maps::MapSpec;
use mapode::stability::{char_poly_f64, roots};

fn logistic(p: f64, n: usize) -> TruncatedSystem {
    truncate(MapSpec::logistic(p), n).unwrap()
}

fn start(n: usize, x: f64) -> Vec<f64> {
    let mut v = vec![0.0; n];
    v[0] = x;
    v
}

fn label(field: &TruncatedSystem, x0: &[f64]) -> AttractorLabel {
    classify(field, x0, &IntegratorConfig::default(), &ClassifierThresholds::default())
        .unwrap()
        .label
}

#[test]
fn stable_logistic_truncation_is_a_fixed_point() {
    let sys = logistic(3.0, 3);
    let c = classify(&sys, &[0.5, 0.0, 0.0], &IntegratorConfig::default(), &ClassifierThresholds::default()).unwrap();
    assert_eq!(c.label, AttractorLabel::FixedPoint);
    assert!((c.peak_values[0] - 2.0 / 3.0).abs() < 1e-6, "{:?}", c.peak_values);
}

#[test]
fn limit_cycle_past_the_hopf_point() {
    assert_eq!(label(&logistic(4.2, 3), &start(3, 0.3)), AttractorLabel::Periodic(1));
}

#[test]
fn bounded_just_above_four() {
    assert_ne!(label(&logistic(4.05, 3), &start(3, 0.3)), AttractorLabel::Unstable);
}

#[test]
fn order_five_runs_escape() {
    for p in [0.5, 2.0, 3.0, 3.9] {
        let sys = logistic(p, 5);
        let traj = integrate(&sys, &start(5, 0.3), &IntegratorConfig { t_end: 500.0, ..Default::default() }).unwrap();
        assert!(matches!(traj.status, Status::Diverged(_)), "p = {p}: {:?}", traj.status);
        assert_eq!(label(&sys, &start(5, 0.3)), AttractorLabel::Unstable, "p = {p}");
    }
}

#[test]
fn lyapunov_matches_linear_theory_at_a_stable_point() {
    let sys = logistic(3.0, 3);
    let expected = roots(&char_poly_f64(3, 2.0).unwrap())
        .unwrap()
        .iter()
        .map(|z| z.re)
        .fold(f64::NEG_INFINITY, f64::max);
    let l = largest_lyapunov(&sys, &[0.5, 0.0, 0.0], &IntegratorConfig::default(), 100.0, 400.0).unwrap();
    assert!(l < 0.0 && (l - expected).abs() < 0.05, "{l} vs {expected}");
}

#[test]
fn lyapunov_near_zero_on_a_limit_cycle() {
    let l = largest_lyapunov(&logistic(4.2, 3), &start(3, 0.3), &IntegratorConfig::default(), 500.0, 2000.0).unwrap();
    assert!(l.abs() < 0.02, "{l}");
}

#[test]
fn chaotic_band_in_the_scaled_cubic() {
    // Located with a (nu, lambda) scan; the peaks fill two narrow bands.
    let field = ScaledCubic::new(0.72, 1.39).unwrap();
    let x0 = [0.1, 0.0, 0.0];
    let l = largest_lyapunov(&field, &x0, &IntegratorConfig::default(), 500.0, 2000.0).unwrap();
    assert!(l > 0.01, "{l}");
    let c = classify(&field, &x0, &IntegratorConfig::default(), &ClassifierThresholds::default()).unwrap();
    assert_eq!(c.label, AttractorLabel::Chaotic);
}

#[test]
fn linear_field_matches_matrix_exponential() {
    let ls = LinearizedSystem::from_coefficients(3, 1.5, 0.2).unwrap();
    let x0 = [0.1, -0.2, 0.05];
    let cfg = IntegratorConfig {
        t_end: 5.0,
        sample_stride: 0.5,
        ..IntegratorConfig::adaptive(1e-11, 1e-13)
    };
    let traj = integrate(&ls, &x0, &cfg).unwrap();
    for (t, x) in traj.times.iter().zip(&traj.states) {
        let exact = propagate_series(&ls, &x0, *t).unwrap();
        for (a, b) in x.iter().zip(&exact) {
            assert!((a - b).abs() < 1e-8, "t = {t}: {x:?} vs {exact:?}");
        }
    }
}

#[test]
fn rk4_error_falls_sixteenfold_per_halving() {
    let ls = LinearizedSystem::from_coefficients(3, 1.0, 0.0).unwrap();
    let x0 = [1.0, 0.0, 0.0];
    let exact = propagate_series(&ls, &x0, 2.0).unwrap();
    let err = |h: f64| {
        let cfg = IntegratorConfig {
            method: Method::Rk4Fixed { h },
            t_end: 2.0,
            ..Default::default()
        };
        let traj = integrate(&ls, &x0, &cfg).unwrap();
        let last = traj.states.last().unwrap();
        last.iter().zip(&exact).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
    };
    let ratio = err(0.1) / err(0.05);
    assert!((ratio - 16.0).abs() < 0.2 * 16.0, "{ratio}");
}

#[test]
fn adaptive_matches_fine_rk4() {
    let sys = logistic(4.2, 3);
    let x0 = start(3, 0.3);
    let end = |method| {
        let cfg = IntegratorConfig {
            method,
            t_end: 50.0,
            ..Default::default()
        };
        integrate(&sys, &x0, &cfg).unwrap().states.last().unwrap().clone()
    };
    let rk4 = end(Method::Rk4Fixed { h: 1e-3 });
    let rk45 = end(Method::Rk45Adaptive { rel_tol: 1e-9, abs_tol: 1e-12 });
    let scale = rk4.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    for (a, b) in rk45.iter().zip(&rk4) {
        assert!((a - b).abs() < 1e-6 * scale, "{rk45:?} vs {rk4:?}");
    }
}

#[test]
fn equilibria_do_not_drift() {
    let cfg = IntegratorConfig::default();
    let cubic = ScaledCubic::new(2.0 / 3.0, 0.5).unwrap();
    let traj = integrate(&cubic, &cubic.equilibrium(), &cfg).unwrap();
    assert_eq!(traj.status, Status::Completed);
    for x in &traj.states {
        assert!((x[0] - 0.5).abs() < 1e-8 && x[1].abs() < 1e-8 && x[2].abs() < 1e-8);
    }
    let sys = logistic(3.0, 3);
    let traj = integrate(&sys, &[2.0 / 3.0, 0.0, 0.0], &cfg).unwrap();
    assert!(traj.states.iter().all(|x| (x[0] - 2.0 / 3.0).abs() < 1e-8));
}

#[test]
fn classification_survives_stride_halving() {
    let cases: Vec<(Box<dyn mapode::dynamics::TangentField>, Vec<f64>)> = vec![
        (Box::new(logistic(3.0, 3)), start(3, 0.5)),
        (Box::new(logistic(4.2, 3)), start(3, 0.3)),
        (Box::new(logistic(3.9, 5)), start(5, 0.3)),
        (Box::new(ScaledCubic::new(2.0 / 3.0, 1.06).unwrap()), start(3, 0.1)),
        (Box::new(ScaledCubic::new(2.0 / 3.0, 1.192).unwrap()), start(3, 0.1)),
    ];
    let th = ClassifierThresholds::default();
    for (field, x0) in &cases {
        let coarse = IntegratorConfig::default();
        let fine = IntegratorConfig {
            sample_stride: coarse.sample_stride / 2.0,
            ..coarse
        };
        let a = classify(field.as_ref(), x0, &coarse, &th).unwrap().label;
        let b = classify(field.as_ref(), x0, &fine, &th).unwrap().label;
        assert_eq!(a, b, "x0 = {x0:?}");
    }
}
