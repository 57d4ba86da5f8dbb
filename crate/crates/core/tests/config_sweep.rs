mod common;

use approx::assert_relative_eq;
use backsec::config::{load_preset, preset_text, ConfigError, PRESETS};
use backsec::sweep::CSV_HEADER;
use backsec::{parse_config, run_sweep, Axis, Method, Metric, ProtocolKind, SweepSpec};
use common::db;
use proptest::prelude::*;

#[test]
fn minimal_config_fills_defaults() {
    let spec = parse_config("p_c = 100 uW\n").unwrap();
    assert_eq!(spec.metric, Metric::Sop);
    assert_eq!(spec.methods, vec![Method::Exact]);
    assert_eq!(spec.protocols, ProtocolKind::ALL.to_vec());
    assert_eq!(spec.axis, Axis::GammaTDb);
    assert_eq!(spec.axis_values.len(), 9);
    let b = &spec.base;
    assert_relative_eq!(b.gamma_p, db(5.0), max_relative = 1e-15);
    assert_relative_eq!(b.link_e.lambda_tilde(), db(5.0), max_relative = 1e-14);
    assert_eq!(b.link_d.distance(), 2.0);
    assert_eq!(b.eh.p_c, 1e-4);
    let echo = spec.to_config_string();
    assert!(echo.contains("p_c = 0.0001 W"), "{echo}");
    assert!(echo.contains("gamma_p = 3.16227766"), "{echo}");
}

#[test]
fn circuit_power_must_stay_below_saturation() {
    let err = parse_config("p_max = 200 uW\np_c = 200 uW\n").unwrap_err();
    assert!(matches!(err, ConfigError::Invalid(_)));
    assert!(err.to_string().contains("phi2 = p_max - p_c = 0"), "{err}");
    let err = parse_config("gamma_p = 5 dB\n").unwrap_err();
    assert!(err.to_string().contains("p_c"), "{err}");
}

#[test]
fn invariant_violations_are_named() {
    for (text, needle) in [
        ("p_c = 1 uW\naxis_values = 3, 2\n", "strictly increasing"),
        ("p_c = 1 uW\naxis = m_all\naxis_values = 1, 2.5\n", "positive integers"),
        ("p_c = 1 uW\nmethods = exact, fancy\n", "unknown method"),
        ("p_c = 1 uW\nlambda_s = 2 dB\nomega_s = 1\n", "only one of"),
        ("p_c = 1 uW\nn_tags = 0\n", "n_tags"),
        ("p_c = 1 uW\ntrials = 0\n", "trials"),
        ("p_c = 1 uW\naxis = d_e\naxis_values = -1, 2\n", "d_e = -1"),
    ] {
        let err = parse_config(text).unwrap_err();
        assert!(err.to_string().contains(needle), "{text:?}: {err}");
    }
}

#[test]
fn fig2_preset_matches_caption() {
    let s = load_preset("fig2").unwrap();
    let b = &s.base;
    assert_eq!(s.axis, Axis::GammaTDb);
    assert_eq!(s.axis_values, (0..=8).map(|i| 5.0 * i as f64).collect::<Vec<_>>());
    assert_eq!((b.link_s.distance(), b.link_d.distance(), b.link_e.distance()), (1.0, 2.0, 4.0));
    for (link, lam_db) in [(&b.link_s, 2.0), (&b.link_d, 3.0), (&b.link_e, 5.0)] {
        assert_eq!(link.m(), 2);
        assert_eq!(link.pathloss_exp(), 2.0);
        assert_relative_eq!(link.lambda_tilde(), db(lam_db), max_relative = 1e-14);
    }
    assert_eq!(b.rate_threshold, 0.5);
    assert_eq!(b.n_tags, 3);
    assert_eq!(b.zeta, 2.2);
    assert_relative_eq!(b.gamma_p, db(5.0), max_relative = 1e-15);
    assert_eq!(s.methods, vec![Method::Exact, Method::Asymptotic, Method::Mc]);
}

#[test]
fn presets_load_name_their_figure_and_round_trip() {
    for (name, text) in PRESETS {
        let first = text.lines().next().unwrap();
        let fig = format!("# Figure {}:", &name[3..]);
        assert!(first.starts_with(&fig), "{name}: {first}");
        let spec = load_preset(name).unwrap();
        assert_eq!(parse_config(&spec.to_config_string()).unwrap(), spec, "{name}");
    }
    assert!(preset_text("fig9").is_none());
    assert!(load_preset("fig9").is_err());
}

fn spec_strategy() -> impl Strategy<Value = String> {
    (
        prop::sample::select(vec!["sop", "ip"]),
        prop::sample::subsequence(vec!["exact", "asymptotic", "mc"], 1..=3),
        prop::sample::subsequence(vec!["sots", "mets", "ots", "rts"], 1..=4),
        -10.0f64..50.0,
        0.5f64..10.0,
        1u32..5,
        0.0f64..3.0,
        1.0f64..190.0,
        any::<u64>(),
    )
        .prop_map(|(metric, methods, protocols, gt, de, m, r, pc, seed)| {
            format!(
                "metric = {metric}\nmethods = {}\nprotocols = {}\ngamma_t = {gt} dB\nd_e = {de} m\n\
                 m = {m}\nrate = {r}\np_c = {pc} uW\nseed = {seed}\nlambda_d = {} dB\naxis = rate\naxis_values = 0:0.3:2\n",
                methods.join(", "),
                protocols.join(","),
                gt / 7.0
            )
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]
    #[test]
    fn resolved_config_round_trips(text in spec_strategy()) {
        let spec = parse_config(&text).unwrap();
        let again = parse_config(&spec.to_config_string()).unwrap();
        prop_assert_eq!(&again, &spec);
        prop_assert_eq!(again.to_config_string(), spec.to_config_string());
    }
}

fn single_point(methods: &str) -> SweepSpec {
    parse_config(&format!(
        "p_c = 100 uW\nmethods = {methods}\naxis_values = 30\ntrials = 20000\nbatch_size = 3000\n"
    ))
    .unwrap()
}

#[test]
fn single_point_exact_sweep() {
    let res = run_sweep(&single_point("exact")).unwrap();
    assert_eq!(res.rows.len(), 4);
    let csv = res.to_csv();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], CSV_HEADER);
    assert!(lines[1].starts_with("gamma_t_db,30,OTS,exact,") || lines[1].starts_with("gamma_t_db,30,SOTS,exact,"));
    for l in &lines[1..] {
        assert!(l.ends_with(",,"), "closed forms carry no stderr/trials: {l}");
    }
    assert!(!csv.contains('\r'));
    assert!(!res.is_unstable());
}

#[test]
fn csv_is_byte_identical_across_runs_and_workers() {
    let mut spec = single_point("exact, asymptotic, mc");
    let a = run_sweep(&spec).unwrap().to_csv();
    spec.mc.workers = 1;
    let b = run_sweep(&spec).unwrap().to_csv();
    spec.mc.workers = 7;
    let c = run_sweep(&spec).unwrap().to_csv();
    assert_eq!(a, b);
    assert_eq!(a, c);
    assert_eq!(a.lines().count(), 1 + 4 * 3);
    assert!(a.lines().any(|l| l.contains(",mc,") && l.ends_with(",20000")));
}

#[test]
fn fig2_exact_curves_decrease_in_gamma_t() {
    let mut spec = load_preset("fig2").unwrap();
    spec.methods = vec![Method::Exact];
    let res = run_sweep(&spec).unwrap();
    for proto in &spec.protocols {
        let ys: Vec<f64> = res.rows.iter().filter(|r| r.protocol == *proto).map(|r| r.value).collect();
        assert_eq!(ys.len(), spec.axis_values.len());
        assert!(ys.windows(2).all(|w| w[1] < w[0]), "{proto}: {ys:?}");
    }
}

#[test]
fn fig6_exact_sop_decreases_in_m() {
    let mut spec = load_preset("fig6").unwrap();
    spec.methods = vec![Method::Exact];
    let res = run_sweep(&spec).unwrap();
    let ys: Vec<f64> = res.rows.iter().map(|r| r.value).collect();
    assert_eq!(ys.len(), 4);
    assert!(ys.windows(2).all(|w| w[1] < w[0]), "{ys:?}");
}

#[test]
fn instability_is_flagged() {
    let mut spec = single_point("exact");
    spec.cancellation_limit = 1e-3;
    let res = run_sweep(&spec).unwrap();
    assert_eq!(res.flags.len(), 4);
}
