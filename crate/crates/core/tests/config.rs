use gsqg::config::{parse_config, preset, InitialCondition, RunConfig, Task, PRESET_NAMES};
use gsqg::diagnostics::DiagnosticsConfig;
use gsqg::evolve::{DtPolicy, StepperConfig};
use gsqg::rhs::RhsMode;
use gsqg::Error;
use proptest::prelude::*;

fn initial() -> impl Strategy<Value = InitialCondition> {
    prop_oneof![
        (-1e-2..1e-2f64, 0.1..5.0f64, proptest::option::of(0.0..10.0f64))
            .prop_map(|(amplitude, width, center)| InitialCondition::Gaussian { amplitude, width, center }),
        (-1e-2..1e-2f64, 0i64..16).prop_map(|(amplitude, wavenumber)| InitialCondition::Cosine { amplitude, wavenumber }),
        (1e-4..1e-2f64, 1usize..16).prop_map(|(amplitude, band)| InitialCondition::Random { amplitude, band }),
    ]
}

fn task() -> impl Strategy<Value = Task> {
    prop_oneof![
        Just(Task::Evolve),
        proptest::option::of(1.0..5.0f64).prop_map(|offset| Task::Kinematic { offset }),
        (
            proptest::collection::vec(1.01..1.99f64, 1..4),
            proptest::collection::vec(0.1..5.0f64, 1..4)
        )
            .prop_map(|(alphas, xis)| Task::ResonanceProbe { alphas, xis }),
    ]
}

fn stepper() -> impl Strategy<Value = StepperConfig> {
    (
        prop_oneof![Just(DtPolicy::Auto), (0.01..1.0f64).prop_map(DtPolicy::Fixed)],
        0.0..100.0f64,
        prop_oneof![
            Just(RhsMode::Contour),
            Just(RhsMode::CubicSpectral),
            Just(RhsMode::CubicConvolutionOracle),
            Just(RhsMode::Linear)
        ],
        0.1..1.0f64,
        proptest::option::of(1usize..100),
    )
        .prop_map(|(dt, t_end, mode, guard, every)| {
            let mut s = StepperConfig::new(dt, t_end, mode);
            s.slope_guard = guard;
            s.checkpoint_every = every;
            s
        })
}

fn config() -> impl Strategy<Value = RunConfig> {
    (
        1.01..1.99f64,
        -2.0..2.0f64,
        (16usize..64).prop_map(|h| 2 * h),
        0.5..500.0f64,
        initial(),
        task(),
        stepper(),
        (0.1..10.0f64, proptest::collection::vec(0.0..6.0f64, 0..4), proptest::option::of((1.0..5.0f64, 6.0..50.0f64))),
        any::<u64>(),
    )
        .prop_map(|(alpha, theta, n, length, initial, task, stepper, (interval, s_list, window), seed)| {
            let doc = serde_json::json!({
                "params": {"alpha": alpha, "theta": theta},
                "grid": {"n_points": n, "length": length},
                "initial": serde_json::to_value(&initial).unwrap(),
            });
            let mut cfg: RunConfig = serde_json::from_value(doc).unwrap();
            cfg.task = task;
            cfg.stepper = stepper;
            cfg.diagnostics = DiagnosticsConfig {
                sample_interval: interval,
                sobolev_s: s_list,
                decay_window: window,
                ..DiagnosticsConfig::default()
            };
            cfg.seed = seed;
            cfg
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]
    #[test]
    fn emit_then_parse_is_identity(cfg in config()) {
        let text = cfg.emit();
        let back = parse_config(&text).unwrap();
        prop_assert_eq!(&back, &cfg);
        prop_assert_eq!(back.hash(), cfg.hash());
    }
}

#[test]
fn minimal_document_is_completed_and_echoed() {
    let cfg = parse_config(
        r#"{"params": {"alpha": 1.5}, "grid": {"n_points": 32, "length": 6.0},
            "initial": {"kind": "cosine", "amplitude": 0.01, "wavenumber": 2}}"#,
    )
    .unwrap();
    let echoed: serde_json::Value = serde_json::from_str(&cfg.emit()).unwrap();
    for key in ["params", "grid", "initial", "task", "stepper", "diagnostics", "output", "seed"] {
        assert!(echoed.get(key).is_some(), "{key} missing from echo");
    }
    assert_eq!(echoed["stepper"]["slope_guard"], 0.5);
    assert_eq!(echoed["task"]["kind"], "evolve");
}

#[test]
fn alpha_two_is_rejected_by_name() {
    let err = parse_config(
        r#"{"params": {"alpha": 2.0}, "grid": {"n_points": 32, "length": 6.0},
            "initial": {"kind": "cosine", "amplitude": 0.01, "wavenumber": 2}}"#,
    )
    .unwrap_err();
    let Error::Validation(errs) = err else { panic!("not a validation error") };
    assert_eq!(errs.len(), 1);
    assert!(errs[0].contains("params.alpha") && errs[0].contains("(1, 2)"));
}

#[test]
fn every_violation_is_listed() {
    let err = parse_config(
        r#"{"params": {"alpha": 0.5}, "grid": {"n_points": 31, "length": 0.0},
            "initial": {"kind": "gaussian", "amplitude": 0.01, "width": -1.0, "sigma": 2},
            "stepper": {"dt": {"fixed": -1.0}, "t_end": 1.0, "rhs_mode": "linear"},
            "diagnostics": {"sample_interval": 0.0}}"#,
    )
    .unwrap_err();
    let Error::Validation(errs) = err else { panic!("not a validation error") };
    for needle in ["initial.sigma", "params.alpha", "grid.n_points", "grid.length", "initial.width", "sample_interval"] {
        assert!(errs.iter().any(|e| e.contains(needle)), "{needle} not reported in {errs:?}");
    }
}

#[test]
fn malformed_documents_are_validation_errors() {
    for doc in ["not json", "[1, 2]", r#"{"grid": {"n_points": 8, "length": 1.0}}"#,
                r#"{"params": {"alpha": 1.5}, "grid": {"n_points": 8, "length": 1.0}, "initial": {"kind": "square"}}"#] {
        assert!(matches!(parse_config(doc), Err(Error::Validation(_))), "{doc}");
    }
}

#[test]
fn presets_match_their_documented_setups() {
    for name in PRESET_NAMES {
        preset(name).unwrap();
    }
    let c = preset("conservation").unwrap();
    assert_eq!((c.params.alpha, c.grid.n_points), (1.5, 512));
    assert!((c.grid.length - 100.0 * std::f64::consts::PI).abs() < 1e-12);
    assert!(matches!(c.initial, InitialCondition::Gaussian { amplitude, .. } if amplitude == 1e-3));
    let d = preset("decay").unwrap();
    assert_eq!((d.params.alpha, d.grid.n_points), (1.5, 2048));
    assert!((d.grid.length - 400.0 * std::f64::consts::PI).abs() < 1e-12);
    let k = preset("kinematic").unwrap();
    assert_eq!(k.grid.n_points, 256);
    assert!(matches!(k.initial, InitialCondition::Cosine { amplitude, .. } if amplitude == 1e-2));
    assert!(matches!(preset("resonance-probe").unwrap().task, Task::ResonanceProbe { .. }));
}

#[test]
fn random_initial_data_follows_the_seed() {
    let mut cfg = parse_config(
        r#"{"params": {"alpha": 1.5}, "grid": {"n_points": 64, "length": 10.0},
            "initial": {"kind": "random", "amplitude": 0.01, "band": 8}, "seed": 3}"#,
    )
    .unwrap();
    let a = cfg.initial_state().unwrap();
    assert!((a.max_abs() - 0.01).abs() < 1e-15);
    assert_eq!(cfg.initial_state().unwrap(), a);
    cfg.seed = 4;
    assert_ne!(cfg.initial_state().unwrap(), a);
}
