//! Property tests for the scenario layer's stable surfaces: report
//! rendering, configuration validation, and check determinism.

use std::collections::BTreeMap;

use proptest::prelude::*;

use hc_core::scenario::{run_named_check, Gate, Report, ScenarioConfig};
use hc_core::{CheckRecord, HcError};

fn finite_f64() -> impl Strategy<Value = f64> {
    prop::num::f64::NORMAL | prop::num::f64::ZERO
}

proptest! {
    /// Machine rendering is a pure function of the report: rendering twice
    /// yields identical bytes, and the line count is exactly
    /// 1 (meta) + gates + checks.
    #[test]
    fn machine_rendering_is_stable_and_line_exact(
        names in prop::collection::vec("[a-z_]{1,12}", 1..5),
        measured in prop::collection::vec(finite_f64(), 1..5),
        bound in finite_f64(),
    ) {
        let n = names.len().min(measured.len());
        let gates: Vec<Gate> = (0..n)
            .map(|i| Gate::upper(names[i].clone(), measured[i], bound))
            .collect();
        let record = CheckRecord::from_gates("lane", gates);
        let report = Report {
            meta: BTreeMap::from([("config".to_string(), "x".to_string())]),
            records: vec![record],
        };
        let a = report.machine_format();
        let b = report.machine_format();
        prop_assert_eq!(&a, &b);
        prop_assert_eq!(a.lines().count(), 1 + n + 1);
    }

    /// Gate names containing JSON-hostile characters never break the
    /// one-line-per-record invariant of the machine format.
    #[test]
    fn hostile_gate_names_stay_on_one_line(name in ".{0,24}") {
        let record = CheckRecord::from_gates(
            "lane",
            vec![Gate::upper(name, 1.0, 2.0)],
        );
        let report = Report {
            meta: BTreeMap::new(),
            records: vec![record],
        };
        let rendered = report.machine_format();
        prop_assert_eq!(rendered.lines().count(), 1 + 1 + 1);
        let braced = rendered
            .lines()
            .all(|l| l.starts_with('{') && l.ends_with('}'));
        prop_assert!(braced);
    }

    /// Valid model/run numbers round-trip through the TOML front end.
    #[test]
    fn valid_configs_parse_and_echo(
        kappa in 0.1f64..10.0,
        length in 1.0f64..50.0,
        nodes in 2usize..400,
        n_tau in 24usize..256,
        seed in 0u64..1_000_000,
    ) {
        // The grammar requires an even count, and the default check list
        // includes the traced-response assembly, which needs at least 48.
        let n_tau = 2 * n_tau;
        let text = format!(
            "[model]\nkappa = {kappa}\nlength = {length}\nnodes = {nodes}\n\n\
             [run]\nn_tau = {n_tau}\nseed = {seed}\nseries_cap = {}\n",
            8 * n_tau
        );
        let cfg = ScenarioConfig::from_toml_str(&text).unwrap();
        prop_assert_eq!(cfg.model.nodes, nodes);
        prop_assert_eq!(cfg.run.n_tau, n_tau);
        prop_assert_eq!(cfg.run.seed, seed);
        // The echo is deterministic and carries the overridden numbers.
        prop_assert_eq!(cfg.echo(), cfg.echo());
        let wanted = format!("nodes={nodes}");
        prop_assert!(cfg.echo().contains(&wanted));
        // Smooth-extension temperature follows the surface-gravity rate.
        let hawking_defect = (cfg.beta_value() * kappa - 2.0 * std::f64::consts::PI).abs();
        prop_assert!(hawking_defect < 1e-12);
    }

    /// Any unknown key, anywhere, is rejected rather than ignored.
    #[test]
    fn unknown_keys_are_rejected(key in "[a-z]{3,10}") {
        prop_assume!(!["model", "run", "checks", "tolerances", "output"].contains(&key.as_str()));
        let err = ScenarioConfig::from_toml_str(&format!("[{key}]\nx = 1\n")).unwrap_err();
        match err {
            HcError::InvalidConfig { violations } => {
                prop_assert!(violations.iter().any(|v| v.contains(&key)));
            }
            other => prop_assert!(false, "expected InvalidConfig, got {other}"),
        }
    }

    /// Nonpositive or non-finite tolerance overrides never validate.
    #[test]
    fn negative_tolerances_are_rejected(value in -1e6f64..-1e-12) {
        let text = format!("[tolerances]\nscalar_fixture.abs = {value}\n");
        prop_assert!(ScenarioConfig::from_toml_str(&text).is_err());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    /// A check is a pure function of its configuration: the same seed
    /// reproduces every measured number bit for bit.
    #[test]
    fn checks_are_deterministic_in_the_seed(seed in 0u64..1_000) {
        let mut cfg = ScenarioConfig::default();
        cfg.model.nodes = 12;
        cfg.run.n_tau = 64;
        cfg.run.seed = seed;
        let a = run_named_check("jump_identity", &cfg).unwrap();
        let b = run_named_check("jump_identity", &cfg).unwrap();
        for (x, y) in a.iter().zip(&b) {
            prop_assert_eq!(x.measured.to_bits(), y.measured.to_bits());
        }
    }
}
