//! End-to-end acceptance sweep: every verification lane runs at the
//! default scenario (kappa = 1, L = 10, N = 400, m = 1, N_tau = 256,
//! series cap 512, seed 7) with the default gate bounds. One test per
//! lane, so the harness prints one pass/fail line per lane; run with
//! `--nocapture` to see each gate's measured value against its bound.

use hc_core::scenario::{run_named_check, ScenarioConfig, CHECK_NAMES};

fn run_lane(name: &str) {
    let cfg = ScenarioConfig::default();
    let gates = run_named_check(name, &cfg)
        .unwrap_or_else(|e| panic!("{name}: check failed to run: {e}"));
    assert!(!gates.is_empty(), "{name}: no gates produced");
    let mut all = true;
    for g in &gates {
        println!(
            "  {name:<26} {:<28} measured {:>13.6e}  bound {:>10.3e}  {}",
            g.name,
            g.measured,
            g.bound,
            if g.pass() { "ok" } else { "FAIL" }
        );
        all &= g.pass();
    }
    println!("{}: {name}", if all { "PASS" } else { "FAIL" });
    assert!(all, "{name}: at least one gate failed (see lines above)");
}

#[test]
fn state_conditions() {
    run_lane("state_conditions");
}

#[test]
fn scalar_fixture() {
    run_lane("scalar_fixture");
}

#[test]
fn projector_identification() {
    run_lane("projector_identification");
}

#[test]
fn green_oracles() {
    run_lane("green_oracles");
}

#[test]
fn reflection_positivity() {
    run_lane("reflection_positivity");
}

#[test]
fn jump_identity() {
    run_lane("jump_identity");
}

#[test]
fn hawking_gate() {
    run_lane("hawking_gate");
}

#[test]
fn hhi_restriction() {
    run_lane("hhi_restriction");
}

#[test]
fn hhi_purity_positivity() {
    run_lane("hhi_purity_positivity");
}

#[test]
fn symbol_proxy() {
    run_lane("symbol_proxy");
}

#[test]
fn lane_list_is_exactly_the_default_check_list() {
    let cfg = ScenarioConfig::default();
    assert_eq!(cfg.checks, CHECK_NAMES.to_vec());
    assert_eq!(CHECK_NAMES.len(), 10);
}
