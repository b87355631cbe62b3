//! End-to-end tests of the `hc` binary: exit codes, output stability,
//! config diagnostics, dump selection, and convergence output.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn hc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hc"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn write_config(dir: &Path, body: &str) -> String {
    let path = dir.join("scenario.toml");
    fs::write(&path, body).unwrap();
    path.to_str().unwrap().to_string()
}

const TINY: &str = "checks = [\"scalar_fixture\", \"hawking_gate\"]\n\
                    [model]\nnodes = 12\n\
                    [run]\nn_tau = 64\nseries_cap = 64\n";

#[test]
fn check_passes_and_is_byte_stable() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), TINY);
    let a = hc(&["check", "--config", &cfg]);
    let b = hc(&["check", "--config", &cfg]);
    assert!(a.status.success(), "{}", String::from_utf8_lossy(&a.stderr));
    assert_eq!(a.stdout, b.stdout, "machine report must be byte-stable");
    let text = String::from_utf8(a.stdout).unwrap();
    assert!(text.contains("\"kind\":\"meta\""));
    assert!(text.contains("\"check\":\"hawking_gate\""));
    // Every line is a JSON object.
    assert!(text.lines().all(|l| l.starts_with('{') && l.ends_with('}')));
}

#[test]
fn failing_gate_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "checks = [\"scalar_fixture\"]\n\
         [model]\nnodes = 12\n\
         [run]\nn_tau = 64\nseries_cap = 64\n\
         [tolerances]\nscalar_fixture.abs = 1e-30\n",
    );
    let out = hc(&["check", "--config", &cfg]);
    assert_eq!(out.status.code(), Some(1));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("\"status\":\"fail\""), "{text}");
}

#[test]
fn human_format_prints_a_summary() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), TINY);
    let out = hc(&["check", "--config", &cfg, "--format", "human"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("summary: 2/2 checks passed"), "{text}");
    assert!(text.contains("PASS scalar_fixture"), "{text}");
}

#[test]
fn unknown_config_key_exits_two_with_suggestion() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "[modle]\nkappa = 1.0\n");
    let out = hc(&["check", "--config", &cfg]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("modle"), "{err}");
    assert!(err.contains("did you mean \"model\""), "{err}");
}

#[test]
fn negative_beta_names_the_key_path() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "[run]\nbeta = -1\n");
    let out = hc(&["check", "--config", &cfg]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("run.beta"), "{err}");
}

#[test]
fn off_temperature_extension_records_a_conic_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "checks = [\"hhi_restriction\"]\n\
         [model]\nnodes = 24\n\
         [run]\nbeta = 3.14159\nn_tau = 64\nseries_cap = 64\nprobes = 4\n",
    );
    let out = hc(&["check", "--config", &cfg]);
    assert_eq!(out.status.code(), Some(1));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("\"status\":\"error\""), "{text}");
    assert!(text.contains("conic singularity"), "{text}");
}

#[test]
fn missing_config_file_exits_two() {
    let out = hc(&["check", "--config", "/nonexistent/scenario.toml"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn dump_writes_requested_files_only() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "checks = [\"scalar_fixture\"]\n\
         [model]\nnodes = 12\n\
         [run]\nn_tau = 64\nseries_cap = 64\n\
         [output]\ndumps = [\"eigenvalues\"]\n",
    );
    let out_dir = dir.path().join("dumps");
    let out = hc(&[
        "dump",
        "--config",
        &cfg,
        "--dump",
        "kernels",
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let eig = fs::read_to_string(out_dir.join("eigenvalues.csv")).unwrap();
    assert!(eig.starts_with("k,lambda,mu\n"));
    assert_eq!(eig.lines().count(), 1 + 12);
    let ker = fs::read_to_string(out_dir.join("kernels.csv")).unwrap();
    assert!(ker.starts_with("mode,tau,value\n"));
    // Nothing beyond the two requested dumps.
    assert_eq!(fs::read_dir(&out_dir).unwrap().count(), 2);
}

#[test]
fn dump_without_a_request_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), TINY);
    let out = hc(&["dump", "--config", &cfg]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("no dumps requested"), "{err}");
}

#[test]
fn unknown_dump_name_lists_the_valid_kinds() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), TINY);
    let out = hc(&["dump", "--config", &cfg, "--dump", "eigenvalue"]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("eigenvalues"), "{err}");
}

#[test]
fn converge_emits_level_reports_and_orders() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "checks = [\"jump_identity\"]\n\
         [model]\nnodes = 12\n\
         [run]\nn_tau = 64\nseries_cap = 64\n",
    );
    let out = hc(&["converge", "--config", &cfg, "--refine-levels", "2"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("jump_identity@L0"), "{text}");
    assert!(text.contains("jump_identity@L1"), "{text}");
    assert!(text.contains("observed_orders"), "{text}");
}

#[test]
fn converge_rejects_silly_level_counts() {
    let out = hc(&["converge", "--refine-levels", "0"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn check_writes_the_report_when_out_is_given() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), TINY);
    let out_dir = dir.path().join("reports");
    let out = hc(&[
        "check",
        "--config",
        &cfg,
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let written = fs::read_to_string(out_dir.join("report.jsonl")).unwrap();
    assert_eq!(written, String::from_utf8(out.stdout).unwrap());
}
