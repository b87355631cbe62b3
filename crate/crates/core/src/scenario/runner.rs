//! Scenario execution: run the configured checks in declared order, time
//! them, capture panics as per-check errors, refine for convergence
//! studies, and render the optional CSV dumps.

use std::cell::Cell;
use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::panic::{self, AssertUnwindSafe};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{mpsc, Once};
use std::time::Instant;

use super::checks::run_named_check;
use super::config::{DumpKind, ScenarioConfig};
use super::report::{CheckRecord, Gate, GateKind, Report};
use crate::calderon::assemble_calderon_closed_form;
use crate::error::Result;
use crate::geometry::build_model;
use crate::kernels;
use crate::kms::kms_covariances;
use crate::operators::{assemble_epsilon_squared, spectral_decompose};

/// Run every configured check in declared order and collect one record per
/// check. A check that returns an error or panics is recorded as an error
/// and the remaining checks still run.
pub fn run_scenario(cfg: &ScenarioConfig) -> Report {
    let records = with_quiet_panics(|| {
        cfg.checks
            .iter()
            .map(|name| run_one(name, cfg))
            .collect::<Vec<_>>()
    });
    Report {
        meta: meta_block(cfg),
        records,
    }
}

fn run_one(name: &str, cfg: &ScenarioConfig) -> CheckRecord {
    let started = Instant::now();
    let outcome = panic::catch_unwind(AssertUnwindSafe(|| run_named_check(name, cfg)));
    let mut record = match outcome {
        Ok(Ok(gates)) => CheckRecord::from_gates(name, gates),
        Ok(Err(e)) => CheckRecord::error(name, e.to_string()),
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| (*s).to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "opaque panic payload".into());
            CheckRecord::error(name, format!("panicked: {msg}"))
        }
    };
    record.wall_ms = started.elapsed().as_millis() as u64;
    record
}

fn meta_block(cfg: &ScenarioConfig) -> BTreeMap<String, String> {
    let mut meta = BTreeMap::new();
    meta.insert("arch".into(), std::env::consts::ARCH.into());
    meta.insert("os".into(), std::env::consts::OS.into());
    meta.insert("package".into(), env!("CARGO_PKG_NAME").into());
    meta.insert("version".into(), env!("CARGO_PKG_VERSION").into());
    meta.insert("checks".into(), cfg.checks.join(","));
    meta.insert("config".into(), cfg.echo());
    meta
}

// Panic output from expected-fail probes inside checks would interleave
// with report rendering, so panics raised while a scenario thread runs are
// swallowed (catch_unwind still records them). The hook is installed once
// and filters on a thread-local flag, leaving every other thread's panics
// (including the test harness's) on the previous hook.
thread_local! {
    static QUIET_PANICS: Cell<bool> = const { Cell::new(false) };
}
static HOOK: Once = Once::new();

fn with_quiet_panics<T>(f: impl FnOnce() -> T) -> T {
    HOOK.call_once(|| {
        let prev = panic::take_hook();
        panic::set_hook(Box::new(move |info| {
            if !QUIET_PANICS.with(Cell::get) {
                prev(info);
            }
        }));
    });
    QUIET_PANICS.with(|q| q.set(true));
    let out = f();
    QUIET_PANICS.with(|q| q.set(false));
    out
}

/// Configuration for refinement level `level`: node count and tau
/// resolution double per level (spacing halves on a fixed domain), and the
/// frequency-series cap scales along so the series route keeps pace.
fn refined(cfg: &ScenarioConfig, level: usize) -> ScenarioConfig {
    let mut out = cfg.clone();
    let factor = 1usize << level;
    out.model.nodes = (cfg.model.nodes + 1) * factor - 1;
    out.run.n_tau = cfg.run.n_tau * factor;
    out.run.series_cap = cfg.run.series_cap * factor;
    out
}

/// Worker cap for convergence studies: the `HC_THREADS` variable when set
/// to a positive integer, otherwise the machine's available parallelism.
fn worker_cap() -> usize {
    parse_thread_cap(std::env::var("HC_THREADS").ok().as_deref()).unwrap_or_else(|| {
        std::thread::available_parallelism()
            .map(|n| n.get())
            .unwrap_or(1)
    })
}

fn parse_thread_cap(var: Option<&str>) -> Option<usize> {
    var.and_then(|s| s.trim().parse::<usize>().ok())
        .filter(|&v| v >= 1)
}

/// Run the scenario at `levels` successive refinements and append a final
/// report of observed convergence orders.
///
/// Levels run on up to `HC_THREADS` worker threads (each level's checks
/// stay sequential); reports are assembled in level order, so the output
/// is deterministic regardless of the worker count. Records are renamed
/// `check@L{level}`. The trailing report estimates, for every upper-bound
/// gate with strictly positive measurements on all levels, the least-squares
/// slope of log2(measured) against level; the estimates are informational
/// gates that never fail, so a convergence run's exit status is decided by
/// the per-level gates alone.
pub fn run_convergence(cfg: &ScenarioConfig, levels: usize) -> Vec<Report> {
    let cfgs: Vec<ScenarioConfig> = (0..levels.max(1)).map(|l| refined(cfg, l)).collect();
    let workers = worker_cap().min(cfgs.len()).max(1);
    let next = AtomicUsize::new(0);
    let (tx, rx) = mpsc::channel::<(usize, Report)>();

    std::thread::scope(|scope| {
        for _ in 0..workers {
            let tx = tx.clone();
            let next = &next;
            let cfgs = &cfgs;
            scope.spawn(move || loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                if i >= cfgs.len() {
                    break;
                }
                let mut rep = run_scenario(&cfgs[i]);
                rep.meta.insert("level".into(), i.to_string());
                for rec in &mut rep.records {
                    rec.name = format!("{}@L{i}", rec.name);
                }
                if tx.send((i, rep)).is_err() {
                    break;
                }
            });
        }
    });
    drop(tx);

    let mut slots: Vec<Option<Report>> = (0..cfgs.len()).map(|_| None).collect();
    for (i, rep) in rx {
        slots[i] = Some(rep);
    }
    let mut reports: Vec<Report> = slots
        .into_iter()
        .map(|s| s.expect("every level reports once"))
        .collect();
    let orders = order_report(&reports);
    reports.push(orders);
    reports
}

/// Least-squares slope of -log2(measured) against level index.
fn observed_order(values: &[f64]) -> f64 {
    let n = values.len() as f64;
    let (mut sx, mut sy, mut sxx, mut sxy) = (0.0, 0.0, 0.0, 0.0);
    for (level, &v) in values.iter().enumerate() {
        let x = level as f64;
        let y = v.log2();
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    -(n * sxy - sx * sy) / (n * sxx - sx * sx)
}

fn order_report(reports: &[Report]) -> Report {
    let mut gates: Vec<Gate> = Vec::new();
    if let Some(first) = reports.first() {
        for (ri, rec) in first.records.iter().enumerate() {
            let base_name = rec.name.split('@').next().unwrap_or(&rec.name);
            for (gi, gate) in rec.gates.iter().enumerate() {
                if gate.kind != GateKind::UpperBound {
                    continue;
                }
                let series: Vec<f64> = reports
                    .iter()
                    .filter_map(|rep| {
                        rep.records
                            .get(ri)
                            .and_then(|r| r.gates.get(gi))
                            .map(|g| g.measured)
                    })
                    .collect();
                // An order is only meaningful when every level produced the
                // gate and nothing hit exact zero or flipped sign.
                if series.len() == reports.len() && series.iter().all(|&v| v > 0.0) {
                    gates.push(Gate::info(
                        format!("{base_name}.{}", gate.name),
                        observed_order(&series),
                    ));
                }
            }
        }
    }
    let estimated = gates.len();
    gates.push(Gate::info("gates_estimated", estimated as f64));

    let mut meta = BTreeMap::new();
    meta.insert("kind_of_run".into(), "convergence-orders".into());
    meta.insert("levels".into(), reports.len().to_string());
    meta.insert("package".into(), env!("CARGO_PKG_NAME").into());
    meta.insert("version".into(), env!("CARGO_PKG_VERSION").into());
    Report {
        meta,
        records: vec![CheckRecord::from_gates("observed_orders", gates)],
    }
}

/// Render one requested dump as `(file name, CSV text)`. Floats carry 17
/// significant digits so round-trips are exact.
pub fn render_dump(cfg: &ScenarioConfig, kind: DumpKind) -> Result<(String, String)> {
    let model = build_model(&cfg.model_params())?;
    let spec = spectral_decompose(&assemble_epsilon_squared(&model)?)?;
    let beta = model.beta;
    let mut out = String::new();
    match kind {
        DumpKind::Eigenvalues => {
            out.push_str("k,lambda,mu\n");
            let mu = spec.frequencies()?;
            for k in 0..spec.n() {
                let _ = writeln!(out, "{k},{:.16e},{:.16e}", spec.eigvals()[k], mu[k]);
            }
        }
        DumpKind::Kernels => {
            out.push_str("mode,tau,value\n");
            let mu = spec.frequencies()?;
            let dtau = beta / cfg.run.n_tau as f64;
            for k in 0..spec.n() {
                for j in 0..cfg.run.n_tau {
                    let tau = j as f64 * dtau;
                    let _ = writeln!(
                        out,
                        "{k},{tau:.16e},{:.16e}",
                        kernels::kernel_f(beta, mu[k], tau)
                    );
                }
            }
        }
        DumpKind::Projector => {
            out.push_str("row,col,value\n");
            let proj =
                assemble_calderon_closed_form(&spec, &model.lapse, model.grid.weights(), beta)?;
            let m = proj.matrix();
            for r in 0..m.nrows() {
                for c in 0..m.ncols() {
                    let _ = writeln!(out, "{r},{c},{:.16e}", m[(r, c)]);
                }
            }
        }
        DumpKind::Covariance => {
            out.push_str("row,col,value\n");
            let pair = kms_covariances(&spec, &model.lapse, model.grid.weights(), beta)?;
            let m = pair.c_plus();
            for r in 0..m.nrows() {
                for c in 0..m.ncols() {
                    let _ = writeln!(out, "{r},{c},{:.16e}", m[(r, c)]);
                }
            }
        }
    }
    Ok((kind.file_name(), out))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::report::CheckStatus;

    fn tiny_cfg(checks: &[&str]) -> ScenarioConfig {
        let mut cfg = ScenarioConfig::default();
        cfg.model.nodes = 12;
        cfg.run.n_tau = 64;
        cfg.run.series_cap = 64;
        cfg.run.probes = 4;
        cfg.run.rp_fields = 8;
        cfg.checks = checks.iter().map(|s| s.to_string()).collect();
        cfg
    }

    #[test]
    fn scenario_runs_checks_in_declared_order() {
        let cfg = tiny_cfg(&["hawking_gate", "scalar_fixture"]);
        let report = run_scenario(&cfg);
        let names: Vec<&str> = report.records.iter().map(|r| r.name.as_str()).collect();
        assert_eq!(names, ["hawking_gate", "scalar_fixture"]);
        assert!(report.all_pass());
        assert!(report.meta["config"].contains("nodes=12"));
    }

    #[test]
    fn machine_rendering_is_deterministic_across_runs() {
        let cfg = tiny_cfg(&["scalar_fixture", "jump_identity"]);
        let a = run_scenario(&cfg).machine_format();
        let b = run_scenario(&cfg).machine_format();
        assert_eq!(a, b);
    }

    #[test]
    fn panicking_check_is_recorded_and_the_run_continues() {
        let mut cfg = tiny_cfg(&["scalar_fixture", "hawking_gate"]);
        // Removing a tolerance key makes the lookup panic inside the check.
        cfg.tolerances.remove("scalar_fixture.abs").unwrap();
        let report = run_scenario(&cfg);
        assert!(matches!(report.records[0].status, CheckStatus::Error(_)));
        assert!(report.records[1].passed());
        assert!(!report.all_pass());
    }

    #[test]
    fn failed_gate_fails_the_report() {
        let mut cfg = tiny_cfg(&["projector_identification"]);
        cfg.tolerances
            .insert("projector_identification.green_baseline".into(), 1e-300);
        let report = run_scenario(&cfg);
        assert!(!report.all_pass());
        assert_eq!(report.failures(), vec!["projector_identification"]);
    }

    #[test]
    fn convergence_produces_level_reports_and_orders() {
        let cfg = tiny_cfg(&["jump_identity"]);
        let reports = run_convergence(&cfg, 2);
        assert_eq!(reports.len(), 3);
        assert_eq!(reports[0].records[0].name, "jump_identity@L0");
        assert_eq!(reports[1].records[0].name, "jump_identity@L1");
        assert_eq!(reports[1].meta["level"], "1");
        let orders = &reports[2];
        assert_eq!(orders.records[0].name, "observed_orders");
        assert!(orders.records[0].passed());
        // Informational gates never gate the exit status.
        assert!(orders.all_pass());
    }

    #[test]
    fn refinement_scales_the_grid_and_the_series() {
        let cfg = tiny_cfg(&["scalar_fixture"]);
        let fine = refined(&cfg, 2);
        assert_eq!(fine.model.nodes, 51);
        assert_eq!(fine.run.n_tau, 256);
        assert_eq!(fine.run.series_cap, 256);
        assert_eq!(refined(&cfg, 0).model.nodes, cfg.model.nodes);
    }

    #[test]
    fn thread_cap_parsing() {
        assert_eq!(parse_thread_cap(Some("3")), Some(3));
        assert_eq!(parse_thread_cap(Some(" 8 ")), Some(8));
        assert_eq!(parse_thread_cap(Some("0")), None);
        assert_eq!(parse_thread_cap(Some("lots")), None);
        assert_eq!(parse_thread_cap(None), None);
    }

    #[test]
    fn eigenvalue_dump_has_one_row_per_mode() {
        let cfg = tiny_cfg(&["scalar_fixture"]);
        let (name, csv) = render_dump(&cfg, DumpKind::Eigenvalues).unwrap();
        assert_eq!(name, "eigenvalues.csv");
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "k,lambda,mu");
        assert_eq!(lines.len(), 1 + 12);
        // Frequencies are sorted and strictly positive.
        let first: f64 = lines[1].split(',').nth(2).unwrap().parse().unwrap();
        assert!(first > 0.0);
    }

    #[test]
    fn projector_dump_covers_the_full_matrix() {
        let mut cfg = tiny_cfg(&["scalar_fixture"]);
        cfg.model.nodes = 6;
        let (name, csv) = render_dump(&cfg, DumpKind::Projector).unwrap();
        assert_eq!(name, "projector.csv");
        assert_eq!(csv.lines().count(), 1 + 24 * 24);
    }
}
