//! Check outcomes and report emission.
//!
//! A [`Gate`] holds one measured number next to the bound it must satisfy;
//! a [`CheckRecord`] groups the gates of one named check; a [`Report`]
//! carries the records of one scenario run plus an environment echo.
//!
//! The machine format is line-delimited JSON with keys emitted in sorted
//! order and floats printed with 17 significant digits, so a fixed
//! configuration yields byte-identical output on one platform. Wall-clock
//! durations appear only in the human format; everything else is shared.
//! Both formats always print the measured value and the bound together.

use std::collections::BTreeMap;
use std::fmt::Write as _;

/// Direction of a gate's comparison.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GateKind {
    /// Passes when measured <= bound (residuals, deviations, ratios).
    UpperBound,
    /// Passes when measured >= bound (positivity floors, convergence orders).
    LowerBound,
}

/// One measured quantity paired with its tolerance.
#[derive(Debug, Clone)]
pub struct Gate {
    pub name: String,
    pub measured: f64,
    pub bound: f64,
    pub kind: GateKind,
}

impl Gate {
    pub fn upper(name: impl Into<String>, measured: f64, bound: f64) -> Self {
        Gate {
            name: name.into(),
            measured,
            bound,
            kind: GateKind::UpperBound,
        }
    }

    pub fn lower(name: impl Into<String>, measured: f64, bound: f64) -> Self {
        Gate {
            name: name.into(),
            measured,
            bound,
            kind: GateKind::LowerBound,
        }
    }

    /// Boolean outcome encoded as a threshold gate: 1 passes, 0 fails.
    pub fn flag(name: impl Into<String>, ok: bool) -> Self {
        Gate::lower(name, if ok { 1.0 } else { 0.0 }, 1.0)
    }

    /// Informational value carried in the report without a pass condition
    /// (used by convergence studies for fitted orders).
    pub fn info(name: impl Into<String>, measured: f64) -> Self {
        Gate::lower(name, measured, f64::NEG_INFINITY)
    }

    /// NaN measurements fail regardless of direction.
    pub fn pass(&self) -> bool {
        match self.kind {
            GateKind::UpperBound => self.measured <= self.bound,
            GateKind::LowerBound => self.measured >= self.bound,
        }
    }
}

/// Outcome of one check.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CheckStatus {
    Pass,
    Fail,
    /// The check could not produce its gates (error return or panic).
    Error(String),
}

impl CheckStatus {
    fn label(&self) -> &'static str {
        match self {
            CheckStatus::Pass => "pass",
            CheckStatus::Fail => "fail",
            CheckStatus::Error(_) => "error",
        }
    }
}

/// Named check with its gates and outcome.
#[derive(Debug, Clone)]
pub struct CheckRecord {
    pub name: String,
    pub status: CheckStatus,
    pub gates: Vec<Gate>,
    /// Wall-clock duration; printed in the human format only, so the
    /// machine report stays byte-stable.
    pub wall_ms: u64,
}

impl CheckRecord {
    /// Derive the status from the gates. A check that produced no gates is
    /// reported as an error, not a vacuous pass.
    pub fn from_gates(name: impl Into<String>, gates: Vec<Gate>) -> Self {
        let status = if gates.is_empty() {
            CheckStatus::Error("check produced no gates".into())
        } else if gates.iter().all(Gate::pass) {
            CheckStatus::Pass
        } else {
            CheckStatus::Fail
        };
        CheckRecord {
            name: name.into(),
            status,
            gates,
            wall_ms: 0,
        }
    }

    pub fn error(name: impl Into<String>, message: impl Into<String>) -> Self {
        CheckRecord {
            name: name.into(),
            status: CheckStatus::Error(message.into()),
            gates: Vec::new(),
            wall_ms: 0,
        }
    }

    pub fn passed(&self) -> bool {
        self.status == CheckStatus::Pass
    }
}

/// Output encoding for a rendered report.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    JsonLines,
    Human,
}

/// Results of one scenario run.
#[derive(Debug, Clone)]
pub struct Report {
    /// Environment and configuration echo (sorted by construction).
    pub meta: BTreeMap<String, String>,
    pub records: Vec<CheckRecord>,
}

impl Report {
    pub fn all_pass(&self) -> bool {
        self.records.iter().all(CheckRecord::passed)
    }

    /// Names of the checks that did not pass, in run order.
    pub fn failures(&self) -> Vec<&str> {
        self.records
            .iter()
            .filter(|r| !r.passed())
            .map(|r| r.name.as_str())
            .collect()
    }

    pub fn render(&self, format: ReportFormat) -> String {
        match format {
            ReportFormat::JsonLines => self.machine_format(),
            ReportFormat::Human => self.human_format(),
        }
    }

    /// Line-delimited JSON: one meta line, then per check its gate lines
    /// followed by a summary line. Keys are written in sorted order and
    /// floats with 17 significant digits; no timing data is included.
    pub fn machine_format(&self) -> String {
        let mut out = String::new();
        let mut meta = self.meta.clone();
        meta.insert("kind".into(), "meta".into());
        out.push('{');
        for (i, (k, v)) in meta.iter().enumerate() {
            if i > 0 {
                out.push(',');
            }
            let _ = write!(out, "\"{}\":\"{}\"", json_escape(k), json_escape(v));
        }
        out.push_str("}\n");

        for rec in &self.records {
            for gate in &rec.gates {
                // Keys in sorted order: bound, check, gate, kind, measured, pass.
                let kind = match gate.kind {
                    GateKind::UpperBound => "upper",
                    GateKind::LowerBound => "lower",
                };
                let _ = write!(
                    out,
                    "{{\"bound\":{},\"check\":\"{}\",\"gate\":\"{}\",\"kind\":\"{}\",\"measured\":{},\"pass\":{}}}\n",
                    json_float(gate.bound),
                    json_escape(&rec.name),
                    json_escape(&gate.name),
                    kind,
                    json_float(gate.measured),
                    gate.pass(),
                );
            }
            // Keys in sorted order: check, error?, gates, kind, status.
            out.push('{');
            let _ = write!(out, "\"check\":\"{}\"", json_escape(&rec.name));
            if let CheckStatus::Error(msg) = &rec.status {
                let _ = write!(out, ",\"error\":\"{}\"", json_escape(msg));
            }
            let _ = write!(
                out,
                ",\"gates\":{},\"kind\":\"check\",\"status\":\"{}\"}}\n",
                rec.gates.len(),
                rec.status.label(),
            );
        }
        out
    }

    /// Terminal-oriented rendering: every gate shows its measured value
    /// next to its bound, and each check reports its wall-clock time.
    pub fn human_format(&self) -> String {
        let mut out = String::new();
        out.push_str("scenario report\n");
        for (k, v) in &self.meta {
            let _ = writeln!(out, "  {k}: {v}");
        }
        out.push('\n');
        for rec in &self.records {
            match &rec.status {
                CheckStatus::Error(msg) => {
                    let _ = writeln!(out, "ERROR {} ({} ms): {}", rec.name, rec.wall_ms, msg);
                }
                status => {
                    let _ = writeln!(
                        out,
                        "{} {} ({} gates, {} ms)",
                        if *status == CheckStatus::Pass {
                            "PASS"
                        } else {
                            "FAIL"
                        },
                        rec.name,
                        rec.gates.len(),
                        rec.wall_ms,
                    );
                }
            }
            for gate in &rec.gates {
                let op = match gate.kind {
                    GateKind::UpperBound => "<=",
                    GateKind::LowerBound => ">=",
                };
                let verdict = if gate.pass() { "" } else { "  FAIL" };
                let _ = writeln!(
                    out,
                    "  {:<40} {:>24} {} {:<24}{}",
                    gate.name,
                    human_float(gate.measured),
                    op,
                    human_float(gate.bound),
                    verdict,
                );
            }
        }
        let passed = self.records.iter().filter(|r| r.passed()).count();
        let _ = writeln!(
            out,
            "\nsummary: {passed}/{} checks passed",
            self.records.len()
        );
        out
    }
}

/// 17 significant digits, round-trippable. Non-finite values cannot be
/// JSON numbers, so they are emitted as quoted strings; they only appear
/// when a check is already failing.
fn json_float(x: f64) -> String {
    if x.is_nan() {
        "\"nan\"".into()
    } else if x == f64::INFINITY {
        "\"inf\"".into()
    } else if x == f64::NEG_INFINITY {
        "\"-inf\"".into()
    } else {
        format!("{x:.16e}")
    }
}

fn human_float(x: f64) -> String {
    if x == f64::NEG_INFINITY {
        "(info)".into()
    } else {
        format!("{x:.6e}")
    }
}

fn json_escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\r' => out.push_str("\\r"),
            '\t' => out.push_str("\\t"),
            c if (c as u32) < 0x20 => {
                let _ = write!(out, "\\u{:04x}", c as u32);
            }
            c => out.push(c),
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gate_directions_and_nan() {
        assert!(Gate::upper("r", 1e-10, 1e-9).pass());
        assert!(!Gate::upper("r", 2e-9, 1e-9).pass());
        assert!(Gate::lower("f", -1e-12, -1e-10).pass());
        assert!(!Gate::lower("f", -1e-8, -1e-10).pass());
        assert!(!Gate::upper("r", f64::NAN, 1.0).pass());
        assert!(!Gate::lower("r", f64::NAN, 0.0).pass());
        assert!(Gate::flag("ok", true).pass());
        assert!(!Gate::flag("ok", false).pass());
        assert!(Gate::info("order", -3.0).pass());
    }

    #[test]
    fn empty_gate_list_is_an_error_not_a_pass() {
        let rec = CheckRecord::from_gates("hollow", Vec::new());
        assert!(matches!(rec.status, CheckStatus::Error(_)));
        assert!(!rec.passed());
    }

    #[test]
    fn machine_format_is_stable_and_sorted() {
        let mut meta = BTreeMap::new();
        meta.insert("zeta".to_string(), "z".to_string());
        meta.insert("alpha".to_string(), "a".to_string());
        let report = Report {
            meta,
            records: vec![CheckRecord::from_gates(
                "demo",
                vec![Gate::upper("res", 0.625, 1e-2)],
            )],
        };
        let a = report.machine_format();
        let b = report.machine_format();
        assert_eq!(a, b);
        // Meta keys sorted, with the kind marker in alphabetical position.
        let first = a.lines().next().unwrap();
        assert_eq!(
            first,
            "{\"alpha\":\"a\",\"kind\":\"meta\",\"zeta\":\"z\"}"
        );
        let gate_line = a.lines().nth(1).unwrap();
        assert!(gate_line.starts_with("{\"bound\":1.0000000000000000e-2"));
        assert!(gate_line.contains("\"measured\":6.2500000000000000e-1"));
        assert!(gate_line.ends_with("\"pass\":false}"));
        assert!(a.lines().nth(2).unwrap().contains("\"status\":\"fail\""));
    }

    #[test]
    fn machine_format_excludes_wall_time() {
        let mut rec = CheckRecord::from_gates("demo", vec![Gate::flag("ok", true)]);
        rec.wall_ms = 1234;
        let report = Report {
            meta: BTreeMap::new(),
            records: vec![rec],
        };
        assert!(!report.machine_format().contains("1234"));
        assert!(report.human_format().contains("1234 ms"));
    }

    #[test]
    fn human_format_pairs_measured_with_bound() {
        let report = Report {
            meta: BTreeMap::new(),
            records: vec![CheckRecord::from_gates(
                "demo",
                vec![Gate::upper("residual", 3.0e-7, 1.0e-6)],
            )],
        };
        let text = report.human_format();
        assert!(text.contains("3.000000e-7"));
        assert!(text.contains("1.000000e-6"));
        assert!(text.contains("PASS demo"));
    }

    #[test]
    fn errors_render_in_both_formats() {
        let report = Report {
            meta: BTreeMap::new(),
            records: vec![CheckRecord::error("broken", "boom \"quoted\"")],
        };
        assert!(report
            .machine_format()
            .contains("\"error\":\"boom \\\"quoted\\\"\""));
        assert!(report.human_format().contains("ERROR broken"));
        assert!(!report.all_pass());
        assert_eq!(report.failures(), vec!["broken"]);
    }
}
