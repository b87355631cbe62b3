//! Scenario configuration: TOML grammar, strict validation, tolerances.
//!
//! A configuration file has up to five parts, all optional (missing keys
//! take the documented defaults):
//!
//! ```toml
//! [model]
//! kappa = 1.0        # surface gravity (> 0)
//! length = 10.0      # wedge depth (> 0)
//! nodes = 400        # interior grid nodes (2..=2000)
//! mass = 1.0         # constant potential (> 0)
//! lapse = "linear"   # "linear" | "sine" | "tanh"
//!
//! [run]
//! beta = "hawking"   # "hawking" or a positive number
//! n_tau = 256        # even tau nodes (4..=65536)
//! series_cap = 512   # frequency-series cutoff (>= 1)
//! green_route = "analytic"  # "analytic" | "finite-difference" | "fourier"
//! support_lo = 0.3   # probe window, fractions of the length
//! support_hi = 0.7
//! seed = 7           # RNG seed (>= 0)
//! probes = 64        # probe pairs for restriction checks
//! rp_fields = 1000   # fields for the reflection-positivity sweep
//!
//! checks = ["state_conditions", "scalar_fixture"]  # run order; non-empty
//!
//! [tolerances]                  # optional per-gate overrides
//! state_conditions.purity_rel = 1.0e-9
//!
//! [output]
//! format = "json"    # "json" (line-delimited) | "human"
//! dumps = []         # any of "eigenvalues","kernels","projector","covariance"
//! ```
//!
//! Validation is strict and total: unknown keys are rejected with a
//! spelling suggestion, every violation is reported (not just the first),
//! and each message names the offending key path.

use std::collections::BTreeMap;
use std::fmt;

use toml::Value;

use super::checks::CHECK_NAMES;
use super::report::ReportFormat;
use crate::calderon::GreenRoute;
use crate::error::{HcError, Result};
use crate::geometry::{hawking_beta, BetaSpec, LapseProfile, ModelParams};

/// Lapse profile selector; `Linear` is the flat-plane case.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LapseKind {
    Linear,
    Sine,
    Tanh,
}

impl LapseKind {
    fn parse(s: &str) -> Option<Self> {
        match s {
            "linear" => Some(LapseKind::Linear),
            "sine" => Some(LapseKind::Sine),
            "tanh" => Some(LapseKind::Tanh),
            _ => None,
        }
    }

    fn name(self) -> &'static str {
        match self {
            LapseKind::Linear => "linear",
            LapseKind::Sine => "sine",
            LapseKind::Tanh => "tanh",
        }
    }
}

/// Inverse temperature: the smooth-extension value or an explicit number.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BetaChoice {
    Hawking,
    Value(f64),
}

/// Green-trace construction selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RouteChoice {
    Analytic,
    FiniteDifference,
    Fourier,
}

impl RouteChoice {
    fn parse(s: &str) -> Option<Self> {
        match s {
            "analytic" => Some(RouteChoice::Analytic),
            "finite-difference" => Some(RouteChoice::FiniteDifference),
            "fourier" => Some(RouteChoice::Fourier),
            _ => None,
        }
    }

    fn name(self) -> &'static str {
        match self {
            RouteChoice::Analytic => "analytic",
            RouteChoice::FiniteDifference => "finite-difference",
            RouteChoice::Fourier => "fourier",
        }
    }
}

/// CSV dump selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DumpKind {
    Eigenvalues,
    Kernels,
    Projector,
    Covariance,
}

impl DumpKind {
    pub const NAMES: [&'static str; 4] = ["eigenvalues", "kernels", "projector", "covariance"];

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "eigenvalues" => Some(DumpKind::Eigenvalues),
            "kernels" => Some(DumpKind::Kernels),
            "projector" => Some(DumpKind::Projector),
            "covariance" => Some(DumpKind::Covariance),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            DumpKind::Eigenvalues => "eigenvalues",
            DumpKind::Kernels => "kernels",
            DumpKind::Projector => "projector",
            DumpKind::Covariance => "covariance",
        }
    }

    pub fn file_name(self) -> String {
        format!("{}.csv", self.name())
    }
}

impl fmt::Display for DumpKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Geometry and coefficient parameters.
#[derive(Debug, Clone)]
pub struct ModelConfig {
    pub kappa: f64,
    pub length: f64,
    pub nodes: usize,
    pub mass: f64,
    pub lapse: LapseKind,
}

/// Run parameters shared by the checks.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub beta: BetaChoice,
    pub n_tau: usize,
    pub series_cap: usize,
    pub green_route: RouteChoice,
    pub support_lo: f64,
    pub support_hi: f64,
    pub seed: u64,
    pub probes: usize,
    pub rp_fields: usize,
}

/// Report format and requested dumps.
#[derive(Debug, Clone)]
pub struct OutputConfig {
    pub format: ReportFormat,
    pub dumps: Vec<DumpKind>,
}

/// Fully validated scenario description.
#[derive(Debug, Clone)]
pub struct ScenarioConfig {
    pub model: ModelConfig,
    pub run: RunConfig,
    /// Check names in declared run order; validated non-empty.
    pub checks: Vec<String>,
    /// Merged tolerance table: defaults overlaid with file overrides.
    pub tolerances: BTreeMap<String, f64>,
    pub output: OutputConfig,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        ScenarioConfig {
            model: ModelConfig {
                kappa: 1.0,
                length: 10.0,
                nodes: 400,
                mass: 1.0,
                lapse: LapseKind::Linear,
            },
            run: RunConfig {
                beta: BetaChoice::Hawking,
                n_tau: 256,
                series_cap: 512,
                green_route: RouteChoice::Analytic,
                support_lo: 0.3,
                support_hi: 0.7,
                seed: 7,
                probes: 64,
                rp_fields: 1000,
            },
            checks: CHECK_NAMES.iter().map(|s| s.to_string()).collect(),
            tolerances: default_tolerances(),
            output: OutputConfig {
                format: ReportFormat::JsonLines,
                dumps: Vec::new(),
            },
        }
    }
}

/// Default gate tolerances, keyed `check.gate_family`. These are the
/// acceptance thresholds; a config file may override any entry.
pub fn default_tolerances() -> BTreeMap<String, f64> {
    const DEFAULTS: [(&str, f64); 25] = [
        ("green_oracles.order_min", 1.8),
        ("green_oracles.pairwise", 1e-6),
        ("hawking_gate.defect", 1e-12),
        ("hhi_purity_positivity.charge_abs", 0.0),
        ("hhi_purity_positivity.floor_rel", 1e-8),
        ("hhi_purity_positivity.purity_rel", 1e-9),
        ("hhi_purity_positivity.route_gap", 1e-8),
        ("hhi_restriction.refine_ratio", 0.5),
        ("hhi_restriction.rel", 5e-3),
        ("jump_identity.exterior", 1e-6),
        ("jump_identity.interior", 1e-6),
        ("projector_identification.closed_rel", 1e-12),
        ("projector_identification.green_baseline", 1e-6),
        ("projector_identification.order_min", 1.8),
        ("reflection_positivity.floor", 1e-10),
        ("reflection_positivity.route_gap", 1e-8),
        ("scalar_fixture.abs", 1e-12),
        ("state_conditions.charge_abs", 0.0),
        ("state_conditions.complement_abs", 0.0),
        ("state_conditions.floor_rel", 1e-8),
        ("state_conditions.purity_rel", 1e-9),
        ("state_conditions.symmetry_rel", 1e-12),
        ("symbol_proxy.cross_copy", 1.0),
        ("symbol_proxy.locality_min", 10.0),
        ("symbol_proxy.ratio_dev", 0.05),
    ];
    DEFAULTS
        .iter()
        .map(|&(k, v)| (k.to_string(), v))
        .collect()
}

impl ScenarioConfig {
    /// Parse and validate a TOML scenario description. Parse errors carry
    /// the line number; validation reports every violation with its key
    /// path and rejects unknown keys with a spelling suggestion.
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let value: Value = text.parse().map_err(|e: toml::de::Error| {
            HcError::InvalidConfig {
                violations: vec![format!("parse error: {e}")],
            }
        })?;
        let root = match value {
            Value::Table(t) => t,
            _ => {
                return Err(HcError::InvalidConfig {
                    violations: vec!["config root must be a table".into()],
                })
            }
        };

        let mut cfg = ScenarioConfig::default();
        let mut v = Violations::default();

        const ROOT_KEYS: [&str; 5] = ["model", "run", "checks", "tolerances", "output"];
        for key in root.keys() {
            if !ROOT_KEYS.contains(&key.as_str()) {
                v.unknown_key(key, &ROOT_KEYS);
            }
        }

        if let Some(section) = v.table(&root, "model") {
            const KEYS: [&str; 5] = ["kappa", "length", "nodes", "mass", "lapse"];
            v.reject_unknown(section, "model", &KEYS);
            if let Some(x) = v.positive_f64(section, "model.kappa") {
                cfg.model.kappa = x;
            }
            if let Some(x) = v.positive_f64(section, "model.length") {
                cfg.model.length = x;
            }
            if let Some(x) = v.integer_in(section, "model.nodes", 2, 2000) {
                cfg.model.nodes = x as usize;
            }
            if let Some(x) = v.positive_f64(section, "model.mass") {
                cfg.model.mass = x;
            }
            if let Some(s) = v.string(section, "model.lapse") {
                match LapseKind::parse(&s) {
                    Some(k) => cfg.model.lapse = k,
                    None => v.push(format!(
                        "model.lapse: unknown profile \"{s}\" (expected \"linear\", \"sine\", or \"tanh\")"
                    )),
                }
            }
        }

        if let Some(section) = v.table(&root, "run") {
            const KEYS: [&str; 9] = [
                "beta",
                "n_tau",
                "series_cap",
                "green_route",
                "support_lo",
                "support_hi",
                "seed",
                "probes",
                "rp_fields",
            ];
            v.reject_unknown(section, "run", &KEYS);
            match section.get("beta") {
                None => {}
                Some(Value::String(s)) if s == "hawking" => {
                    cfg.run.beta = BetaChoice::Hawking;
                }
                Some(Value::String(s)) => v.push(format!(
                    "run.beta: unknown keyword \"{s}\" (expected \"hawking\" or a positive number)"
                )),
                Some(val) => match as_f64(val) {
                    Some(b) if b.is_finite() && b > 0.0 => {
                        cfg.run.beta = BetaChoice::Value(b);
                    }
                    _ => v.push(format!(
                        "run.beta: must be \"hawking\" or a positive finite number (got {val})"
                    )),
                },
            }
            if let Some(x) = v.integer_in(section, "run.n_tau", 4, 65536) {
                if x % 2 != 0 {
                    v.push(format!("run.n_tau: must be even (got {x})"));
                } else {
                    cfg.run.n_tau = x as usize;
                }
            }
            if let Some(x) = v.integer_in(section, "run.series_cap", 1, 1_000_000) {
                cfg.run.series_cap = x as usize;
            }
            if let Some(s) = v.string(section, "run.green_route") {
                match RouteChoice::parse(&s) {
                    Some(r) => cfg.run.green_route = r,
                    None => v.push(format!(
                        "run.green_route: unknown route \"{s}\" (expected \"analytic\", \"finite-difference\", or \"fourier\")"
                    )),
                }
            }
            if let Some(x) = v.unit_interval(section, "run.support_lo") {
                cfg.run.support_lo = x;
            }
            if let Some(x) = v.unit_interval(section, "run.support_hi") {
                cfg.run.support_hi = x;
            }
            if let Some(x) = v.integer_in(section, "run.seed", 0, i64::MAX) {
                cfg.run.seed = x as u64;
            }
            if let Some(x) = v.integer_in(section, "run.probes", 1, 10_000) {
                cfg.run.probes = x as usize;
            }
            if let Some(x) = v.integer_in(section, "run.rp_fields", 1, 100_000) {
                cfg.run.rp_fields = x as usize;
            }
        }

        match root.get("checks") {
            None => {}
            Some(Value::Array(items)) => {
                let mut names = Vec::new();
                for (i, item) in items.iter().enumerate() {
                    match item {
                        Value::String(s) => {
                            if !CHECK_NAMES.contains(&s.as_str()) {
                                v.push(format!(
                                    "checks[{i}]: unknown check \"{s}\"{}",
                                    suggestion(s, &CHECK_NAMES)
                                ));
                            } else if names.iter().any(|n| n == s) {
                                v.push(format!("checks[{i}]: duplicate entry \"{s}\""));
                            } else {
                                names.push(s.clone());
                            }
                        }
                        other => v.push(format!("checks[{i}]: expected a string (got {other})")),
                    }
                }
                if names.is_empty() && items.is_empty() {
                    v.push("checks: must list at least one check".into());
                }
                if !names.is_empty() {
                    cfg.checks = names;
                }
            }
            Some(other) => v.push(format!("checks: expected an array of strings (got {other})")),
        }

        if let Some(section) = v.table(&root, "tolerances") {
            let defaults = default_tolerances();
            let keys: Vec<&str> = defaults.keys().map(String::as_str).collect();
            let mut flat = BTreeMap::new();
            flatten_numeric(section, "", &mut flat, &mut v);
            for (key, val) in flat {
                if !defaults.contains_key(&key) {
                    v.push(format!(
                        "tolerances.{key}: unknown tolerance{}",
                        suggestion(&key, &keys)
                    ));
                } else if !val.is_finite() || val < 0.0 {
                    v.push(format!(
                        "tolerances.{key}: must be a nonnegative finite number (got {val})"
                    ));
                } else {
                    cfg.tolerances.insert(key, val);
                }
            }
        }

        if let Some(section) = v.table(&root, "output") {
            const KEYS: [&str; 2] = ["format", "dumps"];
            v.reject_unknown(section, "output", &KEYS);
            if let Some(s) = v.string(section, "output.format") {
                match s.as_str() {
                    "json" | "json-lines" => cfg.output.format = ReportFormat::JsonLines,
                    "human" => cfg.output.format = ReportFormat::Human,
                    _ => v.push(format!(
                        "output.format: unknown format \"{s}\" (expected \"json\" or \"human\")"
                    )),
                }
            }
            match section.get("dumps") {
                None => {}
                Some(Value::Array(items)) => {
                    for (i, item) in items.iter().enumerate() {
                        match item {
                            Value::String(s) => match DumpKind::parse(s) {
                                Some(kind) if !cfg.output.dumps.contains(&kind) => {
                                    cfg.output.dumps.push(kind);
                                }
                                Some(_) => {
                                    v.push(format!("output.dumps[{i}]: duplicate entry \"{s}\""))
                                }
                                None => v.push(format!(
                                    "output.dumps[{i}]: unknown dump \"{s}\"{}",
                                    suggestion(s, &DumpKind::NAMES)
                                )),
                            },
                            other => v.push(format!(
                                "output.dumps[{i}]: expected a string (got {other})"
                            )),
                        }
                    }
                }
                Some(other) => {
                    v.push(format!("output.dumps: expected an array of strings (got {other})"))
                }
            }
        }

        // Cross-field constraints.
        if cfg.run.support_lo >= cfg.run.support_hi {
            v.push(format!(
                "run.support_lo/run.support_hi: window [{}, {}] is empty or inverted",
                cfg.run.support_lo, cfg.run.support_hi
            ));
        }
        let wants_traces = cfg.checks.iter().any(|c| c == "projector_identification");
        if wants_traces && cfg.run.n_tau < 48 {
            v.push(format!(
                "run.n_tau: the traced-response assembly needs at least 48 nodes (got {})",
                cfg.run.n_tau
            ));
        }
        let wants_series = cfg.run.green_route == RouteChoice::Fourier
            || cfg.checks.iter().any(|c| c == "green_oracles");
        if wants_series && cfg.run.series_cap < cfg.run.n_tau / 2 {
            v.push(format!(
                "run.series_cap: the frequency-series oracle must cover the tau Nyquist index {} (got {})",
                cfg.run.n_tau / 2,
                cfg.run.series_cap
            ));
        }

        v.finish(cfg)
    }

    /// Look up a merged tolerance; unknown keys are a programming error.
    pub fn tolerance(&self, key: &str) -> f64 {
        *self
            .tolerances
            .get(key)
            .unwrap_or_else(|| panic!("unknown tolerance key {key}"))
    }

    /// Resolved inverse temperature.
    pub fn beta_value(&self) -> f64 {
        match self.run.beta {
            BetaChoice::Hawking => hawking_beta(self.model.kappa),
            BetaChoice::Value(b) => b,
        }
    }

    pub fn lapse_profile(&self) -> LapseProfile {
        let kappa = self.model.kappa;
        match self.model.lapse {
            LapseKind::Linear => LapseProfile::Rindler { kappa },
            LapseKind::Sine => LapseProfile::Sine { kappa },
            LapseKind::Tanh => LapseProfile::Tanh { kappa },
        }
    }

    /// Model-builder inputs for the configured wedge.
    pub fn model_params(&self) -> ModelParams {
        ModelParams {
            kappa: self.model.kappa,
            length: self.model.length,
            nodes: self.model.nodes,
            lapse: self.lapse_profile(),
            potential: self.model.mass,
            potential_floor: self.model.mass,
            beta: match self.run.beta {
                BetaChoice::Hawking => BetaSpec::Hawking,
                BetaChoice::Value(b) => BetaSpec::Value(b),
            },
        }
    }

    /// Green-trace construction configured for this run.
    pub fn green_route(&self) -> GreenRoute {
        match self.run.green_route {
            RouteChoice::Analytic => GreenRoute::Analytic,
            RouteChoice::FiniteDifference => GreenRoute::FiniteDifference,
            RouteChoice::Fourier => GreenRoute::Fourier {
                series_cap: self.run.series_cap,
            },
        }
    }

    /// Canonical one-line echo for report metadata; deterministic for a
    /// fixed configuration. Tolerances are echoed only where they differ
    /// from the defaults.
    pub fn echo(&self) -> String {
        use std::fmt::Write as _;
        let mut s = String::new();
        let m = &self.model;
        let _ = write!(
            s,
            "model{{kappa={:?},length={:?},nodes={},mass={:?},lapse={}}}",
            m.kappa,
            m.length,
            m.nodes,
            m.mass,
            m.lapse.name()
        );
        let r = &self.run;
        let beta = match r.beta {
            BetaChoice::Hawking => "hawking".to_string(),
            BetaChoice::Value(b) => format!("{b:?}"),
        };
        let _ = write!(
            s,
            " run{{beta={beta},n_tau={},series_cap={},route={},support={:?}..{:?},seed={},probes={},rp_fields={}}}",
            r.n_tau,
            r.series_cap,
            r.green_route.name(),
            r.support_lo,
            r.support_hi,
            r.seed,
            r.probes,
            r.rp_fields
        );
        let _ = write!(s, " checks=[{}]", self.checks.join(","));
        let defaults = default_tolerances();
        let overrides: Vec<String> = self
            .tolerances
            .iter()
            .filter(|(k, v)| defaults.get(*k) != Some(v))
            .map(|(k, v)| format!("{k}={v:?}"))
            .collect();
        let _ = write!(s, " tol{{{}}}", overrides.join(","));
        s
    }
}

fn as_f64(v: &Value) -> Option<f64> {
    match v {
        Value::Float(f) => Some(*f),
        Value::Integer(i) => Some(*i as f64),
        _ => None,
    }
}

/// Closest allowed key, when it is close enough to be a likely typo.
fn suggestion(unknown: &str, allowed: &[&str]) -> String {
    let best = allowed
        .iter()
        .map(|cand| (strsim::jaro_winkler(unknown, cand), *cand))
        .max_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    match best {
        Some((score, cand)) if score > 0.6 => format!(" (did you mean \"{cand}\"?)"),
        _ => String::new(),
    }
}

/// Flatten nested tolerance tables to dotted keys.
fn flatten_numeric(
    table: &toml::map::Map<String, Value>,
    prefix: &str,
    out: &mut BTreeMap<String, f64>,
    v: &mut Violations,
) {
    for (key, val) in table {
        let path = if prefix.is_empty() {
            key.clone()
        } else {
            format!("{prefix}.{key}")
        };
        match val {
            Value::Table(inner) => flatten_numeric(inner, &path, out, v),
            other => match as_f64(other) {
                Some(x) => {
                    out.insert(path, x);
                }
                None => v.push(format!("tolerances.{path}: expected a number (got {other})")),
            },
        }
    }
}

/// Accumulates validation failures so every problem is reported at once.
#[derive(Default)]
struct Violations {
    items: Vec<String>,
}

impl Violations {
    fn push(&mut self, msg: String) {
        self.items.push(msg);
    }

    fn unknown_key(&mut self, key: &str, allowed: &[&str]) {
        self.push(format!(
            "unknown key \"{key}\"{}",
            suggestion(key, allowed)
        ));
    }

    fn reject_unknown(
        &mut self,
        section: &toml::map::Map<String, Value>,
        path: &str,
        allowed: &[&str],
    ) {
        for key in section.keys() {
            if !allowed.contains(&key.as_str()) {
                self.push(format!(
                    "unknown key \"{path}.{key}\"{}",
                    suggestion(key, allowed)
                ));
            }
        }
    }

    fn table<'a>(
        &mut self,
        root: &'a toml::map::Map<String, Value>,
        key: &str,
    ) -> Option<&'a toml::map::Map<String, Value>> {
        match root.get(key) {
            None => None,
            Some(Value::Table(t)) => Some(t),
            Some(other) => {
                self.push(format!("{key}: expected a table (got {other})"));
                None
            }
        }
    }

    fn positive_f64(
        &mut self,
        section: &toml::map::Map<String, Value>,
        path: &str,
    ) -> Option<f64> {
        let key = path.rsplit('.').next().unwrap();
        let val = section.get(key)?;
        match as_f64(val) {
            Some(x) if x.is_finite() && x > 0.0 => Some(x),
            _ => {
                self.push(format!(
                    "{path}: must be a positive finite number (got {val})"
                ));
                None
            }
        }
    }

    fn unit_interval(
        &mut self,
        section: &toml::map::Map<String, Value>,
        path: &str,
    ) -> Option<f64> {
        let key = path.rsplit('.').next().unwrap();
        let val = section.get(key)?;
        match as_f64(val) {
            Some(x) if x.is_finite() && x > 0.0 && x < 1.0 => Some(x),
            _ => {
                self.push(format!(
                    "{path}: must lie strictly between 0 and 1 (got {val})"
                ));
                None
            }
        }
    }

    fn integer_in(
        &mut self,
        section: &toml::map::Map<String, Value>,
        path: &str,
        lo: i64,
        hi: i64,
    ) -> Option<i64> {
        let key = path.rsplit('.').next().unwrap();
        let val = section.get(key)?;
        match val {
            Value::Integer(i) if (lo..=hi).contains(i) => Some(*i),
            _ => {
                self.push(format!(
                    "{path}: must be an integer in {lo}..={hi} (got {val})"
                ));
                None
            }
        }
    }

    fn string(
        &mut self,
        section: &toml::map::Map<String, Value>,
        path: &str,
    ) -> Option<String> {
        let key = path.rsplit('.').next().unwrap();
        let val = section.get(key)?;
        match val {
            Value::String(s) => Some(s.clone()),
            _ => {
                self.push(format!("{path}: expected a string (got {val})"));
                None
            }
        }
    }

    fn finish(self, cfg: ScenarioConfig) -> Result<ScenarioConfig> {
        if self.items.is_empty() {
            Ok(cfg)
        } else {
            Err(HcError::InvalidConfig {
                violations: self.items,
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn violations(text: &str) -> Vec<String> {
        match ScenarioConfig::from_toml_str(text) {
            Err(HcError::InvalidConfig { violations }) => violations,
            other => panic!("expected InvalidConfig, got {other:?}"),
        }
    }

    #[test]
    fn minimal_config_is_valid_with_defaults() {
        let cfg = ScenarioConfig::from_toml_str(
            r#"
            checks = ["projector_identification"]

            [model]
            kappa = 1.0
            length = 10.0
            nodes = 400
            mass = 1.0

            [run]
            beta = "hawking"
            "#,
        )
        .unwrap();
        assert_eq!(cfg.checks, vec!["projector_identification"]);
        assert_eq!(cfg.run.n_tau, 256);
        assert_eq!(cfg.run.seed, 7);
        assert!((cfg.beta_value() - 2.0 * std::f64::consts::PI).abs() < 1e-15);
    }

    #[test]
    fn empty_config_is_the_default_scenario() {
        let cfg = ScenarioConfig::from_toml_str("").unwrap();
        assert_eq!(cfg.checks.len(), CHECK_NAMES.len());
        assert_eq!(cfg.model.nodes, 400);
        assert_eq!(cfg.tolerance("state_conditions.purity_rel"), 1e-9);
    }

    #[test]
    fn negative_beta_names_the_key_path() {
        let msgs = violations("[run]\nbeta = -1\n");
        assert_eq!(msgs.len(), 1);
        assert!(msgs[0].starts_with("run.beta:"), "{msgs:?}");
    }

    #[test]
    fn unknown_section_gets_a_suggestion() {
        let msgs = violations("[modle]\nkappa = 1.0\n");
        assert!(msgs[0].contains("\"modle\""));
        assert!(msgs[0].contains("did you mean \"model\""), "{msgs:?}");
    }

    #[test]
    fn unknown_field_gets_a_suggestion() {
        let msgs = violations("[model]\nkapa = 1.0\n");
        assert!(msgs[0].contains("model.kapa"));
        assert!(msgs[0].contains("did you mean \"kappa\""), "{msgs:?}");
    }

    #[test]
    fn all_violations_are_reported_together() {
        let msgs = violations(
            "[model]\nkappa = -2.0\nnodes = 1\n\n[run]\nbeta = 0.0\nn_tau = 7\n",
        );
        assert_eq!(msgs.len(), 4, "{msgs:?}");
        assert!(msgs.iter().any(|m| m.starts_with("model.kappa:")));
        assert!(msgs.iter().any(|m| m.starts_with("model.nodes:")));
        assert!(msgs.iter().any(|m| m.starts_with("run.beta:")));
        assert!(msgs.iter().any(|m| m.starts_with("run.n_tau:")));
    }

    #[test]
    fn parse_errors_carry_the_line_number() {
        let err = ScenarioConfig::from_toml_str("[model\nkappa = 1.0\n").unwrap_err();
        let text = err.to_string();
        assert!(text.contains("line 1"), "{text}");
    }

    #[test]
    fn unknown_check_and_duplicates_are_rejected() {
        let msgs = violations("checks = [\"state_conditions\", \"state_conditions\"]\n");
        assert!(msgs[0].contains("duplicate"));
        let msgs = violations("checks = [\"scalar_fixtur\"]\n");
        assert!(msgs[0].contains("did you mean \"scalar_fixture\""), "{msgs:?}");
    }

    #[test]
    fn empty_check_list_is_rejected() {
        let msgs = violations("checks = []\n");
        assert!(msgs[0].contains("at least one"), "{msgs:?}");
    }

    #[test]
    fn tolerance_overrides_merge_over_defaults() {
        let cfg = ScenarioConfig::from_toml_str(
            "[tolerances]\nstate_conditions.purity_rel = 1e-6\n",
        )
        .unwrap();
        assert_eq!(cfg.tolerance("state_conditions.purity_rel"), 1e-6);
        // Untouched entries keep their defaults.
        assert_eq!(cfg.tolerance("scalar_fixture.abs"), 1e-12);
        assert!(cfg.echo().contains("state_conditions.purity_rel=1e-6"));
    }

    #[test]
    fn unknown_tolerance_key_is_rejected_with_suggestion() {
        let msgs = violations("[tolerances]\nstate_conditions.purity_rl = 1e-6\n");
        assert!(msgs[0].contains("unknown tolerance"), "{msgs:?}");
        assert!(msgs[0].contains("state_conditions.purity_rel"), "{msgs:?}");
    }

    #[test]
    fn support_window_must_be_ordered() {
        let msgs = violations("[run]\nsupport_lo = 0.7\nsupport_hi = 0.3\n");
        assert!(msgs[0].contains("support_lo"), "{msgs:?}");
    }

    #[test]
    fn series_cap_must_cover_the_nyquist_index() {
        let msgs = violations(
            "checks = [\"green_oracles\"]\n[run]\nn_tau = 256\nseries_cap = 100\n",
        );
        assert!(msgs[0].contains("run.series_cap"), "{msgs:?}");
        // Without the series-dependent check the same cap is fine.
        ScenarioConfig::from_toml_str(
            "checks = [\"scalar_fixture\"]\n[run]\nn_tau = 256\nseries_cap = 100\n",
        )
        .unwrap();
    }

    #[test]
    fn dumps_parse_and_reject_unknown_names() {
        let cfg = ScenarioConfig::from_toml_str(
            "[output]\ndumps = [\"eigenvalues\", \"kernels\"]\n",
        )
        .unwrap();
        assert_eq!(
            cfg.output.dumps,
            vec![DumpKind::Eigenvalues, DumpKind::Kernels]
        );
        let msgs = violations("[output]\ndumps = [\"eigenvalue\"]\n");
        assert!(msgs[0].contains("did you mean \"eigenvalues\""), "{msgs:?}");
    }

    #[test]
    fn echo_is_deterministic_and_compact() {
        let cfg = ScenarioConfig::default();
        assert_eq!(cfg.echo(), cfg.echo());
        assert!(cfg.echo().contains("nodes=400"));
        assert!(cfg.echo().ends_with("tol{}"));
    }
}
