//! Flat `key = value` run configuration.
//!
//! One assignment per line; lines starting with `#` are notes and are kept
//! (in order) so that a formatted config reproduces its input. Unknown keys
//! and keys that do not apply to the chosen family are rejected.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt::Write as _;

use crate::analytic::{BsXi, GrwaBeta, GrwaXi};
use crate::error::{Error, Result};
use crate::hilbert::SpinLabel;
use crate::models::{lamb_dicke_for_coupling, nqrm_coupling, ValidityThresholds};
use crate::propagate::Method;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Family {
    /// gQRM simulating a single nth-order model.
    Nqrm,
    /// gQRM simulating the sum of an nth- and an mth-order coupling.
    Combined,
    /// Standard QRM against its closed-form approximations.
    Qrm,
    /// Microwave-driven ion implementation plan.
    Mw,
}

impl Family {
    pub fn name(self) -> &'static str {
        match self {
            Family::Nqrm => "nqrm",
            Family::Combined => "combined",
            Family::Qrm => "qrm",
            Family::Mw => "mw",
        }
    }

    fn parse(s: &str) -> Option<Self> {
        [Family::Nqrm, Family::Combined, Family::Qrm, Family::Mw].into_iter().find(|f| f.name() == s)
    }

    fn default_task(self) -> Task {
        match self {
            Family::Nqrm | Family::Combined => Task::Equivalence,
            Family::Qrm => Task::CompareQrm,
            Family::Mw => Task::PlanMw,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Task {
    Equivalence,
    Sweep,
    CompareQrm,
    PlanMw,
}

impl Task {
    pub fn name(self) -> &'static str {
        match self {
            Task::Equivalence => "equivalence",
            Task::Sweep => "sweep",
            Task::CompareQrm => "compare_qrm",
            Task::PlanMw => "plan_mw",
        }
    }

    fn parse(s: &str) -> Option<Self> {
        [Task::Equivalence, Task::Sweep, Task::CompareQrm, Task::PlanMw].into_iter().find(|t| t.name() == s)
    }

    fn allowed(self, family: Family) -> bool {
        matches!(
            (self, family),
            (Task::Equivalence, Family::Nqrm | Family::Combined)
                | (Task::Sweep, Family::Nqrm)
                | (Task::CompareQrm, Family::Qrm)
                | (Task::PlanMw, Family::Mw)
        )
    }
}

/// How the coupling strength is stated. Exactly one is given.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum CouplingSpec {
    LambDicke(f64),
    Coupling(f64),
    CouplingRatio(f64),
}

impl CouplingSpec {
    fn key(self) -> &'static str {
        match self {
            CouplingSpec::LambDicke(_) => "eta",
            CouplingSpec::Coupling(_) => "g_n",
            CouplingSpec::CouplingRatio(_) => "g_n_over_nu_tilde",
        }
    }

    fn value(self) -> f64 {
        match self {
            CouplingSpec::LambDicke(v) | CouplingSpec::Coupling(v) | CouplingSpec::CouplingRatio(v) => v,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TimeUnits {
    /// Multiples of `2π/ν̃`.
    NuTildePeriods,
    /// Multiples of `1/ν`.
    InverseNu,
}

impl TimeUnits {
    fn name(self) -> &'static str {
        match self {
            TimeUnits::NuTildePeriods => "nu_tilde_periods",
            TimeUnits::InverseNu => "inverse_nu",
        }
    }

    fn parse(s: &str) -> Option<Self> {
        [TimeUnits::NuTildePeriods, TimeUnits::InverseNu].into_iter().find(|u| u.name() == s)
    }
}

fn bs_xi_name(v: BsXi) -> &'static str {
    match v {
        BsXi::Half => "half",
        BsXi::Full => "full",
    }
}

fn grwa_xi_name(v: GrwaXi) -> &'static str {
    match v {
        GrwaXi::FixedPoint => "fixed_point",
        GrwaXi::Shortcut => "shortcut",
    }
}

fn grwa_beta_name(v: GrwaBeta) -> &'static str {
    match v {
        GrwaBeta::Quartic => "quartic",
        GrwaBeta::Overlap => "overlap",
    }
}

/// A fully resolved run description. All frequencies are in units of ν
/// except the `_physical_hz` pair used by the microwave plan.
#[derive(Clone, Debug, PartialEq)]
pub struct Config {
    pub notes: Vec<String>,
    pub family: Family,
    pub task: Task,
    pub n: usize,
    pub m: usize,
    pub nu: f64,
    pub nu_tilde: f64,
    pub omega: f64,
    pub omega_tilde: f64,
    pub drive: f64,
    pub coupling: CouplingSpec,
    pub fock: Vec<usize>,
    pub weights: Vec<f64>,
    pub spin: SpinLabel,
    pub t_final: f64,
    pub t_units: TimeUnits,
    pub samples: usize,
    pub n_max: usize,
    pub n_max_list: Vec<usize>,
    pub substeps: usize,
    pub method: Method,
    pub sigma_order: usize,
    pub self_check: bool,
    pub escalate: bool,
    pub thresholds: ValidityThresholds,
    pub bs_xi: BsXi,
    pub grwa_xi: GrwaXi,
    pub grwa_beta: GrwaBeta,
    pub nu_physical_hz: f64,
    pub omega_physical_hz: f64,
    pub out_dir: Option<String>,
    pub emit_re_f: bool,
}

impl Config {
    /// Defaults for `family`, with the coupling left at `eta = 0.05`.
    pub fn defaults(family: Family) -> Self {
        let qrm = family == Family::Qrm;
        Config {
            notes: Vec::new(),
            family,
            task: family.default_task(),
            n: 2,
            m: 1,
            nu: 1.0,
            nu_tilde: 5e-4,
            omega: 1e3,
            omega_tilde: 1e-3,
            drive: 0.1,
            coupling: CouplingSpec::LambDicke(0.05),
            fock: vec![0],
            weights: vec![1.0],
            spin: SpinLabel::G,
            t_final: if qrm { 200.0 } else { 4.0 },
            t_units: if qrm { TimeUnits::InverseNu } else { TimeUnits::NuTildePeriods },
            samples: 400,
            n_max: if qrm { 40 } else { 60 },
            n_max_list: vec![80, 160],
            substeps: 256,
            method: Method::CommutatorFree4,
            sigma_order: 0,
            self_check: false,
            escalate: false,
            thresholds: ValidityThresholds::default(),
            bs_xi: BsXi::Half,
            grwa_xi: GrwaXi::FixedPoint,
            grwa_beta: GrwaBeta::Quartic,
            nu_physical_hz: 370e3,
            omega_physical_hz: 12.642812118e9,
            out_dir: None,
            emit_re_f: true,
        }
    }

    /// Keys that apply to this family/task, in output order.
    fn keys(&self) -> Vec<&'static str> {
        let mut keys = vec!["family", "task"];
        let coupling = ["eta", "g_n", "g_n_over_nu_tilde"];
        let state = ["fock", "weights", "spin"];
        let time = ["t_final", "t_units", "samples"];
        let thresholds = ["threshold_omega", "threshold_detuning", "threshold_lamb_dicke"];
        match (self.family, self.task) {
            (Family::Nqrm | Family::Combined, Task::Equivalence) => {
                keys.push("n");
                if self.family == Family::Combined {
                    keys.push("m");
                }
                keys.extend(["nu", "nu_tilde", "omega", "omega_tilde", "Omega"]);
                keys.extend(coupling);
                keys.extend(state);
                keys.extend(time);
                keys.extend(["n_max", "substeps", "method", "sigma_order", "self_check", "escalate"]);
                keys.extend(thresholds);
                keys.extend(["out_dir", "emit_re_f"]);
            }
            (_, Task::Sweep) => {
                keys.extend(["n", "nu", "nu_tilde", "omega_tilde", "Omega"]);
                keys.extend(coupling);
                keys.extend(state);
                keys.extend(time);
                keys.extend(["n_max_list", "out_dir"]);
            }
            (_, Task::CompareQrm) => {
                keys.extend(["nu", "omega", "Omega", "eta"]);
                keys.extend(state);
                keys.extend(time);
                keys.extend(["n_max", "bs_xi", "grwa_xi", "grwa_beta"]);
                keys.extend(thresholds);
                keys.push("out_dir");
            }
            (_, Task::PlanMw) => {
                keys.extend(["n", "nu", "nu_tilde", "omega_tilde", "Omega"]);
                keys.extend(coupling);
                keys.extend(["t_final", "nu_physical_hz", "omega_physical_hz", "out_dir"]);
            }
            _ => {}
        }
        keys
    }

    fn value_of(&self, key: &str) -> Option<String> {
        let list = |v: &[usize]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",");
        Some(match key {
            "family" => self.family.name().into(),
            "task" => self.task.name().into(),
            "n" => self.n.to_string(),
            "m" => self.m.to_string(),
            "nu" => self.nu.to_string(),
            "nu_tilde" => self.nu_tilde.to_string(),
            "omega" => self.omega.to_string(),
            "omega_tilde" => self.omega_tilde.to_string(),
            "Omega" => self.drive.to_string(),
            "eta" | "g_n" | "g_n_over_nu_tilde" => {
                if self.coupling.key() != key {
                    return None;
                }
                self.coupling.value().to_string()
            }
            "fock" => list(&self.fock),
            "weights" => self.weights.iter().map(|w| w.to_string()).collect::<Vec<_>>().join(","),
            "spin" => self.spin.name().into(),
            "t_final" => self.t_final.to_string(),
            "t_units" => self.t_units.name().into(),
            "samples" => self.samples.to_string(),
            "n_max" => self.n_max.to_string(),
            "n_max_list" => list(&self.n_max_list),
            "substeps" => self.substeps.to_string(),
            "method" => self.method.name().into(),
            "sigma_order" => self.sigma_order.to_string(),
            "self_check" => self.self_check.to_string(),
            "escalate" => self.escalate.to_string(),
            "threshold_omega" => self.thresholds.omega_ratio.to_string(),
            "threshold_detuning" => self.thresholds.detuning_ratio.to_string(),
            "threshold_lamb_dicke" => self.thresholds.lamb_dicke.to_string(),
            "bs_xi" => bs_xi_name(self.bs_xi).into(),
            "grwa_xi" => grwa_xi_name(self.grwa_xi).into(),
            "grwa_beta" => grwa_beta_name(self.grwa_beta).into(),
            "nu_physical_hz" => self.nu_physical_hz.to_string(),
            "omega_physical_hz" => self.omega_physical_hz.to_string(),
            "out_dir" => self.out_dir.clone()?,
            "emit_re_f" => self.emit_re_f.to_string(),
            _ => return None,
        })
    }

    /// Canonical text form: notes first, then every applicable key.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for note in &self.notes {
            let _ = writeln!(out, "{note}");
        }
        for key in self.keys() {
            if let Some(v) = self.value_of(key) {
                let _ = writeln!(out, "{key} = {v}");
            }
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut notes = Vec::new();
        let mut entries: BTreeMap<String, (usize, String)> = BTreeMap::new();
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.trim();
            if line.is_empty() {
                continue;
            }
            if line.starts_with('#') {
                notes.push(line.to_string());
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(config_error(line_no, format!("expected `key = value`, found `{line}`")));
            };
            let key = key.trim();
            if !KNOWN_KEYS.contains(&key) {
                return Err(config_error(line_no, format!("unknown key `{key}`")));
            }
            if entries.insert(key.to_string(), (line_no, value.trim().to_string())).is_some() {
                return Err(config_error(line_no, format!("key `{key}` given twice")));
            }
        }

        let family = match entries.get("family") {
            Some((line, v)) => Family::parse(v).ok_or_else(|| config_error(*line, format!("unknown family `{v}`")))?,
            None => Family::Nqrm,
        };
        let mut cfg = Config::defaults(family);
        cfg.notes = notes;
        if let Some((line, v)) = entries.get("task") {
            cfg.task = Task::parse(v).ok_or_else(|| config_error(*line, format!("unknown task `{v}`")))?;
            if !cfg.task.allowed(family) {
                return Err(config_error(*line, format!("task `{v}` does not apply to family `{}`", family.name())));
            }
        }

        let applicable = cfg.keys();
        let given: Vec<&str> =
            ["eta", "g_n", "g_n_over_nu_tilde"].into_iter().filter(|k| entries.contains_key(*k)).collect();
        for (key, (line, _)) in &entries {
            if !applicable.contains(&key.as_str()) {
                return Err(config_error(
                    *line,
                    format!("key `{key}` does not apply to family `{}` with task `{}`", family.name(), cfg.task.name()),
                ));
            }
        }
        match given.as_slice() {
            [] => return Err(Error::InvalidConfig("exactly one of eta, g_n, g_n_over_nu_tilde is required".into())),
            [_] => {}
            _ => {
                let line = given.iter().map(|k| entries[*k].0).max().unwrap_or(0);
                return Err(config_error(line, format!("coupling given twice ({})", given.join(", "))));
            }
        }

        for (key, (line, v)) in &entries {
            cfg.assign(key, v).map_err(|message| config_error(*line, message))?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    fn assign(&mut self, key: &str, v: &str) -> std::result::Result<(), String> {
        match key {
            "family" | "task" => {}
            "n" => self.n = uint(v)?,
            "m" => self.m = uint(v)?,
            "nu" => self.nu = float(v)?,
            "nu_tilde" => self.nu_tilde = float(v)?,
            "omega" => self.omega = float(v)?,
            "omega_tilde" => self.omega_tilde = float(v)?,
            "Omega" => self.drive = float(v)?,
            "eta" => self.coupling = CouplingSpec::LambDicke(float(v)?),
            "g_n" => self.coupling = CouplingSpec::Coupling(float(v)?),
            "g_n_over_nu_tilde" => self.coupling = CouplingSpec::CouplingRatio(float(v)?),
            "fock" => self.fock = list(v, uint)?,
            "weights" => self.weights = list(v, float)?,
            "spin" => self.spin = SpinLabel::parse(v).ok_or_else(|| format!("unknown spin label `{v}`"))?,
            "t_final" => self.t_final = float(v)?,
            "t_units" => self.t_units = TimeUnits::parse(v).ok_or_else(|| format!("unknown time unit `{v}`"))?,
            "samples" => self.samples = uint(v)?,
            "n_max" => self.n_max = uint(v)?,
            "n_max_list" => self.n_max_list = list(v, uint)?,
            "substeps" => self.substeps = uint(v)?,
            "method" => self.method = Method::parse(v).ok_or_else(|| format!("unknown method `{v}`"))?,
            "sigma_order" => self.sigma_order = uint(v)?,
            "self_check" => self.self_check = boolean(v)?,
            "escalate" => self.escalate = boolean(v)?,
            "threshold_omega" => self.thresholds.omega_ratio = float(v)?,
            "threshold_detuning" => self.thresholds.detuning_ratio = float(v)?,
            "threshold_lamb_dicke" => self.thresholds.lamb_dicke = float(v)?,
            "bs_xi" => {
                self.bs_xi = match v {
                    "half" => BsXi::Half,
                    "full" => BsXi::Full,
                    _ => return Err(format!("unknown bs_xi `{v}`")),
                }
            }
            "grwa_xi" => {
                self.grwa_xi = match v {
                    "fixed_point" => GrwaXi::FixedPoint,
                    "shortcut" => GrwaXi::Shortcut,
                    _ => return Err(format!("unknown grwa_xi `{v}`")),
                }
            }
            "grwa_beta" => {
                self.grwa_beta = match v {
                    "quartic" => GrwaBeta::Quartic,
                    "overlap" => GrwaBeta::Overlap,
                    _ => return Err(format!("unknown grwa_beta `{v}`")),
                }
            }
            "nu_physical_hz" => self.nu_physical_hz = float(v)?,
            "omega_physical_hz" => self.omega_physical_hz = float(v)?,
            "out_dir" => self.out_dir = Some(v.to_string()),
            "emit_re_f" => self.emit_re_f = boolean(v)?,
            _ => return Err(format!("unknown key `{key}`")),
        }
        Ok(())
    }

    /// Checks the preconditions every runner relies on.
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        for (name, v) in [("nu", self.nu), ("nu_tilde", self.nu_tilde), ("Omega", self.drive), ("t_final", self.t_final)] {
            if !(v > 0.0) || !v.is_finite() {
                return bad(format!("{name} must be positive and finite (got {v})"));
            }
        }
        if !self.omega_tilde.is_finite() || !self.omega.is_finite() {
            return bad("qubit frequencies must be finite".into());
        }
        if self.coupling.value() < 0.0 || !self.coupling.value().is_finite() {
            return bad(format!("{} must be non-negative", self.coupling.key()));
        }
        if self.n == 0 {
            return bad("n must be at least 1".into());
        }
        if self.family == Family::Combined && (self.m == 0 || self.m == self.n) {
            return bad(format!("m must be at least 1 and differ from n = {}", self.n));
        }
        if self.fock.is_empty() || self.fock.len() != self.weights.len() {
            return bad("fock and weights need the same, non-zero length".into());
        }
        if self.samples == 0 {
            return bad("samples must be at least 1".into());
        }
        let needs_n_max = matches!(self.task, Task::Equivalence | Task::CompareQrm);
        if needs_n_max {
            let top = self.fock.iter().copied().max().unwrap_or(0);
            if top > self.n_max {
                return bad(format!("fock level {top} exceeds n_max = {}", self.n_max));
            }
            let order = if self.family == Family::Combined { self.n.max(self.m) } else { self.n };
            if self.task == Task::Equivalence && order > self.n_max {
                return bad(format!("coupling order n = {order} exceeds n_max = {}", self.n_max));
            }
        }
        if self.task == Task::Sweep {
            if self.n_max_list.len() < 2 {
                return bad("n_max_list needs at least two truncations".into());
            }
            if self.n_max_list.windows(2).any(|w| w[0] >= w[1]) {
                return bad("n_max_list must be strictly ascending".into());
            }
            let top = self.fock.iter().copied().max().unwrap_or(0);
            if top > self.n_max_list[0] || self.n > self.n_max_list[0] {
                return bad(format!("n_max_list starts below the state or coupling order ({})", self.n_max_list[0]));
            }
        }
        if self.task == Task::PlanMw && !(self.nu_physical_hz > 0.0) {
            return bad("nu_physical_hz must be positive".into());
        }
        Ok(())
    }

    /// Final time in units of 1/ν.
    pub fn final_time(&self) -> f64 {
        match self.t_units {
            TimeUnits::NuTildePeriods => self.t_final * 2.0 * PI / self.nu_tilde,
            TimeUnits::InverseNu => self.t_final / self.nu,
        }
    }

    /// `(η, g_n)` implied by the coupling key.
    pub fn resolved_coupling(&self) -> Result<(f64, f64)> {
        match self.coupling {
            CouplingSpec::LambDicke(eta) => Ok((eta, nqrm_coupling(eta, self.drive, self.n).0)),
            CouplingSpec::Coupling(g) => Ok((lamb_dicke_for_coupling(g, self.drive, self.n)?, g)),
            CouplingSpec::CouplingRatio(r) => {
                let g = r * self.nu_tilde;
                Ok((lamb_dicke_for_coupling(g, self.drive, self.n)?, g))
            }
        }
    }
}

const KNOWN_KEYS: &[&str] = &[
    "family",
    "task",
    "n",
    "m",
    "nu",
    "nu_tilde",
    "omega",
    "omega_tilde",
    "Omega",
    "eta",
    "g_n",
    "g_n_over_nu_tilde",
    "fock",
    "weights",
    "spin",
    "t_final",
    "t_units",
    "samples",
    "n_max",
    "n_max_list",
    "substeps",
    "method",
    "sigma_order",
    "self_check",
    "escalate",
    "threshold_omega",
    "threshold_detuning",
    "threshold_lamb_dicke",
    "bs_xi",
    "grwa_xi",
    "grwa_beta",
    "nu_physical_hz",
    "omega_physical_hz",
    "out_dir",
    "emit_re_f",
];

fn config_error(line: usize, message: String) -> Error {
    Error::Config { line, message }
}

fn float(v: &str) -> std::result::Result<f64, String> {
    v.parse::<f64>().map_err(|_| format!("`{v}` is not a number"))
}

fn uint(v: &str) -> std::result::Result<usize, String> {
    v.parse::<usize>().map_err(|_| format!("`{v}` is not a non-negative integer"))
}

fn boolean(v: &str) -> std::result::Result<bool, String> {
    match v {
        "true" => Ok(true),
        "false" => Ok(false),
        _ => Err(format!("`{v}` is not true/false")),
    }
}

fn list<T>(v: &str, item: fn(&str) -> std::result::Result<T, String>) -> std::result::Result<Vec<T>, String> {
    v.split(',').map(|s| item(s.trim())).collect()
}
