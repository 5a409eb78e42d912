//! Config-driven runs: resolve a [`Config`], dispatch it to the verification
//! harness and collect the resulting tables.

pub mod config;
pub mod presets;
pub mod table;

use std::path::{Path, PathBuf};

pub use config::{Config, CouplingSpec, Family, Task, TimeUnits};
pub use presets::{preset, PRESETS};
pub use table::{Column, Table};

use crate::analytic::{bloch_siegert, grwa};
use crate::error::Result;
use crate::hilbert::BosonDim;
use crate::models::{nqrm_coupling, plan_mw, MwPlanRequest, QrmParams, ValidityReport};
use crate::propagate::PropagationSettings;
use crate::verify::{
    equivalence_run, qrm_approx_compare, time_grid, truncation_sweep, ApproxVariants, EquivalenceSpec,
    QrmCompareSpec, StateSpec, SweepSpec,
};

pub const ENGINE: &str = concat!("rabi-core ", env!("CARGO_PKG_VERSION"));

/// Everything a run produces, before it touches the filesystem.
#[derive(Clone, Debug)]
pub struct RunOutput {
    pub config: Config,
    /// Parameters computed from the primitive keys.
    pub derived: Vec<(String, f64)>,
    /// Headline numbers for the console.
    pub summary: Vec<(String, f64)>,
    pub tables: Vec<Table>,
    /// A validity or leakage monitor crossed its flag threshold.
    pub flagged: bool,
    pub warnings: Vec<String>,
}

impl RunOutput {
    /// Metadata lines: engine, the canonical config, then derived values.
    pub fn metadata(&self) -> Vec<String> {
        let mut lines = vec![ENGINE.to_string(), "config".to_string()];
        lines.extend(self.config.to_text().lines().map(str::to_string));
        lines.push("derived".to_string());
        lines.extend(self.derived.iter().map(|(k, v)| format!("{k} = {v:.16e}")));
        lines
    }

    pub fn write(&self, dir: &Path) -> Result<Vec<PathBuf>> {
        std::fs::create_dir_all(dir)?;
        let meta = self.metadata();
        self.tables.iter().map(|t| t.write(dir, &meta)).collect()
    }

    pub fn table(&self, file: &str) -> Option<&Table> {
        self.tables.iter().find(|t| t.file == file)
    }

    pub fn summary_value(&self, key: &str) -> Option<f64> {
        self.summary.iter().find(|(k, _)| k == key).map(|&(_, v)| v)
    }
}

/// Recovers the config block from CSV metadata written by [`RunOutput::write`].
pub fn config_from_metadata(csv: &str) -> Option<String> {
    let mut lines = csv.lines().map_while(|l| l.strip_prefix("# "));
    lines.find(|l| *l == "config")?;
    let mut out = String::new();
    for line in lines.take_while(|l| *l != "derived") {
        out.push_str(line);
        out.push('\n');
    }
    Some(out)
}

pub fn execute(cfg: &Config) -> Result<RunOutput> {
    cfg.validate()?;
    match cfg.task {
        Task::Equivalence => run_equivalence(cfg),
        Task::Sweep => run_sweep(cfg),
        Task::CompareQrm => run_compare(cfg),
        Task::PlanMw => run_plan(cfg),
    }
}

fn state(cfg: &Config) -> StateSpec {
    StateSpec { levels: cfg.fock.clone(), weights: cfg.weights.clone(), spin: cfg.spin }
}

fn times(cfg: &Config) -> Vec<f64> {
    time_grid(cfg.final_time(), cfg.samples, true)
}

fn validity_columns(table: &mut Table, validity: &[ValidityReport]) -> Result<()> {
    table.push(Column::new("lamb_dicke_monitor", validity.iter().map(|v| v.lamb_dicke).collect()))?;
    table.push(Column::new("ratio_omega", validity.iter().map(|v| v.ratio_omega).collect()))?;
    table.push(Column::new("ratio_detuning", validity.iter().map(|v| v.ratio_detuning).collect()))?;
    table.push(Column::flags("validity_flag", validity.iter().map(|v| v.breached.any())))
}

/// The equivalence spec a config describes.
pub fn equivalence_spec(cfg: &Config) -> Result<EquivalenceSpec> {
    let (eta, _) = cfg.resolved_coupling()?;
    Ok(EquivalenceSpec {
        order: cfg.n,
        second_order: (cfg.family == Family::Combined).then_some(cfg.m),
        mode_freq: cfg.nu,
        target_mode_freq: cfg.nu_tilde,
        qubit_freq: cfg.omega,
        target_qubit_freq: cfg.omega_tilde,
        drive: cfg.drive,
        lamb_dicke: eta,
        n_max: cfg.n_max,
        state: state(cfg),
        times: times(cfg),
        settings: PropagationSettings {
            substeps: cfg.substeps,
            method: cfg.method,
            self_check: cfg.self_check,
            escalate_leakage: cfg.escalate,
            ..Default::default()
        },
        sigma_order: cfg.sigma_order,
        thresholds: cfg.thresholds,
        escalate: cfg.escalate,
    })
}

fn run_equivalence(cfg: &Config) -> Result<RunOutput> {
    let spec = equivalence_spec(cfg)?;
    let (g, n) = spec.models()?;
    let out = equivalence_run(&spec)?;

    let mut derived = vec![("eta".to_string(), spec.lamb_dicke), (format!("g_{}", cfg.n), n.primary.coupling)];
    if let Some(second) = &n.secondary {
        derived.push((format!("g_{}", second.order), second.coupling));
    }
    for (j, tone) in g.tones.iter().enumerate() {
        derived.push((format!("delta_{}", j + 1), tone.detuning));
    }
    if let Some(p) = out.period {
        derived.push(("period".into(), p));
    }
    if let Some(s) = out.step {
        derived.push(("step".into(), s));
    }
    derived.push(("t_final".into(), cfg.final_time()));

    let mut eq = Table::new("equivalence.csv");
    eq.push(Column::new("t", out.times.clone()))?;
    eq.push(Column::new("one_minus_abs_f", out.one_minus_abs_f.clone()))?;
    if cfg.emit_re_f {
        eq.push(Column::new("re_f", out.re_f.clone()))?;
    }
    validity_columns(&mut eq, &out.validity)?;

    let mut obs = Table::new("observables.csv");
    obs.push(Column::new("t", out.times.clone()))?;
    obs.push(Column::new("sigma_z_target", out.sigma_z.target.clone()))?;
    obs.push(Column::new("sigma_z_mapped", out.sigma_z.mapped.clone()))?;
    obs.push(Column::new("number_target", out.number.target.clone()))?;
    obs.push(Column::new("number_mapped", out.number.mapped.clone()))?;
    obs.push(Column::new("sigma_x_target", out.sigma_x.target.clone()))?;
    obs.push(Column::new("sigma_x_mapped", out.sigma_x.mapped.clone()))?;

    let max_ld = out.validity.iter().map(|v| v.lamb_dicke).fold(0.0, f64::max);
    let mut summary = vec![
        ("max_infidelity".to_string(), out.max_infidelity()),
        ("max_sigma_z_deviation".into(), out.sigma_z.max_deviation()),
        ("max_number_relative_deviation".into(), out.number.max_relative_deviation()),
        ("max_sigma_x_deviation".into(), out.sigma_x.max_deviation()),
        ("max_lamb_dicke_monitor".into(), max_ld),
        ("norm_drift".into(), out.norm_drift),
        ("leakage".into(), out.leakage),
        ("snap_distance".into(), out.snap_distance),
    ];
    if let Some(d) = out.self_check_delta {
        summary.push(("self_check_delta".into(), d));
    }
    if let Some(t) = out.lamb_dicke_breach_time() {
        summary.push(("lamb_dicke_breach_time".into(), t));
    }
    Ok(RunOutput {
        config: cfg.clone(),
        derived,
        summary,
        tables: vec![eq, obs],
        flagged: out.flagged(),
        warnings: out.warnings.clone(),
    })
}

fn run_sweep(cfg: &Config) -> Result<RunOutput> {
    let (eta, g) = cfg.resolved_coupling()?;
    let spec = SweepSpec {
        order: cfg.n,
        target_mode_freq: cfg.nu_tilde,
        target_qubit_freq: cfg.omega_tilde,
        coupling: g,
        state: state(cfg),
        times: times(cfg),
        n_max_list: cfg.n_max_list.clone(),
    };
    let out = truncation_sweep(&spec)?;
    let mut table = Table::new("truncation.csv");
    table.push(Column::new("t", out.times.clone()))?;
    for (n_max, series) in out.n_max_list.iter().zip(&out.number) {
        table.push(Column::new(format!("number_{n_max}"), series.clone()))?;
    }
    let mut summary = Vec::new();
    for (pair, series) in out.n_max_list.windows(2).zip(&out.relative_difference) {
        let name = format!("relative_difference_{}_{}", pair[0], pair[1]);
        summary.push((format!("max_{name}"), series.iter().copied().fold(0.0, f64::max)));
        table.push(Column::new(name, series.clone()))?;
    }
    Ok(RunOutput {
        config: cfg.clone(),
        derived: vec![("eta".into(), eta), (format!("g_{}", cfg.n), g), ("t_final".into(), cfg.final_time())],
        summary,
        tables: vec![table],
        flagged: false,
        warnings: Vec::new(),
    })
}

/// The QRM comparison a config describes.
pub fn compare_spec(cfg: &Config) -> Result<QrmCompareSpec> {
    let (eta, _) = cfg.resolved_coupling()?;
    Ok(QrmCompareSpec {
        params: QrmParams { mode_freq: cfg.nu, lamb_dicke: eta, drive: cfg.drive, dim: BosonDim::new(cfg.n_max)? },
        qubit_freq: cfg.omega,
        state: state(cfg),
        times: times(cfg),
        variants: ApproxVariants { bs_xi: cfg.bs_xi, grwa_xi: cfg.grwa_xi, grwa_beta: cfg.grwa_beta },
        thresholds: cfg.thresholds,
    })
}

fn run_compare(cfg: &Config) -> Result<RunOutput> {
    let spec = compare_spec(cfg)?;
    let p = &spec.params;
    let out = qrm_approx_compare(&spec)?;
    let bs = bloch_siegert(p, spec.variants.bs_xi)?.coefficients;
    let gr = grwa(p, spec.variants.grwa_xi, spec.variants.grwa_beta)?.coefficients;
    let derived = vec![
        ("g_tilde".to_string(), p.coupling()),
        ("bs_lambda".into(), bs.lambda),
        ("bs_xi".into(), bs.xi),
        ("grwa_xi".into(), gr.xi),
        ("grwa_beta".into(), gr.beta),
        ("grwa_drive".into(), gr.drive_eff),
        ("grwa_coupling".into(), gr.coupling_eff),
        ("t_final".into(), cfg.final_time()),
    ];

    let mut table = Table::new("qrm_compare.csv");
    table.push(Column::new("t", out.times.clone()))?;
    table.push(Column::new("one_minus_f_aux", out.one_minus_f_aux.clone()))?;
    table.push(Column::new("one_minus_f_bs", out.one_minus_f_bs.clone()))?;
    table.push(Column::new("one_minus_f_grwa", out.one_minus_f_grwa.clone()))?;
    table.push(Column::new("number_exact", out.number.target.clone()))?;
    table.push(Column::new("number_aux", out.number.mapped.clone()))?;
    validity_columns(&mut table, &out.validity)?;

    let max = |v: &[f64]| v.iter().copied().fold(0.0, f64::max);
    let summary = vec![
        ("max_infidelity_aux".to_string(), max(&out.one_minus_f_aux)),
        ("max_infidelity_bs".into(), max(&out.one_minus_f_bs)),
        ("max_infidelity_grwa".into(), max(&out.one_minus_f_grwa)),
        ("max_number_deviation".into(), out.number.max_deviation()),
        ("leakage".into(), out.leakage),
    ];
    Ok(RunOutput { config: cfg.clone(), derived, summary, tables: vec![table], flagged: out.flagged(), warnings: Vec::new() })
}

/// The microwave plan request a config describes.
pub fn plan_request(cfg: &Config) -> Result<MwPlanRequest> {
    let (eta, _) = cfg.resolved_coupling()?;
    Ok(MwPlanRequest {
        lamb_dicke: eta,
        mode_freq_hz: cfg.nu_physical_hz,
        qubit_freq_hz: cfg.omega_physical_hz,
        order: cfg.n,
        target_mode_ratio: cfg.nu_tilde / cfg.nu,
        target_qubit_ratio: cfg.omega_tilde / cfg.nu,
        drive_ratio: cfg.drive / cfg.nu,
        target_phase: 2.0 * std::f64::consts::PI * cfg.t_final,
    })
}

fn run_plan(cfg: &Config) -> Result<RunOutput> {
    let req = plan_request(cfg)?;
    let plan = plan_mw(&req)?;
    let values = [
        ("gradient_hz", plan.gradient_hz),
        ("drive_amplitude_hz", plan.drive_amplitude_hz),
        ("target_mode_hz", plan.target_mode_hz),
        ("total_time_s", plan.total_time_s),
        ("detuning_1_hz", plan.detunings_hz.0),
        ("detuning_2_hz", plan.detunings_hz.1),
        ("drive_freq_1_hz", plan.drive_freqs_hz.0),
        ("drive_freq_2_hz", plan.drive_freqs_hz.1),
    ];
    let mut table = Table::new("plan.csv");
    for (k, v) in values {
        table.push(Column::new(k, vec![v]))?;
    }
    let (g, _) = nqrm_coupling(req.lamb_dicke, cfg.drive, cfg.n);
    Ok(RunOutput {
        config: cfg.clone(),
        derived: vec![("eta".into(), req.lamb_dicke), (format!("g_{}", cfg.n), g)],
        summary: values.iter().map(|&(k, v)| (k.to_string(), v)).collect(),
        tables: vec![table],
        flagged: false,
        warnings: Vec::new(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn metadata_carries_the_config() {
        let cfg = preset("si_v_plan", false).unwrap();
        let out = execute(&cfg).unwrap();
        let csv = out.tables[0].to_csv(&out.metadata());
        assert_eq!(config_from_metadata(&csv).unwrap(), cfg.to_text());
    }

    #[test]
    fn plan_gradient() {
        let out = execute(&preset("si_v_plan", false).unwrap()).unwrap();
        let gradient = out.summary_value("gradient_hz").unwrap();
        assert!((gradient - 9250.0).abs() < 1e-9);
    }
}
