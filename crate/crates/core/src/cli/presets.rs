//! Named configurations for the reference experiments.

use super::config::{Config, CouplingSpec, Family, Task, TimeUnits};
use crate::error::{Error, Result};
use crate::hilbert::SpinLabel;

pub const PRESETS: &[&str] = &[
    "fig2a",
    "fig2b",
    "fig3a",
    "fig3b",
    "si_s1_collapse",
    "si_s3_convergence",
    "si_s3_divergence",
    "si_v_plan",
];

/// Qubit splitting of the physical setup, in units of ν.
pub const PHYSICAL_OMEGA: f64 = 1e8;

/// The named preset. Unless `physical_omega` is set, ω is lowered to 10³ν,
/// which leaves every emitted series unchanged.
pub fn preset(name: &str, physical_omega: bool) -> Result<Config> {
    let mut cfg = match name {
        "fig2a" => equivalence(2, 5e-4, 2.0, 0.125, &[2], SpinLabel::UpX),
        "fig2b" => equivalence(3, 5e-4, 3.0, 0.05, &[0, 1], SpinLabel::UpX),
        "fig3a" => qrm(0.1, 0.3, 0, SpinLabel::UpX),
        "fig3b" => qrm(0.04, 0.4, 2, SpinLabel::G),
        "si_s1_collapse" => {
            let mut c = equivalence(2, 1e-4, 0.0, 0.5, &[0], SpinLabel::G);
            c.n_max = 100;
            c
        }
        "si_s3_convergence" => sweep(0.05, &[0, 1], SpinLabel::UpX, vec![80, 160, 320, 640, 1280]),
        "si_s3_divergence" => sweep(0.15, &[0], SpinLabel::E, vec![80, 160, 320, 640]),
        "si_v_plan" => {
            let mut c = Config::defaults(Family::Mw);
            c.coupling = CouplingSpec::LambDicke(0.05);
            c
        }
        _ => return Err(Error::UnknownPreset(name.to_string())),
    };
    cfg.notes.push(format!("# preset {name}"));
    if matches!(cfg.task, Task::Equivalence | Task::CompareQrm) {
        if physical_omega {
            cfg.omega = PHYSICAL_OMEGA;
        } else {
            cfg.notes.push(format!(
                "# omega = {} stands in for the physical {PHYSICAL_OMEGA:e}; emitted series do not depend on it",
                cfg.omega
            ));
        }
    }
    cfg.validate()?;
    Ok(cfg)
}

fn state(cfg: &mut Config, fock: &[usize], spin: SpinLabel) {
    cfg.fock = fock.to_vec();
    cfg.weights = vec![1.0; fock.len()];
    cfg.spin = spin;
}

fn equivalence(n: usize, nu_tilde: f64, detuning_ratio: f64, coupling_ratio: f64, fock: &[usize], spin: SpinLabel) -> Config {
    let mut c = Config::defaults(Family::Nqrm);
    c.n = n;
    c.nu_tilde = nu_tilde;
    c.omega_tilde = detuning_ratio * nu_tilde;
    c.coupling = CouplingSpec::CouplingRatio(coupling_ratio);
    state(&mut c, fock, spin);
    c
}

fn qrm(drive: f64, eta: f64, level: usize, spin: SpinLabel) -> Config {
    let mut c = Config::defaults(Family::Qrm);
    c.drive = drive;
    c.coupling = CouplingSpec::LambDicke(eta);
    c.t_units = TimeUnits::InverseNu;
    c.t_final = 200.0;
    state(&mut c, &[level], spin);
    c
}

fn sweep(coupling_ratio: f64, fock: &[usize], spin: SpinLabel, n_max_list: Vec<usize>) -> Config {
    let mut c = equivalence(3, 5e-4, 3.0, coupling_ratio, fock, spin);
    c.task = Task::Sweep;
    c.n_max_list = n_max_list;
    c
}
