//! Hamiltonian families and the parameter relations connecting them.
//!
//! Units: ħ = 1, all frequencies are angular and expressed in units of the
//! physical mode frequency (which therefore defaults to 1); times are in
//! units of its inverse.

use std::f64::consts::{FRAC_PI_2, PI};

use crate::error::{Error, Result};
use crate::hilbert::{
    boson_matrix, boson_op, displacement_matrix, expectation_real, spin_matrix, spin_op, BosonDim, BosonKind,
    Ket, Op, SpinKind,
};
use crate::linalg::{cis, re, CMat, C64};
use crate::phase;

/// One classical spin-driving tone. Its phase advances as `(ω + δ) t`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Tone {
    pub amplitude: f64,
    pub detuning: f64,
}

/// Generalised QRM: linear spin-boson coupling plus spin-driving tones.
#[derive(Clone, Debug, PartialEq)]
pub struct GqrmParams {
    pub mode_freq: f64,
    /// Bare qubit splitting. It drops out of the gQRM Hamiltonian and only
    /// enters the frame maps.
    pub qubit_freq: f64,
    pub drive: f64,
    pub lamb_dicke: f64,
    pub tones: Vec<Tone>,
    pub dim: BosonDim,
}

impl GqrmParams {
    /// Tones with the shared drive amplitude.
    pub fn with_detunings(
        mode_freq: f64,
        qubit_freq: f64,
        drive: f64,
        lamb_dicke: f64,
        detunings: &[f64],
        dim: BosonDim,
    ) -> Self {
        let tones = detunings.iter().map(|&detuning| Tone { amplitude: drive, detuning }).collect();
        GqrmParams { mode_freq, qubit_freq, drive, lamb_dicke, tones, dim }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.mode_freq > 0.0) || !self.mode_freq.is_finite() {
            return Err(Error::InvalidParameter(format!("mode frequency must be positive (got {})", self.mode_freq)));
        }
        if self.tones.is_empty() {
            return Err(Error::InvalidParameter("gQRM needs at least one tone".into()));
        }
        for (j, tone) in self.tones.iter().enumerate() {
            if !tone.amplitude.is_finite() || tone.amplitude < 0.0 || !tone.detuning.is_finite() {
                return Err(Error::InvalidParameter(format!("tone {j} is not finite/non-negative")));
            }
        }
        if !self.lamb_dicke.is_finite() || !self.drive.is_finite() || !self.qubit_freq.is_finite() {
            return Err(Error::InvalidParameter("non-finite gQRM parameter".into()));
        }
        Ok(())
    }

    pub fn delta1(&self) -> f64 {
        self.tones[0].detuning
    }

    /// Drive frequencies `|δ_j − δ_1|` for the tones beyond the first.
    pub fn drive_frequencies(&self) -> Vec<f64> {
        let d1 = self.delta1();
        self.tones[1..].iter().map(|t| (t.detuning - d1).abs()).filter(|&f| f > 0.0).collect()
    }

    /// Fundamental period of the drive terms, `None` for a static Hamiltonian.
    pub fn period(&self) -> Result<Option<f64>> {
        let freqs = self.drive_frequencies();
        let Some(&f_min) = freqs.iter().min_by(|a, b| a.total_cmp(b)) else {
            return Ok(None);
        };
        'candidates: for k in 1..=64u32 {
            let base = f_min / k as f64;
            for &f in &freqs {
                let ratio = f / base;
                if (ratio - ratio.round()).abs() > 1e-9 * ratio.max(1.0) {
                    continue 'candidates;
                }
            }
            return Ok(Some(2.0 * PI / base));
        }
        Err(Error::InvalidParameter("tone detunings are not commensurate".into()))
    }

    /// Fastest drive frequency, used to size integration substeps.
    pub fn fastest_drive(&self) -> Option<f64> {
        self.drive_frequencies().into_iter().max_by(|a, b| a.total_cmp(b))
    }
}

/// Precomputed pieces of the gQRM Hamiltonian; `at(t)` only adds the drive.
#[derive(Clone, Debug)]
pub struct GqrmHamiltonian {
    params: GqrmParams,
    static_part: CMat,
    sz: CMat,
    sy: CMat,
}

impl GqrmHamiltonian {
    pub fn new(params: &GqrmParams) -> Result<Self> {
        params.validate()?;
        let dim = params.dim;
        let n = boson_op(BosonKind::Number, dim);
        let sx = spin_op(SpinKind::Sx, dim);
        let p_sx = Op::product(&boson_matrix(BosonKind::P, dim.levels()), &spin_matrix(SpinKind::Sx), dim, true);
        let static_part = n.mat * re(params.mode_freq) + sx.mat * re(params.delta1() / 2.0)
            - p_sx.mat * re(params.lamb_dicke * params.mode_freq / 2.0);
        Ok(GqrmHamiltonian {
            params: params.clone(),
            static_part,
            sz: spin_op(SpinKind::Sz, dim).mat,
            sy: spin_op(SpinKind::Sy, dim).mat,
        })
    }

    pub fn params(&self) -> &GqrmParams {
        &self.params
    }

    /// Coefficients of σz and σy in the drive term at time `t`.
    pub fn drive_coefficients(&self, t: f64) -> (f64, f64) {
        let d1 = self.params.delta1();
        let mut cz = 0.0;
        let mut cy = 0.0;
        for tone in &self.params.tones {
            let theta = phase::reduced(tone.detuning - d1, t);
            let (s, c) = theta.sin_cos();
            cz += tone.amplitude / 2.0 * c;
            cy += tone.amplitude / 2.0 * s;
        }
        (cz, cy)
    }

    pub fn at(&self, t: f64) -> Op {
        let (cz, cy) = self.drive_coefficients(t);
        let mat = &self.static_part + &self.sz * re(cz) + &self.sy * re(cy);
        Op::from_parts(mat, self.params.dim, true)
    }
}

/// `ν a†a + (δ₁/2)σx − (ην/2) p σx + Σ_j (Ω_j/2){cos[(δ_j−δ₁)t] σz + sin[(δ_j−δ₁)t] σy}`.
pub fn hamiltonian_gqrm(p: &GqrmParams, t: f64) -> Result<Op> {
    Ok(GqrmHamiltonian::new(p)?.at(t))
}

/// Master Hamiltonian `ν a†a + (ω/2)σz + Σ_j (Ω_j/2)[σ⁺ e^{iη(a+a†)} e^{−iα_j} + H.c.]`
/// with `α_j = (ω + δ_j) t`.
pub fn hamiltonian_hs(p: &GqrmParams, t: f64) -> Result<Op> {
    p.validate()?;
    let dim = p.dim;
    let kick = displacement_matrix(C64::new(0.0, p.lamb_dicke), dim.levels());
    let splus = spin_matrix(SpinKind::SPlus);
    let mut mat = boson_op(BosonKind::Number, dim).mat * re(p.mode_freq)
        + spin_op(SpinKind::Sz, dim).mat * re(p.qubit_freq / 2.0);
    for tone in &p.tones {
        let alpha = phase::reduced(p.qubit_freq + tone.detuning, t);
        let term = kick.kronecker(&splus) * (cis(-alpha) * tone.amplitude / 2.0);
        mat += &term + term.adjoint();
    }
    Ok(Op::from_parts(mat, dim, true))
}

/// The master Hamiltonian after conjugation by `T(iη/2)`, written out in
/// closed form: `ν a†a − (ω/2)σx − (ην/2) p σx + νη²/4 + Σ_j (Ω_j/2)[cos α_j σz + sin α_j σy]`.
pub fn hamiltonian_hs_transformed(p: &GqrmParams, t: f64) -> Result<Op> {
    p.validate()?;
    let dim = p.dim;
    let p_sx = Op::product(&boson_matrix(BosonKind::P, dim.levels()), &spin_matrix(SpinKind::Sx), dim, true);
    let mut mat = boson_op(BosonKind::Number, dim).mat * re(p.mode_freq)
        - spin_op(SpinKind::Sx, dim).mat * re(p.qubit_freq / 2.0)
        - p_sx.mat * re(p.lamb_dicke * p.mode_freq / 2.0)
        + Op::identity(dim).mat * re(p.mode_freq * p.lamb_dicke * p.lamb_dicke / 4.0);
    let sz = spin_op(SpinKind::Sz, dim).mat;
    let sy = spin_op(SpinKind::Sy, dim).mat;
    for tone in &p.tones {
        let (s, c) = phase::reduced(p.qubit_freq + tone.detuning, t).sin_cos();
        mat += &sz * re(tone.amplitude / 2.0 * c) + &sy * re(tone.amplitude / 2.0 * s);
    }
    Ok(Op::from_parts(mat, dim, true))
}

/// `(δ₁, δ₂) = (−nν − ω̃ + nν̃, nν − ω̃ − nν̃)`.
pub fn nqrm_detunings(order: usize, mode_freq: f64, target_mode_freq: f64, target_qubit_freq: f64) -> (f64, f64) {
    let n = order as f64;
    (
        -n * mode_freq - target_qubit_freq + n * target_mode_freq,
        n * mode_freq - target_qubit_freq - n * target_mode_freq,
    )
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

/// `(g_n, φ_n) = (ηⁿ Ω / (2 n!), nπ/2)`.
pub fn nqrm_coupling(lamb_dicke: f64, drive: f64, order: usize) -> (f64, f64) {
    let g = lamb_dicke.powi(order as i32) * drive / (2.0 * factorial(order));
    (g, order as f64 * FRAC_PI_2)
}

/// Inverse of [`nqrm_coupling`]: the non-negative η producing coupling `g`.
pub fn lamb_dicke_for_coupling(coupling: f64, drive: f64, order: usize) -> Result<f64> {
    if !(drive > 0.0) || coupling < 0.0 || order == 0 {
        return Err(Error::InvalidParameter("coupling inversion needs Ω > 0, g ≥ 0 and n ≥ 1".into()));
    }
    Ok((2.0 * factorial(order) * coupling / drive).powf(1.0 / order as f64))
}

/// A `g [e^{iφ}σ⁺ + e^{−iφ}σ⁻][aⁿ + (a†)ⁿ]` block.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CouplingBlock {
    pub order: usize,
    pub coupling: f64,
    pub phase: f64,
}

impl CouplingBlock {
    pub fn from_lamb_dicke(lamb_dicke: f64, drive: f64, order: usize) -> Self {
        let (coupling, phase) = nqrm_coupling(lamb_dicke, drive, order);
        CouplingBlock { order, coupling, phase }
    }
}

/// nth-order QRM, optionally with a second coupling block (combined model).
#[derive(Clone, Debug, PartialEq)]
pub struct NqrmParams {
    pub mode_freq: f64,
    pub qubit_freq: f64,
    pub primary: CouplingBlock,
    pub secondary: Option<CouplingBlock>,
    pub dim: BosonDim,
}

impl NqrmParams {
    pub fn order(&self) -> usize {
        self.primary.order
    }

    fn validate(&self) -> Result<()> {
        for block in std::iter::once(&self.primary).chain(self.secondary.as_ref()) {
            if block.order == 0 {
                return Err(Error::InvalidParameter("coupling order must be ≥ 1".into()));
            }
            if block.order > self.dim.n_max() {
                return Err(Error::OrderExceedsTruncation { order: block.order, n_max: self.dim.n_max() });
            }
            if !(block.coupling >= 0.0) {
                return Err(Error::InvalidParameter(format!("coupling must be ≥ 0 (got {})", block.coupling)));
            }
        }
        Ok(())
    }
}

fn coupling_term(block: &CouplingBlock, dim: BosonDim) -> CMat {
    let a = boson_matrix(BosonKind::Annihilate, dim.levels());
    let mut an = CMat::identity(dim.levels(), dim.levels());
    for _ in 0..block.order {
        an = &an * &a;
    }
    let boson = &an + an.adjoint();
    let phase = cis(block.phase);
    let spin = spin_matrix(SpinKind::SPlus) * phase + spin_matrix(SpinKind::SMinus) * phase.conj();
    boson.kronecker(&spin) * re(block.coupling)
}

/// `ν̃ a†a + (ω̃/2)σz + g_n [e^{iφ_n}σ⁺ + e^{−iφ_n}σ⁻][aⁿ + (a†)ⁿ]` (plus the
/// second block when present).
pub fn hamiltonian_nqrm(p: &NqrmParams) -> Result<Op> {
    p.validate()?;
    let dim = p.dim;
    let mut mat = boson_op(BosonKind::Number, dim).mat * re(p.mode_freq)
        + spin_op(SpinKind::Sz, dim).mat * re(p.qubit_freq / 2.0)
        + coupling_term(&p.primary, dim);
    if let Some(second) = &p.secondary {
        mat += coupling_term(second, dim);
    }
    Ok(Op::from_parts(mat, dim, true))
}

/// Combined nth- and mth-order model; both blocks must be present and distinct.
pub fn hamiltonian_combined(p: &NqrmParams) -> Result<Op> {
    let Some(second) = &p.secondary else {
        return Err(Error::InvalidParameter("combined model needs a second coupling block".into()));
    };
    if second.order == p.primary.order {
        return Err(Error::RepeatedOrder(second.order));
    }
    hamiltonian_nqrm(p)
}

/// Standard QRM with coupling `g̃ = ην/2`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QrmParams {
    pub mode_freq: f64,
    pub lamb_dicke: f64,
    pub drive: f64,
    pub dim: BosonDim,
}

impl QrmParams {
    pub fn coupling(&self) -> f64 {
        self.lamb_dicke * self.mode_freq / 2.0
    }

    fn validate(&self) -> Result<()> {
        if !(self.mode_freq > 0.0) {
            return Err(Error::InvalidParameter(format!("mode frequency must be positive (got {})", self.mode_freq)));
        }
        Ok(())
    }
}

/// `ν a†a − (ην/2) p σx + (Ω/2) σz`.
pub fn hamiltonian_qrm(p: &QrmParams) -> Result<Op> {
    p.validate()?;
    let dim = p.dim;
    let p_sx = Op::product(&boson_matrix(BosonKind::P, dim.levels()), &spin_matrix(SpinKind::Sx), dim, true);
    let mat = boson_op(BosonKind::Number, dim).mat * re(p.mode_freq) - p_sx.mat * re(p.coupling())
        + spin_op(SpinKind::Sz, dim).mat * re(p.drive / 2.0);
    Ok(Op::from_parts(mat, dim, true))
}

/// `(Ω/2) σx [1 − η²(a†a + 1/2)]`.
pub fn hamiltonian_aux(p: &QrmParams) -> Result<Op> {
    p.validate()?;
    let dim = p.dim;
    let eta2 = p.lamb_dicke * p.lamb_dicke;
    let diag = CMat::from_diagonal(&nalgebra::DVector::from_fn(dim.levels(), |n, _| {
        re(1.0 - eta2 * (n as f64 + 0.5))
    }));
    Ok(Op::product(&diag, &spin_matrix(SpinKind::Sx), dim, true).scale_re(p.drive / 2.0))
}

/// One microwave drive `Ω_j σx cos(ω_j t + φ_j)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MwDrive {
    pub amplitude: f64,
    pub freq: f64,
    pub phase: f64,
}

/// Microwave-driven trapped ion in a magnetic-field gradient.
#[derive(Clone, Debug, PartialEq)]
pub struct MwParams {
    /// Qubit splitting including the Zeeman shift.
    pub qubit_freq: f64,
    pub mode_freq: f64,
    /// Gradient coupling Δ of `Δ (a + a†) σz`.
    pub gradient: f64,
    pub drives: Vec<MwDrive>,
    pub dim: BosonDim,
}

impl MwParams {
    pub fn lamb_dicke(&self) -> f64 {
        2.0 * self.gradient / self.mode_freq
    }

    /// Checks the phase-π pattern and returns `(δ_j)` with the first drive
    /// defining the rotating frame.
    fn detunings(&self) -> Result<Vec<f64>> {
        if !(self.mode_freq > 0.0) {
            return Err(Error::InvalidParameter("mode frequency must be positive".into()));
        }
        if self.drives.is_empty() {
            return Err(Error::DrivePattern("no drives".into()));
        }
        for (j, d) in self.drives.iter().enumerate() {
            if (phase::wrap(d.phase - PI)).abs() > 1e-12 {
                return Err(Error::DrivePattern(format!("drive {j} has phase {} (expected π)", d.phase)));
            }
            if !(d.amplitude >= 0.0) {
                return Err(Error::DrivePattern(format!("drive {j} has negative amplitude")));
            }
        }
        let frame = self.drives[0].freq;
        let delta1 = self.qubit_freq - frame;
        Ok(self.drives.iter().map(|d| delta1 + (frame - d.freq)).collect())
    }
}

/// Interaction-picture microwave Hamiltonian
/// `ν a†a + Δ(a+a†)σz + (δ₁/2)σz − Σ_j (Ω_j/2)(σ⁺ e^{i(δ_j−δ₁)t} + H.c.)`.
pub fn hamiltonian_mw_interaction(p: &MwParams, t: f64) -> Result<Op> {
    let detunings = p.detunings()?;
    let dim = p.dim;
    let x_sz = Op::product(&boson_matrix(BosonKind::X, dim.levels()), &spin_matrix(SpinKind::Sz), dim, true);
    let mut mat = boson_op(BosonKind::Number, dim).mat * re(p.mode_freq)
        + x_sz.mat * re(p.gradient)
        + spin_op(SpinKind::Sz, dim).mat * re(detunings[0] / 2.0);
    let splus = spin_op(SpinKind::SPlus, dim).mat;
    for (d, &delta) in p.drives.iter().zip(&detunings) {
        let theta = phase::reduced(delta - detunings[0], t);
        let term = &splus * (cis(theta) * (-d.amplitude / 2.0));
        mat += &term + term.adjoint();
    }
    Ok(Op::from_parts(mat, dim, true))
}

/// gQRM parameters reached by the microwave basis change (`η = 2Δ/ν`).
pub fn mw_to_gqrm(p: &MwParams) -> Result<GqrmParams> {
    let detunings = p.detunings()?;
    let tones = p
        .drives
        .iter()
        .zip(&detunings)
        .map(|(d, &detuning)| Tone { amplitude: d.amplitude, detuning })
        .collect();
    Ok(GqrmParams {
        mode_freq: p.mode_freq,
        qubit_freq: p.qubit_freq,
        drive: p.drives[0].amplitude,
        lamb_dicke: p.lamb_dicke(),
        tones,
        dim: p.dim,
    })
}

/// Physical request for a microwave implementation, all frequencies in Hz
/// (i.e. divided by 2π).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MwPlanRequest {
    pub lamb_dicke: f64,
    pub mode_freq_hz: f64,
    pub qubit_freq_hz: f64,
    pub order: usize,
    /// ν̃/ν
    pub target_mode_ratio: f64,
    /// ω̃/ν
    pub target_qubit_ratio: f64,
    /// Ω/ν
    pub drive_ratio: f64,
    /// Evolution time as ν̃ t (dimensionless).
    pub target_phase: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct MwPlan {
    pub gradient_hz: f64,
    pub drive_amplitude_hz: f64,
    pub target_mode_hz: f64,
    pub total_time_s: f64,
    pub detunings_hz: (f64, f64),
    pub drive_freqs_hz: (f64, f64),
}

/// Scalar implementation plan: `Δ = ην/2`, physical duration
/// `(ν̃ t)/ν̃_phys` and the two drive frequencies.
pub fn plan_mw(req: &MwPlanRequest) -> Result<MwPlan> {
    if !(req.mode_freq_hz > 0.0) || !(req.target_mode_ratio > 0.0) {
        return Err(Error::InvalidParameter("plan needs positive trap frequency and ν̃/ν".into()));
    }
    let (d1, d2) = nqrm_detunings(req.order, 1.0, req.target_mode_ratio, req.target_qubit_ratio);
    let target_mode_hz = req.target_mode_ratio * req.mode_freq_hz;
    let total_time_s = req.target_phase / (2.0 * PI * target_mode_hz);
    let detunings_hz = (d1 * req.mode_freq_hz, d2 * req.mode_freq_hz);
    let first = req.qubit_freq_hz - detunings_hz.0;
    let second = first - (detunings_hz.1 - detunings_hz.0);
    Ok(MwPlan {
        gradient_hz: req.lamb_dicke * req.mode_freq_hz / 2.0,
        drive_amplitude_hz: req.drive_ratio * req.mode_freq_hz,
        target_mode_hz,
        total_time_s,
        detunings_hz,
        drive_freqs_hz: (first, second),
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ValidityThresholds {
    pub omega_ratio: f64,
    pub detuning_ratio: f64,
    pub lamb_dicke: f64,
}

impl Default for ValidityThresholds {
    fn default() -> Self {
        ValidityThresholds { omega_ratio: 0.2, detuning_ratio: 0.05, lamb_dicke: 0.3 }
    }
}

/// State-independent inputs of the validity monitors.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ValidityInputs {
    pub omega_ratio: f64,
    pub detuning_ratio: f64,
    pub lamb_dicke: f64,
}

impl ValidityInputs {
    pub fn equivalence(g: &GqrmParams, n: &NqrmParams) -> Self {
        let detuning_ratio = std::iter::once(&n.primary)
            .chain(n.secondary.as_ref())
            .map(|b| {
                let k = b.order as f64;
                (n.qubit_freq + k * n.mode_freq).abs() / (k * g.mode_freq)
            })
            .fold(0.0, f64::max);
        ValidityInputs { omega_ratio: g.drive / g.mode_freq, detuning_ratio, lamb_dicke: g.lamb_dicke }
    }

    pub fn qrm(p: &QrmParams) -> Self {
        ValidityInputs { omega_ratio: p.drive / p.mode_freq, detuning_ratio: 0.0, lamb_dicke: p.lamb_dicke }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Breaches {
    pub omega_ratio: bool,
    pub detuning_ratio: bool,
    pub lamb_dicke: bool,
}

impl Breaches {
    pub fn any(&self) -> bool {
        self.omega_ratio || self.detuning_ratio || self.lamb_dicke
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ValidityReport {
    pub ratio_omega: f64,
    pub ratio_detuning: f64,
    pub lamb_dicke: f64,
    pub breached: Breaches,
}

/// `|η| √⟨(a+a†)²⟩` on `psi`.
pub fn lamb_dicke_monitor(lamb_dicke: f64, psi: &Ket) -> Result<f64> {
    let x = boson_op(BosonKind::X, psi.dim);
    let x2 = &x * &x;
    let (v, _) = expectation_real(&x2, psi)?;
    Ok(lamb_dicke.abs() * v.max(0.0).sqrt())
}

pub fn validity_report(inputs: &ValidityInputs, psi: &Ket, thresholds: &ValidityThresholds) -> Result<ValidityReport> {
    let lamb_dicke = lamb_dicke_monitor(inputs.lamb_dicke, psi)?;
    let ratio_omega = inputs.omega_ratio.abs();
    let ratio_detuning = inputs.detuning_ratio.abs();
    Ok(ValidityReport {
        ratio_omega,
        ratio_detuning,
        lamb_dicke,
        breached: Breaches {
            omega_ratio: ratio_omega > thresholds.omega_ratio,
            detuning_ratio: ratio_detuning > thresholds.detuning_ratio,
            lamb_dicke: lamb_dicke > thresholds.lamb_dicke,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert::{basis_ket, SpinLabel};
    use crate::linalg::max_abs;

    fn dim(n: usize) -> BosonDim {
        BosonDim::new(n).unwrap()
    }

    #[test]
    fn detuning_examples() {
        let (d1, d2) = nqrm_detunings(2, 1.0, 5e-4, 1e-3);
        assert!((d1 + 2.0).abs() < 1e-12 && (d2 - 1.998).abs() < 1e-12);
        assert_eq!(nqrm_detunings(1, 1.0, 0.0, 0.0), (-1.0, 1.0));
        let (d1, d2) = nqrm_detunings(3, 1.0, 5e-4, 1.5e-3);
        assert!((d1 + 3.0).abs() < 1e-12 && (d2 - 2.997).abs() < 1e-12);
    }

    #[test]
    fn coupling_examples() {
        let (g2, phi2) = nqrm_coupling(0.05, 0.1, 2);
        assert!((g2 - 6.25e-5).abs() < 1e-18);
        assert!((g2 / 5e-4 - 0.125).abs() < 1e-12);
        assert!((phi2 - PI).abs() < 1e-15);
        let eta = lamb_dicke_for_coupling(0.05 * 5e-4, 0.1, 3).unwrap();
        assert!((eta - 0.1442).abs() < 5e-5, "{eta}");
        let (g1, phi1) = nqrm_coupling(0.3, 0.2, 1);
        assert!((g1 - 0.03).abs() < 1e-15 && (phi1 - FRAC_PI_2).abs() < 1e-15);
    }

    fn single_tone(eta: f64, delta1: f64) -> GqrmParams {
        GqrmParams::with_detunings(1.0, 1e3, 0.1, eta, &[delta1], dim(6))
    }

    #[test]
    fn master_hamiltonian_without_coupling() {
        let p = single_tone(0.0, 0.0);
        let h = hamiltonian_hs(&p, 0.0).unwrap();
        let d = p.dim;
        let expected = &(&boson_op(BosonKind::Number, d) + &spin_op(SpinKind::Sz, d).scale_re(500.0))
            + &spin_op(SpinKind::Sx, d).scale_re(0.05);
        assert!(h.max_distance(&expected) < 1e-12);
    }

    #[test]
    fn builders_are_hermitian() {
        let p = GqrmParams::with_detunings(1.0, 1e3, 0.1, 0.2, &[-2.0, 1.998], dim(10));
        for t in [0.0, 0.37, 15.2, 1234.5] {
            assert!(hamiltonian_hs(&p, t).unwrap().hermiticity_defect() < 1e-12);
            assert!(hamiltonian_gqrm(&p, t).unwrap().hermiticity_defect() < 1e-12);
            assert!(hamiltonian_hs_transformed(&p, t).unwrap().hermiticity_defect() < 1e-12);
        }
        let q = QrmParams { mode_freq: 1.0, lamb_dicke: 0.3, drive: 0.1, dim: dim(10) };
        assert!(hamiltonian_qrm(&q).unwrap().hermiticity_defect() < 1e-12);
        assert!(hamiltonian_aux(&q).unwrap().hermiticity_defect() < 1e-12);
    }

    #[test]
    fn gqrm_single_tone_is_qrm() {
        let q = QrmParams { mode_freq: 1.0, lamb_dicke: 0.3, drive: 0.1, dim: dim(8) };
        let g = GqrmParams::with_detunings(1.0, 1e3, 0.1, 0.3, &[0.0], dim(8));
        let hq = hamiltonian_qrm(&q).unwrap();
        for t in [0.0, 1.3, 77.0] {
            assert_eq!(hamiltonian_gqrm(&g, t).unwrap().max_distance(&hq), 0.0);
        }
    }

    #[test]
    fn two_tones_at_zero_time() {
        let p = GqrmParams::with_detunings(1.0, 1e3, 0.1, 0.05, &[-2.0, 1.998], dim(4));
        let h = hamiltonian_gqrm(&p, 0.0).unwrap();
        let mut undriven = p.clone();
        undriven.tones.iter_mut().for_each(|t| t.amplitude = 0.0);
        let h0 = hamiltonian_gqrm(&undriven, 0.0).unwrap();
        let drive = &h - &h0;
        assert!(drive.max_distance(&spin_op(SpinKind::Sz, p.dim).scale_re(0.1)) < 1e-15);
    }

    #[test]
    fn gqrm_is_periodic_and_omega_free() {
        let p = GqrmParams::with_detunings(1.0, 1e3, 0.1, 0.05, &[-2.0, 1.998], dim(6));
        let period = p.period().unwrap().unwrap();
        assert!((period - 2.0 * PI / 3.998).abs() < 1e-12);
        let hamiltonian = GqrmHamiltonian::new(&p).unwrap();
        for t in [0.1, 2.5, 100.0] {
            assert!(hamiltonian.at(t).max_distance(&hamiltonian.at(t + period)) < 1e-12);
        }
        let mut other = p.clone();
        other.qubit_freq = 1e4;
        assert_eq!(hamiltonian_gqrm(&p, 3.3).unwrap().max_distance(&hamiltonian_gqrm(&other, 3.3).unwrap()), 0.0);
    }

    #[test]
    fn four_tone_gqrm_matches_trig_expansion() {
        // δ_j for orders n = 1 and m = 2
        let (nu, nut, omt, drive, eta) = (1.0, 5e-4, 1e-3, 0.1, 0.1);
        let (n, m) = (1usize, 2usize);
        let (d1, d2) = nqrm_detunings(n, nu, nut, omt);
        let (d3, d4) = nqrm_detunings(m, nu, nut, omt);
        let p = GqrmParams::with_detunings(nu, 1e3, drive, eta, &[d1, d2, d3, d4], dim(8));
        let d = p.dim;
        let u = nu - nut;
        let (nf, mf) = (n as f64, m as f64);
        for t in [0.0, 0.4, 3.7, 1000.3] {
            let cz = drive / 2.0
                + drive / 2.0 * ((2.0 * nf * u * t).cos() + 2.0 * (nf * u * t).cos() * (mf * u * t).cos());
            let cy = drive * (nf * u * t).sin() * ((nf * u * t).cos() + (mf * u * t).cos());
            let p_sx = Op::product(&boson_matrix(BosonKind::P, d.levels()), &spin_matrix(SpinKind::Sx), d, true);
            let expected = boson_op(BosonKind::Number, d).mat * re(nu)
                + spin_op(SpinKind::Sx, d).mat * re((nf * (nut - nu) - omt) / 2.0)
                - p_sx.mat * re(eta * nu / 2.0)
                + spin_op(SpinKind::Sz, d).mat * re(cz)
                + spin_op(SpinKind::Sy, d).mat * re(cy);
            let h = hamiltonian_gqrm(&p, t).unwrap();
            assert!(max_abs(&(h.mat - expected)) < 1e-12, "t = {t}");
        }
        let period = p.period().unwrap().unwrap();
        assert!((period - 2.0 * PI / u).abs() < 1e-9);
    }

    #[test]
    fn second_order_model_form() {
        let (eta, drive) = (0.05, 0.1);
        let p = NqrmParams {
            mode_freq: 5e-4,
            qubit_freq: 1e-3,
            primary: CouplingBlock::from_lamb_dicke(eta, drive, 2),
            secondary: None,
            dim: dim(8),
        };
        let h = hamiltonian_nqrm(&p).unwrap();
        let d = p.dim;
        let a = boson_matrix(BosonKind::Annihilate, d.levels());
        let a2 = &a * &a;
        let expected = boson_op(BosonKind::Number, d).mat * re(5e-4)
            + spin_op(SpinKind::Sz, d).mat * re(5e-4)
            - (&a2 + a2.adjoint()).kronecker(&spin_matrix(SpinKind::Sx)) * re(eta * eta * drive / 4.0);
        assert!(max_abs(&(h.mat - expected)) < 1e-15);
    }

    #[test]
    fn third_order_couples_through_sigma_y() {
        let p = NqrmParams {
            mode_freq: 0.0,
            qubit_freq: 0.0,
            primary: CouplingBlock { order: 3, coupling: 1.0, phase: 3.0 * FRAC_PI_2 },
            secondary: None,
            dim: dim(6),
        };
        let h = hamiltonian_nqrm(&p).unwrap();
        let a = boson_matrix(BosonKind::Annihilate, 7);
        let a3 = &a * &a * &a;
        // e^{i3π/2}σ⁺ + e^{-i3π/2}σ⁻ = −iσ⁺ + iσ⁻ = σy in the (g, e) ordering
        let expected = (&a3 + a3.adjoint()).kronecker(&spin_matrix(SpinKind::Sy));
        assert!(max_abs(&(h.mat - expected)) < 1e-14);
    }

    #[test]
    fn uncoupled_model_is_diagonal_and_orders_checked() {
        let mut p = NqrmParams {
            mode_freq: 1.0,
            qubit_freq: 0.5,
            primary: CouplingBlock { order: 2, coupling: 0.0, phase: PI },
            secondary: None,
            dim: dim(5),
        };
        let h = hamiltonian_nqrm(&p).unwrap();
        for i in 0..h.mat.nrows() {
            for j in 0..h.mat.ncols() {
                if i != j {
                    assert_eq!(h.mat[(i, j)], C64::new(0.0, 0.0));
                }
            }
        }
        p.primary.order = 6;
        assert!(matches!(hamiltonian_nqrm(&p), Err(Error::OrderExceedsTruncation { .. })));
    }

    #[test]
    fn combined_model() {
        let base = NqrmParams {
            mode_freq: 5e-4,
            qubit_freq: 1e-3,
            primary: CouplingBlock::from_lamb_dicke(0.1, 0.1, 1),
            secondary: Some(CouplingBlock { order: 2, coupling: 0.0, phase: PI }),
            dim: dim(8),
        };
        let mut single = base.clone();
        single.secondary = None;
        let hc = hamiltonian_combined(&base).unwrap();
        assert!(hc.max_distance(&hamiltonian_nqrm(&single).unwrap()) < 1e-18);
        let mut both = base.clone();
        both.secondary = Some(CouplingBlock::from_lamb_dicke(0.1, 0.1, 2));
        assert!(hamiltonian_combined(&both).unwrap().hermiticity_defect() < 1e-12);
        let mut repeated = base.clone();
        repeated.secondary = Some(CouplingBlock::from_lamb_dicke(0.1, 0.1, 1));
        assert!(matches!(hamiltonian_combined(&repeated), Err(Error::RepeatedOrder(1))));
    }

    #[test]
    fn aux_spectrum_examples() {
        let q = QrmParams { mode_freq: 1.0, lamb_dicke: 0.0, drive: 0.1, dim: dim(4) };
        let h = hamiltonian_aux(&q).unwrap();
        assert!(h.max_distance(&spin_op(SpinKind::Sx, q.dim).scale_re(0.05)) < 1e-15);
        let q = QrmParams { lamb_dicke: 0.3, ..q };
        let mut spec = crate::linalg::HermitianEigen::new(&hamiltonian_aux(&q).unwrap().mat).values.as_slice().to_vec();
        spec.sort_by(|a, b| a.total_cmp(b));
        let mut expected: Vec<f64> = (0..5)
            .flat_map(|n| {
                let e = 0.05 * (1.0 - 0.09 * (n as f64 + 0.5));
                [e, -e]
            })
            .collect();
        expected.sort_by(|a, b| a.total_cmp(b));
        assert!((expected.iter().copied().fold(f64::MIN, f64::max) - 0.04775).abs() < 1e-15);
        for (a, b) in spec.iter().zip(&expected) {
            assert!((a - b).abs() < 1e-14);
        }
    }

    fn mw_example(gradient: f64) -> MwParams {
        // frame at ω̃ = ω₁, δ₁ = ω − ω₁ = −2, δ₂ − δ₁ = ω₁ − ω₂ = 3.998
        MwParams {
            qubit_freq: 1000.0,
            mode_freq: 1.0,
            gradient,
            drives: vec![
                MwDrive { amplitude: 0.1, freq: 1002.0, phase: PI },
                MwDrive { amplitude: 0.1, freq: 1002.0 - 3.998, phase: PI },
            ],
            dim: dim(8),
        }
    }

    #[test]
    fn mw_parameter_recovery() {
        let p = mw_example(0.025);
        assert!((p.lamb_dicke() - 0.05).abs() < 1e-15);
        let g = mw_to_gqrm(&p).unwrap();
        assert!((g.delta1() + 2.0).abs() < 1e-12);
        assert!((g.tones[1].detuning - 1.998).abs() < 1e-12);
        let mut bad = p.clone();
        bad.drives[1].phase = 0.0;
        assert!(matches!(hamiltonian_mw_interaction(&bad, 0.0), Err(Error::DrivePattern(_))));
    }

    #[test]
    fn mw_without_gradient_is_block_diagonal() {
        let p = mw_example(0.0);
        let h = hamiltonian_mw_interaction(&p, 0.7).unwrap();
        assert!(h.hermiticity_defect() < 1e-12);
        for i in 0..h.mat.nrows() {
            for j in 0..h.mat.ncols() {
                if i / 2 != j / 2 {
                    assert_eq!(h.mat[(i, j)], C64::new(0.0, 0.0));
                }
            }
        }
    }

    #[test]
    fn plan_examples() {
        let nu_hz = 370e3;
        let req = MwPlanRequest {
            lamb_dicke: 0.05,
            mode_freq_hz: nu_hz,
            qubit_freq_hz: 12.4e9,
            order: 2,
            target_mode_ratio: 5e-4,
            target_qubit_ratio: 1e-3,
            drive_ratio: 0.1,
            target_phase: 8.0 * PI,
        };
        let plan = plan_mw(&req).unwrap();
        assert!((plan.gradient_hz - 9250.0).abs() < 1e-9);
        // 4 / (5e-4 · 370 kHz)
        assert!((plan.total_time_s - 4.0 / 185.0).abs() < 1e-15);
        let zero = plan_mw(&MwPlanRequest { lamb_dicke: 0.0, ..req }).unwrap();
        assert_eq!(zero.gradient_hz, 0.0);
    }

    #[test]
    fn validity_examples() {
        let d = dim(20);
        let vac = basis_ket(0, SpinLabel::G, d).unwrap();
        let inputs = ValidityInputs { omega_ratio: 0.1, detuning_ratio: 1e-3, lamb_dicke: 0.05 };
        let r = validity_report(&inputs, &vac, &ValidityThresholds::default()).unwrap();
        assert!((r.lamb_dicke - 0.05).abs() < 1e-15);
        assert!((r.ratio_omega - 0.1).abs() < 1e-15);
        assert!(!r.breached.any());
        let excited = basis_ket(20, SpinLabel::G, d).unwrap();
        let r = validity_report(&ValidityInputs { lamb_dicke: 0.1, ..inputs }, &excited, &ValidityThresholds::default())
            .unwrap();
        assert!(r.breached.lamb_dicke);
    }
}
