//! Verification runs: gQRM/nQRM equivalence, Fock-truncation sweeps,
//! approximate-QRM comparisons and error scaling.

use rayon::prelude::*;

use crate::analytic::{bloch_siegert, grwa, AuxApproximation, BsXi, GrwaBeta, GrwaXi};
use crate::error::{Error, Result};
use crate::frames::{mapped_number, mapped_sigma_xy, mapped_sigma_z, qrm_aux_map, Axis, AuxObservable, Frame, FrameContext};
use crate::hilbert::{
    boson_op, expectation_real, overlap, spin_op, superpose, BosonDim, BosonKind, Ket, SpinKind, SpinLabel,
};
use crate::linalg::{cis, operator_norm, re};
use crate::models::{
    hamiltonian_nqrm, hamiltonian_qrm, nqrm_detunings, validity_report, CouplingBlock, GqrmHamiltonian,
    GqrmParams, NqrmParams, QrmParams, ValidityInputs, ValidityReport, ValidityThresholds,
};
use crate::phase;
use crate::propagate::{evolve_static, substeps_per_period, PeriodicPropagator, PropagationSettings, Trajectory};

/// Initial state as a weighted superposition of `|n⟩|spin⟩`.
#[derive(Clone, Debug, PartialEq)]
pub struct StateSpec {
    pub levels: Vec<usize>,
    pub weights: Vec<f64>,
    pub spin: SpinLabel,
}

impl StateSpec {
    pub fn single(level: usize, spin: SpinLabel) -> Self {
        StateSpec { levels: vec![level], weights: vec![1.0], spin }
    }

    pub fn ket(&self, dim: BosonDim) -> Result<Ket> {
        if self.levels.is_empty() || self.levels.len() != self.weights.len() {
            return Err(Error::InvalidParameter("state needs matching, non-empty level and weight lists".into()));
        }
        let terms: Vec<_> = self.levels.iter().zip(&self.weights).map(|(&n, &w)| (n, self.spin, re(w))).collect();
        superpose(&terms, dim)
    }
}

/// An equivalence experiment stated through the target nQRM.
#[derive(Clone, Debug, PartialEq)]
pub struct EquivalenceSpec {
    pub order: usize,
    /// Second coupling order for the combined model.
    pub second_order: Option<usize>,
    pub mode_freq: f64,
    pub target_mode_freq: f64,
    pub qubit_freq: f64,
    pub target_qubit_freq: f64,
    pub drive: f64,
    pub lamb_dicke: f64,
    pub n_max: usize,
    pub state: StateSpec,
    pub times: Vec<f64>,
    pub settings: PropagationSettings,
    /// Truncation order of the mapped σx.
    pub sigma_order: usize,
    pub thresholds: ValidityThresholds,
    pub escalate: bool,
}

impl EquivalenceSpec {
    pub fn dim(&self) -> Result<BosonDim> {
        BosonDim::new(self.n_max)
    }

    /// The gQRM/nQRM pair implied by the spec.
    pub fn models(&self) -> Result<(GqrmParams, NqrmParams)> {
        let dim = self.dim()?;
        if self.second_order == Some(self.order) {
            return Err(Error::RepeatedOrder(self.order));
        }
        let mut detunings = Vec::new();
        for k in std::iter::once(self.order).chain(self.second_order) {
            let (d1, d2) = nqrm_detunings(k, self.mode_freq, self.target_mode_freq, self.target_qubit_freq);
            detunings.extend([d1, d2]);
        }
        let g = GqrmParams::with_detunings(
            self.mode_freq,
            self.qubit_freq,
            self.drive,
            self.lamb_dicke,
            &detunings,
            dim,
        );
        let n = NqrmParams {
            mode_freq: self.target_mode_freq,
            qubit_freq: self.target_qubit_freq,
            primary: CouplingBlock::from_lamb_dicke(self.lamb_dicke, self.drive, self.order),
            secondary: self.second_order.map(|m| CouplingBlock::from_lamb_dicke(self.lamb_dicke, self.drive, m)),
            dim,
        };
        Ok((g, n))
    }

    /// Same experiment with Ω, ν̃, ω̃ multiplied by `s` and times divided by it,
    /// which keeps η and g_n/ν̃ fixed.
    pub fn scaled(&self, s: f64) -> Self {
        let mut out = self.clone();
        out.drive *= s;
        out.target_mode_freq *= s;
        out.target_qubit_freq *= s;
        out.times = self.times.iter().map(|t| t / s).collect();
        out
    }
}

/// `(target, mapped)` expectation pairs.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ObservablePair {
    pub target: Vec<f64>,
    pub mapped: Vec<f64>,
}

impl ObservablePair {
    pub fn max_deviation(&self) -> f64 {
        self.target.iter().zip(&self.mapped).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
    }

    /// Relative to the target, with the same vacuum floor as the truncation sweep.
    pub fn max_relative_deviation(&self) -> f64 {
        self.target
            .iter()
            .zip(&self.mapped)
            .map(|(&target, &mapped)| relative_difference(mapped, target))
            .fold(0.0, f64::max)
    }
}

#[derive(Clone, Debug)]
pub struct ComparisonSeries {
    pub times: Vec<f64>,
    pub one_minus_abs_f: Vec<f64>,
    pub re_f: Vec<f64>,
    /// ⟨σz⟩ of the nQRM against ⟨−σx⟩ of the gQRM.
    pub sigma_z: ObservablePair,
    /// ⟨a†a⟩ of the nQRM against its exact image in the gQRM frame.
    pub number: ObservablePair,
    /// ⟨σx⟩ of the nQRM against the order-M mapped σx.
    pub sigma_x: ObservablePair,
    pub validity: Vec<ValidityReport>,
    pub period: Option<f64>,
    pub step: Option<f64>,
    pub norm_drift: f64,
    pub leakage: f64,
    pub leakage_flagged: bool,
    pub snap_distance: f64,
    pub self_check_delta: Option<f64>,
    pub warnings: Vec<String>,
}

impl ComparisonSeries {
    pub fn max_infidelity(&self) -> f64 {
        self.one_minus_abs_f.iter().copied().fold(0.0, f64::max)
    }

    /// True when a validity monitor or the leakage monitor crossed its flag.
    pub fn flagged(&self) -> bool {
        self.leakage_flagged || self.validity.iter().any(|v| v.breached.any())
    }

    /// First sample at which the Lamb-Dicke monitor exceeds its threshold.
    pub fn lamb_dicke_breach_time(&self) -> Option<f64> {
        self.validity.iter().zip(&self.times).find(|(v, _)| v.breached.lamb_dicke).map(|(_, &t)| t)
    }
}

/// gQRM trajectory on the engine's grid, plus the engine step when periodic.
fn evolve_gqrm(g: &GqrmParams, psi0: &Ket, times: &[f64], settings: &PropagationSettings) -> Result<(Trajectory, Option<f64>, Option<f64>)> {
    settings.validate()?;
    let hamiltonian = GqrmHamiltonian::new(g)?;
    match g.period()? {
        None => Ok((evolve_static(&hamiltonian.at(0.0), psi0, times, settings)?, None, None)),
        Some(period) => {
            let fastest = g.fastest_drive().map_or(period, |f| 2.0 * std::f64::consts::PI / f);
            let substeps = substeps_per_period(period, fastest, settings.substeps);
            let builder = |t: f64| hamiltonian.at(t);
            let engine = PeriodicPropagator::new(&builder, period, substeps, settings)?;
            let mut traj = engine.evolve(psi0, times, settings)?;
            if settings.self_check {
                let fine = PeriodicPropagator::new(&builder, period, 2 * substeps, settings)?;
                let check = fine.evolve(psi0, &traj.times, settings)?;
                let delta = traj
                    .states
                    .iter()
                    .zip(&check.states)
                    .map(|(a, b)| (&a.amps - &b.amps).norm())
                    .fold(0.0, f64::max);
                traj.self_check_delta = Some(delta);
            }
            Ok((traj, Some(period), Some(engine.step())))
        }
    }
}

/// Evolves the nQRM exactly and the gQRM from `T ψ₀`, and compares them
/// through Γ(t). `Re F` carries the phase `e^{iνη²t/4}` of the c-number the
/// gQRM omits, so that it is comparable with |F|.
pub fn equivalence_run(spec: &EquivalenceSpec) -> Result<ComparisonSeries> {
    let (g, n) = spec.models()?;
    let dim = g.dim;
    let psi_n0 = spec.state.ket(dim)?;
    let frame = Frame::new(FrameContext::new(&g, &n)?);
    let psi_g0 = frame.transform().apply(&psi_n0)?;
    let (traj_g, period, step) = evolve_gqrm(&g, &psi_g0, &spec.times, &spec.settings)?;
    let traj_n = evolve_static(&hamiltonian_nqrm(&n)?, &psi_n0, &traj_g.times, &spec.settings)?;

    let sz = spin_op(SpinKind::Sz, dim);
    let sx = spin_op(SpinKind::Sx, dim);
    let number = boson_op(BosonKind::Number, dim);
    let sz_mapped = mapped_sigma_z(dim);
    let n_mapped = mapped_number(g.lamb_dicke, dim);
    // the order-M map is cos φ A + sin φ B
    let sx_cos = mapped_sigma_xy(Axis::X, spec.sigma_order, 0.0, g.lamb_dicke, dim)?;
    let sx_sin = mapped_sigma_xy(Axis::X, spec.sigma_order, std::f64::consts::FRAC_PI_2, g.lamb_dicke, dim)?;
    let inputs = ValidityInputs::equivalence(&g, &n);
    let offset = g.mode_freq * g.lamb_dicke * g.lamb_dicke / 4.0;

    let samples = traj_g.times.len();
    let mut out = ComparisonSeries {
        times: traj_g.times.clone(),
        one_minus_abs_f: Vec::with_capacity(samples),
        re_f: Vec::with_capacity(samples),
        sigma_z: ObservablePair::default(),
        number: ObservablePair::default(),
        sigma_x: ObservablePair::default(),
        validity: Vec::with_capacity(samples),
        period,
        step,
        norm_drift: traj_g.norm_drift.max(traj_n.norm_drift),
        leakage: traj_g.leakage.max(traj_n.leakage),
        leakage_flagged: traj_g.leakage_flagged || traj_n.leakage_flagged,
        snap_distance: traj_g.snap_distance,
        self_check_delta: traj_g.self_check_delta,
        warnings: traj_g.warnings.clone(),
    };
    for ((&t, psi_g), psi_n) in traj_g.times.iter().zip(&traj_g.states).zip(&traj_n.states) {
        let pulled = frame.apply_gamma_adjoint(t, psi_n)?;
        let f = overlap(psi_g, &pulled)? * cis(phase::reduced(offset, t));
        out.one_minus_abs_f.push((1.0 - f.norm()).max(0.0));
        out.re_f.push(f.re);
        out.sigma_z.target.push(expectation_real(&sz, psi_n)?.0);
        out.sigma_z.mapped.push(expectation_real(&sz_mapped, psi_g)?.0);
        out.number.target.push(expectation_real(&number, psi_n)?.0);
        out.number.mapped.push(expectation_real(&n_mapped, psi_g)?.0);
        let (s, c) = frame.context().spin_phase(t).sin_cos();
        out.sigma_x.target.push(expectation_real(&sx, psi_n)?.0);
        out.sigma_x
            .mapped
            .push(c * expectation_real(&sx_cos, psi_g)?.0 + s * expectation_real(&sx_sin, psi_g)?.0);
        // the monitor must also see the nQRM prediction leave the regime
        let on_g = validity_report(&inputs, psi_g, &spec.thresholds)?;
        let on_n = validity_report(&inputs, &pulled, &spec.thresholds)?;
        out.validity.push(if on_n.lamb_dicke > on_g.lamb_dicke { on_n } else { on_g });
    }
    if spec.escalate {
        if let Some(v) = out.validity.iter().find(|v| v.breached.any()) {
            return Err(Error::ValidityBreach(format!(
                "Ω/ν = {:.3e}, detuning ratio = {:.3e}, Lamb-Dicke = {:.3e}",
                v.ratio_omega, v.ratio_detuning, v.lamb_dicke
            )));
        }
        if out.leakage_flagged {
            return Err(Error::Leakage { leakage: out.leakage, threshold: spec.settings.leakage_flag });
        }
    }
    Ok(out)
}

/// Operator-norm distance between `Γ†(t) U_nQRM(t) T†` and `U_gQRM(t)`,
/// restricted to inputs with at most `n_cut` bosons.
pub fn propagator_equivalence_error(spec: &EquivalenceSpec, t: f64, n_cut: usize) -> Result<f64> {
    let (g, n) = spec.models()?;
    let frame = Frame::new(FrameContext::new(&g, &n)?);
    let period = g.period()?.ok_or_else(|| Error::InvalidParameter("needs a driven gQRM".into()))?;
    let hamiltonian = GqrmHamiltonian::new(&g)?;
    let builder = |s: f64| hamiltonian.at(s);
    let fastest = g.fastest_drive().map_or(period, |f| 2.0 * std::f64::consts::PI / f);
    let engine =
        PeriodicPropagator::new(&builder, period, substeps_per_period(period, fastest, spec.settings.substeps), &spec.settings)?;
    let t = engine.snap(t);
    let u_g = engine.propagator(t);
    let u_n = crate::propagate::propagator_static(&hamiltonian_nqrm(&n)?, t)?;
    // same c-number offset as the state fidelity
    let offset = g.mode_freq * g.lamb_dicke * g.lamb_dicke / 4.0;
    let mapped = frame.gamma(t).mat.adjoint() * u_n.mat * frame.transform().mat.adjoint() * cis(phase::reduced(offset, t));
    let diff = mapped - u_g.mat;
    let cols = 2 * (n_cut + 1);
    Ok(operator_norm(&diff.columns(0, cols).clone_owned()))
}

/// A Fock-truncation study of the nQRM alone.
#[derive(Clone, Debug, PartialEq)]
pub struct SweepSpec {
    pub order: usize,
    pub target_mode_freq: f64,
    pub target_qubit_freq: f64,
    pub coupling: f64,
    pub state: StateSpec,
    pub times: Vec<f64>,
    pub n_max_list: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepSeries {
    pub times: Vec<f64>,
    pub n_max_list: Vec<usize>,
    /// ⟨a†a⟩(t) per truncation.
    pub number: Vec<Vec<f64>>,
    /// `|⟨a†a⟩_N − ⟨a†a⟩_{N'}| / ⟨a†a⟩_{N'}` per consecutive pair.
    pub relative_difference: Vec<Vec<f64>>,
}

impl SweepSeries {
    pub fn max_relative_difference(&self) -> Vec<f64> {
        self.relative_difference.iter().map(|r| r.iter().copied().fold(0.0, f64::max)).collect()
    }
}

/// Below this occupation both runs are treated as empty and the absolute
/// difference is reported instead (a vacuum start gives 0/0 otherwise).
const OCCUPATION_FLOOR: f64 = 1e-12;

fn relative_difference(a: f64, b: f64) -> f64 {
    if b.abs() < OCCUPATION_FLOOR {
        (a - b).abs()
    } else {
        (a - b).abs() / b.abs()
    }
}

pub fn truncation_sweep(spec: &SweepSpec) -> Result<SweepSeries> {
    if spec.n_max_list.len() < 2 {
        return Err(Error::TooFew { needed: 2, got: spec.n_max_list.len() });
    }
    if spec.n_max_list.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidParameter("n_max list must be strictly ascending".into()));
    }
    let settings = PropagationSettings::default();
    let number: Vec<Vec<f64>> = spec
        .n_max_list
        .par_iter()
        .map(|&n_max| -> Result<Vec<f64>> {
            let dim = BosonDim::new(n_max)?;
            let p = NqrmParams {
                mode_freq: spec.target_mode_freq,
                qubit_freq: spec.target_qubit_freq,
                primary: CouplingBlock { order: spec.order, coupling: spec.coupling, phase: spec.order as f64 * std::f64::consts::FRAC_PI_2 },
                secondary: None,
                dim,
            };
            let traj = evolve_static(&hamiltonian_nqrm(&p)?, &spec.state.ket(dim)?, &spec.times, &settings)?;
            let n = boson_op(BosonKind::Number, dim);
            traj.states.iter().map(|s| Ok(expectation_real(&n, s)?.0)).collect()
        })
        .collect::<Result<_>>()?;
    let relative_difference = number
        .windows(2)
        .map(|w| w[0].iter().zip(&w[1]).map(|(&a, &b)| relative_difference(a, b)).collect())
        .collect();
    Ok(SweepSeries { times: spec.times.clone(), n_max_list: spec.n_max_list.clone(), number, relative_difference })
}

/// Switches for the reference approximations.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ApproxVariants {
    pub bs_xi: BsXi,
    pub grwa_xi: GrwaXi,
    pub grwa_beta: GrwaBeta,
}

impl Default for ApproxVariants {
    fn default() -> Self {
        ApproxVariants { bs_xi: BsXi::Half, grwa_xi: GrwaXi::FixedPoint, grwa_beta: GrwaBeta::Quartic }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct QrmCompareSpec {
    pub params: QrmParams,
    pub qubit_freq: f64,
    pub state: StateSpec,
    pub times: Vec<f64>,
    pub variants: ApproxVariants,
    pub thresholds: ValidityThresholds,
}

#[derive(Clone, Debug, PartialEq)]
pub struct QrmComparison {
    pub times: Vec<f64>,
    pub one_minus_f_aux: Vec<f64>,
    pub one_minus_f_bs: Vec<f64>,
    pub one_minus_f_grwa: Vec<f64>,
    /// Exact ⟨a†a⟩ against its auxiliary-frame image.
    pub number: ObservablePair,
    pub validity: Vec<ValidityReport>,
    pub leakage: f64,
    pub leakage_flagged: bool,
}

impl QrmComparison {
    pub fn flagged(&self) -> bool {
        self.leakage_flagged || self.validity.iter().any(|v| v.breached.any())
    }
}

fn infidelity(exact: &[Ket], approx: &[Ket]) -> Result<Vec<f64>> {
    exact.iter().zip(approx).map(|(a, b)| Ok((1.0 - overlap(a, b)?.norm()).max(0.0))).collect()
}

pub fn qrm_approx_compare(spec: &QrmCompareSpec) -> Result<QrmComparison> {
    let p = &spec.params;
    let dim = p.dim;
    let psi0 = spec.state.ket(dim)?;
    let settings = PropagationSettings::default();
    let exact = evolve_static(&hamiltonian_qrm(p)?, &psi0, &spec.times, &settings)?;

    let aux = AuxApproximation::new(p, spec.qubit_freq);
    let aux_states: Vec<Ket> = spec.times.iter().map(|&t| aux.state(&psi0, t)).collect::<Result<_>>()?;
    let bs_states = bloch_siegert(p, spec.variants.bs_xi)?.states(&psi0, &spec.times)?;
    let grwa_states = grwa(p, spec.variants.grwa_xi, spec.variants.grwa_beta)?.states(&psi0, &spec.times)?;

    // ⟨a†a⟩ through the auxiliary frame, where the state is e^{−iH_aux t} T† ψ₀
    let t_dag = crate::frames::transform_t(p.lamb_dicke, dim).adjoint();
    let aux_frame0 = t_dag.apply(&psi0)?;
    let number = boson_op(BosonKind::Number, dim);
    let mut pair = ObservablePair::default();
    for (&t, s) in spec.times.iter().zip(&exact.states) {
        pair.target.push(expectation_real(&number, s)?.0);
        let image = qrm_aux_map(AuxObservable::Number, t, p.lamb_dicke, p.mode_freq, dim);
        let state = crate::analytic::aux_solution(p.drive, p.lamb_dicke, &aux_frame0, t);
        pair.mapped.push(expectation_real(&image, &state)?.0);
    }
    let inputs = ValidityInputs::qrm(p);
    let validity = exact.states.iter().map(|s| validity_report(&inputs, s, &spec.thresholds)).collect::<Result<_>>()?;
    Ok(QrmComparison {
        times: exact.times.clone(),
        one_minus_f_aux: infidelity(&exact.states, &aux_states)?,
        one_minus_f_bs: infidelity(&exact.states, &bs_states)?,
        one_minus_f_grwa: infidelity(&exact.states, &grwa_states)?,
        number: pair,
        validity,
        leakage: exact.leakage,
        leakage_flagged: exact.leakage_flagged,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct ErrorScaling {
    pub ratios: Vec<f64>,
    pub max_infidelity: Vec<f64>,
    /// Max infidelity strictly decreases as Ω/ν decreases.
    pub monotone: bool,
    /// Least-squares slope of log(max infidelity) against log(Ω/ν).
    pub slope: f64,
}

/// Runs `spec` at each Ω/ν in `ratios`, keeping η and g_n/ν̃ fixed.
pub fn error_scaling(spec: &EquivalenceSpec, ratios: &[f64]) -> Result<ErrorScaling> {
    if ratios.len() < 3 {
        return Err(Error::TooFew { needed: 3, got: ratios.len() });
    }
    let base = spec.drive / spec.mode_freq;
    let max_infidelity: Vec<f64> = ratios
        .par_iter()
        .map(|&r| Ok(equivalence_run(&spec.scaled(r / base))?.max_infidelity()))
        .collect::<Result<_>>()?;
    let mut order: Vec<usize> = (0..ratios.len()).collect();
    order.sort_by(|&a, &b| ratios[a].total_cmp(&ratios[b]));
    let monotone = order.windows(2).all(|w| max_infidelity[w[0]] < max_infidelity[w[1]]);
    let xs: Vec<f64> = ratios.iter().map(|r| r.ln()).collect();
    let ys: Vec<f64> = max_infidelity.iter().map(|v| v.max(f64::MIN_POSITIVE).ln()).collect();
    let n = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / n, ys.iter().sum::<f64>() / n);
    let cov: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let var: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let slope = if var > 0.0 { cov / var } else { f64::NAN };
    Ok(ErrorScaling { ratios: ratios.to_vec(), max_infidelity, monotone, slope })
}

/// Evenly spaced samples on `(0, t_final]`, optionally with `t = 0` first.
pub fn time_grid(t_final: f64, samples: usize, include_zero: bool) -> Vec<f64> {
    let mut out = Vec::with_capacity(samples + 1);
    if include_zero {
        out.push(0.0);
    }
    out.extend((1..=samples).map(|k| t_final * (k as f64 / samples as f64)));
    out
}
