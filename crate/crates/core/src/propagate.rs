//! Time-evolution engines: static eigensolve, one-period propagator reuse for
//! periodic Hamiltonians, and a plain fixed-step stepper.

use crate::error::{Error, Result};
use crate::hilbert::{BosonDim, Ket, Op};
use crate::linalg::{cis, nearest_unitary, BlockSpectrum, CMat, CVec, HermitianEigen};
use crate::phase;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Method {
    /// `exp(−ih H(t + h/2))`, second order.
    Midpoint,
    /// Two-exponential commutator-free scheme, fourth order.
    CommutatorFree4,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Midpoint => "midpoint",
            Method::CommutatorFree4 => "cf4",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "midpoint" => Some(Method::Midpoint),
            "cf4" => Some(Method::CommutatorFree4),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PropagationSettings {
    /// Substeps per period of the fastest drive.
    pub substeps: usize,
    pub method: Method,
    pub renorm_tolerance: f64,
    pub self_check: bool,
    pub guard_levels: usize,
    pub leakage_warn: f64,
    pub leakage_flag: f64,
    /// Turn a flagged leakage into an error.
    pub escalate_leakage: bool,
    /// Upper bound on the bytes held by stored partial propagators.
    pub memory_limit: usize,
}

impl Default for PropagationSettings {
    fn default() -> Self {
        PropagationSettings {
            substeps: 256,
            method: Method::CommutatorFree4,
            renorm_tolerance: 1e-9,
            self_check: false,
            guard_levels: 10,
            leakage_warn: 1e-8,
            leakage_flag: 1e-4,
            escalate_leakage: false,
            memory_limit: 2 << 30,
        }
    }
}

impl PropagationSettings {
    pub fn validate(&self) -> Result<()> {
        if self.substeps < 16 {
            return Err(Error::InvalidParameter(format!("substeps must be ≥ 16 (got {})", self.substeps)));
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct Trajectory {
    /// Times actually reached (after snapping to the step grid).
    pub times: Vec<f64>,
    pub states: Vec<Ket>,
    pub norm_drift: f64,
    pub leakage: f64,
    pub leakage_flagged: bool,
    /// Largest distance between a requested and a reached time.
    pub snap_distance: f64,
    /// Largest state change when the substep count is doubled.
    pub self_check_delta: Option<f64>,
    pub warnings: Vec<String>,
}

impl Trajectory {
    fn from_states(times: Vec<f64>, states: Vec<Ket>, snap_distance: f64, settings: &PropagationSettings) -> Result<Self> {
        let norm_drift = states.iter().map(Ket::norm_deviation).fold(0.0, f64::max);
        let leakage = states.iter().map(|s| s.top_population(settings.guard_levels)).fold(0.0, f64::max);
        let mut warnings = Vec::new();
        if leakage > settings.leakage_warn {
            warnings.push(format!("population {leakage:.3e} reached the top {} Fock levels", settings.guard_levels));
        }
        let leakage_flagged = leakage > settings.leakage_flag;
        if leakage_flagged && settings.escalate_leakage {
            return Err(Error::Leakage { leakage, threshold: settings.leakage_flag });
        }
        Ok(Trajectory {
            times,
            states,
            norm_drift,
            leakage,
            leakage_flagged,
            snap_distance,
            self_check_delta: None,
            warnings,
        })
    }
}

fn check_hermitian(h: &Op) -> Result<()> {
    let defect = h.hermiticity_defect();
    if defect > 1e-9 {
        return Err(Error::NotHermitian(defect));
    }
    Ok(())
}

fn check_times(times: &[f64]) -> Result<()> {
    let mut last = f64::NEG_INFINITY;
    for &t in times {
        if !(t >= 0.0) || !t.is_finite() || t <= last {
            return Err(Error::BadTimeGrid(t));
        }
        last = t;
    }
    Ok(())
}

/// `e^{−iHt}`.
pub fn propagator_static(h: &Op, t: f64) -> Result<Op> {
    check_hermitian(h)?;
    Ok(Op::from_parts(BlockSpectrum::new(&h.mat).exp_neg_i(t), h.dim, false))
}

/// `e^{−iHt} ψ₀` from one cached (block-split) eigendecomposition.
pub fn evolve_static(h: &Op, psi0: &Ket, times: &[f64], settings: &PropagationSettings) -> Result<Trajectory> {
    check_hermitian(h)?;
    check_times(times)?;
    if h.dim != psi0.dim {
        return Err(Error::DimensionMismatch { left: h.dim.composite(), right: psi0.dim.composite() });
    }
    let spectrum = BlockSpectrum::new(&h.mat);
    let coeffs = spectrum.to_eigenbasis(&psi0.amps);
    let states = times
        .iter()
        .map(|&t| Ket { amps: spectrum.evolve_coefficients(&coeffs, t), dim: psi0.dim })
        .collect();
    Trajectory::from_states(times.to_vec(), states, 0.0, settings)
}

const CF4_NODES: [f64; 2] = [0.5 - 0.288_675_134_594_812_9, 0.5 + 0.288_675_134_594_812_9];
// (3 ∓ 2√3)/12
const CF4_WEIGHTS: [f64; 2] = [-0.038_675_134_594_812_87, 0.538_675_134_594_812_9];

/// The Hermitian generators of one step, in application order, each to be
/// exponentiated as `exp(−ih G)`.
fn step_generators<F: Fn(f64) -> Op>(builder: &F, t: f64, h: f64, method: Method) -> Vec<CMat> {
    match method {
        Method::Midpoint => vec![builder(t + h / 2.0).mat],
        Method::CommutatorFree4 => {
            let h1 = builder(t + CF4_NODES[0] * h).mat;
            let h2 = builder(t + CF4_NODES[1] * h).mat;
            let [a1, a2] = CF4_WEIGHTS;
            let first = &h1 * crate::linalg::re(a2) + &h2 * crate::linalg::re(a1);
            let second = h1 * crate::linalg::re(a1) + h2 * crate::linalg::re(a2);
            vec![first, second]
        }
    }
}

/// Propagator of one step `[t, t + h]`.
pub fn step_propagator<F: Fn(f64) -> Op>(builder: &F, t: f64, h: f64, method: Method) -> CMat {
    let mut u: Option<CMat> = None;
    for g in step_generators(builder, t, h, method) {
        let e = HermitianEigen::new(&g).exp_neg_i(h);
        u = Some(match u {
            None => e,
            Some(prev) => e * prev,
        });
    }
    u.expect("at least one generator")
}

fn apply_exp(g: &CMat, h: f64, v: &CVec) -> CVec {
    let eig = HermitianEigen::new(g);
    let mut c = eig.vectors.adjoint() * v;
    for (z, &e) in c.iter_mut().zip(eig.values.iter()) {
        *z *= cis(-phase::reduced(e, h));
    }
    &eig.vectors * c
}

/// Snapping of requested times onto the grid `k·h`.
fn snap_index(t: f64, h: f64) -> u64 {
    (t / h).round() as u64
}

/// Time-ordered propagator over one period, with every partial product kept
/// so that any grid time is reachable as `P_k U^m`.
#[derive(Clone, Debug)]
pub struct PeriodicPropagator {
    period: f64,
    step: f64,
    partials: Vec<CMat>,
    dim: BosonDim,
}

impl PeriodicPropagator {
    /// `substeps` is the number of steps per period.
    pub fn new<F: Fn(f64) -> Op>(builder: &F, period: f64, substeps: usize, settings: &PropagationSettings) -> Result<Self> {
        if !(period > 0.0) || !period.is_finite() {
            return Err(Error::InvalidParameter(format!("period must be positive (got {period})")));
        }
        let probe = builder(0.0);
        let dim = probe.dim;
        let n = dim.composite();
        let bytes = (substeps + 1).saturating_mul(n * n * std::mem::size_of::<crate::linalg::C64>());
        if bytes > settings.memory_limit {
            return Err(Error::MemoryGuard(format!(
                "{substeps} partial propagators of dimension {n} need {bytes} bytes (limit {})",
                settings.memory_limit
            )));
        }
        for frac in [0.123_456_7, 0.5, 0.876_543_2] {
            let t = frac * period;
            let defect = builder(t).max_distance(&builder(t + period));
            if defect > 1e-10 {
                return Err(Error::NotPeriodic { period, t, defect });
            }
        }
        let step = period / substeps as f64;
        let mut partials = Vec::with_capacity(substeps + 1);
        let mut p = CMat::identity(n, n);
        partials.push(p.clone());
        for k in 0..substeps {
            p = step_propagator(builder, k as f64 * step, step, settings.method) * p;
            partials.push(p.clone());
        }
        // the period map is applied up to ~10⁵ times; remove accumulated
        // rounding so the norm does not drift
        let last = partials.last_mut().expect("partials never empty");
        *last = nearest_unitary(last);
        Ok(PeriodicPropagator { period, step, partials, dim })
    }

    pub fn period(&self) -> f64 {
        self.period
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn substeps(&self) -> usize {
        self.partials.len() - 1
    }

    pub fn one_period(&self) -> &CMat {
        self.partials.last().expect("partials never empty")
    }

    fn split(&self, t: f64) -> (u64, usize) {
        let k = snap_index(t, self.step);
        let s = self.substeps() as u64;
        (k / s, (k % s) as usize)
    }

    /// Grid time nearest to `t`.
    pub fn snap(&self, t: f64) -> f64 {
        let (m, k) = self.split(t);
        m as f64 * self.period + k as f64 * self.step
    }

    /// `U(t, 0)` at the grid time nearest to `t`.
    pub fn propagator(&self, t: f64) -> Op {
        let (mut m, k) = self.split(t);
        let n = self.dim.composite();
        let mut acc = CMat::identity(n, n);
        let mut base = self.one_period().clone();
        while m > 0 {
            if m & 1 == 1 {
                acc = &base * acc;
            }
            base = &base * &base;
            m >>= 1;
        }
        Op::from_parts(&self.partials[k] * acc, self.dim, false)
    }

    pub fn evolve(&self, psi0: &Ket, times: &[f64], settings: &PropagationSettings) -> Result<Trajectory> {
        if psi0.dim != self.dim {
            return Err(Error::DimensionMismatch { left: self.dim.composite(), right: psi0.dim.composite() });
        }
        check_times(times)?;
        let mut snapped = Vec::with_capacity(times.len());
        let mut states = Vec::with_capacity(times.len());
        let mut snap_distance = 0.0_f64;
        let mut whole = psi0.amps.clone();
        let mut periods = 0u64;
        let mut last_index: Option<(u64, usize)> = None;
        for &t in times {
            let (m, k) = self.split(t);
            if last_index.is_some_and(|prev| prev >= (m, k)) {
                return Err(Error::BadTimeGrid(t));
            }
            last_index = Some((m, k));
            while periods < m {
                whole = self.one_period() * whole;
                periods += 1;
            }
            let reached = m as f64 * self.period + k as f64 * self.step;
            snap_distance = snap_distance.max((reached - t).abs());
            let state = Ket { amps: &self.partials[k] * &whole, dim: self.dim };
            let drift = state.norm_deviation();
            if drift > settings.renorm_tolerance {
                return Err(Error::NormDrift { t: reached, drift, tolerance: settings.renorm_tolerance });
            }
            snapped.push(reached);
            states.push(state);
        }
        Trajectory::from_states(snapped, states, snap_distance, settings)
    }
}

/// Substeps per period when `settings.substeps` refers to the fastest drive.
pub fn substeps_per_period(period: f64, fastest_period: f64, substeps: usize) -> usize {
    let ratio = (period / fastest_period).max(1.0);
    (substeps as f64 * ratio - 1e-9).ceil() as usize
}

/// Evolution under a periodic builder via [`PeriodicPropagator`]; with
/// `self_check` the run is repeated at twice the substeps.
pub fn evolve_periodic<F: Fn(f64) -> Op>(
    builder: &F,
    period: f64,
    psi0: &Ket,
    times: &[f64],
    settings: &PropagationSettings,
) -> Result<Trajectory> {
    settings.validate()?;
    let engine = PeriodicPropagator::new(builder, period, settings.substeps, settings)?;
    let mut traj = engine.evolve(psi0, times, settings)?;
    if settings.self_check {
        let fine = PeriodicPropagator::new(builder, period, 2 * settings.substeps, settings)?;
        let check = fine.evolve(psi0, &traj.times, settings)?;
        let delta = traj
            .states
            .iter()
            .zip(&check.states)
            .map(|(a, b)| (&a.amps - &b.amps).norm())
            .fold(0.0, f64::max);
        traj.self_check_delta = Some(delta);
    }
    Ok(traj)
}

/// Fixed-step integration with step `step`; no periodicity assumed.
pub fn evolve_general<F: Fn(f64) -> Op>(
    builder: &F,
    psi0: &Ket,
    times: &[f64],
    step: f64,
    settings: &PropagationSettings,
) -> Result<Trajectory> {
    if !(step > 0.0) {
        return Err(Error::InvalidParameter(format!("step must be positive (got {step})")));
    }
    check_times(times)?;
    let mut v = psi0.amps.clone();
    let mut k_now = 0u64;
    let mut snapped = Vec::with_capacity(times.len());
    let mut states = Vec::with_capacity(times.len());
    let mut snap_distance = 0.0_f64;
    for &t in times {
        let k_target = snap_index(t, step);
        if !snapped.is_empty() && k_target <= k_now {
            return Err(Error::BadTimeGrid(t));
        }
        while k_now < k_target {
            for g in step_generators(builder, k_now as f64 * step, step, settings.method) {
                v = apply_exp(&g, step, &v);
            }
            k_now += 1;
        }
        let reached = k_now as f64 * step;
        snap_distance = snap_distance.max((reached - t).abs());
        let state = Ket { amps: v.clone(), dim: psi0.dim };
        let drift = state.norm_deviation();
        if drift > settings.renorm_tolerance {
            return Err(Error::NormDrift { t: reached, drift, tolerance: settings.renorm_tolerance });
        }
        snapped.push(reached);
        states.push(state);
    }
    Trajectory::from_states(snapped, states, snap_distance, settings)
}

/// `U(t₁, t₀)` by `steps` fixed steps.
pub fn propagator_general<F: Fn(f64) -> Op>(builder: &F, t0: f64, t1: f64, steps: usize, method: Method) -> Result<Op> {
    if steps == 0 || !(t1 >= t0) {
        return Err(Error::InvalidParameter("propagator needs t₁ ≥ t₀ and at least one step".into()));
    }
    let dim = builder(t0).dim;
    let h = (t1 - t0) / steps as f64;
    let n = dim.composite();
    let mut u = CMat::identity(n, n);
    for k in 0..steps {
        u = step_propagator(builder, t0 + k as f64 * h, h, method) * u;
    }
    Ok(Op::from_parts(u, dim, false))
}
