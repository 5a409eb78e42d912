//! Closed-form and perturbative approximations to QRM dynamics.

use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, FRAC_PI_4};

use crate::error::{Error, Result};
use crate::frames::transform_t;
use crate::hilbert::{boson_matrix, boson_op, spin_matrix, spin_op, BosonDim, BosonKind, Ket, Op, SpinKind};
use crate::linalg::{cis, expm_anti_hermitian, expm_hermitian, re, BlockSpectrum, CMat, CVec, C64};
use crate::models::QrmParams;
use crate::phase;

/// Auxiliary-model energies `E_n^± = ±(Ω/2)(1 − η²(n + 1/2))` on `|n⟩|↑↓⟩x`.
#[derive(Clone, Debug, PartialEq)]
pub struct AuxSpectrum {
    pub drive: f64,
    pub lamb_dicke: f64,
    pub levels: usize,
}

impl AuxSpectrum {
    pub fn new(drive: f64, lamb_dicke: f64, dim: BosonDim) -> Self {
        AuxSpectrum { drive, lamb_dicke, levels: dim.levels() }
    }

    /// `E_n^+`; `E_n^− = −E_n^+`.
    pub fn energy(&self, n: usize) -> f64 {
        self.drive / 2.0 * (1.0 - self.lamb_dicke * self.lamb_dicke * (n as f64 + 0.5))
    }

    /// `(n, ±1, E_n^±)` for every level.
    pub fn list(&self) -> Vec<(usize, i8, f64)> {
        (0..self.levels).flat_map(|n| [(n, 1, self.energy(n)), (n, -1, -self.energy(n))]).collect()
    }
}

/// `(C_n^+, C_n^−)` of `psi` on `|n⟩|↑⟩x`, `|n⟩|↓⟩x`.
fn x_basis_coefficients(psi: &Ket) -> Vec<(C64, C64)> {
    (0..psi.dim.levels())
        .map(|n| {
            let (g, e) = (psi.amps[2 * n], psi.amps[2 * n + 1]);
            ((e + g) * FRAC_1_SQRT_2, (e - g) * FRAC_1_SQRT_2)
        })
        .collect()
}

/// `e^{−i H_aux t} ψ₀` by phase evolution in the auxiliary eigenbasis.
pub fn aux_solution(drive: f64, lamb_dicke: f64, psi0: &Ket, t: f64) -> Ket {
    let spec = AuxSpectrum::new(drive, lamb_dicke, psi0.dim);
    let mut amps = CVec::zeros(psi0.dim.composite());
    for (n, (up, down)) in x_basis_coefficients(psi0).into_iter().enumerate() {
        let phase = phase::reduced(spec.energy(n), t);
        let (up, down) = (up * cis(-phase), down * cis(phase));
        amps[2 * n] = (up - down) * FRAC_1_SQRT_2;
        amps[2 * n + 1] = (up + down) * FRAC_1_SQRT_2;
    }
    Ket { amps, dim: psi0.dim }
}

/// `⟨x σz⟩` under the auxiliary model, as the double sum over x-basis
/// coefficients (σz swaps `|↑⟩x` and `|↓⟩x`).
pub fn aux_x_sigma_z(psi0: &Ket, t: f64, drive: f64, lamb_dicke: f64) -> Result<f64> {
    let spec = AuxSpectrum::new(drive, lamb_dicke, psi0.dim);
    let c = x_basis_coefficients(psi0);
    let energy = |n: usize, up: bool| if up { spec.energy(n) } else { -spec.energy(n) };
    let coeff = |n: usize, up: bool| if up { c[n].0 } else { c[n].1 };
    let mut sum = C64::new(0.0, 0.0);
    for up in [true, false] {
        for m in 0..c.len() {
            // ⟨n|x|m⟩ = √(m+1) δ_{n,m+1} + √m δ_{n,m−1}
            let neighbours = [(m + 1, ((m + 1) as f64).sqrt()), (m.wrapping_sub(1), (m as f64).sqrt())];
            for (n, amp) in neighbours {
                if n >= c.len() || amp == 0.0 {
                    continue;
                }
                let phase = phase::wrap(phase::reduced(energy(n, !up), t) - phase::reduced(energy(m, up), t));
                sum += coeff(n, !up).conj() * coeff(m, up) * cis(phase) * amp;
            }
        }
    }
    if sum.im.abs() > 1e-10 {
        return Err(Error::InvalidParameter(format!("⟨xσz⟩ has imaginary residue {:.3e}", sum.im)));
    }
    Ok(sum.re)
}

/// The approximate QRM propagator
/// `U_{T,0}†(t) T(iη/2) U_{s,0}(t) U_aux(t) T†(iη/2)` with
/// `U_{T,0} = e^{+itωσx/2}` and `U_{s,0} = e^{−it(νa†a + ωσz/2)}`.
#[derive(Clone, Debug)]
pub struct AuxApproximation {
    params: QrmParams,
    qubit_freq: f64,
    t: CMat,
}

impl AuxApproximation {
    pub fn new(params: &QrmParams, qubit_freq: f64) -> Self {
        AuxApproximation { params: *params, qubit_freq, t: transform_t(params.lamb_dicke, params.dim).mat }
    }

    pub fn propagator(&self, t: f64) -> Op {
        let p = &self.params;
        let dim = p.dim;
        let spec = AuxSpectrum::new(p.drive, p.lamb_dicke, dim);
        let levels = dim.levels();
        let half = t / 2.0;
        let spin_phase = phase::reduced(self.qubit_freq, half);
        // U_{s,0}: σz = −1 on g
        let free = CVec::from_fn(dim.composite(), |i, _| {
            let n = i / 2;
            let boson = phase::reduced(p.mode_freq * n as f64, t);
            let spin = if i % 2 == 0 { -spin_phase } else { spin_phase };
            cis(-phase::wrap(boson + spin))
        });
        // U_aux blocks: cos(E t) − i sin(E t) σx
        let mut aux = CMat::zeros(dim.composite(), dim.composite());
        for n in 0..levels {
            let (s, c) = phase::reduced(spec.energy(n), t).sin_cos();
            aux[(2 * n, 2 * n)] = re(c);
            aux[(2 * n + 1, 2 * n + 1)] = re(c);
            aux[(2 * n, 2 * n + 1)] = C64::new(0.0, -s);
            aux[(2 * n + 1, 2 * n)] = C64::new(0.0, -s);
        }
        let mut right = aux * self.t.adjoint();
        for (i, mut row) in right.row_iter_mut().enumerate() {
            row *= free[i];
        }
        let mut u = &self.t * right;
        // U_{T,0}† = cos(ωt/2) − i sin(ωt/2) σx, acting on the spin index
        let (s, c) = spin_phase.sin_cos();
        let (c, s) = (re(c), C64::new(0.0, -s));
        for n in 0..levels {
            let (rg, re_) = (u.row(2 * n).clone_owned(), u.row(2 * n + 1).clone_owned());
            u.set_row(2 * n, &(&rg * c + &re_ * s));
            u.set_row(2 * n + 1, &(&rg * s + &re_ * c));
        }
        Op::from_parts(u, dim, false)
    }

    pub fn state(&self, psi0: &Ket, t: f64) -> Result<Ket> {
        self.propagator(t).apply(psi0)
    }
}

/// One-shot form of [`AuxApproximation::propagator`].
pub fn qrm_approx_propagator(t: f64, params: &QrmParams, qubit_freq: f64) -> Op {
    AuxApproximation::new(params, qubit_freq).propagator(t)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ApproxKind {
    BlochSiegert,
    Grwa,
}

/// Which ξ the Bloch-Siegert generator uses.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BsXi {
    /// `ξ = g̃Λ/(2ν)`
    Half,
    /// `ξ = g̃Λ/ν`
    Full,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GrwaXi {
    /// Self-consistent `ξ = (1 + βΩ/ν)⁻¹`.
    FixedPoint,
    /// `ξ = (1 + Ω/ν)⁻¹`.
    Shortcut,
}

/// Exponent of the renormalisation `β = e^{−k g̃²ξ²/ν²}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GrwaBeta {
    /// `k = 4`
    Quartic,
    /// `k = 2`, the vacuum overlap of the two displaced wells.
    Overlap,
}

impl GrwaBeta {
    fn exponent(self) -> f64 {
        match self {
            GrwaBeta::Quartic => 4.0,
            GrwaBeta::Overlap => 2.0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ApproxCoefficients {
    /// Λ for Bloch-Siegert, `g̃ξ/ν` for GRWA.
    pub lambda: f64,
    pub xi: f64,
    /// Spin-splitting renormalisation (1 for Bloch-Siegert).
    pub beta: f64,
    pub drive_eff: f64,
    pub coupling_eff: f64,
}

/// An effective Hamiltonian reached from the QRM by `e^{−S}` (after an
/// optional fixed rotation `R`): states are `R e^{S} e^{−iH_eff t} e^{−S} R† ψ₀`.
#[derive(Clone, Debug)]
pub struct ApproxModel {
    pub kind: ApproxKind,
    pub generator: Op,
    pub h_eff: Op,
    pub rotation: Option<Op>,
    pub coefficients: ApproxCoefficients,
}

impl ApproxModel {
    /// Approximate QRM states at `times`.
    pub fn states(&self, psi0: &Ket, times: &[f64]) -> Result<Vec<Ket>> {
        let dim = self.h_eff.dim;
        if psi0.dim != dim {
            return Err(Error::DimensionMismatch { left: dim.composite(), right: psi0.dim.composite() });
        }
        let e_s = expm_anti_hermitian(&self.generator.mat);
        let (entry, exit) = match &self.rotation {
            Some(r) => (e_s.adjoint() * r.mat.adjoint(), &r.mat * &e_s),
            None => (e_s.adjoint(), e_s),
        };
        let spectrum = BlockSpectrum::new(&self.h_eff.mat);
        let coeffs = spectrum.to_eigenbasis(&(entry * &psi0.amps));
        Ok(times.iter().map(|&t| Ket { amps: &exit * spectrum.evolve_coefficients(&coeffs, t), dim }).collect())
    }
}

fn op_product(b: BosonKind, s: SpinKind, dim: BosonDim) -> Op {
    Op::product(&boson_matrix(b, dim.levels()), &spin_matrix(s), dim, false)
}

/// Bloch-Siegert: `S = iΛ(σ⁺a† + σ⁻a) − ξσz(a² − a†²)`, `Λ = g̃/(ν + Ω)`,
/// `H_BS = (ν + g̃Λσz)a†a + ((Ω + g̃Λ)/2)σz − g̃(iσ⁻a† − iσ⁺a)`.
pub fn bloch_siegert(p: &QrmParams, xi_choice: BsXi) -> Result<ApproxModel> {
    let (nu, omega, g) = (p.mode_freq, p.drive, p.coupling());
    if !(nu + omega != 0.0) {
        return Err(Error::InvalidParameter("Bloch-Siegert needs ν + Ω ≠ 0".into()));
    }
    let dim = p.dim;
    let lambda = g / (nu + omega);
    let xi = match xi_choice {
        BsXi::Half => g * lambda / (2.0 * nu),
        BsXi::Full => g * lambda / nu,
    };
    let a = boson_matrix(BosonKind::Annihilate, dim.levels());
    let ad = a.adjoint();
    let a2 = &a * &a;
    let ad2 = &ad * &ad;
    let sp = spin_matrix(SpinKind::SPlus);
    let sm = spin_matrix(SpinKind::SMinus);
    let sz = spin_matrix(SpinKind::Sz);
    let i = C64::new(0.0, 1.0);
    let s = (ad.kronecker(&sp) + a.kronecker(&sm)) * (i * lambda) - (&a2 - &ad2).kronecker(&sz) * re(xi);
    let number = boson_matrix(BosonKind::Number, dim.levels());
    let h = number.kronecker(&(CMat::identity(2, 2) * re(nu) + &sz * re(g * lambda)))
        + CMat::identity(dim.levels(), dim.levels()).kronecker(&sz) * re((omega + g * lambda) / 2.0)
        - (ad.kronecker(&sm) * i - a.kronecker(&sp) * i) * re(g);
    Ok(ApproxModel {
        kind: ApproxKind::BlochSiegert,
        generator: Op::from_parts(s, dim, false),
        h_eff: Op::from_parts(h, dim, true),
        rotation: None,
        coefficients: ApproxCoefficients { lambda, xi, beta: 1.0, drive_eff: omega + g * lambda, coupling_eff: g },
    })
}

/// Solves `ξ = (1 + β(ξ)Ω/ν)⁻¹`, `β = e^{−k g̃²ξ²/ν²}`, returning `(ξ, β)`.
pub fn grwa_scalars(p: &QrmParams, xi_choice: GrwaXi, beta_choice: GrwaBeta) -> Result<(f64, f64)> {
    let (nu, omega, g) = (p.mode_freq, p.drive, p.coupling());
    let k = beta_choice.exponent();
    let beta_of = |xi: f64| (-k * g * g * xi * xi / (nu * nu)).exp();
    let mut xi = 1.0 / (1.0 + omega / nu);
    if xi_choice == GrwaXi::FixedPoint {
        let mut change = f64::INFINITY;
        let mut converged = false;
        for _ in 0..50 {
            let next = 1.0 / (1.0 + beta_of(xi) * omega / nu);
            change = (next - xi).abs();
            xi = next;
            if change < 1e-12 {
                converged = true;
                break;
            }
        }
        if !converged {
            return Err(Error::NoConvergence { iterations: 50, change });
        }
    }
    Ok((xi, beta_of(xi)))
}

/// `e^{+iπ/4 σy} e^{+iπ/2 a†a}`, taking the σx-basis QRM to the σz-driven form.
pub fn grwa_rotation(dim: BosonDim) -> Op {
    let spin = expm_hermitian(&spin_matrix(SpinKind::Sy), -FRAC_PI_4);
    let boson = CMat::from_diagonal(&CVec::from_fn(dim.levels(), |n, _| cis(phase::wrap(FRAC_PI_2 * (n % 4) as f64))));
    Op::product(&boson, &spin, dim, false)
}

/// The QRM in the σx-basis form `ν a†a + (Ω/2)σx + g̃(a + a†)σz`.
pub fn qrm_x_basis(p: &QrmParams) -> Op {
    let dim = p.dim;
    &(&boson_op(BosonKind::Number, dim).scale_re(p.mode_freq) + &spin_op(SpinKind::Sx, dim).scale_re(p.drive / 2.0))
        + &Op::product(&boson_matrix(BosonKind::X, dim.levels()), &spin_matrix(SpinKind::Sz), dim, true)
            .scale_re(p.coupling())
}

/// Generalised RWA: polaron generator `S = (g̃ξ/ν)σz(a − a†)` and
/// `H_GRWA = ν a†a + (βΩ/2)σx + (g'/2)[(a + a†)σz + pσy]`, `g' = 2ξβΩg̃/ν`,
/// which conserves `a†a + (1 + σx)/2`.
pub fn grwa(p: &QrmParams, xi_choice: GrwaXi, beta_choice: GrwaBeta) -> Result<ApproxModel> {
    let (xi, beta) = grwa_scalars(p, xi_choice, beta_choice)?;
    let (nu, omega, g) = (p.mode_freq, p.drive, p.coupling());
    let dim = p.dim;
    let lambda = g * xi / nu;
    let a = boson_matrix(BosonKind::Annihilate, dim.levels());
    let s = (&a - a.adjoint()).kronecker(&spin_matrix(SpinKind::Sz)) * re(lambda);
    let coupling_eff = 2.0 * xi * beta * omega * g / nu;
    let drive_eff = beta * omega;
    let h = &(&boson_op(BosonKind::Number, dim).scale_re(nu) + &spin_op(SpinKind::Sx, dim).scale_re(drive_eff / 2.0))
        + &(&op_product(BosonKind::X, SpinKind::Sz, dim) + &op_product(BosonKind::P, SpinKind::Sy, dim))
            .scale_re(coupling_eff / 2.0);
    let rotation = grwa_rotation(dim);
    // the rotation must map the σx-basis QRM onto the standard one
    let defect = qrm_x_basis(p).conjugate_by(&rotation).max_distance(&crate::models::hamiltonian_qrm(p)?);
    if defect > 1e-10 {
        return Err(Error::InvalidParameter(format!("GRWA basis rotation is off by {defect:.3e}")));
    }
    Ok(ApproxModel {
        kind: ApproxKind::Grwa,
        generator: Op::from_parts(s, dim, false),
        h_eff: Op::from_parts(h.mat, dim, true),
        rotation: Some(rotation),
        coefficients: ApproxCoefficients { lambda, xi, beta, drive_eff, coupling_eff },
    })
}

/// Accumulated σz phase of the leading non-RWA correction, `t Σ_j Ω²/(4δ_j)`.
pub fn rwa_error_phase(drive: f64, detunings: &[f64], t: f64) -> Result<f64> {
    let mut rate = 0.0;
    for (j, &d) in detunings.iter().enumerate() {
        if d == 0.0 {
            return Err(Error::ZeroDetuning(j));
        }
        rate += drive * drive / (4.0 * d);
    }
    Ok(rate * t)
}
