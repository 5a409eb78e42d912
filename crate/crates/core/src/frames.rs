//! Frame maps between the master, gQRM and nQRM pictures, and the observable
//! maps they induce.

use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, FRAC_PI_4};

use crate::error::{Error, Result};
use crate::hilbert::{
    boson_matrix, boson_op, displacement_matrix, spin_matrix, spin_op, BosonDim, BosonKind, Ket, Op, SpinKind,
};
use crate::linalg::{cis, expm_hermitian, re, CMat, CVec, C64};
use crate::models::{GqrmParams, NqrmParams};
use crate::phase;

/// Scalars shared by a gQRM/nQRM pair.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FrameContext {
    pub mode_freq: f64,
    pub target_mode_freq: f64,
    pub qubit_freq: f64,
    pub target_qubit_freq: f64,
    pub lamb_dicke: f64,
    pub delta1: f64,
    pub dim: BosonDim,
}

impl FrameContext {
    pub fn new(g: &GqrmParams, n: &NqrmParams) -> Result<Self> {
        if g.dim != n.dim {
            return Err(Error::DimensionMismatch { left: g.dim.composite(), right: n.dim.composite() });
        }
        Ok(FrameContext {
            mode_freq: g.mode_freq,
            target_mode_freq: n.mode_freq,
            qubit_freq: g.qubit_freq,
            target_qubit_freq: n.qubit_freq,
            lamb_dicke: g.lamb_dicke,
            delta1: g.delta1(),
            dim: g.dim,
        })
    }

    /// `(ω̃ + δ₁) t` reduced; ω-free.
    pub fn spin_phase(&self, t: f64) -> f64 {
        phase::wrap(phase::reduced(self.target_qubit_freq, t) + phase::reduced(self.delta1, t))
    }
}

/// `T(β) = [D(β)(|e⟩⟨g| + |g⟩⟨g|) + D†(β)(|e⟩⟨e| − |g⟩⟨e|)]/√2` at `β = iη/2`.
pub fn transform_t(lamb_dicke: f64, dim: BosonDim) -> Op {
    let d = displacement_matrix(C64::new(0.0, lamb_dicke / 2.0), dim.levels());
    let dd = d.adjoint();
    let s = re(FRAC_1_SQRT_2);
    let mut t = CMat::zeros(dim.composite(), dim.composite());
    for n in 0..dim.levels() {
        for m in 0..dim.levels() {
            let (a, b) = (d[(n, m)] * s, dd[(n, m)] * s);
            t[(2 * n, 2 * m)] = a;
            t[(2 * n + 1, 2 * m)] = a;
            t[(2 * n + 1, 2 * m + 1)] = b;
            t[(2 * n, 2 * m + 1)] = -b;
        }
    }
    Op::from_parts(t, dim, false)
}

/// Precomputed `T` for a frame context, with Γ(t) assembled on demand.
#[derive(Clone, Debug)]
pub struct Frame {
    ctx: FrameContext,
    t: CMat,
}

/// The three phase factors making up Γ(t) besides T†.
struct GammaPhases {
    /// `e^{−it(ω̃−ω)σz/2} e^{−it(ν̃−ν)a†a}` diagonal, composite index.
    left: Vec<C64>,
    /// `e^{+it(ω+δ₁)σx/2} = cos θ + i sin θ σx`.
    cos: f64,
    sin: f64,
}

impl Frame {
    pub fn new(ctx: FrameContext) -> Self {
        let t = transform_t(ctx.lamb_dicke, ctx.dim).mat;
        Frame { ctx, t }
    }

    pub fn context(&self) -> &FrameContext {
        &self.ctx
    }

    pub fn transform(&self) -> Op {
        Op::from_parts(self.t.clone(), self.ctx.dim, false)
    }

    fn phases(&self, t: f64) -> GammaPhases {
        let c = &self.ctx;
        let half = t / 2.0;
        let spin = phase::wrap(phase::reduced(c.target_qubit_freq, half) - phase::reduced(c.qubit_freq, half));
        let mode = c.target_mode_freq - c.mode_freq;
        let mut left = Vec::with_capacity(c.dim.composite());
        for n in 0..c.dim.levels() {
            let boson = phase::reduced(mode * n as f64, t);
            // σz = −1 on g, +1 on e
            left.push(cis(phase::wrap(spin - boson)));
            left.push(cis(phase::wrap(-spin - boson)));
        }
        let theta = phase::wrap(phase::reduced(c.qubit_freq, half) + phase::reduced(c.delta1, half));
        let (sin, cos) = theta.sin_cos();
        GammaPhases { left, cos, sin }
    }

    /// `Γ(t) = e^{−it(ω̃−ω)σz/2} e^{−it(ν̃−ν)a†a} T† e^{+it(ω+δ₁)σx/2}`.
    pub fn gamma(&self, t: f64) -> Op {
        let ph = self.phases(t);
        let mut g = self.t.adjoint();
        for (i, mut row) in g.row_iter_mut().enumerate() {
            row *= ph.left[i];
        }
        let (c, s) = (re(ph.cos), C64::new(0.0, ph.sin));
        for k in 0..self.ctx.dim.levels() {
            let (cg, ce) = (g.column(2 * k).clone_owned(), g.column(2 * k + 1).clone_owned());
            g.set_column(2 * k, &(&cg * c + &ce * s));
            g.set_column(2 * k + 1, &(&cg * s + &ce * c));
        }
        Op::from_parts(g, self.ctx.dim, false)
    }

    /// `Γ†(t) ψ` without forming Γ.
    pub fn apply_gamma_adjoint(&self, t: f64, psi: &Ket) -> Result<Ket> {
        if psi.dim != self.ctx.dim {
            return Err(Error::DimensionMismatch { left: self.ctx.dim.composite(), right: psi.dim.composite() });
        }
        let ph = self.phases(t);
        let scaled = CVec::from_iterator(psi.amps.len(), psi.amps.iter().zip(&ph.left).map(|(z, p)| z * p.conj()));
        let mut v = &self.t * scaled;
        let (c, s) = (re(ph.cos), C64::new(0.0, -ph.sin));
        for k in 0..self.ctx.dim.levels() {
            let (g, e) = (v[2 * k], v[2 * k + 1]);
            v[2 * k] = c * g + s * e;
            v[2 * k + 1] = s * g + c * e;
        }
        Ok(Ket { amps: v, dim: self.ctx.dim })
    }

    /// Exact `Γ†(t) O Γ(t)`.
    pub fn map_observable(&self, o: &Op, t: f64) -> Result<Op> {
        if o.dim != self.ctx.dim {
            return Err(Error::DimensionMismatch { left: self.ctx.dim.composite(), right: o.dim.composite() });
        }
        let g = self.gamma(t);
        Ok(Op::from_parts(g.mat.adjoint() * &o.mat * &g.mat, o.dim, o.hermitian_hint))
    }

    /// Order-`M` truncation of the mapped σx or σy.
    pub fn mapped_sigma_xy(&self, axis: Axis, order: usize, t: f64) -> Result<Op> {
        mapped_sigma_xy(axis, order, self.ctx.spin_phase(t), self.ctx.lamb_dicke, self.ctx.dim)
    }
}

/// Closed form of the mapped σz: `−σx`.
pub fn mapped_sigma_z(dim: BosonDim) -> Op {
    spin_op(SpinKind::Sx, dim).scale_re(-1.0)
}

/// Closed form of the mapped `a†a`: `a†a − (η/2) p σx + η²/4`.
pub fn mapped_number(lamb_dicke: f64, dim: BosonDim) -> Op {
    let p_sx = Op::product(&boson_matrix(BosonKind::P, dim.levels()), &spin_matrix(SpinKind::Sx), dim, true);
    let shifted = &boson_op(BosonKind::Number, dim) - &p_sx.scale_re(lamb_dicke / 2.0);
    &shifted + &Op::identity(dim).scale_re(lamb_dicke * lamb_dicke / 4.0)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Axis {
    X,
    Y,
}

/// Normal-ordered expansion of `D(iη) = e^{iη(a+a†)}` kept to total order `M`:
/// `e^{−η²/2} Σ_{p+q ≤ M} (iη)^{p+q} a†ᵖ aᵠ / (p! q!)`.
pub fn kick_expansion(lamb_dicke: f64, order: usize, levels: usize) -> CMat {
    let a = boson_matrix(BosonKind::Annihilate, levels);
    let ad = a.adjoint();
    let mut a_pow = vec![CMat::identity(levels, levels)];
    let mut ad_pow = vec![CMat::identity(levels, levels)];
    for k in 1..=order {
        a_pow.push(&a_pow[k - 1] * &a);
        ad_pow.push(&ad_pow[k - 1] * &ad);
    }
    let fact = |k: usize| (1..=k).map(|j| j as f64).product::<f64>();
    let mut out = CMat::zeros(levels, levels);
    let ieta = C64::new(0.0, lamb_dicke);
    for total in 0..=order {
        let coeff = ieta.powu(total as u32) * (-lamb_dicke * lamb_dicke / 2.0).exp();
        for (p, ad) in ad_pow.iter().enumerate().take(total + 1) {
            let q = total - p;
            out += ad * &a_pow[q] * (coeff / (fact(p) * fact(q)));
        }
    }
    out
}

/// Order-`M` mapped σx/σy at spin phase `φ = (ω̃ + δ₁)t`. With `K` the
/// truncated kick, `R = (K + K†)/2` and `S = (K − K†)/2i`:
/// σx ↦ R(cos φ σz − sin φ σy) + S(sin φ σz + cos φ σy),
/// σy ↦ R(sin φ σz + cos φ σy) + S(sin φ σy − cos φ σz).
pub fn mapped_sigma_xy(axis: Axis, order: usize, phi: f64, lamb_dicke: f64, dim: BosonDim) -> Result<Op> {
    if order > 3 {
        return Err(Error::OrderTooHigh(order));
    }
    let k = kick_expansion(lamb_dicke, order, dim.levels());
    let r = (&k + k.adjoint()) * re(0.5);
    let s = (&k - k.adjoint()) * C64::new(0.0, -0.5);
    let (sin, cos) = phi.sin_cos();
    let sz = spin_matrix(SpinKind::Sz);
    let sy = spin_matrix(SpinKind::Sy);
    let (spin_r, spin_s) = match axis {
        Axis::X => (&sz * re(cos) - &sy * re(sin), &sz * re(sin) + &sy * re(cos)),
        Axis::Y => (&sz * re(sin) + &sy * re(cos), &sy * re(sin) - &sz * re(cos)),
    };
    let mat = r.kronecker(&spin_r) + s.kronecker(&spin_s);
    Ok(Op::from_parts(mat, dim, true))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AuxObservable {
    Number,
    X,
    P,
}

/// Observables of the QRM expressed in the frame where the dynamics is
/// generated by the auxiliary Hamiltonian.
pub fn qrm_aux_map(kind: AuxObservable, t: f64, lamb_dicke: f64, mode_freq: f64, dim: BosonDim) -> Op {
    let (sin, cos) = phase::reduced(mode_freq, t).sin_cos();
    let x = boson_op(BosonKind::X, dim);
    let p = boson_op(BosonKind::P, dim);
    let sz = spin_matrix(SpinKind::Sz);
    match kind {
        AuxObservable::Number => {
            let xs = Op::product(&boson_matrix(BosonKind::X, dim.levels()), &sz, dim, true);
            let ps = Op::product(&boson_matrix(BosonKind::P, dim.levels()), &sz, dim, true);
            let rotated = &xs.scale_re(sin) - &ps.scale_re(cos);
            let shifted = &boson_op(BosonKind::Number, dim) + &Op::identity(dim).scale_re(lamb_dicke * lamb_dicke / 4.0);
            &shifted + &rotated.scale_re(lamb_dicke / 2.0)
        }
        AuxObservable::X => &x.scale_re(cos) + &p.scale_re(sin),
        AuxObservable::P => {
            let rotated = &p.scale_re(cos) - &x.scale_re(sin);
            &rotated - &spin_op(SpinKind::Sz, dim).scale_re(lamb_dicke)
        }
    }
}

/// `e^{−iπ/4 σy} e^{−iπ/2 a†a}`.
pub fn mw_rotation(dim: BosonDim) -> Op {
    let spin = expm_hermitian(&spin_matrix(SpinKind::Sy), FRAC_PI_4);
    let boson = CMat::from_diagonal(&CVec::from_fn(dim.levels(), |n, _| {
        cis(-phase::wrap(FRAC_PI_2 * (n % 4) as f64))
    }));
    Op::product(&boson, &spin, dim, false)
}

/// `R O R†` with `R` the microwave basis change.
pub fn mw_frame_change(o: &Op) -> Op {
    let r = mw_rotation(o.dim);
    let mut out = o.conjugate_by(&r);
    out.hermitian_hint = o.hermitian_hint;
    out
}

/// Rows/columns kept when comparing maps that are exact only away from the
/// truncation edge.
pub fn interior_cut(dim: BosonDim, guard: usize) -> usize {
    dim.n_max().saturating_sub(guard)
}
