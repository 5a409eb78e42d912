//! Truncated single-mode boson ⊗ spin-1/2 space.
//!
//! Composite index `i = 2 n + s` with `s = 0 ↦ |g⟩`, `s = 1 ↦ |e⟩`: the boson
//! is the slow index. `σz = |e⟩⟨e| − |g⟩⟨g|`, `|↑⟩x = (|e⟩ + |g⟩)/√2` and
//! `|↓⟩x = (|e⟩ − |g⟩)/√2`.

use std::ops::{Add, Mul, Neg, Sub};

use crate::error::{Error, Result};
use crate::linalg::{self, re, CMat, CVec, C64, I, ONE, ZERO};

/// Highest retained Fock level.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct BosonDim {
    n_max: usize,
}

impl BosonDim {
    pub fn new(n_max: usize) -> Result<Self> {
        if n_max < 1 {
            return Err(Error::InvalidTruncation(n_max));
        }
        Ok(BosonDim { n_max })
    }

    pub fn n_max(self) -> usize {
        self.n_max
    }

    /// Boson factor dimension, `n_max + 1`.
    pub fn levels(self) -> usize {
        self.n_max + 1
    }

    /// Composite dimension, `2 (n_max + 1)`.
    pub fn composite(self) -> usize {
        2 * self.levels()
    }

    pub fn index(self, n: usize, s: usize) -> usize {
        2 * n + s
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BosonKind {
    Annihilate,
    Create,
    Number,
    /// `a + a†`
    X,
    /// `i (a† − a)`
    P,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SpinKind {
    Sx,
    Sy,
    Sz,
    SPlus,
    SMinus,
    Id,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SpinLabel {
    G,
    E,
    UpX,
    DownX,
}

impl SpinLabel {
    /// Amplitudes on (|g⟩, |e⟩).
    pub fn amplitudes(self) -> [C64; 2] {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        match self {
            SpinLabel::G => [ONE, ZERO],
            SpinLabel::E => [ZERO, ONE],
            SpinLabel::UpX => [re(h), re(h)],
            SpinLabel::DownX => [re(-h), re(h)],
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            SpinLabel::G => "g",
            SpinLabel::E => "e",
            SpinLabel::UpX => "up_x",
            SpinLabel::DownX => "down_x",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "g" => Some(SpinLabel::G),
            "e" => Some(SpinLabel::E),
            "up_x" => Some(SpinLabel::UpX),
            "down_x" => Some(SpinLabel::DownX),
            _ => None,
        }
    }
}

/// Dense operator on the composite space.
#[derive(Clone, Debug)]
pub struct Op {
    pub mat: CMat,
    pub dim: BosonDim,
    pub hermitian_hint: bool,
}

impl Op {
    pub fn new(mat: CMat, dim: BosonDim, hermitian_hint: bool) -> Result<Self> {
        let n = dim.composite();
        if mat.nrows() != n || mat.ncols() != n {
            return Err(Error::DimensionMismatch { left: mat.nrows(), right: n });
        }
        Ok(Op { mat, dim, hermitian_hint })
    }

    pub(crate) fn from_parts(mat: CMat, dim: BosonDim, hermitian_hint: bool) -> Self {
        debug_assert_eq!(mat.nrows(), dim.composite());
        Op { mat, dim, hermitian_hint }
    }

    pub fn zeros(dim: BosonDim) -> Self {
        Op::from_parts(CMat::zeros(dim.composite(), dim.composite()), dim, true)
    }

    pub fn identity(dim: BosonDim) -> Self {
        Op::from_parts(CMat::identity(dim.composite(), dim.composite()), dim, true)
    }

    /// Boson-factor matrix tensored with the spin identity.
    pub fn from_boson(b: &CMat, dim: BosonDim, hermitian_hint: bool) -> Self {
        Op::from_parts(b.kronecker(&CMat::identity(2, 2)), dim, hermitian_hint)
    }

    /// Spin 2x2 matrix tensored with the boson identity.
    pub fn from_spin(s: &CMat, dim: BosonDim, hermitian_hint: bool) -> Self {
        Op::from_parts(CMat::identity(dim.levels(), dim.levels()).kronecker(s), dim, hermitian_hint)
    }

    /// `boson ⊗ spin`.
    pub fn product(b: &CMat, s: &CMat, dim: BosonDim, hermitian_hint: bool) -> Self {
        Op::from_parts(b.kronecker(s), dim, hermitian_hint)
    }

    pub fn adjoint(&self) -> Op {
        Op::from_parts(self.mat.adjoint(), self.dim, self.hermitian_hint)
    }

    pub fn scale(&self, z: C64) -> Op {
        Op::from_parts(&self.mat * z, self.dim, self.hermitian_hint && z.im == 0.0)
    }

    pub fn scale_re(&self, x: f64) -> Op {
        self.scale(re(x))
    }

    /// `U O U†`.
    pub fn conjugate_by(&self, u: &Op) -> Op {
        Op::from_parts(&u.mat * &self.mat * u.mat.adjoint(), self.dim, self.hermitian_hint)
    }

    pub fn commutator(&self, other: &Op) -> Op {
        Op::from_parts(&self.mat * &other.mat - &other.mat * &self.mat, self.dim, false)
    }

    pub fn hermiticity_defect(&self) -> f64 {
        linalg::hermiticity_defect(&self.mat)
    }

    pub fn unitarity_defect(&self) -> f64 {
        linalg::unitarity_defect(&self.mat)
    }

    pub fn apply(&self, psi: &Ket) -> Result<Ket> {
        check_dims(self.dim, psi.dim)?;
        Ok(Ket { amps: &self.mat * &psi.amps, dim: self.dim })
    }

    /// Restriction to composite indices with Fock level `n ≤ n_cut`.
    pub fn interior(&self, n_cut: usize) -> CMat {
        let k = 2 * (n_cut.min(self.dim.n_max()) + 1);
        self.mat.view((0, 0), (k, k)).into_owned()
    }

    /// Largest entry difference restricted to Fock levels `n ≤ n_cut`.
    pub fn interior_distance(&self, other: &Op, n_cut: usize) -> f64 {
        linalg::max_abs(&(self.interior(n_cut) - other.interior(n_cut)))
    }

    pub fn max_distance(&self, other: &Op) -> f64 {
        linalg::max_abs(&(&self.mat - &other.mat))
    }
}

impl Add for &Op {
    type Output = Op;
    fn add(self, rhs: &Op) -> Op {
        Op::from_parts(&self.mat + &rhs.mat, self.dim, self.hermitian_hint && rhs.hermitian_hint)
    }
}

impl Sub for &Op {
    type Output = Op;
    fn sub(self, rhs: &Op) -> Op {
        Op::from_parts(&self.mat - &rhs.mat, self.dim, self.hermitian_hint && rhs.hermitian_hint)
    }
}

impl Mul for &Op {
    type Output = Op;
    fn mul(self, rhs: &Op) -> Op {
        Op::from_parts(&self.mat * &rhs.mat, self.dim, false)
    }
}

impl Neg for &Op {
    type Output = Op;
    fn neg(self) -> Op {
        Op::from_parts(-&self.mat, self.dim, self.hermitian_hint)
    }
}

/// State vector on the composite space.
#[derive(Clone, Debug, PartialEq)]
pub struct Ket {
    pub amps: CVec,
    pub dim: BosonDim,
}

impl Ket {
    pub fn new(amps: CVec, dim: BosonDim) -> Result<Self> {
        if amps.len() != dim.composite() {
            return Err(Error::DimensionMismatch { left: amps.len(), right: dim.composite() });
        }
        Ok(Ket { amps, dim })
    }

    pub fn norm(&self) -> f64 {
        self.amps.norm()
    }

    pub fn norm_deviation(&self) -> f64 {
        (self.norm() - 1.0).abs()
    }

    pub fn normalized(&self) -> Ket {
        let n = self.norm();
        Ket { amps: &self.amps / re(n), dim: self.dim }
    }

    /// Total population in Fock levels `n > n_max - guard`.
    pub fn top_population(&self, guard: usize) -> f64 {
        let levels = self.dim.levels();
        let first = levels.saturating_sub(guard);
        (2 * first..2 * levels).map(|i| self.amps[i].norm_sqr()).sum()
    }

    /// Same amplitudes embedded in (or truncated to) another Fock cutoff.
    pub fn resized(&self, dim: BosonDim) -> Ket {
        let mut amps = CVec::zeros(dim.composite());
        let k = amps.len().min(self.amps.len());
        amps.rows_mut(0, k).copy_from(&self.amps.rows(0, k));
        Ket { amps, dim }
    }
}

fn check_dims(a: BosonDim, b: BosonDim) -> Result<()> {
    if a != b {
        return Err(Error::DimensionMismatch { left: a.composite(), right: b.composite() });
    }
    Ok(())
}

/// Boson-factor matrix of size `n_max + 1`.
pub fn boson_matrix(kind: BosonKind, levels: usize) -> CMat {
    let mut a = CMat::zeros(levels, levels);
    for m in 1..levels {
        a[(m - 1, m)] = re((m as f64).sqrt());
    }
    match kind {
        BosonKind::Annihilate => a,
        BosonKind::Create => a.adjoint(),
        BosonKind::Number => CMat::from_diagonal(&CVec::from_fn(levels, |n, _| re(n as f64))),
        BosonKind::X => &a + a.adjoint(),
        BosonKind::P => (a.adjoint() - &a) * I,
    }
}

pub fn boson_op(kind: BosonKind, dim: BosonDim) -> Op {
    let hermitian = matches!(kind, BosonKind::Number | BosonKind::X | BosonKind::P);
    Op::from_boson(&boson_matrix(kind, dim.levels()), dim, hermitian)
}

/// Pauli/ladder matrix in the (|g⟩, |e⟩) ordering.
pub fn spin_matrix(kind: SpinKind) -> CMat {
    let m = |a: C64, b: C64, c: C64, d: C64| CMat::from_row_slice(2, 2, &[a, b, c, d]);
    match kind {
        SpinKind::Sx => m(ZERO, ONE, ONE, ZERO),
        SpinKind::Sy => m(ZERO, I, -I, ZERO),
        SpinKind::Sz => m(-ONE, ZERO, ZERO, ONE),
        SpinKind::SPlus => m(ZERO, ZERO, ONE, ZERO),
        SpinKind::SMinus => m(ZERO, ONE, ZERO, ZERO),
        SpinKind::Id => CMat::identity(2, 2),
    }
}

pub fn spin_op(kind: SpinKind, dim: BosonDim) -> Op {
    let hermitian = !matches!(kind, SpinKind::SPlus | SpinKind::SMinus);
    Op::from_spin(&spin_matrix(kind), dim, hermitian)
}

/// Truncated displacement `exp(β a† − β* a)` on the boson factor only.
pub fn displacement_matrix(beta: C64, levels: usize) -> CMat {
    if beta == ZERO {
        return CMat::identity(levels, levels);
    }
    let a = boson_matrix(BosonKind::Annihilate, levels);
    let generator = a.adjoint() * beta - a * beta.conj();
    linalg::expm_anti_hermitian(&generator)
}

/// `D(β)` embedded with the spin identity.
pub fn displacement(beta: C64, dim: BosonDim) -> Op {
    Op::from_boson(&displacement_matrix(beta, dim.levels()), dim, false)
}

pub fn basis_ket(n: usize, spin: SpinLabel, dim: BosonDim) -> Result<Ket> {
    if n > dim.n_max() {
        return Err(Error::LevelOutOfRange { level: n, n_max: dim.n_max() });
    }
    let mut amps = CVec::zeros(dim.composite());
    let [g, e] = spin.amplitudes();
    amps[dim.index(n, 0)] = g;
    amps[dim.index(n, 1)] = e;
    Ok(Ket { amps, dim })
}

/// Weighted sum of basis kets, renormalised.
pub fn superpose(terms: &[(usize, SpinLabel, C64)], dim: BosonDim) -> Result<Ket> {
    let mut amps = CVec::zeros(dim.composite());
    for &(n, spin, w) in terms {
        amps += basis_ket(n, spin, dim)?.amps * w;
    }
    let norm = amps.norm();
    if norm == 0.0 || !norm.is_finite() {
        return Err(Error::InvalidParameter("superposition has zero norm".into()));
    }
    Ok(Ket { amps: amps / re(norm), dim })
}

/// `⟨ψ|O|ψ⟩`.
pub fn expectation(op: &Op, psi: &Ket) -> Result<C64> {
    check_dims(op.dim, psi.dim)?;
    Ok(psi.amps.dotc(&(&op.mat * &psi.amps)))
}

/// Real part of `⟨ψ|O|ψ⟩` together with the imaginary residue, which is
/// rounding noise for Hermitian observables.
pub fn expectation_real(op: &Op, psi: &Ket) -> Result<(f64, f64)> {
    let z = expectation(op, psi)?;
    Ok((z.re, z.im.abs()))
}

/// `⟨φ|ψ⟩`.
pub fn overlap(phi: &Ket, psi: &Ket) -> Result<C64> {
    check_dims(phi.dim, psi.dim)?;
    Ok(phi.amps.dotc(&psi.amps))
}
