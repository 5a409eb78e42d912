//! Dense complex linear algebra used by every engine: Hermitian spectral
//! decompositions (optionally split into decoupled blocks), exponentials of
//! Hermitian generators and the usual norm/defect measures.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

pub type C64 = Complex64;
pub type CMat = DMatrix<C64>;
pub type CVec = DVector<C64>;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

#[inline]
pub fn re(x: f64) -> C64 {
    C64::new(x, 0.0)
}

/// Unit phasor `e^{i theta}`.
#[inline]
pub fn cis(theta: f64) -> C64 {
    let (s, c) = theta.sin_cos();
    C64::new(c, s)
}

/// Largest entry magnitude.
pub fn max_abs(m: &CMat) -> f64 {
    m.iter().fold(0.0_f64, |acc, z| acc.max(z.norm()))
}

/// `max |M - M^dagger|`.
pub fn hermiticity_defect(m: &CMat) -> f64 {
    let n = m.nrows();
    let mut worst = 0.0_f64;
    for j in 0..n {
        for i in 0..=j {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

/// `max |U^dagger U - I|`.
pub fn unitarity_defect(u: &CMat) -> f64 {
    let g = u.adjoint() * u;
    let n = g.nrows();
    let mut worst = 0.0_f64;
    for j in 0..n {
        for i in 0..n {
            let target = if i == j { ONE } else { ZERO };
            worst = worst.max((g[(i, j)] - target).norm());
        }
    }
    worst
}

/// Largest singular value, from the spectrum of `M^dagger M`.
pub fn operator_norm(m: &CMat) -> f64 {
    if m.nrows() == 0 || m.ncols() == 0 {
        return 0.0;
    }
    let g = m.adjoint() * m;
    let spec = HermitianEigen::new(&g);
    spec.values.iter().fold(0.0_f64, |a, &v| a.max(v)).max(0.0).sqrt()
}

/// Nearest unitary matrix (the polar factor `W V†` of the SVD `W Σ V†`).
pub fn nearest_unitary(m: &CMat) -> CMat {
    let svd = m.clone().svd(true, true);
    let (Some(w), Some(v_t)) = (svd.u, svd.v_t) else {
        unreachable!("both singular-vector sets were requested")
    };
    w * v_t
}

/// Eigen-decomposition of a Hermitian matrix, `H = V diag(E) V^dagger`.
#[derive(Clone, Debug)]
pub struct HermitianEigen {
    pub values: DVector<f64>,
    pub vectors: CMat,
}

impl HermitianEigen {
    /// The input is symmetrised before decomposition so that rounding-level
    /// anti-Hermitian residue never leaks into the spectrum.
    pub fn new(h: &CMat) -> Self {
        let sym = (h + h.adjoint()) * re(0.5);
        let eig = sym.symmetric_eigen();
        HermitianEigen { values: eig.eigenvalues, vectors: eig.eigenvectors }
    }

    /// `exp(-i tau H)`.
    pub fn exp_neg_i(&self, tau: f64) -> CMat {
        let phases: Vec<C64> = self.values.iter().map(|&e| cis(-crate::phase::reduced(e, tau))).collect();
        let mut scaled = self.vectors.clone();
        for (j, mut col) in scaled.column_iter_mut().enumerate() {
            col *= phases[j];
        }
        scaled * self.vectors.adjoint()
    }
}

/// `exp(-i tau H)` for Hermitian `H`.
pub fn expm_hermitian(h: &CMat, tau: f64) -> CMat {
    HermitianEigen::new(h).exp_neg_i(tau)
}

/// `exp(A)` for anti-Hermitian `A`, via the Hermitian generator `iA`.
pub fn expm_anti_hermitian(a: &CMat) -> CMat {
    let h = a * I;
    expm_hermitian(&h, 1.0)
}

/// Hermitian spectral decomposition that first splits the index set into the
/// connected components of the sparsity graph. Components never mix under
/// time evolution, so each block is diagonalised independently.
#[derive(Clone, Debug)]
pub struct BlockSpectrum {
    dim: usize,
    blocks: Vec<SpectralBlock>,
}

#[derive(Clone, Debug)]
struct SpectralBlock {
    indices: Vec<usize>,
    eig: HermitianEigen,
}

impl BlockSpectrum {
    pub fn new(h: &CMat) -> Self {
        let n = h.nrows();
        let mut parent: Vec<usize> = (0..n).collect();
        fn find(parent: &mut [usize], mut x: usize) -> usize {
            while parent[x] != x {
                parent[x] = parent[parent[x]];
                x = parent[x];
            }
            x
        }
        for j in 0..n {
            for i in 0..j {
                if h[(i, j)] != ZERO || h[(j, i)] != ZERO {
                    let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
                    if ri != rj {
                        parent[ri.max(rj)] = ri.min(rj);
                    }
                }
            }
        }
        let mut groups: Vec<Vec<usize>> = Vec::new();
        let mut slot = vec![usize::MAX; n];
        for i in 0..n {
            let r = find(&mut parent, i);
            if slot[r] == usize::MAX {
                slot[r] = groups.len();
                groups.push(Vec::new());
            }
            groups[slot[r]].push(i);
        }
        let blocks = groups
            .into_iter()
            .map(|indices| {
                let k = indices.len();
                let sub = CMat::from_fn(k, k, |a, b| h[(indices[a], indices[b])]);
                SpectralBlock { eig: HermitianEigen::new(&sub), indices }
            })
            .collect();
        BlockSpectrum { dim: n, blocks }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn block_count(&self) -> usize {
        self.blocks.len()
    }

    /// All eigenvalues, unsorted.
    pub fn eigenvalues(&self) -> Vec<f64> {
        self.blocks.iter().flat_map(|b| b.eig.values.iter().copied()).collect()
    }

    /// Projects a vector onto the eigenbasis (block by block).
    pub fn to_eigenbasis(&self, v: &CVec) -> Vec<CVec> {
        self.blocks
            .iter()
            .map(|b| {
                let sub = CVec::from_iterator(b.indices.len(), b.indices.iter().map(|&i| v[i]));
                b.eig.vectors.adjoint() * sub
            })
            .collect()
    }

    /// `exp(-i t H) v` given the eigenbasis coefficients of `v`.
    pub fn evolve_coefficients(&self, coeffs: &[CVec], t: f64) -> CVec {
        let mut out = CVec::zeros(self.dim);
        for (b, c) in self.blocks.iter().zip(coeffs) {
            let rotated = CVec::from_iterator(
                c.len(),
                c.iter().zip(b.eig.values.iter()).map(|(z, &e)| z * cis(-crate::phase::reduced(e, t))),
            );
            let sub = &b.eig.vectors * rotated;
            for (k, &i) in b.indices.iter().enumerate() {
                out[i] = sub[k];
            }
        }
        out
    }

    /// Dense `exp(-i t H)`.
    pub fn exp_neg_i(&self, t: f64) -> CMat {
        let mut out = CMat::zeros(self.dim, self.dim);
        for b in &self.blocks {
            let u = b.eig.exp_neg_i(t);
            for (a, &i) in b.indices.iter().enumerate() {
                for (c, &j) in b.indices.iter().enumerate() {
                    out[(i, j)] = u[(a, c)];
                }
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample_hermitian(n: usize) -> CMat {
        let m = CMat::from_fn(n, n, |i, j| {
            C64::new(((i * 7 + j * 3) % 11) as f64 / 11.0, ((i * 5 + j * 13) % 7) as f64 / 7.0)
        });
        (&m + m.adjoint()) * re(0.5)
    }

    #[test]
    fn eigen_reconstructs() {
        let h = sample_hermitian(9);
        let e = HermitianEigen::new(&h);
        let d = CMat::from_diagonal(&e.values.map(re));
        let back = &e.vectors * d * e.vectors.adjoint();
        assert!(max_abs(&(back - &h)) < 1e-13);
    }

    #[test]
    fn exponential_is_unitary_and_composes() {
        let h = sample_hermitian(8);
        let u1 = expm_hermitian(&h, 0.3);
        let u2 = expm_hermitian(&h, 0.5);
        let u12 = expm_hermitian(&h, 0.8);
        assert!(unitarity_defect(&u1) < 1e-13);
        assert!(max_abs(&(&u2 * &u1 - u12)) < 1e-12);
    }

    #[test]
    fn block_spectrum_matches_dense() {
        // two decoupled 2x2 blocks interleaved
        let mut h = CMat::zeros(4, 4);
        h[(0, 0)] = re(1.0);
        h[(2, 2)] = re(-0.5);
        h[(0, 2)] = C64::new(0.3, 0.1);
        h[(2, 0)] = C64::new(0.3, -0.1);
        h[(1, 1)] = re(2.0);
        h[(3, 3)] = re(0.25);
        h[(1, 3)] = re(0.7);
        h[(3, 1)] = re(0.7);
        let blocks = BlockSpectrum::new(&h);
        assert_eq!(blocks.block_count(), 2);
        let dense = expm_hermitian(&h, 1.7);
        assert!(max_abs(&(blocks.exp_neg_i(1.7) - &dense)) < 1e-13);
        let v = CVec::from_vec(vec![ONE, I, re(0.5), re(-1.0)]);
        let c = blocks.to_eigenbasis(&v);
        let w = blocks.evolve_coefficients(&c, 1.7);
        assert!((w - dense * v).norm() < 1e-13);
    }

    #[test]
    fn nearest_unitary_repairs_rounding() {
        let u = expm_hermitian(&sample_hermitian(7), 0.9);
        let noisy = &u + CMat::from_element(7, 7, C64::new(1e-9, -2e-9));
        let fixed = nearest_unitary(&noisy);
        assert!(unitarity_defect(&noisy) > 1e-9);
        assert!(unitarity_defect(&fixed) < 1e-14);
        assert!(max_abs(&(fixed - u)) < 1e-8);
    }

    #[test]
    fn operator_norm_of_diagonal() {
        let d = CMat::from_diagonal(&CVec::from_vec(vec![re(1.0), re(-3.0), C64::new(0.0, 2.0)]));
        assert!((operator_norm(&d) - 3.0).abs() < 1e-12);
    }
}
