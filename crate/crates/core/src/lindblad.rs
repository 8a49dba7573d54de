//! GKSL (Lindblad) canonical form of time-local generators.
//!
//! A generator acting on row-major vectorized density matrices is expanded in
//! an orthonormal Hermitian operator basis `{F_0 = I/sqrt(d), F_1, ...}` with
//! traceless `F_k`. The coefficients of `F_i rho F_j` are read off the
//! reshuffled generator; the traceless block is the Kossakowski matrix, whose
//! eigen-decomposition gives the rates and Lindblad operators, and the mixed
//! `F_0`/`F_k` terms give the Hamiltonian.

use crate::error::{Error, Result};
use crate::linalg::{eigh, CMat, C64, I};
use crate::superop::{reshuffle_mat, vectorize_mat};

/// Default relative residual above which a generator is rejected.
pub const DEFAULT_RESIDUAL_TOL: f64 = 1e-6;

/// Orthonormal Hermitian basis under the Hilbert-Schmidt product.
///
/// `F_0 = I/sqrt(d)`, then the off-diagonal symmetric/antisymmetric pairs,
/// then the diagonal traceless elements. For `d = 2` this is
/// `(I, X, Y, Z)/sqrt(2)`.
pub fn hermitian_basis(d: usize) -> Vec<CMat> {
    let mut basis = vec![CMat::identity(d).scale_re(1.0 / (d as f64).sqrt())];
    let r = std::f64::consts::FRAC_1_SQRT_2;
    for j in 0..d {
        for k in j + 1..d {
            let mut sym = CMat::zeros(d, d);
            sym[(j, k)] = C64::new(r, 0.0);
            sym[(k, j)] = C64::new(r, 0.0);
            let mut anti = CMat::zeros(d, d);
            anti[(j, k)] = C64::new(0.0, -r);
            anti[(k, j)] = C64::new(0.0, r);
            basis.push(sym);
            basis.push(anti);
        }
    }
    for l in 1..d {
        let norm = 1.0 / ((l * (l + 1)) as f64).sqrt();
        let mut m = CMat::zeros(d, d);
        for i in 0..l {
            m[(i, i)] = C64::new(norm, 0.0);
        }
        m[(l, l)] = C64::new(-(l as f64) * norm, 0.0);
        basis.push(m);
    }
    basis
}

/// Superoperator of `rho -> -i[H, rho] + sum_k g_k (L_k rho L_k^+ - {L_k^+ L_k, rho}/2)`.
pub fn gksl_superop(h: &CMat, terms: &[(f64, CMat)]) -> CMat {
    let d = h.rows();
    let id = CMat::identity(d);
    let mut l = (&h.kron(&id) - &id.kron(&h.transpose())).scale(-I);
    for (rate, op) in terms {
        let ldl = &op.adjoint() * op;
        let jump = op.kron(&op.conj());
        let anti = &ldl.kron(&id) + &id.kron(&ldl.transpose());
        let term = &jump - &anti.scale_re(0.5);
        l = &l + &term.scale_re(*rate);
    }
    l
}

/// Canonical generator data: Hamiltonian, rates and orthonormal traceless
/// Lindblad operators, sorted by decreasing rate.
#[derive(Debug, Clone)]
pub struct LindbladForm {
    pub dim: usize,
    pub hamiltonian: CMat,
    pub rates: Vec<f64>,
    pub ops: Vec<CMat>,
    /// `max|L - L(H, rates, ops)| / max|L|`.
    pub residual: f64,
}

impl LindbladForm {
    pub fn superop(&self) -> CMat {
        let terms: Vec<(f64, CMat)> = self
            .rates
            .iter()
            .copied()
            .zip(self.ops.iter().cloned())
            .collect();
        gksl_superop(&self.hamiltonian, &terms)
    }

    pub fn min_rate(&self) -> f64 {
        self.rates.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max_abs_rate(&self) -> f64 {
        self.rates.iter().map(|r| r.abs()).fold(0.0, f64::max)
    }
}

/// Canonical decomposition with the default residual tolerance.
pub fn lindblad_decompose(l: &CMat, d: usize) -> Result<LindbladForm> {
    lindblad_decompose_with_tol(l, d, DEFAULT_RESIDUAL_TOL)
}

pub fn lindblad_decompose_with_tol(l: &CMat, d: usize, tol: f64) -> Result<LindbladForm> {
    let n = d * d;
    if l.rows() != n || l.cols() != n {
        return Err(Error::DimensionMismatch(format!(
            "generator for d = {d} must be {n}x{n}"
        )));
    }
    let basis = hermitian_basis(d);
    let vecs: Vec<Vec<C64>> = basis.iter().map(vectorize_mat).collect();
    let b = reshuffle_mat(l, d);

    // chi_ij = <F_i| B |F_j>
    let chi = CMat::from_fn(n, n, |i, j| {
        let bj = b.mul_vec(&vecs[j]);
        vecs[i].iter().zip(&bj).map(|(x, y)| x.conj() * y).sum()
    });

    let kossakowski = CMat::from_fn(n - 1, n - 1, |i, j| chi[(i + 1, j + 1)]).hermitian_part();
    let sqrt_d = (d as f64).sqrt();
    let mut k = CMat::identity(d).scale(chi[(0, 0)] / (2.0 * d as f64));
    for (idx, f) in basis.iter().enumerate().skip(1) {
        k = &k + &f.scale(chi[(idx, 0)] / sqrt_d);
    }
    let hamiltonian = (&k - &k.adjoint()).scale(I * 0.5);

    let (vals, u) = if n > 1 {
        eigh(&kossakowski)?
    } else {
        (vec![], CMat::identity(1))
    };
    let mut pairs: Vec<(f64, CMat)> = vals
        .iter()
        .enumerate()
        .map(|(m, &rate)| {
            let mut op = CMat::zeros(d, d);
            for (kk, f) in basis.iter().enumerate().skip(1) {
                op = &op + &f.scale(u[(kk - 1, m)]);
            }
            (rate, op)
        })
        .collect();
    pairs.sort_by(|a, b| b.0.total_cmp(&a.0));

    let mut form = LindbladForm {
        dim: d,
        hamiltonian,
        rates: pairs.iter().map(|p| p.0).collect(),
        ops: pairs.into_iter().map(|p| p.1).collect(),
        residual: 0.0,
    };
    let scale = l.max_abs();
    form.residual = if scale == 0.0 {
        form.superop().max_abs()
    } else {
        form.superop().max_diff(l) / scale
    };
    if form.residual > tol {
        return Err(Error::ResidualTooLarge {
            residual: form.residual,
        });
    }
    Ok(form)
}

/// Hilbert-Schmidt inner product `tr(A^dagger B)`.
pub fn hs_inner(a: &CMat, b: &CMat) -> C64 {
    a.as_slice()
        .iter()
        .zip(b.as_slice())
        .map(|(x, y)| x.conj() * y)
        .sum()
}
