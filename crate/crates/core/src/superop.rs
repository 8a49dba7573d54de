//! Representations of linear maps on density matrices.
//!
//! Density matrices are vectorized row-major, so for a qubit the vector is
//! `(rho00, rho01, rho10, rho11)` and a map `rho -> X rho Y` has process
//! matrix `X (x) Y^T`. The dynamical (Choi-type) matrix is obtained from the
//! process matrix by the index reshuffle `B[(a,c),(b,d)] = A[(a,b),(c,d)]`,
//! with pairs `(x,y)` encoded as `d*x + y`. It is left unnormalized, so a
//! trace-preserving map has `tr B = d`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, eigh, CMat, Lu, C64, ONE, ZERO};

/// Hilbert-space dimension recovered from a superoperator of size `d^2`.
pub fn dim_from_superop_size(n: usize) -> Result<usize> {
    let d = (n as f64).sqrt().round() as usize;
    if d == 0 || d * d != n {
        return Err(Error::DimensionMismatch(format!(
            "{n} is not the square of a Hilbert-space dimension"
        )));
    }
    Ok(d)
}

/// Validated density matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    mat: CMat,
}

impl DensityMatrix {
    pub fn new(mat: CMat) -> Result<Self> {
        if !mat.is_square() {
            return Err(Error::DimensionMismatch("density matrix must be square".into()));
        }
        let scale = mat.max_abs();
        let asym = mat.max_asymmetry();
        if asym > 1e-12 * scale.max(f64::MIN_POSITIVE) {
            return Err(Error::InvalidState(format!("not Hermitian (asymmetry {asym:.3e})")));
        }
        let tr = mat.trace();
        if (tr - ONE).norm() > 1e-12 {
            return Err(Error::InvalidState(format!("trace {tr} != 1")));
        }
        let (vals, _) = eigh(&mat)?;
        if vals[0] < -1e-10 {
            return Err(Error::InvalidState(format!(
                "negative eigenvalue {:.3e}",
                vals[0]
            )));
        }
        Ok(DensityMatrix { mat })
    }

    /// Projector onto a (not necessarily normalized) ket.
    pub fn pure(ket: &[C64]) -> Result<Self> {
        let norm = ket.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 {
            return Err(Error::InvalidState("zero ket".into()));
        }
        let k: Vec<C64> = ket.iter().map(|z| z / norm).collect();
        Self::new(CMat::outer(&k, &k))
    }

    /// Computational basis projector `|k><k|`.
    pub fn basis(dim: usize, k: usize) -> Self {
        let mut m = CMat::zeros(dim, dim);
        m[(k, k)] = ONE;
        DensityMatrix { mat: m }
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        DensityMatrix {
            mat: CMat::identity(dim).scale_re(1.0 / dim as f64),
        }
    }

    /// Qubit state `(1/2) [[1 - n_z, n_+], [n_-, 1 + n_z]]` with `n_- = conj(n_+)`.
    pub fn qubit(n_z: f64, n_plus: C64) -> Result<Self> {
        let m = CMat::new(
            2,
            2,
            vec![
                C64::new((1.0 - n_z) / 2.0, 0.0),
                n_plus / 2.0,
                n_plus.conj() / 2.0,
                C64::new((1.0 + n_z) / 2.0, 0.0),
            ],
        )?;
        Self::new(m)
    }

    pub fn dim(&self) -> usize {
        self.mat.rows()
    }

    pub fn mat(&self) -> &CMat {
        &self.mat
    }
}

/// Row-major flattening of a square matrix.
pub fn vectorize_mat(m: &CMat) -> Vec<C64> {
    m.as_slice().to_vec()
}

pub fn vectorize(rho: &DensityMatrix) -> Vec<C64> {
    vectorize_mat(rho.mat())
}

pub fn devectorize(v: &[C64]) -> Result<CMat> {
    let d = dim_from_superop_size(v.len())?;
    CMat::new(d, d, v.to_vec())
}

/// Kraus decomposition of a trace-preserving channel.
#[derive(Debug, Clone)]
pub struct KrausSet {
    dim: usize,
    ops: Vec<CMat>,
}

impl KrausSet {
    pub fn new(ops: Vec<CMat>) -> Result<Self> {
        let first = ops
            .first()
            .ok_or_else(|| Error::InvalidParameter("empty Kraus set".into()))?;
        let dim = first.rows();
        if ops.iter().any(|k| k.rows() != dim || k.cols() != dim) {
            return Err(Error::DimensionMismatch(
                "Kraus operators must all be d x d".into(),
            ));
        }
        let mut sum = CMat::zeros(dim, dim);
        for k in &ops {
            sum = &sum + &(&k.adjoint() * k);
        }
        let defect = sum.max_diff(&CMat::identity(dim));
        if defect > 1e-10 {
            return Err(Error::InvalidParameter(format!(
                "Kraus completeness violated by {defect:.3e}"
            )));
        }
        Ok(KrausSet { dim, ops })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn ops(&self) -> &[CMat] {
        &self.ops
    }
}

/// Matrix of a linear map acting on row-major vectorized density matrices.
#[derive(Debug, Clone, PartialEq)]
pub struct ProcessMatrix {
    dim: usize,
    mat: CMat,
}

impl ProcessMatrix {
    pub fn new(dim: usize, mat: CMat) -> Result<Self> {
        if mat.rows() != dim * dim || mat.cols() != dim * dim {
            return Err(Error::DimensionMismatch(format!(
                "process matrix for d = {dim} must be {0}x{0}, got {1}x{2}",
                dim * dim,
                mat.rows(),
                mat.cols()
            )));
        }
        Ok(ProcessMatrix { dim, mat })
    }

    /// Infers `d` from a `d^2 x d^2` matrix.
    pub fn from_mat(mat: CMat) -> Result<Self> {
        if !mat.is_square() {
            return Err(Error::DimensionMismatch("process matrix must be square".into()));
        }
        let d = dim_from_superop_size(mat.rows())?;
        Self::new(d, mat)
    }

    pub fn identity(dim: usize) -> Self {
        ProcessMatrix {
            dim,
            mat: CMat::identity(dim * dim),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn mat(&self) -> &CMat {
        &self.mat
    }

    pub fn into_mat(self) -> CMat {
        self.mat
    }

    /// Action on a d x d operator.
    pub fn apply(&self, rho: &CMat) -> CMat {
        let out = self.mat.mul_vec(&vectorize_mat(rho));
        CMat::new(self.dim, self.dim, out).expect("shape preserved")
    }

    pub fn compose(&self, rhs: &ProcessMatrix) -> ProcessMatrix {
        assert_eq!(self.dim, rhs.dim);
        ProcessMatrix {
            dim: self.dim,
            mat: &self.mat * &rhs.mat,
        }
    }

    pub fn dynamical(&self) -> DynamicalMatrix {
        reshuffle(self)
    }

    /// Max deviation of the diagonal-block sum of the dynamical matrix from `I`.
    pub fn trace_preservation_defect(&self) -> f64 {
        block_trace_defect(&reshuffle_mat(&self.mat, self.dim), self.dim, 1.0)
    }

    pub fn hermiticity_defect(&self) -> f64 {
        reshuffle_mat(&self.mat, self.dim).max_asymmetry()
    }

    pub fn is_trace_preserving(&self, tol: f64) -> bool {
        self.trace_preservation_defect() <= tol
    }

    pub fn is_hermiticity_preserving(&self, tol: f64) -> bool {
        self.hermiticity_defect() <= tol
    }
}

/// Dynamical (Choi-type) matrix of a map.
#[derive(Debug, Clone, PartialEq)]
pub struct DynamicalMatrix {
    dim: usize,
    mat: CMat,
}

impl DynamicalMatrix {
    pub fn new(dim: usize, mat: CMat) -> Result<Self> {
        if mat.rows() != dim * dim || mat.cols() != dim * dim {
            return Err(Error::DimensionMismatch(format!(
                "dynamical matrix for d = {dim} must be {0}x{0}",
                dim * dim
            )));
        }
        Ok(DynamicalMatrix { dim, mat })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn mat(&self) -> &CMat {
        &self.mat
    }

    pub fn process(&self) -> ProcessMatrix {
        ProcessMatrix {
            dim: self.dim,
            mat: reshuffle_mat(&self.mat, self.dim),
        }
    }
}

/// `B[(a,c),(b,d)] = A[(a,b),(c,d)]` for a `d^2 x d^2` matrix. An involution.
pub fn reshuffle_mat(a: &CMat, d: usize) -> CMat {
    assert!(a.rows() == d * d && a.cols() == d * d, "reshuffle needs a d^2 x d^2 matrix");
    CMat::from_fn(d * d, d * d, |row, col| {
        let (x, c) = (row / d, row % d);
        let (b, e) = (col / d, col % d);
        a[(d * x + b, d * c + e)]
    })
}

/// Reshuffle of an arbitrary square matrix, inferring `d`.
pub fn try_reshuffle_mat(a: &CMat) -> Result<CMat> {
    if !a.is_square() {
        return Err(Error::DimensionMismatch("reshuffle needs a square matrix".into()));
    }
    let d = dim_from_superop_size(a.rows())?;
    Ok(reshuffle_mat(a, d))
}

pub fn reshuffle(a: &ProcessMatrix) -> DynamicalMatrix {
    DynamicalMatrix {
        dim: a.dim,
        mat: reshuffle_mat(&a.mat, a.dim),
    }
}

/// Max deviation of `sum_a B[(a,.),(a,.)]` from `target * I`.
pub(crate) fn block_trace_defect(b: &CMat, d: usize, target: f64) -> f64 {
    let mut sum = CMat::zeros(d, d);
    for a in 0..d {
        for c in 0..d {
            for e in 0..d {
                sum[(c, e)] += b[(d * a + c, d * a + e)];
            }
        }
    }
    sum.max_diff(&CMat::identity(d).scale_re(target))
}

/// Process matrix `sum_k E_k (x) conj(E_k)` of a Kraus set.
pub fn kraus_to_process(k: &KrausSet) -> ProcessMatrix {
    let n = k.dim * k.dim;
    let mut mat = CMat::zeros(n, n);
    for e in &k.ops {
        mat = &mat + &e.kron(&e.conj());
    }
    ProcessMatrix { dim: k.dim, mat }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SpectrumKind {
    HermitianEigenvalues,
    SingularValues,
}

/// Sorted (ascending) real spectrum.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Spectrum {
    pub values: Vec<f64>,
    pub kind: SpectrumKind,
}

impl Spectrum {
    pub fn min(&self) -> f64 {
        self.values[0]
    }

    pub fn max(&self) -> f64 {
        *self.values.last().expect("non-empty spectrum")
    }

    pub fn sum(&self) -> f64 {
        self.values.iter().sum()
    }
}

pub fn hermitian_eigenvalues(m: &CMat) -> Result<Spectrum> {
    let (values, _) = eigh(m)?;
    Ok(Spectrum {
        values,
        kind: SpectrumKind::HermitianEigenvalues,
    })
}

pub fn singular_values(m: &CMat) -> Spectrum {
    Spectrum {
        values: linalg::singular_values(m),
        kind: SpectrumKind::SingularValues,
    }
}

/// Conditioning summary of a process matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SvdSummary {
    pub min_sv: f64,
    pub max_sv: f64,
    pub det: C64,
}

impl SvdSummary {
    pub fn cond(&self) -> f64 {
        if self.min_sv == 0.0 {
            f64::INFINITY
        } else {
            self.max_sv / self.min_sv
        }
    }

    /// `min_sv <= threshold * max_sv`.
    pub fn is_singular(&self, sv_threshold: f64) -> bool {
        self.min_sv <= sv_threshold * self.max_sv
    }
}

pub fn min_singular_value_and_det(a: &ProcessMatrix) -> SvdSummary {
    svd_summary(a.mat())
}

pub(crate) fn svd_summary(m: &CMat) -> SvdSummary {
    let sv = linalg::singular_values(m);
    let det = Lu::new(m).map(|lu| lu.det()).unwrap_or(ZERO);
    SvdSummary {
        min_sv: sv[0],
        max_sv: *sv.last().unwrap(),
        det,
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CpVerdict {
    pub is_cp: bool,
    pub min_eig: f64,
}

/// CP test: `min eig(B) >= -tol * max(1, max|B|)`.
pub fn is_cp(b: &DynamicalMatrix, tol: f64) -> Result<CpVerdict> {
    let spec = hermitian_eigenvalues(b.mat())?;
    let min_eig = spec.min();
    Ok(CpVerdict {
        is_cp: min_eig >= -tol * b.mat().max_abs().max(1.0),
        min_eig,
    })
}

/// Inverse of a process matrix, refusing maps whose relative smallest
/// singular value is at or below `sv_threshold`.
pub fn invert(a: &ProcessMatrix, sv_threshold: f64) -> Result<ProcessMatrix> {
    let s = svd_summary(a.mat());
    if s.is_singular(sv_threshold) {
        return Err(Error::SingularMap {
            min_sv: s.min_sv,
            max_sv: s.max_sv,
        });
    }
    let inv = Lu::new(a.mat())?.inverse()?;
    Ok(ProcessMatrix { dim: a.dim, mat: inv })
}

/// `A_t A_s^{-1}`: the map carrying the state at `s` to the state at `t`.
pub fn intermediate_map(
    a_t: &ProcessMatrix,
    a_s: &ProcessMatrix,
    sv_threshold: f64,
) -> Result<ProcessMatrix> {
    if a_t.dim != a_s.dim {
        return Err(Error::DimensionMismatch("maps act on different spaces".into()));
    }
    let inv = invert(a_s, sv_threshold)?;
    Ok(a_t.compose(&inv))
}

/// Pauli matrices and qubit operators in the computational basis.
pub mod pauli {
    use super::*;

    pub fn x() -> CMat {
        CMat::from_real_rows(&[&[0.0, 1.0], &[1.0, 0.0]])
    }

    pub fn y() -> CMat {
        CMat::new(2, 2, vec![ZERO, C64::new(0.0, -1.0), C64::new(0.0, 1.0), ZERO]).unwrap()
    }

    pub fn z() -> CMat {
        CMat::from_real_rows(&[&[1.0, 0.0], &[0.0, -1.0]])
    }

    /// `|i><j|` on a d-level system.
    pub fn ket_bra(d: usize, i: usize, j: usize) -> CMat {
        let mut m = CMat::zeros(d, d);
        m[(i, j)] = ONE;
        m
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn re(x: f64) -> C64 {
        C64::new(x, 0.0)
    }

    fn amplitude_damping_kraus(gt: f64) -> KrausSet {
        let e0 = CMat::from_real_rows(&[&[1.0, 0.0], &[0.0, (-gt).exp()]]);
        let e1 = CMat::from_real_rows(&[&[0.0, (1.0 - (-2.0 * gt).exp()).sqrt()], &[0.0, 0.0]]);
        KrausSet::new(vec![e0, e1]).unwrap()
    }

    #[test]
    fn vectorize_examples() {
        assert_eq!(
            vectorize(&DensityMatrix::maximally_mixed(2)),
            vec![re(0.5), re(0.0), re(0.0), re(0.5)]
        );
        let excited = DensityMatrix::qubit(1.0, C64::new(0.0, 0.0)).unwrap();
        assert_eq!(vectorize(&excited), vec![re(0.0), re(0.0), re(0.0), re(1.0)]);
        assert_eq!(
            vectorize(&DensityMatrix::basis(2, 0)),
            vec![re(1.0), re(0.0), re(0.0), re(0.0)]
        );
        let plus_i = DensityMatrix::pure(&[re(1.0), C64::new(0.0, 1.0)]).unwrap();
        assert_eq!(&devectorize(&vectorize(&plus_i)).unwrap(), plus_i.mat());
    }

    #[test]
    fn density_matrix_validation() {
        let not_psd = CMat::from_real_rows(&[&[1.5, 0.0], &[0.0, -0.5]]);
        assert!(matches!(DensityMatrix::new(not_psd), Err(Error::InvalidState(_))));
        let bad_trace = CMat::from_real_rows(&[&[0.5, 0.0], &[0.0, 0.6]]);
        assert!(DensityMatrix::new(bad_trace).is_err());
        let non_herm = CMat::new(2, 2, vec![re(0.5), re(0.1), re(0.0), re(0.5)]).unwrap();
        assert!(DensityMatrix::new(non_herm).is_err());
    }

    #[test]
    fn amplitude_damping_process_matrix() {
        let gt = 0.5;
        let a = kraus_to_process(&amplitude_damping_kraus(gt));
        let e1 = (-gt).exp();
        let e2 = (-2.0 * gt).exp();
        let expected = CMat::from_real_rows(&[
            &[1.0, 0.0, 0.0, 1.0 - e2],
            &[0.0, e1, 0.0, 0.0],
            &[0.0, 0.0, e1, 0.0],
            &[0.0, 0.0, 0.0, e2],
        ]);
        assert!(a.mat().max_diff(&expected) < 1e-15);
        assert!((a.mat()[(0, 3)].re - (1.0 - (-1.0f64).exp())).abs() < 1e-15);

        // S1 action on a generic state
        let rho = DensityMatrix::qubit(0.3, C64::new(0.2, -0.1)).unwrap();
        let out = a.apply(rho.mat());
        let mut direct = CMat::zeros(2, 2);
        for k in amplitude_damping_kraus(gt).ops() {
            direct = &direct + &(&(k * rho.mat()) * &k.adjoint());
        }
        assert!(out.max_diff(&direct) < 1e-15);
    }

    #[test]
    fn identity_and_bit_flip_channels() {
        let id = kraus_to_process(&KrausSet::new(vec![CMat::identity(2)]).unwrap());
        assert_eq!(id.mat(), &CMat::identity(4));
        let x = kraus_to_process(&KrausSet::new(vec![pauli::x()]).unwrap());
        let v = vec![re(1.0), re(2.0), re(3.0), re(4.0)];
        assert_eq!(x.mat().mul_vec(&v), vec![re(4.0), re(3.0), re(2.0), re(1.0)]);
    }

    #[test]
    fn kraus_set_rejects_incomplete_or_mismatched() {
        assert!(KrausSet::new(vec![CMat::identity(2).scale_re(0.5)]).is_err());
        assert!(KrausSet::new(vec![CMat::identity(2), CMat::zeros(3, 3)]).is_err());
        assert!(KrausSet::new(vec![]).is_err());
    }

    #[test]
    fn reshuffle_reproduces_block_table() {
        // entries labelled 1..16 row by row; the 4x4 table maps p/P/q/Q rows
        let a = CMat::from_fn(4, 4, |i, j| re((4 * i + j + 1) as f64));
        let b = reshuffle_mat(&a, 2);
        let expected = CMat::from_real_rows(&[
            &[1.0, 2.0, 5.0, 6.0],
            &[3.0, 4.0, 7.0, 8.0],
            &[9.0, 10.0, 13.0, 14.0],
            &[11.0, 12.0, 15.0, 16.0],
        ]);
        assert_eq!(b, expected);
        assert_eq!(reshuffle_mat(&b, 2), a);
    }

    #[test]
    fn amplitude_damping_dynamical_matrix() {
        let gt = 0.5;
        let b = reshuffle(&kraus_to_process(&amplitude_damping_kraus(gt)));
        let e1 = (-gt).exp();
        let e2 = (-2.0 * gt).exp();
        let expected = CMat::from_real_rows(&[
            &[1.0, 0.0, 0.0, e1],
            &[0.0, 1.0 - e2, 0.0, 0.0],
            &[0.0, 0.0, 0.0, 0.0],
            &[e1, 0.0, 0.0, e2],
        ]);
        assert!(b.mat().max_diff(&expected) < 1e-15);
        let spec = hermitian_eigenvalues(b.mat()).unwrap();
        let want = [0.0, 0.0, 1.0 - e2, 1.0 + e2];
        for (got, want) in spec.values.iter().zip(want) {
            assert!((got - want).abs() < 1e-12, "{spec:?}");
        }
        assert!((spec.sum() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn identity_dynamical_matrix_spectrum() {
        let b = reshuffle(&ProcessMatrix::identity(2));
        let spec = hermitian_eigenvalues(b.mat()).unwrap();
        assert_eq!(spec.values.len(), 4);
        assert!((spec.values[3] - 2.0).abs() < 1e-15);
        assert!(spec.values[..3].iter().all(|v| v.abs() < 1e-15));
        assert!(is_cp(&b, 1e-9).unwrap().is_cp);
    }

    #[test]
    fn eigenvalues_of_decay_g_choi() {
        // |G|^2 = 0.25
        let g = 0.5;
        let b = CMat::from_real_rows(&[
            &[g * g, 0.0, 0.0, g],
            &[0.0, 0.0, 0.0, 0.0],
            &[0.0, 0.0, 1.0 - g * g, 0.0],
            &[g, 0.0, 0.0, 1.0],
        ]);
        let spec = hermitian_eigenvalues(&b).unwrap();
        for (got, want) in spec.values.iter().zip([0.0, 0.0, 0.75, 1.25]) {
            assert!((got - want).abs() < 1e-14);
        }
        assert_eq!(hermitian_eigenvalues(&CMat::identity(4)).unwrap().values, vec![1.0; 4]);
    }

    #[test]
    fn cp_verdicts() {
        // dephasing-type Choi with x0 > 1 has eigenvalue 1 - x0 < 0
        let x0 = 1.2;
        let b = DynamicalMatrix::new(
            2,
            CMat::from_real_rows(&[
                &[x0, 0.0, 0.0, 0.5],
                &[0.0, 0.1, 0.0, 0.0],
                &[0.0, 0.0, 1.0 - x0, 0.0],
                &[0.5, 0.0, 0.0, 0.9],
            ]),
        )
        .unwrap();
        let v = is_cp(&b, 1e-9).unwrap();
        assert!(!v.is_cp);
        assert!((v.min_eig - (1.0 - x0)).abs() < 1e-12);
        let diag = DynamicalMatrix::new(2, CMat::from_diag(&[re(2.0), re(0.0), re(0.0), re(0.0)])).unwrap();
        assert!(is_cp(&diag, 1e-9).unwrap().is_cp);
    }

    #[test]
    fn svd_summary_examples() {
        let gt = 0.5;
        let a = kraus_to_process(&amplitude_damping_kraus(gt));
        let s = min_singular_value_and_det(&a);
        assert!((s.det - re((-2.0f64).exp())).norm() < 1e-15);
        let id = min_singular_value_and_det(&ProcessMatrix::identity(2));
        assert_eq!((id.min_sv, id.det), (1.0, re(1.0)));
        let zero = ProcessMatrix::new(2, CMat::zeros(4, 4)).unwrap();
        let z = min_singular_value_and_det(&zero);
        assert_eq!((z.min_sv, z.det), (0.0, re(0.0)));
    }

    #[test]
    fn inverse_of_amplitude_damping() {
        let gt = 0.5;
        let a = kraus_to_process(&amplitude_damping_kraus(gt));
        let inv = invert(&a, 1e-10).unwrap();
        let expected = CMat::from_real_rows(&[
            &[1.0, 0.0, 0.0, 1.0 - (2.0 * gt).exp()],
            &[0.0, gt.exp(), 0.0, 0.0],
            &[0.0, 0.0, gt.exp(), 0.0],
            &[0.0, 0.0, 0.0, (2.0 * gt).exp()],
        ]);
        assert!(inv.mat().max_diff(&expected) < 1e-14);
        assert_eq!(invert(&ProcessMatrix::identity(2), 1e-10).unwrap(), ProcessMatrix::identity(2));
    }

    #[test]
    fn singular_map_is_refused() {
        let a = ProcessMatrix::new(
            2,
            CMat::from_real_rows(&[
                &[1.0, 0.0, 0.0, 0.0],
                &[0.0, 0.0, 0.0, 0.0],
                &[0.0, 0.0, 0.0, 0.0],
                &[0.0, 0.0, 0.0, 1.0],
            ]),
        )
        .unwrap();
        match invert(&a, 1e-10) {
            Err(Error::SingularMap { min_sv, .. }) => assert_eq!(min_sv, 0.0),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn intermediate_map_of_identical_maps() {
        let a = kraus_to_process(&amplitude_damping_kraus(0.7));
        let m = intermediate_map(&a, &a, 1e-10).unwrap();
        assert!(m.mat().max_diff(&CMat::identity(4)) < 1e-14);
    }

    #[test]
    fn dimension_errors() {
        assert!(ProcessMatrix::new(2, CMat::identity(3)).is_err());
        assert!(ProcessMatrix::from_mat(CMat::identity(5)).is_err());
        assert!(try_reshuffle_mat(&CMat::zeros(4, 3)).is_err());
        assert!(devectorize(&[ONE; 3]).is_err());
    }
}
