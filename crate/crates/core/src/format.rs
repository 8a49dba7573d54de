//! JSON matrix exchange format: `{"dim": d, "re": [[...]], "im": [[...]]}`.
//!
//! `dim` is the Hilbert-space dimension of the object, so a density matrix is
//! stored as a `d x d` array and a process or dynamical matrix as `d^2 x d^2`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{CMat, C64};
use crate::superop::{DensityMatrix, ProcessMatrix};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixJson {
    pub dim: usize,
    pub re: Vec<Vec<f64>>,
    pub im: Vec<Vec<f64>>,
}

impl MatrixJson {
    pub fn new(dim: usize, m: &CMat) -> Self {
        let re = (0..m.rows()).map(|i| m.row(i).iter().map(|z| z.re).collect()).collect();
        let im = (0..m.rows()).map(|i| m.row(i).iter().map(|z| z.im).collect()).collect();
        MatrixJson { dim, re, im }
    }

    pub fn from_process(a: &ProcessMatrix) -> Self {
        Self::new(a.dim(), a.mat())
    }

    pub fn from_operator(m: &CMat) -> Self {
        Self::new(m.rows(), m)
    }

    /// Parses the arrays, checking that they are rectangular, agree in
    /// shape, and are `dim x dim` or `dim^2 x dim^2`.
    pub fn to_cmat(&self) -> Result<CMat> {
        let rows = self.re.len();
        if rows == 0 || self.im.len() != rows {
            return Err(Error::Format("re/im must have the same non-zero row count".into()));
        }
        let cols = self.re[0].len();
        let mut data = Vec::with_capacity(rows * cols);
        for (r, i) in self.re.iter().zip(&self.im) {
            if r.len() != cols || i.len() != cols {
                return Err(Error::Format("ragged or mismatched re/im rows".into()));
            }
            data.extend(r.iter().zip(i).map(|(&a, &b)| C64::new(a, b)));
        }
        if rows != cols || (rows != self.dim && rows != self.dim * self.dim) {
            return Err(Error::Format(format!(
                "{rows}x{cols} matrix is inconsistent with dim = {}",
                self.dim
            )));
        }
        CMat::new(rows, cols, data)
    }

    pub fn to_process(&self) -> Result<ProcessMatrix> {
        ProcessMatrix::new(self.dim, self.to_cmat()?)
    }

    pub fn to_density(&self) -> Result<DensityMatrix> {
        let m = self.to_cmat()?;
        if m.rows() != self.dim {
            return Err(Error::Format("density matrix must be dim x dim".into()));
        }
        DensityMatrix::new(m)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_process_matrix() {
        let m = CMat::from_fn(4, 4, |i, j| C64::new(i as f64 - 0.5, j as f64 * 0.25));
        let a = ProcessMatrix::new(2, m).unwrap();
        let text = serde_json::to_string(&MatrixJson::from_process(&a)).unwrap();
        let back: MatrixJson = serde_json::from_str(&text).unwrap();
        assert_eq!(back.to_process().unwrap(), a);
    }

    #[test]
    fn rejects_inconsistent_shapes() {
        let bad = MatrixJson { dim: 2, re: vec![vec![1.0, 0.0, 0.0]; 3], im: vec![vec![0.0; 3]; 3] };
        assert!(bad.to_cmat().is_err());
        let ragged = MatrixJson { dim: 2, re: vec![vec![1.0, 0.0], vec![0.0]], im: vec![vec![0.0; 2]; 2] };
        assert!(ragged.to_cmat().is_err());
        let parsed: MatrixJson =
            serde_json::from_str(r#"{"dim":2,"re":[[0.5,0],[0,0.5]],"im":[[0,0],[0,0]]}"#).unwrap();
        assert_eq!(parsed.to_density().unwrap(), DensityMatrix::maximally_mixed(2));
    }
}
