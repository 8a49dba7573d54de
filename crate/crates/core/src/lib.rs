//! Witnesses of (non-)Markovianity for finite-dimensional dynamical maps.
//!
//! A [`MapFamily`] gives the process matrix `Phi(t, 0)` of a qubit (or small
//! qudit) evolution. The [`witness`] module scans it for invertibility,
//! CP-divisibility, negative canonical rates, trace-distance backflow and
//! generator singularities, and [`classify`] places it in one of four
//! regions. [`tomography`] simulates the operational route: reconstructing
//! the process matrix from noisy state tomography.

pub mod error;
pub mod format;
pub mod lindblad;
pub mod linalg;
pub mod models;
pub mod propagate;
pub mod superop;
pub mod tomography;
pub mod witness;

pub use error::{Error, Result};
pub use format::MatrixJson;
pub use lindblad::{lindblad_decompose, LindbladForm};
pub use linalg::{CMat, C64};
pub use models::{DecayGPreset, DephasingPreset, MapFamily, Model};
pub use propagate::{expm, time_split_forward, time_split_inverse, TimeGrid};
pub use superop::{DensityMatrix, DynamicalMatrix, KrausSet, ProcessMatrix};
pub use tomography::{ProbeSet, TomographyRun, Verdict};
pub use witness::{classify, Classification, Region, ScanFlags, ScanReport, ToleranceConfig};
