//! Simulated state tomography and linear-inversion process reconstruction.
//!
//! A probe set of `d^2` states with linearly independent vectorizations is
//! pushed through the family at time `t`. The outputs, optionally perturbed by
//! seeded Gaussian noise on their generalized Bloch components, determine the
//! process matrix as `S_out S_in^-1`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::format::MatrixJson;
use crate::lindblad::hermitian_basis;
use crate::linalg::{singular_values, CMat, Lu, C64};
use crate::models::MapFamily;
use crate::superop::{vectorize_mat, DensityMatrix, ProcessMatrix};

/// Smallest acceptable singular value of the stacked probe matrix.
pub const MIN_STACK_SV: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct ProbeSet {
    dim: usize,
    states: Vec<DensityMatrix>,
    stack: CMat,
}

/// Matrix whose columns are the vectorized inputs.
fn stack_columns(mats: &[&CMat]) -> CMat {
    let cols: Vec<Vec<C64>> = mats.iter().map(|m| vectorize_mat(m)).collect();
    let n = cols.first().map_or(0, Vec::len);
    CMat::from_fn(n, cols.len(), |i, j| cols[j][i])
}

impl ProbeSet {
    /// Accepts `d^2` states of a common dimension whose stack is invertible.
    pub fn new(states: Vec<DensityMatrix>) -> Result<Self> {
        let dim = states
            .first()
            .map(|s| s.dim())
            .ok_or_else(|| Error::InvalidParameter("empty probe set".into()))?;
        if states.iter().any(|s| s.dim() != dim) {
            return Err(Error::DimensionMismatch("probe states differ in dimension".into()));
        }
        if states.len() != dim * dim {
            return Err(Error::DimensionMismatch(format!(
                "need {} probes for d = {dim}, got {}",
                dim * dim,
                states.len()
            )));
        }
        let stack = stack_columns(&states.iter().map(|s| s.mat()).collect::<Vec<_>>());
        let min_sv = singular_values(&stack)[0];
        if min_sv <= MIN_STACK_SV {
            return Err(Error::SingularProbeStack { min_sv });
        }
        Ok(ProbeSet { dim, states, stack })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn states(&self) -> &[DensityMatrix] {
        &self.states
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    /// `S_in`, the vectorized probes as columns.
    pub fn stack(&self) -> &CMat {
        &self.stack
    }

    pub fn stack_min_sv(&self) -> f64 {
        singular_values(&self.stack)[0]
    }
}

/// `|0>, |1>, |+>, |+i>` for a qubit.
pub fn default_probes(d: usize) -> Result<ProbeSet> {
    if d != 2 {
        return Err(Error::UnsupportedDimension(d));
    }
    let r = std::f64::consts::FRAC_1_SQRT_2;
    let kets = [
        [C64::new(1.0, 0.0), C64::new(0.0, 0.0)],
        [C64::new(0.0, 0.0), C64::new(1.0, 0.0)],
        [C64::new(r, 0.0), C64::new(r, 0.0)],
        [C64::new(r, 0.0), C64::new(0.0, r)],
    ];
    let states = kets
        .iter()
        .map(|k| DensityMatrix::pure(k))
        .collect::<Result<Vec<_>>>()?;
    ProbeSet::new(states)
}

/// Outputs of one simulated tomography experiment.
///
/// Noisy outputs are Hermitian with unit trace but need not be positive, so
/// they are kept as plain matrices.
#[derive(Debug, Clone, PartialEq)]
pub struct TomographyRun {
    pub probes: ProbeSet,
    pub t: f64,
    pub outputs: Vec<CMat>,
    pub noise_sigma: f64,
    pub seed: u64,
}

pub fn simulate_outputs(
    f: &MapFamily,
    t: f64,
    probes: &ProbeSet,
    noise_sigma: f64,
    seed: u64,
) -> Result<TomographyRun> {
    if !(noise_sigma.is_finite() && noise_sigma >= 0.0) {
        return Err(Error::InvalidParameter(format!("noise_sigma must be >= 0, got {noise_sigma}")));
    }
    if probes.dim() != f.dim() {
        return Err(Error::DimensionMismatch("probe and family dimensions differ".into()));
    }
    let a = f.eval(t)?;
    let d = probes.dim();
    // generalized Gell-Mann matrices, tr(l_j l_k) = 2 delta_jk
    let gell_mann: Vec<CMat> = hermitian_basis(d)
        .into_iter()
        .skip(1)
        .map(|m| m.scale_re(std::f64::consts::SQRT_2))
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let normal = if noise_sigma > 0.0 {
        Some(Normal::new(0.0, noise_sigma).map_err(|e| Error::InvalidParameter(e.to_string()))?)
    } else {
        None
    };
    let mut outputs = Vec::with_capacity(probes.len());
    for rho in probes.states() {
        let mut out = a.apply(rho.mat());
        if let Some(normal) = &normal {
            // rho = I/d + (1/2) sum_k r_k l_k, so shifting r_k by x adds x l_k / 2
            for l in &gell_mann {
                let x = normal.sample(&mut rng);
                out = &out + &l.scale_re(0.5 * x);
            }
            out = out.hermitian_part();
            let tr = out.trace().re;
            out = out.scale_re(1.0 / tr);
        }
        outputs.push(out);
    }
    Ok(TomographyRun {
        probes: probes.clone(),
        t,
        outputs,
        noise_sigma,
        seed,
    })
}

/// `A_rec = S_out S_in^-1`.
pub fn reconstruct_process(run: &TomographyRun) -> Result<ProcessMatrix> {
    if run.outputs.len() != run.probes.len() {
        return Err(Error::DimensionMismatch("one output per probe required".into()));
    }
    let s_out = stack_columns(&run.outputs.iter().collect::<Vec<_>>());
    let lu = Lu::new(run.probes.stack())?;
    if lu.is_singular() {
        return Err(Error::SingularProbeStack { min_sv: 0.0 });
    }
    ProcessMatrix::new(run.probes.dim(), &s_out * &lu.inverse()?)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Invertible,
    NonInvertible,
    Inconclusive,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VerdictReport {
    pub verdict: Verdict,
    /// Smallest singular value of the reconstructed matrix.
    pub min_sv: f64,
    pub tau_low: f64,
    pub tau_high: f64,
}

/// Three-way verdict with the band
/// `tau_low = max(sv_threshold, 10 sigma)`, `tau_high = 100 sigma + sv_threshold`.
pub fn invertibility_verdict(a: &ProcessMatrix, noise_sigma: f64, sv_threshold: f64) -> VerdictReport {
    let min_sv = singular_values(a.mat())[0];
    let tau_low = sv_threshold.max(10.0 * noise_sigma);
    let tau_high = 100.0 * noise_sigma + sv_threshold;
    let verdict = if min_sv < tau_low {
        Verdict::NonInvertible
    } else if min_sv > tau_high {
        Verdict::Invertible
    } else {
        Verdict::Inconclusive
    };
    VerdictReport {
        verdict,
        min_sv,
        tau_low,
        tau_high,
    }
}

#[derive(Serialize, Deserialize)]
struct RunJson {
    t: f64,
    noise_sigma: f64,
    seed: u64,
    probes: Vec<MatrixJson>,
    outputs: Vec<MatrixJson>,
}

impl TomographyRun {
    pub fn to_json(&self) -> Result<String> {
        let doc = RunJson {
            t: self.t,
            noise_sigma: self.noise_sigma,
            seed: self.seed,
            probes: self.probes.states().iter().map(|s| MatrixJson::from_operator(s.mat())).collect(),
            outputs: self.outputs.iter().map(MatrixJson::from_operator).collect(),
        };
        serde_json::to_string_pretty(&doc).map_err(|e| Error::Format(e.to_string()))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: RunJson = serde_json::from_str(text).map_err(|e| Error::Format(e.to_string()))?;
        let states = doc
            .probes
            .iter()
            .map(|m| m.to_density())
            .collect::<Result<Vec<_>>>()?;
        let probes = ProbeSet::new(states)?;
        let outputs = doc.outputs.iter().map(|m| m.to_cmat()).collect::<Result<Vec<_>>>()?;
        if outputs.len() != probes.len() || outputs.iter().any(|o| o.rows() != probes.dim()) {
            return Err(Error::Format("outputs do not match probes".into()));
        }
        Ok(TomographyRun {
            probes,
            t: doc.t,
            outputs,
            noise_sigma: doc.noise_sigma,
            seed: doc.seed,
        })
    }
}
