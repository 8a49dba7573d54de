//! Time-parametrized qubit map families with closed-form process matrices.
//!
//! Every family starts at the identity map at `t = 0` and is defined on a
//! domain `[0, t_max]`, by default `[0, 10 / rate]` where `rate` is the
//! family's characteristic inverse time scale. Where the generator is known
//! in closed form, [`MapFamily::analytic_liouvillian`] builds it; this is the
//! independent route against which finite-difference extraction is checked.
//!
//! Units: `hbar = 1`, Hamiltonians in angular frequency.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::lindblad::gksl_superop;
use crate::linalg::{CMat, Lu, C64, ZERO};
use crate::propagate::expm;
use crate::superop::{pauli, reshuffle_mat, ProcessMatrix};

/// Slack allowed on domain boundaries for rounding in grid construction.
const DOMAIN_SLACK: f64 = 1e-12;

/// Denominators at or below this magnitude count as zeros of the generator.
const SINGULAR_DENOMINATOR: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AmplitudeDampingParams {
    pub gamma: f64,
}

/// Convex mixture `a Phi_z + (1 - a) Phi_y` of Pauli dephasing channels with
/// `p(t) = (1 - exp(-r t)) / 2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MixedPauliParams {
    pub r: f64,
    pub a: f64,
}

impl MixedPauliParams {
    pub fn p(&self, t: f64) -> f64 {
        (1.0 - (-self.r * t).exp()) / 2.0
    }

    pub fn p_dot(&self, t: f64) -> f64 {
        self.r * (-self.r * t).exp() / 2.0
    }

    /// `A(t) = I + p(t) M`.
    fn slope(&self) -> CMat {
        let a = self.a;
        CMat::from_real_rows(&[
            &[-(1.0 - a), 0.0, 0.0, 1.0 - a],
            &[0.0, -(1.0 + a), a - 1.0, 0.0],
            &[0.0, a - 1.0, -(1.0 + a), 0.0],
            &[1.0 - a, 0.0, 0.0, -(1.0 - a)],
        ])
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DephasingPreset {
    /// `x0 = x1 = (1 + e^-t)/2`, `gamma = e^-t`.
    Invertible,
    /// `x0 = x1 = (1 + e^-t cos t)/2`, `gamma = e^-t`; singular at `t = pi/2`.
    SingularCrossing,
}

/// Generalized dephasing map
/// `rho00 -> x0 rho00 + (1 - x1) rho11`, `rho01 -> gamma rho01`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DephasingParams {
    pub preset: DephasingPreset,
}

/// Closed-form coefficients of the dephasing generator:
/// `-i (Omega/2)[Z', rho] + a0 D[|0><1|] + a1 D[|1><0|] + (Gamma/2) D[Z]`
/// with `Z' = diag(-1, 1)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DephasingRates {
    pub gamma: f64,
    pub omega: f64,
    pub a0: f64,
    pub a1: f64,
}

impl DephasingParams {
    /// `(x0, x1, gamma, dx0/dt, dx1/dt, dgamma/dt)`.
    pub fn functions(&self, t: f64) -> (f64, f64, C64, f64, f64, C64) {
        let e = (-t).exp();
        match self.preset {
            DephasingPreset::Invertible => {
                let x = (1.0 + e) / 2.0;
                let dx = -e / 2.0;
                (x, x, C64::new(e, 0.0), dx, dx, C64::new(-e, 0.0))
            }
            DephasingPreset::SingularCrossing => {
                let x = (1.0 + e * t.cos()) / 2.0;
                let dx = -e * (t.cos() + t.sin()) / 2.0;
                (x, x, C64::new(e, 0.0), dx, dx, C64::new(-e, 0.0))
            }
        }
    }

    pub fn rates(&self, t: f64) -> Result<DephasingRates> {
        let (x0, x1, g, dx0, dx1, dg) = self.functions(t);
        let den = 1.0 - x0 - x1;
        if den.abs() <= SINGULAR_DENOMINATOR {
            return Err(Error::SingularGenerator {
                t,
                reason: format!("1 - x0 - x1 = {den:.3e}"),
            });
        }
        if g.norm() <= SINGULAR_DENOMINATOR {
            return Err(Error::SingularGenerator {
                t,
                reason: "coherence factor vanishes".into(),
            });
        }
        let a0 = (dx0 * (1.0 - x1) + dx1 * x0) / den;
        let a1 = (dx1 * (1.0 - x0) + dx0 * x1) / den;
        let log_dg = dg / g;
        Ok(DephasingRates {
            gamma: -(a0 + a1) / 2.0 - log_dg.re,
            omega: log_dg.im,
            a0,
            a1,
        })
    }

    /// Times in `[0, t_max]` where the process matrix is singular.
    pub fn singular_times(&self, t_max: f64) -> Vec<f64> {
        match self.preset {
            DephasingPreset::Invertible => vec![],
            DephasingPreset::SingularCrossing => (0..)
                .map(|k| PI / 2.0 + k as f64 * PI)
                .take_while(|&t| t <= t_max)
                .collect(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DecayGPreset {
    /// `G(t) = exp(-lambda t / 2)`.
    Exponential { lambda: f64 },
    /// `G(t) = max(0, 1 - t / t_star)`.
    LinearCutoff { t_star: f64 },
}

/// Two-level decay `rho00 -> |G|^2 rho00`, `rho01 -> G rho01`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecayGParams {
    pub preset: DecayGPreset,
}

impl DecayGParams {
    pub fn g(&self, t: f64) -> C64 {
        match self.preset {
            DecayGPreset::Exponential { lambda } => C64::new((-lambda * t / 2.0).exp(), 0.0),
            DecayGPreset::LinearCutoff { t_star } => C64::new((1.0 - t / t_star).max(0.0), 0.0),
        }
    }

    pub fn g_dot(&self, t: f64) -> C64 {
        match self.preset {
            DecayGPreset::Exponential { lambda } => self.g(t) * (-lambda / 2.0),
            DecayGPreset::LinearCutoff { t_star } => {
                if t < t_star {
                    C64::new(-1.0 / t_star, 0.0)
                } else {
                    ZERO
                }
            }
        }
    }

    /// `(s(t), gamma(t)) = (-2 Im(G'/G), -2 Re(G'/G))`.
    pub fn rates(&self, t: f64) -> Result<(f64, f64)> {
        let g = self.g(t);
        if g.norm() <= SINGULAR_DENOMINATOR {
            return Err(Error::SingularGenerator {
                t,
                reason: "G(t) = 0".into(),
            });
        }
        let ratio = self.g_dot(t) / g;
        Ok((-2.0 * ratio.im, -2.0 * ratio.re))
    }
}

/// Dynamical semigroup `exp(L t)` with a constant generator.
#[derive(Debug, Clone, PartialEq)]
pub struct SemigroupParams {
    dim: usize,
    generator: CMat,
}

impl SemigroupParams {
    /// Accepts a generator whose reshuffle is Hermitian and whose diagonal
    /// blocks sum to zero, both within `1e-10 * max(1, max|L|)`.
    pub fn new(generator: CMat) -> Result<Self> {
        if !generator.is_square() {
            return Err(Error::DimensionMismatch("generator must be square".into()));
        }
        let dim = crate::superop::dim_from_superop_size(generator.rows())?;
        let b = reshuffle_mat(&generator, dim);
        let tol = 1e-10 * generator.max_abs().max(1.0);
        let asym = b.max_asymmetry();
        if asym > tol {
            return Err(Error::InvalidParameter(format!(
                "generator is not Hermiticity preserving (asymmetry {asym:.3e})"
            )));
        }
        let defect = crate::superop::block_trace_defect(&b, dim, 0.0);
        if defect > tol {
            return Err(Error::InvalidParameter(format!(
                "generator is not trace annihilating (defect {defect:.3e})"
            )));
        }
        Ok(SemigroupParams { dim, generator })
    }

    pub fn generator(&self) -> &CMat {
        &self.generator
    }

    pub fn dim(&self) -> usize {
        self.dim
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Model {
    Identity { dim: usize },
    AmplitudeDamping(AmplitudeDampingParams),
    MixedPauli(MixedPauliParams),
    Dephasing(DephasingParams),
    DecayG(DecayGParams),
    Semigroup(SemigroupParams),
}

impl Model {
    pub fn name(&self) -> &'static str {
        match self {
            Model::Identity { .. } => "identity",
            Model::AmplitudeDamping(_) => "amplitude-damping",
            Model::MixedPauli(_) => "mixed-pauli",
            Model::Dephasing(_) => "dephasing",
            Model::DecayG(_) => "decay-g",
            Model::Semigroup(_) => "semigroup",
        }
    }

    fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(Error::InvalidParameter(format!("{name} must be finite and > 0, got {v}")))
            }
        };
        match self {
            Model::Identity { dim } => {
                if *dim == 0 || *dim > 8 {
                    return Err(Error::UnsupportedDimension(*dim));
                }
                Ok(())
            }
            Model::AmplitudeDamping(p) => positive("gamma", p.gamma),
            Model::MixedPauli(p) => {
                positive("r", p.r)?;
                if !(p.a > 0.0 && p.a < 1.0) {
                    return Err(Error::InvalidParameter(format!("a must lie in (0, 1), got {}", p.a)));
                }
                Ok(())
            }
            Model::Dephasing(_) => Ok(()),
            Model::DecayG(p) => match p.preset {
                DecayGPreset::Exponential { lambda } => positive("lambda", lambda),
                DecayGPreset::LinearCutoff { t_star } => positive("t_star", t_star),
            },
            Model::Semigroup(p) => {
                if p.dim > 8 {
                    return Err(Error::UnsupportedDimension(p.dim));
                }
                Ok(())
            }
        }
    }

    /// Characteristic inverse time scale used for the default domain.
    pub fn rate(&self) -> f64 {
        match self {
            Model::Identity { .. } => 1.0,
            Model::AmplitudeDamping(p) => p.gamma,
            Model::MixedPauli(p) => p.r,
            Model::Dephasing(_) => 1.0,
            Model::DecayG(p) => match p.preset {
                DecayGPreset::Exponential { lambda } => lambda,
                DecayGPreset::LinearCutoff { t_star } => 1.0 / t_star,
            },
            Model::Semigroup(p) => {
                let n = p.generator.norm1();
                if n > 0.0 {
                    n
                } else {
                    1.0
                }
            }
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            Model::Identity { dim } => *dim,
            Model::Semigroup(p) => p.dim,
            _ => 2,
        }
    }
}

/// A named map family `t -> Phi(t, 0)` on `[0, t_max]`.
#[derive(Debug, Clone, PartialEq)]
pub struct MapFamily {
    model: Model,
    t_max: f64,
}

impl MapFamily {
    pub fn new(model: Model) -> Result<Self> {
        model.validate()?;
        let t_max = 10.0 / model.rate();
        Ok(MapFamily { model, t_max })
    }

    pub fn with_t_max(mut self, t_max: f64) -> Result<Self> {
        if !(t_max.is_finite() && t_max > 0.0) {
            return Err(Error::InvalidParameter(format!("t_max must be > 0, got {t_max}")));
        }
        self.t_max = t_max;
        Ok(self)
    }

    pub fn identity(dim: usize) -> Result<Self> {
        Self::new(Model::Identity { dim })
    }

    pub fn amplitude_damping(gamma: f64) -> Result<Self> {
        Self::new(Model::AmplitudeDamping(AmplitudeDampingParams { gamma }))
    }

    pub fn mixed_pauli(a: f64, r: f64) -> Result<Self> {
        Self::new(Model::MixedPauli(MixedPauliParams { r, a }))
    }

    pub fn dephasing(preset: DephasingPreset) -> Result<Self> {
        Self::new(Model::Dephasing(DephasingParams { preset }))
    }

    pub fn decay_exponential(lambda: f64) -> Result<Self> {
        Self::new(Model::DecayG(DecayGParams {
            preset: DecayGPreset::Exponential { lambda },
        }))
    }

    pub fn decay_linear_cutoff(t_star: f64) -> Result<Self> {
        Self::new(Model::DecayG(DecayGParams {
            preset: DecayGPreset::LinearCutoff { t_star },
        }))
    }

    pub fn semigroup(generator: CMat) -> Result<Self> {
        Self::new(Model::Semigroup(SemigroupParams::new(generator)?))
    }

    pub fn model(&self) -> &Model {
        &self.model
    }

    pub fn name(&self) -> &'static str {
        self.model.name()
    }

    pub fn dim(&self) -> usize {
        self.model.dim()
    }

    pub fn t_min(&self) -> f64 {
        0.0
    }

    pub fn t_max(&self) -> f64 {
        self.t_max
    }

    /// Whether the closed form is differentiable in `t` everywhere.
    pub fn declared_smooth(&self) -> bool {
        !matches!(
            self.model,
            Model::DecayG(DecayGParams {
                preset: DecayGPreset::LinearCutoff { .. }
            })
        )
    }

    pub fn contains(&self, t: f64) -> bool {
        let slack = DOMAIN_SLACK * self.t_max.max(1.0);
        t >= self.t_min() - slack && t <= self.t_max + slack
    }

    fn check_domain(&self, t: f64) -> Result<()> {
        if !self.contains(t) {
            return Err(Error::OutOfDomain {
                t,
                t_min: self.t_min(),
                t_max: self.t_max,
            });
        }
        Ok(())
    }

    /// Process matrix `Phi(t, 0)`.
    pub fn eval(&self, t: f64) -> Result<ProcessMatrix> {
        self.check_domain(t)?;
        let r = |x: f64| C64::new(x, 0.0);
        let mat = match &self.model {
            Model::Identity { dim } => CMat::identity(dim * dim),
            Model::AmplitudeDamping(p) => {
                let e1 = (-p.gamma * t).exp();
                let e2 = (-2.0 * p.gamma * t).exp();
                CMat::from_real_rows(&[
                    &[1.0, 0.0, 0.0, 1.0 - e2],
                    &[0.0, e1, 0.0, 0.0],
                    &[0.0, 0.0, e1, 0.0],
                    &[0.0, 0.0, 0.0, e2],
                ])
            }
            Model::MixedPauli(p) => {
                let pt = p.p(t);
                let a = p.a;
                CMat::from_real_rows(&[
                    &[1.0 - (1.0 - a) * pt, 0.0, 0.0, (1.0 - a) * pt],
                    &[0.0, 1.0 - (1.0 + a) * pt, (a - 1.0) * pt, 0.0],
                    &[0.0, (a - 1.0) * pt, 1.0 - (1.0 + a) * pt, 0.0],
                    &[(1.0 - a) * pt, 0.0, 0.0, 1.0 - (1.0 - a) * pt],
                ])
            }
            Model::Dephasing(p) => {
                let (x0, x1, g, ..) = p.functions(t);
                let mut m = CMat::zeros(4, 4);
                m[(0, 0)] = r(x0);
                m[(0, 3)] = r(1.0 - x1);
                m[(1, 1)] = g;
                m[(2, 2)] = g.conj();
                m[(3, 0)] = r(1.0 - x0);
                m[(3, 3)] = r(x1);
                m
            }
            Model::DecayG(p) => {
                let g = p.g(t);
                let g2 = g.norm_sqr();
                let mut m = CMat::zeros(4, 4);
                m[(0, 0)] = r(g2);
                m[(1, 1)] = g;
                m[(2, 2)] = g.conj();
                m[(3, 0)] = r(1.0 - g2);
                m[(3, 3)] = r(1.0);
                m
            }
            Model::Semigroup(p) => expm(&p.generator.scale_re(t))?,
        };
        ProcessMatrix::new(self.dim(), mat)
    }

    /// Closed-form time-local generator at `t`.
    ///
    /// Fails with [`Error::SingularGenerator`] where the generator diverges.
    pub fn analytic_liouvillian(&self, t: f64) -> Result<CMat> {
        self.check_domain(t)?;
        match &self.model {
            Model::Identity { dim } => Ok(CMat::zeros(dim * dim, dim * dim)),
            Model::AmplitudeDamping(p) => Ok(gksl_superop(
                &CMat::zeros(2, 2),
                &[(2.0 * p.gamma, pauli::ket_bra(2, 0, 1))],
            )),
            Model::MixedPauli(p) => {
                // L = p' M (I + p M)^-1
                let slope = p.slope();
                let a = &CMat::identity(4) + &slope.scale_re(p.p(t));
                let inv = Lu::new(&a)?.inverse()?;
                Ok((&slope * &inv).scale_re(p.p_dot(t)))
            }
            Model::Dephasing(p) => {
                let rates = p.rates(t)?;
                let z_prime = CMat::from_real_rows(&[&[-1.0, 0.0], &[0.0, 1.0]]);
                Ok(gksl_superop(
                    &z_prime.scale_re(rates.omega / 2.0),
                    &[
                        (rates.a0, pauli::ket_bra(2, 0, 1)),
                        (rates.a1, pauli::ket_bra(2, 1, 0)),
                        (rates.gamma / 2.0, pauli::z()),
                    ],
                ))
            }
            Model::DecayG(p) => {
                let (s, gamma) = p.rates(t)?;
                Ok(gksl_superop(
                    &pauli::ket_bra(2, 0, 0).scale_re(s / 2.0),
                    &[(gamma, pauli::ket_bra(2, 1, 0))],
                ))
            }
            Model::Semigroup(p) => Ok(p.generator.clone()),
        }
    }
}
