//! Markovianity witnesses on a time grid.
//!
//! Each scan evaluates one family on a [`TimeGrid`] and produces a
//! [`ScanReport`] with one record per grid point. [`classify`] combines the
//! smoothness probe, the invertibility scan and the sign of the canonical
//! rates into a single [`Region`].

use std::fmt;
use std::io::Write;

use bitflags::bitflags;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lindblad::{lindblad_decompose_with_tol, LindbladForm, DEFAULT_RESIDUAL_TOL};
use crate::linalg::{eigh, CMat, Lu};
use crate::models::MapFamily;
use crate::propagate::TimeGrid;
use crate::superop::{invert, reshuffle, svd_summary, DensityMatrix, ProcessMatrix};

/// Bisection steps used to locate a singular point between grid points.
const BISECTION_STEPS: usize = 80;

/// Difference quotients with both norms below this are treated as zero.
const QUOTIENT_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ToleranceConfig {
    pub eig_tol: f64,
    pub sv_threshold: f64,
    pub fd_step: f64,
    pub generator_norm_cap: f64,
    pub smoothness_mismatch: f64,
}

impl Default for ToleranceConfig {
    fn default() -> Self {
        ToleranceConfig {
            eig_tol: 1e-9,
            sv_threshold: 1e-10,
            fd_step: 1e-4,
            generator_norm_cap: 1e6,
            smoothness_mismatch: 0.1,
        }
    }
}

impl ToleranceConfig {
    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("eig_tol", self.eig_tol),
            ("sv_threshold", self.sv_threshold),
            ("fd_step", self.fd_step),
            ("generator_norm_cap", self.generator_norm_cap),
            ("smoothness_mismatch", self.smoothness_mismatch),
        ];
        for (name, v) in fields {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidParameter(format!("{name} must be finite and > 0, got {v}")));
            }
        }
        Ok(())
    }
}

bitflags! {
    #[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
    pub struct ScanFlags: u16 {
        /// `min_sv <= sv_threshold * max_sv`.
        const NON_INVERTIBLE = 1;
        /// The map itself has a negative dynamical-matrix eigenvalue.
        const NOT_CP = 1 << 1;
        /// Some intermediate map ending at this point is not CP.
        const NOT_CP_DIVISIBLE = 1 << 2;
        /// Pairs skipped because the earlier map was singular.
        const SKIPPED_PAIRS = 1 << 3;
        const NEGATIVE_RATE = 1 << 4;
        /// Forward and backward difference quotients disagree.
        const NON_SMOOTH = 1 << 5;
        const GENERATOR_CAP = 1 << 6;
        /// Trace distance increased since the previous point.
        const BACKFLOW = 1 << 7;
    }
}

impl fmt::Display for ScanFlags {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names: Vec<&str> = self.iter_names().map(|(n, _)| n).collect();
        f.write_str(&names.join("|"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScanKind {
    Invertibility,
    CpDivisibility,
    Rates,
    Blp,
    Smoothness,
}

impl ScanKind {
    pub fn name(&self) -> &'static str {
        match self {
            ScanKind::Invertibility => "invertibility",
            ScanKind::CpDivisibility => "cpdiv",
            ScanKind::Rates => "rates",
            ScanKind::Blp => "blp",
            ScanKind::Smoothness => "smoothness",
        }
    }
}

/// One grid point. Columns a scan does not compute stay `None`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ScanRecord {
    pub t: f64,
    pub min_sv: Option<f64>,
    pub abs_det: Option<f64>,
    pub min_choi_eig: Option<f64>,
    pub min_intermediate_choi_eig: Option<f64>,
    pub min_rate: Option<f64>,
    pub generator_norm: Option<f64>,
    pub trace_distance: Option<f64>,
    /// `D(t_i) - D(t_{i-1})`.
    pub trace_distance_step: Option<f64>,
    /// Relative disagreement of forward and backward difference quotients.
    pub mismatch: Option<f64>,
    pub flags: ScanFlags,
}

impl ScanRecord {
    fn at(t: f64) -> Self {
        ScanRecord {
            t,
            ..Default::default()
        }
    }
}

/// A witness observation, possibly between grid points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Evidence {
    pub t: f64,
    pub witness: String,
    pub value: f64,
}

impl Evidence {
    fn new(t: f64, witness: &str, value: f64) -> Self {
        Evidence {
            t,
            witness: witness.to_string(),
            value,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScanReport {
    pub kind: ScanKind,
    pub grid: TimeGrid,
    pub records: Vec<ScanRecord>,
    /// Findings located between grid points (singularities found by bisection).
    pub events: Vec<Evidence>,
}

pub const CSV_HEADER: [&str; 8] = [
    "t",
    "min_sv",
    "abs_det",
    "min_choi_eig",
    "min_intermediate_choi_eig",
    "min_rate",
    "generator_norm",
    "flags",
];

fn cell(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

impl ScanReport {
    pub fn any(&self, flag: ScanFlags) -> bool {
        self.records.iter().any(|r| r.flags.contains(flag))
    }

    pub fn flagged(&self, flag: ScanFlags) -> impl Iterator<Item = &ScanRecord> {
        self.records.iter().filter(move |r| r.flags.contains(flag))
    }

    /// Minimum of a column over the records that have it.
    pub fn min_of(&self, column: impl Fn(&ScanRecord) -> Option<f64>) -> Option<f64> {
        self.records.iter().filter_map(column).reduce(f64::min)
    }

    fn extra_columns(&self) -> &'static [&'static str] {
        match self.kind {
            ScanKind::Blp => &["trace_distance", "trace_distance_step"],
            ScanKind::Smoothness => &["mismatch"],
            _ => &[],
        }
    }

    /// CSV with the fixed column set, plus `trace_distance,trace_distance_step`
    /// for BLP scans and `mismatch` for smoothness probes.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let mut header: Vec<&str> = CSV_HEADER.to_vec();
        header.extend_from_slice(self.extra_columns());
        w.write_record(&header).map_err(csv_err)?;
        for r in &self.records {
            let mut row = vec![
                r.t.to_string(),
                cell(r.min_sv),
                cell(r.abs_det),
                cell(r.min_choi_eig),
                cell(r.min_intermediate_choi_eig),
                cell(r.min_rate),
                cell(r.generator_norm),
                r.flags.to_string(),
            ];
            match self.kind {
                ScanKind::Blp => {
                    row.push(cell(r.trace_distance));
                    row.push(cell(r.trace_distance_step));
                }
                ScanKind::Smoothness => row.push(cell(r.mismatch)),
                _ => {}
            }
            w.write_record(&row).map_err(csv_err)?;
        }
        w.flush().map_err(|e| Error::Format(e.to_string()))?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> Result<String> {
        let mut buf = Vec::new();
        self.write_csv(&mut buf)?;
        String::from_utf8(buf).map_err(|e| Error::Format(e.to_string()))
    }
}

fn csv_err(e: csv::Error) -> Error {
    Error::Format(e.to_string())
}

fn check_grid(f: &MapFamily, grid: &TimeGrid) -> Result<()> {
    for t in [grid.t0(), grid.t1()] {
        if !f.contains(t) {
            return Err(Error::OutOfDomain {
                t,
                t_min: f.t_min(),
                t_max: f.t_max(),
            });
        }
    }
    Ok(())
}

fn check_inputs(f: &MapFamily, grid: &TimeGrid, tol: &ToleranceConfig) -> Result<()> {
    tol.validate()?;
    check_grid(f, grid)
}

/// Per-point smallest singular value, `|det|` and CP check of `Phi(t)`.
pub fn invertibility_scan(f: &MapFamily, grid: &TimeGrid, tol: &ToleranceConfig) -> Result<ScanReport> {
    check_inputs(f, grid, tol)?;
    let records = grid
        .points()
        .into_par_iter()
        .map(|t| {
            let a = f.eval(t)?;
            let s = svd_summary(a.mat());
            let choi = min_choi_eig(&a)?;
            let mut r = ScanRecord::at(t);
            r.min_sv = Some(s.min_sv);
            r.abs_det = Some(s.det.norm());
            r.min_choi_eig = Some(choi);
            if s.is_singular(tol.sv_threshold) {
                r.flags |= ScanFlags::NON_INVERTIBLE;
            }
            if choi < -tol.eig_tol {
                r.flags |= ScanFlags::NOT_CP;
            }
            Ok(r)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ScanReport {
        kind: ScanKind::Invertibility,
        grid: *grid,
        records,
        events: vec![],
    })
}

fn min_choi_eig(a: &ProcessMatrix) -> Result<f64> {
    let b = reshuffle(a);
    let (vals, _) = eigh(b.mat())?;
    Ok(vals[0])
}

/// Smallest eigenvalue of the dynamical matrix of `Phi(t) Phi(s)^-1`.
pub fn intermediate_min_eig(f: &MapFamily, s: f64, t: f64, tol: &ToleranceConfig) -> Result<f64> {
    let inv = invert(&f.eval(s)?, tol.sv_threshold)?;
    min_choi_eig(&f.eval(t)?.compose(&inv))
}

/// Pairwise test of `Phi(t, s) = Phi(t) Phi(s)^-1` over all grid pairs `s < t`.
///
/// The record at `t_j` carries the minimum over `s = t_0 .. t_{j-1}`. Pairs
/// whose earlier map is singular are skipped and flagged.
pub fn cp_divisibility_scan(f: &MapFamily, grid: &TimeGrid, tol: &ToleranceConfig) -> Result<ScanReport> {
    check_inputs(f, grid, tol)?;
    let points = grid.points();
    let maps = points
        .par_iter()
        .map(|&t| f.eval(t))
        .collect::<Result<Vec<_>>>()?;
    let inverses: Vec<Option<ProcessMatrix>> = maps
        .par_iter()
        .map(|a| invert(a, tol.sv_threshold).ok())
        .collect();
    let records = (0..points.len())
        .into_par_iter()
        .map(|j| {
            let mut r = ScanRecord::at(points[j]);
            r.min_choi_eig = Some(min_choi_eig(&maps[j])?);
            let mut worst: Option<f64> = None;
            for inv in &inverses[..j] {
                match inv {
                    Some(inv) => {
                        let e = min_choi_eig(&maps[j].compose(inv))?;
                        worst = Some(worst.map_or(e, |w| w.min(e)));
                    }
                    None => r.flags |= ScanFlags::SKIPPED_PAIRS,
                }
            }
            r.min_intermediate_choi_eig = worst;
            if worst.is_some_and(|w| w < -tol.eig_tol) {
                r.flags |= ScanFlags::NOT_CP_DIVISIBLE;
            }
            Ok(r)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ScanReport {
        kind: ScanKind::CpDivisibility,
        grid: *grid,
        records,
        events: vec![],
    })
}

impl ScanReport {
    /// Divisibility verdict of a pairwise scan: every computed intermediate
    /// eigenvalue is at least `-eig_tol`.
    pub fn cp_divisible(&self, tol: &ToleranceConfig) -> bool {
        self.min_of(|r| r.min_intermediate_choi_eig)
            .is_none_or(|m| m >= -tol.eig_tol)
    }
}

/// Finite-difference stencil for `dA/dt`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stencil {
    /// `(A(t+h) - A(t-h)) / 2h`.
    Central,
    /// `(-3A(t) + 4A(t+h) - A(t+2h)) / 2h`.
    Forward,
    /// `(3A(t) - 4A(t-h) + A(t-2h)) / 2h`.
    Backward,
}

impl Stencil {
    fn reach(&self) -> (f64, f64) {
        match self {
            Stencil::Central => (1.0, 1.0),
            Stencil::Forward => (0.0, 2.0),
            Stencil::Backward => (2.0, 0.0),
        }
    }
}

fn derivative(f: &MapFamily, t: f64, h: f64, stencil: Stencil) -> Result<CMat> {
    let a = |u: f64| f.eval(u).map(|p| p.into_mat());
    let d = match stencil {
        Stencil::Central => &a(t + h)? - &a(t - h)?,
        Stencil::Forward => &(&a(t + h)?.scale_re(4.0) - &a(t)?.scale_re(3.0)) - &a(t + 2.0 * h)?,
        Stencil::Backward => &(&a(t)?.scale_re(3.0) - &a(t - h)?.scale_re(4.0)) + &a(t - 2.0 * h)?,
    };
    Ok(d.scale_re(0.5 / h))
}

/// `dA/dt * A(t)^-1` with the given stencil and step.
pub fn extract_liouvillian_stencil(
    f: &MapFamily,
    t: f64,
    h: f64,
    stencil: Stencil,
    tol: &ToleranceConfig,
) -> Result<CMat> {
    if !(h.is_finite() && h > 0.0) {
        return Err(Error::InvalidParameter(format!("step must be > 0, got {h}")));
    }
    let (back, fwd) = stencil.reach();
    if !f.contains(t - back * h) || !f.contains(t + fwd * h) {
        return Err(Error::StepTooLarge { t, h });
    }
    let a = f.eval(t)?;
    let s = svd_summary(a.mat());
    if s.is_singular(tol.sv_threshold) {
        return Err(Error::SingularMap {
            min_sv: s.min_sv,
            max_sv: s.max_sv,
        });
    }
    let inv = Lu::new(a.mat())?.inverse()?;
    Ok(&derivative(f, t, h, stencil)? * &inv)
}

/// Central-difference generator `(A(t+h) - A(t-h)) / 2h * A(t)^-1`.
pub fn extract_liouvillian_fd(f: &MapFamily, t: f64, h: f64, tol: &ToleranceConfig) -> Result<CMat> {
    extract_liouvillian_stencil(f, t, h, Stencil::Central, tol)
}

/// Stencil usable at `t` for a Richardson pair with steps `h` and `2h`.
pub fn stencil_for(f: &MapFamily, t: f64, h: f64) -> Stencil {
    if f.contains(t - 2.0 * h) && f.contains(t + 2.0 * h) {
        Stencil::Central
    } else if f.contains(t + 4.0 * h) {
        Stencil::Forward
    } else {
        Stencil::Backward
    }
}

/// Richardson-extrapolated generator `(4 L_h - L_2h) / 3` with `h = fd_step`.
///
/// Cancels the `O(h^2)` term, which otherwise shows up as spurious negative
/// rates of order `h^2 |L|^3` on Markovian families.
pub fn extract_liouvillian_richardson(f: &MapFamily, t: f64, tol: &ToleranceConfig) -> Result<CMat> {
    let h = tol.fd_step;
    let stencil = stencil_for(f, t, h);
    let fine = extract_liouvillian_stencil(f, t, h, stencil, tol)?;
    let coarse = extract_liouvillian_stencil(f, t, 2.0 * h, stencil, tol)?;
    Ok((&fine.scale_re(4.0) - &coarse).scale_re(1.0 / 3.0))
}

/// Numerically extracted generator with its canonical form.
#[derive(Debug, Clone)]
pub struct GeneratorEstimate {
    pub liouvillian: CMat,
    pub form: LindbladForm,
    /// Roundoff scale of the entries, `16 eps cond(A) max|A| / h`.
    pub noise: f64,
}

/// Canonical form of the Richardson generator at `t`.
///
/// Roundoff in the difference quotient is amplified by the condition number
/// of `A(t)`, so the decomposition residual is checked against the larger of
/// the default tolerance and the estimated relative noise.
pub fn generator_form(f: &MapFamily, t: f64, tol: &ToleranceConfig) -> Result<GeneratorEstimate> {
    let l = extract_liouvillian_richardson(f, t, tol)?;
    let a = f.eval(t)?;
    let s = svd_summary(a.mat());
    let noise = 16.0 * f64::EPSILON * s.cond() * a.mat().max_abs() / tol.fd_step;
    let rel_noise = noise / l.max_abs().max(f64::MIN_POSITIVE);
    let form = lindblad_decompose_with_tol(&l, f.dim(), DEFAULT_RESIDUAL_TOL.max(10.0 * rel_noise))?;
    Ok(GeneratorEstimate {
        liouvillian: l,
        form,
        noise,
    })
}

/// `true` when every rate is at least `-(eig_tol * max(1, max|rate|) + floor)`.
pub fn rates_nonnegative(rates: &[f64], eig_tol: f64, floor: f64) -> bool {
    let scale = rates.iter().map(|r| r.abs()).fold(1.0, f64::max);
    rates.iter().all(|&r| r >= -(eig_tol * scale + floor))
}

/// Smallest canonical rate and generator norm at every grid point.
///
/// A rate counts as negative only beyond the tolerance plus the roundoff
/// floor of the extraction.
pub fn rate_scan(f: &MapFamily, grid: &TimeGrid, tol: &ToleranceConfig) -> Result<ScanReport> {
    check_inputs(f, grid, tol)?;
    let records = grid
        .points()
        .into_par_iter()
        .map(|t| {
            let est = generator_form(f, t, tol)?;
            let mut r = ScanRecord::at(t);
            r.min_rate = Some(est.form.min_rate());
            r.generator_norm = Some(est.liouvillian.max_abs());
            if !rates_nonnegative(&est.form.rates, tol.eig_tol, est.noise) {
                r.flags |= ScanFlags::NEGATIVE_RATE;
            }
            Ok(r)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ScanReport {
        kind: ScanKind::Rates,
        grid: *grid,
        records,
        events: vec![],
    })
}

/// `|0><0|` and `|1><1|`.
pub fn default_blp_pair() -> (DensityMatrix, DensityMatrix) {
    (DensityMatrix::basis(2, 0), DensityMatrix::basis(2, 1))
}

/// `D = (1/2) sum |eig(rho1 - rho2)|` for Hermitian inputs.
pub fn trace_distance(rho1: &CMat, rho2: &CMat) -> Result<f64> {
    let diff = (rho1 - rho2).hermitian_part();
    let (vals, _) = eigh(&diff)?;
    Ok(0.5 * vals.iter().map(|v| v.abs()).sum::<f64>())
}

/// Trace distance between the evolved pair and its discrete increments.
pub fn blp_scan(
    f: &MapFamily,
    grid: &TimeGrid,
    pair: (&DensityMatrix, &DensityMatrix),
    tol: &ToleranceConfig,
) -> Result<ScanReport> {
    check_inputs(f, grid, tol)?;
    if pair.0.dim() != f.dim() || pair.1.dim() != f.dim() {
        return Err(Error::DimensionMismatch(format!(
            "state pair must have dimension {}",
            f.dim()
        )));
    }
    let distances = grid
        .points()
        .into_par_iter()
        .map(|t| {
            let a = f.eval(t)?;
            trace_distance(&a.apply(pair.0.mat()), &a.apply(pair.1.mat()))
        })
        .collect::<Result<Vec<_>>>()?;
    let records = grid
        .points()
        .into_iter()
        .enumerate()
        .map(|(i, t)| {
            let mut r = ScanRecord::at(t);
            r.trace_distance = Some(distances[i]);
            if i > 0 {
                let step = distances[i] - distances[i - 1];
                r.trace_distance_step = Some(step);
                if step > tol.eig_tol {
                    r.flags |= ScanFlags::BACKFLOW;
                }
            }
            r
        })
        .collect();
    Ok(ScanReport {
        kind: ScanKind::Blp,
        grid: *grid,
        records,
        events: vec![],
    })
}

impl ScanReport {
    pub fn backflow(&self) -> bool {
        self.any(ScanFlags::BACKFLOW)
    }
}

/// Relative max-norm disagreement between one-sided difference quotients.
fn quotient_mismatch(f: &MapFamily, t: f64, h: f64) -> Result<Option<f64>> {
    if !f.contains(t - h) || !f.contains(t + h) {
        return Ok(None);
    }
    let a0 = f.eval(t)?.into_mat();
    let fwd = (&f.eval(t + h)?.into_mat() - &a0).scale_re(1.0 / h);
    let bwd = (&a0 - &f.eval(t - h)?.into_mat()).scale_re(1.0 / h);
    let scale = fwd.max_abs().max(bwd.max_abs());
    if scale < QUOTIENT_FLOOR {
        return Ok(None);
    }
    Ok(Some(fwd.max_diff(&bwd) / scale))
}

/// Max-norm of the central-difference generator, or `None` where the map is
/// singular or the stencil leaves the domain.
fn generator_norm(f: &MapFamily, t: f64, tol: &ToleranceConfig) -> Result<Option<f64>> {
    let h = tol.fd_step;
    let stencil = if f.contains(t - h) && f.contains(t + h) {
        Stencil::Central
    } else if f.contains(t + 2.0 * h) {
        Stencil::Forward
    } else {
        Stencil::Backward
    };
    match extract_liouvillian_stencil(f, t, h, stencil, tol) {
        Ok(l) => Ok(Some(l.max_abs())),
        Err(Error::SingularMap { .. } | Error::StepTooLarge { .. }) => Ok(None),
        Err(e) => Err(e),
    }
}

struct PointState {
    singular: bool,
    det_re: f64,
}

fn point_state(f: &MapFamily, t: f64, tol: &ToleranceConfig) -> Result<PointState> {
    let s = svd_summary(f.eval(t)?.mat());
    Ok(PointState {
        singular: s.is_singular(tol.sv_threshold),
        // Hermiticity-preserving maps have real determinants
        det_re: s.det.re,
    })
}

/// Flags points where the family fails to be smoothly generated.
///
/// At each grid point the forward and backward difference quotients are
/// compared, and the central-difference generator norm is checked against
/// the cap. Between neighbouring points where the determinant changes sign or
/// the map switches between invertible and singular, the transition is
/// located by bisection and probed there; if either test fires, both
/// neighbouring points are flagged and the location is recorded as an event.
pub fn smoothness_probe(f: &MapFamily, grid: &TimeGrid, tol: &ToleranceConfig) -> Result<ScanReport> {
    check_inputs(f, grid, tol)?;
    let h = tol.fd_step;
    let points = grid.points();
    let mut records = points
        .par_iter()
        .map(|&t| {
            let mut r = ScanRecord::at(t);
            let s = svd_summary(f.eval(t)?.mat());
            r.min_sv = Some(s.min_sv);
            r.abs_det = Some(s.det.norm());
            r.mismatch = quotient_mismatch(f, t, h)?;
            r.generator_norm = generator_norm(f, t, tol)?;
            if r.mismatch.is_some_and(|m| m > tol.smoothness_mismatch) {
                r.flags |= ScanFlags::NON_SMOOTH;
            }
            if r.generator_norm.is_some_and(|n| n > tol.generator_norm_cap) {
                r.flags |= ScanFlags::GENERATOR_CAP;
            }
            Ok(r)
        })
        .collect::<Result<Vec<_>>>()?;

    let states = points
        .par_iter()
        .map(|&t| point_state(f, t, tol))
        .collect::<Result<Vec<_>>>()?;
    let mut events = Vec::new();
    for i in 0..points.len().saturating_sub(1) {
        let (p, q) = (&states[i], &states[i + 1]);
        let sign_change = !p.singular && !q.singular && (p.det_re > 0.0) != (q.det_re > 0.0);
        if !sign_change && p.singular == q.singular {
            continue;
        }
        let t_s = locate_transition(f, points[i], points[i + 1], sign_change, tol)?;
        let mut flags = ScanFlags::empty();
        if let Some(m) = quotient_mismatch(f, t_s, h)? {
            if m > tol.smoothness_mismatch {
                flags |= ScanFlags::NON_SMOOTH;
                events.push(Evidence::new(t_s, "non_smooth", m));
            }
        }
        let delta = 1e-8 * t_s.abs().max(1.0);
        let norm = [t_s - delta, t_s + delta]
            .into_iter()
            .filter(|&u| f.contains(u))
            .map(|u| generator_norm(f, u, tol))
            .collect::<Result<Vec<_>>>()?
            .into_iter()
            .flatten()
            .reduce(f64::max);
        if let Some(n) = norm {
            if n > tol.generator_norm_cap {
                flags |= ScanFlags::GENERATOR_CAP;
                events.push(Evidence::new(t_s, "generator_cap", n));
            }
        }
        records[i].flags |= flags;
        records[i + 1].flags |= flags;
    }
    Ok(ScanReport {
        kind: ScanKind::Smoothness,
        grid: *grid,
        records,
        events,
    })
}

/// Bisection for a determinant sign change or an invertible/singular switch.
fn locate_transition(f: &MapFamily, mut lo: f64, mut hi: f64, sign_change: bool, tol: &ToleranceConfig) -> Result<f64> {
    let key = |t: f64| -> Result<bool> {
        let s = point_state(f, t, tol)?;
        Ok(if sign_change { s.det_re > 0.0 } else { s.singular })
    };
    let k_lo = key(lo)?;
    for _ in 0..BISECTION_STEPS {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if key(mid)? == k_lo {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Region {
    MarkovRHP,
    NonMarkovInvertible,
    NonInvertible,
    NonCClass,
}

impl fmt::Display for Region {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Region::MarkovRHP => "MarkovRHP",
            Region::NonMarkovInvertible => "NonMarkovInvertible",
            Region::NonInvertible => "NonInvertible",
            Region::NonCClass => "NonCClass",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Classification {
    pub region: Region,
    pub evidence: Vec<Evidence>,
}

fn smoothness_evidence(report: &ScanReport) -> Vec<Evidence> {
    let mut ev = Vec::new();
    for r in &report.records {
        if r.flags.contains(ScanFlags::NON_SMOOTH) {
            ev.push(Evidence::new(r.t, "non_smooth", r.mismatch.unwrap_or(f64::NAN)));
        }
        if r.flags.contains(ScanFlags::GENERATOR_CAP) {
            ev.push(Evidence::new(r.t, "generator_cap", r.generator_norm.unwrap_or(f64::NAN)));
        }
    }
    ev.extend(report.events.iter().cloned());
    ev
}

fn invertibility_evidence(report: &ScanReport) -> Vec<Evidence> {
    report
        .flagged(ScanFlags::NON_INVERTIBLE)
        .map(|r| Evidence::new(r.t, "non_invertible", r.min_sv.unwrap_or(f64::NAN)))
        .collect()
}

fn fires(report: &ScanReport) -> bool {
    report.records.iter().any(|r| r.flags.intersects(ScanFlags::NON_SMOOTH | ScanFlags::GENERATOR_CAP)) || !report.events.is_empty()
}

/// Region from already computed scans, in precedence order
/// non-C, non-invertible, negative rate.
///
/// `rates` is only consulted when the first two tests are silent.
pub fn decide(smoothness: &ScanReport, invertibility: &ScanReport, rates: Option<&ScanReport>) -> Result<Classification> {
    if fires(smoothness) {
        let mut evidence = smoothness_evidence(smoothness);
        evidence.extend(invertibility_evidence(invertibility));
        return Ok(Classification {
            region: Region::NonCClass,
            evidence,
        });
    }
    if invertibility.any(ScanFlags::NON_INVERTIBLE) {
        return Ok(Classification {
            region: Region::NonInvertible,
            evidence: invertibility_evidence(invertibility),
        });
    }
    let rates = rates.ok_or_else(|| Error::InvalidParameter("rate scan required to decide".into()))?;
    let negative: Vec<Evidence> = rates
        .flagged(ScanFlags::NEGATIVE_RATE)
        .map(|r| Evidence::new(r.t, "negative_rate", r.min_rate.unwrap_or(f64::NAN)))
        .collect();
    if negative.is_empty() {
        let worst = rates
            .records
            .iter()
            .filter(|r| r.min_rate.is_some())
            .min_by(|a, b| a.min_rate.unwrap().total_cmp(&b.min_rate.unwrap()));
        Ok(Classification {
            region: Region::MarkovRHP,
            evidence: worst
                .map(|r| Evidence::new(r.t, "min_rate", r.min_rate.unwrap()))
                .into_iter()
                .collect(),
        })
    } else {
        Ok(Classification {
            region: Region::NonMarkovInvertible,
            evidence: negative,
        })
    }
}

/// Places the family in one of the four regions.
pub fn classify(f: &MapFamily, grid: &TimeGrid, tol: &ToleranceConfig) -> Result<Classification> {
    let smooth = smoothness_probe(f, grid, tol)?;
    let inv = invertibility_scan(f, grid, tol)?;
    if fires(&smooth) || inv.any(ScanFlags::NON_INVERTIBLE) {
        return decide(&smooth, &inv, None);
    }
    let rates = rate_scan(f, grid, tol)?;
    decide(&smooth, &inv, Some(&rates))
}

impl Classification {
    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::Format(e.to_string()))
    }
}
