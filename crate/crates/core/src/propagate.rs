//! Time-ordered propagation from a time-local generator.
//!
//! The forward propagator is the first-order product of short-time
//! exponentials `exp(L(t_j) dt)`, later times multiplied on the left. The
//! inverse multiplies `exp(-L(t_j) dt)` in the opposite order so that the two
//! cancel factor by factor.

use crate::error::{Error, Result};
use crate::linalg::{det, CMat};
use crate::models::MapFamily;
use crate::superop::{dim_from_superop_size, ProcessMatrix};

/// Uniform partition `t0 = t_0 < t_1 < ... < t_n = t1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeGrid {
    t0: f64,
    t1: f64,
    n: usize,
}

impl TimeGrid {
    pub fn new(t0: f64, t1: f64, n: usize) -> Result<Self> {
        if !(t0.is_finite() && t1.is_finite()) || t1 <= t0 {
            return Err(Error::InvalidParameter(format!(
                "time grid needs t1 > t0, got [{t0}, {t1}]"
            )));
        }
        if n == 0 {
            return Err(Error::InvalidParameter("time grid needs n >= 1 steps".into()));
        }
        Ok(TimeGrid { t0, t1, n })
    }

    pub fn t0(&self) -> f64 {
        self.t0
    }

    pub fn t1(&self) -> f64 {
        self.t1
    }

    /// Number of steps; the grid has `steps() + 1` points.
    pub fn steps(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.n + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn spacing(&self) -> f64 {
        (self.t1 - self.t0) / self.n as f64
    }

    pub fn point(&self, i: usize) -> f64 {
        assert!(i <= self.n);
        if i == self.n {
            self.t1
        } else {
            self.t0 + i as f64 * self.spacing()
        }
    }

    pub fn points(&self) -> Vec<f64> {
        (0..=self.n).map(|i| self.point(i)).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Forward,
    Inverse,
}

/// A propagator assembled on a grid.
#[derive(Debug, Clone)]
pub struct Propagator {
    pub mat: ProcessMatrix,
    pub grid: TimeGrid,
    pub direction: Direction,
}

const TAYLOR_ORDER: u32 = 12;
const SCALE_TARGET: f64 = 0.25;
const OVERFLOW_GUARD: f64 = 1e8;

/// Matrix exponential by scaling and squaring with a degree-12 Taylor
/// polynomial; the argument is halved until its 1-norm is at most 0.25,
/// where the truncation error is below 1e-17.
pub fn expm(m: &CMat) -> Result<CMat> {
    if !m.is_square() {
        return Err(Error::DimensionMismatch("expm needs a square matrix".into()));
    }
    if !m.is_finite() {
        return Err(Error::NonFinite);
    }
    let norm = m.norm1();
    if norm > OVERFLOW_GUARD {
        return Err(Error::Overflow { norm });
    }
    let mut squarings = 0u32;
    let mut scaled_norm = norm;
    while scaled_norm > SCALE_TARGET {
        scaled_norm /= 2.0;
        squarings += 1;
    }
    let x = m.scale_re(0.5f64.powi(squarings as i32));
    let id = CMat::identity(m.rows());

    // Horner: I + X(I + X/2(I + X/3(... (I + X/12))))
    let mut acc = id.clone();
    for k in (1..=TAYLOR_ORDER).rev() {
        acc = &id + &(&x * &acc).scale_re(1.0 / k as f64);
    }
    for _ in 0..squarings {
        acc = &acc * &acc;
    }
    Ok(acc)
}

fn superop_dim(l: &CMat) -> Result<usize> {
    if !l.is_square() {
        return Err(Error::DimensionMismatch("generator must be square".into()));
    }
    dim_from_superop_size(l.rows())
}

/// `prod_{j=n-1..0} exp(L(t_j) dt)`, later factors on the left.
pub fn time_split_forward<F>(generator: F, grid: &TimeGrid) -> Result<Propagator>
where
    F: Fn(f64) -> Result<CMat>,
{
    let dt = grid.spacing();
    let mut acc: Option<CMat> = None;
    for j in 0..grid.steps() {
        let step = expm(&generator(grid.point(j))?.scale_re(dt))?;
        acc = Some(match acc {
            None => step,
            Some(prev) => &step * &prev,
        });
    }
    let mat = acc.expect("grid has at least one step");
    let d = superop_dim(&mat)?;
    Ok(Propagator {
        mat: ProcessMatrix::new(d, mat)?,
        grid: *grid,
        direction: Direction::Forward,
    })
}

/// `prod_{j=0..n-1} exp(-L(t_j) dt)`, the factor-by-factor inverse of
/// [`time_split_forward`].
pub fn time_split_inverse<F>(generator: F, grid: &TimeGrid) -> Result<Propagator>
where
    F: Fn(f64) -> Result<CMat>,
{
    let dt = grid.spacing();
    let mut acc: Option<CMat> = None;
    for j in 0..grid.steps() {
        let step = expm(&generator(grid.point(j))?.scale_re(-dt))?;
        acc = Some(match acc {
            None => step,
            Some(prev) => &prev * &step,
        });
    }
    let mat = acc.expect("grid has at least one step");
    let d = superop_dim(&mat)?;
    Ok(Propagator {
        mat: ProcessMatrix::new(d, mat)?,
        grid: *grid,
        direction: Direction::Inverse,
    })
}

/// Composite Simpson rule on `[a, b]`; an odd step count is bumped by one.
pub fn simpson<F>(f: F, a: f64, b: f64, steps: usize) -> Result<crate::linalg::C64>
where
    F: Fn(f64) -> Result<crate::linalg::C64>,
{
    let n = {
        let n = steps.max(2);
        n + n % 2
    };
    let h = (b - a) / n as f64;
    let mut sum = f(a)? + f(b)?;
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        sum += f(a + i as f64 * h)? * w;
    }
    Ok(sum * (h / 3.0))
}

/// Relative residual of the Abel-Jacobi-Liouville identity
/// `det A(t) = det A(s) exp(int_s^t tr L(u) du)`.
///
/// Only the forward identity is checked: a small residual does not imply
/// that a time-local generator exists.
pub fn ajl_residual<E, G>(eval: E, generator: G, s: f64, t: f64, steps: usize) -> Result<f64>
where
    E: Fn(f64) -> Result<ProcessMatrix>,
    G: Fn(f64) -> Result<CMat>,
{
    if s > t {
        return Err(Error::InvalidParameter(format!("need s <= t, got s = {s}, t = {t}")));
    }
    let det_t = det(eval(t)?.mat())?;
    if det_t.norm() == 0.0 {
        return Err(Error::SingularMap {
            min_sv: 0.0,
            max_sv: f64::NAN,
        });
    }
    if s == t {
        return Ok(0.0);
    }
    let det_s = det(eval(s)?.mat())?;
    let integral = simpson(|u| Ok(generator(u)?.trace()), s, t, steps)?;
    Ok((det_t - det_s * integral.exp()).norm() / det_t.norm())
}

/// [`ajl_residual`] for a family, using its closed-form generator.
pub fn ajl_check(family: &MapFamily, s: f64, t: f64, steps: usize) -> Result<f64> {
    ajl_residual(
        |u| family.eval(u),
        |u| family.analytic_liouvillian(u),
        s,
        t,
        steps,
    )
}
