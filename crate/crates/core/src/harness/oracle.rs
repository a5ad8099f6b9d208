//! Brute-force reference solutions for small problems.
//!
//! These are deliberately independent of the iteration engine: grid search
//! plus local refinement on function values, and plain Picard iteration.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::operators::{check_nonexpansive, Operator};
use crate::vector::{SampleSpec, Tolerances, Vector};

use super::problem::ProblemInstance;

/// Largest dimension the grid oracles accept.
pub const MAX_ORACLE_DIM: usize = 3;

/// Hard cap on Picard iterations in [`fixed_point_oracle`].
pub const PICARD_CAP: usize = 10_000_000;

/// Half-width, in grid steps, of the local grids used during refinement.
const LOCAL_RADIUS: i64 = 12;

/// Axis-aligned grid with `points` nodes per axis, endpoints included.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub lo: Vector,
    pub hi: Vector,
    pub points: usize,
}

impl GridSpec {
    pub fn new(lo: Vector, hi: Vector, points: usize) -> Result<Self> {
        hi.ensure_dim(lo.dim())?;
        if points < 2 || lo.as_slice().iter().zip(hi.as_slice()).any(|(l, h)| l >= h) {
            return Err(Error::Oracle("grid needs lo < hi and at least 2 points per axis".into()));
        }
        Ok(Self { lo, hi, points })
    }

    /// Bounding box of the problem's set data, widened by `margin`.
    pub fn around(problem: &ProblemInstance, margin: f64, points: usize) -> Result<Self> {
        let n = problem.dim();
        let mut lo = vec![f64::INFINITY; n];
        let mut hi = vec![f64::NEG_INFINITY; n];
        for a in problem.anchors() {
            for i in 0..n {
                lo[i] = lo[i].min(a[i]);
                hi[i] = hi[i].max(a[i]);
            }
        }
        let lo = lo.iter().map(|l| l - margin).collect();
        let hi = hi.iter().map(|h| h + margin).collect();
        Self::new(Vector::new(lo)?, Vector::new(hi)?, points)
    }

    pub fn dim(&self) -> usize {
        self.lo.dim()
    }

    fn coord(&self, axis: usize, i: usize) -> f64 {
        let (l, h) = (self.lo[axis], self.hi[axis]);
        l + (h - l) * i as f64 / (self.points - 1) as f64
    }

    fn max_spacing(&self) -> f64 {
        (0..self.dim())
            .map(|a| (self.hi[a] - self.lo[a]) / (self.points - 1) as f64)
            .fold(0.0, f64::max)
    }

    /// All grid nodes in lexicographic order.
    pub fn nodes(&self) -> Vec<Vector> {
        let n = self.dim();
        let total = self.points.pow(n as u32);
        (0..total)
            .map(|mut idx| {
                let mut e = vec![0.0; n];
                for (axis, slot) in e.iter_mut().enumerate() {
                    *slot = self.coord(axis, idx % self.points);
                    idx /= self.points;
                }
                Vector::from_raw(e)
            })
            .collect()
    }
}

fn check_dim(dim: usize) -> Result<()> {
    if dim > MAX_ORACLE_DIM {
        Err(Error::Oracle(format!("grid oracles are limited to dimension <= {MAX_ORACLE_DIM}, got {dim}")))
    } else {
        Ok(())
    }
}

fn check_weights(problem: &ProblemInstance, weights: &[f64]) -> Result<()> {
    let sum: f64 = weights.iter().sum();
    if weights.len() != problem.m() || weights.iter().any(|w| !w.is_finite() || *w <= 0.0) || (sum - 1.0).abs() > 1e-10 {
        return Err(Error::WeightSum { sum });
    }
    Ok(())
}

/// `f(x) = ½ Σ ωᵢ ‖P_{C_i}(x) − x‖²`
pub fn proximity_value(problem: &ProblemInstance, weights: &[f64], x: &Vector) -> Result<f64> {
    check_weights(problem, weights)?;
    problem
        .projectors()
        .iter()
        .zip(weights)
        .try_fold(0.0, |acc, (p, w)| Ok(acc + 0.5 * w * p.residual(x)?.powi(2)))
}

/// Minimizer of the proximity function: grid search, then compass search on
/// function values with step halving down to `conv_tol`.
pub fn proximity_argmin_oracle(
    problem: &ProblemInstance,
    weights: &[f64],
    grid: &GridSpec,
    conv_tol: f64,
) -> Result<Vector> {
    check_dim(problem.dim())?;
    check_weights(problem, weights)?;
    grid.lo.ensure_dim(problem.dim())?;
    let f = |x: &Vector| proximity_value(problem, weights, x).unwrap_or(f64::INFINITY);
    let start = grid
        .nodes()
        .into_iter()
        .map(|x| (f(&x), x))
        .fold(None, |best: Option<(f64, Vector)>, (fx, x)| match best {
            Some((fb, b)) if fb <= fx => Some((fb, b)),
            _ => Some((fx, x)),
        })
        .expect("grid is nonempty")
        .1;
    Ok(compass_refine(f, start, grid.max_spacing(), conv_tol))
}

fn compass_refine(f: impl Fn(&Vector) -> f64, mut x: Vector, mut h: f64, tol: f64) -> Vector {
    let n = x.dim();
    let mut fx = f(&x);
    let mut budget = 1_000_000usize;
    while h >= tol && budget > 0 {
        let mut improved = false;
        for axis in 0..n {
            for sign in [1.0, -1.0] {
                budget = budget.saturating_sub(1);
                let mut e = x.clone().into_inner();
                e[axis] += sign * h;
                let y = Vector::from_raw(e);
                let fy = f(&y);
                if fy < fx {
                    x = y;
                    fx = fy;
                    improved = true;
                }
            }
        }
        if !improved {
            h /= 2.0;
        }
    }
    x
}

/// Minimizes `objective` over `{x : membership(x) ≤ √n·h}` on a global grid,
/// then on local grids around the incumbent with `h` shrinking by 4 until it
/// drops below `tol`.
///
/// `membership` must vanish on the target set and be at most 2-Lipschitz, so
/// the node nearest any target point is always admitted.
pub(crate) fn local_grid_minimize(
    grid: &GridSpec,
    tol: f64,
    objective: impl Fn(&Vector) -> f64,
    membership: impl Fn(&Vector) -> f64,
) -> Result<Vector> {
    let n = grid.dim();
    check_dim(n)?;
    let slack = (n as f64).sqrt();
    let pick = |cands: Vec<Vector>, h: f64| -> Option<Vector> {
        let mut best: Option<(f64, Vector)> = None;
        for x in cands {
            if membership(&x) > slack * h {
                continue;
            }
            let v = objective(&x);
            if best.as_ref().is_none_or(|(bv, _)| v < *bv) {
                best = Some((v, x));
            }
        }
        best.map(|b| b.1)
    };
    let mut h = grid.max_spacing();
    let mut best = pick(grid.nodes(), h).ok_or_else(|| Error::Oracle("grid does not intersect C".into()))?;
    while h > tol {
        h /= 4.0;
        let side = (2 * LOCAL_RADIUS + 1) as usize;
        let local: Vec<Vector> = (0..side.pow(n as u32))
            .map(|mut idx| {
                let mut e = best.clone().into_inner();
                for slot in e.iter_mut() {
                    *slot += ((idx % side) as i64 - LOCAL_RADIUS) as f64 * h;
                    idx /= side;
                }
                Vector::from_raw(e)
            })
            .collect();
        best = pick(local, h).ok_or_else(|| Error::Oracle(format!("refinement lost the target set at step {h:e}")))?;
    }
    Ok(best)
}

/// Plain Picard iteration `x ← T(x)` until `‖T(x) − x‖ ≤ conv_tol/100`.
///
/// Errors if `op` fails a sampled nonexpansiveness check around `x0`, or if
/// the residual is still above `conv_tol/10` after [`PICARD_CAP`] steps.
pub fn fixed_point_oracle(op: &Operator, x0: &Vector, conv_tol: f64) -> Result<Vector> {
    x0.ensure_dim(op.dim())?;
    let spec = SampleSpec::new(0x5eed, 200).with_center(x0.clone());
    let ne = check_nonexpansive(op, &spec, &Tolerances::default())?;
    if !ne.pass {
        return Err(Error::Precondition(format!(
            "operator is not nonexpansive (violation {:e})",
            ne.max_violation
        )));
    }
    let target = conv_tol / 100.0;
    let mut x = x0.clone();
    let mut residual = f64::INFINITY;
    for _ in 0..PICARD_CAP {
        let tx = op.eval(&x);
        residual = tx.distance(&x);
        if residual <= target {
            return Ok(x);
        }
        x = tx;
    }
    if residual <= conv_tol / 10.0 {
        Ok(x)
    } else {
        Err(Error::IterationCap { cap: PICARD_CAP, residual })
    }
}
