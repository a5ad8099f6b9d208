//! Convex feasibility problem instances built from closed-form sets.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::operators::Operator;
use crate::strings::{averaged_operator, StringPlan};
use crate::vector::Vector;

use super::oracle::{fixed_point_oracle, proximity_argmin_oracle, GridSpec};

/// A closed convex set with a closed-form projection.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SetDescriptor {
    Halfspace { a: Vector, b: f64 },
    Hyperplane { a: Vector, b: f64 },
    Ball { center: Vector, radius: f64 },
    Box { lo: Vector, hi: Vector },
}

impl SetDescriptor {
    pub fn projector(&self) -> Result<Operator> {
        match self {
            SetDescriptor::Halfspace { a, b } => Operator::halfspace(a.clone(), *b),
            SetDescriptor::Hyperplane { a, b } => Operator::hyperplane(a.clone(), *b),
            SetDescriptor::Ball { center, radius } => Operator::ball(center.clone(), *radius),
            SetDescriptor::Box { lo, hi } => Operator::box_proj(lo.clone(), hi.clone()),
        }
    }

    /// Representative points used to size sampling and grid boxes.
    pub(crate) fn anchors(&self) -> Vec<Vector> {
        match self {
            SetDescriptor::Halfspace { a, b } | SetDescriptor::Hyperplane { a, b } => {
                vec![(b / a.norm_squared()) * a]
            }
            SetDescriptor::Ball { center, radius } => {
                let r = Vector::from_raw(vec![*radius; center.dim()]);
                vec![center - &r, center + &r]
            }
            SetDescriptor::Box { lo, hi } => vec![lo.clone(), hi.clone()],
        }
    }
}

/// A finite family of closed convex sets in `ℝⁿ`.
#[derive(Clone, Debug)]
pub struct ProblemInstance {
    pub name: String,
    sets: Vec<SetDescriptor>,
    projectors: Vec<Operator>,
    /// Whether the sets intersect, once decided by an oracle.
    pub consistent: Option<bool>,
    /// Certified fixed points of the simultaneous averaged operator.
    pub known_c_points: Vec<Vector>,
}

/// Nonnegative measure vanishing exactly on a target set.
pub type Membership<'a> = Box<dyn Fn(&Vector) -> f64 + 'a>;

/// Residual level below which a proximity minimizer counts as feasible.
const CONSISTENCY_TOL: f64 = 1e-6;

impl ProblemInstance {
    pub fn new(name: impl Into<String>, sets: Vec<SetDescriptor>) -> Result<Self> {
        let projectors = sets.iter().map(SetDescriptor::projector).collect::<Result<Vec<_>>>()?;
        let dim = projectors
            .first()
            .ok_or_else(|| Error::Config("a problem needs at least one set".into()))?
            .dim();
        if let Some(p) = projectors.iter().find(|p| p.dim() != dim) {
            return Err(Error::DimensionMismatch { expected: dim, found: p.dim() });
        }
        Ok(Self { name: name.into(), sets, projectors, consistent: None, known_c_points: Vec::new() })
    }

    pub fn dim(&self) -> usize {
        self.projectors[0].dim()
    }

    pub fn m(&self) -> usize {
        self.sets.len()
    }

    pub fn sets(&self) -> &[SetDescriptor] {
        &self.sets
    }

    /// Metric projections `P_{C_i}`.
    pub fn projectors(&self) -> &[Operator] {
        &self.projectors
    }

    pub fn equal_weights(&self) -> Vec<f64> {
        vec![1.0 / self.m() as f64; self.m()]
    }

    /// `Σ ωᵢ P_{C_i}`
    pub fn simultaneous_operator(&self, weights: &[f64]) -> Result<Operator> {
        averaged_operator(&StringPlan::simultaneous(weights.to_vec())?, &self.projectors)
    }

    /// Largest distance from `x` to any of the sets.
    pub fn membership_residual(&self, x: &Vector) -> Result<f64> {
        self.projectors.iter().try_fold(0.0_f64, |acc, p| Ok(acc.max(p.residual(x)?)))
    }

    /// All anchor points of the set data.
    pub(crate) fn anchors(&self) -> Vec<Vector> {
        self.sets.iter().flat_map(SetDescriptor::anchors).collect()
    }

    /// Decides consistency and records certified points of the target set `C`
    /// (grid oracle for the proximity minimizer, polished by fixed-point iteration).
    pub fn certify(mut self, weights: &[f64], grid: &GridSpec, conv_tol: f64, eq_tol: f64) -> Result<Self> {
        let argmin = proximity_argmin_oracle(&self, weights, grid, conv_tol)?;
        let consistent = self.membership_residual(&argmin)? <= CONSISTENCY_TOL;
        let op = self.simultaneous_operator(weights)?;
        let mut point = fixed_point_oracle(&op, &argmin, conv_tol)?;
        if consistent {
            // Sequential sweeps drive per-set residuals to the identity tolerance.
            for _ in 0..10_000 {
                if self.membership_residual(&point)? <= eq_tol {
                    break;
                }
                for p in &self.projectors {
                    point = p.eval(&point);
                }
            }
            let r = self.membership_residual(&point)?;
            if r > eq_tol {
                return Err(Error::Oracle(format!("feasible point residual {r:e} exceeds {eq_tol:e}")));
            }
        }
        self.consistent = Some(consistent);
        self.known_c_points = vec![point];
        Ok(self)
    }

    /// Distance-like membership measure for the target set `C`: the largest
    /// per-set residual when consistent, else the residual of `Σ ωᵢ P_{C_i}`.
    pub fn target_membership(
        &self,
        weights: &[f64],
        grid: &GridSpec,
        conv_tol: f64,
    ) -> Result<Membership<'_>> {
        let consistent = match self.consistent {
            Some(c) => c,
            None => {
                let argmin = proximity_argmin_oracle(self, weights, grid, conv_tol)?;
                self.membership_residual(&argmin)? <= CONSISTENCY_TOL
            }
        };
        if consistent {
            Ok(Box::new(move |x: &Vector| self.membership_residual(x).unwrap_or(f64::INFINITY)))
        } else {
            let op = self.simultaneous_operator(weights)?;
            Ok(Box::new(move |x: &Vector| op.residual(x).unwrap_or(f64::INFINITY)))
        }
    }
}

fn vec_of(e: &[f64]) -> Vector {
    Vector::from_slice(e).expect("finite literal")
}

/// Intervals `[−3, −1]` and `[1, 3]` on the line; inconsistent, `C = {0}`.
pub fn two_intervals() -> ProblemInstance {
    ProblemInstance::new(
        "two-intervals",
        vec![
            SetDescriptor::Box { lo: vec_of(&[-3.0]), hi: vec_of(&[-1.0]) },
            SetDescriptor::Box { lo: vec_of(&[1.0]), hi: vec_of(&[3.0]) },
        ],
    )
    .expect("valid sets")
}

/// Unit balls centred at `(−2, 1)` and `(2, 1)`; inconsistent, `C = {(0, 1)}`.
pub fn two_balls() -> ProblemInstance {
    ProblemInstance::new(
        "two-balls",
        vec![
            SetDescriptor::Ball { center: vec_of(&[-2.0, 1.0]), radius: 1.0 },
            SetDescriptor::Ball { center: vec_of(&[2.0, 1.0]), radius: 1.0 },
        ],
    )
    .expect("valid sets")
}

/// Unit balls centred at `(−0.5, 0)` and `(0.5, 0)`; consistent.
pub fn overlapping_balls() -> ProblemInstance {
    ProblemInstance::new(
        "overlapping-balls",
        vec![
            SetDescriptor::Ball { center: vec_of(&[-0.5, 0.0]), radius: 1.0 },
            SetDescriptor::Ball { center: vec_of(&[0.5, 0.0]), radius: 1.0 },
        ],
    )
    .expect("valid sets")
}

/// Two boxes meeting in the segment from `(−1, 0)` to `(1, 0)`; consistent.
pub fn segment() -> ProblemInstance {
    ProblemInstance::new(
        "segment",
        vec![
            SetDescriptor::Box { lo: vec_of(&[-1.0, -1.0]), hi: vec_of(&[1.0, 1.0]) },
            SetDescriptor::Box { lo: vec_of(&[-5.0, 0.0]), hi: vec_of(&[5.0, 0.0]) },
        ],
    )
    .expect("valid sets")
}
