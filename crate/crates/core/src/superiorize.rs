//! Superiorized string averaging.
//!
//! Before each feasibility step the iterate is pushed `N_k` times along
//! normalized negative subgradients of a convex objective `φ`, with summable
//! step sizes `β_{k,n}`. The feasibility step is then applied at the pushed
//! point:
//!
//! ```text
//! y^{k+1} = T_{λ_k}(y^k + Σ_n β_{k,n} v^{k,n})
//! ```
//!
//! [`strict_fejer_monitor`] and [`classify_alternative`] check, along a
//! finished trace, which branch of the strict-Fejér dichotomy a run
//! realized: the limit minimizes `φ` over the target set, or distances to
//! the constrained minimizer eventually decrease strictly.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gdsa::{drive, IterationTrace, RelaxationSchedule, StopRule};
use crate::harness::oracle::{local_grid_minimize, GridSpec};
use crate::harness::problem::ProblemInstance;
use crate::strings::ControlSchedule;
use crate::vector::{Tolerances, Vector};

/// A convex, continuous objective with a subgradient selection.
pub trait ConvexObjective {
    fn evaluate(&self, x: &Vector) -> Result<f64>;

    /// Some `s ∈ ∂φ(x)`.
    fn subgradient(&self, x: &Vector) -> Result<Vector>;
}

/// One affine piece `⟨a, x⟩ + b`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AffinePiece {
    pub a: Vector,
    pub b: f64,
}

/// Built-in objectives.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum Objective {
    /// `w‖x − c‖²`
    #[serde(rename = "wsqnorm")]
    WeightedSquaredNorm {
        center: Vector,
        #[serde(default = "unit_weight")]
        weight: f64,
    },
    /// `‖x‖₁`
    #[serde(rename = "l1")]
    L1Norm,
    /// `maxᵢ ⟨aᵢ, x⟩ + bᵢ`
    #[serde(rename = "max_affine")]
    MaxOfAffine { pieces: Vec<AffinePiece> },
}

fn unit_weight() -> f64 {
    1.0
}

impl Objective {
    pub fn validate(&self, dim: usize) -> Result<()> {
        match self {
            Objective::WeightedSquaredNorm { center, weight } => {
                center.ensure_dim(dim)?;
                if !(weight.is_finite() && *weight > 0.0) {
                    return Err(Error::Config(format!("objective weight {weight} must be positive")));
                }
            }
            Objective::L1Norm => {}
            Objective::MaxOfAffine { pieces } => {
                if pieces.is_empty() {
                    return Err(Error::Config("max_affine needs at least one piece".into()));
                }
                for p in pieces {
                    p.a.ensure_dim(dim)?;
                }
            }
        }
        Ok(())
    }

    /// Index of the active piece: the lowest index attaining the maximum.
    fn active_piece(pieces: &[AffinePiece], x: &Vector) -> (usize, f64) {
        let mut best = (0, f64::NEG_INFINITY);
        for (i, p) in pieces.iter().enumerate() {
            let v = p.a.dot(x) + p.b;
            if v > best.1 {
                best = (i, v);
            }
        }
        best
    }
}

impl ConvexObjective for Objective {
    fn evaluate(&self, x: &Vector) -> Result<f64> {
        let value = match self {
            Objective::WeightedSquaredNorm { center, weight } => {
                x.ensure_dim(center.dim())?;
                weight * x.distance(center).powi(2)
            }
            Objective::L1Norm => x.l1_norm(),
            Objective::MaxOfAffine { pieces } => {
                x.ensure_dim(pieces[0].a.dim())?;
                Self::active_piece(pieces, x).1
            }
        };
        if value.is_finite() {
            Ok(value)
        } else {
            Err(Error::NonFinite(format!("objective value {value}")))
        }
    }

    fn subgradient(&self, x: &Vector) -> Result<Vector> {
        match self {
            Objective::WeightedSquaredNorm { center, weight } => {
                x.ensure_dim(center.dim())?;
                Ok((2.0 * weight) * &(x - center))
            }
            // Zero coordinates get the minimal-norm choice 0.
            Objective::L1Norm => Vector::new(
                x.as_slice()
                    .iter()
                    .map(|v| if *v > 0.0 { 1.0 } else if *v < 0.0 { -1.0 } else { 0.0 })
                    .collect(),
            ),
            Objective::MaxOfAffine { pieces } => {
                x.ensure_dim(pieces[0].a.dim())?;
                Ok(pieces[Self::active_piece(pieces, x).0].a.clone())
            }
        }
    }
}

/// Step sizes `β_{k,n} = β₀ rᵏ / N` for `n = 1..N`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SuperiorizationSchedule {
    pub beta0: f64,
    pub ratio: f64,
    /// `N_k`, constant in `k`.
    pub n: usize,
}

impl Default for SuperiorizationSchedule {
    fn default() -> Self {
        Self { beta0: 0.5, ratio: 0.9, n: 1 }
    }
}

impl SuperiorizationSchedule {
    pub fn validate(&self) -> Result<()> {
        if !(self.beta0 > 0.0 && self.beta0.is_finite()) {
            return Err(Error::InvalidSchedule(format!("beta0 {} must be positive", self.beta0)));
        }
        if !(self.ratio > 0.0 && self.ratio < 1.0) {
            return Err(Error::InvalidSchedule(format!("ratio {} outside (0, 1)", self.ratio)));
        }
        if self.n == 0 {
            return Err(Error::InvalidSchedule("N_k must be at least 1".into()));
        }
        Ok(())
    }

    pub fn betas_at(&self, k: usize) -> Vec<f64> {
        let total = self.beta0 * self.ratio.powi(k.min(i32::MAX as usize) as i32);
        vec![total / self.n as f64; self.n]
    }

    /// `Σ_{j > k} Σ_n β_{j,n}`
    pub fn remaining_after(&self, k: usize) -> f64 {
        self.beta0 * self.ratio.powi((k + 1).min(i32::MAX as usize) as i32) / (1.0 - self.ratio)
    }
}

/// Directions `v^1..v^N` at `y`: each is `−s/‖s‖` for a subgradient `s` at the
/// partially pushed point, or zero when `‖s‖ ≤ zero_tol`.
pub fn perturbation_directions(
    y: &Vector,
    phi: &dyn ConvexObjective,
    betas: &[f64],
    zero_tol: f64,
) -> Result<Vec<Vector>> {
    let mut point = y.clone();
    let mut dirs = Vec::with_capacity(betas.len());
    for beta in betas {
        phi.evaluate(&point)?;
        let s = phi.subgradient(&point)?;
        let n = s.norm();
        let v = if n <= zero_tol { Vector::zeros(y.dim()) } else { (-1.0 / n) * &s };
        point = point.axpy(*beta, &v);
        dirs.push(v);
    }
    Ok(dirs)
}

/// The superiorized iteration. The trace records `φ(y^k)` for every iterate,
/// the aggregate perturbation per step and the remaining perturbation budget.
pub fn superiorized_run(
    schedule: &ControlSchedule,
    relax: &RelaxationSchedule,
    phi: &dyn ConvexObjective,
    sup: &SuperiorizationSchedule,
    y0: &Vector,
    stop: &StopRule,
    tol: &Tolerances,
) -> Result<IterationTrace> {
    sup.validate()?;
    let mut trace = drive(schedule, relax, y0, stop, |k, y| {
        let betas = sup.betas_at(k);
        let dirs = perturbation_directions(y, phi, &betas, tol.subgrad_zero_tol)?;
        let mut push = Vector::zeros(y.dim());
        for (b, v) in betas.iter().zip(&dirs) {
            push = push.axpy(*b, v);
        }
        Ok(Some((push, Some(sup.remaining_after(k)))))
    })?;
    trace.phi = Some(trace.iterates.iter().map(|y| phi.evaluate(y)).collect::<Result<_>>()?);
    Ok(trace)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum StrictFejerOutcome {
    /// The trace ends within the limit tolerance of the witness.
    LimitInCmin,
    /// Every decrement from `k0` on exceeds the slack tolerance.
    StrictFejer,
    NotStrict { first_failure: usize },
}

#[derive(Clone, Debug, Serialize)]
pub struct StrictFejerReport {
    pub k0: usize,
    /// `‖y^k − z‖² − ‖y^{k+1} − z‖²` for every step.
    pub decrements: Vec<f64>,
    pub limit_distance: f64,
    pub outcome: StrictFejerOutcome,
}

impl StrictFejerReport {
    pub fn pass(&self) -> bool {
        self.outcome == StrictFejerOutcome::StrictFejer
    }
}

fn decrements(trace: &IterationTrace, z: &Vector) -> Vec<f64> {
    trace
        .iterates
        .windows(2)
        .map(|w| w[0].distance(z).powi(2) - w[1].distance(z).powi(2))
        .collect()
}

/// Strict decrease of distances to a constrained minimizer `z` from step `k0` on.
pub fn strict_fejer_monitor(
    trace: &IterationTrace,
    cmin_witness: &Vector,
    k0: usize,
    limit_tol: f64,
    slack_tol: f64,
) -> Result<StrictFejerReport> {
    if trace.iterates.len() < k0 + 2 {
        return Err(Error::Precondition(format!(
            "trace of {} iterates too short for k0 = {k0}",
            trace.iterates.len()
        )));
    }
    cmin_witness.ensure_dim(trace.last().dim())?;
    let decrements = decrements(trace, cmin_witness);
    let limit_distance = trace.last().distance(cmin_witness);
    let outcome = if limit_distance <= limit_tol {
        StrictFejerOutcome::LimitInCmin
    } else {
        match (k0..decrements.len()).find(|&k| decrements[k].is_nan() || decrements[k] <= slack_tol) {
            Some(first_failure) => StrictFejerOutcome::NotStrict { first_failure },
            None => StrictFejerOutcome::StrictFejer,
        }
    };
    Ok(StrictFejerReport { k0, decrements, limit_distance, outcome })
}

/// Smallest `k0` from which every decrement exceeds `slack_tol`, if any.
pub fn scan_strict_fejer(trace: &IterationTrace, cmin_witness: &Vector, slack_tol: f64) -> Option<usize> {
    let d = decrements(trace, cmin_witness);
    match d.iter().rposition(|x| x.is_nan() || *x <= slack_tol) {
        None if !d.is_empty() => Some(0),
        Some(last_bad) if last_bad + 1 < d.len() => Some(last_bad + 1),
        _ => None,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Alternative {
    LimitInCmin,
    StrictFejer { k0: usize },
}

#[derive(Clone, Debug, Serialize)]
pub struct DichotomyReport {
    pub limit_distance: f64,
    pub limit_in_cmin: bool,
    /// Smallest passing `k0` with at least `min_tail` iterates after it.
    pub strict_k0: Option<usize>,
    pub alternative: Option<Alternative>,
}

impl DichotomyReport {
    /// Exactly one alternative holds: the limit is in `C_min`, or it is not and
    /// the trace is eventually strictly Fejér monotone with respect to it.
    pub fn exactly_one(&self) -> bool {
        self.alternative.is_some()
    }
}

/// Decides which branch of the strict-Fejér dichotomy a superiorized trace realized.
pub fn classify_alternative(
    trace: &IterationTrace,
    cmin_witness: &Vector,
    limit_tol: f64,
    slack_tol: f64,
    min_tail: usize,
) -> Result<DichotomyReport> {
    cmin_witness.ensure_dim(trace.last().dim())?;
    let limit_distance = trace.last().distance(cmin_witness);
    let limit_in_cmin = limit_distance <= limit_tol;
    let strict_k0 = scan_strict_fejer(trace, cmin_witness, slack_tol)
        .filter(|k0| k0 + min_tail <= trace.iterates.len());
    let alternative = match (limit_in_cmin, strict_k0) {
        (true, _) => Some(Alternative::LimitInCmin),
        (false, Some(k0)) => Some(Alternative::StrictFejer { k0 }),
        (false, None) => None,
    };
    Ok(DichotomyReport { limit_distance, limit_in_cmin, strict_k0, alternative })
}

/// Brute-force minimizer of `φ` over the problem's target set `C`
/// (the intersection when consistent, otherwise the proximity minimizers for
/// `weights`), by nested local grids shrinking to `conv_tol`.
pub fn constrained_min_oracle(
    problem: &ProblemInstance,
    weights: &[f64],
    phi: &dyn ConvexObjective,
    grid: &GridSpec,
    conv_tol: f64,
) -> Result<Vector> {
    if problem.dim() > 3 {
        return Err(Error::Oracle("grid oracles are limited to dimension <= 3".into()));
    }
    let membership = problem.target_membership(weights, grid, conv_tol)?;
    local_grid_minimize(grid, conv_tol, |x| phi.evaluate(x).unwrap_or(f64::INFINITY), |x| membership(x))
}
