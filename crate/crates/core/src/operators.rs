//! Projection operators, their relaxations, averages and compositions.
//!
//! An [`Operator`] is an immutable expression tree. Leaves are closed-form
//! metric projections; inner nodes relax, average or compose. Trees share
//! subtrees through `Arc`, so a schedule can reuse the same base operators
//! across every step.
//!
//! The `check_*` functions sample pairs of points and report the largest
//! violation of the corresponding operator-class inequality:
//!
//! | check | inequality |
//! |-------|------------|
//! | [`check_nonexpansive`] | `‖Tx − Ty‖ ≤ ‖x − y‖` |
//! | [`check_rho_fne`] | `‖Tx − Ty‖² ≤ ‖x − y‖² − ρ‖(x − Tx) − (y − Ty)‖²` |
//! | [`check_cutter`] | `⟨z − Tx, x − Tx⟩ ≤ 0` for `z ∈ Fix T` |

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::vector::{SampleSpec, Tolerances, Vector};

/// Node kinds of an operator expression.
#[derive(Debug)]
pub enum OperatorKind {
    /// Projection onto `{u : ⟨a, u⟩ ≤ b}`.
    HalfspaceProj { a: Vector, b: f64 },
    /// Projection onto `{u : ⟨a, u⟩ = b}`.
    HyperplaneProj { a: Vector, b: f64 },
    BallProj { center: Vector, radius: f64 },
    BoxProj { lo: Vector, hi: Vector },
    /// `(1 − λ) Id + λ T`
    Relaxation { inner: Operator, lambda: f64 },
    ConvexCombination { terms: Vec<(f64, Operator)> },
    /// Applied in list order: the first operator acts first.
    Composition { ops: Vec<Operator> },
    Identity,
}

/// Immutable, cheaply clonable operator expression on `ℝⁿ`.
#[derive(Clone, Debug)]
pub struct Operator {
    kind: Arc<OperatorKind>,
    dim: usize,
    declared_alpha: Option<f64>,
}

const WEIGHT_SUM_TOL: f64 = 1e-10;

impl Operator {
    fn leaf(kind: OperatorKind, dim: usize) -> Self {
        Self { kind: Arc::new(kind), dim, declared_alpha: None }
    }

    pub fn halfspace(a: Vector, b: f64) -> Result<Self> {
        check_normal(&a, b)?;
        let dim = a.dim();
        Ok(Self::leaf(OperatorKind::HalfspaceProj { a, b }, dim))
    }

    pub fn hyperplane(a: Vector, b: f64) -> Result<Self> {
        check_normal(&a, b)?;
        let dim = a.dim();
        Ok(Self::leaf(OperatorKind::HyperplaneProj { a, b }, dim))
    }

    pub fn ball(center: Vector, radius: f64) -> Result<Self> {
        if !(radius.is_finite() && radius > 0.0) {
            return Err(Error::InvalidOperator(format!("ball radius must be positive, got {radius}")));
        }
        let dim = center.dim();
        Ok(Self::leaf(OperatorKind::BallProj { center, radius }, dim))
    }

    pub fn box_proj(lo: Vector, hi: Vector) -> Result<Self> {
        hi.ensure_dim(lo.dim())?;
        if lo.as_slice().iter().zip(hi.as_slice()).any(|(l, h)| l > h) {
            return Err(Error::InvalidOperator("box requires lo <= hi componentwise".into()));
        }
        let dim = lo.dim();
        Ok(Self::leaf(OperatorKind::BoxProj { lo, hi }, dim))
    }

    pub fn identity(dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::EmptyVector);
        }
        Ok(Self::leaf(OperatorKind::Identity, dim))
    }

    /// `λ`-relaxation `(1 − λ) Id + λ T`, `λ ∈ [0, 2]`.
    pub fn relax(inner: Operator, lambda: f64) -> Result<Self> {
        if !(0.0..=2.0).contains(&lambda) {
            return Err(Error::InvalidOperator(format!("relaxation lambda {lambda} outside [0, 2]")));
        }
        let dim = inner.dim;
        Ok(Self::leaf(OperatorKind::Relaxation { inner, lambda }, dim))
    }

    /// Convex combination `Σ wᵢ Tᵢ` with positive weights summing to one.
    pub fn combination(terms: Vec<(f64, Operator)>) -> Result<Self> {
        let first = terms
            .first()
            .ok_or_else(|| Error::InvalidOperator("empty convex combination".into()))?;
        let dim = first.1.dim;
        for (w, op) in &terms {
            if op.dim != dim {
                return Err(Error::DimensionMismatch { expected: dim, found: op.dim });
            }
            if !(w.is_finite() && *w > 0.0) {
                return Err(Error::WeightSum { sum: terms.iter().map(|t| t.0).sum() });
            }
        }
        let sum: f64 = terms.iter().map(|t| t.0).sum();
        if (sum - 1.0).abs() > WEIGHT_SUM_TOL {
            return Err(Error::WeightSum { sum });
        }
        Ok(Self::leaf(OperatorKind::ConvexCombination { terms }, dim))
    }

    /// Composition applying `ops[0]` first and `ops[last]` last.
    pub fn composition(ops: Vec<Operator>) -> Result<Self> {
        let dim = ops
            .first()
            .ok_or_else(|| Error::InvalidOperator("empty composition".into()))?
            .dim;
        if let Some(op) = ops.iter().find(|op| op.dim != dim) {
            return Err(Error::DimensionMismatch { expected: dim, found: op.dim });
        }
        Ok(Self::leaf(OperatorKind::Composition { ops }, dim))
    }

    /// Overrides the α for which this operator is claimed α-relaxed firmly nonexpansive.
    pub fn with_declared_alpha(mut self, alpha: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha <= 2.0) {
            return Err(Error::InvalidOperator(format!("declared alpha {alpha} outside (0, 2]")));
        }
        self.declared_alpha = Some(alpha);
        Ok(self)
    }

    pub fn kind(&self) -> &OperatorKind {
        &self.kind
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn declared_alpha(&self) -> Option<f64> {
        self.declared_alpha
    }

    pub fn is_primitive_projection(&self) -> bool {
        matches!(
            *self.kind,
            OperatorKind::HalfspaceProj { .. }
                | OperatorKind::HyperplaneProj { .. }
                | OperatorKind::BallProj { .. }
                | OperatorKind::BoxProj { .. }
        )
    }

    /// Evaluates the operator at `x`.
    pub fn apply(&self, x: &Vector) -> Result<Vector> {
        x.ensure_dim(self.dim)?;
        Ok(self.eval(x))
    }

    /// `‖T(x) − x‖`
    pub fn residual(&self, x: &Vector) -> Result<f64> {
        x.ensure_dim(self.dim)?;
        Ok(self.eval(x).distance(x))
    }

    pub(crate) fn eval(&self, x: &Vector) -> Vector {
        match &*self.kind {
            OperatorKind::HalfspaceProj { a, b } => {
                let excess = a.dot(x) - b;
                if excess > 0.0 {
                    x.axpy(-excess / a.norm_squared(), a)
                } else {
                    x.clone()
                }
            }
            OperatorKind::HyperplaneProj { a, b } => {
                let excess = a.dot(x) - b;
                x.axpy(-excess / a.norm_squared(), a)
            }
            OperatorKind::BallProj { center, radius } => {
                let offset = x - center;
                let dist = offset.norm();
                if dist <= *radius {
                    x.clone()
                } else {
                    center.axpy(radius / dist, &offset)
                }
            }
            OperatorKind::BoxProj { lo, hi } => Vector::from_raw(
                x.as_slice()
                    .iter()
                    .zip(lo.as_slice().iter().zip(hi.as_slice()))
                    .map(|(v, (l, h))| v.clamp(*l, *h))
                    .collect(),
            ),
            OperatorKind::Relaxation { inner, lambda } => {
                if *lambda == 0.0 {
                    return x.clone();
                }
                relax_point(x, &inner.eval(x), *lambda)
            }
            OperatorKind::ConvexCombination { terms } => {
                let mut acc = vec![0.0; self.dim];
                for (w, op) in terms {
                    let y = op.eval(x);
                    for (a, v) in acc.iter_mut().zip(y.as_slice()) {
                        *a += w * v;
                    }
                }
                Vector::from_raw(acc)
            }
            OperatorKind::Composition { ops } => {
                let mut y = x.clone();
                for op in ops {
                    y = op.eval(&y);
                }
                y
            }
            OperatorKind::Identity => x.clone(),
        }
    }
}

fn check_normal(a: &Vector, b: f64) -> Result<()> {
    if a.norm_squared() == 0.0 {
        return Err(Error::InvalidOperator("normal vector must be nonzero".into()));
    }
    if !b.is_finite() {
        return Err(Error::NonFinite(format!("offset {b}")));
    }
    Ok(())
}

/// `x + λ (tx − x)`, returning `tx` itself when `λ = 1`.
pub(crate) fn relax_point(x: &Vector, tx: &Vector, lambda: f64) -> Vector {
    if lambda == 1.0 {
        return tx.clone();
    }
    Vector::from_raw(
        x.as_slice()
            .iter()
            .zip(tx.as_slice())
            .map(|(a, t)| a + lambda * (t - a))
            .collect(),
    )
}

/// Free-function form of [`Operator::apply`].
pub fn apply(op: &Operator, x: &Vector) -> Result<Vector> {
    op.apply(x)
}

/// Free-function form of [`Operator::residual`].
pub fn residual(op: &Operator, x: &Vector) -> Result<f64> {
    op.residual(x)
}

/// Converts α-relaxed-FNE to the equivalent ρ-FNE constant, `(2 − α)/α`.
pub fn rho_from_alpha(alpha: f64) -> f64 {
    (2.0 - alpha) / alpha
}

/// Inverse of [`rho_from_alpha`]: `2/(1 + ρ)`.
pub fn alpha_from_rho(rho: f64) -> f64 {
    2.0 / (1.0 + rho)
}

/// Smallest α for which the relaxation calculus certifies `op` as
/// α-relaxed firmly nonexpansive.
///
/// Primitives and the identity are firmly nonexpansive (α = 1). Relaxing an
/// α-relaxed FNE operator by λ gives a λα-relaxation of the same FNE operator.
/// Convex combinations take the largest term α; a composition of `m` factors
/// is `min ρᵢ / m`-FNE. A declared α always wins. Relaxations pushing the
/// product past 2 are outside the calculus and are refused.
pub fn propagate_alpha(op: &Operator) -> Result<f64> {
    if let Some(alpha) = op.declared_alpha {
        return Ok(alpha);
    }
    match op.kind() {
        OperatorKind::HalfspaceProj { .. }
        | OperatorKind::HyperplaneProj { .. }
        | OperatorKind::BallProj { .. }
        | OperatorKind::BoxProj { .. }
        | OperatorKind::Identity => Ok(1.0),
        OperatorKind::Relaxation { inner, lambda } => {
            if *lambda == 0.0 {
                return Ok(1.0);
            }
            let product = lambda * propagate_alpha(inner)?;
            if product <= 2.0 + 1e-12 {
                Ok(product.min(2.0))
            } else {
                Err(Error::AlphaUnknown(format!(
                    "relaxation by {lambda} of an operator pushes alpha to {product} > 2; declare alpha explicitly"
                )))
            }
        }
        OperatorKind::ConvexCombination { terms } => terms
            .iter()
            .try_fold(0.0_f64, |acc, (_, t)| Ok(acc.max(propagate_alpha(t)?))),
        OperatorKind::Composition { ops } => {
            let alphas = ops.iter().map(propagate_alpha).collect::<Result<Vec<_>>>()?;
            let m = alphas.len() as f64;
            if alphas.len() == 1 {
                Ok(alphas[0])
            } else if alphas.iter().all(|a| *a == 1.0) {
                Ok(2.0 * m / (m + 1.0))
            } else {
                let rho = alphas.iter().map(|a| rho_from_alpha(*a)).fold(f64::INFINITY, f64::min);
                Ok(alpha_from_rho(rho / m))
            }
        }
    }
}

/// Points certified to be fixed by an operator.
#[derive(Clone, Debug)]
pub struct FixedPointWitness {
    points: Vec<Vector>,
}

impl FixedPointWitness {
    /// Accepts `points` only if each satisfies `‖T(z) − z‖ ≤ eq_tol`.
    pub fn new(op: &Operator, points: Vec<Vector>, eq_tol: f64) -> Result<Self> {
        for z in &points {
            let r = op.residual(z)?;
            if r > eq_tol {
                return Err(Error::Precondition(format!(
                    "witness {:?} has residual {r:e} > {eq_tol:e}",
                    z.as_slice()
                )));
            }
        }
        Ok(Self { points })
    }

    /// Witnesses supplied by a caller who certifies membership by other means.
    pub fn trusted(points: Vec<Vector>) -> Self {
        Self { points }
    }

    /// Images of sampled points under a projection-like (idempotent) operator.
    pub fn from_images(op: &Operator, spec: &SampleSpec, eq_tol: f64) -> Result<Self> {
        let pts = spec.points(op.dim())?.iter().map(|x| op.eval(x)).collect();
        Self::new(op, pts, eq_tol)
    }

    pub fn points(&self) -> &[Vector] {
        &self.points
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Outcome of a sampled inequality check.
#[derive(Clone, Debug, Serialize)]
pub struct InequalityReport {
    pub property: String,
    pub samples: usize,
    /// Largest observed `lhs − rhs`; nonpositive when the inequality holds everywhere.
    pub max_violation: f64,
    pub tolerance: f64,
    pub pass: bool,
    /// Sampled points attaining the maximum.
    pub worst: Vec<Vector>,
}

impl InequalityReport {
    fn new(property: String, tolerance: f64) -> Self {
        Self {
            property,
            samples: 0,
            max_violation: f64::NEG_INFINITY,
            tolerance,
            pass: true,
            worst: Vec::new(),
        }
    }

    fn record(&mut self, violation: f64, points: &[&Vector]) {
        self.samples += 1;
        if violation > self.max_violation || violation.is_nan() {
            self.max_violation = violation;
            self.worst = points.iter().map(|p| (*p).clone()).collect();
        }
    }

    fn finish(mut self) -> Self {
        self.pass = self.samples > 0 && self.max_violation <= self.tolerance;
        self
    }
}

/// Max of `‖Tx − Ty‖ − ‖x − y‖` over sampled pairs.
pub fn check_nonexpansive(op: &Operator, samples: &SampleSpec, tol: &Tolerances) -> Result<InequalityReport> {
    let mut report = InequalityReport::new("nonexpansive".into(), tol.slack_tol);
    for (x, y) in samples.pairs(op.dim())? {
        let (tx, ty) = (op.eval(&x), op.eval(&y));
        report.record(tx.distance(&ty) - x.distance(&y), &[&x, &y]);
    }
    Ok(report.finish())
}

/// Max violation of the ρ-firmly-nonexpansive inequality over sampled pairs.
pub fn check_rho_fne(op: &Operator, rho: f64, samples: &SampleSpec, tol: &Tolerances) -> Result<InequalityReport> {
    if rho.is_nan() || rho < 0.0 {
        return Err(Error::Precondition(format!("rho must be nonnegative, got {rho}")));
    }
    let mut report = InequalityReport::new(format!("{rho}-firmly nonexpansive"), tol.slack_tol);
    for (x, y) in samples.pairs(op.dim())? {
        let (tx, ty) = (op.eval(&x), op.eval(&y));
        let lhs = tx.distance(&ty).powi(2);
        let disp = &(&x - &tx) - &(&y - &ty);
        let rhs = x.distance(&y).powi(2) - rho * disp.norm_squared();
        report.record(lhs - rhs, &[&x, &y]);
    }
    Ok(report.finish())
}

/// Max of `⟨z − Tx, x − Tx⟩` over witnesses `z` and sampled `x`.
pub fn check_cutter(
    op: &Operator,
    witness: &FixedPointWitness,
    samples: &SampleSpec,
    tol: &Tolerances,
) -> Result<InequalityReport> {
    if witness.is_empty() {
        return Err(Error::Precondition("cutter check needs at least one fixed point".into()));
    }
    let mut report = InequalityReport::new("cutter".into(), tol.slack_tol);
    for x in samples.points(op.dim())? {
        let tx = op.eval(&x);
        let disp = &x - &tx;
        for z in witness.points() {
            z.ensure_dim(op.dim())?;
            report.record((z - &tx).dot(&disp), &[&x, z]);
        }
    }
    Ok(report.finish())
}

/// JSON form of an operator expression.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OperatorDoc {
    #[serde(flatten)]
    pub node: NodeDoc,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum NodeDoc {
    Halfspace { a: Vector, b: f64 },
    Hyperplane { a: Vector, b: f64 },
    Ball { center: Vector, radius: f64 },
    Box { lo: Vector, hi: Vector },
    Relaxation { lambda: f64, op: Box<OperatorDoc> },
    Combination { terms: Vec<TermDoc> },
    Composition { ops: Vec<OperatorDoc> },
    Identity { dim: usize },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TermDoc {
    pub weight: f64,
    pub op: OperatorDoc,
}

impl TryFrom<&OperatorDoc> for Operator {
    type Error = Error;

    fn try_from(doc: &OperatorDoc) -> Result<Self> {
        let op = match &doc.node {
            NodeDoc::Halfspace { a, b } => Operator::halfspace(a.clone(), *b)?,
            NodeDoc::Hyperplane { a, b } => Operator::hyperplane(a.clone(), *b)?,
            NodeDoc::Ball { center, radius } => Operator::ball(center.clone(), *radius)?,
            NodeDoc::Box { lo, hi } => Operator::box_proj(lo.clone(), hi.clone())?,
            NodeDoc::Relaxation { lambda, op } => Operator::relax(Operator::try_from(op.as_ref())?, *lambda)?,
            NodeDoc::Combination { terms } => Operator::combination(
                terms
                    .iter()
                    .map(|t| Ok((t.weight, Operator::try_from(&t.op)?)))
                    .collect::<Result<_>>()?,
            )?,
            NodeDoc::Composition { ops } => {
                Operator::composition(ops.iter().map(Operator::try_from).collect::<Result<_>>()?)?
            }
            NodeDoc::Identity { dim } => Operator::identity(*dim)?,
        };
        match doc.alpha {
            Some(alpha) => op.with_declared_alpha(alpha),
            None => Ok(op),
        }
    }
}

impl From<&Operator> for OperatorDoc {
    fn from(op: &Operator) -> Self {
        let node = match op.kind() {
            OperatorKind::HalfspaceProj { a, b } => NodeDoc::Halfspace { a: a.clone(), b: *b },
            OperatorKind::HyperplaneProj { a, b } => NodeDoc::Hyperplane { a: a.clone(), b: *b },
            OperatorKind::BallProj { center, radius } => {
                NodeDoc::Ball { center: center.clone(), radius: *radius }
            }
            OperatorKind::BoxProj { lo, hi } => NodeDoc::Box { lo: lo.clone(), hi: hi.clone() },
            OperatorKind::Relaxation { inner, lambda } => {
                NodeDoc::Relaxation { lambda: *lambda, op: Box::new(inner.into()) }
            }
            OperatorKind::ConvexCombination { terms } => NodeDoc::Combination {
                terms: terms.iter().map(|(w, t)| TermDoc { weight: *w, op: t.into() }).collect(),
            },
            OperatorKind::Composition { ops } => NodeDoc::Composition { ops: ops.iter().map(Into::into).collect() },
            OperatorKind::Identity => NodeDoc::Identity { dim: op.dim() },
        };
        OperatorDoc { node, alpha: op.declared_alpha }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(e: &[f64]) -> Vector {
        Vector::from_slice(e).unwrap()
    }

    fn unit_ball() -> Operator {
        Operator::ball(v(&[0.0, 0.0]), 1.0).unwrap()
    }

    fn samples() -> SampleSpec {
        SampleSpec::new(11, 1000)
    }

    #[test]
    fn apply_examples() {
        let h = Operator::halfspace(v(&[1.0, 0.0]), 0.0).unwrap();
        assert_eq!(h.apply(&v(&[2.0, 3.0])).unwrap(), v(&[0.0, 3.0]));
        let p = unit_ball().apply(&v(&[3.0, 4.0])).unwrap();
        assert!(p.max_abs_diff(&v(&[0.6, 0.8])) < 1e-15);
        let r = Operator::relax(unit_ball(), 2.0).unwrap().apply(&v(&[3.0, 4.0])).unwrap();
        assert!(r.max_abs_diff(&v(&[-1.8, -2.4])) < 1e-15);
        let x = v(&[7.5, -1.25]);
        assert_eq!(Operator::relax(unit_ball(), 0.0).unwrap().apply(&x).unwrap(), x);
    }

    #[test]
    fn hyperplane_and_box_closed_forms() {
        let hp = Operator::hyperplane(v(&[0.0, 2.0]), 2.0).unwrap();
        assert_eq!(hp.apply(&v(&[5.0, -3.0])).unwrap(), v(&[5.0, 1.0]));
        let b = Operator::box_proj(v(&[-1.0, 0.0]), v(&[1.0, 0.5])).unwrap();
        assert_eq!(b.apply(&v(&[-4.0, 0.25])).unwrap(), v(&[-1.0, 0.25]));
    }

    #[test]
    fn halfspace_boundary_point_is_fixed() {
        let h = Operator::halfspace(v(&[1.0, 1.0]), 1.0).unwrap();
        let x = v(&[0.5, 0.5]);
        assert_eq!(h.apply(&x).unwrap(), x);
    }

    #[test]
    fn residual_examples() {
        assert_eq!(unit_ball().residual(&v(&[0.5, 0.0])).unwrap(), 0.0);
        assert_eq!(unit_ball().residual(&v(&[2.0, 0.0])).unwrap(), 1.0);
        let h = Operator::halfspace(v(&[1.0, 0.0]), 0.0).unwrap();
        assert_eq!(h.residual(&v(&[3.0, 0.0])).unwrap(), 3.0);
    }

    #[test]
    fn apply_rejects_dimension_mismatch() {
        assert!(matches!(
            unit_ball().apply(&v(&[1.0])),
            Err(Error::DimensionMismatch { expected: 2, found: 1 })
        ));
    }

    #[test]
    fn constructors_enforce_invariants() {
        assert!(Operator::halfspace(v(&[0.0, 0.0]), 1.0).is_err());
        assert!(Operator::ball(v(&[0.0]), 0.0).is_err());
        assert!(Operator::box_proj(v(&[1.0]), v(&[0.0])).is_err());
        assert!(Operator::relax(unit_ball(), 2.5).is_err());
        assert!(Operator::combination(vec![(0.5, unit_ball()), (0.6, unit_ball())]).is_err());
        assert!(Operator::combination(vec![(1.0, unit_ball()), (0.0, unit_ball())]).is_err());
        assert!(Operator::composition(vec![]).is_err());
        let line = Operator::hyperplane(v(&[1.0]), 0.0).unwrap();
        assert!(Operator::composition(vec![unit_ball(), line]).is_err());
    }

    #[test]
    fn nonexpansive_examples() {
        let tol = Tolerances::default();
        assert!(check_nonexpansive(&unit_ball(), &samples(), &tol).unwrap().pass);
        // Pairs drawn from [-5,5]^2 straddle the unit ball.
        let refl = Operator::relax(unit_ball(), 2.0).unwrap();
        assert!(check_nonexpansive(&refl, &samples(), &tol).unwrap().pass);
        let id = check_nonexpansive(&Operator::identity(2).unwrap(), &samples(), &tol).unwrap();
        assert!(id.pass);
        assert_eq!(id.max_violation, 0.0);
    }

    #[test]
    fn expansive_operator_fails() {
        // Relaxing a reflection through a tiny ball by 2 acts like x -> -3x.
        let scale = Operator::relax(Operator::ball(v(&[0.0, 0.0]), 1e-3).unwrap(), 2.0).unwrap();
        let comp = Operator::relax(scale, 2.0).unwrap();
        let r = check_nonexpansive(&comp, &samples(), &Tolerances::default()).unwrap();
        assert!(!r.pass);
        assert!(r.max_violation > 0.1);
        assert_eq!(r.worst.len(), 2);
    }

    #[test]
    fn rho_fne_examples() {
        let tol = Tolerances::default();
        assert!(check_rho_fne(&unit_ball(), 1.0, &samples(), &tol).unwrap().pass);
        let h = Operator::halfspace(v(&[1.0, 2.0]), 0.5).unwrap();
        let comp = Operator::composition(vec![unit_ball(), h.clone()]).unwrap();
        assert!(check_rho_fne(&comp, 0.5, &samples(), &tol).unwrap().pass);
        let comb = Operator::combination(vec![(0.3, unit_ball()), (0.7, h)]).unwrap();
        assert!(check_rho_fne(&comb, 1.0, &samples(), &tol).unwrap().pass);
        assert!(check_rho_fne(&comb, -1.0, &samples(), &tol).is_err());
    }

    #[test]
    fn reflection_is_not_firmly_nonexpansive() {
        let refl = Operator::relax(unit_ball(), 2.0).unwrap();
        assert!(!check_rho_fne(&refl, 1.0, &samples(), &Tolerances::default()).unwrap().pass);
    }

    #[test]
    fn cutter_examples() {
        let tol = Tolerances::default();
        let origin = FixedPointWitness::new(&unit_ball(), vec![v(&[0.0, 0.0])], tol.eq_tol).unwrap();
        assert!(check_cutter(&unit_ball(), &origin, &samples(), &tol).unwrap().pass);
        let id = Operator::identity(2).unwrap();
        let w = FixedPointWitness::new(&id, vec![v(&[3.0, -1.0])], tol.eq_tol).unwrap();
        let r = check_cutter(&id, &w, &samples(), &tol).unwrap();
        assert!(r.pass);
        assert_eq!(r.max_violation, 0.0);
        let half = Operator::relax(unit_ball(), 0.5).unwrap();
        assert!(check_cutter(&half, &origin, &samples(), &tol).unwrap().pass);
    }

    #[test]
    fn cutter_requires_witness() {
        let empty = FixedPointWitness::trusted(vec![]);
        assert!(check_cutter(&unit_ball(), &empty, &samples(), &Tolerances::default()).is_err());
    }

    #[test]
    fn witness_rejects_non_fixed_points() {
        assert!(FixedPointWitness::new(&unit_ball(), vec![v(&[2.0, 0.0])], 1e-10).is_err());
    }

    #[test]
    fn composition_of_projections_need_not_be_a_cutter() {
        // Two lines through the origin at 60 degrees; Fix = {0}.
        let a = Operator::hyperplane(v(&[0.0, 1.0]), 0.0).unwrap();
        let t = std::f64::consts::FRAC_PI_3;
        let b = Operator::hyperplane(v(&[-t.sin(), t.cos()]), 0.0).unwrap();
        let comp = Operator::composition(vec![a, b]).unwrap();
        let w = FixedPointWitness::new(&comp, vec![v(&[0.0, 0.0])], 1e-10).unwrap();
        assert!(!check_cutter(&comp, &w, &samples(), &Tolerances::default()).unwrap().pass);
    }

    #[test]
    fn propagate_alpha_examples() {
        assert_eq!(propagate_alpha(&unit_ball()).unwrap(), 1.0);
        let h = Operator::halfspace(v(&[1.0, 0.0]), 0.0).unwrap();
        let comp = Operator::composition(vec![unit_ball(), h.clone()]).unwrap();
        assert_eq!(propagate_alpha(&comp).unwrap(), 4.0 / 3.0);
        let refl = Operator::relax(unit_ball(), 2.0).unwrap();
        assert_eq!(propagate_alpha(&refl).unwrap(), 2.0);
        let comb = Operator::combination(vec![(0.5, refl.clone()), (0.5, h)]).unwrap();
        assert_eq!(propagate_alpha(&comb).unwrap(), 2.0);
    }

    #[test]
    fn composition_alpha_matches_rho_over_m() {
        let h = Operator::halfspace(v(&[1.0, 0.0]), 0.0).unwrap();
        let three = Operator::composition(vec![unit_ball(), h.clone(), unit_ball()]).unwrap();
        let a = propagate_alpha(&three).unwrap();
        assert!((rho_from_alpha(a) - 1.0 / 3.0).abs() < 1e-15);
        // Mixed factors go through the general rule: min rho / m.
        let mixed = Operator::composition(vec![Operator::relax(h, 1.5).unwrap(), unit_ball()]).unwrap();
        let a = propagate_alpha(&mixed).unwrap();
        assert!((rho_from_alpha(a) - (0.5 / 1.5) / 2.0).abs() < 1e-15);
    }

    #[test]
    fn propagate_alpha_refuses_beyond_calculus() {
        let inner = Operator::relax(unit_ball(), 1.5).unwrap();
        let outer = Operator::relax(inner.clone(), 1.5).unwrap();
        assert!(matches!(propagate_alpha(&outer), Err(Error::AlphaUnknown(_))));
        let declared = outer.with_declared_alpha(2.0).unwrap();
        assert_eq!(propagate_alpha(&declared).unwrap(), 2.0);
        assert_eq!(propagate_alpha(&Operator::relax(inner, 1.2).unwrap()).unwrap(), 1.5 * 1.2);
    }

    #[test]
    fn json_round_trip() {
        let h = Operator::halfspace(v(&[1.0, 0.0]), 0.0).unwrap();
        let comp = Operator::composition(vec![unit_ball(), Operator::relax(h.clone(), 1.5).unwrap()]).unwrap();
        let op = Operator::combination(vec![(0.25, comp), (0.75, h)]).unwrap().with_declared_alpha(1.5).unwrap();
        let doc = OperatorDoc::from(&op);
        let text = serde_json::to_string(&doc).unwrap();
        let back: OperatorDoc = serde_json::from_str(&text).unwrap();
        assert_eq!(back, doc);
        let rebuilt = Operator::try_from(&back).unwrap();
        let x = v(&[2.0, -3.0]);
        assert_eq!(rebuilt.apply(&x).unwrap(), op.apply(&x).unwrap());
        assert_eq!(rebuilt.declared_alpha(), Some(1.5));
    }

    #[test]
    fn json_schema_shape() {
        let doc: OperatorDoc = serde_json::from_str(
            r#"{"kind":"relaxation","lambda":2,"op":{"kind":"ball","center":[0,0],"radius":1}}"#,
        )
        .unwrap();
        let op = Operator::try_from(&doc).unwrap();
        assert!(op.apply(&v(&[3.0, 4.0])).unwrap().max_abs_diff(&v(&[-1.8, -2.4])) < 1e-15);
        let bad = r#"{"kind":"ball","center":[0,0],"radius":-1}"#;
        assert!(Operator::try_from(&serde_json::from_str::<OperatorDoc>(bad).unwrap()).is_err());
    }
}
