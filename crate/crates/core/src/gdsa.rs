//! The dynamic string-averaging iteration and its monitors.
//!
//! Each step applies the relaxed string-averaging operator of the current
//! plan:
//!
//! ```text
//! x^{k+1} = x^k + λ_k (T_k(x^k) − x^k),   λ_k ∈ [ε, 1 + ρ − ε]
//! ```
//!
//! With a [`PerturbationSchedule`] the operator is applied at
//! `x^k + β_k v^k` instead, which is the bounded-perturbation form of the
//! same recurrence.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::operators::{relax_point, Operator};
use crate::strings::{rho_constant, ControlSchedule};
use crate::vector::{random_unit, Vector};

pub const DEFAULT_EPSILON: f64 = 0.05;

/// Closed range `[ε, 1 + ρ − ε]` of admissible relaxation parameters.
pub fn relaxation_range(epsilon: f64, rho: f64) -> (f64, f64) {
    (epsilon, 1.0 + rho - epsilon)
}

/// How `λ_k` is produced.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LambdaRule {
    Constant(f64),
    /// `λ_k = values[k mod len]`
    Cyclic(Vec<f64>),
    /// `λ_k = base + decay / (k + 1)`
    Formula { base: f64, decay: f64 },
}

/// Relaxation parameters `{λ_k}` together with the margin `ε`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RelaxationSchedule {
    #[serde(default = "default_epsilon")]
    pub epsilon: f64,
    #[serde(flatten)]
    pub rule: LambdaRule,
}

fn default_epsilon() -> f64 {
    DEFAULT_EPSILON
}

impl RelaxationSchedule {
    pub fn constant(epsilon: f64, lambda: f64) -> Self {
        Self { epsilon, rule: LambdaRule::Constant(lambda) }
    }

    pub fn lambda_at(&self, k: usize) -> f64 {
        match &self.rule {
            LambdaRule::Constant(l) => *l,
            LambdaRule::Cyclic(ls) => ls[k % ls.len()],
            LambdaRule::Formula { base, decay } => base + decay / (k as f64 + 1.0),
        }
    }

    /// Checks `ε ∈ (0, 1]` and that every `λ_k` lies in `[ε, 1 + ρ − ε]`.
    pub fn validate(&self, rho: f64) -> Result<()> {
        let (lo, hi) = relaxation_range(self.epsilon, rho);
        if !(self.epsilon > 0.0 && self.epsilon <= 1.0) {
            return Err(Error::InvalidSchedule(format!("epsilon {} outside (0, 1]", self.epsilon)));
        }
        if lo > hi {
            return Err(Error::RelaxationRange { k: 0, lambda: f64::NAN, lo, hi });
        }
        let check = |k: usize, lambda: f64| {
            if lambda.is_finite() && lo <= lambda && lambda <= hi {
                Ok(())
            } else {
                Err(Error::RelaxationRange { k, lambda, lo, hi })
            }
        };
        match &self.rule {
            LambdaRule::Constant(l) => check(0, *l),
            LambdaRule::Cyclic(ls) => {
                if ls.is_empty() {
                    return Err(Error::InvalidSchedule("cyclic lambda list is empty".into()));
                }
                ls.iter().enumerate().try_for_each(|(k, l)| check(k, *l))
            }
            // Monotone in k: the first value and the limit bound every term.
            LambdaRule::Formula { base, decay } => {
                check(0, base + decay)?;
                check(usize::MAX, *base)
            }
        }
    }
}

/// Where perturbation directions `v^k` come from.
#[derive(Clone, Debug, PartialEq)]
pub enum DirectionSource {
    /// Uniform random unit vectors from a seeded generator.
    Random { seed: u64 },
    /// A fixed list, reused cyclically.
    Fixed(Vec<Vector>),
}

/// Bounded perturbations `β_k v^k` with `β_k = β₀ rᵏ`.
#[derive(Clone, Debug, PartialEq)]
pub struct PerturbationSchedule {
    pub beta0: f64,
    pub ratio: f64,
    pub directions: DirectionSource,
}

impl PerturbationSchedule {
    pub fn random(beta0: f64, ratio: f64, seed: u64) -> Self {
        Self { beta0, ratio, directions: DirectionSource::Random { seed } }
    }

    pub fn beta_at(&self, k: usize) -> f64 {
        self.beta0 * self.ratio.powi(k.min(i32::MAX as usize) as i32)
    }

    pub fn validate(&self, dim: usize, eq_tol: f64) -> Result<()> {
        if !(self.beta0 >= 0.0 && self.beta0.is_finite()) {
            return Err(Error::InvalidSchedule(format!("beta0 {} must be >= 0", self.beta0)));
        }
        if !(self.ratio > 0.0 && self.ratio < 1.0) {
            return Err(Error::InvalidSchedule(format!("ratio {} outside (0, 1)", self.ratio)));
        }
        if let DirectionSource::Fixed(list) = &self.directions {
            if list.is_empty() {
                return Err(Error::InvalidSchedule("fixed direction list is empty".into()));
            }
            for d in list {
                d.ensure_dim(dim)?;
                if d.norm() > 1.0 + eq_tol {
                    return Err(Error::InvalidSchedule(format!("direction norm {} exceeds 1", d.norm())));
                }
            }
        }
        Ok(())
    }
}

/// Stopping rule: `window` consecutive step norms `≤ conv_tol`, or `max_iters`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct StopRule {
    pub conv_tol: f64,
    pub window: usize,
    pub max_iters: usize,
}

impl Default for StopRule {
    fn default() -> Self {
        Self { conv_tol: 1e-8, window: 10, max_iters: 100_000 }
    }
}

/// Record of one iteration `k → k + 1`.
#[derive(Clone, Debug, PartialEq)]
pub struct StepRecord {
    pub lambda: f64,
    /// Index into `preamble ++ cycle` of the plan used.
    pub slot: usize,
    /// `‖x^{k+1} − x^k‖`
    pub step_norm: f64,
    /// Perturbation added before the operator, if any.
    pub perturbation: Option<Vector>,
    /// Superiorized runs: `Σ_{j>k} Σ_n β_{j,n}`.
    pub budget_remaining: Option<f64>,
}

/// Iterates and per-step data of one run; `iterates.len() == steps.len() + 1`.
#[derive(Clone, Debug, PartialEq)]
pub struct IterationTrace {
    pub iterates: Vec<Vector>,
    pub steps: Vec<StepRecord>,
    /// Plan signature per schedule slot.
    pub slot_signatures: Vec<String>,
    /// Objective value per iterate (superiorized runs).
    pub phi: Option<Vec<f64>>,
    pub converged: bool,
}

impl IterationTrace {
    pub fn iterations(&self) -> usize {
        self.steps.len()
    }

    pub fn last(&self) -> &Vector {
        self.iterates.last().expect("trace holds at least the initial point")
    }

    pub fn signature(&self, step: usize) -> &str {
        &self.slot_signatures[self.steps[step].slot]
    }
}

/// One relaxed step `x + λ (T(x) − x)`.
pub fn gdsa_step(x: &Vector, plan_op: &Operator, lambda: f64) -> Result<Vector> {
    x.ensure_dim(plan_op.dim())?;
    Ok(relax_point(x, &plan_op.eval(x), lambda))
}

/// Runs the iteration from `x0`, optionally with bounded perturbations.
pub fn run(
    schedule: &ControlSchedule,
    relax: &RelaxationSchedule,
    x0: &Vector,
    perturb: Option<&PerturbationSchedule>,
    stop: &StopRule,
) -> Result<IterationTrace> {
    let dim = schedule.dim();
    let Some(p) = perturb else {
        return drive(schedule, relax, x0, stop, |_, _| Ok(None));
    };
    p.validate(dim, 1e-10)?;
    let mut rng = match &p.directions {
        DirectionSource::Random { seed } => Some(ChaCha8Rng::seed_from_u64(*seed)),
        DirectionSource::Fixed(_) => None,
    };
    drive(schedule, relax, x0, stop, |k, _| {
        let dir = match (&p.directions, rng.as_mut()) {
            (DirectionSource::Fixed(list), _) => list[k % list.len()].clone(),
            (_, Some(rng)) => random_unit(rng, dim),
            _ => unreachable!(),
        };
        Ok(Some((p.beta_at(k) * &dir, None)))
    })
}

/// Shared loop. `perturber(k, y)` returns the perturbation added at step `k`
/// and, optionally, the remaining perturbation budget.
pub(crate) fn drive<F>(
    schedule: &ControlSchedule,
    relax: &RelaxationSchedule,
    x0: &Vector,
    stop: &StopRule,
    mut perturber: F,
) -> Result<IterationTrace>
where
    F: FnMut(usize, &Vector) -> Result<Option<(Vector, Option<f64>)>>,
{
    x0.ensure_dim(schedule.dim())?;
    if !x0.is_finite() {
        return Err(Error::NonFinite("initial point".into()));
    }
    relax.validate(rho_constant(schedule)?)?;

    let slot_signatures = (0..schedule.preamble().len() + schedule.cycle().len())
        .map(|slot| schedule.signature_at(slot).to_string())
        .collect();
    let mut trace = IterationTrace {
        iterates: vec![x0.clone()],
        steps: Vec::new(),
        slot_signatures,
        phi: None,
        converged: false,
    };
    let mut quiet_steps = 0;
    for k in 0..stop.max_iters {
        let x = trace.last();
        let lambda = relax.lambda_at(k);
        let (perturbation, budget_remaining) = match perturber(k, x)? {
            Some((p, b)) => (Some(p), b),
            None => (None, None),
        };
        let base = match &perturbation {
            Some(p) => x + p,
            None => x.clone(),
        };
        let op = schedule.averaged_at(k);
        let next = relax_point(&base, &op.eval(&base), lambda);
        if !next.is_finite() {
            return Err(Error::NonFinite(format!("iterate at step {}", k + 1)));
        }
        let step_norm = next.distance(x);
        trace.steps.push(StepRecord { lambda, slot: schedule.slot(k), step_norm, perturbation, budget_remaining });
        trace.iterates.push(next);
        quiet_steps = if step_norm <= stop.conv_tol { quiet_steps + 1 } else { 0 };
        if quiet_steps >= stop.window {
            trace.converged = true;
            break;
        }
    }
    Ok(trace)
}

/// Fejér-monotonicity check along a trace.
#[derive(Clone, Debug, Serialize)]
pub struct FejerReport {
    /// `ε (1 + ρ − ε)⁻¹`
    pub coefficient: f64,
    /// Per step, the smallest slack over all witnesses.
    pub per_step: Vec<f64>,
    pub min_slack: f64,
    pub worst_step: Option<usize>,
    pub pass: bool,
}

pub fn fejer_coefficient(epsilon: f64, rho: f64) -> f64 {
    epsilon / (1.0 + rho - epsilon)
}

/// Per step, `min_z ‖x^k − z‖² − c‖x^{k+1} − x^k‖² − ‖x^{k+1} − z‖²`.
pub fn fejer_slacks(trace: &IterationTrace, witnesses: &[Vector], coefficient: f64) -> Result<Vec<f64>> {
    if witnesses.is_empty() {
        return Err(Error::Precondition("Fejér monitor needs at least one witness".into()));
    }
    let dim = trace.iterates[0].dim();
    for z in witnesses {
        z.ensure_dim(dim)?;
    }
    Ok(trace
        .iterates
        .windows(2)
        .map(|w| {
            let step_sq = w[1].distance(&w[0]).powi(2);
            witnesses
                .iter()
                .map(|z| w[0].distance(z).powi(2) - coefficient * step_sq - w[1].distance(z).powi(2))
                .fold(f64::INFINITY, f64::min)
        })
        .collect())
}

/// Checks the Fejér inequality against caller-certified points of `C`.
pub fn fejer_monitor(
    trace: &IterationTrace,
    witnesses: &[Vector],
    epsilon: f64,
    rho: f64,
    slack_tol: f64,
) -> Result<FejerReport> {
    let coefficient = fejer_coefficient(epsilon, rho);
    let per_step = fejer_slacks(trace, witnesses, coefficient)?;
    let (worst_step, min_slack) = per_step
        .iter()
        .copied()
        .enumerate()
        .fold((None, f64::INFINITY), |(wi, wv), (i, s)| if s < wv { (Some(i), s) } else { (wi, wv) });
    Ok(FejerReport { coefficient, pass: min_slack >= -slack_tol, per_step, min_slack, worst_step })
}

#[derive(Clone, Debug, Serialize)]
pub struct StepDecayReport {
    pub last_step_norm: Option<f64>,
    pub claimed_converged: bool,
    pub window: usize,
    /// `None` when the trace is shorter than the window.
    pub verdict: Option<bool>,
}

/// Whether the final `window` step norms are all `≤ conv_tol`.
pub fn step_norm_decay(trace: &IterationTrace, window: usize, conv_tol: f64) -> StepDecayReport {
    let norms: Vec<f64> = trace.steps.iter().map(|s| s.step_norm).collect();
    let verdict = (window > 0 && norms.len() >= window)
        .then(|| norms[norms.len() - window..].iter().all(|n| *n <= conv_tol));
    StepDecayReport { last_step_norm: norms.last().copied(), claimed_converged: trace.converged, window, verdict }
}

#[derive(Clone, Debug, Serialize)]
pub struct ColumnSummary {
    pub first: f64,
    pub last: f64,
    /// Largest value among the last `tail` entries.
    pub tail_max: f64,
    /// Fraction of steps on which the column did not increase.
    pub nonincreasing_fraction: f64,
}

impl ColumnSummary {
    fn of(col: &[f64], tail: usize) -> Self {
        let start = col.len().saturating_sub(tail);
        let pairs = col.len().saturating_sub(1).max(1) as f64;
        Self {
            first: col[0],
            last: col[col.len() - 1],
            tail_max: col[start..].iter().copied().fold(0.0, f64::max),
            nonincreasing_fraction: col.windows(2).filter(|w| w[1] <= w[0]).count() as f64 / pairs,
        }
    }
}

/// Residual table of a trace under a list of operators, plus optional oracle distances.
#[derive(Clone, Debug, Serialize)]
pub struct DistanceDecayReport {
    /// `residuals[k][j] = ‖T_j(x^k) − x^k‖`
    pub residuals: Vec<Vec<f64>>,
    pub oracle_distances: Option<Vec<f64>>,
    pub columns: Vec<ColumnSummary>,
    pub oracle_summary: Option<ColumnSummary>,
}

impl DistanceDecayReport {
    /// True when every column (and the oracle column) ends below `tol` on its tail.
    pub fn tail_below(&self, tol: f64) -> bool {
        self.columns.iter().chain(&self.oracle_summary).all(|c| c.tail_max <= tol)
    }
}

/// Finite-dimensional stand-in for bounded regularity and approximate
/// shrinking: tracks how operator residuals and (optionally) the true distance
/// to the target set decay along a trace.
pub fn distance_decay_diagnostic(
    trace: &IterationTrace,
    per_set_projectors: &[Operator],
    oracle_distance: Option<&dyn Fn(&Vector) -> f64>,
    tail: usize,
) -> Result<DistanceDecayReport> {
    let residuals = trace
        .iterates
        .iter()
        .map(|x| per_set_projectors.iter().map(|op| op.residual(x)).collect::<Result<Vec<_>>>())
        .collect::<Result<Vec<_>>>()?;
    let columns = (0..per_set_projectors.len())
        .map(|j| ColumnSummary::of(&residuals.iter().map(|r| r[j]).collect::<Vec<_>>(), tail))
        .collect();
    let oracle_distances: Option<Vec<f64>> = oracle_distance.map(|d| trace.iterates.iter().map(d).collect());
    let oracle_summary = oracle_distances.as_deref().map(|c| ColumnSummary::of(c, tail));
    Ok(DistanceDecayReport { residuals, oracle_distances, columns, oracle_summary })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::strings::StringPlan;

    fn v(e: &[f64]) -> Vector {
        Vector::from_slice(e).unwrap()
    }

    fn two_intervals() -> ControlSchedule {
        let ops = vec![
            Operator::box_proj(v(&[-3.0]), v(&[-1.0])).unwrap(),
            Operator::box_proj(v(&[1.0]), v(&[3.0])).unwrap(),
        ];
        ControlSchedule::constant(ops, StringPlan::simultaneous(vec![0.5, 0.5]).unwrap()).unwrap()
    }

    fn unit_relax() -> RelaxationSchedule {
        RelaxationSchedule::constant(0.05, 1.0)
    }

    #[test]
    fn step_examples() {
        let sched = two_intervals();
        let t = sched.averaged_at(0);
        let z = v(&[0.0]);
        assert_eq!(gdsa_step(&z, t, 1.7).unwrap(), z);
        let x = v(&[5.0]);
        assert_eq!(gdsa_step(&x, t, 1.0).unwrap(), t.apply(&x).unwrap());
        assert_eq!(gdsa_step(&v(&[0.5]), t, 1.0).unwrap(), v(&[0.0]));
        assert!(gdsa_step(&v(&[0.5, 1.0]), t, 1.0).is_err());
    }

    #[test]
    fn run_converges_to_midpoint() {
        let trace = run(&two_intervals(), &unit_relax(), &v(&[5.0]), None, &StopRule::default()).unwrap();
        assert!(trace.converged);
        assert!(trace.last()[0].abs() <= 1e-8);
        assert_eq!(trace.iterates.len(), trace.steps.len() + 1);
    }

    #[test]
    fn run_from_fixed_point_stops_after_window() {
        let stop = StopRule::default();
        let trace = run(&two_intervals(), &unit_relax(), &v(&[0.0]), None, &stop).unwrap();
        assert!(trace.converged);
        assert_eq!(trace.steps.len(), stop.window);
        assert!(trace.steps.iter().all(|s| s.step_norm <= 1e-10));
    }

    #[test]
    fn perturbed_run_keeps_the_limit() {
        let clean = run(&two_intervals(), &unit_relax(), &v(&[5.0]), None, &StopRule::default()).unwrap();
        let p = PerturbationSchedule::random(0.5, 0.5, 17);
        let noisy = run(&two_intervals(), &unit_relax(), &v(&[5.0]), Some(&p), &StopRule::default()).unwrap();
        assert!(noisy.converged);
        assert!(noisy.last().distance(clean.last()) <= 1e-8);
        assert!(noisy.steps.iter().all(|s| s.perturbation.is_some()));
    }

    #[test]
    fn relaxation_outside_range_is_rejected() {
        // All projections: rho = 1, range [0.05, 1.95].
        let bad = RelaxationSchedule::constant(0.05, 2.0);
        let err = run(&two_intervals(), &bad, &v(&[5.0]), None, &StopRule::default()).unwrap_err();
        assert!(matches!(err, Error::RelaxationRange { .. }));
        let cyc = RelaxationSchedule { epsilon: 0.05, rule: LambdaRule::Cyclic(vec![1.0, 0.01]) };
        assert!(matches!(cyc.validate(1.0), Err(Error::RelaxationRange { k: 1, .. })));
        let f = RelaxationSchedule { epsilon: 0.05, rule: LambdaRule::Formula { base: 1.0, decay: 0.9 } };
        assert!(f.validate(1.0).is_ok());
        assert!(f.validate(0.0).is_err());
        assert!(RelaxationSchedule::constant(0.0, 1.0).validate(1.0).is_err());
    }

    #[test]
    fn range_law() {
        assert_eq!(relaxation_range(0.05, 1.0), (0.05, 2.0 - 0.05));
        assert_eq!(relaxation_range(0.05, 0.0), (0.05, 1.0 - 0.05));
    }

    #[test]
    fn non_finite_iterate_aborts() {
        let ops = vec![Operator::hyperplane(v(&[1e-160]), 1e300).unwrap()];
        let sched = ControlSchedule::constant(ops, StringPlan::single(vec![1]).unwrap()).unwrap();
        let err = run(&sched, &unit_relax(), &v(&[0.0]), None, &StopRule::default()).unwrap_err();
        assert!(matches!(err, Error::NonFinite(_)));
    }

    #[test]
    fn fejer_examples() {
        assert_eq!(fejer_coefficient(0.1, 1.0), 0.1 / 1.9);
        let sched = two_intervals();
        let fixed = run(&sched, &unit_relax(), &v(&[0.0]), None, &StopRule::default()).unwrap();
        let r = fejer_monitor(&fixed, &[v(&[0.0])], 0.05, 1.0, 1e-12).unwrap();
        assert!(r.pass && r.min_slack >= 0.0);

        let trace = run(&sched, &unit_relax(), &v(&[7.3]), None, &StopRule::default()).unwrap();
        assert!(fejer_monitor(&trace, &[v(&[0.0])], 0.05, 1.0, 1e-12).unwrap().pass);

        // From 0.5 the first step lands on 0; push it 1.0 away instead.
        let mut corrupted = run(&sched, &unit_relax(), &v(&[0.5]), None, &StopRule::default()).unwrap();
        let moved = corrupted.iterates[1].axpy(1.0, &v(&[1.0]));
        corrupted.iterates[1] = moved;
        let r = fejer_monitor(&corrupted, &[v(&[0.0])], 0.05, 1.0, 1e-12).unwrap();
        assert!(!r.pass);
        assert!(r.min_slack < 0.0);
        assert_eq!(r.worst_step, Some(0));
        assert!(fejer_monitor(&trace, &[], 0.05, 1.0, 1e-12).is_err());
    }

    #[test]
    fn step_norm_decay_examples() {
        let sched = two_intervals();
        let converged = run(&sched, &unit_relax(), &v(&[5.0]), None, &StopRule::default()).unwrap();
        assert_eq!(step_norm_decay(&converged, 10, 1e-8).verdict, Some(true));
        let one = StopRule { max_iters: 1, ..StopRule::default() };
        let short = run(&sched, &unit_relax(), &v(&[50.0]), None, &one).unwrap();
        let r = step_norm_decay(&short, 10, 1e-8);
        assert_eq!(r.verdict, None);
        assert!(r.last_step_norm.unwrap() > 1.0);
        let fixed = run(&sched, &unit_relax(), &v(&[0.0]), None, &StopRule::default()).unwrap();
        let r = step_norm_decay(&fixed, 10, 1e-8);
        assert_eq!(r.verdict, Some(true));
        assert_eq!(r.last_step_norm, Some(0.0));
    }

    #[test]
    fn distance_decay_examples() {
        let sched = two_intervals();
        let trace = run(&sched, &unit_relax(), &v(&[-10.0]), None, &StopRule::default()).unwrap();
        let ops = vec![sched.averaged_at(0).clone()];
        let oracle = |x: &Vector| x[0].abs();
        let r = distance_decay_diagnostic(&trace, &ops, Some(&oracle), 10).unwrap();
        assert!(r.tail_below(1e-8));
        assert_eq!(r.residuals.len(), trace.iterates.len());

        let outside = IterationTrace {
            iterates: vec![v(&[10.0]), v(&[-10.0])],
            steps: vec![StepRecord { lambda: 1.0, slot: 0, step_norm: 20.0, perturbation: None, budget_remaining: None }],
            slot_signatures: vec![String::new()],
            phi: None,
            converged: false,
        };
        let r = distance_decay_diagnostic(&outside, sched.operators(), None, 10).unwrap();
        assert!(r.residuals.iter().all(|row| row.iter().any(|x| *x > 0.0)));
    }

    #[test]
    fn projection_residual_vanishing_forces_distance_vanishing() {
        // Approximate shrinking of a metric projection: the residual equals the distance.
        let ball = Operator::ball(v(&[1.0, 1.0]), 0.5).unwrap();
        let sched = ControlSchedule::constant(vec![ball.clone()], StringPlan::single(vec![1]).unwrap()).unwrap();
        let relax = RelaxationSchedule::constant(0.05, 0.3);
        let trace = run(&sched, &relax, &v(&[6.0, -2.0]), None, &StopRule::default()).unwrap();
        let oracle = |x: &Vector| (x.distance(&v(&[1.0, 1.0])) - 0.5).max(0.0);
        let r = distance_decay_diagnostic(&trace, &[ball], Some(&oracle), 10).unwrap();
        for (row, d) in r.residuals.iter().zip(r.oracle_distances.as_ref().unwrap()) {
            assert!((row[0] - d).abs() <= 1e-12);
        }
        assert!(r.tail_below(1e-7));
    }

    #[test]
    fn deterministic_perturbed_runs() {
        let p = PerturbationSchedule::random(0.5, 0.9, 99);
        let a = run(&two_intervals(), &unit_relax(), &v(&[5.0]), Some(&p), &StopRule::default()).unwrap();
        let b = run(&two_intervals(), &unit_relax(), &v(&[5.0]), Some(&p), &StopRule::default()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn perturbation_validation() {
        assert!(PerturbationSchedule::random(0.5, 1.0, 0).validate(1, 1e-10).is_err());
        assert!(PerturbationSchedule::random(-0.5, 0.5, 0).validate(1, 1e-10).is_err());
        let long = PerturbationSchedule { beta0: 1.0, ratio: 0.5, directions: DirectionSource::Fixed(vec![v(&[2.0])]) };
        assert!(long.validate(1, 1e-10).is_err());
    }
}
