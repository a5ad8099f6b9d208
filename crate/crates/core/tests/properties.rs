//! Property tests for the algebraic and operator-class invariants.

use gdsa::harness::problem;
use gdsa::operators::{check_nonexpansive, check_rho_fne, rho_from_alpha};
use gdsa::strings::{check_admissibility, rho_constant};
use gdsa::{averaged_operator, propagate_alpha, ControlSchedule, IndexString, Operator, SampleSpec, StringPlan, Tolerances, Vector};
use proptest::prelude::*;

fn vec_strategy(dim: usize) -> impl Strategy<Value = Vector> {
    prop::collection::vec(-10.0..10.0f64, dim).prop_map(|e| Vector::new(e).unwrap())
}

fn pair(dim: usize) -> impl Strategy<Value = (Vector, Vector)> {
    (vec_strategy(dim), vec_strategy(dim))
}

/// A random primitive projection in `ℝ³`.
fn primitive() -> impl Strategy<Value = Operator> {
    let normal = prop::collection::vec(-3.0..3.0f64, 3)
        .prop_filter("nonzero normal", |a| a.iter().map(|x| x * x).sum::<f64>() > 1e-2)
        .prop_map(|a| Vector::new(a).unwrap());
    prop_oneof![
        (normal.clone(), -5.0..5.0f64).prop_map(|(a, b)| Operator::halfspace(a, b).unwrap()),
        (normal, -5.0..5.0f64).prop_map(|(a, b)| Operator::hyperplane(a, b).unwrap()),
        (vec_strategy(3), 0.1..4.0f64).prop_map(|(c, r)| Operator::ball(c, r).unwrap()),
        (vec_strategy(3), prop::collection::vec(0.0..4.0f64, 3)).prop_map(|(lo, w)| {
            let hi: Vec<f64> = lo.as_slice().iter().zip(&w).map(|(l, d)| l + d).collect();
            Operator::box_proj(lo, Vector::new(hi).unwrap()).unwrap()
        }),
    ]
}

fn samples(seed: u64) -> SampleSpec {
    SampleSpec::new(seed, 200).with_half_width(8.0)
}

const TOL: f64 = 1e-9;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn cauchy_schwarz((x, y) in pair(4)) {
        prop_assert!(x.inner(&y).unwrap().abs() <= x.norm() * y.norm() * (1.0 + 1e-12) + 1e-12);
    }

    #[test]
    fn parallelogram_law((x, y) in pair(4)) {
        let lhs = (&x + &y).norm_squared() + (&x - &y).norm_squared();
        let rhs = 2.0 * x.norm_squared() + 2.0 * y.norm_squared();
        prop_assert!((lhs - rhs).abs() <= 1e-10 * rhs.max(1.0));
    }

    #[test]
    fn distance_is_symmetric((x, y) in pair(3)) {
        prop_assert_eq!(x.distance(&y), y.distance(&x));
    }

    #[test]
    fn relaxation_endpoints(op in primitive(), x in vec_strategy(3)) {
        let one = Operator::relax(op.clone(), 1.0).unwrap();
        prop_assert_eq!(one.apply(&x).unwrap(), op.apply(&x).unwrap());
        let zero = Operator::relax(op, 0.0).unwrap();
        prop_assert_eq!(zero.apply(&x).unwrap(), x);
    }

    #[test]
    fn double_relaxation_multiplies(op in primitive(), x in vec_strategy(3), a in 0.1..1.4f64, b in 0.1..1.4f64) {
        let twice = Operator::relax(Operator::relax(op.clone(), a).unwrap(), b).unwrap();
        let once = Operator::relax(op, a * b).unwrap();
        let d = twice.apply(&x).unwrap().max_abs_diff(&once.apply(&x).unwrap());
        prop_assert!(d <= 1e-10 * (1.0 + x.norm()), "difference {}", d);
    }

    #[test]
    fn relaxation_preserves_fixed_points(op in primitive(), x in vec_strategy(3), lambda in 0.0..2.0f64) {
        let z = op.apply(&x).unwrap();
        let relaxed = Operator::relax(op, lambda).unwrap();
        prop_assert!(relaxed.residual(&z).unwrap() <= 1e-12 * (1.0 + z.norm()));
    }

    #[test]
    fn relaxed_projection_class(op in primitive(), idx in 0usize..4, seed in any::<u64>()) {
        let lambda = [0.5, 1.0, 1.5, 2.0][idx];
        let relaxed = Operator::relax(op, lambda).unwrap();
        let alpha = propagate_alpha(&relaxed).unwrap();
        prop_assert_eq!(alpha, lambda);
        let tol = Tolerances { slack_tol: TOL, ..Tolerances::default() };
        prop_assert!(check_nonexpansive(&relaxed, &samples(seed), &tol).unwrap().pass);
        let r = check_rho_fne(&relaxed, rho_from_alpha(alpha), &samples(seed), &tol).unwrap();
        prop_assert!(r.pass, "violation {}", r.max_violation);
    }

    #[test]
    fn compositions_meet_propagated_rho(ops in prop::collection::vec(primitive(), 2..4), seed in any::<u64>()) {
        let comp = Operator::composition(ops).unwrap();
        let rho = rho_from_alpha(propagate_alpha(&comp).unwrap());
        let tol = Tolerances { slack_tol: TOL, ..Tolerances::default() };
        let r = check_rho_fne(&comp, rho, &samples(seed), &tol).unwrap();
        prop_assert!(r.pass, "violation {}", r.max_violation);
    }

    #[test]
    fn relaxed_step_of_averaged_operator(ops in prop::collection::vec(primitive(), 2..4), lambda in 0.05..1.4f64, seed in any::<u64>()) {
        // Relaxing an operator in class ρ_U by λ lands in class (1 + ρ_U − λ)/λ.
        let m = ops.len();
        let seq = StringPlan::new(vec![IndexString::new((1..=m).collect()).unwrap()], vec![1.0]).unwrap();
        let sched = ControlSchedule::constant(ops, seq).unwrap();
        let rho_u = rho_constant(&sched).unwrap();
        prop_assume!(lambda < 1.0 + rho_u);
        let relaxed = Operator::relax(sched.averaged_at(0).clone(), lambda).unwrap();
        let rho = (1.0 + rho_u - lambda) / lambda;
        let tol = Tolerances { slack_tol: TOL, ..Tolerances::default() };
        let r = check_rho_fne(&relaxed, rho, &samples(seed), &tol).unwrap();
        prop_assert!(r.pass, "violation {}", r.max_violation);
    }

    #[test]
    fn averaged_operator_meets_rho_constant(ops in prop::collection::vec(primitive(), 3..4), seed in any::<u64>()) {
        let plan = StringPlan::new(
            vec![IndexString::new(vec![1, 2]).unwrap(), IndexString::new(vec![3]).unwrap()],
            vec![0.25, 0.75],
        ).unwrap();
        let avg = averaged_operator(&plan, &ops).unwrap();
        let sched = ControlSchedule::constant(ops, plan).unwrap();
        let rho = rho_constant(&sched).unwrap();
        let tol = Tolerances { slack_tol: TOL, ..Tolerances::default() };
        let r = check_rho_fne(&avg, rho, &samples(seed), &tol).unwrap();
        prop_assert!(r.pass, "violation {}", r.max_violation);
    }

    #[test]
    fn cycles_without_preamble_are_admissible(cycle_len in 1usize..6, picks in prop::collection::vec(0usize..3, 6)) {
        let p = problem::two_balls();
        let plans = [
            StringPlan::single(vec![1]).unwrap(),
            StringPlan::single(vec![2]).unwrap(),
            StringPlan::simultaneous(vec![0.5, 0.5]).unwrap(),
        ];
        let cycle = picks[..cycle_len].iter().map(|i| plans[*i].clone()).collect();
        let sched = ControlSchedule::new(p.projectors().to_vec(), Vec::new(), cycle).unwrap();
        let rep = check_admissibility(&sched);
        prop_assert!(rep.admissible && rep.violating_index.is_none());
        prop_assert!(rep.gap_bounds.values().all(|g| *g <= cycle_len));
    }

    #[test]
    fn rho_constant_shrinks_with_string_length(len in 1usize..6) {
        let p = problem::two_balls();
        let indices: Vec<usize> = (0..len).map(|i| 1 + i % 2).collect();
        // Strings may revisit an index.
        let sched = |n: Vec<usize>| {
            ControlSchedule::constant(p.projectors().to_vec(), StringPlan::new(vec![IndexString::new(n).unwrap()], vec![1.0]).unwrap()).unwrap()
        };
        let short = rho_constant(&sched(indices.clone())).unwrap();
        let mut longer = indices;
        longer.push(1 + len % 2);
        prop_assert!(rho_constant(&sched(longer)).unwrap() <= short);
    }
}
