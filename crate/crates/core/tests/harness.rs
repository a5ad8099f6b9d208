use gdsa::harness::oracle::{fixed_point_oracle, proximity_argmin_oracle, proximity_value, GridSpec};
use gdsa::harness::persist::write_trace_csv;
use gdsa::harness::problem::{self, ProblemInstance};
use gdsa::{run, ControlSchedule, PerturbationSchedule, RelaxationSchedule, SampleSpec, StopRule, StringPlan, Vector};

const CONV_TOL: f64 = 1e-8;

fn simultaneous(p: &ProblemInstance) -> ControlSchedule {
    ControlSchedule::constant(p.projectors().to_vec(), StringPlan::simultaneous(p.equal_weights()).unwrap()).unwrap()
}

fn inconsistent() -> Vec<(ProblemInstance, Vector)> {
    vec![
        (problem::two_intervals(), Vector::from_slice(&[7.3]).unwrap()),
        (problem::two_balls(), Vector::from_slice(&[3.0, -2.0]).unwrap()),
    ]
}

#[test]
fn oracles_agree_on_simultaneous_plans() {
    for (p, x0) in inconsistent() {
        let w = p.equal_weights();
        let grid = GridSpec::around(&p, 1.0, 41).unwrap();
        let argmin = proximity_argmin_oracle(&p, &w, &grid, CONV_TOL).unwrap();
        let fp = fixed_point_oracle(&p.simultaneous_operator(&w).unwrap(), &x0, CONV_TOL).unwrap();
        assert!(argmin.max_abs_diff(&fp) <= 10.0 * CONV_TOL, "{}: {argmin:?} vs {fp:?}", p.name);
    }
}

#[test]
fn gdsa_limit_beats_sampled_points() {
    for (p, x0) in inconsistent() {
        let w = p.equal_weights();
        let t = run(&simultaneous(&p), &RelaxationSchedule::constant(0.05, 1.0), &x0, None, &StopRule::default())
            .unwrap();
        assert!(t.converged);
        let at_limit = proximity_value(&p, &w, t.last()).unwrap();
        for x in SampleSpec::new(5, 1000).points(p.dim()).unwrap() {
            let fx = proximity_value(&p, &w, &x).unwrap();
            assert!(at_limit <= fx, "{}: f(limit) = {at_limit} > f({x:?}) = {fx}", p.name);
        }
    }
}

#[test]
fn identical_seeds_give_identical_traces() {
    let p = problem::two_balls();
    let sched = simultaneous(&p);
    let relax = RelaxationSchedule::constant(0.05, 1.2);
    let x0 = Vector::from_slice(&[3.0, -2.0]).unwrap();
    let csv = |seed| {
        let pert = PerturbationSchedule::random(0.5, 0.9, seed);
        let t = run(&sched, &relax, &x0, Some(&pert), &StopRule::default()).unwrap();
        let mut buf = Vec::new();
        write_trace_csv(&t, None, &mut buf).unwrap();
        buf
    };
    assert_eq!(csv(3), csv(3));
    assert_ne!(csv(3), csv(4));
}

#[test]
fn superiorized_limit_stays_feasible() {
    use gdsa::superiorize::superiorized_run;
    use gdsa::{Objective, SuperiorizationSchedule, Tolerances};
    let p = problem::overlapping_balls();
    let t = superiorized_run(
        &simultaneous(&p),
        &RelaxationSchedule::constant(0.05, 1.0),
        &Objective::L1Norm,
        &SuperiorizationSchedule::default(),
        &Vector::from_slice(&[2.0, 2.0]).unwrap(),
        &StopRule::default(),
        &Tolerances::default(),
    )
    .unwrap();
    assert!(t.converged);
    assert!(p.membership_residual(t.last()).unwrap() <= 1e-7);
    let phi = t.phi.as_ref().unwrap();
    assert!(phi.last().unwrap() < &phi[0]);
}
