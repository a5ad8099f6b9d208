//! Shared fixtures for the criterion benchmarks.

use gdsa::harness::problem;
use gdsa::{ControlSchedule, IndexString, StringPlan, Vector};

/// The simultaneous two-ball schedule used across benchmarks.
pub fn two_ball_schedule() -> ControlSchedule {
    let p = problem::two_balls();
    ControlSchedule::constant(p.projectors().to_vec(), StringPlan::simultaneous(p.equal_weights()).unwrap()).unwrap()
}

/// Alternating block-sequential plans on the overlapping-balls problem.
pub fn alternating_schedule() -> ControlSchedule {
    let p = problem::overlapping_balls();
    let seq = StringPlan::new(vec![IndexString::new(vec![1, 2]).unwrap()], vec![1.0]).unwrap();
    let sim = StringPlan::simultaneous(p.equal_weights()).unwrap();
    ControlSchedule::new(p.projectors().to_vec(), Vec::new(), vec![seq, sim]).unwrap()
}

pub fn start_point() -> Vector {
    Vector::from_slice(&[3.0, -2.5]).unwrap()
}
