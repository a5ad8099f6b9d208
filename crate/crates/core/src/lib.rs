//! General dynamic string-averaging (GDSA) projection methods.
//!
//! The crate implements the relaxed string-averaging fixed-point iteration
//! for convex feasibility problems in `ℝⁿ`, its bounded-perturbation form,
//! and its superiorized version, together with sampled verifiers for the
//! operator inequalities the method relies on.
//!
//! | Module | Purpose |
//! |--------|---------|
//! | [`vector`] | dense vectors, tolerances, seeded sampling |
//! | [`operators`] | projection expressions and operator-class checks |
//! | [`strings`] | strings, string-averaging operators, schedules, admissibility |
//! | [`gdsa`] | the iteration, perturbations, Fejér and decay monitors |
//! | [`superiorize`] | objectives, superiorized iteration, strict-Fejér monitor |
//! | [`harness`] | problem builders, oracles, config and persistence |

pub mod error;
pub mod gdsa;
pub mod harness;
pub mod operators;
pub mod strings;
pub mod superiorize;
pub mod vector;

pub use error::{Error, Result};
pub use gdsa::{
    gdsa_step, run, IterationTrace, LambdaRule, PerturbationSchedule, RelaxationSchedule, StepRecord, StopRule,
};
pub use operators::{propagate_alpha, FixedPointWitness, Operator, OperatorKind};
pub use strings::{averaged_operator, rho_constant, ControlSchedule, IndexString, StringPlan};
pub use superiorize::{Objective, SuperiorizationSchedule};
pub use vector::{SampleSpec, Tolerances, Vector};
