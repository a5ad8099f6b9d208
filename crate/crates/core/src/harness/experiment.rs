//! Executing, verifying and certifying a configured experiment.

use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::gdsa::{fejer_monitor, fejer_slacks, fejer_coefficient, run, step_norm_decay, DirectionSource, IterationTrace, PerturbationSchedule};
use crate::operators::{
    check_cutter, check_nonexpansive, check_rho_fne, propagate_alpha, rho_from_alpha, FixedPointWitness, Operator,
};
use crate::strings::{check_admissibility, rho_constant, ControlSchedule, StringPlan};
use crate::superiorize::{classify_alternative, constrained_min_oracle, superiorized_run, ConvexObjective};
use crate::vector::{SampleSpec, Vector};

use super::config::{config_hash, ExperimentConfig};
use super::oracle::{fixed_point_oracle, proximity_argmin_oracle, GridSpec, MAX_ORACLE_DIM};
use super::persist::{write_summary, write_trace_csv, RunSummary};
use super::problem::ProblemInstance;

/// Iterates after `k0` required before a strict-Fejér verdict counts.
pub const MIN_STRICT_TAIL: usize = 10;

/// A validated experiment with oracle-certified points of the target set.
#[derive(Clone, Debug)]
pub struct Experiment {
    pub config: ExperimentConfig,
    pub problem: ProblemInstance,
    pub schedule: ControlSchedule,
    pub weights: Vec<f64>,
    pub grid: GridSpec,
    pub hash: String,
    /// Points fixed by every averaged operator of the schedule.
    pub witnesses: Vec<Vector>,
    /// Why `witnesses` is empty, when it is.
    pub witness_note: Option<String>,
}

/// Result of [`Experiment::execute`].
#[derive(Clone, Debug)]
pub struct RunOutcome {
    pub trace: IterationTrace,
    pub fejer_slacks: Option<Vec<f64>>,
    pub summary: RunSummary,
}

#[derive(Clone, Debug, Serialize)]
pub struct CheckLine {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct VerifyReport {
    pub checks: Vec<CheckLine>,
}

impl VerifyReport {
    pub fn pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    fn push(&mut self, name: impl Into<String>, pass: bool, detail: impl Into<String>) {
        self.checks.push(CheckLine { name: name.into(), pass, detail: detail.into() });
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct OracleReport {
    pub problem: String,
    pub consistent: Option<bool>,
    pub c_witnesses: Vec<Vec<f64>>,
    /// Largest per-set residual at each witness.
    pub witness_residuals: Vec<f64>,
    pub proximity_argmin: Vec<f64>,
    /// Picard limit of the simultaneous averaged operator from `x0`.
    pub fixed_point: Option<Vec<f64>>,
    pub cmin: Option<Vec<f64>>,
    pub notes: Vec<String>,
}

impl Experiment {
    pub fn new(config: ExperimentConfig) -> Result<Self> {
        config.tolerances.validate()?;
        let problem = config.problem.build()?;
        config.x0.ensure_dim(problem.dim())?;
        let weights = config.weights.clone().unwrap_or_else(|| problem.equal_weights());
        let schedule = match &config.schedule {
            Some(doc) => doc.build(Some(problem.projectors()))?,
            None => ControlSchedule::constant(problem.projectors().to_vec(), StringPlan::simultaneous(weights.clone())?)?,
        };
        if schedule.dim() != problem.dim() {
            return Err(Error::DimensionMismatch { expected: problem.dim(), found: schedule.dim() });
        }
        config.relax.validate(rho_constant(&schedule)?)?;
        if let Some(p) = &config.perturb {
            perturbation(p, config.seed).validate(problem.dim(), config.tolerances.eq_tol)?;
        }
        if let Some(s) = &config.superiorize {
            s.schedule.validate()?;
            s.objective.validate(problem.dim())?;
        }
        let grid = GridSpec::around(&problem, config.grid.margin, config.grid.points)?;
        let hash = config_hash(&config)?;
        let mut exp = Self {
            config,
            problem,
            schedule,
            weights,
            grid,
            hash,
            witnesses: Vec::new(),
            witness_note: None,
        };
        exp.certify();
        Ok(exp)
    }

    fn certify(&mut self) {
        if self.problem.dim() > MAX_ORACLE_DIM {
            self.witness_note = Some(format!("no oracle witnesses above dimension {MAX_ORACLE_DIM}"));
            return;
        }
        let tol = &self.config.tolerances;
        match self.problem.clone().certify(&self.weights, &self.grid, tol.conv_tol, tol.eq_tol) {
            Ok(p) => {
                let fixed_by_all = |z: &Vector| {
                    self.schedule
                        .averaged_operators()
                        .iter()
                        .all(|op| op.residual(z).is_ok_and(|r| r <= tol.eq_tol))
                };
                self.witnesses = p.known_c_points.iter().filter(|z| fixed_by_all(z)).cloned().collect();
                if self.witnesses.is_empty() {
                    self.witness_note = Some("oracle point is not fixed by every plan operator".into());
                }
                self.problem = p;
            }
            Err(e) => self.witness_note = Some(format!("oracle certification failed: {e}")),
        }
    }

    pub fn name(&self) -> String {
        self.config.name.clone().unwrap_or_else(|| self.problem.name.clone())
    }

    /// `ρ` of the schedule.
    pub fn rho(&self) -> Result<f64> {
        rho_constant(&self.schedule)
    }

    /// Runs the configured iteration (superiorized, perturbed or plain).
    pub fn execute(&self) -> Result<RunOutcome> {
        let cfg = &self.config;
        let trace = match (&cfg.superiorize, &cfg.perturb) {
            (Some(s), _) => superiorized_run(
                &self.schedule,
                &cfg.relax,
                &s.objective,
                &s.schedule,
                &cfg.x0,
                &cfg.stop,
                &cfg.tolerances,
            )?,
            (None, Some(p)) => run(&self.schedule, &cfg.relax, &cfg.x0, Some(&perturbation(p, cfg.seed)), &cfg.stop)?,
            (None, None) => run(&self.schedule, &cfg.relax, &cfg.x0, None, &cfg.stop)?,
        };
        self.outcome(trace)
    }

    fn outcome(&self, trace: IterationTrace) -> Result<RunOutcome> {
        let fejer_slacks = if self.witnesses.is_empty() {
            None
        } else {
            let c = fejer_coefficient(self.config.relax.epsilon, self.rho()?);
            Some(fejer_slacks(&trace, &self.witnesses, c)?)
        };
        let last = trace.last();
        let final_residuals =
            self.problem.projectors().iter().map(|p| p.residual(last)).collect::<Result<Vec<_>>>()?;
        let summary = RunSummary {
            name: self.name(),
            config_hash: self.hash.clone(),
            seed: self.config.seed,
            iters: trace.iterations(),
            converged: trace.converged,
            final_point: last.as_slice().to_vec(),
            final_residuals,
            fejer_min_slack: fejer_slacks.as_ref().map(|s| s.iter().copied().fold(f64::INFINITY, f64::min)),
            phi_final: trace.phi.as_ref().and_then(|p| p.last().copied()),
        };
        Ok(RunOutcome { trace, fejer_slacks, summary })
    }

    /// Output directory: `override_dir`, else the config's, else the working directory.
    pub fn output_paths(&self, override_dir: Option<&Path>) -> (PathBuf, PathBuf) {
        let dir = override_dir
            .map(Path::to_path_buf)
            .or_else(|| self.config.output.dir.clone())
            .unwrap_or_else(|| PathBuf::from("."));
        let stem = self.config.output.stem.clone().unwrap_or_else(|| self.name());
        (dir.join(format!("{stem}.csv")), dir.join(format!("{stem}.summary.json")))
    }

    /// Writes the trace CSV and summary JSON; returns their paths.
    pub fn write_outputs(&self, outcome: &RunOutcome, override_dir: Option<&Path>) -> Result<(PathBuf, PathBuf)> {
        let (csv_path, json_path) = self.output_paths(override_dir);
        if let Some(dir) = csv_path.parent() {
            fs::create_dir_all(dir)?;
        }
        write_trace_csv(&outcome.trace, outcome.fejer_slacks.as_deref(), BufWriter::new(File::create(&csv_path)?))?;
        write_summary(&outcome.summary, BufWriter::new(File::create(&json_path)?))?;
        Ok((csv_path, json_path))
    }

    /// Sampler covering the oracle grid box.
    fn sampler(&self) -> SampleSpec {
        let n = self.problem.dim();
        let center: Vec<f64> = (0..n).map(|i| 0.5 * (self.grid.lo[i] + self.grid.hi[i])).collect();
        let half = (0..n).map(|i| 0.5 * (self.grid.hi[i] - self.grid.lo[i])).fold(0.0, f64::max);
        SampleSpec::new(self.config.seed, self.config.samples)
            .with_half_width(half)
            .with_center(Vector::new(center).expect("finite grid"))
    }

    /// Operator property suite, relaxation range, admissibility, Fejér and
    /// decay monitors, and (for superiorized runs) the strict-Fejér dichotomy.
    pub fn verify(&self) -> Result<VerifyReport> {
        let tol = &self.config.tolerances;
        let spec = self.sampler();
        let mut report = VerifyReport::default();

        let mut ops: Vec<(String, Operator, Option<FixedPointWitness>)> = Vec::new();
        for (i, p) in self.problem.projectors().iter().enumerate() {
            let w = FixedPointWitness::from_images(p, &spec, tol.eq_tol)?;
            ops.push((format!("P{}", i + 1), p.clone(), Some(w)));
        }
        let slots = self.schedule.preamble().len() + self.schedule.cycle().len();
        for slot in 0..slots {
            let op = self.schedule.averaged_at(slot);
            let w = (!self.witnesses.is_empty()).then(|| FixedPointWitness::trusted(self.witnesses.clone()));
            ops.push((format!("T[{}]", self.schedule.signature_at(slot)), op.clone(), w));
        }
        for (name, op, witness) in &ops {
            let ne = check_nonexpansive(op, &spec, tol)?;
            report.push(format!("{name} nonexpansive"), ne.pass, format!("max violation {:e}", ne.max_violation));
            let alpha = propagate_alpha(op)?;
            let rho = rho_from_alpha(alpha);
            let fne = check_rho_fne(op, rho, &spec, tol)?;
            report.push(format!("{name} {rho}-FNE"), fne.pass, format!("max violation {:e}", fne.max_violation));
            match witness {
                // Cutters are the 1-relaxed FNE operators; beyond that the inequality is not claimed.
                Some(w) if alpha <= 1.0 => {
                    let cut = check_cutter(op, w, &spec, tol)?;
                    report.push(format!("{name} cutter"), cut.pass, format!("max violation {:e}", cut.max_violation));
                }
                _ => {}
            }
        }

        let rho = self.rho()?;
        report.push("relaxation range", self.config.relax.validate(rho).is_ok(), format!("rho = {rho}"));

        let adm = check_admissibility(&self.schedule);
        report.push(
            "admissibility",
            adm.admissible || adm.tail_admissible,
            format!("admissible {}, tail-admissible from k0 = {}", adm.admissible, adm.k0),
        );

        let cfg = &self.config;
        let plain = run(&self.schedule, &cfg.relax, &cfg.x0, None, &cfg.stop)?;
        if self.witnesses.is_empty() {
            report.push(
                "fejer monitor",
                true,
                format!("skipped: {}", self.witness_note.as_deref().unwrap_or("no witnesses")),
            );
        } else {
            let f = fejer_monitor(&plain, &self.witnesses, cfg.relax.epsilon, rho, tol.slack_tol)?;
            report.push("fejer monitor", f.pass, format!("min slack {:e}", f.min_slack));
        }
        let decay = step_norm_decay(&plain, cfg.stop.window, cfg.stop.conv_tol);
        report.push(
            "step norm decay",
            decay.verdict == Some(true),
            format!("{} iterations, last step {:e}", plain.iterations(), decay.last_step_norm.unwrap_or(0.0)),
        );

        if let Some(s) = &cfg.superiorize {
            let sup = superiorized_run(&self.schedule, &cfg.relax, &s.objective, &s.schedule, &cfg.x0, &cfg.stop, tol)?;
            if self.problem.dim() <= MAX_ORACLE_DIM {
                let cmin = constrained_min_oracle(&self.problem, &self.weights, &s.objective, &self.grid, cfg.stop.conv_tol)?;
                let d = classify_alternative(&sup, &cmin, 100.0 * cfg.stop.conv_tol, tol.slack_tol, MIN_STRICT_TAIL)?;
                report.push(
                    "strict fejer dichotomy",
                    d.exactly_one(),
                    format!("limit distance {:e}, alternative {:?}", d.limit_distance, d.alternative),
                );
            }
        }
        Ok(report)
    }

    /// Oracle outputs for the configured problem.
    pub fn oracle(&self) -> Result<OracleReport> {
        let conv = self.config.stop.conv_tol;
        let argmin = proximity_argmin_oracle(&self.problem, &self.weights, &self.grid, conv)?;
        let mut notes: Vec<String> = self.witness_note.iter().cloned().collect();
        let op = self.problem.simultaneous_operator(&self.weights)?;
        let fixed_point = match fixed_point_oracle(&op, &self.config.x0, conv) {
            Ok(x) => Some(x.into_inner()),
            Err(e) => {
                notes.push(format!("fixed-point oracle: {e}"));
                None
            }
        };
        let cmin = match &self.config.superiorize {
            Some(s) => Some(
                constrained_min_oracle(&self.problem, &self.weights, &s.objective, &self.grid, conv)?.into_inner(),
            ),
            None => None,
        };
        let witness_residuals =
            self.problem.known_c_points.iter().map(|z| self.problem.membership_residual(z)).collect::<Result<_>>()?;
        Ok(OracleReport {
            problem: self.problem.name.clone(),
            consistent: self.problem.consistent,
            c_witnesses: self.problem.known_c_points.iter().map(|z| z.as_slice().to_vec()).collect(),
            witness_residuals,
            proximity_argmin: argmin.into_inner(),
            fixed_point,
            cmin,
            notes,
        })
    }

    /// `φ` of the superiorized objective at `x`, if any.
    pub fn objective_at(&self, x: &Vector) -> Result<Option<f64>> {
        self.config.superiorize.as_ref().map(|s| s.objective.evaluate(x)).transpose()
    }
}

fn perturbation(doc: &super::config::PerturbDoc, seed: u64) -> PerturbationSchedule {
    let directions = match &doc.directions {
        Some(list) => DirectionSource::Fixed(list.clone()),
        None => DirectionSource::Random { seed },
    };
    PerturbationSchedule { beta0: doc.beta0, ratio: doc.ratio, directions }
}
