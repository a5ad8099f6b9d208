//! Experiment configuration documents.
//!
//! A config is one JSON document. The `problem` field is either inline set
//! data, the name of a built-in problem, or `{"include": "<path>"}` with the
//! path resolved relative to the config file. Includes are expanded before
//! anything else, so the config hash covers the full experiment.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::gdsa::{LambdaRule, RelaxationSchedule, StopRule, DEFAULT_EPSILON};
use crate::strings::ScheduleDoc;
use crate::superiorize::{Objective, SuperiorizationSchedule};
use crate::vector::{Tolerances, Vector};

use super::problem::{self, ProblemInstance, SetDescriptor};

/// Inline problem data.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemDoc {
    #[serde(default)]
    pub name: Option<String>,
    pub sets: Vec<SetDescriptor>,
}

impl ProblemDoc {
    pub fn build(&self) -> Result<ProblemInstance> {
        ProblemInstance::new(self.name.clone().unwrap_or_else(|| "inline".into()), self.sets.clone())
    }
}

/// Names accepted by `{"builtin": ...}`.
pub const BUILTIN_PROBLEMS: [&str; 4] = ["two-intervals", "two-balls", "overlapping-balls", "segment"];

pub fn builtin_problem(name: &str) -> Result<ProblemInstance> {
    match name {
        "two-intervals" => Ok(problem::two_intervals()),
        "two-balls" => Ok(problem::two_balls()),
        "overlapping-balls" => Ok(problem::overlapping_balls()),
        "segment" => Ok(problem::segment()),
        other => Err(Error::Config(format!(
            "unknown builtin problem {other:?}; expected one of {BUILTIN_PROBLEMS:?}"
        ))),
    }
}

/// Bounded perturbations; directions are random unit vectors seeded by the
/// experiment seed unless a fixed list is given.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PerturbDoc {
    pub beta0: f64,
    pub ratio: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub directions: Option<Vec<Vector>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuperiorizeDoc {
    pub objective: Objective,
    #[serde(flatten)]
    pub schedule: SuperiorizationSchedule,
}

/// Grid used by the brute-force oracles: the problem's bounding box widened by `margin`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridDoc {
    pub margin: f64,
    pub points: usize,
}

impl Default for GridDoc {
    fn default() -> Self {
        Self { margin: 1.0, points: 41 }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputDoc {
    /// Output directory, relative to the working directory.
    pub dir: Option<PathBuf>,
    /// File stem for `<stem>.csv` and `<stem>.summary.json`; defaults to the experiment name.
    pub stem: Option<String>,
}

fn default_relax() -> RelaxationSchedule {
    RelaxationSchedule { epsilon: DEFAULT_EPSILON, rule: LambdaRule::Constant(1.0) }
}

fn default_samples() -> usize {
    1000
}

/// A resolved experiment description.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub name: Option<String>,
    pub problem: ProblemDoc,
    /// Defaults to the simultaneous plan with `weights`.
    #[serde(default)]
    pub schedule: Option<ScheduleDoc>,
    #[serde(default = "default_relax")]
    pub relax: RelaxationSchedule,
    #[serde(default)]
    pub perturb: Option<PerturbDoc>,
    #[serde(default)]
    pub superiorize: Option<SuperiorizeDoc>,
    pub x0: Vector,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub stop: StopRule,
    #[serde(default)]
    pub tolerances: Tolerances,
    /// Proximity weights; equal weights when omitted.
    #[serde(default)]
    pub weights: Option<Vec<f64>>,
    #[serde(default)]
    pub grid: GridDoc,
    /// Sample pairs per operator check in `verify`.
    #[serde(default = "default_samples")]
    pub samples: usize,
    #[serde(default)]
    pub output: OutputDoc,
}

/// Raw config JSON with includes expanded, ready for overrides.
#[derive(Clone, Debug)]
pub struct ConfigSource {
    value: Value,
    origin: Option<PathBuf>,
}

impl ConfigSource {
    /// Reads a config file and expands its include.
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)?;
        let base = path.parent().unwrap_or_else(|| Path::new("."));
        let mut src = Self::from_str(&text, base)?;
        src.origin = Some(path.to_path_buf());
        Ok(src)
    }

    /// Parses config text; includes resolve relative to `base`.
    pub fn from_str(text: &str, base: &Path) -> Result<Self> {
        let mut value: Value = serde_json::from_str(text)?;
        let obj = value
            .as_object_mut()
            .ok_or_else(|| Error::Config("config must be a JSON object".into()))?;
        let problem = obj
            .get_mut("problem")
            .ok_or_else(|| Error::Config("config has no \"problem\"".into()))?;
        *problem = resolve_problem(problem, base)?;
        Ok(Self { value, origin: None })
    }

    pub fn origin(&self) -> Option<&Path> {
        self.origin.as_deref()
    }

    pub fn value(&self) -> &Value {
        &self.value
    }

    /// Sets the field at a dotted path such as `relax.constant` or `stop.max_iters`,
    /// creating intermediate objects.
    pub fn set(&mut self, path: &str, new: Value) -> Result<()> {
        let mut cur = &mut self.value;
        let parts: Vec<&str> = path.split('.').collect();
        if parts.iter().any(|p| p.is_empty()) {
            return Err(Error::Config(format!("bad parameter path {path:?}")));
        }
        for (i, part) in parts.iter().enumerate() {
            let obj = cur
                .as_object_mut()
                .ok_or_else(|| Error::Config(format!("{path:?}: {part:?} is not inside an object")))?;
            if i + 1 == parts.len() {
                obj.insert(part.to_string(), new);
                return Ok(());
            }
            cur = obj.entry(part.to_string()).or_insert_with(|| Value::Object(Default::default()));
        }
        unreachable!("path has at least one part")
    }

    pub fn config(&self) -> Result<ExperimentConfig> {
        let cfg: ExperimentConfig =
            serde_json::from_value(self.value.clone()).map_err(|e| Error::Config(e.to_string()))?;
        cfg.tolerances.validate()?;
        Ok(cfg)
    }
}

fn resolve_problem(problem: &Value, base: &Path) -> Result<Value> {
    let Some(obj) = problem.as_object() else {
        return Err(Error::Config("\"problem\" must be an object".into()));
    };
    if let Some(inc) = obj.get("include") {
        let rel = inc.as_str().ok_or_else(|| Error::Config("\"include\" must be a path string".into()))?;
        let path = base.join(rel);
        let text = fs::read_to_string(&path)
            .map_err(|e| Error::Config(format!("cannot read include {}: {e}", path.display())))?;
        let inner: Value = serde_json::from_str(&text)?;
        let inner_base = path.parent().unwrap_or(base).to_path_buf();
        if inner.get("include").is_some() {
            return Err(Error::Config(format!("nested include in {}", path.display())));
        }
        return resolve_problem(&inner, &inner_base);
    }
    if let Some(name) = obj.get("builtin") {
        let name = name.as_str().ok_or_else(|| Error::Config("\"builtin\" must be a string".into()))?;
        let p = builtin_problem(name)?;
        let doc = ProblemDoc { name: Some(p.name.clone()), sets: p.sets().to_vec() };
        return Ok(serde_json::to_value(doc)?);
    }
    Ok(problem.clone())
}

/// Hex SHA-256 of the config's canonical JSON (sorted keys, no whitespace).
pub fn config_hash(cfg: &ExperimentConfig) -> Result<String> {
    let canonical = serde_json::to_vec(&serde_json::to_value(cfg)?)?;
    Ok(hex::encode(Sha256::digest(&canonical)))
}
