//! Trace CSV and run-summary JSON.
//!
//! Doubles are written with 17 significant digits (`{:.16e}`), which
//! round-trips every finite `f64` exactly.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gdsa::IterationTrace;
use crate::vector::Vector;

/// Fixed 17-significant-digit rendering.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

fn opt(x: Option<f64>) -> String {
    x.map(fmt_f64).unwrap_or_default()
}

/// Column names for a trace of dimension `dim`.
pub fn trace_header(dim: usize, superiorized: bool) -> Vec<String> {
    let mut h = vec!["k".to_string()];
    h.extend((1..=dim).map(|i| format!("x{i}")));
    h.extend(["step_norm", "lambda", "plan_signature", "perturb_norm", "fejer_slack_min"].map(String::from));
    if superiorized {
        h.extend(["phi_value", "perturb_l1_budget_remaining"].map(String::from));
    }
    h
}

/// Writes one row per iterate `x^k`. Step columns on row `k` describe the
/// step `k → k + 1` and are empty on the final row.
pub fn write_trace_csv<W: Write>(trace: &IterationTrace, fejer_slacks: Option<&[f64]>, out: W) -> Result<()> {
    let dim = trace.iterates[0].dim();
    let superiorized = trace.phi.is_some();
    let mut w = csv::Writer::from_writer(out);
    w.write_record(trace_header(dim, superiorized))?;
    for (k, x) in trace.iterates.iter().enumerate() {
        let mut row = vec![k.to_string()];
        row.extend(x.as_slice().iter().map(|v| fmt_f64(*v)));
        match trace.steps.get(k) {
            Some(step) => {
                row.push(fmt_f64(step.step_norm));
                row.push(fmt_f64(step.lambda));
                row.push(trace.slot_signatures[step.slot].clone());
                row.push(fmt_f64(step.perturbation.as_ref().map_or(0.0, Vector::norm)));
                row.push(opt(fejer_slacks.and_then(|s| s.get(k).copied())));
            }
            None => row.extend(std::iter::repeat_n(String::new(), 5)),
        }
        if let Some(phi) = &trace.phi {
            row.push(fmt_f64(phi[k]));
            row.push(opt(trace.steps.get(k).and_then(|s| s.budget_remaining)));
        }
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

/// Reads the iterate columns back from a trace CSV.
pub fn read_trace_iterates<R: Read>(input: R) -> Result<Vec<Vector>> {
    let mut r = csv::Reader::from_reader(input);
    let dim = r.headers()?.iter().filter(|h| h.starts_with('x')).count();
    r.records()
        .map(|rec| {
            let rec = rec?;
            let entries = (1..=dim)
                .map(|i| {
                    rec[i].parse::<f64>().map_err(|e| Error::Config(format!("bad number {:?}: {e}", &rec[i])))
                })
                .collect::<Result<Vec<_>>>()?;
            Vector::new(entries)
        })
        .collect()
}

/// JSON summary written next to each trace.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub name: String,
    pub config_hash: String,
    pub seed: u64,
    pub iters: usize,
    pub converged: bool,
    pub final_point: Vec<f64>,
    /// `‖P_i(x) − x‖` per set at the final iterate.
    pub final_residuals: Vec<f64>,
    pub fejer_min_slack: Option<f64>,
    pub phi_final: Option<f64>,
}

pub fn write_summary<W: Write>(summary: &RunSummary, mut out: W) -> Result<()> {
    serde_json::to_writer_pretty(&mut out, summary)?;
    out.write_all(b"\n")?;
    Ok(())
}
