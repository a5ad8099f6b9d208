//! Strings, string-averaging operators and control schedules.
//!
//! A string `t = (t(1), …, t(q))` selects the composite operator
//! `V[t] = U_{t(q)} ⋯ U_{t(1)}`, applied `U_{t(1)}` first. A [`StringPlan`]
//! averages several string operators with positive weights; a
//! [`ControlSchedule`] is an eventually periodic sequence of plans over a
//! fixed family of base operators `U_1, …, U_m`.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::operators::{propagate_alpha, rho_from_alpha, Operator, OperatorDoc};

const WEIGHT_SUM_TOL: f64 = 1e-10;

/// Largest cycle for which tight gap bounds are computed by window scan.
pub const TIGHT_GAP_MAX_CYCLE: usize = 64;

/// A nonempty sequence of 1-based operator indices.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct IndexString(Vec<usize>);

impl IndexString {
    pub fn new(indices: Vec<usize>) -> Result<Self> {
        if indices.is_empty() {
            return Err(Error::InvalidSchedule("a string needs at least one index".into()));
        }
        if let Some(&i) = indices.iter().find(|&&i| i == 0) {
            return Err(Error::IndexOutOfRange { index: i, m: 0 });
        }
        Ok(Self(indices))
    }

    pub fn indices(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn check_range(&self, m: usize) -> Result<()> {
        match self.0.iter().find(|&&i| i > m) {
            Some(&index) => Err(Error::IndexOutOfRange { index, m }),
            None => Ok(()),
        }
    }
}

impl TryFrom<Vec<usize>> for IndexString {
    type Error = Error;

    fn try_from(v: Vec<usize>) -> Result<Self> {
        IndexString::new(v)
    }
}

impl From<IndexString> for Vec<usize> {
    fn from(s: IndexString) -> Self {
        s.0
    }
}

impl fmt::Display for IndexString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, idx) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{idx}")?;
        }
        write!(f, ")")
    }
}

/// One step's control data: a set of strings and their weights.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PlanDoc", into = "PlanDoc")]
pub struct StringPlan {
    strings: Vec<IndexString>,
    weights: Vec<f64>,
}

/// JSON form of a plan: weights parallel to strings.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlanDoc {
    pub strings: Vec<Vec<usize>>,
    pub weights: Vec<f64>,
}

impl StringPlan {
    pub fn new(strings: Vec<IndexString>, weights: Vec<f64>) -> Result<Self> {
        if strings.is_empty() {
            return Err(Error::InvalidSchedule("a plan needs at least one string".into()));
        }
        if strings.len() != weights.len() {
            return Err(Error::InvalidSchedule(format!(
                "{} strings but {} weights",
                strings.len(),
                weights.len()
            )));
        }
        let sum: f64 = weights.iter().sum();
        if weights.iter().any(|w| !(*w > 0.0 && *w <= 1.0)) || (sum - 1.0).abs() > WEIGHT_SUM_TOL {
            return Err(Error::WeightSum { sum });
        }
        let distinct: BTreeSet<&IndexString> = strings.iter().collect();
        if distinct.len() != strings.len() {
            return Err(Error::InvalidSchedule("duplicate string in plan".into()));
        }
        Ok(Self { strings, weights })
    }

    /// Plan with a single string of weight one.
    pub fn single(indices: Vec<usize>) -> Result<Self> {
        Self::new(vec![IndexString::new(indices)?], vec![1.0])
    }

    /// Fully simultaneous plan `{(1), …, (m)}` with the given weights.
    pub fn simultaneous(weights: Vec<f64>) -> Result<Self> {
        let strings = (1..=weights.len()).map(|i| IndexString(vec![i])).collect();
        Self::new(strings, weights)
    }

    pub fn strings(&self) -> &[IndexString] {
        &self.strings
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// `q` for this plan: the longest string length.
    pub fn max_len(&self) -> usize {
        self.strings.iter().map(IndexString::len).max().unwrap_or(0)
    }

    /// Structural signature: strings in sorted order with their exact weights.
    pub fn signature(&self) -> String {
        let mut pairs: Vec<(&IndexString, f64)> = self.strings.iter().zip(self.weights.iter().copied()).collect();
        pairs.sort_by(|a, b| a.0.cmp(b.0));
        pairs
            .iter()
            .map(|(s, w)| format!("{s}*{w:?}"))
            .collect::<Vec<_>>()
            .join("+")
    }
}

impl TryFrom<PlanDoc> for StringPlan {
    type Error = Error;

    fn try_from(doc: PlanDoc) -> Result<Self> {
        let strings = doc.strings.into_iter().map(IndexString::new).collect::<Result<_>>()?;
        StringPlan::new(strings, doc.weights)
    }
}

impl From<StringPlan> for PlanDoc {
    fn from(p: StringPlan) -> Self {
        PlanDoc { strings: p.strings.into_iter().map(|s| s.0).collect(), weights: p.weights }
    }
}

/// String operator `V[t]`: the base operators composed in string order.
///
/// A length-one string yields the base operator itself.
pub fn string_operator(operators: &[Operator], t: &IndexString) -> Result<Operator> {
    t.check_range(operators.len())?;
    if t.len() == 1 {
        return Ok(operators[t.0[0] - 1].clone());
    }
    Operator::composition(t.0.iter().map(|&i| operators[i - 1].clone()).collect())
}

/// String-averaging operator `Σ_t ω(t) V[t]`.
pub fn averaged_operator(plan: &StringPlan, operators: &[Operator]) -> Result<Operator> {
    let terms = plan
        .strings
        .iter()
        .zip(&plan.weights)
        .map(|(t, w)| Ok((*w, string_operator(operators, t)?)))
        .collect::<Result<Vec<_>>>()?;
    if terms.len() == 1 {
        return Ok(terms.into_iter().next().unwrap().1);
    }
    Operator::combination(terms)
}

/// True iff the strings jointly cover `{1, …, m}`.
pub fn is_fit(plan: &StringPlan, m: usize) -> bool {
    let covered: BTreeSet<usize> = plan.strings.iter().flat_map(|s| s.0.iter().copied()).collect();
    (1..=m).all(|i| covered.contains(&i))
}

/// An eventually periodic schedule: `preamble` once, then `cycle` forever.
#[derive(Clone, Debug)]
pub struct ControlSchedule {
    operators: Vec<Operator>,
    preamble: Vec<StringPlan>,
    cycle: Vec<StringPlan>,
    averaged: Vec<Operator>,
    signatures: Vec<String>,
}

impl ControlSchedule {
    pub fn new(operators: Vec<Operator>, preamble: Vec<StringPlan>, cycle: Vec<StringPlan>) -> Result<Self> {
        let dim = operators
            .first()
            .ok_or_else(|| Error::InvalidSchedule("at least one base operator required".into()))?
            .dim();
        if let Some(op) = operators.iter().find(|op| op.dim() != dim) {
            return Err(Error::DimensionMismatch { expected: dim, found: op.dim() });
        }
        if cycle.is_empty() {
            return Err(Error::InvalidSchedule("cycle must contain at least one plan".into()));
        }
        let averaged = preamble
            .iter()
            .chain(&cycle)
            .map(|p| averaged_operator(p, &operators))
            .collect::<Result<Vec<_>>>()?;
        let signatures = preamble.iter().chain(&cycle).map(StringPlan::signature).collect();
        Ok(Self { operators, preamble, cycle, averaged, signatures })
    }

    /// Schedule repeating one plan forever.
    pub fn constant(operators: Vec<Operator>, plan: StringPlan) -> Result<Self> {
        Self::new(operators, Vec::new(), vec![plan])
    }

    pub fn operators(&self) -> &[Operator] {
        &self.operators
    }

    pub fn m(&self) -> usize {
        self.operators.len()
    }

    pub fn dim(&self) -> usize {
        self.operators[0].dim()
    }

    pub fn preamble(&self) -> &[StringPlan] {
        &self.preamble
    }

    pub fn cycle(&self) -> &[StringPlan] {
        &self.cycle
    }

    /// Position of step `k`'s plan within `preamble ++ cycle`.
    pub fn slot(&self, k: usize) -> usize {
        let p = self.preamble.len();
        if k < p {
            k
        } else {
            p + (k - p) % self.cycle.len()
        }
    }

    pub fn plan_at(&self, k: usize) -> &StringPlan {
        let slot = self.slot(k);
        self.preamble.get(slot).unwrap_or_else(|| &self.cycle[slot - self.preamble.len()])
    }

    /// `T_(Ω_k, ω_k)`, precomputed per distinct slot.
    pub fn averaged_at(&self, k: usize) -> &Operator {
        &self.averaged[self.slot(k)]
    }

    pub fn signature_at(&self, k: usize) -> &str {
        &self.signatures[self.slot(k)]
    }

    /// Averaged operators of every slot (`preamble ++ cycle`).
    pub fn averaged_operators(&self) -> &[Operator] {
        &self.averaged
    }

    /// Averaged operators of the cycle: one per operator of the limsup set.
    pub fn cycle_operators(&self) -> &[Operator] {
        &self.averaged[self.preamble.len()..]
    }

    /// `M`: longest string over the whole schedule.
    pub fn max_string_len(&self) -> usize {
        self.preamble.iter().chain(&self.cycle).map(StringPlan::max_len).max().unwrap_or(1)
    }
}

/// `ρ = min{ M⁻¹ minᵢ (2 − αᵢ)/αᵢ, 1 }` over the base operators.
pub fn rho_constant(schedule: &ControlSchedule) -> Result<f64> {
    let mut min_rho = f64::INFINITY;
    for op in schedule.operators() {
        min_rho = min_rho.min(rho_from_alpha(propagate_alpha(op)?));
    }
    Ok((min_rho / schedule.max_string_len() as f64).min(1.0))
}

/// Outcome of the limsup-admissibility decision.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AdmissibilityReport {
    /// The full sequence, preamble included, is limsup-admissible.
    pub admissible: bool,
    /// The tail from `k0` on is admissible (always true for a periodic tail).
    pub tail_admissible: bool,
    pub k0: usize,
    /// Distinct plan signatures of the cycle, in order of first appearance.
    pub limsup_set: Vec<String>,
    /// Reported gap bound `M_T` per signature.
    pub gap_bounds: BTreeMap<String, usize>,
    /// Smallest valid gap per signature, when the cycle is short enough to scan.
    pub tight_gaps: Option<BTreeMap<String, usize>>,
    /// First step whose plan never recurs.
    pub violating_index: Option<usize>,
}

/// Decides limsup-admissibility of an eventually periodic schedule.
///
/// Plans are compared by [`StringPlan::signature`]. The limsup set is the set
/// of cycle signatures. The full sequence is admissible iff every preamble
/// plan also occurs in the cycle. `M_T` is the cycle length, or the longest
/// first-occurrence wait from any start (preamble included) if that is larger.
pub fn check_admissibility(schedule: &ControlSchedule) -> AdmissibilityReport {
    let p = schedule.preamble.len();
    let l = schedule.cycle.len();
    let sigs = &schedule.signatures;

    let mut limsup_set: Vec<String> = Vec::new();
    for s in &sigs[p..] {
        if !limsup_set.contains(s) {
            limsup_set.push(s.clone());
        }
    }
    let violating_index = sigs[..p].iter().position(|s| !limsup_set.contains(s));
    let admissible = violating_index.is_none();

    let mut gap_bounds = BTreeMap::new();
    for s in &limsup_set {
        let wait = (0..p + l)
            .map(|k| (k..).find(|&n| sigs[schedule.slot(n)] == *s).unwrap() - k + 1)
            .max()
            .unwrap_or(l);
        gap_bounds.insert(s.clone(), wait.max(l));
    }

    let tight_gaps = (l <= TIGHT_GAP_MAX_CYCLE).then(|| {
        limsup_set
            .iter()
            .map(|s| {
                let tight = (1..=l)
                    .find(|&w| (0..l).all(|start| (start..start + w).any(|n| sigs[p + n % l] == *s)))
                    .unwrap_or(l);
                (s.clone(), tight)
            })
            .collect()
    });

    AdmissibilityReport {
        admissible,
        tail_admissible: true,
        k0: p,
        limsup_set,
        gap_bounds,
        tight_gaps,
        violating_index,
    }
}

/// JSON form of a schedule. `operators` may be omitted when the caller
/// supplies them (e.g. projections onto a problem's sets).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScheduleDoc {
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub operators: Vec<OperatorDoc>,
    #[serde(default)]
    pub preamble: Vec<StringPlan>,
    pub cycle: Vec<StringPlan>,
}

impl ScheduleDoc {
    /// Builds the schedule, taking operators from the document or from `fallback`.
    pub fn build(&self, fallback: Option<&[Operator]>) -> Result<ControlSchedule> {
        let operators = if self.operators.is_empty() {
            fallback
                .ok_or_else(|| Error::Config("schedule has no operators".into()))?
                .to_vec()
        } else {
            self.operators.iter().map(Operator::try_from).collect::<Result<_>>()?
        };
        for plan in self.preamble.iter().chain(&self.cycle) {
            for s in plan.strings() {
                s.check_range(operators.len())?;
            }
        }
        ControlSchedule::new(operators, self.preamble.clone(), self.cycle.clone())
    }
}
