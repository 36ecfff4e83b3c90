//! Canonical multistage instance: polyhedral stage problems, ambiguity
//! descriptions and the derived constants the oracles need.
//!
//! Stage `t` solves
//!
//! ```text
//! min  (A ξ + a)ᵀ y
//! s.t. E x_{t-1} + F y + G x_t  (≤ | =)  h + H ξ
//!      y ∈ [y_lo, y_hi],  x_t ∈ X_t (a finite box)
//! ```
//!
//! with uncertainty in the objective (`A ≠ 0`) or in the right-hand side
//! (`H ≠ 0`), never both.

use serde::{Deserialize, Serialize};

use crate::error::{DrmcoError, Result};
use crate::measures::{DiscreteMeasure, Metric};

/// Row sense of a stage constraint.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
pub enum RowSense {
    #[default]
    Le,
    Eq,
}

/// `E x_{t-1} + F y + G x_t (sense) h + H ξ`. Each matrix is row-major with
/// one row per constraint; an empty `h_xi` means `H = 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct ConstraintBlock {
    pub e: Vec<Vec<f64>>,
    pub f: Vec<Vec<f64>>,
    pub g: Vec<Vec<f64>>,
    pub h: Vec<f64>,
    #[serde(default)]
    pub h_xi: Vec<Vec<f64>>,
    #[serde(default)]
    pub sense: Vec<RowSense>,
}

impl ConstraintBlock {
    pub fn num_rows(&self) -> usize {
        self.h.len()
    }

    pub fn sense(&self, row: usize) -> RowSense {
        self.sense.get(row).copied().unwrap_or_default()
    }

    /// Right-hand side `h + H ξ` of every row.
    pub fn rhs(&self, xi: &[f64]) -> Vec<f64> {
        let mut out = self.h.clone();
        if !self.h_xi.is_empty() {
            for (r, row) in self.h_xi.iter().enumerate() {
                out[r] += row.iter().zip(xi).map(|(a, b)| a * b).sum::<f64>();
            }
        }
        out
    }
}

/// Variable bounds; infinite entries are allowed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct Bounds {
    #[serde(with = "crate::serde_inf::vec")]
    pub lower: Vec<f64>,
    #[serde(with = "crate::serde_inf::vec")]
    pub upper: Vec<f64>,
}

impl Bounds {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Self {
        Self { lower, upper }
    }

    pub fn len(&self) -> usize {
        self.lower.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lower.is_empty()
    }

    pub fn contains(&self, x: &[f64], tol: f64) -> bool {
        x.len() == self.len() && x.iter().enumerate().all(|(i, v)| *v >= self.lower[i] - tol && *v <= self.upper[i] + tol)
    }
}

/// Box or orthant uncertainty set: finite lower bounds, optional upper bounds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct UncertaintySet {
    pub lower: Vec<f64>,
    pub upper: Vec<Option<f64>>,
}

impl UncertaintySet {
    pub fn boxed(lower: Vec<f64>, upper: Vec<f64>) -> Self {
        Self { lower, upper: upper.into_iter().map(Some).collect() }
    }

    pub fn orthant(dim: usize) -> Self {
        Self { lower: vec![0.0; dim], upper: vec![None; dim] }
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn is_bounded(&self) -> bool {
        self.upper.iter().all(|u| u.is_some())
    }

    pub fn contains(&self, xi: &[f64], tol: f64) -> bool {
        xi.len() == self.dim()
            && xi.iter().enumerate().all(|(i, v)| *v >= self.lower[i] - tol && self.upper[i].is_none_or(|u| *v <= u + tol))
    }

    /// Extreme points of a bounded box, in lexicographic lower/upper order.
    pub fn vertices(&self) -> Option<Vec<Vec<f64>>> {
        let upper: Vec<f64> = self.upper.iter().copied().collect::<Option<_>>()?;
        let mut out = vec![Vec::new()];
        for (l, u) in self.lower.iter().zip(&upper) {
            let choices: &[f64] = if l == u { &[*l][..] } else { &[*l, *u][..] };
            out = out
                .into_iter()
                .flat_map(|p| {
                    choices.iter().map(move |c| {
                        let mut q = p.clone();
                        q.push(*c);
                        q
                    })
                })
                .collect();
        }
        Some(out)
    }
}

/// Constants a problem generator vouches for.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct DeclaredConstants {
    /// Lipschitz bound of the stage value function in the incoming state (L1).
    #[serde(default)]
    pub state_lipschitz: Option<f64>,
    /// Lipschitz bound of the stage value function in the uncertainty, under the stage metric.
    #[serde(default)]
    pub uncertainty_lipschitz: Option<f64>,
    /// Asymptotic per-coordinate slopes of the value function along the
    /// recession directions of an unbounded uncertainty set.
    #[serde(default)]
    pub growth_slopes: Option<Vec<f64>>,
}

/// One stage of the canonical form.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageModel {
    pub stage_index: usize,
    pub state_dim_in: usize,
    pub state_dim_out: usize,
    pub internal_dim: usize,
    /// `A` (internal_dim × δ); empty means zero.
    #[serde(default)]
    pub obj_matrix: Vec<Vec<f64>>,
    pub obj_vector: Vec<f64>,
    pub constraints: ConstraintBlock,
    pub internal_bounds: Bounds,
    pub state_bounds: Bounds,
    pub uncertainty_set: UncertaintySet,
    #[serde(default)]
    pub declared: DeclaredConstants,
}

impl StageModel {
    pub fn uncertainty_dim(&self) -> usize {
        self.uncertainty_set.dim()
    }

    pub fn has_objective_uncertainty(&self) -> bool {
        self.obj_matrix.iter().flatten().any(|v| *v != 0.0)
    }

    pub fn has_rhs_uncertainty(&self) -> bool {
        self.constraints.h_xi.iter().flatten().any(|v| *v != 0.0)
    }

    /// Cost vector `A ξ + a` of the internal variables.
    pub fn cost(&self, xi: &[f64]) -> Vec<f64> {
        let mut c = self.obj_vector.clone();
        if !self.obj_matrix.is_empty() {
            for (r, row) in self.obj_matrix.iter().enumerate() {
                c[r] += row.iter().zip(xi).map(|(a, b)| a * b).sum::<f64>();
            }
        }
        c
    }

    fn has_zero_cost(&self) -> bool {
        !self.has_objective_uncertainty() && self.obj_vector.iter().all(|v| *v == 0.0)
    }
}

/// Which model governs the stage expectation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum AmbiguityKind {
    Wasserstein,
    #[serde(alias = "CVaR")]
    Cvar,
    Robust,
    Nominal,
}

/// Affine moment constraint `E[bᵀξ + offset] ≤ bound`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentConstraint {
    pub b: Vec<f64>,
    #[serde(default)]
    pub offset: f64,
    pub bound: f64,
}

impl MomentConstraint {
    pub fn eval(&self, xi: &[f64]) -> f64 {
        self.b.iter().zip(xi).map(|(a, b)| a * b).sum::<f64>() + self.offset
    }
}

fn default_alpha() -> f64 {
    0.1
}

fn default_beta() -> f64 {
    1.0
}

/// Ambiguity description of one stage.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AmbiguitySpec {
    pub kind: AmbiguityKind,
    #[serde(default)]
    pub radius: f64,
    #[serde(default)]
    pub moments: Vec<MomentConstraint>,
    #[serde(default = "default_alpha")]
    pub cvar_alpha: f64,
    #[serde(default = "default_beta")]
    pub cvar_beta: f64,
    #[serde(default)]
    pub metric: Metric,
}

impl AmbiguitySpec {
    fn with_kind(kind: AmbiguityKind) -> Self {
        Self {
            kind,
            radius: 0.0,
            moments: Vec::new(),
            cvar_alpha: default_alpha(),
            cvar_beta: default_beta(),
            metric: Metric::L1,
        }
    }

    pub fn nominal() -> Self {
        Self::with_kind(AmbiguityKind::Nominal)
    }

    pub fn robust() -> Self {
        Self::with_kind(AmbiguityKind::Robust)
    }

    pub fn wasserstein(radius: f64) -> Self {
        Self { radius, ..Self::with_kind(AmbiguityKind::Wasserstein) }
    }

    pub fn cvar(alpha: f64, beta: f64) -> Self {
        Self { cvar_alpha: alpha, cvar_beta: beta, ..Self::with_kind(AmbiguityKind::Cvar) }
    }
}

/// A full T-stage instance. `ambiguity[t-2]` and `data[t-2]` describe stage `t ≥ 2`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Instance {
    pub stages: Vec<StageModel>,
    pub ambiguity: Vec<AmbiguitySpec>,
    pub data: Vec<DiscreteMeasure>,
    pub x0: Vec<f64>,
    pub xi1: Vec<f64>,
    pub regularization: Vec<f64>,
}

impl Instance {
    pub fn num_stages(&self) -> usize {
        self.stages.len()
    }

    /// Stage `t` (1-based).
    pub fn stage(&self, t: usize) -> &StageModel {
        &self.stages[t - 1]
    }

    pub fn ambiguity_of(&self, t: usize) -> &AmbiguitySpec {
        &self.ambiguity[t - 2]
    }

    pub fn data_of(&self, t: usize) -> &DiscreteMeasure {
        &self.data[t - 2]
    }

    /// Box of the state entering stage `t`; for `t = 1` this is the point `x0`.
    pub fn incoming_bounds(&self, t: usize) -> Bounds {
        if t == 1 {
            Bounds::new(self.x0.clone(), self.x0.clone())
        } else {
            self.stage(t - 1).state_bounds.clone()
        }
    }

    /// Replaces every stage ambiguity with `spec`.
    pub fn with_ambiguity(&self, spec: AmbiguitySpec) -> Instance {
        let mut out = self.clone();
        out.ambiguity = vec![spec; self.num_stages().saturating_sub(1)];
        out
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// One broken invariant.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub stage: usize,
    pub field: String,
    pub rule: String,
}

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "stage {}: {}: {}", self.stage, self.field, self.rule)
    }
}

/// Lists every broken invariant; an empty list means the instance is usable.
pub fn validate(instance: &Instance) -> Vec<Violation> {
    let mut out = Vec::new();
    let mut bad = |stage: usize, field: &str, rule: String| out.push(Violation { stage, field: field.into(), rule });
    let t_max = instance.stages.len();
    if t_max == 0 {
        bad(0, "stages", "at least one stage is required".into());
        return out;
    }
    let tail = t_max - 1;
    if instance.ambiguity.len() != tail {
        bad(0, "ambiguity", format!("expected {tail} entries (stages 2..T), found {}", instance.ambiguity.len()));
    }
    if instance.data.len() != tail {
        bad(0, "data", format!("expected {tail} measures (stages 2..T), found {}", instance.data.len()));
    }
    if instance.regularization.len() != t_max {
        bad(0, "regularization", format!("expected {t_max} entries, found {}", instance.regularization.len()));
    }
    for (i, m) in instance.regularization.iter().enumerate() {
        if !(m.is_finite() && *m > 0.0) {
            bad(i + 1, "regularization", format!("M_t must be positive and finite, got {m}"));
        }
    }
    if instance.x0.len() != instance.stages[0].state_dim_in {
        bad(1, "x0", format!("length {} differs from state_dim_in {}", instance.x0.len(), instance.stages[0].state_dim_in));
    }
    if instance.xi1.len() != instance.stages[0].uncertainty_dim() {
        bad(1, "xi1", format!("length {} differs from the uncertainty dimension {}", instance.xi1.len(), instance.stages[0].uncertainty_dim()));
    } else if !instance.stages[0].uncertainty_set.contains(&instance.xi1, 1e-9) {
        bad(1, "xi1", "initial uncertainty lies outside the uncertainty set".into());
    }

    for (i, stage) in instance.stages.iter().enumerate() {
        let t = i + 1;
        validate_stage(stage, t, &mut bad);
        if t < t_max && stage.state_dim_out != instance.stages[i + 1].state_dim_in {
            bad(t, "state_dim_out", format!("{} differs from state_dim_in {} of stage {}", stage.state_dim_out, instance.stages[i + 1].state_dim_in, t + 1));
        }
        if t >= 2 && stage.uncertainty_dim() == 0 {
            bad(t, "uncertainty_set", "stages after the first need at least one uncertainty coordinate".into());
        }
        if t < 2 {
            continue;
        }
        if let Some(measure) = instance.data.get(t - 2) {
            if let Err(e) = measure.check() {
                bad(t, "data", e.to_string());
            }
            for (k, atom) in measure.atoms.iter().enumerate() {
                if !stage.uncertainty_set.contains(atom, 1e-9) {
                    bad(t, "data", format!("atom {k} lies outside the uncertainty set"));
                }
            }
            if let Some(spec) = instance.ambiguity.get(t - 2) {
                validate_ambiguity(spec, measure, stage, t, &mut bad);
            }
        }
    }
    out
}

fn validate_stage(stage: &StageModel, t: usize, bad: &mut impl FnMut(usize, &str, String)) {
    if stage.stage_index != t {
        bad(t, "stage_index", format!("expected {t}, found {}", stage.stage_index));
    }
    let (din, dout, dy, dxi) = (stage.state_dim_in, stage.state_dim_out, stage.internal_dim, stage.uncertainty_dim());
    let rows = stage.constraints.num_rows();
    let c = &stage.constraints;
    let shape = |m: &Vec<Vec<f64>>, cols: usize| m.len() == rows && m.iter().all(|r| r.len() == cols);
    if !shape(&c.e, din) {
        bad(t, "constraints.e", format!("must be {rows} × {din}"));
    }
    if !shape(&c.f, dy) {
        bad(t, "constraints.f", format!("must be {rows} × {dy}"));
    }
    if !shape(&c.g, dout) {
        bad(t, "constraints.g", format!("must be {rows} × {dout}"));
    }
    if !c.h_xi.is_empty() && !shape(&c.h_xi, dxi) {
        bad(t, "constraints.h_xi", format!("must be {rows} × {dxi} or empty"));
    }
    if !c.sense.is_empty() && c.sense.len() != rows {
        bad(t, "constraints.sense", format!("must have {rows} entries or be empty"));
    }
    if stage.obj_vector.len() != dy {
        bad(t, "obj_vector", format!("must have {dy} entries"));
    }
    if !stage.obj_matrix.is_empty() && !(stage.obj_matrix.len() == dy && stage.obj_matrix.iter().all(|r| r.len() == dxi)) {
        bad(t, "obj_matrix", format!("must be {dy} × {dxi} or empty"));
    }
    if stage.internal_bounds.lower.len() != dy || stage.internal_bounds.upper.len() != dy {
        bad(t, "internal_bounds", format!("must have {dy} entries"));
    } else if (0..dy).any(|j| !(stage.internal_bounds.lower[j] <= stage.internal_bounds.upper[j])) {
        bad(t, "internal_bounds", "lower bound above upper bound".into());
    }
    let sb = &stage.state_bounds;
    if sb.lower.len() != dout || sb.upper.len() != dout {
        bad(t, "state_bounds", format!("must have {dout} entries"));
    } else {
        for j in 0..dout {
            if !(sb.lower[j].is_finite() && sb.upper[j].is_finite()) {
                bad(t, "state_bounds", format!("coordinate {j} must have finite bounds (compact state space)"));
            } else if sb.lower[j] > sb.upper[j] {
                bad(t, "state_bounds", format!("coordinate {j} has lower bound above upper bound"));
            }
        }
    }
    let us = &stage.uncertainty_set;
    if us.upper.len() != us.lower.len() {
        bad(t, "uncertainty_set", "lower and upper bound lengths differ".into());
    } else {
        for i in 0..us.dim() {
            if !us.lower[i].is_finite() {
                bad(t, "uncertainty_set", format!("coordinate {i} needs a finite lower bound"));
            }
            if let Some(u) = us.upper[i] {
                if u < us.lower[i] || !u.is_finite() {
                    bad(t, "uncertainty_set", format!("coordinate {i} has an invalid upper bound"));
                }
            }
        }
    }
    if stage.has_objective_uncertainty() && stage.has_rhs_uncertainty() {
        bad(t, "obj_matrix/h_xi", "mixed uncertainty: objective and right-hand side both depend on ξ".into());
    }
}

fn validate_ambiguity(spec: &AmbiguitySpec, measure: &DiscreteMeasure, stage: &StageModel, t: usize, bad: &mut impl FnMut(usize, &str, String)) {
    match spec.kind {
        AmbiguityKind::Wasserstein => {
            if !(spec.radius >= 0.0 && spec.radius.is_finite()) {
                bad(t, "ambiguity.radius", format!("must be finite and nonnegative, got {}", spec.radius));
            }
            for (j, m) in spec.moments.iter().enumerate() {
                if m.b.len() != stage.uncertainty_dim() {
                    bad(t, "ambiguity.moments", format!("moment {j} has the wrong dimension"));
                    continue;
                }
                let avg: f64 = measure.atoms.iter().zip(&measure.weights).map(|(a, w)| w * m.eval(a)).sum();
                if !(avg < m.bound) {
                    bad(t, "ambiguity.moments", format!("moment {j}: bound {} must strictly exceed the empirical average {avg}", m.bound));
                }
            }
        }
        AmbiguityKind::Cvar => {
            if !(spec.cvar_alpha > 0.0 && spec.cvar_alpha < 1.0) {
                bad(t, "ambiguity.cvar_alpha", format!("must lie in (0, 1), got {}", spec.cvar_alpha));
            }
            if !(0.0..=1.0).contains(&spec.cvar_beta) {
                bad(t, "ambiguity.cvar_beta", format!("must lie in [0, 1], got {}", spec.cvar_beta));
            }
        }
        AmbiguityKind::Robust | AmbiguityKind::Nominal => {}
    }
}

/// Returns an error listing every violation, if any.
pub fn ensure_valid(instance: &Instance) -> Result<()> {
    let v = validate(instance);
    if v.is_empty() {
        Ok(())
    } else {
        Err(DrmcoError::InvalidInstance(v.iter().map(|x| x.to_string()).collect()))
    }
}

/// Which exact oracle applies to a stage.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum OracleKind {
    /// Uncertainty only in the objective.
    Concave,
    /// Uncertainty only in the right-hand side, or none.
    Convex,
}

pub fn oracle_kind(stage: &StageModel) -> Result<OracleKind> {
    match (stage.has_objective_uncertainty(), stage.has_rhs_uncertainty()) {
        (true, true) => Err(DrmcoError::MixedUncertainty { stage: stage.stage_index }),
        (true, false) => Ok(OracleKind::Concave),
        _ => Ok(OracleKind::Convex),
    }
}

/// Per-stage Lipschitz bounds usable as regularization factors.
///
/// Uses the generator-declared state Lipschitz constant; stages without costs
/// get 1.0. Anything else has no derivable bound.
pub fn recommended_regularization(instance: &Instance) -> Result<Vec<f64>> {
    instance
        .stages
        .iter()
        .map(|s| match s.declared.state_lipschitz {
            Some(m) if m > 0.0 && m.is_finite() => Ok(m),
            Some(_) | None if s.has_zero_cost() => Ok(1.0),
            _ => Err(DrmcoError::UnboundedLipschitz { stage: s.stage_index }),
        })
        .collect()
}

/// Growth rate `r_t` of a stage value function in the uncertainty.
///
/// Bounded sets have rate 0. Otherwise the declared per-coordinate slopes are
/// combined through the dual of the metric: the largest slope under L1, their
/// sum under L∞.
pub fn growth_rate(stage: &StageModel, metric: Metric) -> Result<f64> {
    if stage.uncertainty_set.is_bounded() {
        return Ok(0.0);
    }
    let slopes = stage.declared.growth_slopes.as_ref().ok_or(DrmcoError::MissingGrowthRate { stage: stage.stage_index })?;
    Ok(match metric {
        Metric::L1 => slopes.iter().copied().fold(0.0, f64::max),
        Metric::Linf => slopes.iter().sum(),
    })
}
