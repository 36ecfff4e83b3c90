//! Single-stage subproblem oracles.
//!
//! A noninitial oracle for stage `t` receives the incoming state and the
//! current approximations of the cost-to-go after stage `t`. It returns a
//! valid cut and a valid overestimate of the regularized cost-to-go after
//! stage `t − 1`, plus the next forward state and its approximation gap,
//! with `overestimate − cut(x_prev) ≤ gap`.

pub mod baselines;
pub mod concave;
pub mod convex;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::approx::{gap_at, Cut, LowerApprox, UpperApprox};
use crate::error::Result;
use crate::measures::DiscreteMeasure;
use crate::model::{oracle_kind, AmbiguityKind, AmbiguitySpec, Bounds, OracleKind, StageModel};
use crate::stage::StageProblem;

/// Default cap on lifted vertices per data atom.
pub const DEFAULT_VERTEX_CAP: usize = 2000;

/// Result of a noninitial oracle call.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleOutput {
    pub cut: Cut,
    /// Overestimate of the cost-to-go at the incoming state (`+∞` allowed).
    #[serde(with = "crate::serde_inf")]
    pub overestimate: f64,
    pub next_state: Vec<f64>,
    #[serde(with = "crate::serde_inf")]
    pub gap: f64,
}

/// How the next forward state is chosen among outcomes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Forward {
    /// Largest approximation gap, lowest index on ties.
    GapMax,
    /// Outcome drawn by inverse CDF at this uniform number in `[0, 1)`.
    Sampled(f64),
}

impl Forward {
    pub(crate) fn pick(self, gaps: &[f64], weights: &[f64]) -> usize {
        match self {
            Forward::GapMax => argmax_first(gaps),
            Forward::Sampled(u) => {
                let mut acc = 0.0;
                for (k, w) in weights.iter().enumerate() {
                    acc += w;
                    if u < acc {
                        return k;
                    }
                }
                weights.len() - 1
            }
        }
    }
}

pub(crate) fn argmax_first(values: &[f64]) -> usize {
    let mut best = 0;
    for (k, v) in values.iter().enumerate() {
        if *v > values[best] {
            best = k;
        }
    }
    best
}

/// Inputs shared by every noninitial oracle for stage `t`.
#[derive(Clone, Copy)]
pub struct OracleContext<'a> {
    pub stage: &'a StageModel,
    /// Box `X_{t−1}` of the incoming state.
    pub incoming: &'a Bounds,
    pub ambiguity: &'a AmbiguitySpec,
    pub data: &'a DiscreteMeasure,
    /// Approximations of the cost-to-go after stage `t`.
    pub lower: &'a LowerApprox,
    pub upper: &'a UpperApprox,
    /// Regularization factor `M_t`.
    pub regularization: f64,
    pub vertex_cap: usize,
}

impl OracleContext<'_> {
    pub(crate) fn problem(&self) -> StageProblem<'_> {
        StageProblem { stage: self.stage, incoming: self.incoming, future: self.lower, regularization: Some(self.regularization) }
    }

    pub(crate) fn cut(&self, value: f64, gradient: Vec<f64>, x_prev: &[f64]) -> Cut {
        Cut { value, gradient, anchor: x_prev.to_vec(), stage: self.stage.stage_index - 1 }
    }
}

/// Regularized stage solve at one uncertainty outcome.
#[derive(Debug, Clone, PartialEq)]
pub struct OutcomeSolve {
    pub value: f64,
    pub state: Vec<f64>,
    pub gradient: Vec<f64>,
    pub gap: f64,
}

/// Solves the regularized stage LP at every outcome, in parallel, in order.
pub(crate) fn solve_outcomes(ctx: &OracleContext<'_>, x_prev: &[f64], outcomes: &[Vec<f64>]) -> Result<Vec<OutcomeSolve>> {
    let problem = ctx.problem();
    outcomes
        .par_iter()
        .map(|xi| {
            let s = problem.solve(x_prev, xi)?;
            let gap = gap_at(ctx.lower, ctx.upper, &s.state)?;
            Ok(OutcomeSolve { value: s.value, state: s.state, gradient: s.gradient, gap })
        })
        .collect()
}

/// Dispatches on the ambiguity kind and, for Wasserstein sets, on where the
/// uncertainty enters the stage.
pub fn evaluate(ctx: &OracleContext<'_>, x_prev: &[f64], forward: Forward) -> Result<OracleOutput> {
    match ctx.ambiguity.kind {
        AmbiguityKind::Nominal => baselines::nominal_evaluate(ctx, x_prev, forward),
        AmbiguityKind::Cvar => baselines::cvar_evaluate(ctx, x_prev, forward),
        AmbiguityKind::Robust => baselines::mrco_evaluate(ctx, x_prev, forward),
        AmbiguityKind::Wasserstein => match oracle_kind(ctx.stage)? {
            OracleKind::Concave => concave::evaluate(ctx, x_prev, forward),
            OracleKind::Convex => convex::evaluate(ctx, x_prev, forward),
        },
    }
}

/// First-stage decision and its gap.
#[derive(Debug, Clone, PartialEq)]
pub struct InitialOutput {
    pub state: Vec<f64>,
    /// First-stage cost `f_1(x_0, x_1; ξ_1)`.
    pub stage_cost: f64,
    /// `f_1 + lower(x_1)`.
    pub value: f64,
    pub gap: f64,
}

/// Solves `min f_1(x_0, ·; ξ_1) + lower(·)` and reports `upper − lower` at the minimizer.
pub fn initial_oracle(stage: &StageModel, x0: &[f64], xi1: &[f64], lower: &LowerApprox, upper: &UpperApprox) -> Result<InitialOutput> {
    let incoming = Bounds::new(x0.to_vec(), x0.to_vec());
    let problem = StageProblem { stage, incoming: &incoming, future: lower, regularization: None };
    let s = problem.solve(x0, xi1)?;
    let gap = gap_at(lower, upper, &s.state)?;
    Ok(InitialOutput { stage_cost: s.stage_cost, value: s.value, gap, state: s.state })
}

/// Weighted sum of `values + gaps`, `+∞` if any weighted gap is infinite.
pub(crate) fn weighted_overestimate(weights: &[f64], values: &[f64], gaps: &[f64]) -> f64 {
    let mut total = 0.0;
    for ((w, v), g) in weights.iter().zip(values).zip(gaps) {
        if *w > 0.0 {
            if g.is_infinite() {
                return f64::INFINITY;
            }
            total += w * (v + g);
        }
    }
    total
}
