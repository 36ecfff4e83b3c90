//! Single-stage LPs: the stage problem at a fixed uncertainty, with the cut
//! epigraph of the downstream approximation and an optional L1 copy penalty.
//!
//! With regularization `M`, the incoming state enters through a copy `z` and
//! the penalty `M‖x_prev − z‖₁`, written as `z − p + q = x_prev`. The row
//! multipliers of that block give the cut gradient, bounded by `M`.

use drmco_lp::{solve_default, LinearProgram, LpBuilder, LpSolution, LpStatus};

use crate::approx::LowerApprox;
use crate::error::{DrmcoError, Result};
use crate::model::{Bounds, RowSense, StageModel};

/// Variable and row indices of one stage copy inside a larger LP.
#[derive(Debug, Clone)]
pub struct StageBlock {
    pub z: usize,
    pub y: usize,
    pub x: usize,
    pub theta: Option<usize>,
    /// First equality row of the copy block (one row per incoming coordinate).
    pub copy_row: Option<usize>,
    pub d_in: usize,
    pub d_y: usize,
    pub d_out: usize,
}

impl StageBlock {
    pub fn state(&self, primal: &[f64]) -> Vec<f64> {
        primal[self.x..self.x + self.d_out].to_vec()
    }

    pub fn internal(&self, primal: &[f64]) -> Vec<f64> {
        primal[self.y..self.y + self.d_y].to_vec()
    }

    /// Derivative of the optimal value in `x_prev` (zero without a copy block).
    pub fn gradient(&self, sol: &LpSolution) -> Vec<f64> {
        match self.copy_row {
            Some(r) => (0..self.d_in).map(|i| -sol.eq_duals[r + i]).collect(),
            None => vec![0.0; self.d_in],
        }
    }
}

/// Everything needed to place one stage into an LP.
pub(crate) struct BlockSpec<'a> {
    pub stage: &'a StageModel,
    pub incoming: &'a Bounds,
    pub x_prev: &'a [f64],
    /// Uncertainty used for the right-hand side.
    pub xi: &'a [f64],
    /// Cost of the internal variables, already weighted.
    pub cost: Vec<f64>,
    /// Weight on the copy penalty and on the downstream epigraph.
    pub weight: f64,
    pub future: &'a LowerApprox,
    pub regularization: Option<f64>,
}

pub(crate) fn add_stage_block(lp: &mut LpBuilder, spec: &BlockSpec<'_>) -> StageBlock {
    let s = spec.stage;
    let (d_in, d_y, d_out) = (s.state_dim_in, s.internal_dim, s.state_dim_out);
    let z = lp.num_vars();
    for i in 0..d_in {
        match spec.regularization {
            Some(_) => lp.add_var(spec.incoming.lower[i], spec.incoming.upper[i], 0.0),
            None => lp.add_var(spec.x_prev[i], spec.x_prev[i], 0.0),
        };
    }
    let y = lp.num_vars();
    for j in 0..d_y {
        lp.add_var(s.internal_bounds.lower[j], s.internal_bounds.upper[j], spec.cost[j]);
    }
    let x = lp.num_vars();
    for j in 0..d_out {
        lp.add_var(s.state_bounds.lower[j], s.state_bounds.upper[j], 0.0);
    }
    let mut copy_row = None;
    if let Some(m) = spec.regularization {
        for i in 0..d_in {
            let p = lp.add_var(0.0, f64::INFINITY, spec.weight * m);
            let q = lp.add_var(0.0, f64::INFINITY, spec.weight * m);
            let row = lp.add_eq(vec![(z + i, 1.0), (p, -1.0), (q, 1.0)], spec.x_prev[i]);
            if i == 0 {
                copy_row = Some(row);
            }
        }
    }
    let rhs = s.constraints.rhs(spec.xi);
    for r in 0..s.constraints.num_rows() {
        let c = &s.constraints;
        let mut terms = Vec::with_capacity(d_in + d_y + d_out);
        terms.extend(c.e[r].iter().enumerate().filter(|(_, a)| **a != 0.0).map(|(i, a)| (z + i, *a)));
        terms.extend(c.f[r].iter().enumerate().filter(|(_, a)| **a != 0.0).map(|(j, a)| (y + j, *a)));
        terms.extend(c.g[r].iter().enumerate().filter(|(_, a)| **a != 0.0).map(|(j, a)| (x + j, *a)));
        match c.sense(r) {
            RowSense::Le => lp.add_le(terms, rhs[r]),
            RowSense::Eq => lp.add_eq(terms, rhs[r]),
        };
    }
    let theta = (!spec.future.terminal).then(|| {
        let theta = lp.add_var(0.0, f64::INFINITY, spec.weight);
        for cut in &spec.future.cuts {
            let mut terms: Vec<(usize, f64)> =
                cut.gradient.iter().enumerate().filter(|(_, u)| **u != 0.0).map(|(j, u)| (x + j, *u)).collect();
            terms.push((theta, -1.0));
            lp.add_le(terms, -cut.intercept());
        }
        theta
    });
    StageBlock { z, y, x, theta, copy_row, d_in, d_y, d_out }
}

/// Solution of a single stage LP.
#[derive(Debug, Clone, PartialEq)]
pub struct StageSolution {
    /// Optimal value including penalty and downstream epigraph.
    pub value: f64,
    /// Stage cost `(Aξ + a)ᵀy` alone.
    pub stage_cost: f64,
    pub state: Vec<f64>,
    pub internal: Vec<f64>,
    /// Derivative of `value` in the incoming state (regularized solves only).
    pub gradient: Vec<f64>,
}

/// Stage LP at `(x_prev, ξ)` with the cut epigraph of `future`.
pub struct StageProblem<'a> {
    pub stage: &'a StageModel,
    pub incoming: &'a Bounds,
    pub future: &'a LowerApprox,
    pub regularization: Option<f64>,
}

impl StageProblem<'_> {
    pub fn build(&self, x_prev: &[f64], xi: &[f64]) -> (LinearProgram, StageBlock) {
        let mut lp = LpBuilder::new();
        let block = add_stage_block(
            &mut lp,
            &BlockSpec {
                stage: self.stage,
                incoming: self.incoming,
                x_prev,
                xi,
                cost: self.stage.cost(xi),
                weight: 1.0,
                future: self.future,
                regularization: self.regularization,
            },
        );
        (lp.build(), block)
    }

    pub fn solve(&self, x_prev: &[f64], xi: &[f64]) -> Result<StageSolution> {
        let (lp, block) = self.build(x_prev, xi);
        let sol = solve_default(&lp)?;
        let stage = self.stage.stage_index;
        match sol.status {
            LpStatus::Optimal => {}
            LpStatus::Infeasible => return Err(DrmcoError::Infeasible { stage }),
            LpStatus::Unbounded => return Err(DrmcoError::Unbounded { stage }),
        }
        let internal = block.internal(&sol.primal);
        let stage_cost = self.stage.cost(xi).iter().zip(&internal).map(|(c, y)| c * y).sum();
        Ok(StageSolution {
            value: sol.objective,
            stage_cost,
            state: block.state(&sol.primal),
            internal,
            gradient: block.gradient(&sol),
        })
    }
}
