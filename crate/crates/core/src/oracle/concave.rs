//! Exact oracle for stages whose uncertainty enters only the objective.
//!
//! The dual Wasserstein recursion is exchanged with the inner minimization,
//! which turns the worst case over `ξ` into a support-function term per data
//! atom. For the box `Ξ = Π[L_i, U_i]` and reference point `ξ̂_k`:
//!
//! ```text
//! min  ρ₀λ₀ + Σ_j ρ_j λ_j + Σ_k w_k [ (Aξ̂_k + a)ᵀy_k − Σ_j λ_j g_j(ξ̂_k) + Σ_i s_{k,i}
//!                                     + M‖x_prev − z_k‖₁ + θ_k ]
//! s.t. s_{k,i} ≥ (L_i − ξ̂_{k,i}) w_{k,i},  s_{k,i} ≥ (U_i − ξ̂_{k,i}) w_{k,i}
//!      w_k = ζ_k + Aᵀy_k − Σ_j λ_j b_j,   ‖ζ_k‖_* ≤ λ₀
//!      (z_k, y_k, x_k) feasible for the stage,  θ_k ≥ cuts(x_k),  λ ≥ 0
//! ```
//!
//! Each atom carries its own copy `z_k` of the incoming state, which is the
//! regularized stage cost evaluated inside the exchange.

use drmco_lp::{solve_default, LinearProgram, LpBuilder, LpSolution, LpStatus};

use super::{Forward, OracleContext, OracleOutput};
use crate::approx::gap_at;
use crate::error::{DrmcoError, Result};
use crate::measures::Metric;
use crate::stage::{add_stage_block, BlockSpec, StageBlock};

/// Assembled master LP and the indices needed to read it back.
pub struct ConcaveMaster {
    pub lp: LinearProgram,
    pub blocks: Vec<StageBlock>,
    pub lambda0: usize,
    pub lambda_moments: Vec<usize>,
}

/// Builds the master LP at `x_prev`.
pub fn assemble(ctx: &OracleContext<'_>, x_prev: &[f64]) -> Result<ConcaveMaster> {
    let stage = ctx.stage;
    let t = stage.stage_index;
    let set = &stage.uncertainty_set;
    let upper: Vec<f64> = set.upper.iter().copied().collect::<Option<_>>().ok_or(DrmcoError::UnboundedUncertainty { stage: t })?;
    let lower = &set.lower;
    let delta = set.dim();
    let spec = ctx.ambiguity;
    let data = ctx.data;

    let mut lp = LpBuilder::new();
    let lambda0 = lp.add_var(0.0, f64::INFINITY, spec.radius);
    let lambda_moments: Vec<usize> = spec
        .moments
        .iter()
        .map(|m| {
            let reference: f64 = data.atoms.iter().zip(&data.weights).map(|(a, w)| w * m.eval(a)).sum();
            lp.add_var(0.0, f64::INFINITY, m.bound - reference)
        })
        .collect();

    let mut blocks = Vec::with_capacity(data.len());
    for (atom, &w) in data.atoms.iter().zip(&data.weights) {
        let cost: Vec<f64> = stage.cost(atom).iter().map(|c| w * c).collect();
        let block = add_stage_block(
            &mut lp,
            &BlockSpec {
                stage,
                incoming: ctx.incoming,
                x_prev,
                xi: atom,
                cost,
                weight: w,
                future: ctx.lower,
                regularization: Some(ctx.regularization),
            },
        );
        let zeta = lp.add_vars(delta, f64::NEG_INFINITY, f64::INFINITY, 0.0);
        let s = lp.add_vars(delta, f64::NEG_INFINITY, f64::INFINITY, w);
        match spec.metric {
            Metric::L1 => {
                for i in 0..delta {
                    lp.add_le(vec![(zeta + i, 1.0), (lambda0, -1.0)], 0.0);
                    lp.add_le(vec![(zeta + i, -1.0), (lambda0, -1.0)], 0.0);
                }
            }
            Metric::Linf => {
                let abs = lp.add_vars(delta, 0.0, f64::INFINITY, 0.0);
                for i in 0..delta {
                    lp.add_le(vec![(zeta + i, 1.0), (abs + i, -1.0)], 0.0);
                    lp.add_le(vec![(zeta + i, -1.0), (abs + i, -1.0)], 0.0);
                }
                let mut sum: Vec<(usize, f64)> = (0..delta).map(|i| (abs + i, 1.0)).collect();
                sum.push((lambda0, -1.0));
                lp.add_le(sum, 0.0);
            }
        }
        for i in 0..delta {
            // w_i = ζ_i + Σ_r A_{r,i} y_r − Σ_j λ_j b_{j,i}
            let mut w_terms = vec![(zeta + i, 1.0)];
            if !stage.obj_matrix.is_empty() {
                for (r, row) in stage.obj_matrix.iter().enumerate() {
                    if row[i] != 0.0 {
                        w_terms.push((block.y + r, row[i]));
                    }
                }
            }
            for (m, &lam) in spec.moments.iter().zip(&lambda_moments) {
                if m.b[i] != 0.0 {
                    w_terms.push((lam, -m.b[i]));
                }
            }
            for bound in [lower[i], upper[i]] {
                let scale = bound - atom[i];
                let mut terms: Vec<(usize, f64)> = w_terms.iter().map(|(v, a)| (*v, a * scale)).collect();
                terms.push((s + i, -1.0));
                lp.add_le(terms, 0.0);
            }
        }
        blocks.push(block);
    }
    Ok(ConcaveMaster { lp: lp.build(), blocks, lambda0, lambda_moments })
}

/// Master solution details exposed for auditing.
#[derive(Debug, Clone, PartialEq)]
pub struct ConcaveDiagnostics {
    pub master_value: f64,
    pub lambda0: f64,
    pub atom_states: Vec<Vec<f64>>,
    pub atom_gaps: Vec<f64>,
}

pub fn evaluate(ctx: &OracleContext<'_>, x_prev: &[f64], forward: Forward) -> Result<OracleOutput> {
    evaluate_detailed(ctx, x_prev, forward).map(|(out, _)| out)
}

pub fn evaluate_detailed(ctx: &OracleContext<'_>, x_prev: &[f64], forward: Forward) -> Result<(OracleOutput, ConcaveDiagnostics)> {
    let master = assemble(ctx, x_prev)?;
    let sol = solve_master(&master.lp, ctx.stage.stage_index)?;
    let mut gradient = vec![0.0; x_prev.len()];
    let mut states = Vec::with_capacity(master.blocks.len());
    let mut gaps = Vec::with_capacity(master.blocks.len());
    for block in &master.blocks {
        for (g, u) in gradient.iter_mut().zip(block.gradient(&sol)) {
            *g += u;
        }
        let x = block.state(&sol.primal);
        gaps.push(gap_at(ctx.lower, ctx.upper, &x)?);
        states.push(x);
    }
    let weights = &ctx.data.weights;
    let overestimate = if gaps.iter().zip(weights).any(|(g, w)| g.is_infinite() && *w > 0.0) {
        f64::INFINITY
    } else {
        sol.objective + gaps.iter().zip(weights).map(|(g, w)| g * w).sum::<f64>()
    };
    let k = forward.pick(&gaps, weights);
    let out = OracleOutput {
        cut: ctx.cut(sol.objective, gradient, x_prev),
        overestimate,
        next_state: states[k].clone(),
        gap: gaps[k],
    };
    let diag = ConcaveDiagnostics { master_value: sol.objective, lambda0: sol.primal[master.lambda0], atom_states: states, atom_gaps: gaps };
    Ok((out, diag))
}

fn solve_master(lp: &LinearProgram, stage: usize) -> Result<LpSolution> {
    let sol = solve_default(lp)?;
    match sol.status {
        LpStatus::Optimal => Ok(sol),
        LpStatus::Infeasible => Err(DrmcoError::Infeasible { stage }),
        LpStatus::Unbounded => Err(DrmcoError::Unbounded { stage }),
    }
}
