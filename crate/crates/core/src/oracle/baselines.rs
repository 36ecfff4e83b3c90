//! Baseline oracles: risk-neutral expectation, (α, β)-CVaR and worst case
//! over the vertices of a box.

use serde::{Deserialize, Serialize};

use super::{solve_outcomes, weighted_overestimate, Forward, OracleContext, OracleOutput};
use crate::error::{DrmcoError, Result};
use crate::model::{oracle_kind, OracleKind};

/// Worst-case weights of the capped-simplex CVaR ambiguity set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvarWeights {
    pub weights: Vec<f64>,
    pub alpha: f64,
    pub beta: f64,
}

/// Maximizes `Σ p_k values_k` over `0 ≤ p_k ≤ β/n + (1−β)/(αn)`, `Σ p = 1`.
pub fn cvar_weights(values: &[f64], alpha: f64, beta: f64) -> CvarWeights {
    let n = values.len();
    let base = vec![1.0 / n as f64; n];
    cvar_weights_with_base(values, &base, alpha, beta)
}

/// Same as [`cvar_weights`] for a nonuniform reference measure: the cap on
/// outcome `k` is `β w_k + (1−β) w_k / α`.
pub fn cvar_weights_with_base(values: &[f64], base: &[f64], alpha: f64, beta: f64) -> CvarWeights {
    let n = values.len();
    if beta >= 1.0 {
        return CvarWeights { weights: base.to_vec(), alpha, beta };
    }
    let mut order: Vec<usize> = (0..n).collect();
    // Descending by value, ascending index on ties.
    order.sort_by(|&a, &b| values[b].total_cmp(&values[a]).then(a.cmp(&b)));
    let mut weights = vec![0.0; n];
    let mut remaining = 1.0_f64;
    for k in order {
        if remaining <= 0.0 {
            break;
        }
        let cap = beta * base[k] + (1.0 - beta) * base[k] / alpha;
        let take = cap.min(remaining);
        weights[k] = take;
        remaining -= take;
    }
    CvarWeights { weights, alpha, beta }
}

fn weighted_outcomes(ctx: &OracleContext<'_>, x_prev: &[f64], forward: Forward, lower_w: &dyn Fn(&[f64]) -> Vec<f64>) -> Result<OracleOutput> {
    let outs = solve_outcomes(ctx, x_prev, &ctx.data.atoms)?;
    let values: Vec<f64> = outs.iter().map(|o| o.value).collect();
    let gaps: Vec<f64> = outs.iter().map(|o| o.gap).collect();
    let p = lower_w(&values);
    let value: f64 = p.iter().zip(&values).map(|(w, v)| w * v).sum();
    let mut gradient = vec![0.0; x_prev.len()];
    for (w, o) in p.iter().zip(&outs) {
        for (g, u) in gradient.iter_mut().zip(&o.gradient) {
            *g += w * u;
        }
    }
    let overestimate = if gaps.iter().any(|g| g.is_infinite()) {
        f64::INFINITY
    } else {
        let upper_values: Vec<f64> = values.iter().zip(&gaps).map(|(v, g)| v + g).collect();
        let q = lower_w(&upper_values);
        weighted_overestimate(&q, &values, &gaps)
    };
    let k = forward.pick(&gaps, &ctx.data.weights);
    Ok(OracleOutput { cut: ctx.cut(value, gradient, x_prev), overestimate, next_state: outs[k].state.clone(), gap: gaps[k] })
}

/// Risk-neutral oracle under the data measure.
pub fn nominal_evaluate(ctx: &OracleContext<'_>, x_prev: &[f64], forward: Forward) -> Result<OracleOutput> {
    let w = ctx.data.weights.clone();
    weighted_outcomes(ctx, x_prev, forward, &|_| w.clone())
}

/// CVaR oracle: lower weights on outcome values, upper weights on overestimates.
pub fn cvar_evaluate(ctx: &OracleContext<'_>, x_prev: &[f64], forward: Forward) -> Result<OracleOutput> {
    let (alpha, beta) = (ctx.ambiguity.cvar_alpha, ctx.ambiguity.cvar_beta);
    let base = ctx.data.weights.clone();
    weighted_outcomes(ctx, x_prev, forward, &|v| cvar_weights_with_base(v, &base, alpha, beta).weights)
}

/// Worst case over the vertices of a bounded box.
///
/// The cut comes from the vertex with the largest lower value; the forward
/// state from the vertex with the largest gap, so that the overestimate
/// (largest `value + gap`) stays within that gap of the cut.
pub fn mrco_evaluate(ctx: &OracleContext<'_>, x_prev: &[f64], forward: Forward) -> Result<OracleOutput> {
    let stage = ctx.stage.stage_index;
    if oracle_kind(ctx.stage)? == OracleKind::Concave {
        return Err(DrmcoError::Unsupported(format!(
            "stage {stage}: the worst case of an objective-uncertain stage is not attained at box vertices"
        )));
    }
    let vertices = ctx.stage.uncertainty_set.vertices().ok_or(DrmcoError::UnboundedUncertainty { stage })?;
    let outs = solve_outcomes(ctx, x_prev, &vertices)?;
    let values: Vec<f64> = outs.iter().map(|o| o.value).collect();
    let gaps: Vec<f64> = outs.iter().map(|o| o.gap).collect();
    let worst = super::argmax_first(&values);
    let overestimate = outs.iter().map(|o| o.value + o.gap).fold(f64::NEG_INFINITY, f64::max);
    let uniform = vec![1.0 / vertices.len() as f64; vertices.len()];
    let k = forward.pick(&gaps, &uniform);
    Ok(OracleOutput {
        cut: ctx.cut(values[worst], outs[worst].gradient.clone(), x_prev),
        overestimate,
        next_state: outs[k].state.clone(),
        gap: gaps[k],
    })
}
