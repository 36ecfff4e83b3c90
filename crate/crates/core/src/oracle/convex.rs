//! Exact oracle for stages whose uncertainty enters only the right-hand side.
//!
//! The worst-case expectation is a maximum of a convex function of `ξ` over
//! the lifted set `{(ζ, ξ): ξ ∈ Ξ, ζ ≥ ‖ξ − ξ̂_k‖₁}`, so it is attained at the
//! vertices of that set. Each distinct vertex gets one regularized stage LP;
//! a small master LP then combines the vertex values:
//!
//! ```text
//! min  ρ₀λ₀ + Σ_j ρ_j λ_j + Σ_k w_k τ_k
//! s.t. τ_k ≥ Q(ξ̃_l) − λ₀ ζ̃_l − Σ_j λ_j g_j(ξ̃_l)    for every vertex l of atom k
//!      λ₀ ≥ r,  λ_j ≥ 0
//! ```
//!
//! Its duals `(θ, κ)` give the cut `θ r + Σ κ_l (Q(ξ̃_l) + u_lᵀ(x − x_prev))`.

use std::collections::HashMap;

use drmco_lp::{solve_default, LinearProgram, LpBuilder, LpStatus};
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::{solve_outcomes, Forward, OracleContext, OracleOutput, OutcomeSolve};
use crate::error::{DrmcoError, Result};
use crate::measures::Metric;
use crate::model::{AmbiguitySpec, UncertaintySet};

pub use crate::model::growth_rate;

/// A vertex `(ζ̃, ξ̃)` of a lifted uncertainty set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LiftedVertex {
    pub zeta: f64,
    pub xi: Vec<f64>,
}

/// Vertices of the lifted set of one data atom under the L1 distance.
///
/// Every coordinate of a vertex sits at a finite bound or at the atom; the
/// atom itself comes first.
pub fn lifted_vertices(set: &UncertaintySet, atom: &[f64], cap: usize) -> Result<Vec<LiftedVertex>> {
    let delta = set.dim();
    let choices: Vec<Vec<f64>> = (0..delta)
        .map(|i| {
            let mut c = vec![atom[i]];
            for v in std::iter::once(set.lower[i]).chain(set.upper[i]) {
                if !c.contains(&v) {
                    c.push(v);
                }
            }
            c
        })
        .collect();
    let count = choices.iter().fold(1usize, |n, c| n.saturating_mul(c.len()));
    if count > cap {
        return Err(DrmcoError::TooManyVertices { count, cap });
    }
    let mut vertices = Vec::with_capacity(count);
    let mut index = vec![0usize; delta];
    loop {
        let xi: Vec<f64> = index.iter().zip(&choices).map(|(&j, c)| c[j]).collect();
        if is_vertex(set, atom, &xi) {
            let zeta = Metric::L1.distance(&xi, atom);
            vertices.push(LiftedVertex { zeta, xi });
        }
        // Odometer over the candidate grid, first coordinate fastest.
        let mut i = 0;
        loop {
            if i == delta {
                return Ok(vertices);
            }
            index[i] += 1;
            if index[i] < choices[i].len() {
                break;
            }
            index[i] = 0;
            i += 1;
        }
    }
}

/// Active-constraint rank test at a candidate point of the lifted set.
fn is_vertex(set: &UncertaintySet, atom: &[f64], xi: &[f64]) -> bool {
    let delta = xi.len();
    let base: Vec<f64> = xi.iter().zip(atom).map(|(x, a)| if x < a { -1.0 } else { 1.0 }).collect();
    let mut rows: Vec<Vec<f64>> = Vec::new();
    let sign_row = |s: &[f64]| {
        let mut r = vec![-1.0];
        r.extend_from_slice(s);
        r
    };
    rows.push(sign_row(&base));
    for i in 0..delta {
        if xi[i] == atom[i] {
            let mut s = base.clone();
            s[i] = -s[i];
            rows.push(sign_row(&s));
        }
        if xi[i] == set.lower[i] || set.upper[i] == Some(xi[i]) {
            let mut r = vec![0.0; delta + 1];
            r[i + 1] = 1.0;
            rows.push(r);
        }
    }
    let m = DMatrix::from_fn(rows.len(), delta + 1, |r, c| rows[r][c]);
    m.rank(1e-9) == delta + 1
}

/// Everything computed during one convex-oracle call.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvexDiagnostics {
    pub vertices: Vec<Vec<LiftedVertex>>,
    /// Lower stage value at each vertex, per atom.
    pub values: Vec<Vec<f64>>,
    /// Master duals of the vertex rows, per atom.
    pub kappa: Vec<Vec<f64>>,
    /// Master dual of the growth-rate row(s), summed.
    pub theta: f64,
    pub lambda0: f64,
    pub lambda_moments: Vec<f64>,
    pub master_value: f64,
    pub dual_value: f64,
    pub rate: f64,
}

/// Master LP with the row layout needed to read its duals.
pub struct ConvexMaster {
    pub lp: LinearProgram,
    /// First vertex row of each atom.
    pub row_start: Vec<usize>,
    pub rate_rows: Vec<usize>,
    pub lambda0: usize,
    pub lambda_moments: Vec<usize>,
}

/// Builds the master from vertex values.
pub fn assemble_master(
    spec: &AmbiguitySpec,
    set: &UncertaintySet,
    weights: &[f64],
    vertices: &[Vec<LiftedVertex>],
    values: &[Vec<f64>],
    rate: f64,
) -> ConvexMaster {
    let mut lp = LpBuilder::new();
    let lambda0 = lp.add_var(f64::NEG_INFINITY, f64::INFINITY, spec.radius);
    let lambda_moments: Vec<usize> = spec.moments.iter().map(|m| lp.add_var(0.0, f64::INFINITY, m.bound)).collect();
    let mut rate_rows = Vec::new();
    if spec.moments.is_empty() {
        rate_rows.push(lp.add_le(vec![(lambda0, -1.0)], -rate));
    } else {
        // Every recession direction must be dominated, including the moment terms.
        let unbounded: Vec<usize> = (0..set.dim()).filter(|&i| set.upper[i].is_none()).collect();
        rate_rows.push(lp.add_le(vec![(lambda0, -1.0)], -rate));
        for i in unbounded {
            let mut terms = vec![(lambda0, -1.0)];
            terms.extend(spec.moments.iter().zip(&lambda_moments).map(|(m, &j)| (j, -m.b[i])));
            rate_rows.push(lp.add_le(terms, -rate));
        }
    }
    let mut row_start = Vec::with_capacity(weights.len());
    for ((w, verts), vals) in weights.iter().zip(vertices).zip(values) {
        let tau = lp.add_var(f64::NEG_INFINITY, f64::INFINITY, *w);
        let mut first = None;
        for (v, q) in verts.iter().zip(vals) {
            let mut terms = vec![(tau, -1.0), (lambda0, -v.zeta)];
            terms.extend(spec.moments.iter().zip(&lambda_moments).map(|(m, &j)| (j, -m.eval(&v.xi))));
            let r = lp.add_le(terms, -q);
            first.get_or_insert(r);
        }
        row_start.push(first.unwrap_or(0));
    }
    ConvexMaster { lp: lp.build(), row_start, rate_rows, lambda0, lambda_moments }
}

pub fn evaluate(ctx: &OracleContext<'_>, x_prev: &[f64], forward: Forward) -> Result<OracleOutput> {
    evaluate_detailed(ctx, x_prev, forward).map(|(out, _)| out)
}

pub fn evaluate_detailed(ctx: &OracleContext<'_>, x_prev: &[f64], forward: Forward) -> Result<(OracleOutput, ConvexDiagnostics)> {
    let stage = ctx.stage;
    let t = stage.stage_index;
    let spec = ctx.ambiguity;
    if spec.metric != Metric::L1 {
        return Err(DrmcoError::Unsupported(format!("stage {t}: lifted vertices are only enumerated for the L1 metric")));
    }
    let rate = growth_rate(stage, spec.metric)?;
    let set = &stage.uncertainty_set;
    let vertices: Vec<Vec<LiftedVertex>> =
        ctx.data.atoms.iter().map(|a| lifted_vertices(set, a, ctx.vertex_cap)).collect::<Result<_>>()?;

    // One stage LP per distinct vertex point.
    let mut unique: Vec<Vec<f64>> = Vec::new();
    let mut slot: HashMap<Vec<u64>, usize> = HashMap::new();
    let lookup: Vec<Vec<usize>> = vertices
        .iter()
        .map(|verts| {
            verts
                .iter()
                .map(|v| {
                    let key: Vec<u64> = v.xi.iter().map(|x| x.to_bits()).collect();
                    *slot.entry(key).or_insert_with(|| {
                        unique.push(v.xi.clone());
                        unique.len() - 1
                    })
                })
                .collect()
        })
        .collect();
    let solved: Vec<OutcomeSolve> = solve_outcomes(ctx, x_prev, &unique)?;
    let values: Vec<Vec<f64>> = lookup.iter().map(|ix| ix.iter().map(|&j| solved[j].value).collect()).collect();

    let master = assemble_master(spec, set, &ctx.data.weights, &vertices, &values, rate);
    let sol = solve_default(&master.lp)?;
    match sol.status {
        LpStatus::Optimal => {}
        LpStatus::Infeasible => return Err(DrmcoError::Infeasible { stage: t }),
        LpStatus::Unbounded => return Err(DrmcoError::Unbounded { stage: t }),
    }

    let theta: f64 = master.rate_rows.iter().map(|&r| sol.ineq_duals[r].max(0.0)).sum();
    let mut cut_value = theta * rate;
    let mut gradient = vec![0.0; x_prev.len()];
    let mut kappa = Vec::with_capacity(vertices.len());
    for (k, ix) in lookup.iter().enumerate() {
        let ks: Vec<f64> = (0..ix.len()).map(|l| sol.ineq_duals[master.row_start[k] + l].max(0.0)).collect();
        for (&j, &c) in ix.iter().zip(&ks) {
            if c > 0.0 {
                cut_value += c * solved[j].value;
                for (g, u) in gradient.iter_mut().zip(&solved[j].gradient) {
                    *g += c * u;
                }
            }
        }
        kappa.push(ks);
    }

    // Per-atom gap from the gap-maximizing vertex.
    let best: Vec<usize> = lookup
        .iter()
        .map(|ix| {
            let gaps: Vec<f64> = ix.iter().map(|&j| solved[j].gap).collect();
            ix[super::argmax_first(&gaps)]
        })
        .collect();
    let atom_gaps: Vec<f64> = best.iter().map(|&j| solved[j].gap).collect();
    let weights = &ctx.data.weights;
    let overestimate = if atom_gaps.iter().zip(weights).any(|(g, w)| g.is_infinite() && *w > 0.0) {
        f64::INFINITY
    } else {
        sol.objective + atom_gaps.iter().zip(weights).map(|(g, w)| g * w).sum::<f64>()
    };
    let chosen = match forward {
        Forward::GapMax => best[super::argmax_first(&atom_gaps)],
        // The atom itself is always the first vertex.
        Forward::Sampled(_) => lookup[forward.pick(&atom_gaps, weights)][0],
    };

    let out = OracleOutput {
        cut: ctx.cut(cut_value, gradient, x_prev),
        overestimate,
        next_state: solved[chosen].state.clone(),
        gap: solved[chosen].gap,
    };
    let diag = ConvexDiagnostics {
        vertices,
        values,
        kappa,
        theta,
        lambda0: sol.primal[master.lambda0],
        lambda_moments: master.lambda_moments.iter().map(|&j| sol.primal[j]).collect(),
        master_value: sol.objective,
        dual_value: cut_value,
        rate,
    };
    Ok((out, diag))
}
