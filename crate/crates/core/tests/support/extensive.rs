//! Deterministic-equivalent LPs over the full outcome tree.
//!
//! Every node of stage `t ≥ 2` expands into all outcomes its ambiguity set
//! can put mass on: data atoms (nominal, CVaR), box vertices (robust) or the
//! per-atom candidate grid `{L_i, ξ̂_i, U_i}` (Wasserstein under L1). The
//! inner maximizations are dualized into epigraph rows so the whole tree is
//! one minimization. With `regularize`, every noninitial node reaches its
//! parent state through a copy penalized by `M_t‖·‖₁`, which reproduces the
//! regularized cost-to-go the solver approximates.

use drmco::{growth_rate, AmbiguityKind, Instance, Metric, RowSense};
use drmco_lp::{solve_default, LpBuilder, LpStatus};

use super::brute::capped_simplex_max;

type Expr = Vec<(usize, f64)>;

enum Parent<'a> {
    Fixed(&'a [f64]),
    Vars(usize),
}

struct Tree<'a> {
    inst: &'a Instance,
    regularize: bool,
    lp: LpBuilder,
}

/// Outcomes of stage `t`, grouped per data atom, each with its transport distance.
pub fn children(inst: &Instance, t: usize) -> Vec<Vec<(Vec<f64>, f64)>> {
    let spec = inst.ambiguity_of(t);
    let data = inst.data_of(t);
    let set = &inst.stage(t).uncertainty_set;
    match spec.kind {
        AmbiguityKind::Nominal | AmbiguityKind::Cvar => data.atoms.iter().map(|a| vec![(a.clone(), 0.0)]).collect(),
        AmbiguityKind::Robust => vec![set.vertices().expect("bounded").into_iter().map(|v| (v, 0.0)).collect()],
        AmbiguityKind::Wasserstein => {
            assert_eq!(spec.metric, Metric::L1);
            data.atoms
                .iter()
                .map(|atom| {
                    let mut grid = vec![Vec::new()];
                    for i in 0..atom.len() {
                        let mut values = vec![set.lower[i], atom[i]];
                        values.extend(set.upper[i]);
                        grid = grid
                            .into_iter()
                            .flat_map(|p: Vec<f64>| {
                                values.iter().map(move |v| {
                                    let mut q = p.clone();
                                    q.push(*v);
                                    q
                                })
                            })
                            .collect();
                    }
                    grid.into_iter()
                        .map(|xi| {
                            let d = xi.iter().zip(atom).map(|(a, b)| (a - b).abs()).sum();
                            (xi, d)
                        })
                        .collect()
                })
                .collect()
        }
    }
}

impl Tree<'_> {
    fn node(&mut self, t: usize, parent: Parent<'_>, xi: &[f64]) -> Expr {
        let s = self.inst.stage(t);
        let mut expr = Expr::new();
        let din = s.state_dim_in;
        // Incoming state terms: variable index or constant value per coordinate.
        let mut incoming: Vec<Result<usize, f64>> = Vec::with_capacity(din);
        if self.regularize && t >= 2 {
            let m = self.inst.regularization[t - 1];
            let bounds = self.inst.incoming_bounds(t);
            for i in 0..din {
                let z = self.lp.add_var(bounds.lower[i], bounds.upper[i], 0.0);
                let p = self.lp.add_var(0.0, f64::INFINITY, 0.0);
                let q = self.lp.add_var(0.0, f64::INFINITY, 0.0);
                expr.push((p, m));
                expr.push((q, m));
                match parent {
                    Parent::Fixed(x) => self.lp.add_eq(vec![(z, 1.0), (p, -1.0), (q, 1.0)], x[i]),
                    Parent::Vars(v) => self.lp.add_eq(vec![(z, 1.0), (p, -1.0), (q, 1.0), (v + i, -1.0)], 0.0),
                };
                incoming.push(Ok(z));
            }
        } else {
            for i in 0..din {
                incoming.push(match parent {
                    Parent::Fixed(x) => Err(x[i]),
                    Parent::Vars(v) => Ok(v + i),
                });
            }
        }
        let cost = s.cost(xi);
        let y = self.lp.num_vars();
        for j in 0..s.internal_dim {
            self.lp.add_var(s.internal_bounds.lower[j], s.internal_bounds.upper[j], 0.0);
            if cost[j] != 0.0 {
                expr.push((y + j, cost[j]));
            }
        }
        let x = self.lp.num_vars();
        for j in 0..s.state_dim_out {
            self.lp.add_var(s.state_bounds.lower[j], s.state_bounds.upper[j], 0.0);
        }
        let c = &s.constraints;
        let rhs = c.rhs(xi);
        for r in 0..c.num_rows() {
            let mut b = rhs[r];
            let mut terms = Vec::new();
            for (i, a) in c.e[r].iter().enumerate().filter(|(_, a)| **a != 0.0) {
                match incoming[i] {
                    Ok(v) => terms.push((v, *a)),
                    Err(val) => b -= a * val,
                }
            }
            terms.extend(c.f[r].iter().enumerate().filter(|(_, a)| **a != 0.0).map(|(j, a)| (y + j, *a)));
            terms.extend(c.g[r].iter().enumerate().filter(|(_, a)| **a != 0.0).map(|(j, a)| (x + j, *a)));
            match c.sense(r) {
                RowSense::Le => self.lp.add_le(terms, b),
                RowSense::Eq => self.lp.add_eq(terms, b),
            };
        }
        if t < self.inst.num_stages() {
            expr.extend(self.future(t + 1, x));
        }
        expr
    }

    /// Worst-case expected value of stage `t` given parent state variables `x`.
    fn future(&mut self, t: usize, x: usize) -> Expr {
        let spec = self.inst.ambiguity_of(t).clone();
        let weights = self.inst.data_of(t).weights.clone();
        let groups = children(self.inst, t);
        let mut expr = Expr::new();
        match spec.kind {
            AmbiguityKind::Nominal => {
                for (w, group) in weights.iter().zip(&groups) {
                    let child = self.node(t, Parent::Vars(x), &group[0].0);
                    expr.extend(child.into_iter().map(|(v, c)| (v, w * c)));
                }
            }
            AmbiguityKind::Cvar => {
                let (a, b) = (spec.cvar_alpha, spec.cvar_beta);
                let eta = self.lp.add_var(f64::NEG_INFINITY, f64::INFINITY, 0.0);
                expr.push((eta, 1.0));
                for (w, group) in weights.iter().zip(&groups) {
                    let s = self.lp.add_var(0.0, f64::INFINITY, 0.0);
                    expr.push((s, b * w + (1.0 - b) * w / a));
                    let mut row = self.node(t, Parent::Vars(x), &group[0].0);
                    row.push((eta, -1.0));
                    row.push((s, -1.0));
                    self.lp.add_le(row, 0.0);
                }
            }
            AmbiguityKind::Robust => {
                let eta = self.lp.add_var(f64::NEG_INFINITY, f64::INFINITY, 0.0);
                expr.push((eta, 1.0));
                for (xi, _) in &groups[0] {
                    let mut row = self.node(t, Parent::Vars(x), xi);
                    row.push((eta, -1.0));
                    self.lp.add_le(row, 0.0);
                }
            }
            AmbiguityKind::Wasserstein => {
                assert!(spec.moments.is_empty());
                let rate = growth_rate(self.inst.stage(t), spec.metric).unwrap();
                let lambda = self.lp.add_var(rate, f64::INFINITY, 0.0);
                expr.push((lambda, spec.radius));
                for (w, group) in weights.iter().zip(&groups) {
                    let tau = self.lp.add_var(f64::NEG_INFINITY, f64::INFINITY, 0.0);
                    expr.push((tau, *w));
                    for (xi, d) in group {
                        let mut row = self.node(t, Parent::Vars(x), xi);
                        row.push((lambda, -d));
                        row.push((tau, -1.0));
                        self.lp.add_le(row, 0.0);
                    }
                }
            }
        }
        expr
    }
}

/// Optimal value of stage `t` at `(x_prev, ξ)` plus its exact future, as one LP.
pub fn subtree_value(inst: &Instance, t: usize, x_prev: &[f64], xi: &[f64], regularize: bool) -> f64 {
    let mut tree = Tree { inst, regularize, lp: LpBuilder::new() };
    let expr = tree.node(t, Parent::Fixed(x_prev), xi);
    let mut lp = tree.lp;
    for (v, c) in expr {
        lp.add_cost(v, c);
    }
    let sol = solve_default(&lp.build()).expect("extensive LP solves");
    assert_eq!(sol.status, LpStatus::Optimal, "extensive LP at stage {t}");
    sol.objective
}

/// Deterministic-equivalent optimum of the whole instance.
pub fn full_value(inst: &Instance) -> f64 {
    subtree_value(inst, 1, &inst.x0, &inst.xi1, false)
}

/// Exact cost-to-go after stage `t − 1` at state `x`. The outermost worst case
/// is taken explicitly over the child values, with the transport multiplier
/// found by scanning the breakpoints of the piecewise linear dual.
pub fn cost_to_go(inst: &Instance, t: usize, x: &[f64], regularize: bool) -> f64 {
    let spec = inst.ambiguity_of(t);
    let weights = &inst.data_of(t).weights;
    let groups = children(inst, t);
    let values: Vec<Vec<(f64, f64)>> = groups
        .iter()
        .map(|g| g.iter().map(|(xi, d)| (subtree_value(inst, t, x, xi, regularize), *d)).collect())
        .collect();
    match spec.kind {
        AmbiguityKind::Nominal => weights.iter().zip(&values).map(|(w, v)| w * v[0].0).sum(),
        AmbiguityKind::Cvar => {
            let (a, b) = (spec.cvar_alpha, spec.cvar_beta);
            let caps: Vec<f64> = weights.iter().map(|w| b * w + (1.0 - b) * w / a).collect();
            let v: Vec<f64> = values.iter().map(|v| v[0].0).collect();
            capped_simplex_max(&v, &caps)
        }
        AmbiguityKind::Robust => values[0].iter().map(|v| v.0).fold(f64::NEG_INFINITY, f64::max),
        AmbiguityKind::Wasserstein => {
            let rate = growth_rate(inst.stage(t), spec.metric).unwrap();
            let dual = |lambda: f64| {
                spec.radius * lambda
                    + weights
                        .iter()
                        .zip(&values)
                        .map(|(w, g)| w * g.iter().map(|(v, d)| v - lambda * d).fold(f64::NEG_INFINITY, f64::max))
                        .sum::<f64>()
            };
            let mut candidates = vec![rate];
            for g in &values {
                for (i, (vi, di)) in g.iter().enumerate() {
                    for (vj, dj) in &g[i + 1..] {
                        if (di - dj).abs() > 1e-12 {
                            let l = (vi - vj) / (di - dj);
                            if l >= rate {
                                candidates.push(l);
                            }
                        }
                    }
                }
            }
            candidates.into_iter().map(dual).fold(f64::INFINITY, f64::min)
        }
    }
}
