//! Independent checks for LP solutions: brute-force vertex enumeration,
//! a dual-certificate recomputation and a random instance generator.
#![allow(dead_code)]

use drmco_lp::LinearProgram;
use rand::Rng;

/// Minimum of the objective over all vertices of a box-bounded LP.
/// Returns `(optimum, vertex count)`; the optimum is `None` when no vertex exists.
pub fn vertex_optimum(lp: &LinearProgram) -> (Option<f64>, usize) {
    let n = lp.num_vars();
    assert!(lp.lower.iter().chain(&lp.upper).all(|v| v.is_finite()));
    // Candidate hyperplanes: inequality rows, bounds. Equalities are always active.
    let mut planes: Vec<(Vec<f64>, f64)> = Vec::new();
    for (row, b) in lp.ineq_matrix.iter().zip(&lp.ineq_rhs) {
        planes.push((row.clone(), *b));
    }
    for j in 0..n {
        let mut e = vec![0.0; n];
        e[j] = 1.0;
        planes.push((e.clone(), lp.lower[j]));
        planes.push((e, lp.upper[j]));
    }
    let eqs: Vec<(Vec<f64>, f64)> = lp.eq_matrix.iter().cloned().zip(lp.eq_rhs.iter().copied()).collect();
    let mut best: Option<f64> = None;
    let mut vertices: Vec<Vec<f64>> = Vec::new();
    // Redundant equalities need extra active planes, hence the range.
    let fewest = n.saturating_sub(eqs.len());
    let subsets = (fewest..=n).flat_map(|k| combinations(planes.len(), k));
    for subset in subsets {
        let mut system: Vec<(Vec<f64>, f64)> = eqs.clone();
        system.extend(subset.iter().map(|&i| planes[i].clone()));
        let Some(x) = solve_square_or_overdetermined(&system, n) else { continue };
        if !feasible(lp, &x, 1e-9) {
            continue;
        }
        if !vertices.iter().any(|v| v.iter().zip(&x).all(|(a, b)| (a - b).abs() < 1e-9)) {
            vertices.push(x.clone());
        }
        let value = lp.objective.iter().zip(&x).map(|(c, v)| c * v).sum::<f64>();
        best = Some(best.map_or(value, |b: f64| b.min(value)));
    }
    (best, vertices.len())
}

fn feasible(lp: &LinearProgram, x: &[f64], tol: f64) -> bool {
    let dot = |r: &[f64]| r.iter().zip(x).map(|(a, b)| a * b).sum::<f64>();
    lp.ineq_matrix.iter().zip(&lp.ineq_rhs).all(|(r, b)| dot(r) <= b + tol)
        && lp.eq_matrix.iter().zip(&lp.eq_rhs).all(|(r, b)| (dot(r) - b).abs() <= tol)
        && (0..x.len()).all(|j| x[j] >= lp.lower[j] - tol && x[j] <= lp.upper[j] + tol)
}

/// Solves a system with `n` unknowns whose rank must be exactly `n`.
fn solve_square_or_overdetermined(rows: &[(Vec<f64>, f64)], n: usize) -> Option<Vec<f64>> {
    let mut a: Vec<Vec<f64>> = rows.iter().map(|(r, b)| {
        let mut v = r.clone();
        v.push(*b);
        v
    }).collect();
    let m = a.len();
    let mut pivot_row = 0;
    let mut pivots = Vec::new();
    for col in 0..n {
        let Some(p) = (pivot_row..m).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs())) else { break };
        if a[p][col].abs() < 1e-10 {
            continue;
        }
        a.swap(p, pivot_row);
        let pv = a[pivot_row][col];
        for v in a[pivot_row].iter_mut() {
            *v /= pv;
        }
        for i in 0..m {
            if i != pivot_row {
                let f = a[i][col];
                if f != 0.0 {
                    for k in 0..=n {
                        a[i][k] -= f * a[pivot_row][k];
                    }
                }
            }
        }
        pivots.push(col);
        pivot_row += 1;
    }
    if pivots.len() < n {
        return None;
    }
    // Remaining rows must be consistent.
    if a[pivot_row..].iter().any(|r| r[n].abs() > 1e-9) {
        return None;
    }
    let mut x = vec![0.0; n];
    for (i, &c) in pivots.iter().enumerate() {
        x[c] = a[i][n];
    }
    Some(x)
}

pub fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut current = Vec::with_capacity(k);
    fn rec(start: usize, n: usize, k: usize, current: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if current.len() == k {
            out.push(current.clone());
            return;
        }
        for i in start..n {
            current.push(i);
            rec(i + 1, n, k, current, out);
            current.pop();
        }
    }
    rec(0, n, k, &mut current, &mut out);
    out
}

/// Dual objective and dual infeasibility of `(ineq_duals, eq_duals)` recomputed
/// from scratch: `max −gᵀπ − eᵀσ + Σ_j min_{x_j∈[l_j,u_j]} d_j x_j`.
pub fn dual_certificate(lp: &LinearProgram, ineq_duals: &[f64], eq_duals: &[f64]) -> (f64, f64) {
    let n = lp.num_vars();
    let mut infeasibility = ineq_duals.iter().map(|p| (-p).max(0.0)).fold(0.0, f64::max);
    let mut value = 0.0;
    for (b, p) in lp.ineq_rhs.iter().zip(ineq_duals) {
        value -= b * p;
    }
    for (b, p) in lp.eq_rhs.iter().zip(eq_duals) {
        value -= b * p;
    }
    for j in 0..n {
        let mut d = lp.objective[j];
        for (row, p) in lp.ineq_matrix.iter().zip(ineq_duals) {
            d += row[j] * p;
        }
        for (row, p) in lp.eq_matrix.iter().zip(eq_duals) {
            d += row[j] * p;
        }
        let bound = if d >= 0.0 { lp.lower[j] } else { lp.upper[j] };
        if bound.is_finite() {
            value += d * bound;
        } else {
            infeasibility = infeasibility.max(d.abs());
        }
    }
    (value, infeasibility)
}

/// Random feasible and bounded LP with integer data in `[-5, 5]`.
///
/// Feasibility comes from an interior integer point; boundedness from a
/// dual-feasible construction of the cost vector, so infinite bounds occur.
pub fn random_lp<R: Rng>(rng: &mut R, max_vars: usize, max_rows: usize, finite_box: bool) -> LinearProgram {
    let n = rng.random_range(1..=max_vars);
    let rows = rng.random_range(1..=max_rows);
    let n_eq = if rows > 1 { rng.random_range(0..=rows / 3) } else { 0 };
    let n_ineq = rows - n_eq;
    let mut lower = Vec::with_capacity(n);
    let mut upper = Vec::with_capacity(n);
    let mut x0 = Vec::with_capacity(n);
    for _ in 0..n {
        let l = rng.random_range(-5..=0) as f64;
        let u = rng.random_range(1..=5) as f64;
        let x = rng.random_range(l as i32..=u as i32) as f64;
        let (l, u) = if finite_box {
            (l, u)
        } else {
            match rng.random_range(0..4) {
                0 => (f64::NEG_INFINITY, u),
                1 => (l, f64::INFINITY),
                2 => (f64::NEG_INFINITY, f64::INFINITY),
                _ => (l, u),
            }
        };
        lower.push(l);
        upper.push(u);
        x0.push(x);
    }
    let int_row = |rng: &mut R| (0..n).map(|_| rng.random_range(-5..=5) as f64).collect::<Vec<f64>>();
    let ineq_matrix: Vec<Vec<f64>> = (0..n_ineq).map(|_| int_row(rng)).collect();
    let eq_matrix: Vec<Vec<f64>> = (0..n_eq).map(|_| int_row(rng)).collect();
    let dot = |r: &[f64], x: &[f64]| r.iter().zip(x).map(|(a, b)| a * b).sum::<f64>();
    let ineq_rhs = ineq_matrix.iter().map(|r| dot(r, &x0) + rng.random_range(0..=3) as f64).collect();
    let eq_rhs = eq_matrix.iter().map(|r| dot(r, &x0)).collect();
    // c = d − Gᵀy − Eᵀz with y ≥ 0 and d sign-compatible with the bounds.
    let y: Vec<f64> = (0..n_ineq).map(|_| rng.random_range(0..=2) as f64).collect();
    let z: Vec<f64> = (0..n_eq).map(|_| rng.random_range(-2..=2) as f64).collect();
    let mut objective = Vec::with_capacity(n);
    for j in 0..n {
        let d = match (lower[j].is_finite(), upper[j].is_finite()) {
            (true, true) => rng.random_range(-3..=3) as f64,
            (true, false) => rng.random_range(0..=3) as f64,
            (false, true) => -(rng.random_range(0..=3) as f64),
            (false, false) => 0.0,
        };
        let mut c = d;
        for (row, yi) in ineq_matrix.iter().zip(&y) {
            c -= row[j] * yi;
        }
        for (row, zi) in eq_matrix.iter().zip(&z) {
            c -= row[j] * zi;
        }
        objective.push(c);
    }
    LinearProgram { objective, ineq_matrix, ineq_rhs, eq_matrix, eq_rhs, lower, upper }
}
