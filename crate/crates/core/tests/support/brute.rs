//! Enumeration oracles: capped-simplex vertices, two-point worst-case
//! measures and transport-polytope vertices.

use drmco::DiscreteMeasure;
use nalgebra::{DMatrix, DVector};

/// `max Σ p_k v_k` over `Σ p = 1, 0 ≤ p ≤ caps`, by enumerating the vertices
/// of the capped simplex: every coordinate but one sits at a bound.
pub fn capped_simplex_max(values: &[f64], caps: &[f64]) -> f64 {
    capped_simplex_argmax(values, caps).0
}

pub fn capped_simplex_argmax(values: &[f64], caps: &[f64]) -> (f64, Vec<f64>) {
    let n = values.len();
    assert!(n <= 16);
    let mut best = (f64::NEG_INFINITY, Vec::new());
    for free in 0..n {
        for mask in 0..(1usize << n) {
            if mask & (1 << free) != 0 {
                continue;
            }
            let mut p: Vec<f64> = (0..n).map(|k| if mask & (1 << k) != 0 { caps[k] } else { 0.0 }).collect();
            let rest = 1.0 - p.iter().sum::<f64>();
            if rest < -1e-12 || rest > caps[free] + 1e-12 {
                continue;
            }
            p[free] = rest.max(0.0);
            let v: f64 = p.iter().zip(values).map(|(a, b)| a * b).sum();
            if v > best.0 {
                best = (v, p);
            }
        }
    }
    best
}

/// Worst expectation of `q` over measures on two grid points of `[lo, hi]`
/// within transport budget `rho` of the Dirac at `atom`.
pub fn two_point_worst(q: impl Fn(f64) -> f64, lo: f64, hi: f64, atom: f64, rho: f64, steps: usize) -> f64 {
    let grid: Vec<f64> = (0..=steps).map(|i| lo + (hi - lo) * i as f64 / steps as f64).chain([atom]).collect();
    let mut best = f64::NEG_INFINITY;
    for &a in &grid {
        for &b in &grid {
            // Mass m on a, 1 − m on b; cost and value are linear in m.
            let (da, db) = ((a - atom).abs(), (b - atom).abs());
            let mut masses = vec![0.0, 1.0];
            if (da - db).abs() > 1e-15 {
                masses.push((rho - db) / (da - db));
            }
            for m in masses {
                if !(0.0..=1.0).contains(&m) || m * da + (1.0 - m) * db > rho + 1e-12 {
                    continue;
                }
                best = best.max(m * q(a) + (1.0 - m) * q(b));
            }
        }
    }
    best
}

/// Minimum transport cost over the vertices of the transport polytope, found
/// by solving the marginal equations on every cell subset of basis size.
pub fn transport_brute(mu: &[f64], nu: &[f64], cost: &[Vec<f64>]) -> f64 {
    let (m, n) = (mu.len(), nu.len());
    let cells = m * n;
    let rank = m + n - 1;
    let mut best = f64::INFINITY;
    for subset in subsets(cells, rank) {
        let mut a = DMatrix::zeros(m + n, subset.len());
        for (c, &cell) in subset.iter().enumerate() {
            a[(cell / n, c)] = 1.0;
            a[(m + cell % n, c)] = 1.0;
        }
        let b = DVector::from_iterator(m + n, mu.iter().chain(nu).copied());
        let svd = a.clone().svd(true, true);
        if svd.rank(1e-10) < subset.len() {
            continue;
        }
        let Ok(x) = svd.solve(&b, 1e-12) else { continue };
        if (&a * &x - &b).amax() > 1e-9 || x.iter().any(|v| *v < -1e-12) {
            continue;
        }
        let value: f64 = subset.iter().zip(x.iter()).map(|(&cell, v)| cost[cell / n][cell % n] * v).sum();
        best = best.min(value);
    }
    best
}

fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::new();
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    rec(0, n, k.min(n), &mut cur, &mut out);
    out
}

fn line_measure(points: &[f64], weights: &[f64]) -> DiscreteMeasure {
    DiscreteMeasure::new(points.iter().map(|p| vec![*p]).collect(), weights.to_vec()).unwrap()
}

/// Fixed set of measures with at most three atoms, in one and two dimensions.
pub fn measure_test_set() -> Vec<DiscreteMeasure> {
    let mut out = vec![
        line_measure(&[0.0], &[1.0]),
        line_measure(&[0.0, 1.0], &[0.5, 0.5]),
        line_measure(&[0.0, 2.0], &[0.5, 0.5]),
        line_measure(&[-1.0, 0.5, 3.0], &[0.2, 0.3, 0.5]),
        line_measure(&[1.0, 1.0, 4.0], &[0.25, 0.25, 0.5]),
        line_measure(&[2.0, -3.0], &[0.9, 0.1]),
        line_measure(&[0.3, 0.7, 1.1], &[1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0]),
    ];
    let planar = [
        (vec![vec![0.0, 0.0], vec![1.0, 1.0]], vec![0.5, 0.5]),
        (vec![vec![1.0, 0.0], vec![0.0, 1.0], vec![2.0, 2.0]], vec![0.6, 0.3, 0.1]),
        (vec![vec![0.5, 0.5]], vec![1.0]),
        (vec![vec![3.0, -1.0], vec![-1.0, 0.0], vec![0.0, 4.0]], vec![0.2, 0.2, 0.6]),
    ];
    out.extend(planar.into_iter().map(|(a, w)| DiscreteMeasure::new(a, w).unwrap()));
    out
}
