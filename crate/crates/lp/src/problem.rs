//! Dense linear programs in inequality/equality form with bounded variables.
//!
//! The canonical problem is
//!
//! ```text
//! minimize    cᵀx
//! subject to  G x ≤ g
//!             E x = e
//!             l ≤ x ≤ u        (l, u may be ±∞)
//! ```

use serde::{Deserialize, Serialize};

use crate::LpError;

/// A dense LP. Rows of `ineq_matrix` and `eq_matrix` have one entry per variable.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearProgram {
    pub objective: Vec<f64>,
    pub ineq_matrix: Vec<Vec<f64>>,
    pub ineq_rhs: Vec<f64>,
    pub eq_matrix: Vec<Vec<f64>>,
    pub eq_rhs: Vec<f64>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl LinearProgram {
    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn num_ineq(&self) -> usize {
        self.ineq_rhs.len()
    }

    pub fn num_eq(&self) -> usize {
        self.eq_rhs.len()
    }

    /// Checks row lengths and bound ordering.
    pub fn check_dimensions(&self) -> Result<(), LpError> {
        let n = self.objective.len();
        let dim = |what: &str| Err(LpError::Dimension(what.to_string()));
        if self.lower.len() != n || self.upper.len() != n {
            return dim("bound vectors must match the objective length");
        }
        if self.ineq_matrix.len() != self.ineq_rhs.len() {
            return dim("inequality matrix and rhs row counts differ");
        }
        if self.eq_matrix.len() != self.eq_rhs.len() {
            return dim("equality matrix and rhs row counts differ");
        }
        if let Some(i) = self.ineq_matrix.iter().position(|r| r.len() != n) {
            return dim(&format!("inequality row {i} has wrong length"));
        }
        if let Some(i) = self.eq_matrix.iter().position(|r| r.len() != n) {
            return dim(&format!("equality row {i} has wrong length"));
        }
        for j in 0..n {
            let (l, u) = (self.lower[j], self.upper[j]);
            if l.is_nan() || u.is_nan() || l > u || l == f64::INFINITY || u == f64::NEG_INFINITY {
                return dim(&format!("variable {j} has invalid bounds [{l}, {u}]"));
            }
        }
        let finite = self.objective.iter().all(|c| c.is_finite())
            && self.ineq_rhs.iter().all(|b| b.is_finite())
            && self.eq_rhs.iter().all(|b| b.is_finite())
            && self.ineq_matrix.iter().flatten().all(|a| a.is_finite())
            && self.eq_matrix.iter().flatten().all(|a| a.is_finite());
        if !finite {
            return dim("coefficients must be finite");
        }
        Ok(())
    }

    /// Objective value `cᵀx`.
    pub fn objective_value(&self, x: &[f64]) -> f64 {
        dot(&self.objective, x)
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Sparse row-by-row construction of a [`LinearProgram`].
///
/// Variables can be added after rows; rows are densified on [`LpBuilder::build`].
#[derive(Debug, Clone, Default)]
pub struct LpBuilder {
    objective: Vec<f64>,
    lower: Vec<f64>,
    upper: Vec<f64>,
    ineq: Vec<(Vec<(usize, f64)>, f64)>,
    eq: Vec<(Vec<(usize, f64)>, f64)>,
}

impl LpBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds a variable and returns its column index.
    pub fn add_var(&mut self, lower: f64, upper: f64, cost: f64) -> usize {
        self.objective.push(cost);
        self.lower.push(lower);
        self.upper.push(upper);
        self.objective.len() - 1
    }

    /// Adds `count` variables sharing bounds and cost; returns the first index.
    pub fn add_vars(&mut self, count: usize, lower: f64, upper: f64, cost: f64) -> usize {
        let first = self.objective.len();
        for _ in 0..count {
            self.add_var(lower, upper, cost);
        }
        first
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn set_cost(&mut self, var: usize, cost: f64) {
        self.objective[var] = cost;
    }

    pub fn add_cost(&mut self, var: usize, cost: f64) {
        self.objective[var] += cost;
    }

    pub fn set_bounds(&mut self, var: usize, lower: f64, upper: f64) {
        self.lower[var] = lower;
        self.upper[var] = upper;
    }

    /// Adds `Σ coef·x ≤ rhs` and returns the inequality row index.
    pub fn add_le(&mut self, terms: Vec<(usize, f64)>, rhs: f64) -> usize {
        self.ineq.push((terms, rhs));
        self.ineq.len() - 1
    }

    /// Adds `Σ coef·x ≥ rhs` as the negated `≤` row and returns its index.
    pub fn add_ge(&mut self, terms: Vec<(usize, f64)>, rhs: f64) -> usize {
        let negated = terms.into_iter().map(|(j, a)| (j, -a)).collect();
        self.add_le(negated, -rhs)
    }

    /// Adds `Σ coef·x = rhs` and returns the equality row index.
    pub fn add_eq(&mut self, terms: Vec<(usize, f64)>, rhs: f64) -> usize {
        self.eq.push((terms, rhs));
        self.eq.len() - 1
    }

    pub fn build(self) -> LinearProgram {
        let n = self.objective.len();
        let densify = |rows: Vec<(Vec<(usize, f64)>, f64)>| {
            let mut matrix = Vec::with_capacity(rows.len());
            let mut rhs = Vec::with_capacity(rows.len());
            for (terms, b) in rows {
                let mut row = vec![0.0; n];
                for (j, a) in terms {
                    row[j] += a;
                }
                matrix.push(row);
                rhs.push(b);
            }
            (matrix, rhs)
        };
        let (ineq_matrix, ineq_rhs) = densify(self.ineq);
        let (eq_matrix, eq_rhs) = densify(self.eq);
        LinearProgram {
            objective: self.objective,
            ineq_matrix,
            ineq_rhs,
            eq_matrix,
            eq_rhs,
            lower: self.lower,
            upper: self.upper,
        }
    }
}
