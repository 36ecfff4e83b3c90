//! Revised simplex for bounded variables with an explicit dense inverse.
//!
//! Every row is turned into an equality by appending a unit slack column for
//! `≤` rows. Variable bounds are handled natively: nonbasic columns sit at a
//! finite bound (or at zero when free). Phase one minimizes the sum of
//! artificial columns; phase two then runs on the original costs with the
//! artificials fixed at zero. The basis inverse is kept explicitly and
//! updated by elementary row operations, with periodic refactorization.
//! Structural columns are stored sparse and the simplex multipliers are
//! updated from the pivot row instead of being recomputed each iteration.
//!
//! Pricing is Dantzig's rule with a Harris two-pass ratio test; after a run
//! of degenerate pivots the solver switches to Bland's rule until the
//! objective moves again.

use serde::{Deserialize, Serialize};

use crate::problem::{dot, LinearProgram};
use crate::LpError;

/// Terminal status of a solve.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

/// Post-solve accuracy measures (absolute values).
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ToleranceReport {
    pub primal_residual: f64,
    pub dual_residual: f64,
    /// `|primal obj − dual obj| / (1 + |primal obj|)`.
    pub complementarity_gap: f64,
    pub dual_objective: f64,
    pub iterations: usize,
}

/// Result of [`solve`].
///
/// Duals follow the Lagrangian `cᵀx + Σ πᵢ (aᵢᵀx − bᵢ)`: multipliers of `≤`
/// rows are nonnegative, and raising a right-hand side `bᵢ` by `ε` changes
/// the optimal value by `−πᵢ ε` to first order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LpSolution {
    pub status: LpStatus,
    pub primal: Vec<f64>,
    pub objective: f64,
    pub ineq_duals: Vec<f64>,
    pub eq_duals: Vec<f64>,
    pub report: ToleranceReport,
}

impl LpSolution {
    pub fn is_optimal(&self) -> bool {
        self.status == LpStatus::Optimal
    }

    fn without_solution(status: LpStatus, lp: &LinearProgram, iterations: usize) -> Self {
        let objective = match status {
            LpStatus::Infeasible => f64::INFINITY,
            _ => f64::NEG_INFINITY,
        };
        Self {
            status,
            primal: vec![0.0; lp.num_vars()],
            objective,
            ineq_duals: vec![0.0; lp.num_ineq()],
            eq_duals: vec![0.0; lp.num_eq()],
            report: ToleranceReport { iterations, ..Default::default() },
        }
    }
}

pub const DEFAULT_TOL: f64 = 1e-8;

/// Solves `lp` with the default tolerance.
pub fn solve_default(lp: &LinearProgram) -> Result<LpSolution, LpError> {
    solve(lp, DEFAULT_TOL)
}

/// Solves `lp`. `tol` bounds the post-solve residuals, scaled by `1 + ` the
/// largest data magnitude.
pub fn solve(lp: &LinearProgram, tol: f64) -> Result<LpSolution, LpError> {
    lp.check_dimensions()?;
    let mut attempts = 0;
    let mut simplex = Simplex::new(lp);
    loop {
        attempts += 1;
        let status = simplex.run_two_phase()?;
        if status != LpStatus::Optimal {
            return Ok(LpSolution::without_solution(status, lp, simplex.iterations));
        }
        let solution = simplex.extract(lp);
        let scale = 1.0 + simplex.data_scale;
        let worst = solution
            .report
            .primal_residual
            .max(solution.report.dual_residual)
            .max(solution.report.complementarity_gap);
        if worst <= tol * scale {
            return Ok(solution);
        }
        if attempts >= 3 {
            return Err(LpError::NumericalFailure(format!(
                "residuals {:.3e}/{:.3e}/{:.3e} exceed tolerance after {attempts} attempts",
                solution.report.primal_residual,
                solution.report.dual_residual,
                solution.report.complementarity_gap
            )));
        }
        // Refine: restart phase two from the current basis after a fresh factorization.
        simplex.refactor()?;
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum VarState {
    Basic,
    AtLower,
    AtUpper,
    /// Free nonbasic variable held at zero.
    Zero,
}

#[derive(Debug, Clone)]
enum Column {
    /// Nonzero `(row, value)` entries of a structural column.
    Sparse(Vec<(usize, f64)>),
    /// `sign · e_row`
    Unit(usize, f64),
}

const PIVOT_TOL: f64 = 1e-9;
const FEAS_TOL: f64 = 1e-9;
const REFACTOR_EVERY: usize = 64;
const DEGENERATE_STREAK: usize = 40;

struct Simplex {
    m: usize,
    n_struct: usize,
    columns: Vec<Column>,
    cost: Vec<f64>,
    lo: Vec<f64>,
    hi: Vec<f64>,
    x: Vec<f64>,
    state: Vec<VarState>,
    basis: Vec<usize>,
    binv: Vec<f64>,
    rhs: Vec<f64>,
    first_artificial: usize,
    pivots_since_refactor: usize,
    iterations: usize,
    max_iterations: usize,
    data_scale: f64,
    dual_tol: f64,
}

impl Simplex {
    fn new(lp: &LinearProgram) -> Self {
        let n = lp.num_vars();
        let mi = lp.num_ineq();
        let me = lp.num_eq();
        let m = mi + me;
        let mut columns = Vec::with_capacity(n + mi + m);
        let mut sparse: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
        for (i, row) in lp.ineq_matrix.iter().chain(&lp.eq_matrix).enumerate() {
            for (j, a) in row.iter().enumerate().filter(|(_, a)| **a != 0.0) {
                sparse[j].push((i, *a));
            }
        }
        columns.extend(sparse.into_iter().map(Column::Sparse));
        let mut cost = lp.objective.clone();
        let mut lo = lp.lower.clone();
        let mut hi = lp.upper.clone();
        for i in 0..mi {
            columns.push(Column::Unit(i, 1.0));
            cost.push(0.0);
            lo.push(0.0);
            hi.push(f64::INFINITY);
        }
        let mut rhs = lp.ineq_rhs.clone();
        rhs.extend_from_slice(&lp.eq_rhs);

        let data_scale = lp
            .objective
            .iter()
            .chain(rhs.iter())
            .chain(lp.ineq_matrix.iter().flatten())
            .chain(lp.eq_matrix.iter().flatten())
            .fold(0.0_f64, |acc, v| acc.max(v.abs()));
        let cost_scale = lp.objective.iter().fold(1.0_f64, |acc, v| acc.max(v.abs()));

        let total = columns.len();
        let mut x = vec![0.0; total];
        let mut state = vec![VarState::Zero; total];
        for j in 0..total {
            if lo[j].is_finite() {
                x[j] = lo[j];
                state[j] = VarState::AtLower;
            } else if hi[j].is_finite() {
                x[j] = hi[j];
                state[j] = VarState::AtUpper;
            }
        }

        let mut simplex = Simplex {
            m,
            n_struct: n,
            columns,
            cost,
            lo,
            hi,
            x,
            state,
            basis: vec![usize::MAX; m],
            binv: Vec::new(),
            rhs,
            first_artificial: total,
            pivots_since_refactor: 0,
            iterations: 0,
            max_iterations: 50 * (m + total) + 10_000,
            data_scale,
            dual_tol: 1e-9 * cost_scale,
        };
        simplex.initial_basis(mi);
        simplex
    }

    /// Slack basis where the slack value is nonnegative, artificials elsewhere.
    fn initial_basis(&mut self, mi: usize) {
        let mut residual = self.rhs.clone();
        for j in 0..self.n_struct {
            let xj = self.x[j];
            if xj != 0.0 {
                if let Column::Sparse(col) = &self.columns[j] {
                    for &(r, a) in col {
                        residual[r] -= a * xj;
                    }
                }
            }
        }
        for (i, &ri) in residual.iter().enumerate() {
            if i < mi && ri >= 0.0 {
                let slack = self.n_struct + i;
                self.basis[i] = slack;
                self.state[slack] = VarState::Basic;
                self.x[slack] = ri;
            } else {
                let sign = if ri >= 0.0 { 1.0 } else { -1.0 };
                self.columns.push(Column::Unit(i, sign));
                self.cost.push(0.0);
                self.lo.push(0.0);
                self.hi.push(f64::INFINITY);
                self.x.push(ri.abs());
                self.state.push(VarState::Basic);
                self.basis[i] = self.columns.len() - 1;
            }
        }
        // Initial basis is a signed identity.
        let m = self.m;
        self.binv = vec![0.0; m * m];
        for i in 0..m {
            let sign = match self.columns[self.basis[i]] {
                Column::Unit(_, s) => s,
                Column::Sparse(_) => unreachable!(),
            };
            self.binv[i * m + i] = sign;
        }
    }

    fn has_artificials(&self) -> bool {
        self.columns.len() > self.first_artificial
    }

    fn run_two_phase(&mut self) -> Result<LpStatus, LpError> {
        if self.has_artificials() && self.basis.iter().any(|&b| b >= self.first_artificial) {
            let phase_one: Vec<f64> = (0..self.columns.len())
                .map(|j| if j >= self.first_artificial { 1.0 } else { 0.0 })
                .collect();
            let saved_tol = self.dual_tol;
            self.dual_tol = 1e-11;
            let outcome = self.iterate(&phase_one)?;
            self.dual_tol = saved_tol;
            if outcome == LpStatus::Unbounded {
                return Err(LpError::NumericalFailure("phase one reported unboundedness".into()));
            }
            let infeasibility: f64 = (self.first_artificial..self.columns.len()).map(|j| self.x[j].abs()).sum();
            if infeasibility > 1e-7 * (1.0 + self.data_scale) {
                return Ok(LpStatus::Infeasible);
            }
            self.retire_artificials()?;
        } else if self.has_artificials() {
            self.retire_artificials()?;
        }
        let costs = self.cost.clone();
        self.iterate(&costs)
    }

    /// Fixes artificials at zero and pivots basic ones out where possible.
    fn retire_artificials(&mut self) -> Result<(), LpError> {
        for j in self.first_artificial..self.columns.len() {
            self.lo[j] = 0.0;
            self.hi[j] = 0.0;
            if self.state[j] != VarState::Basic {
                self.x[j] = 0.0;
                self.state[j] = VarState::AtLower;
            }
        }
        for r in 0..self.m {
            if self.basis[r] < self.first_artificial {
                continue;
            }
            // Row r of B⁻¹ times candidate columns.
            let row: Vec<f64> = self.binv[r * self.m..(r + 1) * self.m].to_vec();
            let mut best: Option<(usize, f64)> = None;
            for j in 0..self.first_artificial {
                if self.state[j] == VarState::Basic {
                    continue;
                }
                let v = self.column_dot(j, &row);
                if v.abs() > 1e-7 && best.is_none_or(|(_, b)| v.abs() > b.abs()) {
                    best = Some((j, v));
                }
            }
            if let Some((j, _)) = best {
                let alpha = self.ftran(j);
                let leaving = self.basis[r];
                self.x[leaving] = 0.0;
                self.state[leaving] = VarState::AtLower;
                self.pivot(r, j, &alpha);
            }
        }
        self.refactor()
    }

    fn column_dot(&self, j: usize, y: &[f64]) -> f64 {
        match &self.columns[j] {
            Column::Sparse(col) => col.iter().map(|&(r, a)| a * y[r]).sum(),
            Column::Unit(r, s) => s * y[*r],
        }
    }

    /// `B⁻¹ A_j`.
    fn ftran(&self, j: usize) -> Vec<f64> {
        let m = self.m;
        let mut alpha = vec![0.0; m];
        match &self.columns[j] {
            Column::Sparse(col) => {
                for (i, out) in alpha.iter_mut().enumerate() {
                    let row = &self.binv[i * m..(i + 1) * m];
                    *out = col.iter().map(|&(k, a)| row[k] * a).sum();
                }
            }
            Column::Unit(r, s) => {
                for (i, out) in alpha.iter_mut().enumerate() {
                    *out = s * self.binv[i * m + r];
                }
            }
        }
        alpha
    }

    /// `c_Bᵀ B⁻¹`.
    fn duals(&self, costs: &[f64]) -> Vec<f64> {
        let m = self.m;
        let mut y = vec![0.0; m];
        for (r, &bj) in self.basis.iter().enumerate() {
            let cb = costs[bj];
            if cb != 0.0 {
                let row = &self.binv[r * m..(r + 1) * m];
                for (yi, b) in y.iter_mut().zip(row) {
                    *yi += cb * b;
                }
            }
        }
        y
    }

    fn pivot(&mut self, r: usize, entering: usize, alpha: &[f64]) {
        let m = self.m;
        let piv = alpha[r];
        {
            let row = &mut self.binv[r * m..(r + 1) * m];
            for v in row.iter_mut() {
                *v /= piv;
            }
        }
        let pivot_row: Vec<f64> = self.binv[r * m..(r + 1) * m].to_vec();
        for (i, &ai) in alpha.iter().enumerate() {
            if i == r || ai == 0.0 {
                continue;
            }
            let row = &mut self.binv[i * m..(i + 1) * m];
            for (v, p) in row.iter_mut().zip(&pivot_row) {
                *v -= ai * p;
            }
        }
        self.basis[r] = entering;
        self.state[entering] = VarState::Basic;
        self.pivots_since_refactor += 1;
    }

    /// Rebuilds `B⁻¹` by Gauss-Jordan elimination and recomputes basic values.
    fn refactor(&mut self) -> Result<(), LpError> {
        let m = self.m;
        if m == 0 {
            return Ok(());
        }
        let mut a = vec![0.0; m * m];
        for (c, &bj) in self.basis.iter().enumerate() {
            match &self.columns[bj] {
                Column::Sparse(col) => {
                    for &(r, v) in col {
                        a[r * m + c] = v;
                    }
                }
                Column::Unit(r, s) => a[r * m + c] = *s,
            }
        }
        let mut inv = vec![0.0; m * m];
        for i in 0..m {
            inv[i * m + i] = 1.0;
        }
        for col in 0..m {
            let (mut best, mut best_abs) = (col, a[col * m + col].abs());
            for r in col + 1..m {
                let v = a[r * m + col].abs();
                if v > best_abs {
                    best = r;
                    best_abs = v;
                }
            }
            if best_abs < 1e-13 {
                return Err(LpError::NumericalFailure("singular basis during refactorization".into()));
            }
            if best != col {
                for k in 0..m {
                    a.swap(col * m + k, best * m + k);
                    inv.swap(col * m + k, best * m + k);
                }
            }
            let p = a[col * m + col];
            for k in 0..m {
                a[col * m + k] /= p;
                inv[col * m + k] /= p;
            }
            for r in 0..m {
                if r == col {
                    continue;
                }
                let f = a[r * m + col];
                if f != 0.0 {
                    for k in 0..m {
                        a[r * m + k] -= f * a[col * m + k];
                        inv[r * m + k] -= f * inv[col * m + k];
                    }
                }
            }
        }
        // inv is (B)⁻¹ with rows indexed by basis position.
        self.binv = inv;
        self.pivots_since_refactor = 0;
        self.recompute_basic_values();
        Ok(())
    }

    fn recompute_basic_values(&mut self) {
        let m = self.m;
        let mut residual = self.rhs.clone();
        for j in 0..self.columns.len() {
            if self.state[j] == VarState::Basic {
                continue;
            }
            let xj = self.x[j];
            if xj == 0.0 {
                continue;
            }
            match &self.columns[j] {
                Column::Sparse(col) => {
                    for &(r, a) in col {
                        residual[r] -= a * xj;
                    }
                }
                Column::Unit(r, s) => residual[*r] -= s * xj,
            }
        }
        for i in 0..m {
            let row = &self.binv[i * m..(i + 1) * m];
            self.x[self.basis[i]] = dot(row, &residual);
        }
    }

    fn iterate(&mut self, costs: &[f64]) -> Result<LpStatus, LpError> {
        let mut degenerate = 0usize;
        let mut bland = false;
        let mut y = self.duals(costs);
        loop {
            if self.iterations >= self.max_iterations {
                return Err(LpError::NumericalFailure(format!(
                    "iteration limit {} reached",
                    self.max_iterations
                )));
            }
            if self.pivots_since_refactor >= REFACTOR_EVERY {
                self.refactor()?;
                y = self.duals(costs);
            }
            let Some((entering, reduced)) = self.price(costs, &y, bland) else {
                return Ok(LpStatus::Optimal);
            };
            self.iterations += 1;
            let dir = if reduced < 0.0 { 1.0 } else { -1.0 };
            let alpha = self.ftran(entering);
            let flip = self.hi[entering] - self.lo[entering];
            let choice = if bland { self.ratio_bland(&alpha, dir) } else { self.ratio_harris(&alpha, dir) };
            match choice {
                None if !flip.is_finite() => return Ok(LpStatus::Unbounded),
                Some((_, theta)) if flip.is_finite() && flip <= theta => self.bound_flip(entering, dir, &alpha, flip),
                None => self.bound_flip(entering, dir, &alpha, flip),
                Some((r, theta)) => {
                    self.step(entering, dir, &alpha, theta);
                    let leaving = self.basis[r];
                    let a = dir * alpha[r];
                    if a > 0.0 {
                        self.x[leaving] = self.lo[leaving];
                        self.state[leaving] = VarState::AtLower;
                    } else {
                        self.x[leaving] = self.hi[leaving];
                        self.state[leaving] = VarState::AtUpper;
                    }
                    if self.lo[leaving] == f64::NEG_INFINITY && self.hi[leaving] == f64::INFINITY {
                        self.x[leaving] = 0.0;
                        self.state[leaving] = VarState::Zero;
                    }
                    self.pivot(r, entering, &alpha);
                    // y' = y + d_q · (row r of the updated inverse).
                    let m = self.m;
                    for (yi, b) in y.iter_mut().zip(&self.binv[r * m..(r + 1) * m]) {
                        *yi += reduced * b;
                    }
                    if theta <= 1e-12 {
                        degenerate += 1;
                    } else {
                        degenerate = 0;
                        bland = false;
                    }
                }
            }
            if degenerate > DEGENERATE_STREAK {
                bland = true;
            }
        }
    }

    fn price(&self, costs: &[f64], y: &[f64], bland: bool) -> Option<(usize, f64)> {
        let mut best: Option<(usize, f64)> = None;
        for j in 0..self.columns.len() {
            let st = self.state[j];
            if st == VarState::Basic || self.lo[j] == self.hi[j] {
                continue;
            }
            let d = costs[j] - self.column_dot(j, y);
            let eligible = match st {
                VarState::AtLower => d < -self.dual_tol,
                VarState::AtUpper => d > self.dual_tol,
                VarState::Zero => d.abs() > self.dual_tol,
                VarState::Basic => false,
            };
            if !eligible {
                continue;
            }
            if bland {
                return Some((j, d));
            }
            if best.is_none_or(|(_, b)| d.abs() > b.abs()) {
                best = Some((j, d));
            }
        }
        best
    }

    fn limit(&self, r: usize, a: f64, slack: f64) -> Option<f64> {
        let bj = self.basis[r];
        if a > PIVOT_TOL && self.lo[bj].is_finite() {
            Some((self.x[bj] - self.lo[bj] + slack) / a)
        } else if a < -PIVOT_TOL && self.hi[bj].is_finite() {
            Some((self.hi[bj] - self.x[bj] + slack) / (-a))
        } else {
            None
        }
    }

    fn ratio_harris(&self, alpha: &[f64], dir: f64) -> Option<(usize, f64)> {
        let mut theta_max = f64::INFINITY;
        for (r, &al) in alpha.iter().enumerate() {
            if let Some(t) = self.limit(r, dir * al, FEAS_TOL) {
                theta_max = theta_max.min(t);
            }
        }
        if !theta_max.is_finite() {
            return None;
        }
        let mut best: Option<(usize, f64, f64)> = None;
        for (r, &al) in alpha.iter().enumerate() {
            let a = dir * al;
            if let Some(t) = self.limit(r, a, 0.0) {
                if t <= theta_max && best.is_none_or(|(_, _, b)| a.abs() > b) {
                    best = Some((r, t.max(0.0), a.abs()));
                }
            }
        }
        best.map(|(r, t, _)| (r, t))
    }

    fn ratio_bland(&self, alpha: &[f64], dir: f64) -> Option<(usize, f64)> {
        let mut best: Option<(usize, f64)> = None;
        for (r, &al) in alpha.iter().enumerate() {
            if let Some(t) = self.limit(r, dir * al, 0.0) {
                let t = t.max(0.0);
                let better = match best {
                    None => true,
                    Some((br, bt)) => t < bt - 1e-12 || (t <= bt + 1e-12 && self.basis[r] < self.basis[br]),
                };
                if better {
                    best = Some((r, t));
                }
            }
        }
        best
    }

    fn step(&mut self, entering: usize, dir: f64, alpha: &[f64], theta: f64) {
        if theta != 0.0 {
            self.x[entering] += dir * theta;
            for (r, &a) in alpha.iter().enumerate() {
                let bj = self.basis[r];
                self.x[bj] -= dir * theta * a;
            }
        }
    }

    fn bound_flip(&mut self, entering: usize, dir: f64, alpha: &[f64], flip: f64) {
        self.step(entering, dir, alpha, flip);
        if dir > 0.0 {
            self.x[entering] = self.hi[entering];
            self.state[entering] = VarState::AtUpper;
        } else {
            self.x[entering] = self.lo[entering];
            self.state[entering] = VarState::AtLower;
        }
    }

    fn extract(&mut self, lp: &LinearProgram) -> LpSolution {
        // Best effort: a failed refactorization leaves the running inverse in place.
        let _ = self.refactor();
        let n = self.n_struct;
        let mi = lp.num_ineq();
        let mut primal: Vec<f64> = self.x[..n].to_vec();
        for (j, v) in primal.iter_mut().enumerate() {
            // Snap to bounds within feasibility noise.
            if *v < lp.lower[j] && *v > lp.lower[j] - 1e-9 {
                *v = lp.lower[j];
            }
            if *v > lp.upper[j] && *v < lp.upper[j] + 1e-9 {
                *v = lp.upper[j];
            }
        }
        let y = self.duals(&self.cost);
        let ineq_duals: Vec<f64> = y[..mi].iter().map(|v| -v).collect();
        let eq_duals: Vec<f64> = y[mi..].iter().map(|v| -v).collect();
        let objective = lp.objective_value(&primal);
        let report = certificate_report(lp, &primal, &ineq_duals, &eq_duals, self.iterations);
        LpSolution { status: LpStatus::Optimal, primal, objective, ineq_duals, eq_duals, report }
    }
}

/// Residuals of a primal/dual pair measured directly against the LP data.
pub fn certificate_report(
    lp: &LinearProgram,
    primal: &[f64],
    ineq_duals: &[f64],
    eq_duals: &[f64],
    iterations: usize,
) -> ToleranceReport {
    let n = lp.num_vars();
    let mut primal_residual = 0.0_f64;
    for (row, b) in lp.ineq_matrix.iter().zip(&lp.ineq_rhs) {
        primal_residual = primal_residual.max(dot(row, primal) - b);
    }
    for (row, b) in lp.eq_matrix.iter().zip(&lp.eq_rhs) {
        primal_residual = primal_residual.max((dot(row, primal) - b).abs());
    }
    for j in 0..n {
        primal_residual = primal_residual.max(lp.lower[j] - primal[j]).max(primal[j] - lp.upper[j]);
    }

    let mut reduced = lp.objective.clone();
    for (row, &pi) in lp.ineq_matrix.iter().zip(ineq_duals) {
        if pi != 0.0 {
            for (d, a) in reduced.iter_mut().zip(row) {
                *d += pi * a;
            }
        }
    }
    for (row, &pi) in lp.eq_matrix.iter().zip(eq_duals) {
        if pi != 0.0 {
            for (d, a) in reduced.iter_mut().zip(row) {
                *d += pi * a;
            }
        }
    }
    let mut dual_residual = ineq_duals.iter().fold(0.0_f64, |acc, &p| acc.max(-p));
    let mut dual_objective = -dot(&lp.ineq_rhs, ineq_duals) - dot(&lp.eq_rhs, eq_duals);
    for j in 0..n {
        let d = reduced[j];
        if d > 0.0 {
            if lp.lower[j].is_finite() {
                dual_objective += d * lp.lower[j];
            } else {
                dual_residual = dual_residual.max(d);
            }
        } else if d < 0.0 {
            if lp.upper[j].is_finite() {
                dual_objective += d * lp.upper[j];
            } else {
                dual_residual = dual_residual.max(-d);
            }
        }
    }
    let objective = lp.objective_value(primal);
    ToleranceReport {
        primal_residual: primal_residual.max(0.0),
        dual_residual,
        complementarity_gap: (objective - dual_objective).abs() / (1.0 + objective.abs()),
        dual_objective,
        iterations,
    }
}
