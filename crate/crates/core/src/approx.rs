//! Outer and inner approximations of a regularized cost-to-go function.
//!
//! The lower approximation is the pointwise maximum of affine cuts and zero.
//! The upper approximation is the largest `M`-Lipschitz convex function below
//! the recorded `(x_j, v_j)` overestimates:
//!
//! ```text
//! min  Σ μ_j v_j + M ‖x − Σ μ_j x_j‖₁   s.t.  μ ≥ 0, Σ μ_j = 1
//! ```
//!
//! Both are identically zero for the last stage.

use drmco_lp::{solve_default, LpBuilder, LpStatus};
use serde::{Deserialize, Serialize};

use crate::error::{DrmcoError, Result};

/// Slack allowed on the cut-gradient bound.
pub const GRADIENT_TOL: f64 = 1e-6;

/// Affine minorant `v + uᵀ(x − x̄)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cut {
    pub value: f64,
    pub gradient: Vec<f64>,
    pub anchor: Vec<f64>,
    pub stage: usize,
}

impl Cut {
    pub fn eval(&self, x: &[f64]) -> f64 {
        self.value + self.gradient.iter().zip(x).zip(&self.anchor).map(|((u, a), b)| u * (a - b)).sum::<f64>()
    }

    /// Constant term `v − uᵀx̄` of the cut written as `c + uᵀx`.
    pub fn intercept(&self) -> f64 {
        self.value - self.gradient.iter().zip(&self.anchor).map(|(u, a)| u * a).sum::<f64>()
    }

    pub fn gradient_norm(&self) -> f64 {
        self.gradient.iter().fold(0.0, |m, u| m.max(u.abs()))
    }
}

/// Cutting-plane under-approximation of the cost-to-go after stage `stage`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LowerApprox {
    pub stage: usize,
    pub lipschitz: f64,
    #[serde(default)]
    pub terminal: bool,
    pub cuts: Vec<Cut>,
}

impl LowerApprox {
    pub fn new(stage: usize, lipschitz: f64) -> Self {
        Self { stage, lipschitz, terminal: false, cuts: Vec::new() }
    }

    /// The identically-zero cost-to-go after the final stage.
    pub fn terminal(stage: usize) -> Self {
        Self { stage, lipschitz: 0.0, terminal: true, cuts: Vec::new() }
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.cuts.iter().map(|c| c.eval(x)).fold(0.0, f64::max)
    }

    pub fn add_cut(&mut self, cut: Cut) -> Result<()> {
        if self.terminal {
            return Err(DrmcoError::InvalidInput("the final-stage approximation is fixed at zero".into()));
        }
        let norm = cut.gradient_norm();
        if !(norm <= self.lipschitz + GRADIENT_TOL) || !cut.value.is_finite() {
            return Err(DrmcoError::CutRejected { stage: self.stage, norm, bound: self.lipschitz });
        }
        self.cuts.push(cut);
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.cuts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cuts.is_empty()
    }
}

/// Lipschitz convex-envelope over-approximation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UpperApprox {
    pub stage: usize,
    pub lipschitz: f64,
    #[serde(default)]
    pub terminal: bool,
    pub points: Vec<(Vec<f64>, f64)>,
}

impl UpperApprox {
    pub fn new(stage: usize, lipschitz: f64) -> Self {
        Self { stage, lipschitz, terminal: false, points: Vec::new() }
    }

    pub fn terminal(stage: usize) -> Self {
        Self { stage, lipschitz: 0.0, terminal: true, points: Vec::new() }
    }

    /// `+∞` while no point has been recorded.
    pub fn eval(&self, x: &[f64]) -> Result<f64> {
        if self.terminal {
            return Ok(0.0);
        }
        let m = self.lipschitz;
        let direct = |p: &(Vec<f64>, f64)| p.1 + m * p.0.iter().zip(x).map(|(a, b)| (a - b).abs()).sum::<f64>();
        match self.points.len() {
            0 => return Ok(f64::INFINITY),
            1 => return Ok(direct(&self.points[0])),
            _ => {}
        }
        let mut lp = LpBuilder::new();
        let mu: Vec<usize> = self.points.iter().map(|(_, v)| lp.add_var(0.0, f64::INFINITY, *v)).collect();
        lp.add_eq(mu.iter().map(|&j| (j, 1.0)).collect(), 1.0);
        for (i, xi) in x.iter().enumerate() {
            let s = lp.add_var(0.0, f64::INFINITY, m);
            let combo: Vec<(usize, f64)> = self.points.iter().zip(&mu).map(|((p, _), &j)| (j, p[i])).collect();
            let mut up = combo.clone();
            up.push((s, -1.0));
            lp.add_le(up, *xi);
            let mut down: Vec<(usize, f64)> = combo.into_iter().map(|(j, a)| (j, -a)).collect();
            down.push((s, -1.0));
            lp.add_le(down, -xi);
        }
        let sol = solve_default(&lp.build())?;
        if sol.status != LpStatus::Optimal {
            return Err(DrmcoError::Unsupported(format!("envelope LP ended with status {:?}", sol.status)));
        }
        // The LP can only improve on the best single-point bound.
        let best_single = self.points.iter().map(direct).fold(f64::INFINITY, f64::min);
        Ok(sol.objective.min(best_single))
    }

    /// Records an overestimate; points that do not lower the envelope at
    /// their own anchor are dropped since they cannot change it anywhere.
    pub fn add_point(&mut self, x: Vec<f64>, v: f64) -> Result<()> {
        if self.terminal {
            return Err(DrmcoError::InvalidInput("the final-stage approximation is fixed at zero".into()));
        }
        if !v.is_finite() {
            return Ok(());
        }
        if !self.points.is_empty() && self.eval(&x)? <= v {
            return Ok(());
        }
        self.points.push((x, v));
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Gap `upper − lower` at `x`, `+∞` while the upper approximation is empty.
pub fn gap_at(lower: &LowerApprox, upper: &UpperApprox, x: &[f64]) -> Result<f64> {
    let u = upper.eval(x)?;
    if u.is_infinite() {
        return Ok(f64::INFINITY);
    }
    Ok((u - lower.eval(x)).max(0.0))
}
