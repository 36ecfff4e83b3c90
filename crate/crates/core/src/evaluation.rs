//! Out-of-sample simulation of a trained policy and summary statistics.
//!
//! The policy at stage `t` solves `min f_t(x_{t−1}, ·; ξ_t) + lower_t(·)`
//! with the trained cut approximation and moves on with the minimizer. Only
//! the stage cost is accrued.

use std::fmt::Write as _;
use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::approx::LowerApprox;
use crate::ddp::SolveReport;
use crate::error::{DrmcoError, Result};
use crate::model::Instance;
use crate::problems::{draw_paths, PathSampler};
use crate::stage::StageProblem;

/// Quantile levels reported by [`summarize`].
pub const QUANTILE_LEVELS: [f64; 7] = [0.01, 0.10, 0.25, 0.50, 0.75, 0.90, 0.99];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathResult {
    pub path: usize,
    pub total: f64,
    pub stage_costs: Vec<f64>,
    pub states: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AbortedPath {
    pub path: usize,
    pub stage: usize,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolicyRun {
    pub seed: u64,
    pub paths: Vec<PathResult>,
    pub aborted: Vec<AbortedPath>,
}

impl PolicyRun {
    pub fn totals(&self) -> Vec<f64> {
        self.paths.iter().map(|p| p.total).collect()
    }

    /// Sample mean of the path totals, `NaN` without paths.
    pub fn mean(&self) -> f64 {
        self.paths.iter().map(|p| p.total).sum::<f64>() / self.paths.len() as f64
    }

    /// `path,stage,cost,x_1,…` with one row per path and stage.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::WriterBuilder::new().flexible(true).from_writer(writer);
        let width = self.paths.first().and_then(|p| p.states.first()).map_or(0, |s| s.len());
        let mut header = vec!["path".to_string(), "stage".into(), "cost".into()];
        header.extend((1..=width).map(|i| format!("x{i}")));
        w.write_record(&header)?;
        for p in &self.paths {
            for (s, (c, x)) in p.stage_costs.iter().zip(&p.states).enumerate() {
                let mut rec = vec![p.path.to_string(), (s + 1).to_string(), c.to_string()];
                rec.extend(x.iter().map(|v| v.to_string()));
                w.write_record(&rec)?;
            }
        }
        w.flush()?;
        Ok(())
    }
}

/// Draws `n` paths from `sampler` and simulates the policy on each.
pub fn simulate_policy(instance: &Instance, lower: &[LowerApprox], sampler: &dyn PathSampler, n: usize, seed: u64) -> Result<PolicyRun> {
    let paths = draw_paths(sampler, seed, n);
    simulate_on_paths(instance, lower, &paths, seed)
}

/// Simulates the policy on given uncertainty paths `(ξ_2, …, ξ_T)`.
pub fn simulate_on_paths(instance: &Instance, lower: &[LowerApprox], paths: &[Vec<Vec<f64>>], seed: u64) -> Result<PolicyRun> {
    let t_max = instance.num_stages();
    if lower.len() != t_max {
        return Err(DrmcoError::InvalidInput(format!("expected {t_max} cut approximations, got {}", lower.len())));
    }
    let incoming: Vec<_> = (1..=t_max).map(|t| instance.incoming_bounds(t)).collect();
    let outcomes: Vec<Result<std::result::Result<PathResult, AbortedPath>>> = paths
        .par_iter()
        .enumerate()
        .map(|(k, path)| {
            let mut x_prev = instance.x0.clone();
            let mut stage_costs = Vec::with_capacity(t_max);
            let mut states = Vec::with_capacity(t_max);
            for t in 1..=t_max {
                let xi = if t == 1 { &instance.xi1 } else { &path[t - 2] };
                let problem = StageProblem { stage: instance.stage(t), incoming: &incoming[t - 1], future: &lower[t - 1], regularization: None };
                match problem.solve(&x_prev, xi) {
                    Ok(s) => {
                        stage_costs.push(s.stage_cost);
                        states.push(s.state.clone());
                        x_prev = s.state;
                    }
                    Err(e @ (DrmcoError::Infeasible { .. } | DrmcoError::Unbounded { .. })) => {
                        return Ok(Err(AbortedPath { path: k, stage: t, reason: e.to_string() }));
                    }
                    Err(e) => return Err(e),
                }
            }
            let total = stage_costs.iter().sum();
            Ok(Ok(PathResult { path: k, total, stage_costs, states }))
        })
        .collect();
    let mut run = PolicyRun { seed, paths: Vec::new(), aborted: Vec::new() };
    for o in outcomes {
        match o? {
            Ok(p) => run.paths.push(p),
            Err(a) => run.aborted.push(a),
        }
    }
    if !run.aborted.is_empty() {
        log::warn!("{} evaluation paths aborted", run.aborted.len());
    }
    Ok(run)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalStats {
    pub count: usize,
    pub aborted: usize,
    pub mean: f64,
    /// Sample standard deviation (`n − 1` denominator, 0 for one path).
    pub std: f64,
    /// `(level, value)` pairs at [`QUANTILE_LEVELS`].
    pub quantiles: Vec<(f64, f64)>,
}

impl EvalStats {
    pub fn quantile(&self, level: f64) -> Option<f64> {
        self.quantiles.iter().find(|(l, _)| (*l - level).abs() < 1e-12).map(|(_, v)| *v)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// Linear interpolation between order statistics at position `(n−1)p`.
pub fn quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * p;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

pub fn summarize(run: &PolicyRun) -> Result<EvalStats> {
    if run.paths.is_empty() {
        return Err(DrmcoError::InvalidInput("no completed paths to summarize".into()));
    }
    let mut v = run.totals();
    let n = v.len();
    let mean = v.iter().sum::<f64>() / n as f64;
    let std = if n > 1 { (v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt() } else { 0.0 };
    v.sort_by(f64::total_cmp);
    let quantiles = QUANTILE_LEVELS.iter().map(|&p| (p, quantile_sorted(&v, p))).collect();
    Ok(EvalStats { count: n, aborted: run.aborted.len(), mean, std, quantiles })
}

/// Comparison of a distributionally robust value against the nominal one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConservatismReport {
    pub robust_value: f64,
    pub nominal_value: f64,
    /// `Σ_t l_t ρ_t`.
    pub bound: f64,
    pub epsilon: f64,
    /// `bound + 2ε − (robust − nominal)`; nonnegative when the bound holds.
    pub margin: f64,
    pub holds: bool,
}

/// Checks `Q^DR − Q^nominal ≤ Σ_t l_t ρ_t + 2ε` using the declared
/// uncertainty-Lipschitz constants of the stages.
pub fn conservatism_check(instance: &Instance, robust: &SolveReport, nominal: &SolveReport, epsilon: f64) -> Result<ConservatismReport> {
    let mut bound = 0.0;
    for t in 2..=instance.num_stages() {
        let l = instance.stage(t).declared.uncertainty_lipschitz.ok_or_else(|| {
            DrmcoError::InvalidInput(format!("stage {t} declares no uncertainty Lipschitz constant"))
        })?;
        bound += l * instance.ambiguity_of(t).radius;
    }
    let diff = robust.lower_bound - nominal.lower_bound;
    let margin = bound + 2.0 * epsilon - diff;
    Ok(ConservatismReport { robust_value: robust.lower_bound, nominal_value: nominal.lower_bound, bound, epsilon, margin, holds: margin >= 0.0 })
}

const W: f64 = 640.0;
const H: f64 = 400.0;
const PAD: f64 = 56.0;

struct Frame {
    x0: f64,
    x1: f64,
    y0: f64,
    y1: f64,
}

impl Frame {
    fn new(xs: impl Iterator<Item = f64> + Clone, ys: impl Iterator<Item = f64> + Clone) -> Self {
        let span = |it: &mut dyn Iterator<Item = f64>| {
            let (lo, hi) = it.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
            if lo == hi { (lo - 1.0, hi + 1.0) } else { (lo, hi) }
        };
        let (x0, x1) = span(&mut xs.clone());
        let (y0, y1) = span(&mut ys.clone());
        Self { x0, x1, y0, y1 }
    }

    fn px(&self, x: f64) -> f64 {
        PAD + (x - self.x0) / (self.x1 - self.x0) * (W - 2.0 * PAD)
    }

    fn py(&self, y: f64) -> f64 {
        H - PAD - (y - self.y0) / (self.y1 - self.y0) * (H - 2.0 * PAD)
    }

    fn axes(&self, out: &mut String, xlabel: &str, ylabel: &str) {
        let _ = write!(
            out,
            r##"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" font-family="sans-serif" font-size="11"><rect width="100%" height="100%" fill="white"/><line x1="{PAD}" y1="{b}" x2="{r}" y2="{b}" stroke="black"/><line x1="{PAD}" y1="{PAD}" x2="{PAD}" y2="{b}" stroke="black"/><text x="{cx}" y="{lx}" text-anchor="middle">{xlabel}</text><text x="14" y="{cy}" transform="rotate(-90 14 {cy})" text-anchor="middle">{ylabel}</text><text x="{PAD}" y="{lx}">{x0:.3}</text><text x="{r}" y="{lx}" text-anchor="end">{x1:.3}</text><text x="{tl}" y="{b}" text-anchor="end">{y0:.4}</text><text x="{tl}" y="{t}" text-anchor="end">{y1:.4}</text>"##,
            b = H - PAD,
            r = W - PAD,
            cx = W / 2.0,
            cy = H / 2.0,
            lx = H - PAD + 20.0,
            tl = PAD - 4.0,
            t = PAD + 4.0,
            x0 = self.x0,
            x1 = self.x1,
            y0 = self.y0,
            y1 = self.y1,
        );
    }
}

const COLORS: [&str; 7] = ["#1b9e77", "#d95f02", "#7570b3", "#e7298a", "#66a61e", "#e6ab02", "#a6761d"];

/// One line per quantile level against the radius parameter.
pub fn quantile_plot_svg(series: &[(f64, EvalStats)], xlabel: &str) -> String {
    let mut out = String::new();
    if series.is_empty() {
        return out;
    }
    let frame = Frame::new(series.iter().map(|(x, _)| *x), series.iter().flat_map(|(_, s)| s.quantiles.iter().map(|q| q.1)));
    frame.axes(&mut out, xlabel, "evaluation cost");
    for (i, level) in QUANTILE_LEVELS.iter().enumerate() {
        let pts: Vec<String> = series
            .iter()
            .filter_map(|(x, s)| s.quantile(*level).map(|v| format!("{:.2},{:.2}", frame.px(*x), frame.py(v))))
            .collect();
        let color = COLORS[i % COLORS.len()];
        let _ = write!(out, r#"<polyline fill="none" stroke="{color}" points="{}"/>"#, pts.join(" "));
        let _ = write!(out, r#"<text x="{:.1}" y="{:.1}" fill="{color}">{:.0}%</text>"#, W - PAD + 4.0, PAD + 14.0 * i as f64, level * 100.0);
    }
    out.push_str("</svg>\n");
    out
}

/// Mean against standard deviation, one labelled point per model.
pub fn mean_std_svg(points: &[(String, EvalStats)]) -> String {
    let mut out = String::new();
    if points.is_empty() {
        return out;
    }
    let frame = Frame::new(points.iter().map(|(_, s)| s.std), points.iter().map(|(_, s)| s.mean));
    frame.axes(&mut out, "standard deviation", "mean");
    for (i, (label, s)) in points.iter().enumerate() {
        let (x, y) = (frame.px(s.std), frame.py(s.mean));
        let color = COLORS[i % COLORS.len()];
        let _ = write!(out, r#"<circle cx="{x:.2}" cy="{y:.2}" r="3" fill="{color}"/><text x="{:.2}" y="{:.2}">{}</text>"#, x + 5.0, y - 4.0, escape(label));
    }
    out.push_str("</svg>\n");
    out
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
