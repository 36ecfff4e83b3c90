//! Consecutive dual dynamic programming.
//!
//! Each iteration walks stages `2..=T` once, letting each stage oracle add a
//! cut and an overestimate to the approximations of the previous stage, then
//! re-solves the first stage. The lower bound is the first-stage value with
//! the cut approximation, the upper bound the smallest first-stage value seen
//! with the envelope approximation.

use std::io::Write;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::approx::{Cut, LowerApprox, UpperApprox};
use crate::error::{DrmcoError, Result};
use crate::model::{ensure_valid, Instance};
use crate::oracle::{self, initial_oracle, Forward, OracleContext, DEFAULT_VERTEX_CAP};

/// How forward states are chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
pub enum ForwardMode {
    /// Follow the outcome with the largest approximation gap.
    #[default]
    GapMax,
    /// Follow an outcome drawn from the data measure.
    Sampled { seed: u64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DdpConfig {
    /// Absolute tolerance on `upper − lower`.
    pub epsilon: f64,
    pub max_iters: usize,
    /// Wall-clock limit in seconds, checked between stage evaluations.
    #[serde(default)]
    pub time_cap: Option<f64>,
    #[serde(default)]
    pub forward_mode: ForwardMode,
    #[serde(default = "default_cap")]
    pub vertex_cap: usize,
    /// Keep every oracle output in the report.
    #[serde(default)]
    pub record_trace: bool,
}

fn default_cap() -> usize {
    DEFAULT_VERTEX_CAP
}

impl Default for DdpConfig {
    fn default() -> Self {
        Self { epsilon: 1e-6, max_iters: 500, time_cap: None, forward_mode: ForwardMode::GapMax, vertex_cap: DEFAULT_VERTEX_CAP, record_trace: false }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SolveStatus {
    GapReached,
    IterCap,
    TimeCap,
}

/// Bounds after one iteration; iteration 0 is the initialization.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub iteration: usize,
    pub lower: f64,
    #[serde(with = "crate::serde_inf")]
    pub upper: f64,
    /// Forward gaps `γ_1, …, γ_T` of this iteration (`γ_1` from the initial stage).
    #[serde(with = "crate::serde_inf::vec")]
    pub gaps: Vec<f64>,
    pub seconds: f64,
}

/// One noninitial oracle call, kept when `record_trace` is set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleRecord {
    pub iteration: usize,
    pub stage: usize,
    pub x_prev: Vec<f64>,
    pub cut: Cut,
    #[serde(with = "crate::serde_inf")]
    pub overestimate: f64,
    #[serde(with = "crate::serde_inf")]
    pub gap: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub status: SolveStatus,
    pub lower_bound: f64,
    #[serde(with = "crate::serde_inf")]
    pub upper_bound: f64,
    /// Incumbent first-stage decision (smallest recorded upper value).
    pub x1: Vec<f64>,
    pub iterations: Vec<IterationRecord>,
    /// `lower[t-1]` approximates the cost-to-go after stage `t`.
    pub lower: Vec<LowerApprox>,
    pub upper: Vec<UpperApprox>,
    pub seconds: f64,
    #[serde(default)]
    pub trace: Vec<OracleRecord>,
}

impl SolveReport {
    pub fn gap(&self) -> f64 {
        self.upper_bound - self.lower_bound
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// `iteration,lower,upper,seconds`, one row per record.
    pub fn write_bounds_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["iteration", "lower", "upper", "seconds"])?;
        for r in &self.iterations {
            w.write_record([r.iteration.to_string(), r.lower.to_string(), r.upper.to_string(), r.seconds.to_string()])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Runs the DDP loop until the gap closes, the iteration cap or the time cap.
pub fn run(instance: &Instance, config: &DdpConfig) -> Result<SolveReport> {
    ensure_valid(instance)?;
    let start = Instant::now();
    let t_max = instance.num_stages();
    let reg = &instance.regularization;
    let mut lower: Vec<LowerApprox> =
        (1..=t_max).map(|t| if t == t_max { LowerApprox::terminal(t) } else { LowerApprox::new(t, reg[t]) }).collect();
    let mut upper: Vec<UpperApprox> =
        (1..=t_max).map(|t| if t == t_max { UpperApprox::terminal(t) } else { UpperApprox::new(t, reg[t]) }).collect();
    let incoming: Vec<_> = (1..=t_max).map(|t| instance.incoming_bounds(t)).collect();
    let mut rng = match config.forward_mode {
        ForwardMode::Sampled { seed } => Some(ChaCha8Rng::seed_from_u64(seed)),
        ForwardMode::GapMax => None,
    };

    let stage1 = instance.stage(1);
    let first = initial_oracle(stage1, &instance.x0, &instance.xi1, &lower[0], &upper[0])
        .map_err(|e| wrap(e, 1, 0))?;
    let mut lb = first.value;
    let mut ub = first.stage_cost + upper[0].eval(&first.state)?;
    let mut x1 = first.state.clone();
    let mut incumbent = first.state;
    let mut iterations = vec![IterationRecord { iteration: 0, lower: lb, upper: ub.max(lb), gaps: vec![first.gap], seconds: start.elapsed().as_secs_f64() }];
    let mut trace = Vec::new();
    let over_time = |start: &Instant| config.time_cap.is_some_and(|cap| start.elapsed().as_secs_f64() > cap);

    let mut status = SolveStatus::IterCap;
    let mut iter = 0;
    loop {
        if ub - lb <= config.epsilon {
            status = SolveStatus::GapReached;
            break;
        }
        if iter >= config.max_iters {
            break;
        }
        if over_time(&start) {
            status = SolveStatus::TimeCap;
            break;
        }
        iter += 1;
        let mut gaps = vec![f64::NAN; t_max];
        let mut x_prev = x1.clone();
        let mut timed_out = false;
        for t in 2..=t_max {
            let forward = match rng.as_mut() {
                Some(r) => Forward::Sampled(r.random::<f64>()),
                None => Forward::GapMax,
            };
            let ctx = OracleContext {
                stage: instance.stage(t),
                incoming: &incoming[t - 1],
                ambiguity: instance.ambiguity_of(t),
                data: instance.data_of(t),
                lower: &lower[t - 1],
                upper: &upper[t - 1],
                regularization: reg[t - 1],
                vertex_cap: config.vertex_cap,
            };
            let out = oracle::evaluate(&ctx, &x_prev, forward).map_err(|e| wrap(e, t, iter))?;
            if config.record_trace {
                trace.push(OracleRecord {
                    iteration: iter,
                    stage: t,
                    x_prev: x_prev.clone(),
                    cut: out.cut.clone(),
                    overestimate: out.overestimate,
                    gap: out.gap,
                });
            }
            lower[t - 2].add_cut(out.cut).map_err(|e| wrap(e, t, iter))?;
            upper[t - 2].add_point(x_prev, out.overestimate).map_err(|e| wrap(e, t, iter))?;
            gaps[t - 1] = out.gap;
            x_prev = out.next_state;
            if t < t_max && over_time(&start) {
                timed_out = true;
                break;
            }
        }
        let next = initial_oracle(stage1, &instance.x0, &instance.xi1, &lower[0], &upper[0]).map_err(|e| wrap(e, 1, iter))?;
        gaps[0] = next.gap;
        lb = lb.max(next.value);
        let candidate = next.stage_cost + upper[0].eval(&next.state)?;
        if candidate < ub {
            ub = candidate;
            incumbent = next.state.clone();
        }
        if ub < lb - 1e-6 * (1.0 + lb.abs()) {
            log::warn!("iteration {iter}: upper bound {ub} fell below lower bound {lb}");
        }
        x1 = next.state;
        iterations.push(IterationRecord { iteration: iter, lower: lb, upper: ub.max(lb), gaps, seconds: start.elapsed().as_secs_f64() });
        log::debug!("iteration {iter}: lower {lb}, upper {ub}");
        if timed_out {
            status = SolveStatus::TimeCap;
            break;
        }
    }
    Ok(SolveReport {
        status,
        lower_bound: lb,
        upper_bound: ub.max(lb),
        x1: incumbent,
        iterations,
        lower,
        upper,
        seconds: start.elapsed().as_secs_f64(),
        trace,
    })
}

fn wrap(e: DrmcoError, stage: usize, iteration: usize) -> DrmcoError {
    DrmcoError::OracleFailure { stage, iteration, source: Box::new(e) }
}
