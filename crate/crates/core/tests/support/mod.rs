#![allow(dead_code)]

pub mod brute;
pub mod extensive;
pub mod toys;

use drmco::oracle::{OracleContext, DEFAULT_VERTEX_CAP};
use drmco::{Instance, LowerApprox, SolveReport, UpperApprox};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Largest violations found by [`check_validity`].
#[derive(Debug, Default, Clone, Copy)]
pub struct Validity {
    /// `max(cut(x) − exact(x))` over sampled states and all cut pools.
    pub cut: f64,
    /// `max(exact(x) − envelope(x))` over sampled states.
    pub envelope: f64,
    /// `max(exact(x̄) − v)` over recorded overestimates `v` at their anchors.
    pub overestimate: f64,
    pub checked_states: usize,
    pub checked_overestimates: usize,
}

impl Validity {
    pub fn worst(&self) -> f64 {
        self.cut.max(self.envelope).max(self.overestimate)
    }
}

/// Compares the final approximations and every traced overestimate of a run
/// with the exact regularized cost-to-go from the extensive form.
pub fn check_validity(inst: &Instance, report: &SolveReport, states: usize, seed: u64) -> Validity {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Validity::default();
    for t in 2..=inst.num_stages() {
        let bounds = &inst.stage(t - 1).state_bounds;
        let mut points: Vec<Vec<f64>> = Vec::with_capacity(states);
        if t == 2 {
            points.push(report.x1.clone());
        }
        while points.len() < states {
            points.push((0..bounds.len()).map(|i| bounds.lower[i] + (bounds.upper[i] - bounds.lower[i]) * rng.random::<f64>()).collect());
        }
        for x in &points {
            let exact = extensive::cost_to_go(inst, t, x, true);
            out.cut = out.cut.max(report.lower[t - 2].eval(x) - exact);
            let up = report.upper[t - 2].eval(x).unwrap();
            out.envelope = out.envelope.max(exact - up);
            out.checked_states += 1;
        }
    }
    for rec in &report.trace {
        if rec.overestimate.is_finite() {
            let exact = extensive::cost_to_go(inst, rec.stage, &rec.x_prev, true);
            out.overestimate = out.overestimate.max(exact - rec.overestimate);
            out.cut = out.cut.max(rec.cut.eval(&rec.x_prev) - exact);
            out.checked_overestimates += 1;
        }
    }
    out
}

/// Runs `f` with the stage-`t` oracle context of `inst`, using the terminal
/// approximations when `t` is the last stage.
pub fn with_ctx<R>(inst: &Instance, t: usize, f: impl FnOnce(&OracleContext<'_>) -> R) -> R {
    let last = t == inst.num_stages();
    let lower = if last { LowerApprox::terminal(t) } else { LowerApprox::new(t, inst.regularization[t]) };
    let upper = if last { UpperApprox::terminal(t) } else { UpperApprox::new(t, inst.regularization[t]) };
    let incoming = inst.incoming_bounds(t);
    let ctx = OracleContext {
        stage: inst.stage(t),
        incoming: &incoming,
        ambiguity: inst.ambiguity_of(t),
        data: inst.data_of(t),
        lower: &lower,
        upper: &upper,
        regularization: inst.regularization[t - 1],
        vertex_cap: DEFAULT_VERTEX_CAP,
    };
    f(&ctx)
}
