//! DDP loop against deterministic-equivalent LPs.

mod support;

use drmco::oracle::initial_oracle;
use drmco::{run, AmbiguitySpec, Cut, DdpConfig, ForwardMode, LowerApprox, SolveReport, SolveStatus, UpperApprox};
use support::{check_validity, extensive, toys};

fn config() -> DdpConfig {
    DdpConfig { epsilon: 1e-7, max_iters: 300, record_trace: true, ..DdpConfig::default() }
}

fn assert_bound_discipline(r: &SolveReport) {
    for w in r.iterations.windows(2) {
        assert!(w[1].lower >= w[0].lower, "lower bound decreased: {} → {}", w[0].lower, w[1].lower);
    }
    for it in &r.iterations {
        assert!(it.upper >= it.lower, "iteration {}: upper {} < lower {}", it.iteration, it.upper, it.lower);
    }
}

#[test]
fn single_stage_lp_converges_immediately() {
    let r = run(&toys::single_stage_lp(), &config()).unwrap();
    assert_eq!(r.status, SolveStatus::GapReached);
    assert!(r.iterations.len() <= 2);
    assert!((r.lower_bound + 1.0).abs() < 1e-9);
    assert!((r.upper_bound + 1.0).abs() < 1e-9);
}

#[test]
fn two_stage_nominal_matches_extensive_form() {
    let g = toys::inventory(1, 2, 2, 3);
    let exact = extensive::full_value(&g.instance);
    let r = run(&g.instance, &config()).unwrap();
    assert_eq!(r.status, SolveStatus::GapReached);
    assert!((r.lower_bound - exact).abs() <= 1e-6 * (1.0 + exact.abs()), "ddp {} vs extensive {exact}", r.lower_bound);
    assert_bound_discipline(&r);
}

#[test]
fn three_stage_cvar_and_robust_match_their_recursions() {
    let g = toys::inventory(1, 3, 2, 11);
    for spec in [AmbiguitySpec::cvar(0.5, 0.0), AmbiguitySpec::cvar(0.2, 0.4), AmbiguitySpec::robust()] {
        let inst = g.instance.with_ambiguity(spec.clone());
        let exact = extensive::full_value(&inst);
        let r = run(&inst, &config()).unwrap();
        assert_eq!(r.status, SolveStatus::GapReached, "{spec:?}");
        assert!((r.lower_bound - exact).abs() <= 1e-6 * (1.0 + exact.abs()), "{spec:?}: ddp {} vs extensive {exact}", r.lower_bound);
        assert_bound_discipline(&r);
    }
}

#[test]
fn wasserstein_two_stage_matches_extensive_dual_form() {
    let g = toys::inventory(2, 2, 2, 5);
    for radius in [0.0, 0.05, 0.3] {
        let inst = g.instance.with_ambiguity(AmbiguitySpec::wasserstein(radius));
        let exact = extensive::full_value(&inst);
        let r = run(&inst, &config()).unwrap();
        assert_eq!(r.status, SolveStatus::GapReached);
        assert!((r.lower_bound - exact).abs() <= 1e-6 * (1.0 + exact.abs()), "ρ={radius}: ddp {} vs extensive {exact}", r.lower_bound);
    }
}

#[test]
fn zero_radius_reproduces_the_nominal_value() {
    let g = toys::inventory(2, 3, 2, 7);
    let nominal = run(&g.instance, &config()).unwrap();
    let dr = run(&g.instance.with_ambiguity(AmbiguitySpec::wasserstein(0.0)), &config()).unwrap();
    assert!((nominal.lower_bound - dr.lower_bound).abs() <= 1e-5);
}

#[test]
fn cuts_and_overestimates_are_valid_on_two_stage_runs() {
    let g = toys::inventory(2, 2, 2, 9);
    for spec in [AmbiguitySpec::nominal(), AmbiguitySpec::wasserstein(0.1), AmbiguitySpec::cvar(0.3, 0.2), AmbiguitySpec::robust()] {
        let inst = g.instance.with_ambiguity(spec.clone());
        let r = run(&inst, &config()).unwrap();
        let v = check_validity(&inst, &r, 100, 1);
        assert!(v.worst() <= 1e-6, "{spec:?}: {v:?}");
        assert!(v.checked_overestimates > 0);
    }
}

#[test]
fn sampled_forward_mode_is_valid_and_deterministic() {
    let g = toys::inventory(2, 3, 3, 4);
    let inst = g.instance.with_ambiguity(AmbiguitySpec::wasserstein(0.1));
    let cfg = DdpConfig { forward_mode: ForwardMode::Sampled { seed: 8 }, max_iters: 40, ..config() };
    let a = run(&inst, &cfg).unwrap();
    let b = run(&inst, &cfg).unwrap();
    assert_eq!(a.iterations.iter().map(|i| i.lower).collect::<Vec<_>>(), b.iterations.iter().map(|i| i.lower).collect::<Vec<_>>());
    assert_bound_discipline(&a);
    let exact = g.instance.with_ambiguity(AmbiguitySpec::wasserstein(0.1));
    let gap_run = run(&exact, &config()).unwrap();
    assert!(a.lower_bound <= gap_run.upper_bound + 1e-6);
}

#[test]
fn iteration_cap_is_reported() {
    let g = toys::inventory(2, 3, 2, 7);
    let r = run(&g.instance, &DdpConfig { max_iters: 1, ..config() }).unwrap();
    assert_eq!(r.status, SolveStatus::IterCap);
    assert_eq!(r.iterations.len(), 2);
}

#[test]
fn time_cap_stops_the_loop() {
    let g = toys::inventory(2, 3, 2, 7);
    let r = run(&g.instance, &DdpConfig { time_cap: Some(0.0), ..config() }).unwrap();
    assert_eq!(r.status, SolveStatus::TimeCap);
}

#[test]
fn initial_oracle_without_approximations_is_myopic() {
    let g = toys::inventory(2, 3, 2, 7);
    let inst = &g.instance;
    let lower = LowerApprox::new(1, inst.regularization[1]);
    let upper = UpperApprox::new(1, inst.regularization[1]);
    let out = initial_oracle(inst.stage(1), &inst.x0, &inst.xi1, &lower, &upper).unwrap();
    assert!(out.gap.is_infinite());
    assert!((out.value - out.stage_cost).abs() < 1e-12);
}

#[test]
fn initial_oracle_with_the_exact_cut_finds_the_grid_argmin() {
    // Q(x) = 3·[4 − x]₊ + c is piecewise linear; the affine piece active on
    // x ≤ 4 is a single valid cut that is exact on the relevant range.
    let inst = toys::affine_pair(AmbiguitySpec::nominal(), false);
    let mut lower = LowerApprox::new(1, 3.0);
    lower.add_cut(Cut { value: 3.0 * 4.0 + 1.5, gradient: vec![-3.0], anchor: vec![0.0], stage: 1 }).unwrap();
    let upper = UpperApprox::new(1, 3.0);
    let out = initial_oracle(inst.stage(1), &inst.x0, &inst.xi1, &lower, &upper).unwrap();
    let f = |x: f64| x + (3.0 * (4.0 - x) + 1.5).max(0.0);
    let grid_best = (0..=100_000).map(|i| i as f64 * 1e-4 * 10.0).min_by(|a, b| f(*a).total_cmp(&f(*b))).unwrap();
    assert!((out.state[0] - grid_best).abs() < 1e-6, "{} vs {grid_best}", out.state[0]);
}

#[test]
fn converged_first_stage_gap_is_below_tolerance() {
    let g = toys::inventory(1, 2, 2, 3);
    let r = run(&g.instance, &config()).unwrap();
    let last = r.iterations.last().unwrap();
    assert!(last.gaps[0] <= 1e-6, "{:?}", last.gaps);
}

#[test]
fn report_serializes_with_infinite_bounds() {
    let g = toys::inventory(1, 2, 2, 3);
    let r = run(&g.instance, &DdpConfig { max_iters: 0, ..config() }).unwrap();
    let json = r.to_json().unwrap();
    let back: SolveReport = serde_json::from_str(&json).unwrap();
    assert_eq!(back.iterations.len(), 1);
    let mut csv = Vec::new();
    r.write_bounds_csv(&mut csv).unwrap();
    assert!(String::from_utf8(csv).unwrap().starts_with("iteration,lower,upper,seconds"));
}
