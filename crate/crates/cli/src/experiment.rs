//! Experiment pipeline: build the problem from its training data, solve every
//! model, evaluate the policies on shared paths and write the artifacts.
//!
//! Layout of the output directory:
//! `config.json`, `summary.csv`, `quantiles.svg`, `mean_std.svg`, and per
//! model `models/<label>/{report.json, bounds.csv, cuts.json, eval.csv, eval.json}`.

use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use drmco::evaluation::{mean_std_svg, quantile_plot_svg, simulate_on_paths, summarize, EvalStats, QUANTILE_LEVELS};
use drmco::measures::{radius_hat, wasserstein_discrete};
use drmco::problems::hydro::{build_hydro, HydroParams};
use drmco::problems::inventory::{build_inventory_demand, build_inventory_price, InventoryParams};
use drmco::problems::{draw_paths, saa_measures, Generated};
use drmco::stage::StageProblem;
use drmco::{validate, AmbiguitySpec, DdpConfig, DiscreteMeasure, ForwardMode, Instance, LowerApprox, Metric, SolveReport};

use crate::config::{merge_overrides, ExperimentConfig, ModelSpec, ProblemConfig, RadiusBasis};
use crate::error::CliError;

pub struct Experiment {
    pub config: ExperimentConfig,
    pub generated: Generated,
    /// Nominal measure of each stage `t ≥ 2`, empirical or SAA.
    pub nominal: Vec<DiscreteMeasure>,
    /// Radius unit `d_t` of each stage `t ≥ 2`.
    pub radius_unit: Vec<f64>,
}

fn config_err(e: drmco::DrmcoError) -> CliError {
    CliError::config(e.to_string(), Some("problem".into()))
}

impl Experiment {
    pub fn build(config: ExperimentConfig) -> Result<Self, CliError> {
        let seed = config.seeds.data;
        let generated = match &config.problem {
            ProblemConfig::InventoryDemand { overrides } => {
                let p = merge_overrides(&InventoryParams::demand_defaults(), overrides)?;
                build_inventory_demand(&p, seed, config.n).map_err(config_err)?
            }
            ProblemConfig::InventoryPrice { overrides } => {
                let p = merge_overrides(&InventoryParams::price_defaults(), overrides)?;
                build_inventory_price(&p, seed, config.n).map_err(config_err)?
            }
            ProblemConfig::Hydro { overrides } => {
                let p = merge_overrides(&HydroParams::default(), overrides)?;
                build_hydro(&p, seed, config.n).map_err(config_err)?
            }
        };
        let empirical = generated.instance.data.clone();
        let (nominal, radius_unit) = match config.radius_basis {
            RadiusBasis::Empirical => {
                let units = empirical.iter().map(radius_hat).collect();
                (empirical, units)
            }
            RadiusBasis::Saa => {
                let atoms = config.saa_atoms.expect("checked with the config");
                let fits = saa_measures(&empirical, atoms, config.seeds.algorithm).map_err(config_err)?;
                let saa: Vec<DiscreteMeasure> = fits.into_iter().map(|f| f.measure).collect();
                let units = empirical
                    .iter()
                    .zip(&saa)
                    .map(|(e, s)| wasserstein_discrete(e, s, Metric::L1))
                    .collect::<Result<Vec<f64>, _>>()
                    .map_err(config_err)?;
                (saa, units)
            }
        };
        Ok(Self { config, generated, nominal, radius_unit })
    }

    pub fn models(&self) -> Vec<ModelSpec> {
        self.config.expand_models()
    }

    pub fn instance_for(&self, spec: &ModelSpec) -> Result<Instance, CliError> {
        let mut inst = self.generated.instance.clone();
        inst.data = self.nominal.clone();
        inst.ambiguity = self
            .radius_unit
            .iter()
            .map(|d| match spec {
                ModelSpec::Nominal => AmbiguitySpec::nominal(),
                ModelSpec::Robust => AmbiguitySpec::robust(),
                ModelSpec::Cvar { alpha, beta } => AmbiguitySpec::cvar(*alpha, *beta),
                ModelSpec::Wasserstein { gamma } => AmbiguitySpec::wasserstein(gamma * d),
            })
            .collect();
        let violations = validate(&inst);
        if let Some(v) = violations.first() {
            let all: Vec<String> = violations.iter().map(|v| v.to_string()).collect();
            return Err(CliError::config(format!("model {}: {}", spec.label(), all.join("; ")), Some(v.field.clone())));
        }
        Ok(inst)
    }

    fn ddp_config(&self) -> DdpConfig {
        let forward_mode = if self.config.sampled_forward { ForwardMode::Sampled { seed: self.config.seeds.algorithm } } else { ForwardMode::GapMax };
        DdpConfig { epsilon: self.config.epsilon, max_iters: self.config.max_iters, time_cap: self.config.time_cap, forward_mode, ..DdpConfig::default() }
    }

    /// Solves every model and writes its report, bound history and cuts.
    pub fn solve(&self, out: &Path) -> Result<(), CliError> {
        fs::create_dir_all(out)?;
        fs::write(out.join("config.json"), serde_json::to_string_pretty(&self.config).map_err(|e| CliError::Io(e.to_string()))?)?;
        let cfg = self.ddp_config();
        for spec in self.models() {
            let inst = self.instance_for(&spec)?;
            log::info!("solving {}", spec.label());
            let report = drmco::run(&inst, &cfg)?;
            log::info!("{}: {:?} after {} iterations, bounds [{}, {}]", spec.label(), report.status, report.iterations.len(), report.lower_bound, report.upper_bound);
            let dir = model_dir(out, &spec);
            fs::create_dir_all(&dir)?;
            fs::write(dir.join("report.json"), report.to_json()?)?;
            report.write_bounds_csv(BufWriter::new(File::create(dir.join("bounds.csv"))?))?;
            fs::write(dir.join("cuts.json"), serde_json::to_string(&report.lower).map_err(|e| CliError::Io(e.to_string()))?)?;
        }
        Ok(())
    }

    /// Simulates every solved model on one shared set of paths from the true
    /// sampler, then writes the statistics, the summary table and the plots.
    pub fn evaluate(&self, out: &Path) -> Result<(), CliError> {
        let paths = draw_paths(self.generated.sampler.as_ref(), self.config.seeds.evaluation, self.config.eval_paths);
        let mut rows = Vec::new();
        for spec in self.models() {
            let inst = self.instance_for(&spec)?;
            let dir = model_dir(out, &spec);
            let report: SolveReport = read_json(&dir.join("report.json"))?;
            let cuts: Vec<LowerApprox> = read_json(&dir.join("cuts.json"))?;
            let run = simulate_on_paths(&inst, &cuts, &paths, self.config.seeds.evaluation)?;
            run.write_csv(BufWriter::new(File::create(dir.join("eval.csv"))?))?;
            let stats = if run.paths.is_empty() { None } else { Some(summarize(&run)?) };
            if let Some(s) = &stats {
                fs::write(dir.join("eval.json"), s.to_json()?)?;
            }
            rows.push(SummaryRow { radii: inst.ambiguity.iter().map(|a| a.radius).collect(), spec, report, stats, aborted: run.aborted.len() });
        }
        write_summary(&out.join("summary.csv"), &rows)?;
        write_plots(out, &rows)?;
        Ok(())
    }

    /// Writes each stage LP in MPS format: stage 1 at `(x_0, ξ_1)`, later
    /// stages at the midpoint of the incoming state box and the first nominal
    /// atom, without cuts or regularization.
    pub fn export_lp(&self, out: &Path) -> Result<Vec<PathBuf>, CliError> {
        let dir = out.join("lp");
        fs::create_dir_all(&dir)?;
        let inst = &self.generated.instance;
        let mut written = Vec::new();
        for t in 1..=inst.num_stages() {
            let (x_prev, xi) = if t == 1 {
                (inst.x0.clone(), inst.xi1.clone())
            } else {
                let b = &inst.stage(t - 1).state_bounds;
                (b.lower.iter().zip(&b.upper).map(|(l, u)| 0.5 * (l + u)).collect(), self.nominal[t - 2].atoms[0].clone())
            };
            let future = if t == inst.num_stages() { LowerApprox::terminal(t) } else { LowerApprox::new(t, inst.regularization[t]) };
            let incoming = inst.incoming_bounds(t);
            let problem = StageProblem { stage: inst.stage(t), incoming: &incoming, future: &future, regularization: None };
            let (lp, _) = problem.build(&x_prev, &xi);
            let path = dir.join(format!("stage_{t}.mps"));
            drmco_lp::write_mps(&lp, &format!("STAGE{t}"), &path).map_err(|e| CliError::Io(e.to_string()))?;
            written.push(path);
        }
        Ok(written)
    }
}

fn model_dir(out: &Path, spec: &ModelSpec) -> PathBuf {
    out.join("models").join(spec.label())
}

fn read_json<T: for<'de> serde::Deserialize<'de>>(path: &Path) -> Result<T, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e} (run `solve` first)", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

struct SummaryRow {
    spec: ModelSpec,
    radii: Vec<f64>,
    report: SolveReport,
    stats: Option<EvalStats>,
    aborted: usize,
}

/// One row per model. Timings are left out so reruns give identical files.
fn write_summary(path: &Path, rows: &[SummaryRow]) -> Result<(), CliError> {
    let mut w = csv::Writer::from_writer(BufWriter::new(File::create(path)?));
    let mut header: Vec<String> = ["model", "kind", "alpha", "beta", "gamma", "radii", "status", "iterations", "lower_bound", "upper_bound", "eval_count", "aborted", "eval_mean", "eval_std"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    header.extend(QUANTILE_LEVELS.iter().map(|q| format!("q{}", (q * 100.0).round())));
    w.write_record(&header).map_err(|e| CliError::Io(e.to_string()))?;
    for r in rows {
        let (alpha, beta, gamma) = match r.spec {
            ModelSpec::Cvar { alpha, beta } => (alpha.to_string(), beta.to_string(), String::new()),
            ModelSpec::Wasserstein { gamma } => (String::new(), String::new(), gamma.to_string()),
            _ => Default::default(),
        };
        let radii: Vec<String> = r.radii.iter().map(|v| v.to_string()).collect();
        let mut rec = vec![
            r.spec.label(),
            r.spec.kind().to_string(),
            alpha,
            beta,
            gamma,
            radii.join(";"),
            format!("{:?}", r.report.status),
            r.report.iterations.len().saturating_sub(1).to_string(),
            r.report.lower_bound.to_string(),
            r.report.upper_bound.to_string(),
        ];
        match &r.stats {
            Some(s) => {
                rec.extend([s.count.to_string(), r.aborted.to_string(), s.mean.to_string(), s.std.to_string()]);
                rec.extend(s.quantiles.iter().map(|(_, v)| v.to_string()));
            }
            None => {
                rec.extend(["0".to_string(), r.aborted.to_string(), String::new(), String::new()]);
                rec.extend(QUANTILE_LEVELS.iter().map(|_| String::new()));
            }
        }
        w.write_record(&rec).map_err(|e| CliError::Io(e.to_string()))?;
    }
    w.flush()?;
    Ok(())
}

fn write_plots(out: &Path, rows: &[SummaryRow]) -> Result<(), CliError> {
    let series: Vec<(f64, EvalStats)> = rows
        .iter()
        .filter_map(|r| match (&r.spec, &r.stats) {
            (ModelSpec::Wasserstein { gamma }, Some(s)) => Some((*gamma, s.clone())),
            _ => None,
        })
        .collect();
    if !series.is_empty() {
        fs::write(out.join("quantiles.svg"), quantile_plot_svg(&series, "radius factor γ"))?;
    }
    let points: Vec<(String, EvalStats)> = rows.iter().filter_map(|r| r.stats.clone().map(|s| (r.spec.label(), s))).collect();
    if !points.is_empty() {
        fs::write(out.join("mean_std.svg"), mean_std_svg(&points))?;
    }
    Ok(())
}
