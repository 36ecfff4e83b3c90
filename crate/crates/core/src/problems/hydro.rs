//! Hydro-thermal planning over interconnected regions.
//!
//! State: stored energy per region. Internal variables, in order: hydro
//! generation `y^h`, spillage `y^s`, thermal generation `y^g` per plant,
//! exchanges `y^e_{j→j'}` and deficit accounts `y^a_{j,j'}` over ordered
//! region pairs. Inflows enter the storage balance, so the uncertainty sits
//! in the right-hand side on the nonnegative orthant.
//!
//! The shipped parameter set is synthetic, in thousands of energy units.

use std::sync::Arc;

use nalgebra::DMatrix;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{draw_paths, empirical_measures, Generated, PathSampler, Row, Rows};
use crate::error::{DrmcoError, Result};
use crate::measures::{covariance_factor, ArLognormalModel};
use crate::model::{AmbiguitySpec, Bounds, DeclaredConstants, Instance, StageModel, UncertaintySet};

const DEFAULT_JSON: &str = include_str!("../../data/hydro_default.json");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThermalPlant {
    pub region: usize,
    pub cost: f64,
    #[serde(default)]
    pub lower: f64,
    pub upper: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HydroParams {
    pub regions: usize,
    pub stages: usize,
    pub spill_cost: f64,
    /// Deficit cost levels; region `j` reaches its `k`-th other region's
    /// account at level `k`. Needs `regions − 1` entries.
    pub deficit_costs: Vec<f64>,
    pub thermal: Vec<ThermalPlant>,
    pub exchange_cost: Vec<Vec<f64>>,
    pub exchange_max: Vec<Vec<f64>>,
    pub demand: Vec<f64>,
    pub storage_max: Vec<f64>,
    pub hydro_max: Vec<f64>,
    pub x0: Vec<f64>,
    pub xi1: Vec<f64>,
    pub inflow: ArLognormalModel,
}

impl Default for HydroParams {
    fn default() -> Self {
        serde_json::from_str(DEFAULT_JSON).expect("shipped hydro defaults parse")
    }
}

impl HydroParams {
    fn check(&self) -> Result<()> {
        let j = self.regions;
        let mut bad = Vec::new();
        if j < 2 {
            bad.push("at least two regions are required".to_string());
        }
        if self.deficit_costs.len() + 1 != j {
            bad.push(format!("deficit_costs needs {} entries", j.saturating_sub(1)));
        }
        for (name, v) in [("demand", &self.demand), ("storage_max", &self.storage_max), ("hydro_max", &self.hydro_max), ("x0", &self.x0), ("xi1", &self.xi1)] {
            if v.len() != j {
                bad.push(format!("{name} needs {j} entries"));
            }
        }
        if self.exchange_cost.len() != j || self.exchange_max.len() != j {
            bad.push(format!("exchange matrices must be {j} × {j}"));
        }
        if self.thermal.iter().any(|p| p.region >= j || p.lower > p.upper) {
            bad.push("thermal plants need a valid region and lower ≤ upper".into());
        }
        if self.inflow.num_stages() < self.stages {
            bad.push(format!("inflow model covers {} stages, need {}", self.inflow.num_stages(), self.stages));
        }
        if self.x0.iter().zip(&self.storage_max).any(|(x, b)| *x < 0.0 || x > b) {
            bad.push("x0 must lie within the storage bounds".into());
        }
        if !bad.is_empty() {
            return Err(DrmcoError::InvalidInput(bad.join("; ")));
        }
        self.inflow.check()
    }

    /// Lipschitz bound of the stage values: the largest of spill and deficit costs.
    pub fn lipschitz(&self) -> f64 {
        self.deficit_costs.iter().copied().fold(self.spill_cost, f64::max)
    }

    fn pairs(&self) -> Vec<(usize, usize)> {
        let j = self.regions;
        (0..j).flat_map(|a| (0..j).filter(move |b| *b != a).map(move |b| (a, b))).collect()
    }
}

fn stage_model(p: &HydroParams, t: usize) -> StageModel {
    let j = p.regions;
    let pairs = p.pairs();
    let (yh, ys, yg) = (0, j, 2 * j);
    let ye = yg + p.thermal.len();
    let ya = ye + pairs.len();
    let dy = ya + pairs.len();
    let mut rows = Rows::new(j, dy, j, j);
    for r in 0..j {
        // x^l_t + y^h + y^s − x^l_{t−1} = ξ
        let mut row = Row::eq(0.0);
        row.g = vec![(r, 1.0)];
        row.f = vec![(yh + r, 1.0), (ys + r, 1.0)];
        row.e = vec![(r, -1.0)];
        row.h_xi = vec![(r, 1.0)];
        rows.push(row);
    }
    for r in 0..j {
        let mut row = Row::eq(p.demand[r]);
        row.f.push((yh + r, 1.0));
        row.f.extend(p.thermal.iter().enumerate().filter(|(_, pl)| pl.region == r).map(|(l, _)| (yg + l, 1.0)));
        for (k, &(a, b)) in pairs.iter().enumerate() {
            if a == r {
                row.f.push((ya + k, 1.0));
                row.f.push((ye + k, -1.0));
            }
            if b == r {
                row.f.push((ye + k, 1.0));
            }
        }
        rows.push(row);
    }
    let mut lower = vec![0.0; dy];
    let mut upper = vec![f64::INFINITY; dy];
    let mut cost = vec![0.0; dy];
    for r in 0..j {
        upper[yh + r] = p.hydro_max[r];
        cost[ys + r] = p.spill_cost;
    }
    for (l, pl) in p.thermal.iter().enumerate() {
        lower[yg + l] = pl.lower;
        upper[yg + l] = pl.upper;
        cost[yg + l] = pl.cost;
    }
    let deficit_cap = |a: usize| p.demand[a] / (j - 1) as f64;
    for (k, &(a, b)) in pairs.iter().enumerate() {
        upper[ye + k] = p.exchange_max[a][b];
        cost[ye + k] = p.exchange_cost[a][b];
        upper[ya + k] = deficit_cap(a);
        // Accounts of region a in increasing order of b use increasing cost levels.
        cost[ya + k] = p.deficit_costs[if b < a { b } else { b - 1 }];
    }
    let m = p.lipschitz();
    StageModel {
        stage_index: t,
        state_dim_in: j,
        state_dim_out: j,
        internal_dim: dy,
        obj_matrix: Vec::new(),
        obj_vector: cost,
        constraints: rows.finish(),
        internal_bounds: Bounds::new(lower, upper),
        state_bounds: Bounds::new(vec![0.0; j], p.storage_max.clone()),
        uncertainty_set: UncertaintySet::orthant(j),
        declared: DeclaredConstants {
            state_lipschitz: Some(m),
            uncertainty_lipschitz: Some(m),
            growth_slopes: Some(vec![p.spill_cost; j]),
        },
    }
}

/// Builds the instance with `n` training paths of the inflow process.
pub fn build_hydro(p: &HydroParams, seed: u64, n: usize) -> Result<Generated> {
    p.check()?;
    let stages: Vec<StageModel> = (1..=p.stages).map(|t| stage_model(p, t)).collect();
    let sampler = Arc::new(InflowSampler::new(p)?);
    let paths = draw_paths(sampler.as_ref(), seed, n);
    let instance = Instance {
        stages,
        ambiguity: vec![AmbiguitySpec::nominal(); p.stages - 1],
        data: empirical_measures(&paths),
        x0: p.x0.clone(),
        xi1: p.xi1.clone(),
        regularization: vec![p.lipschitz(); p.stages],
    };
    Ok(Generated { instance, sampler, training_paths: paths })
}

/// Stagewise-dependent log-AR inflows started from `ξ_1`.
pub struct InflowSampler {
    model: ArLognormalModel,
    xi1: Vec<f64>,
    stages: usize,
    factors: Vec<DMatrix<f64>>,
}

impl InflowSampler {
    pub fn new(p: &HydroParams) -> Result<Self> {
        let factors = p.inflow.sigma.iter().map(|s| covariance_factor(s)).collect::<Result<_>>()?;
        Ok(Self { model: p.inflow.clone(), xi1: p.xi1.clone(), stages: p.stages, factors })
    }
}

impl PathSampler for InflowSampler {
    fn sample_path(&self, rng: &mut ChaCha8Rng) -> Vec<Vec<f64>> {
        let mut prev = self.xi1.clone();
        (2..=self.stages)
            .map(|t| {
                prev = self.model.simulate_with_factor(t, &prev, &self.factors[t - 1], rng);
                prev.clone()
            })
            .collect()
    }
}
