//! Multi-commodity inventory with express orders, standard orders delivered
//! one stage later, rejections, holding and backlog costs.
//!
//! State `(x^l, x^b)`: inventory levels and pending standard orders.
//! Internal variables, in order: express orders `y^a`, rejections `y^r`,
//! positive and negative parts `p, q` of `x^l`, a copy `y^{bc}` of `x^b`
//! carrying its price, and a fixed-cost indicator pinned at 1.
//!
//! Two variants: uncertain demands (right-hand side) and uncertain prices
//! (objective).

use std::f64::consts::PI;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::{draw_paths, empirical_measures, Generated, PathSampler, Row, Rows};
use crate::error::{DrmcoError, Result};
use crate::measures::covariance_factor;
use crate::model::{AmbiguitySpec, Bounds, DeclaredConstants, Instance, StageModel, UncertaintySet};

/// Generator parameters; every per-product quantity is shared by all products.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct InventoryParams {
    pub products: usize,
    pub stages: usize,
    pub period: f64,
    pub express_cost: f64,
    pub standard_cost: f64,
    pub holding_cost: f64,
    pub backlog_cost: f64,
    pub rejection_cost: f64,
    pub fixed_cost: f64,
    pub express_total: f64,
    pub express_max: f64,
    pub standard_max: f64,
    pub backlog_max: f64,
    pub inventory_max: f64,
    pub base_demand: f64,
    pub demand_spread: f64,
    pub base_price: f64,
    pub express_factor: f64,
    pub price_variance: f64,
    pub price_floor: f64,
    /// Upper end of the price support, in price standard deviations above the mean.
    pub price_cap_sigmas: f64,
    /// Seed of the random price covariance matrices.
    pub covariance_seed: u64,
}

impl Default for InventoryParams {
    fn default() -> Self {
        Self::demand_defaults()
    }
}

impl InventoryParams {
    pub fn demand_defaults() -> Self {
        Self {
            products: 3,
            stages: 5,
            period: 5.0,
            express_cost: 5.0,
            standard_cost: 1.0,
            holding_cost: 2.0,
            backlog_cost: 10.0,
            rejection_cost: 100.0,
            fixed_cost: 1.0,
            express_total: 15.0,
            express_max: 10.0,
            standard_max: 20.0,
            backlog_max: 10.0,
            inventory_max: 100.0,
            base_demand: 5.0,
            demand_spread: 50.0,
            base_price: 1.0,
            express_factor: 5.0,
            price_variance: 0.1,
            price_floor: 0.001,
            price_cap_sigmas: 6.0,
            covariance_seed: 0,
        }
    }

    pub fn price_defaults() -> Self {
        Self {
            products: 5,
            stages: 10,
            holding_cost: 1.0,
            demand_spread: 10.0,
            backlog_max: 20.0,
            inventory_max: 20.0,
            ..Self::demand_defaults()
        }
    }

    /// Seasonal base demand `D₀(1 + cos(2π(t+j)/τ))`, products numbered from 1.
    pub fn base_demand(&self, t: usize, j: usize) -> f64 {
        self.base_demand * (1.0 + (2.0 * PI * (t + j) as f64 / self.period).cos())
    }

    /// Mean price `C₀(1 + sin(2π(t+j)/τ))`.
    pub fn mean_price(&self, t: usize, j: usize) -> f64 {
        self.base_price * (1.0 + (2.0 * PI * (t + j) as f64 / self.period).sin())
    }

    /// Demand of product `j` at stage `t` for uncertainty coordinate `xi_j`.
    pub fn demand(&self, t: usize, j: usize, xi_j: f64) -> f64 {
        self.base_demand(t, j) + self.demand_spread * xi_j
    }

    fn check(&self) -> Result<()> {
        let costs = [self.express_cost, self.standard_cost, self.holding_cost, self.backlog_cost, self.rejection_cost, self.fixed_cost];
        let bounds = [self.express_total, self.express_max, self.standard_max, self.backlog_max, self.inventory_max];
        if self.products == 0 || self.stages == 0 {
            return Err(DrmcoError::InvalidInput("products and stages must be positive".into()));
        }
        if costs.iter().any(|c| !(*c >= 0.0)) || bounds.iter().any(|b| !(*b > 0.0)) || !(self.period > 0.0) {
            return Err(DrmcoError::InvalidInput("inventory costs must be nonnegative and bounds positive".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, PartialEq)]
enum Variant {
    Demand,
    Price,
}

struct Layout {
    j: usize,
}

impl Layout {
    fn ya(&self, i: usize) -> usize {
        i
    }
    fn yr(&self, i: usize) -> usize {
        self.j + i
    }
    fn p(&self, i: usize) -> usize {
        2 * self.j + i
    }
    fn q(&self, i: usize) -> usize {
        3 * self.j + i
    }
    fn ybc(&self, i: usize) -> usize {
        4 * self.j + i
    }
    fn fixed(&self) -> usize {
        5 * self.j
    }
    fn dim(&self) -> usize {
        5 * self.j + 1
    }
}

fn stage_model(p: &InventoryParams, t: usize, variant: Variant, xi_set: UncertaintySet) -> StageModel {
    let j = p.products;
    let l = Layout { j };
    let dy = l.dim();
    let mut rows = Rows::new(2 * j, dy, 2 * j, j);

    let mut cap = Row::le(p.express_total);
    cap.f = (0..j).map(|i| (l.ya(i), 1.0)).collect();
    rows.push(cap);
    for i in 0..j {
        // x^l_t ≤ x^l_{t−1} + y^a + x^b_{t−1} + y^r − D
        let fixed_demand = if variant == Variant::Price { p.demand(t, i + 1, 1.0) } else { p.base_demand(t, i + 1) };
        let mut r = Row::le(-fixed_demand);
        r.g = vec![(i, 1.0)];
        r.e = vec![(i, -1.0), (j + i, -1.0)];
        r.f = vec![(l.ya(i), -1.0), (l.yr(i), -1.0)];
        if variant == Variant::Demand {
            r.h_xi = vec![(i, -p.demand_spread)];
        }
        rows.push(r);
    }
    if variant == Variant::Demand {
        for i in 0..j {
            let mut r = Row::le(p.base_demand(t, i + 1));
            r.f = vec![(l.yr(i), 1.0)];
            r.h_xi = vec![(i, p.demand_spread)];
            rows.push(r);
        }
    }
    for i in 0..j {
        let mut r = Row::eq(0.0);
        r.g = vec![(i, 1.0)];
        r.f = vec![(l.p(i), -1.0), (l.q(i), 1.0)];
        rows.push(r);
    }
    for i in 0..j {
        let mut r = Row::eq(0.0);
        r.f = vec![(l.ybc(i), 1.0)];
        r.g = vec![(j + i, -1.0)];
        rows.push(r);
    }

    let mut lower = vec![0.0; dy];
    let mut upper = vec![f64::INFINITY; dy];
    let mut cost = vec![0.0; dy];
    let mut obj_matrix = Vec::new();
    for i in 0..j {
        upper[l.ya(i)] = p.express_max;
        cost[l.yr(i)] = p.rejection_cost;
        cost[l.p(i)] = p.holding_cost;
        cost[l.q(i)] = p.backlog_cost;
        upper[l.ybc(i)] = p.standard_max;
    }
    lower[l.fixed()] = 1.0;
    upper[l.fixed()] = 1.0;
    cost[l.fixed()] = p.fixed_cost;
    let declared;
    match variant {
        Variant::Demand => {
            for i in 0..j {
                cost[l.ya(i)] = p.express_cost;
                cost[l.ybc(i)] = p.standard_cost;
            }
            declared = DeclaredConstants {
                state_lipschitz: Some(j as f64 * p.rejection_cost),
                uncertainty_lipschitz: Some(p.demand_spread * p.rejection_cost),
                growth_slopes: None,
            };
        }
        Variant::Price => {
            obj_matrix = vec![vec![0.0; j]; dy];
            for i in 0..j {
                upper[l.yr(i)] = p.demand(t, i + 1, 1.0);
                obj_matrix[l.ya(i)][i] = p.express_factor;
                obj_matrix[l.ybc(i)][i] = 1.0;
            }
            declared = DeclaredConstants {
                state_lipschitz: Some(j as f64 * p.rejection_cost),
                uncertainty_lipschitz: Some(p.express_factor * p.express_max + p.standard_max),
                growth_slopes: None,
            };
        }
    }
    let mut state_lo = vec![-p.backlog_max; j];
    state_lo.extend(vec![0.0; j]);
    let mut state_hi = vec![p.inventory_max; j];
    state_hi.extend(vec![p.standard_max; j]);
    StageModel {
        stage_index: t,
        state_dim_in: 2 * j,
        state_dim_out: 2 * j,
        internal_dim: dy,
        obj_matrix,
        obj_vector: cost,
        constraints: rows.finish(),
        internal_bounds: Bounds::new(lower, upper),
        state_bounds: Bounds::new(state_lo, state_hi),
        uncertainty_set: xi_set,
        declared,
    }
}

fn assemble(p: &InventoryParams, variant: Variant, sets: Vec<UncertaintySet>, xi1: Vec<f64>, sampler: Arc<dyn PathSampler>, seed: u64, n: usize) -> Generated {
    let stages: Vec<StageModel> = sets.into_iter().enumerate().map(|(i, s)| stage_model(p, i + 1, variant, s)).collect();
    let m = p.products as f64 * p.rejection_cost;
    let paths = draw_paths(sampler.as_ref(), seed, n);
    let data = empirical_measures(&paths);
    let t = stages.len();
    let instance = Instance {
        stages,
        ambiguity: vec![AmbiguitySpec::nominal(); t - 1],
        data,
        x0: vec![0.0; 2 * p.products],
        xi1,
        regularization: vec![m; t],
    };
    Generated { instance, sampler, training_paths: paths }
}

/// Uncertain demands `D_{t,j} = D₀(1 + cos(2π(t+j)/τ)) + D̄ ξ_{t,j}`, `ξ_t ∈ [0,1]^J`.
///
/// The first stage uses `ξ_1 = (½, …, ½)`. With `n` training paths the
/// empirical measure of stage `t` has `n` atoms.
pub fn build_inventory_demand(p: &InventoryParams, seed: u64, n: usize) -> Result<Generated> {
    p.check()?;
    let j = p.products;
    let sets = (0..p.stages).map(|_| UncertaintySet::boxed(vec![0.0; j], vec![1.0; j])).collect();
    let sampler = Arc::new(DemandSampler { products: j, stages: p.stages });
    Ok(assemble(p, Variant::Demand, sets, vec![0.5; j], sampler, seed, n))
}

/// Chain of conditional uniforms on `[0,1]^J`, independent across stages.
pub struct DemandSampler {
    pub products: usize,
    pub stages: usize,
}

impl DemandSampler {
    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        let mut xi = Vec::with_capacity(self.products);
        let mut prev: f64 = rng.random();
        xi.push(prev);
        for _ in 1..self.products {
            let (lo, hi) = if prev <= 0.5 { (0.0, (1.0 + prev) / 2.0) } else { (prev / 2.0, 1.0) };
            prev = lo + (hi - lo) * rng.random::<f64>();
            xi.push(prev);
        }
        xi
    }
}

impl PathSampler for DemandSampler {
    fn sample_path(&self, rng: &mut ChaCha8Rng) -> Vec<Vec<f64>> {
        (1..self.stages).map(|_| self.draw(rng)).collect()
    }
}

/// Uncertain prices `C^b = ξ`, `C^a = C₁ξ` with
/// `ξ_t = max(Normal(μ_t, C̄ Σ_t), C̲)`, capped at `μ_t + κ√C̄`.
pub fn build_inventory_price(p: &InventoryParams, seed: u64, n: usize) -> Result<Generated> {
    p.check()?;
    let sampler = Arc::new(PriceSampler::new(p)?);
    let sets = (1..=p.stages).map(|t| sampler.support(t)).collect();
    let xi1 = (1..=p.products).map(|j| p.mean_price(1, j)).collect();
    Ok(assemble(p, Variant::Price, sets, xi1, sampler, seed, n))
}

/// Random covariance `U Uᵀ`, `U` uniform on `[0,1]`, scaled to unit top eigenvalue.
pub fn random_covariance<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Vec<Vec<f64>> {
    let u = DMatrix::from_fn(dim, dim, |_, _| rng.random::<f64>());
    let s = &u * u.transpose();
    let top = SymmetricEigen::new(s.clone()).eigenvalues.iter().copied().fold(0.0_f64, f64::max);
    let s = s / top;
    (0..dim).map(|i| (0..dim).map(|k| s[(i, k)]).collect()).collect()
}

/// Truncated and capped correlated normal prices, independent across stages.
pub struct PriceSampler {
    params: InventoryParams,
    pub covariances: Vec<Vec<Vec<f64>>>,
    factors: Vec<DMatrix<f64>>,
}

impl PriceSampler {
    pub fn new(p: &InventoryParams) -> Result<Self> {
        let mut covariances = Vec::with_capacity(p.stages);
        let mut factors = Vec::with_capacity(p.stages);
        for t in 1..=p.stages {
            let mut rng = super::path_rng(p.covariance_seed, t as u64);
            let c = random_covariance(p.products, &mut rng);
            factors.push(covariance_factor(&c)?);
            covariances.push(c);
        }
        Ok(Self { params: p.clone(), covariances, factors })
    }

    pub fn support(&self, t: usize) -> UncertaintySet {
        let p = &self.params;
        let upper = (1..=p.products).map(|j| p.mean_price(t, j) + p.price_cap_sigmas * p.price_variance.sqrt()).collect();
        UncertaintySet::boxed(vec![p.price_floor; p.products], upper)
    }

    pub fn draw<R: Rng + ?Sized>(&self, t: usize, rng: &mut R) -> Vec<f64> {
        let p = &self.params;
        let z = DVector::from_iterator(p.products, (0..p.products).map(|_| rng.sample::<f64, _>(StandardNormal)));
        let eps = &self.factors[t - 1] * z;
        let set = self.support(t);
        (0..p.products)
            .map(|i| {
                let v = p.mean_price(t, i + 1) + p.price_variance.sqrt() * eps[i];
                v.max(p.price_floor).min(set.upper[i].unwrap_or(f64::INFINITY))
            })
            .collect()
    }
}

impl PathSampler for PriceSampler {
    fn sample_path(&self, rng: &mut ChaCha8Rng) -> Vec<Vec<f64>> {
        (2..=self.params.stages).map(|t| self.draw(t, rng)).collect()
    }
}

