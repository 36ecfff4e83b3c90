//! Hand-built instances with known answers.

use drmco::problems::inventory::{build_inventory_demand, build_inventory_price, InventoryParams};
use drmco::problems::Generated;
use drmco::{AmbiguitySpec, Bounds, ConstraintBlock, DeclaredConstants, DiscreteMeasure, Instance, RowSense, StageModel, UncertaintySet};

pub struct StageSpec {
    pub din: usize,
    pub dout: usize,
    pub cost: Vec<f64>,
    pub obj_matrix: Vec<Vec<f64>>,
    pub y_bounds: (Vec<f64>, Vec<f64>),
    pub x_bounds: (Vec<f64>, Vec<f64>),
    pub rows: Vec<(Vec<f64>, Vec<f64>, Vec<f64>, f64, Vec<f64>, RowSense)>,
    pub set: UncertaintySet,
}

pub fn stage(t: usize, s: StageSpec) -> StageModel {
    let mut c = ConstraintBlock::default();
    for (e, f, g, h, hx, sense) in s.rows {
        c.e.push(e);
        c.f.push(f);
        c.g.push(g);
        c.h.push(h);
        c.h_xi.push(hx);
        c.sense.push(sense);
    }
    if c.h_xi.iter().flatten().all(|v| *v == 0.0) {
        c.h_xi.clear();
    }
    StageModel {
        stage_index: t,
        state_dim_in: s.din,
        state_dim_out: s.dout,
        internal_dim: s.cost.len(),
        obj_matrix: s.obj_matrix,
        obj_vector: s.cost,
        constraints: c,
        internal_bounds: Bounds::new(s.y_bounds.0, s.y_bounds.1),
        state_bounds: Bounds::new(s.x_bounds.0, s.x_bounds.1),
        uncertainty_set: s.set,
        declared: DeclaredConstants::default(),
    }
}

fn idle_first_stage(dout_upper: f64) -> StageModel {
    stage(
        1,
        StageSpec {
            din: 1,
            dout: 1,
            cost: vec![0.0],
            obj_matrix: vec![],
            y_bounds: (vec![0.0], vec![0.0]),
            x_bounds: (vec![0.0], vec![dout_upper]),
            rows: vec![],
            set: UncertaintySet::boxed(vec![0.0], vec![0.0]),
        },
    )
}

/// Two stages whose second-stage value equals `ξ` on `Ξ = [0, 1]`, with data
/// at `ξ̂ = 0.5`. The uncertainty enters the objective (`objective = true`)
/// or the right-hand side.
pub fn linear_toy(spec: AmbiguitySpec, objective: bool) -> Instance {
    let second = if objective {
        StageSpec {
            din: 1,
            dout: 1,
            cost: vec![0.0],
            obj_matrix: vec![vec![1.0]],
            y_bounds: (vec![1.0], vec![1.0]),
            x_bounds: (vec![0.0], vec![0.0]),
            rows: vec![],
            set: UncertaintySet::boxed(vec![0.0], vec![1.0]),
        }
    } else {
        StageSpec {
            din: 1,
            dout: 1,
            cost: vec![1.0],
            obj_matrix: vec![],
            y_bounds: (vec![0.0], vec![f64::INFINITY]),
            x_bounds: (vec![0.0], vec![0.0]),
            rows: vec![(vec![0.0], vec![-1.0], vec![0.0], 0.0, vec![-1.0], RowSense::Le)],
            set: UncertaintySet::boxed(vec![0.0], vec![1.0]),
        }
    };
    let mut second = stage(2, second);
    second.declared.uncertainty_lipschitz = Some(1.0);
    Instance {
        stages: vec![idle_first_stage(1.0), second],
        ambiguity: vec![spec],
        data: vec![DiscreteMeasure::dirac(vec![0.5])],
        x0: vec![0.0],
        xi1: vec![0.0],
        regularization: vec![1.0, 1.0],
    }
}

/// Two-stage buy-then-shortage problem whose second-stage value is
/// `3·[4 − x₁]₊ + 2ξ₁ + ξ₂`, written with `ξ` in the objective or in the
/// right-hand side. Both forms have identical value functions.
pub fn affine_pair(spec: AmbiguitySpec, objective: bool) -> Instance {
    let first = stage(
        1,
        StageSpec {
            din: 1,
            dout: 1,
            cost: vec![1.0],
            obj_matrix: vec![],
            y_bounds: (vec![0.0], vec![10.0]),
            x_bounds: (vec![0.0], vec![10.0]),
            rows: vec![(vec![0.0], vec![-1.0], vec![1.0], 0.0, vec![0.0], RowSense::Le)],
            set: UncertaintySet::boxed(vec![0.0], vec![0.0]),
        },
    );
    let shortage = (vec![-1.0], vec![-1.0, 0.0], vec![0.0], -4.0, vec![0.0, 0.0], RowSense::Le);
    let second = if objective {
        StageSpec {
            din: 1,
            dout: 1,
            cost: vec![3.0, 0.0],
            obj_matrix: vec![vec![0.0, 0.0], vec![2.0, 1.0]],
            y_bounds: (vec![0.0, 1.0], vec![f64::INFINITY, 1.0]),
            x_bounds: (vec![0.0], vec![0.0]),
            rows: vec![shortage],
            set: UncertaintySet::boxed(vec![0.0, 0.0], vec![1.0, 1.0]),
        }
    } else {
        StageSpec {
            din: 1,
            dout: 1,
            cost: vec![3.0, 1.0],
            obj_matrix: vec![],
            y_bounds: (vec![0.0, 0.0], vec![f64::INFINITY, f64::INFINITY]),
            x_bounds: (vec![0.0], vec![0.0]),
            rows: vec![shortage, (vec![0.0], vec![0.0, -1.0], vec![0.0], 0.0, vec![-2.0, -1.0], RowSense::Le)],
            set: UncertaintySet::boxed(vec![0.0, 0.0], vec![1.0, 1.0]),
        }
    };
    let mut second = stage(2, second);
    second.declared.uncertainty_lipschitz = Some(2.0);
    second.declared.state_lipschitz = Some(3.0);
    Instance {
        stages: vec![first, second],
        ambiguity: vec![spec],
        data: vec![DiscreteMeasure::uniform(vec![vec![0.2, 0.7], vec![0.9, 0.1]])],
        x0: vec![0.0],
        xi1: vec![0.0],
        regularization: vec![3.0, 3.0],
    }
}

/// `min −y₁ − y₂` over `y₁ + y₂ ≤ 1`, `y ∈ [0, 1]²`: optimum −1.
pub fn single_stage_lp() -> Instance {
    let only = stage(
        1,
        StageSpec {
            din: 1,
            dout: 1,
            cost: vec![-1.0, -1.0],
            obj_matrix: vec![],
            y_bounds: (vec![0.0, 0.0], vec![1.0, 1.0]),
            x_bounds: (vec![0.0], vec![0.0]),
            rows: vec![(vec![0.0], vec![1.0, 1.0], vec![0.0], 1.0, vec![0.0], RowSense::Le)],
            set: UncertaintySet::boxed(vec![0.0], vec![0.0]),
        },
    );
    Instance { stages: vec![only], ambiguity: vec![], data: vec![], x0: vec![0.0], xi1: vec![0.0], regularization: vec![1.0] }
}

/// Scaled inventory-demand instance.
pub fn inventory(products: usize, stages: usize, n: usize, seed: u64) -> Generated {
    let p = InventoryParams { products, stages, ..InventoryParams::demand_defaults() };
    build_inventory_demand(&p, seed, n).unwrap()
}

/// Scaled inventory-price instance.
pub fn inventory_price(products: usize, stages: usize, n: usize, seed: u64) -> Generated {
    let p = InventoryParams { products, stages, ..InventoryParams::price_defaults() };
    build_inventory_price(&p, seed, n).unwrap()
}
