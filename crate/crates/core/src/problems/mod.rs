//! Benchmark instance generators and their true-measure samplers.
//!
//! Sample path `k` of a seeded experiment is always drawn from its own
//! ChaCha stream, so the first `n` paths do not depend on how many paths are
//! requested in total.

pub mod hydro;
pub mod inventory;

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::measures::{fit_saa, DiscreteMeasure, SaaFit};
use crate::model::{ConstraintBlock, RowSense};

/// Draws uncertainty paths `(ξ_2, …, ξ_T)` from the true process.
pub trait PathSampler: Send + Sync {
    fn sample_path(&self, rng: &mut ChaCha8Rng) -> Vec<Vec<f64>>;
}

/// Generator output: the instance (with empirical data) and its true sampler.
#[derive(Clone)]
pub struct Generated {
    pub instance: crate::model::Instance,
    pub sampler: Arc<dyn PathSampler>,
    /// Training paths the empirical measures were built from.
    pub training_paths: Vec<Vec<Vec<f64>>>,
}

/// Independent random stream for path `k` under `seed`.
pub fn path_rng(seed: u64, k: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(k);
    rng
}

pub fn draw_paths(sampler: &dyn PathSampler, seed: u64, count: usize) -> Vec<Vec<Vec<f64>>> {
    (0..count).map(|k| sampler.sample_path(&mut path_rng(seed, k as u64))).collect()
}

/// Per-stage uniform measures over the values seen along the paths.
pub fn empirical_measures(paths: &[Vec<Vec<f64>>]) -> Vec<DiscreteMeasure> {
    let stages = paths.first().map_or(0, |p| p.len());
    (0..stages).map(|s| DiscreteMeasure::uniform(paths.iter().map(|p| p[s].clone()).collect())).collect()
}

/// Lognormal SAA measures fitted stage by stage to the empirical atoms.
pub fn saa_measures(empirical: &[DiscreteMeasure], n_out: usize, seed: u64) -> Result<Vec<SaaFit>> {
    empirical
        .iter()
        .enumerate()
        .map(|(s, m)| fit_saa(&m.atoms, n_out, &mut path_rng(seed, s as u64)))
        .collect()
}

/// Stagewise-independent resampling of the empirical atoms.
pub struct EmpiricalSampler {
    pub measures: Vec<DiscreteMeasure>,
}

impl PathSampler for EmpiricalSampler {
    fn sample_path(&self, rng: &mut ChaCha8Rng) -> Vec<Vec<f64>> {
        self.measures
            .iter()
            .map(|m| {
                let u: f64 = rng.random();
                let mut acc = 0.0;
                for (a, w) in m.atoms.iter().zip(&m.weights) {
                    acc += w;
                    if u < acc {
                        return a.clone();
                    }
                }
                m.atoms[m.atoms.len() - 1].clone()
            })
            .collect()
    }
}

/// Row-by-row assembly of a [`ConstraintBlock`].
pub(crate) struct Rows {
    din: usize,
    dy: usize,
    dout: usize,
    dxi: usize,
    block: ConstraintBlock,
}

pub(crate) struct Row {
    pub e: Vec<(usize, f64)>,
    pub f: Vec<(usize, f64)>,
    pub g: Vec<(usize, f64)>,
    pub h: f64,
    pub h_xi: Vec<(usize, f64)>,
    pub sense: RowSense,
}

impl Row {
    pub fn le(h: f64) -> Self {
        Self { e: vec![], f: vec![], g: vec![], h, h_xi: vec![], sense: RowSense::Le }
    }

    pub fn eq(h: f64) -> Self {
        Self { sense: RowSense::Eq, ..Self::le(h) }
    }
}

impl Rows {
    pub fn new(din: usize, dy: usize, dout: usize, dxi: usize) -> Self {
        Self { din, dy, dout, dxi, block: ConstraintBlock::default() }
    }

    pub fn push(&mut self, row: Row) {
        let dense = |n: usize, terms: &[(usize, f64)]| {
            let mut v = vec![0.0; n];
            for (i, a) in terms {
                v[*i] += a;
            }
            v
        };
        self.block.e.push(dense(self.din, &row.e));
        self.block.f.push(dense(self.dy, &row.f));
        self.block.g.push(dense(self.dout, &row.g));
        self.block.h.push(row.h);
        self.block.h_xi.push(dense(self.dxi, &row.h_xi));
        self.block.sense.push(row.sense);
    }

    pub fn finish(mut self) -> ConstraintBlock {
        if self.block.h_xi.iter().flatten().all(|v| *v == 0.0) {
            self.block.h_xi.clear();
        }
        self.block
    }
}

