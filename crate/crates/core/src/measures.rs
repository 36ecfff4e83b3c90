//! Finitely supported measures, transport distances and the stochastic
//! processes used to generate data.

use std::io::{Read, Write};

use drmco_lp::{solve_default, LpBuilder, LpStatus};
use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{DrmcoError, Result};

/// Ground metric on uncertainty vectors.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
pub enum Metric {
    #[default]
    L1,
    Linf,
}

impl Metric {
    pub fn distance(self, a: &[f64], b: &[f64]) -> f64 {
        let diffs = a.iter().zip(b).map(|(x, y)| (x - y).abs());
        match self {
            Metric::L1 => diffs.sum(),
            Metric::Linf => diffs.fold(0.0, f64::max),
        }
    }
}

/// Atoms with nonnegative weights summing to one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscreteMeasure {
    pub atoms: Vec<Vec<f64>>,
    pub weights: Vec<f64>,
}

impl DiscreteMeasure {
    pub fn new(atoms: Vec<Vec<f64>>, weights: Vec<f64>) -> Result<Self> {
        let m = Self { atoms, weights };
        m.check()?;
        Ok(m)
    }

    /// Equal weights on every atom (the empirical measure).
    pub fn uniform(atoms: Vec<Vec<f64>>) -> Self {
        let n = atoms.len();
        Self { atoms, weights: vec![1.0 / n as f64; n] }
    }

    pub fn dirac(atom: Vec<f64>) -> Self {
        Self { atoms: vec![atom], weights: vec![1.0] }
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.atoms.first().map_or(0, |a| a.len())
    }

    pub fn check(&self) -> Result<()> {
        if self.atoms.is_empty() {
            return Err(DrmcoError::InvalidInput("measure has no atoms".into()));
        }
        if self.atoms.len() != self.weights.len() {
            return Err(DrmcoError::InvalidInput("atom and weight counts differ".into()));
        }
        let d = self.dim();
        if self.atoms.iter().any(|a| a.len() != d) {
            return Err(DrmcoError::InvalidInput("atoms have inconsistent dimensions".into()));
        }
        if self.weights.iter().any(|w| !(*w >= 0.0)) {
            return Err(DrmcoError::InvalidInput("weights must be nonnegative".into()));
        }
        let total: f64 = self.weights.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(DrmcoError::InvalidInput(format!("weights sum to {total}, not 1")));
        }
        Ok(())
    }

    /// Weighted mean of the atoms.
    pub fn mean(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.dim()];
        for (a, w) in self.atoms.iter().zip(&self.weights) {
            for (o, v) in out.iter_mut().zip(a) {
                *o += w * v;
            }
        }
        out
    }

    /// CSV with one atom per row and the weight in the last column.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let mut header: Vec<String> = (0..self.dim()).map(|i| format!("x{}", i + 1)).collect();
        header.push("weight".into());
        w.write_record(&header)?;
        for (a, wt) in self.atoms.iter().zip(&self.weights) {
            let mut rec: Vec<String> = a.iter().map(|v| format!("{v:?}")).collect();
            rec.push(format!("{wt:?}"));
            w.write_record(&rec)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(reader: R) -> Result<Self> {
        let mut r = csv::Reader::from_reader(reader);
        let mut atoms = Vec::new();
        let mut weights = Vec::new();
        for rec in r.records() {
            let rec = rec?;
            let values: Vec<f64> = rec
                .iter()
                .map(|s| s.trim().parse::<f64>().map_err(|e| DrmcoError::InvalidInput(format!("bad number {s:?}: {e}"))))
                .collect::<Result<_>>()?;
            let (w, a) = values.split_last().ok_or_else(|| DrmcoError::InvalidInput("empty row".into()))?;
            atoms.push(a.to_vec());
            weights.push(*w);
        }
        Self::new(atoms, weights)
    }
}

/// Wasserstein-1 distance between two discrete measures via the transport LP.
pub fn wasserstein_discrete(mu: &DiscreteMeasure, nu: &DiscreteMeasure, metric: Metric) -> Result<f64> {
    mu.check()?;
    nu.check()?;
    if mu.dim() != nu.dim() {
        return Err(DrmcoError::InvalidInput("measures have different dimensions".into()));
    }
    let (n, m) = (mu.len(), nu.len());
    if n == 1 || m == 1 {
        // A single marginal admits only the product coupling.
        let mut total = 0.0;
        for (a, wa) in mu.atoms.iter().zip(&mu.weights) {
            for (b, wb) in nu.atoms.iter().zip(&nu.weights) {
                total += wa * wb * metric.distance(a, b);
            }
        }
        return Ok(total);
    }
    let mut lp = LpBuilder::new();
    let mut var = vec![vec![0usize; m]; n];
    for (i, a) in mu.atoms.iter().enumerate() {
        for (j, b) in nu.atoms.iter().enumerate() {
            var[i][j] = lp.add_var(0.0, f64::INFINITY, metric.distance(a, b));
        }
    }
    for i in 0..n {
        lp.add_eq((0..m).map(|j| (var[i][j], 1.0)).collect(), mu.weights[i]);
    }
    // The last column constraint is implied by the others.
    for j in 0..m - 1 {
        lp.add_eq((0..n).map(|i| (var[i][j], 1.0)).collect(), nu.weights[j]);
    }
    let sol = solve_default(&lp.build())?;
    match sol.status {
        LpStatus::Optimal => Ok(sol.objective.max(0.0)),
        status => Err(DrmcoError::Unsupported(format!("transport LP ended with status {status:?}"))),
    }
}

/// Largest average L1 distance from one atom to all others:
/// `max_k Σ_{k'} w_{k'} ‖ξ_k − ξ_{k'}‖₁`, i.e. `max_k W(ν, δ_{ξ_k})`.
pub fn radius_hat(nu: &DiscreteMeasure) -> f64 {
    nu.atoms
        .iter()
        .map(|a| nu.atoms.iter().zip(&nu.weights).map(|(b, w)| w * Metric::L1.distance(a, b)).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Log-AR(1) process `ln ξ_t − μ_t = φ_t (ln ξ_{t−1} − μ_{t−1}) + ε_t`,
/// `ε_t ~ N(0, Σ_t)`, indexed by stage (`mu[0]` belongs to stage 1).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArLognormalModel {
    pub mu: Vec<Vec<f64>>,
    pub phi: Vec<Vec<f64>>,
    pub sigma: Vec<Vec<Vec<f64>>>,
    #[serde(default)]
    pub floor: f64,
}

/// `L` with `L Lᵀ = Σ`, from a symmetric eigendecomposition with tiny
/// negative eigenvalues clipped to zero.
pub fn covariance_factor(sigma: &[Vec<f64>]) -> Result<DMatrix<f64>> {
    let d = sigma.len();
    let m = DMatrix::from_fn(d, d, |i, j| 0.5 * (sigma[i][j] + sigma[j][i]));
    if d == 0 {
        return Ok(m);
    }
    let eig = SymmetricEigen::new(m);
    let min = eig.eigenvalues.iter().copied().fold(f64::INFINITY, f64::min);
    if min < -1e-10 {
        return Err(DrmcoError::NonPsdCovariance { min_eigenvalue: min });
    }
    let scale = DVector::from_iterator(d, eig.eigenvalues.iter().map(|v| v.max(0.0).sqrt()));
    Ok(&eig.eigenvectors * DMatrix::from_diagonal(&scale))
}

fn gaussian<R: Rng + ?Sized>(factor: &DMatrix<f64>, rng: &mut R) -> DVector<f64> {
    let d = factor.nrows();
    let z = DVector::from_iterator(d, (0..d).map(|_| rng.sample::<f64, _>(StandardNormal)));
    factor * z
}

impl ArLognormalModel {
    pub fn num_stages(&self) -> usize {
        self.mu.len()
    }

    pub fn check(&self) -> Result<()> {
        let t = self.mu.len();
        if self.phi.len() != t || self.sigma.len() != t {
            return Err(DrmcoError::InvalidInput("mu, phi and sigma need one entry per stage".into()));
        }
        for s in &self.sigma {
            covariance_factor(s)?;
        }
        Ok(())
    }

    /// Draws `ξ_t` (stage `t ≥ 2`) given `ξ_{t−1}`.
    pub fn simulate<R: Rng + ?Sized>(&self, t: usize, xi_prev: &[f64], rng: &mut R) -> Result<Vec<f64>> {
        let factor = covariance_factor(&self.sigma[t - 1])?;
        Ok(self.simulate_with_factor(t, xi_prev, &factor, rng))
    }

    pub(crate) fn simulate_with_factor<R: Rng + ?Sized>(&self, t: usize, xi_prev: &[f64], factor: &DMatrix<f64>, rng: &mut R) -> Vec<f64> {
        let (mu, mu_prev, phi) = (&self.mu[t - 1], &self.mu[t - 2], &self.phi[t - 1]);
        let eps = gaussian(factor, rng);
        (0..mu.len())
            .map(|i| {
                let log = mu[i] + phi[i] * (xi_prev[i].ln() - mu_prev[i]) + eps[i];
                log.exp().max(self.floor)
            })
            .collect()
    }
}

/// Outcome of [`fit_saa`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SaaFit {
    pub measure: DiscreteMeasure,
    pub log_mean: Vec<f64>,
    pub log_covariance: Vec<Vec<f64>>,
    /// Set when the log-covariance was singular and only its diagonal was used.
    pub diagonal_fallback: bool,
}

/// Fits a correlated lognormal to positive samples and draws `n_out` atoms.
pub fn fit_saa<R: Rng + ?Sized>(samples: &[Vec<f64>], n_out: usize, rng: &mut R) -> Result<SaaFit> {
    if samples.len() < 2 {
        return Err(DrmcoError::DegenerateSample("at least two samples are required".into()));
    }
    if n_out == 0 {
        return Err(DrmcoError::InvalidInput("n_out must be positive".into()));
    }
    let d = samples[0].len();
    if samples.iter().any(|s| s.len() != d || s.iter().any(|v| !(*v > 0.0))) {
        return Err(DrmcoError::DegenerateSample("samples must be strictly positive and equally sized".into()));
    }
    let n = samples.len() as f64;
    let logs: Vec<Vec<f64>> = samples.iter().map(|s| s.iter().map(|v| v.ln()).collect()).collect();
    let mut mean = vec![0.0; d];
    for l in &logs {
        for (m, v) in mean.iter_mut().zip(l) {
            *m += v;
        }
    }
    for m in mean.iter_mut() {
        *m /= n;
    }
    let mut cov = vec![vec![0.0; d]; d];
    for l in &logs {
        for i in 0..d {
            for j in 0..d {
                cov[i][j] += (l[i] - mean[i]) * (l[j] - mean[j]);
            }
        }
    }
    for row in cov.iter_mut() {
        for v in row.iter_mut() {
            *v /= n - 1.0;
        }
    }
    let matrix = DMatrix::from_fn(d, d, |i, j| cov[i][j]);
    let eig = SymmetricEigen::new(matrix);
    let max = eig.eigenvalues.iter().copied().fold(0.0_f64, f64::max);
    let min = eig.eigenvalues.iter().copied().fold(f64::INFINITY, f64::min);
    let singular = d > 0 && min <= 1e-12 * max.max(f64::MIN_POSITIVE);
    let used: Vec<Vec<f64>> = if singular {
        (0..d).map(|i| (0..d).map(|j| if i == j { cov[i][i] } else { 0.0 }).collect()).collect()
    } else {
        cov.clone()
    };
    let factor = covariance_factor(&used)?;
    let atoms = (0..n_out)
        .map(|_| {
            let eps = gaussian(&factor, rng);
            (0..d).map(|i| (mean[i] + eps[i]).exp()).collect()
        })
        .collect();
    Ok(SaaFit { measure: DiscreteMeasure::uniform(atoms), log_mean: mean, log_covariance: cov, diagonal_fallback: singular })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_round_trip() {
        let m = DiscreteMeasure::new(vec![vec![0.1, 2.0], vec![3.5, -1.0]], vec![0.25, 0.75]).unwrap();
        let mut buf = Vec::new();
        m.write_csv(&mut buf).unwrap();
        let back = DiscreteMeasure::read_csv(buf.as_slice()).unwrap();
        assert_eq!(m, back);
    }

    #[test]
    fn weights_must_sum_to_one() {
        assert!(DiscreteMeasure::new(vec![vec![0.0]], vec![0.9]).is_err());
    }

    #[test]
    fn linf_distance() {
        assert_eq!(Metric::Linf.distance(&[0.0, 3.0], &[1.0, 1.0]), 2.0);
        assert_eq!(Metric::L1.distance(&[0.0, 3.0], &[1.0, 1.0]), 3.0);
    }

    #[test]
    fn indefinite_covariance_is_rejected() {
        let err = covariance_factor(&[vec![1.0, 2.0], vec![2.0, 1.0]]).unwrap_err();
        assert!(matches!(err, DrmcoError::NonPsdCovariance { .. }));
    }
}
