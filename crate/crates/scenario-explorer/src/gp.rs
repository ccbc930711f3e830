//! Gaussian-process surrogate on random cosine features.
//!
//! Instead of an N×N kernel solve, the squared-exponential GP is
//! approximated by Bayesian linear regression on M random Fourier features
//! `phi(x) = sqrt(2 sigma_f^2 / M) * cos(W x + b)`, with `W` drawn from the
//! kernel's spectral density and `b` uniform on `[0, 2pi)`. Fitting and
//! posterior sampling go through the n×n dual system
//! `K = Phi Phi^T + sigma_n^2 I` (n = number of observations), so the cost
//! stays linear in the feature count: posterior weight draws use Matheron's
//! rule `w = eps + Phi^T K^{-1} (y - Phi eps - delta)` with prior draws
//! `eps ~ N(0, I)` and noise draws `delta ~ N(0, sigma_n^2 I)`.
//!
//! Hyperparameters are selected by exact log marginal likelihood of the same
//! linear model over a small logarithmic candidate set.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Noise variance used for the one retry after a degenerate factorization.
pub const NOISE_FLOOR: f64 = 1e-4;

/// Squared-exponential kernel hyperparameters plus the feature count.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelConfig {
    /// Length scale per normalized input dimension.
    pub length_scales: Vec<f64>,
    /// Signal variance sigma_f^2.
    pub signal_variance: f64,
    /// Observation noise variance sigma_n^2.
    pub noise_variance: f64,
    /// Number of random cosine features M.
    pub feature_count: usize,
}

impl KernelConfig {
    pub fn isotropic(dims: usize, length_scale: f64) -> Self {
        KernelConfig {
            length_scales: vec![length_scale; dims],
            signal_variance: 1.0,
            noise_variance: 1e-2,
            feature_count: 1000,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = !self.length_scales.is_empty()
            && self.length_scales.iter().all(|&l| l > 0.0)
            && self.signal_variance > 0.0
            && self.noise_variance > 0.0
            && self.feature_count >= 1;
        if !ok {
            return Err(Error::Config("invalid kernel configuration".into()));
        }
        Ok(())
    }

    /// Exact squared-exponential kernel value; reference for the feature
    /// approximation.
    pub fn exact_kernel(&self, x: &[f64], y: &[f64]) -> f64 {
        let r2: f64 = x
            .iter()
            .zip(y)
            .zip(&self.length_scales)
            .map(|((a, b), l)| ((a - b) / l).powi(2))
            .sum();
        self.signal_variance * (-0.5 * r2).exp()
    }
}

/// One evaluated grid point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Observation {
    /// Lattice index the value was observed at.
    pub index: Vec<usize>,
    /// Normalized coordinates in the unit cube.
    pub x: Vec<f64>,
    /// Objective value (finite; sentinel caps participate as ordinary data).
    pub y: f64,
}

/// Random cosine feature map of a squared-exponential kernel.
#[derive(Debug, Clone)]
pub struct FeatureMap {
    frequencies: DMatrix<f64>,
    phases: DVector<f64>,
    amplitude: f64,
}

impl FeatureMap {
    pub fn feature_count(&self) -> usize {
        self.frequencies.nrows()
    }

    pub fn dims(&self) -> usize {
        self.frequencies.ncols()
    }

    /// `phi(x)`; satisfies `|phi(x)|^2 <= 2 sigma_f^2`.
    pub fn features(&self, x: &[f64]) -> DVector<f64> {
        debug_assert_eq!(x.len(), self.dims());
        let m = self.feature_count();
        DVector::from_fn(m, |i, _| {
            let mut arg = self.phases[i];
            for (j, &xj) in x.iter().enumerate() {
                arg += self.frequencies[(i, j)] * xj;
            }
            self.amplitude * arg.cos()
        })
    }

    /// `phi(x) . weights` without materializing the feature vector; the
    /// allocation-free path for scoring large candidate sets.
    pub fn score(&self, x: &[f64], weights: &DVector<f64>) -> f64 {
        debug_assert_eq!(x.len(), self.dims());
        let mut acc = 0.0;
        for i in 0..self.feature_count() {
            let mut arg = self.phases[i];
            for (j, &xj) in x.iter().enumerate() {
                arg += self.frequencies[(i, j)] * xj;
            }
            acc += arg.cos() * weights[i];
        }
        acc * self.amplitude
    }
}

/// Draw a feature map from the kernel's spectral density; deterministic per
/// seed.
pub fn sample_feature_map(cfg: &KernelConfig, seed: u64) -> FeatureMap {
    let d = cfg.length_scales.len();
    let m = cfg.feature_count;
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut frequencies = DMatrix::zeros(m, d);
    for i in 0..m {
        for j in 0..d {
            let z: f64 = rng.sample(StandardNormal);
            frequencies[(i, j)] = z / cfg.length_scales[j];
        }
    }
    let phases = DVector::from_fn(m, |_, _| rng.random_range(0.0..std::f64::consts::TAU));
    FeatureMap {
        frequencies,
        phases,
        amplitude: (2.0 * cfg.signal_variance / m as f64).sqrt(),
    }
}

/// Fitted surrogate: posterior over the feature weights, held in dual form.
#[derive(Debug, Clone)]
pub struct GpPosterior {
    map: FeatureMap,
    /// Posterior weight mean, M-dimensional.
    weight_mean: DVector<f64>,
    /// Feature matrix of the training points, n×M.
    phi: DMatrix<f64>,
    /// Cholesky factor of `Phi Phi^T + sigma_n^2 I`.
    chol: Cholesky<f64, Dyn>,
    /// Standardized training targets.
    y_std: DVector<f64>,
    noise_std: f64,
    y_mean: f64,
    y_scale: f64,
}

impl GpPosterior {
    /// Predictive mean and (function-space) variance at `x`, in original
    /// units.
    pub fn predict(&self, x: &[f64]) -> (f64, f64) {
        let phi = self.map.features(x);
        let mean_std = phi.dot(&self.weight_mean);
        let cross = &self.phi * &phi;
        let solved = self.chol.solve(&cross);
        let var_std = (phi.dot(&phi) - cross.dot(&solved)).max(0.0);
        (
            mean_std * self.y_scale + self.y_mean,
            var_std * self.y_scale * self.y_scale,
        )
    }

    /// One posterior weight draw via Matheron's rule.
    pub fn sample_weights(&self, rng: &mut ChaCha12Rng) -> DVector<f64> {
        let m = self.map.feature_count();
        let n = self.phi.nrows();
        let eps = DVector::from_fn(m, |_, _| rng.sample::<f64, _>(StandardNormal));
        let delta = DVector::from_fn(n, |_, _| {
            self.noise_std * rng.sample::<f64, _>(StandardNormal)
        });
        let residual = &self.y_std - &self.phi * &eps - delta;
        let solved = self.chol.solve(&residual);
        eps + self.phi.transpose() * solved
    }

    /// Value of a sampled weight function at `x`, in original units.
    pub fn sampled_value(&self, x: &[f64], weights: &DVector<f64>) -> f64 {
        self.map.score(x, weights) * self.y_scale + self.y_mean
    }
}

fn standardize(ys: &[f64]) -> (DVector<f64>, f64, f64) {
    let n = ys.len() as f64;
    let mean = ys.iter().sum::<f64>() / n;
    let var = ys.iter().map(|y| (y - mean).powi(2)).sum::<f64>() / n;
    let scale = if var.sqrt() < 1e-12 { 1.0 } else { var.sqrt() };
    (
        DVector::from_iterator(ys.len(), ys.iter().map(|y| (y - mean) / scale)),
        mean,
        scale,
    )
}

fn feature_matrix(map: &FeatureMap, observations: &[Observation]) -> DMatrix<f64> {
    let n = observations.len();
    let m = map.feature_count();
    let mut phi = DMatrix::zeros(n, m);
    for (i, obs) in observations.iter().enumerate() {
        phi.row_mut(i).copy_from(&map.features(&obs.x).transpose());
    }
    phi
}

fn dual_cholesky(phi: &DMatrix<f64>, noise_variance: f64) -> Option<Cholesky<f64, Dyn>> {
    let n = phi.nrows();
    let mut k = phi * phi.transpose();
    for i in 0..n {
        k[(i, i)] += noise_variance;
    }
    Cholesky::new(k)
}

/// Fit the feature-space Bayesian linear model (unit weight prior, noise
/// `sigma_n^2`). A degenerate factorization is retried once at an inflated
/// noise level before reporting failure.
pub fn fit(observations: &[Observation], cfg: &KernelConfig, seed: u64) -> Result<GpPosterior> {
    cfg.validate()?;
    if observations.is_empty() {
        return Err(Error::FitFailure("no observations".into()));
    }
    let map = sample_feature_map(cfg, seed);
    let phi = feature_matrix(&map, observations);
    let ys: Vec<f64> = observations.iter().map(|o| o.y).collect();
    if ys.iter().any(|y| !y.is_finite()) {
        return Err(Error::FitFailure("non-finite observation".into()));
    }
    let (y_std, y_mean, y_scale) = standardize(&ys);

    let mut noise = cfg.noise_variance;
    let chol = match dual_cholesky(&phi, noise) {
        Some(c) => c,
        None => {
            noise = NOISE_FLOOR.max(cfg.noise_variance * 100.0);
            dual_cholesky(&phi, noise).ok_or_else(|| {
                Error::FitFailure(format!(
                    "dual system not positive definite even at noise {noise:.1e}"
                ))
            })?
        }
    };
    let weight_mean = phi.transpose() * chol.solve(&y_std);
    Ok(GpPosterior {
        map,
        weight_mean,
        phi,
        chol,
        y_std,
        noise_std: noise.sqrt(),
        y_mean,
        y_scale,
    })
}

/// Exact Gaussian log evidence of the feature-space linear model on
/// standardized targets.
pub fn log_marginal_likelihood(
    observations: &[Observation],
    cfg: &KernelConfig,
    seed: u64,
) -> Result<f64> {
    cfg.validate()?;
    if observations.len() < 2 {
        return Err(Error::Config(
            "log marginal likelihood needs at least 2 observations".into(),
        ));
    }
    let map = sample_feature_map(cfg, seed);
    let phi = feature_matrix(&map, observations);
    let ys: Vec<f64> = observations.iter().map(|o| o.y).collect();
    let (y_std, _, _) = standardize(&ys);
    let chol = dual_cholesky(&phi, cfg.noise_variance)
        .ok_or_else(|| Error::FitFailure("dual system not positive definite".into()))?;
    let alpha = chol.solve(&y_std);
    let log_det: f64 = (0..observations.len())
        .map(|i| chol.l_dirty()[(i, i)].ln())
        .sum::<f64>()
        * 2.0;
    let n = observations.len() as f64;
    Ok(-0.5 * y_std.dot(&alpha) - 0.5 * log_det - 0.5 * n * (2.0 * std::f64::consts::PI).ln())
}

/// Candidate set for hyperparameter selection.
#[derive(Debug, Clone)]
pub struct TuneGrid {
    pub length_scales: Vec<f64>,
    pub noise_variances: Vec<f64>,
}

impl Default for TuneGrid {
    fn default() -> Self {
        TuneGrid {
            length_scales: vec![0.05, 0.1, 0.2, 0.4, 0.8],
            noise_variances: vec![1e-4, 1e-2],
        }
    }
}

/// Pick the isotropic candidate with the highest evidence; ties break toward
/// the larger length scale.
pub fn tune(
    observations: &[Observation],
    candidates: &TuneGrid,
    base: &KernelConfig,
    seed: u64,
) -> Result<KernelConfig> {
    if candidates.length_scales.is_empty() || candidates.noise_variances.is_empty() {
        return Err(Error::Config("empty hyperparameter candidate set".into()));
    }
    let dims = base.length_scales.len();
    let mut best: Option<(f64, f64, KernelConfig)> = None;
    for &ell in &candidates.length_scales {
        for &noise in &candidates.noise_variances {
            let cfg = KernelConfig {
                length_scales: vec![ell; dims],
                signal_variance: base.signal_variance,
                noise_variance: noise,
                feature_count: base.feature_count,
            };
            let ml = log_marginal_likelihood(observations, &cfg, seed)?;
            let better = match &best {
                None => true,
                Some((best_ml, best_ell, _)) => {
                    ml > *best_ml || (ml == *best_ml && ell > *best_ell)
                }
            };
            if better {
                best = Some((ml, ell, cfg));
            }
        }
    }
    Ok(best.expect("non-empty candidate set").2)
}
