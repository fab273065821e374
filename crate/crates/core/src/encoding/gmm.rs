//! Univariate Gaussian mixtures fitted by EM.
//!
//! The number of components is chosen by BIC over 1..=max_modes candidate
//! fits, each initialized deterministically at evenly spaced sample
//! quantiles. Components whose weight falls below [`PRUNE_WEIGHT`] are
//! dropped afterwards.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::util::derive_seed;

/// Components below this weight are pruned after fitting.
pub const PRUNE_WEIGHT: f64 = 0.005;
/// Mean log-likelihood improvement below which EM stops.
pub const EM_TOL: f64 = 1e-4;
/// Hard cap on EM iterations per candidate fit.
pub const EM_MAX_ITERS: usize = 100;
/// Columns longer than this are subsampled (seeded) before fitting.
pub const MAX_FIT_SAMPLES: usize = 10_000;

const LN_2PI: f64 = 1.837877066409345483560659472811;

/// Parameters of a pruned 1-D Gaussian mixture.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GmmParams {
    pub weights: Vec<f64>,
    pub means: Vec<f64>,
    pub stds: Vec<f64>,
}

impl GmmParams {
    /// Number of modes surviving the weight prune.
    pub fn active_modes(&self) -> usize {
        self.weights.len()
    }

    /// Index of the mode with the largest posterior probability for `x`.
    pub fn posterior_argmax(&self, x: f64) -> usize {
        let mut best = 0;
        let mut best_score = f64::NEG_INFINITY;
        for k in 0..self.weights.len() {
            let score = self.weights[k].ln() + log_pdf(x, self.means[k], self.stds[k]);
            if score > best_score {
                best_score = score;
                best = k;
            }
        }
        best
    }

    fn validate(&self) -> Result<()> {
        let sum: f64 = self.weights.iter().sum();
        if (sum - 1.0).abs() > 1e-9 {
            return Err(Error::NonFinite(format!(
                "mixture weights sum to {sum}, expected 1"
            )));
        }
        if self.stds.iter().any(|s| !s.is_finite() || *s <= 0.0) {
            return Err(Error::NonFinite("mixture std".into()));
        }
        Ok(())
    }
}

fn log_pdf(x: f64, mean: f64, std: f64) -> f64 {
    let z = (x - mean) / std;
    -0.5 * LN_2PI - std.ln() - 0.5 * z * z
}

/// Fits a 1-D Gaussian mixture with up to `max_modes` components.
pub fn em_fit_1d(samples: &[f64], max_modes: usize, seed: u64) -> Result<GmmParams> {
    em_fit_with_trace(samples, max_modes, seed).map(|(params, _)| params)
}

/// Like [`em_fit_1d`] but also returns the per-iteration mean log-likelihood
/// trace of the winning candidate fit.
pub fn em_fit_with_trace(
    samples: &[f64],
    max_modes: usize,
    seed: u64,
) -> Result<(GmmParams, Vec<f64>)> {
    if max_modes == 0 {
        return Err(Error::ShapeMismatch("max_modes must be at least 1".into()));
    }
    let mut data: Vec<f64> = samples.to_vec();
    if data.len() > MAX_FIT_SAMPLES {
        data = subsample(&data, MAX_FIT_SAMPLES, seed);
    }
    data.sort_by(|a, b| a.partial_cmp(b).expect("finite samples"));
    let n = data.len();
    if n < 2 || data[0] == data[n - 1] {
        return Err(Error::AllEqualSamples);
    }

    let mean = data.iter().sum::<f64>() / n as f64;
    let sample_std = (data.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n as f64).sqrt();
    let std_floor = 1e-4 * (sample_std + 1e-12);

    let distinct = count_distinct_sorted(&data);
    let k_max = max_modes.min(distinct);

    let mut best: Option<(f64, GmmParams, Vec<f64>)> = None;
    for k in 1..=k_max {
        let (params, trace) = em_single(&data, k, sample_std, std_floor);
        let ll_total = trace.last().copied().unwrap_or(f64::NEG_INFINITY) * n as f64;
        let n_params = (3 * k - 1) as f64;
        let bic = -2.0 * ll_total + n_params * (n as f64).ln();
        if best.as_ref().map_or(true, |(b, _, _)| bic < *b) {
            best = Some((bic, params, trace));
        }
    }
    let (_, mut params, trace) = best.expect("at least one candidate fit");

    prune(&mut params);
    params.validate()?;
    Ok((params, trace))
}

/// One EM run at a fixed component count. Returns the fitted parameters and
/// the mean log-likelihood after every iteration.
fn em_single(sorted: &[f64], k: usize, sample_std: f64, std_floor: f64) -> (GmmParams, Vec<f64>) {
    let n = sorted.len();
    // means at evenly spaced quantiles, shared spread, uniform weights
    let mut means: Vec<f64> = (0..k)
        .map(|i| {
            let q = (i as f64 + 0.5) / k as f64;
            sorted[((q * n as f64) as usize).min(n - 1)]
        })
        .collect();
    let mut stds = vec![sample_std.max(std_floor); k];
    let mut weights = vec![1.0 / k as f64; k];

    let mut trace = Vec::new();
    let mut resp = vec![0.0; n * k];
    let mut prev_ll = f64::NEG_INFINITY;

    for _ in 0..EM_MAX_ITERS {
        // E-step in log space
        let mut ll_sum = 0.0;
        for (i, &x) in sorted.iter().enumerate() {
            let row = &mut resp[i * k..(i + 1) * k];
            let mut max_score = f64::NEG_INFINITY;
            for j in 0..k {
                row[j] = weights[j].ln() + log_pdf(x, means[j], stds[j]);
                max_score = max_score.max(row[j]);
            }
            let mut total = 0.0;
            for r in row.iter_mut() {
                *r = (*r - max_score).exp();
                total += *r;
            }
            for r in row.iter_mut() {
                *r /= total;
            }
            ll_sum += max_score + total.ln();
        }
        let mean_ll = ll_sum / n as f64;
        trace.push(mean_ll);

        // M-step
        for j in 0..k {
            let mut nk = 0.0;
            let mut sum = 0.0;
            for (i, &x) in sorted.iter().enumerate() {
                nk += resp[i * k + j];
                sum += resp[i * k + j] * x;
            }
            if nk < 1e-12 {
                weights[j] = 0.0;
                continue;
            }
            let mu = sum / nk;
            let mut var = 0.0;
            for (i, &x) in sorted.iter().enumerate() {
                var += resp[i * k + j] * (x - mu) * (x - mu);
            }
            weights[j] = nk / n as f64;
            means[j] = mu;
            stds[j] = (var / nk).sqrt().max(std_floor);
        }

        if mean_ll - prev_ll < EM_TOL {
            break;
        }
        prev_ll = mean_ll;
    }

    (
        GmmParams {
            weights,
            means,
            stds,
        },
        trace,
    )
}

fn prune(params: &mut GmmParams) {
    let keep: Vec<usize> = (0..params.weights.len())
        .filter(|&j| params.weights[j] >= PRUNE_WEIGHT)
        .collect();
    // never prune everything: keep the heaviest component as a fallback
    let keep = if keep.is_empty() {
        let heaviest = params
            .weights
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.partial_cmp(b.1).expect("finite weight"))
            .map(|(j, _)| j)
            .unwrap_or(0);
        vec![heaviest]
    } else {
        keep
    };
    params.weights = keep.iter().map(|&j| params.weights[j]).collect();
    params.means = keep.iter().map(|&j| params.means[j]).collect();
    params.stds = keep.iter().map(|&j| params.stds[j]).collect();
    let total: f64 = params.weights.iter().sum();
    for w in &mut params.weights {
        *w /= total;
    }
}

fn count_distinct_sorted(sorted: &[f64]) -> usize {
    let mut count = 1;
    for w in sorted.windows(2) {
        if w[0] != w[1] {
            count += 1;
        }
    }
    count
}

fn subsample(data: &[f64], n: usize, seed: u64) -> Vec<f64> {
    use rand::seq::SliceRandom;
    use rand::SeedableRng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(derive_seed(seed, 0x6d6d));
    let mut idx: Vec<usize> = (0..data.len()).collect();
    idx.shuffle(&mut rng);
    idx.truncate(n);
    idx.into_iter().map(|i| data[i]).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, Normal};

    fn gaussian_samples(mean: f64, std: f64, n: usize, seed: u64) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let dist = Normal::new(mean, std).unwrap();
        (0..n).map(|_| dist.sample(&mut rng)).collect()
    }

    #[test]
    fn two_well_separated_modes_recovered() {
        let mut samples = gaussian_samples(-5.0, 1.0, 10_000, 1);
        samples.extend(gaussian_samples(5.0, 1.0, 10_000, 2));
        let params = em_fit_1d(&samples, 3, 7).unwrap();
        assert_eq!(params.active_modes(), 2);
        let mut means = params.means.clone();
        means.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert!((means[0] + 5.0).abs() < 0.3, "low mode at {}", means[0]);
        assert!((means[1] - 5.0).abs() < 0.3, "high mode at {}", means[1]);
    }

    #[test]
    fn single_gaussian_collapses_to_one_mode() {
        let samples = gaussian_samples(2.0, 0.5, 10_000, 3);
        let params = em_fit_1d(&samples, 10, 7).unwrap();
        assert_eq!(params.active_modes(), 1);
        assert!((params.means[0] - 2.0).abs() < 0.05);
        assert!((params.stds[0] - 0.5).abs() < 0.05);
    }

    #[test]
    fn log_likelihood_non_decreasing() {
        let mut samples = gaussian_samples(0.0, 1.0, 2_000, 4);
        samples.extend(gaussian_samples(6.0, 2.0, 2_000, 5));
        let (_, trace) = em_fit_with_trace(&samples, 4, 0).unwrap();
        for w in trace.windows(2) {
            assert!(
                w[1] >= w[0] - 1e-9,
                "log-likelihood decreased: {} -> {}",
                w[0],
                w[1]
            );
        }
    }

    #[test]
    fn all_equal_samples_rejected() {
        let samples = vec![3.0; 100];
        assert!(matches!(
            em_fit_1d(&samples, 5, 0),
            Err(Error::AllEqualSamples)
        ));
    }

    #[test]
    fn weights_sum_to_one_and_stds_positive() {
        let samples = gaussian_samples(1.0, 2.0, 5_000, 8);
        let params = em_fit_1d(&samples, 6, 1).unwrap();
        let sum: f64 = params.weights.iter().sum();
        assert!((sum - 1.0).abs() < 1e-9);
        assert!(params.stds.iter().all(|&s| s > 0.0));
    }

    #[test]
    fn posterior_argmax_picks_nearest_heavy_mode() {
        let params = GmmParams {
            weights: vec![0.5, 0.5],
            means: vec![-5.0, 5.0],
            stds: vec![1.0, 1.0],
        };
        assert_eq!(params.posterior_argmax(-4.0), 0);
        assert_eq!(params.posterior_argmax(4.0), 1);
    }

    #[test]
    fn deterministic_for_fixed_seed() {
        let samples = gaussian_samples(0.0, 1.0, 30_000, 9);
        let a = em_fit_1d(&samples, 5, 42).unwrap();
        let b = em_fit_1d(&samples, 5, 42).unwrap();
        assert_eq!(a, b);
    }
}
