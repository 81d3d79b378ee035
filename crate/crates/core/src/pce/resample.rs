use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::sobol::{sobol_points, SOBOL_MAX_DIM};
use super::{Mode, PceModel};
use crate::error::{Error, Result};
use crate::marginals::{fit_kde, KdeMarginal};

pub const MIN_RESAMPLE: usize = 10_000;
const CHUNK: usize = 8192;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sampler {
    Sobol,
    PseudoRandom,
}

/// Where X-space inputs are drawn from during resampling.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InputDomain {
    /// The fitted marginals as they are, tails included.
    #[default]
    Fitted,
    /// The fitted marginals truncated to the training bounding box, so the
    /// expansion is never evaluated where it was not trained.
    TrainingHull,
}

#[derive(Debug, Clone)]
pub struct StatisticsReport {
    pub mean: f64,
    pub std: f64,
    /// KDE of the resampled outputs.
    pub pdf_estimate: KdeMarginal,
    pub n_resample: usize,
    /// The sampler actually used; Sobol falls back to pseudo-random above 10 dimensions.
    pub sampler: Sampler,
}

fn uniforms(d: usize, n: usize, sampler: Sampler, seed: u64) -> Result<(Vec<Vec<f64>>, Sampler)> {
    if sampler == Sampler::Sobol && d <= SOBOL_MAX_DIM {
        return Ok((sobol_points(d, n)?, Sampler::Sobol));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pts = (0..n).map(|_| (0..d).map(|_| rng.random::<f64>()).collect()).collect();
    Ok((pts, Sampler::PseudoRandom))
}

/// Output statistics by pushing `n` uniform points through the input model
/// (inverse Rosenblatt, then inverse PIT) and the expansion.
pub fn resample_statistics(m: &PceModel, n: usize, sampler: Sampler, seed: u64) -> Result<StatisticsReport> {
    resample_statistics_in(m, n, sampler, seed, InputDomain::Fitted)
}

/// As [`resample_statistics`], with a choice of input domain. Ignored for
/// lPCEonZ, which samples Z directly.
pub fn resample_statistics_in(m: &PceModel, n: usize, sampler: Sampler, seed: u64, domain: InputDomain) -> Result<StatisticsReport> {
    if n < MIN_RESAMPLE {
        return Err(Error::InvalidInput(format!("n_resample must be at least {MIN_RESAMPLE}, got {n}")));
    }
    let d = m.dim();
    if m.mode == Mode::LPceOnZ && d >= 2 && m.copula.is_none() {
        return Err(Error::MissingCopula);
    }
    let (w, used) = uniforms(d, n, sampler, seed)?;
    let band: Vec<(f64, f64)> = if domain == InputDomain::TrainingHull && m.metadata.hull.len() == d {
        m.marginals.iter().zip(&m.metadata.hull).map(|(mg, [lo, hi])| (mg.cdf(*lo), mg.cdf(*hi))).collect()
    } else {
        vec![(0.0, 1.0); d]
    };
    let chunks: Vec<Result<Vec<f64>>> = w
        .par_chunks(CHUNK)
        .map(|chunk| {
            let mut tab = Vec::new();
            chunk
                .iter()
                .map(|wi| {
                    if m.mode == Mode::LPceOnZ {
                        // The expansion is a function of the independent Z directly.
                        return Ok(m.eval_basis_space(wi, &mut tab));
                    }
                    let u = match &m.copula {
                        Some(c) => c.inverse_rosenblatt(wi)?,
                        None => wi.clone(),
                    };
                    let x: Vec<f64> = m
                        .marginals
                        .iter()
                        .zip(&u)
                        .zip(&band)
                        .map(|((mg, &ui), &(a, b))| mg.quantile_fast(a + ui * (b - a)))
                        .collect();
                    Ok(m.eval_basis_space(&x, &mut tab))
                })
                .collect()
        })
        .collect();
    let mut ys = Vec::with_capacity(n);
    for c in chunks {
        ys.extend(c?);
    }
    summarize(ys, used)
}

fn summarize(ys: Vec<f64>, sampler: Sampler) -> Result<StatisticsReport> {
    let n = ys.len();
    let mean = ys.iter().sum::<f64>() / n as f64;
    let var = ys.iter().map(|y| (y - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    let std = var.sqrt();
    let pdf_estimate = if ys.iter().any(|&y| y != ys[0]) {
        fit_kde(&ys)?
    } else {
        // A constant output: keep a spike so the report still carries a density.
        KdeMarginal::with_bandwidth(ys, 1e-12 * mean.abs().max(1.0))?
    };
    Ok(StatisticsReport { mean, std, pdf_estimate, n_resample: n, sampler })
}
