use std::io::Write;
use std::time::Instant;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::{inject_noise, Benchmark, NoiseSpec};
use crate::error::{Error, Result};
use crate::marginals::{fit_kde, KdeMarginal};
use crate::metrics::{kde_kl_divergence, mae, rel_moment_errors, rmae, ErrorReport};
use crate::pce::{fit, resample_statistics_in, FitConfig, InputDomain, Sampler};

#[derive(Debug, Clone)]
pub enum ModelFactory {
    Pce(FitConfig),
    /// Predicts with the true model; a sanity baseline.
    Oracle,
}

impl ModelFactory {
    pub fn label(&self) -> &'static str {
        match self {
            ModelFactory::Pce(c) => c.mode.name(),
            ModelFactory::Oracle => "oracle",
        }
    }
}

/// Large-sample statistics of the true output.
#[derive(Debug, Clone)]
pub struct Reference {
    pub mean: f64,
    pub std: f64,
    pub pdf: KdeMarginal,
}

pub fn reference_statistics(bench: &dyn Benchmark, n: usize, seed: u64) -> Result<Reference> {
    let data = bench.sample(n, seed);
    let m = data.y.len() as f64;
    let mean = data.y.iter().sum::<f64>() / m;
    let std = (data.y.iter().map(|y| (y - mean).powi(2)).sum::<f64>() / (m - 1.0)).sqrt();
    Ok(Reference { mean, std, pdf: fit_kde(&data.y)? })
}

#[derive(Debug, Clone)]
pub struct ValidationConfig {
    pub n_train: Vec<usize>,
    pub n_val: usize,
    pub reps: usize,
    /// Noise added to training outputs, as an absolute σ_ε.
    pub noise_sigma: Option<f64>,
    pub seed: u64,
    /// Resampling size for moment and KL errors; needs `reference`.
    pub n_resample: usize,
    pub reference: Option<Reference>,
}

impl Default for ValidationConfig {
    fn default() -> Self {
        Self {
            n_train: vec![10, 20, 50, 100, 200, 500, 1000],
            n_val: 10_000,
            reps: 10,
            noise_sigma: None,
            seed: 0,
            n_resample: 100_000,
            reference: None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Cell {
    pub n_train: usize,
    pub rep: usize,
    pub report: ErrorReport,
    pub wall_seconds: f64,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Aggregate {
    pub n_train: usize,
    pub mean_rmae: f64,
    pub min_rmae: f64,
    pub max_rmae: f64,
    pub n_failed: usize,
}

#[derive(Debug, Clone)]
pub struct ValidationResult {
    pub benchmark: String,
    pub model: String,
    pub cells: Vec<Cell>,
    pub aggregates: Vec<Aggregate>,
}

/// SplitMix64 of (base, stream, index), so every cell gets its own seeds.
pub fn derive_seed(base: u64, stream: u64, index: u64) -> u64 {
    let mut z = base ^ stream.wrapping_mul(0x9E37_79B9_7F4A_7C15) ^ index.wrapping_mul(0xD1B5_4A32_D192_ED03);
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn run_cell(bench: &dyn Benchmark, factory: &ModelFactory, cfg: &ValidationConfig, n_train: usize, idx: u64) -> Result<ErrorReport> {
    let train = bench.sample(n_train, derive_seed(cfg.seed, 1, idx));
    let val = bench.sample(cfg.n_val, derive_seed(cfg.seed, 2, idx));
    let y_train = match cfg.noise_sigma {
        Some(s) => inject_noise(&train.y, NoiseSpec { sigma_eps: s, seed: derive_seed(cfg.seed, 3, idx) })?,
        None => train.y.clone(),
    };
    let mut report = ErrorReport::default();
    match factory {
        ModelFactory::Oracle => {
            let pred: Vec<f64> = val.x.iter().map(|x| bench.eval(x)).collect();
            report.mae = Some(mae(&pred, &val.y)?);
            report.rmae = Some(rmae(&pred, &val.y)?);
        }
        ModelFactory::Pce(fc) => {
            let mut fc = fc.clone();
            fc.seed = derive_seed(cfg.seed, 4, idx);
            let want_stats = cfg.reference.is_some();
            fc.fit_copula = want_stats;
            let model = fit(&train.x, &y_train, &fc)?;
            let pred = model.predict_batch(&val.x)?;
            report.mae = Some(mae(&pred, &val.y)?);
            report.rmae = Some(rmae(&pred, &val.y)?);
            if let Some(r) = &cfg.reference {
                let st = resample_statistics_in(&model, cfg.n_resample, Sampler::Sobol, fc.seed, InputDomain::TrainingHull)?;
                let (em, es) = rel_moment_errors(st.mean, st.std, r.mean, r.std)?;
                report.rel_mean_err = Some(em);
                report.rel_std_err = Some(es);
                if st.std > 0.0 {
                    report.kl_div = Some(kde_kl_divergence(&st.pdf_estimate, &r.pdf)?);
                }
            }
        }
    }
    Ok(report)
}

/// Fresh training and validation draws for every (n_train, repetition) cell.
/// Failed cells are recorded, not fatal.
pub fn run_validation(bench: &dyn Benchmark, factory: &ModelFactory, cfg: &ValidationConfig) -> Result<ValidationResult> {
    if cfg.reps == 0 || cfg.n_train.is_empty() {
        return Err(Error::InvalidInput("need at least one training size and repetition".into()));
    }
    let jobs: Vec<(usize, usize)> = cfg.n_train.iter().flat_map(|&n| (0..cfg.reps).map(move |r| (n, r))).collect();
    let cells: Vec<Cell> = jobs
        .par_iter()
        .enumerate()
        .map(|(idx, &(n_train, rep))| {
            let t0 = Instant::now();
            let out = run_cell(bench, factory, cfg, n_train, idx as u64);
            let wall_seconds = t0.elapsed().as_secs_f64();
            match out {
                Ok(report) => Cell { n_train, rep, report, wall_seconds, error: None },
                Err(e) => Cell { n_train, rep, report: ErrorReport::default(), wall_seconds, error: Some(e.to_string()) },
            }
        })
        .collect();
    let aggregates = cfg
        .n_train
        .iter()
        .map(|&n| {
            let vals: Vec<f64> = cells.iter().filter(|c| c.n_train == n).filter_map(|c| c.report.rmae).collect();
            let n_failed = cells.iter().filter(|c| c.n_train == n && c.error.is_some()).count();
            let mean = if vals.is_empty() { f64::NAN } else { vals.iter().sum::<f64>() / vals.len() as f64 };
            Aggregate {
                n_train: n,
                mean_rmae: mean,
                min_rmae: vals.iter().copied().fold(f64::NAN, f64::min),
                max_rmae: vals.iter().copied().fold(f64::NAN, f64::max),
                n_failed,
            }
        })
        .collect();
    Ok(ValidationResult { benchmark: bench.name().to_string(), model: factory.label().to_string(), cells, aggregates })
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| format!("{x:e}")).unwrap_or_default()
}

/// One row per cell: benchmark, mode, n_train, rep, rmae, mean_err, std_err, kl, wall_seconds.
pub fn write_results_csv<W: Write>(out: W, result: &ValidationResult) -> Result<()> {
    let io = |e: csv::Error| Error::InvalidInput(format!("CSV output: {e}"));
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["benchmark", "mode", "n_train", "rep", "rmae", "mean_err", "std_err", "kl", "wall_seconds"]).map_err(io)?;
    for c in &result.cells {
        w.write_record([
            result.benchmark.clone(),
            result.model.clone(),
            c.n_train.to_string(),
            c.rep.to_string(),
            opt(c.report.rmae),
            opt(c.report.rel_mean_err),
            opt(c.report.rel_std_err),
            opt(c.report.kl_div),
            format!("{:.3}", c.wall_seconds),
        ])
        .map_err(io)?;
    }
    w.flush().map_err(|e| Error::InvalidInput(format!("CSV output: {e}")))?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct CvSummary {
    /// (MAE, rMAE) per held-out fold, in run order.
    pub folds: Vec<(f64, f64)>,
    pub mae_mean: f64,
    pub mae_std: f64,
    pub rmae_mean: f64,
    pub rmae_std: f64,
}

fn mean_std(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let m = v.iter().sum::<f64>() / n;
    let s = if v.len() > 1 { (v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0)).sqrt() } else { 0.0 };
    (m, s)
}

/// r repetitions of randomised k-fold cross-validation.
pub fn cross_validate(x: &[Vec<f64>], y: &[f64], config: &FitConfig, k: usize, r: usize, seed: u64) -> Result<CvSummary> {
    if x.len() != y.len() {
        return Err(Error::LengthMismatch(x.len(), y.len()));
    }
    if k < 2 || r == 0 || x.len() < k {
        return Err(Error::InvalidInput(format!("cannot run {r} x {k}-fold CV on {} rows", x.len())));
    }
    let mut folds = Vec::with_capacity(k * r);
    for rep in 0..r {
        let mut idx: Vec<usize> = (0..x.len()).collect();
        idx.shuffle(&mut ChaCha8Rng::seed_from_u64(derive_seed(seed, 5, rep as u64)));
        for f in 0..k {
            let test: Vec<usize> = idx.iter().copied().skip(f).step_by(k).collect();
            let train: Vec<usize> = idx.iter().enumerate().filter(|(i, _)| i % k != f).map(|(_, &j)| j).collect();
            let xt: Vec<Vec<f64>> = train.iter().map(|&i| x[i].clone()).collect();
            let yt: Vec<f64> = train.iter().map(|&i| y[i]).collect();
            let model = fit(&xt, &yt, config)?;
            let xv: Vec<Vec<f64>> = test.iter().map(|&i| x[i].clone()).collect();
            let yv: Vec<f64> = test.iter().map(|&i| y[i]).collect();
            let pred = model.predict_batch(&xv)?;
            folds.push((mae(&pred, &yv)?, rmae(&pred, &yv)?));
        }
    }
    let (mae_mean, mae_std) = mean_std(&folds.iter().map(|f| f.0).collect::<Vec<_>>());
    let (rmae_mean, rmae_std) = mean_std(&folds.iter().map(|f| f.1).collect::<Vec<_>>());
    Ok(CvSummary { folds, mae_mean, mae_std, rmae_mean, rmae_std })
}
