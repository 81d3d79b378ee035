//! Synthetic benchmark systems and the training-size validation protocol.

mod ishigami;
mod truss;
mod validation;

pub use ishigami::{ishigami_eval, ishigami_raw, ishigami_sampler, ishigami_vine, Ishigami};
pub use truss::{
    gumbel_params, gumbel_quantile, load_vine, lognormal_quantile, truss_sampler, truss_solve, truss_solve_spec, BarGroup,
    Truss, TrussSpec, MID_NODE, N_BARS,
};
pub use validation::{
    cross_validate, derive_seed, reference_statistics, run_validation, write_results_csv, Aggregate, Cell, CvSummary,
    ModelFactory, Reference, ValidationConfig, ValidationResult,
};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub x: Vec<Vec<f64>>,
    pub y: Vec<f64>,
}

pub trait Benchmark: Sync {
    fn name(&self) -> &'static str;
    fn dim(&self) -> usize;
    fn eval(&self, x: &[f64]) -> f64;
    fn sample_inputs(&self, n: usize, seed: u64) -> Vec<Vec<f64>>;

    fn sample(&self, n: usize, seed: u64) -> Dataset {
        let x = self.sample_inputs(n, seed);
        let y = x.iter().map(|xi| self.eval(xi)).collect();
        Dataset { x, y }
    }
}

pub fn benchmark_by_name(name: &str) -> Option<Box<dyn Benchmark>> {
    match name.to_ascii_lowercase().as_str() {
        "ishigami" => Some(Box::new(Ishigami::new())),
        "truss" => Some(Box::new(Truss::new())),
        _ => None,
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseSpec {
    pub sigma_eps: f64,
    pub seed: u64,
}

/// y_j + ε_j with independent ε_j ~ N(0, σ²).
pub fn inject_noise(y: &[f64], spec: NoiseSpec) -> Result<Vec<f64>> {
    if !(spec.sigma_eps >= 0.0 && spec.sigma_eps.is_finite()) {
        return Err(Error::InvalidInput(format!("noise sigma {}", spec.sigma_eps)));
    }
    if spec.sigma_eps == 0.0 {
        return Ok(y.to_vec());
    }
    let normal = Normal::new(0.0, spec.sigma_eps).map_err(|e| Error::InvalidInput(e.to_string()))?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    Ok(y.iter().map(|v| v + normal.sample(&mut rng)).collect())
}
