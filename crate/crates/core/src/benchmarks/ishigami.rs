use std::f64::consts::PI;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{Benchmark, Dataset};
use crate::copula::{CvineModel, Family, PairCopula, Rotation};

const A: f64 = 7.0;
const B: f64 = 0.1;

/// sin x1 + 7 sin² x2 + 0.1 x3⁴ sin x1.
pub fn ishigami_raw(x: &[f64]) -> f64 {
    x[0].sin() + A * x[1].sin().powi(2) + B * x[2].powi(4) * x[0].sin()
}

/// Ishigami rescaled to [1, 2] on [−π, π]³.
pub fn ishigami_eval(x: &[f64]) -> f64 {
    let pi4 = PI.powi(4);
    1.0 + (ishigami_raw(x) + 1.0 + pi4 / 10.0) / (9.0 + pi4 / 5.0)
}

/// Gumbel(2) between X1 and X2, Student-t(ρ = 0.5, ν = 3) between X1 and X3,
/// X2 and X3 conditionally independent given X1.
pub fn ishigami_vine() -> CvineModel {
    let g = PairCopula::new(Family::Gumbel, Rotation::R0, vec![2.0]).expect("valid Gumbel");
    let t = PairCopula::new(Family::StudentT, Rotation::R0, vec![0.5, 3.0]).expect("valid t");
    CvineModel::new(vec![0, 1, 2], vec![vec![g, t], vec![PairCopula::independence()]]).expect("valid vine")
}

pub fn ishigami_sampler(n: usize, seed: u64) -> Dataset {
    Ishigami::new().sample(n, seed)
}

#[derive(Debug, Clone)]
pub struct Ishigami {
    vine: CvineModel,
}

impl Ishigami {
    pub fn new() -> Self {
        Self { vine: ishigami_vine() }
    }
}

impl Default for Ishigami {
    fn default() -> Self {
        Self::new()
    }
}

impl Benchmark for Ishigami {
    fn name(&self) -> &'static str {
        "ishigami"
    }

    fn dim(&self) -> usize {
        3
    }

    fn eval(&self, x: &[f64]) -> f64 {
        ishigami_eval(x)
    }

    fn sample_inputs(&self, n: usize, seed: u64) -> Vec<Vec<f64>> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let u = self.vine.sample(n, &mut rng).expect("closed-form inverse h for the Ishigami vine");
        u.into_iter().map(|r| r.into_iter().map(|ui| -PI + 2.0 * PI * ui).collect()).collect()
    }
}
