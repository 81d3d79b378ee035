//! PCE metamodels fitted from data: the three input strategies, prediction,
//! coefficient moments and resampling-based output statistics.

mod persist;
mod resample;
mod sobol;

use nalgebra::DVector;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::basis::{design_matrix, eval_expansion, MultiIndexSet};
use crate::copula::{fit_cvine, CvineModel};
use crate::error::{Error, Result};
use crate::marginals::{fit_kde, pit, Marginal};
use crate::orthopoly::{legendre_basis, stieltjes_basis, OrthonormalBasis1D};
use crate::regression::{default_r_max, select_hyperparams, Candidate, DEFAULT_P_MAX};

pub use persist::{BasisDto, CopulaDto, MarginalDto, ModelDto, PairDto, MODEL_FORMAT_VERSION};
pub use resample::{resample_statistics, resample_statistics_in, InputDomain, Sampler, StatisticsReport, MIN_RESAMPLE};
pub use sobol::{sobol_points, SOBOL_MAX_DIM};

pub const MIN_TRAIN: usize = 10;
pub const DEFAULT_Q: f64 = 0.75;
/// Relative widening of the observed range for the Legendre-on-X mode.
pub const RANGE_WIDENING: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Mode {
    /// Stieltjes bases for the KDE marginals, regression on raw inputs.
    #[serde(rename = "aPCEonX")]
    APceOnX,
    /// Legendre bases on the Rosenblatt-transformed inputs.
    #[serde(rename = "lPCEonZ")]
    LPceOnZ,
    /// Legendre bases on the widened observed range, regression on raw inputs.
    #[serde(rename = "lPCEonX")]
    LPceOnX,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::APceOnX => "aPCEonX",
            Mode::LPceOnZ => "lPCEonZ",
            Mode::LPceOnX => "lPCEonX",
        }
    }

    /// Accepts the canonical names and the CLI spellings `apce-x`, `lpce-z`, `lpce-x`.
    pub fn parse(s: &str) -> Result<Mode> {
        match s.to_ascii_lowercase().replace('_', "-").as_str() {
            "apceonx" | "apce-x" => Ok(Mode::APceOnX),
            "lpceonz" | "lpce-z" => Ok(Mode::LPceOnZ),
            "lpceonx" | "lpce-x" => Ok(Mode::LPceOnX),
            _ => Err(Error::InvalidInput(format!("unknown mode '{s}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitConfig {
    pub mode: Mode,
    /// Upper end of the degree search; `None` means [`DEFAULT_P_MAX`].
    pub p_max: Option<u32>,
    pub r_max: Option<usize>,
    pub q: f64,
    pub seed: u64,
    /// Fit a C-vine for resampling in the X-space modes. lPCEonZ always fits one when d ≥ 2.
    pub fit_copula: bool,
}

impl Default for FitConfig {
    fn default() -> Self {
        Self { mode: Mode::APceOnX, p_max: None, r_max: None, q: DEFAULT_Q, seed: 0, fit_copula: true }
    }
}

impl FitConfig {
    pub fn new(mode: Mode) -> Self {
        Self { mode, ..Self::default() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metadata {
    pub p: u32,
    pub r: usize,
    pub q: f64,
    /// Relative LOO error of the selected model, with the small-sample correction.
    pub loo: f64,
    pub n_train: usize,
    pub seed: u64,
    /// Per-dimension [min, max] of the training inputs.
    #[serde(default)]
    pub hull: Vec<[f64; 2]>,
}

#[derive(Debug, Clone)]
pub struct PceModel {
    mode: Mode,
    marginals: Vec<Marginal>,
    copula: Option<CvineModel>,
    bases: Vec<OrthonormalBasis1D>,
    index_set: MultiIndexSet,
    coefficients: Vec<f64>,
    metadata: Metadata,
    /// Hyperparameter candidates visited during fitting; not persisted.
    trace: Vec<Candidate>,
}

impl PceModel {
    /// Assembles a model from parts, checking the invariants that `fit` guarantees.
    pub fn from_parts(
        mode: Mode,
        marginals: Vec<Marginal>,
        copula: Option<CvineModel>,
        bases: Vec<OrthonormalBasis1D>,
        index_set: MultiIndexSet,
        coefficients: Vec<f64>,
        metadata: Metadata,
    ) -> Result<Self> {
        let d = index_set.d;
        if marginals.len() != d {
            return Err(Error::LengthMismatch(marginals.len(), d));
        }
        if bases.len() != d {
            return Err(Error::LengthMismatch(bases.len(), d));
        }
        if coefficients.len() != index_set.len() {
            return Err(Error::LengthMismatch(coefficients.len(), index_set.len()));
        }
        if let Some(c) = &copula {
            if c.dim() != d {
                return Err(Error::LengthMismatch(c.dim(), d));
            }
        }
        if mode == Mode::LPceOnZ && d >= 2 && copula.is_none() {
            return Err(Error::MissingCopula);
        }
        for (dim, (b, &need)) in bases.iter().zip(&index_set.max_degrees()).enumerate() {
            if b.degree_max() < need as usize {
                return Err(Error::DegreeMismatch { dim, have: b.degree_max(), need: need as usize });
            }
        }
        Ok(Self { mode, marginals, copula, bases, index_set, coefficients, metadata, trace: Vec::new() })
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn dim(&self) -> usize {
        self.index_set.d
    }

    pub fn marginals(&self) -> &[Marginal] {
        &self.marginals
    }

    pub fn copula(&self) -> Option<&CvineModel> {
        self.copula.as_ref()
    }

    pub fn bases(&self) -> &[OrthonormalBasis1D] {
        &self.bases
    }

    pub fn index_set(&self) -> &MultiIndexSet {
        &self.index_set
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    pub fn metadata(&self) -> &Metadata {
        &self.metadata
    }

    pub fn trace(&self) -> &[Candidate] {
        &self.trace
    }

    /// Number of nonzero coefficients.
    pub fn n_active(&self) -> usize {
        self.coefficients.iter().filter(|c| **c != 0.0).count()
    }

    /// Maps an input to the space the basis lives on.
    fn to_basis_space(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.dim() {
            return Err(Error::LengthMismatch(x.len(), self.dim()));
        }
        match self.mode {
            Mode::APceOnX | Mode::LPceOnX => Ok(x.to_vec()),
            Mode::LPceOnZ => {
                let u = pit(&self.marginals, x)?;
                match &self.copula {
                    Some(c) => c.rosenblatt(&u),
                    None if self.dim() == 1 => Ok(u),
                    None => Err(Error::MissingCopula),
                }
            }
        }
    }

    /// Evaluates the expansion at a point already in basis space.
    pub fn eval_basis_space(&self, z: &[f64], tab: &mut Vec<Vec<f64>>) -> f64 {
        eval_expansion(&self.bases, &self.index_set, &self.coefficients, z, tab)
    }

    pub fn predict(&self, x: &[f64]) -> Result<f64> {
        let z = self.to_basis_space(x)?;
        Ok(self.eval_basis_space(&z, &mut Vec::new()))
    }

    /// Batch prediction, parallel over chunks; output order matches input.
    pub fn predict_batch(&self, xs: &[Vec<f64>]) -> Result<Vec<f64>> {
        let chunks: Vec<Result<Vec<f64>>> = xs
            .par_chunks(4096)
            .map(|chunk| {
                let mut tab = Vec::new();
                chunk
                    .iter()
                    .map(|x| {
                        let z = self.to_basis_space(x)?;
                        Ok(self.eval_basis_space(&z, &mut tab))
                    })
                    .collect()
            })
            .collect();
        let mut out = Vec::with_capacity(xs.len());
        for c in chunks {
            out.extend(c?);
        }
        Ok(out)
    }

    /// (mean, variance) of the expansion under the measure its basis is orthonormal for.
    pub fn moments(&self) -> (f64, f64) {
        let mut mean = 0.0;
        let mut var = 0.0;
        for (c, a) in self.coefficients.iter().zip(&self.index_set.indices) {
            if a.iter().all(|&k| k == 0) {
                mean += c;
            } else {
                var += c * c;
            }
        }
        (mean, var)
    }

    /// Fraction of query points outside the training bounding box.
    pub fn out_of_hull_fraction(&self, xs: &[Vec<f64>]) -> f64 {
        let hull = &self.metadata.hull;
        if xs.is_empty() || hull.len() != self.dim() {
            return 0.0;
        }
        let outside = xs
            .iter()
            .filter(|x| x.iter().zip(hull).any(|(v, [lo, hi])| v < lo || v > hi))
            .count();
        outside as f64 / xs.len() as f64
    }
}

/// Fits a sparse PCE to `x` (n rows of d inputs) and `y`.
pub fn fit(x: &[Vec<f64>], y: &[f64], config: &FitConfig) -> Result<PceModel> {
    let n = x.len();
    if y.len() != n {
        return Err(Error::LengthMismatch(y.len(), n));
    }
    if n < MIN_TRAIN {
        return Err(Error::InsufficientData { need: MIN_TRAIN, got: n });
    }
    let d = x[0].len();
    if d == 0 {
        return Err(Error::InvalidInput("no input columns".into()));
    }
    if x.iter().any(|r| r.len() != d) {
        return Err(Error::InvalidInput("ragged input rows".into()));
    }
    if x.iter().flatten().chain(y).any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput("non-finite value in training data".into()));
    }
    if !(config.q > 0.0 && config.q <= 1.0) {
        return Err(Error::InvalidInput(format!("q must lie in (0, 1], got {}", config.q)));
    }
    let p_max = config.p_max.unwrap_or(DEFAULT_P_MAX);
    let r_max = config.r_max.unwrap_or_else(|| default_r_max(d));
    if p_max == 0 || r_max == 0 {
        return Err(Error::InvalidInput("p_max and r_max must be at least 1".into()));
    }

    let columns: Vec<Vec<f64>> = (0..d).map(|j| x.iter().map(|r| r[j]).collect()).collect();
    let hull: Vec<[f64; 2]> = columns
        .iter()
        .map(|c| [c.iter().copied().fold(f64::INFINITY, f64::min), c.iter().copied().fold(f64::NEG_INFINITY, f64::max)])
        .collect();
    let marginals: Vec<Marginal> = columns.iter().map(|c| fit_kde(c).map(Marginal::from)).collect::<Result<_>>()?;

    let want_copula = d >= 2 && (config.mode == Mode::LPceOnZ || config.fit_copula);
    let u: Option<Vec<Vec<f64>>> = if want_copula || config.mode == Mode::LPceOnZ {
        Some(x.iter().map(|r| pit(&marginals, r)).collect::<Result<_>>()?)
    } else {
        None
    };
    let copula = match (&u, want_copula) {
        (Some(u), true) => Some(fit_cvine(u)?.model),
        _ => None,
    };

    let p = p_max as usize;
    let (bases, inputs): (Vec<OrthonormalBasis1D>, Vec<Vec<f64>>) = match config.mode {
        Mode::APceOnX => (marginals.iter().map(|m| stieltjes_basis(m, p)).collect::<Result<_>>()?, x.to_vec()),
        Mode::LPceOnX => {
            let bases = hull
                .iter()
                .map(|[lo, hi]| {
                    let w = RANGE_WIDENING * (hi - lo);
                    legendre_basis(lo - w, hi + w, p)
                })
                .collect::<Result<_>>()?;
            (bases, x.to_vec())
        }
        Mode::LPceOnZ => {
            let u = u.expect("PIT computed for lPCEonZ");
            let z = match &copula {
                Some(c) => u.iter().map(|r| c.rosenblatt(r)).collect::<Result<_>>()?,
                None => u,
            };
            ((0..d).map(|_| legendre_basis(0.0, 1.0, p)).collect::<Result<_>>()?, z)
        }
    };

    let yv = DVector::from_column_slice(y);
    let p_range: Vec<u32> = (1..=p_max).collect();
    let r_range: Vec<usize> = (1..=r_max.min(d)).collect();
    let search = select_hyperparams(d, &yv, &p_range, &r_range, config.q, |set| design_matrix(&bases, set, &inputs))?;

    let coefficients = search.solution.coefficients.clone();
    let metadata = Metadata {
        p: search.p,
        r: search.r,
        q: config.q,
        loo: search.solution.loo_corrected,
        n_train: n,
        seed: config.seed,
        hull,
    };
    let mut model = PceModel::from_parts(config.mode, marginals, copula, bases, search.index_set, coefficients, metadata)?;
    model.trace = search.trace;
    Ok(model)
}
