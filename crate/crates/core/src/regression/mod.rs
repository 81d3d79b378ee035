//! Coefficient estimation: OLS, hybrid least angle regression, LOO error,
//! and the (p, r) hyperparameter search.

mod hyper;
mod lar;

pub use hyper::{default_r_max, select_hyperparams, Candidate, HyperSearch, DEFAULT_P_MAX};
pub use lar::{default_patience, lar_path, lar_path_with, lar_select, lar_select_with, LarPath};

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

pub const MAX_CONDITION: f64 = 1e12;
pub const LEVERAGE_TOL: f64 = 1e-10;

#[derive(Debug, Clone)]
pub struct DesignMatrix {
    pub a: DMatrix<f64>,
    pub y: DVector<f64>,
}

impl DesignMatrix {
    pub fn new(a: DMatrix<f64>, y: DVector<f64>) -> Result<Self> {
        if a.nrows() != y.len() {
            return Err(Error::LengthMismatch(a.nrows(), y.len()));
        }
        if a.nrows() == 0 {
            return Err(Error::InvalidInput("empty design".into()));
        }
        if a.iter().chain(y.iter()).any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("non-finite design entry".into()));
        }
        Ok(Self { a, y })
    }

    pub fn n(&self) -> usize {
        self.a.nrows()
    }

    pub fn n_terms(&self) -> usize {
        self.a.ncols()
    }

    fn columns(&self, support: &[usize]) -> DMatrix<f64> {
        DMatrix::from_fn(self.n(), support.len(), |i, j| self.a[(i, support[j])])
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SparseSolution {
    /// Full-length coefficient vector; exact zeros off the support.
    pub coefficients: Vec<f64>,
    pub support: Vec<usize>,
    /// LOO error relative to the sample variance of y.
    pub loo_error: f64,
    /// `loo_error` times the small-sample correction factor; used for model selection.
    pub loo_corrected: f64,
}

/// Least squares on a column subset: coefficients, residuals and leverages.
struct SubsetFit {
    beta: DVector<f64>,
    residuals: DVector<f64>,
    leverages: Vec<f64>,
    /// tr((AᵀA)⁻¹) over the support columns.
    trace_inv: f64,
}

fn subset_fit(dm: &DesignMatrix, support: &[usize]) -> Result<SubsetFit> {
    let n = dm.n();
    let k = support.len();
    if k == 0 {
        return Err(Error::RankDeficient("empty support".into()));
    }
    if n <= k {
        return Err(Error::RankDeficient(format!("{n} rows for {k} columns")));
    }
    let x = dm.columns(support);
    let qr = x.qr();
    let r = qr.r();
    let sv = r.singular_values();
    let smax = sv.max();
    let smin = sv.min();
    if !(smin > 0.0) || smax / smin > MAX_CONDITION {
        return Err(Error::RankDeficient(format!("condition number {:.3e}", smax / smin)));
    }
    let q = qr.q();
    let qty = q.transpose() * &dm.y;
    let beta = r
        .solve_upper_triangular(&qty)
        .ok_or_else(|| Error::RankDeficient("singular triangular factor".into()))?;
    let residuals = &dm.y - &q * &qty;
    let leverages = (0..n).map(|i| q.row(i).norm_squared()).collect();
    let rinv = r
        .clone()
        .try_inverse()
        .ok_or_else(|| Error::RankDeficient("singular triangular factor".into()))?;
    Ok(SubsetFit { beta, residuals, leverages, trace_inv: rinv.norm_squared() })
}

/// mean((r/(1−h))²) / var(y), the sample variance using n − 1.
pub(crate) fn relative_loo(y: &DVector<f64>, residuals: &[f64], leverages: &[f64]) -> Result<f64> {
    let n = y.len() as f64;
    let mut acc = 0.0;
    for (i, (r, h)) in residuals.iter().zip(leverages).enumerate() {
        if *h >= 1.0 - LEVERAGE_TOL {
            return Err(Error::LeverageOne(i));
        }
        acc += (r / (1.0 - h)).powi(2);
    }
    let mse = acc / n;
    let var = y.variance() * n / (n - 1.0).max(1.0);
    if var > 0.0 {
        Ok(mse / var)
    } else {
        Ok(mse)
    }
}

/// Small-sample LOO inflation n/(n−P)·(1 + tr((AᵀA)⁻¹)), which penalises
/// supports that fit noise when n is small.
pub fn loo_correction(n: usize, k: usize, trace_inv: f64) -> f64 {
    if k >= n {
        return f64::INFINITY;
    }
    n as f64 / (n - k) as f64 * (1.0 + trace_inv)
}

/// OLS on all columns via QR, with the relative LOO error attached.
pub fn ols_solve(dm: &DesignMatrix) -> Result<SparseSolution> {
    let support: Vec<usize> = (0..dm.n_terms()).collect();
    solve_on_support(dm, &support)
}

/// OLS restricted to `support`, scattered back into a full coefficient vector.
pub fn solve_on_support(dm: &DesignMatrix, support: &[usize]) -> Result<SparseSolution> {
    let fit = subset_fit(dm, support)?;
    let loo_error = match relative_loo(&dm.y, fit.residuals.as_slice(), &fit.leverages) {
        Ok(v) => v,
        Err(Error::LeverageOne(_)) => f64::INFINITY,
        Err(e) => return Err(e),
    };
    let mut coefficients = vec![0.0; dm.n_terms()];
    for (&k, b) in support.iter().zip(fit.beta.iter()) {
        coefficients[k] = *b;
    }
    let loo_corrected = loo_error * loo_correction(dm.n(), support.len(), fit.trace_inv);
    Ok(SparseSolution { coefficients, support: support.to_vec(), loo_error, loo_corrected })
}

/// Analytic leave-one-out error of the OLS fit on `support`.
pub fn loo_error(dm: &DesignMatrix, support: &[usize]) -> Result<f64> {
    if support.len() >= dm.n() {
        return Err(Error::LeverageOne(0));
    }
    let fit = subset_fit(dm, support)?;
    relative_loo(&dm.y, fit.residuals.as_slice(), &fit.leverages)
}
