//! Validation error measures.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::marginals::KdeMarginal;

pub const KL_GRID_NODES: usize = 4096;
pub const KL_MIN_NODES: usize = 128;
const DENSITY_FLOOR: f64 = 1e-300;

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct ErrorReport {
    pub mae: Option<f64>,
    pub rmae: Option<f64>,
    pub rel_mean_err: Option<f64>,
    pub rel_std_err: Option<f64>,
    pub kl_div: Option<f64>,
}

fn check_lengths(pred: &[f64], truth: &[f64]) -> Result<()> {
    if pred.len() != truth.len() {
        return Err(Error::LengthMismatch(pred.len(), truth.len()));
    }
    if pred.is_empty() {
        return Err(Error::InsufficientData { need: 1, got: 0 });
    }
    Ok(())
}

pub fn mae(pred: &[f64], truth: &[f64]) -> Result<f64> {
    check_lengths(pred, truth)?;
    Ok(pred.iter().zip(truth).map(|(p, t)| (t - p).abs()).sum::<f64>() / pred.len() as f64)
}

pub fn rmae(pred: &[f64], truth: &[f64]) -> Result<f64> {
    check_lengths(pred, truth)?;
    if truth.iter().any(|&t| t == 0.0) {
        return Err(Error::ZeroReference);
    }
    Ok(pred.iter().zip(truth).map(|(p, t)| (1.0 - p / t).abs()).sum::<f64>() / pred.len() as f64)
}

/// (|1 − μ̂/μ|, |1 − σ̂/σ|).
pub fn rel_moment_errors(est_mean: f64, est_std: f64, ref_mean: f64, ref_std: f64) -> Result<(f64, f64)> {
    if ref_mean == 0.0 || ref_std == 0.0 {
        return Err(Error::ZeroReference);
    }
    Ok(((1.0 - est_mean / ref_mean).abs(), (1.0 - est_std / ref_std).abs()))
}

/// KL(f_ref ‖ f_est) by the trapezoid rule on a sorted grid, densities given
/// as values on that grid and floored at 1e-300. Returns |KL|.
pub fn kl_divergence(f_est: &[f64], f_ref: &[f64], grid: &[f64]) -> Result<f64> {
    if f_est.len() != grid.len() {
        return Err(Error::LengthMismatch(f_est.len(), grid.len()));
    }
    if f_ref.len() != grid.len() {
        return Err(Error::LengthMismatch(f_ref.len(), grid.len()));
    }
    if grid.len() < KL_MIN_NODES {
        return Err(Error::GridTooCoarse(grid.len(), KL_MIN_NODES));
    }
    let integrand: Vec<f64> = f_est
        .iter()
        .zip(f_ref)
        .map(|(&e, &r)| {
            let r = r.max(DENSITY_FLOOR);
            r * (r.ln() - e.max(DENSITY_FLOOR).ln())
        })
        .collect();
    let kl: f64 = grid.windows(2).zip(integrand.windows(2)).map(|(x, f)| 0.5 * (x[1] - x[0]) * (f[0] + f[1])).sum();
    Ok(kl.abs())
}

/// KL between two density functions on `n` uniform nodes over [lo, hi].
pub fn kl_divergence_fn(
    f_est: impl Fn(f64) -> f64,
    f_ref: impl Fn(f64) -> f64,
    lo: f64,
    hi: f64,
    n: usize,
) -> Result<f64> {
    let grid = uniform_grid(lo, hi, n)?;
    let e: Vec<f64> = grid.iter().map(|&x| f_est(x)).collect();
    let r: Vec<f64> = grid.iter().map(|&x| f_ref(x)).collect();
    kl_divergence(&e, &r, &grid)
}

pub fn uniform_grid(lo: f64, hi: f64, n: usize) -> Result<Vec<f64>> {
    if n < KL_MIN_NODES {
        return Err(Error::GridTooCoarse(n, KL_MIN_NODES));
    }
    if !(lo < hi) {
        return Err(Error::InvalidInterval { lo, hi });
    }
    let h = (hi - lo) / (n - 1) as f64;
    Ok((0..n).map(|i| if i + 1 == n { hi } else { lo + h * i as f64 }).collect())
}

/// Interval holding all but ~1e-6 of the mass of either KDE.
pub fn mass_support(a: &KdeMarginal, b: &KdeMarginal) -> (f64, f64) {
    let lo = tail_point(a, 1e-6).min(tail_point(b, 1e-6));
    let hi = tail_point(a, 1.0 - 1e-6).max(tail_point(b, 1.0 - 1e-6));
    (lo, hi)
}

/// Bisection on the exact cdf. Unlike `KdeMarginal::quantile` this never
/// builds the inverse table, which is prohibitive for 10^6-center estimates.
fn tail_point(k: &KdeMarginal, p: f64) -> f64 {
    let (mut lo, mut hi) = k.support();
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if k.cdf(mid) < p {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// KL(ref ‖ est) between two KDEs on the default 4096-node grid.
pub fn kde_kl_divergence(est: &KdeMarginal, reference: &KdeMarginal) -> Result<f64> {
    let (lo, hi) = mass_support(est, reference);
    let grid = uniform_grid(lo, hi, KL_GRID_NODES)?;
    kl_divergence(&est.pdf_on_grid(&grid), &reference.pdf_on_grid(&grid), &grid)
}
