use super::pair::{clayton_ln_pdf, frank_ln_pdf, gumbel_ln_pdf, Family, PairCopula, Rotation, U_EPS};
use super::tau::{kendall_tau_empirical, tau_to_param};
use crate::error::{Error, Result};
use crate::optimize::brent_min;
use crate::special::{norm_quantile, t_ln_pdf, t_quantile};

pub const MIN_PAIR_OBS: usize = 10;
/// Degrees of freedom tried for the Student-t family, θ profiled for each.
pub const T_NU_GRID: [f64; 7] = [2.0, 3.0, 4.0, 6.0, 10.0, 20.0, 50.0];
const GRID_POINTS: usize = 16;

#[derive(Debug, Clone, PartialEq)]
pub struct PairFit {
    pub copula: PairCopula,
    pub log_likelihood: f64,
    /// 2(k − log L).
    pub aic: f64,
}

/// Maximum-likelihood fit of every supported family (and the rotations that
/// match the sign of the empirical τ), returning the minimum-AIC model.
pub fn fit_pair(u: &[f64], v: &[f64]) -> Result<PairFit> {
    fit_pair_with(u, v, &Family::ALL)
}

pub fn fit_pair_with(u: &[f64], v: &[f64], families: &[Family]) -> Result<PairFit> {
    if u.len() != v.len() {
        return Err(Error::LengthMismatch(u.len(), v.len()));
    }
    if u.len() < MIN_PAIR_OBS {
        return Err(Error::FitFailure(format!("need at least {MIN_PAIR_OBS} observations, got {}", u.len())));
    }
    if u.iter().chain(v).any(|x| !x.is_finite()) {
        return Err(Error::FitFailure("non-finite pseudo-observation".into()));
    }
    let u: Vec<f64> = u.iter().map(|x| x.clamp(U_EPS, 1.0 - U_EPS)).collect();
    let v: Vec<f64> = v.iter().map(|x| x.clamp(U_EPS, 1.0 - U_EPS)).collect();
    let tau = kendall_tau_empirical(&u, &v);
    let mut best: Option<PairFit> = None;
    let mut consider = |fam: Family, rot: Rotation, params: Vec<f64>, ll: f64| {
        if !ll.is_finite() {
            return;
        }
        let Ok(copula) = PairCopula::new(fam, rot, params) else { return };
        let aic = 2.0 * (fam.n_params() as f64 - ll);
        if best.as_ref().is_none_or(|b| aic < b.aic) {
            best = Some(PairFit { copula, log_likelihood: ll, aic });
        }
    };
    for &fam in families {
        match fam {
            Family::Independence => consider(fam, Rotation::R0, vec![], 0.0),
            Family::Gaussian => {
                let (rho, ll) = fit_gaussian(&u, &v, tau);
                consider(fam, Rotation::R0, vec![rho], ll);
            }
            Family::StudentT => {
                if let Some((rho, nu, ll)) = fit_student(&u, &v, tau) {
                    consider(fam, Rotation::R0, vec![rho, nu], ll);
                }
            }
            Family::Frank => {
                let (theta, ll) = fit_frank(&u, &v, tau);
                consider(fam, Rotation::R0, vec![theta], ll);
            }
            Family::Clayton | Family::Gumbel => {
                let rots = if tau >= 0.0 { [Rotation::R0, Rotation::R180] } else { [Rotation::R90, Rotation::R270] };
                for rot in rots {
                    let (lu, lv) = rotated_logs(&u, &v, rot);
                    let (theta, ll) = fit_archimedean(fam, &lu, &lv, tau.abs());
                    consider(fam, rot, vec![theta], ll);
                }
            }
        }
    }
    best.ok_or_else(|| Error::FitFailure("no candidate family converged".into()))
}

/// Grid search then Brent refinement; maximises `ll` over [lo, hi].
fn maximise(ll: impl Fn(f64) -> f64, lo: f64, hi: f64, init: f64) -> (f64, f64) {
    let score = |x: f64| {
        let v = ll(x);
        if v.is_finite() {
            v
        } else {
            f64::NEG_INFINITY
        }
    };
    let mut pts: Vec<f64> = (0..GRID_POINTS).map(|i| lo + (hi - lo) * i as f64 / (GRID_POINTS - 1) as f64).collect();
    pts.push(init.clamp(lo, hi));
    pts.sort_by(f64::total_cmp);
    let vals: Vec<f64> = pts.iter().map(|&x| score(x)).collect();
    let mut bi = 0;
    for i in 1..pts.len() {
        if vals[i] > vals[bi] {
            bi = i;
        }
    }
    let a = pts[bi.saturating_sub(1)];
    let b = pts[(bi + 1).min(pts.len() - 1)];
    let (x, f) = brent_min(|x| -score(x), a, b, 1e-8, 100);
    if -f >= vals[bi] {
        (x, -f)
    } else {
        (pts[bi], vals[bi])
    }
}

fn fit_gaussian(u: &[f64], v: &[f64], tau: f64) -> (f64, f64) {
    let n = u.len() as f64;
    let (mut s2, mut sxy) = (0.0, 0.0);
    for (a, b) in u.iter().zip(v) {
        let (x, y) = (norm_quantile(*a), norm_quantile(*b));
        s2 += x * x + y * y;
        sxy += x * y;
    }
    let ll = |rho: f64| {
        let r2 = 1.0 - rho * rho;
        -0.5 * n * r2.ln() - (rho * rho * s2 - 2.0 * rho * sxy) / (2.0 * r2)
    };
    maximise(ll, -0.999, 0.999, tau_to_param(Family::Gaussian, tau))
}

fn fit_student(u: &[f64], v: &[f64], tau: f64) -> Option<(f64, f64, f64)> {
    let n = u.len() as f64;
    let init = tau_to_param(Family::StudentT, tau);
    let mut best: Option<(f64, f64, f64)> = None;
    for &nu in &T_NU_GRID {
        let xs: Vec<f64> = u.iter().map(|&a| t_quantile(a, nu)).collect();
        let ys: Vec<f64> = v.iter().map(|&b| t_quantile(b, nu)).collect();
        let marg: f64 = xs.iter().zip(&ys).map(|(x, y)| t_ln_pdf(*x, nu) + t_ln_pdf(*y, nu)).sum();
        let ll = |rho: f64| {
            let r2 = 1.0 - rho * rho;
            let k = 1.0 / (nu * r2);
            let s: f64 = xs.iter().zip(&ys).map(|(x, y)| (k * (x * x - 2.0 * rho * x * y + y * y)).ln_1p()).sum();
            n * (-(2.0 * std::f64::consts::PI).ln() - 0.5 * r2.ln()) - 0.5 * (nu + 2.0) * s - marg
        };
        let (rho, l) = maximise(ll, -0.999, 0.999, init);
        if l.is_finite() && best.is_none_or(|b| l > b.2) {
            best = Some((rho, nu, l));
        }
    }
    best
}

fn fit_frank(u: &[f64], v: &[f64], tau: f64) -> (f64, f64) {
    let ll = |th: f64| u.iter().zip(v).map(|(a, b)| frank_ln_pdf(th, *a, *b)).sum::<f64>();
    let init = tau_to_param(Family::Frank, tau);
    if tau >= 0.0 {
        maximise(ll, 1e-4, 35.0, init)
    } else {
        maximise(ll, -35.0, -1e-4, init)
    }
}

/// Logs of the arguments mapped into the unrotated family's frame.
fn rotated_logs(u: &[f64], v: &[f64], rot: Rotation) -> (Vec<f64>, Vec<f64>) {
    let flip = |x: f64| 1.0 - x;
    let (fu, fv): (fn(f64) -> f64, fn(f64) -> f64) = match rot {
        Rotation::R0 => (|x| x, |x| x),
        Rotation::R90 => (flip, |x| x),
        Rotation::R180 => (flip, flip),
        Rotation::R270 => (|x| x, flip),
    };
    (u.iter().map(|&a| fu(a).ln()).collect(), v.iter().map(|&b| fv(b).ln()).collect())
}

/// Clayton and Gumbel, optimised over log θ and log(θ − 1) respectively.
fn fit_archimedean(fam: Family, lu: &[f64], lv: &[f64], tau_abs: f64) -> (f64, f64) {
    let init = tau_to_param(fam, tau_abs);
    match fam {
        Family::Clayton => {
            let ll = |s: f64| {
                let th = s.exp();
                lu.iter().zip(lv).map(|(a, b)| clayton_ln_pdf(th, *a, *b)).sum::<f64>()
            };
            let (s, l) = maximise(ll, (1e-4f64).ln(), 40f64.ln(), init.max(1e-4).ln());
            (s.exp(), l)
        }
        _ => {
            let ll = |s: f64| {
                let th = 1.0 + s.exp();
                lu.iter().zip(lv).map(|(a, b)| gumbel_ln_pdf(th, *a, *b)).sum::<f64>()
            };
            let (s, l) = maximise(ll, (1e-4f64).ln(), 39f64.ln(), (init - 1.0).max(1e-4).ln());
            (1.0 + s.exp(), l)
        }
    }
}
