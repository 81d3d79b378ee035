use nalgebra::DVector;

use super::{loo_correction, relative_loo, solve_on_support, DesignMatrix, SparseSolution};
use crate::error::{Error, Result};

/// Columns whose residual norm after projection falls below this fraction of
/// their own norm are treated as collinear with the active set and skipped.
const COLLINEAR_TOL: f64 = 1e-9;

/// Variables in the order LARS activated them, with the LOO error of the
/// OLS refit after each activation.
#[derive(Debug, Clone)]
pub struct LarPath {
    pub order: Vec<usize>,
    pub loo: Vec<f64>,
    pub loo_corrected: Vec<f64>,
}

impl LarPath {
    /// Number of active variables at the step with the smallest corrected LOO.
    pub fn best_len(&self) -> usize {
        let mut best = 0;
        for (i, v) in self.loo_corrected.iter().enumerate() {
            if *v < self.loo_corrected[best] {
                best = i;
            }
        }
        best + 1
    }
}

/// Incrementally grown thin QR of the active (unit-norm) columns.
struct ActiveQr {
    n: usize,
    q: Vec<DVector<f64>>,
    /// Column j of R holds r[j][0..=j].
    r: Vec<Vec<f64>>,
    /// Columns of R⁻¹, same layout.
    rinv: Vec<Vec<f64>>,
}

impl ActiveQr {
    fn push(&mut self, x: &DVector<f64>) -> Option<()> {
        let mut v = x.clone();
        let k = self.q.len();
        let mut coeffs = vec![0.0; k + 1];
        for _ in 0..2 {
            for (i, qi) in self.q.iter().enumerate() {
                let c = qi.dot(&v);
                v.axpy(-c, qi, 1.0);
                coeffs[i] += c;
            }
        }
        let rkk = v.norm();
        if !(rkk > COLLINEAR_TOL * x.norm()) || self.q.len() >= self.n {
            return None;
        }
        coeffs[k] = rkk;
        // New column of R⁻¹: [−R⁻¹ r / rkk; 1 / rkk].
        let mut inv = vec![0.0; k + 1];
        for (j, col) in self.rinv.iter().enumerate() {
            for (i, c) in col.iter().enumerate() {
                inv[i] -= c * coeffs[j];
            }
        }
        for v in inv.iter_mut().take(k) {
            *v /= rkk;
        }
        inv[k] = 1.0 / rkk;
        self.q.push(v / rkk);
        self.r.push(coeffs);
        self.rinv.push(inv);
        Some(())
    }

    /// tr((AᵀA)⁻¹) for the original columns A = X·diag(scale).
    fn trace_inv(&self, scale: &[f64]) -> f64 {
        let mut t = 0.0;
        for col in &self.rinv {
            for (i, v) in col.iter().enumerate() {
                t += (v / scale[i]).powi(2);
            }
        }
        t
    }

    /// Solves RᵀR w = s.
    fn gram_solve(&self, s: &[f64]) -> Vec<f64> {
        let k = self.q.len();
        let mut z = vec![0.0; k];
        for i in 0..k {
            let mut acc = s[i];
            for (j, zj) in z.iter().enumerate().take(i) {
                acc -= self.r[i][j] * zj;
            }
            z[i] = acc / self.r[i][i];
        }
        let mut w = vec![0.0; k];
        for i in (0..k).rev() {
            let mut acc = z[i];
            for (j, wj) in w.iter().enumerate().skip(i + 1) {
                acc -= self.r[j][i] * wj;
            }
            w[i] = acc / self.r[i][i];
        }
        w
    }
}

/// Runs the LARS path for at most `max_steps` activations, refitting OLS on
/// the active set after each one.
pub fn lar_path(dm: &DesignMatrix, max_steps: usize) -> Result<LarPath> {
    lar_path_with(dm, max_steps, None)
}

/// Default patience for [`lar_select_with`]: max(20, max_steps / 10).
pub fn default_patience(max_steps: usize) -> usize {
    (max_steps / 10).max(20)
}

/// As [`lar_path`], additionally stopping once the corrected LOO has not
/// improved for `patience` consecutive activations.
pub fn lar_path_with(dm: &DesignMatrix, max_steps: usize, patience: Option<usize>) -> Result<LarPath> {
    let n = dm.n();
    let p = dm.n_terms();
    let max_steps = max_steps.min(p).min(n.saturating_sub(1));
    let mut x = dm.a.clone();
    let mut norms = Vec::with_capacity(p);
    let mut usable = vec![true; p];
    for k in 0..p {
        let mut c = x.column_mut(k);
        let nrm = c.norm();
        norms.push(nrm);
        if nrm > 0.0 {
            c /= nrm;
        } else {
            usable[k] = false;
        }
    }
    let y = &dm.y;
    let mut corr: Vec<f64> = x.tr_mul(y).iter().copied().collect();
    let mut best_step = 0;
    let ynorm = y.norm();
    let mut active: Vec<usize> = Vec::new();
    let mut is_active = vec![false; p];
    let mut qr = ActiveQr { n, q: Vec::new(), r: Vec::new(), rinv: Vec::new() };
    let mut active_norms = Vec::new();
    let mut path = LarPath { order: Vec::new(), loo: Vec::new(), loo_corrected: Vec::new() };
    let mut lev = vec![0.0; n];
    let mut res = y.clone();

    let mut next = argmax_abs(&corr, &is_active, &usable);
    while let Some(j) = next {
        if active.len() >= max_steps {
            break;
        }
        if corr.iter().any(|c| !c.is_finite()) {
            return Err(Error::NumericalBreakdown("non-finite correlation".into()));
        }
        if qr.push(&x.column(j).into_owned()).is_none() {
            usable[j] = false;
            next = argmax_abs(&corr, &is_active, &usable);
            continue;
        }
        active.push(j);
        active_norms.push(norms[j]);
        is_active[j] = true;
        let qk = qr.q.last().unwrap();
        let z = qk.dot(y);
        res.axpy(-z, qk, 1.0);
        for (l, qv) in lev.iter_mut().zip(qk.iter()) {
            *l += qv * qv;
        }
        path.order.push(j);
        match relative_loo(y, res.as_slice(), &lev) {
            Ok(v) => {
                path.loo.push(v);
                let c = v * loo_correction(n, active.len(), qr.trace_inv(&active_norms));
                if path.loo_corrected.get(best_step).is_none_or(|&b| c < b) {
                    best_step = path.loo_corrected.len();
                }
                path.loo_corrected.push(c);
            }
            Err(Error::LeverageOne(_)) => {
                path.loo.push(f64::INFINITY);
                path.loo_corrected.push(f64::INFINITY);
                break;
            }
            Err(e) => return Err(e),
        }
        let cmax = active.iter().map(|&k| corr[k].abs()).fold(0.0, f64::max);
        if cmax <= 1e-13 * ynorm.max(f64::MIN_POSITIVE) || active.len() >= max_steps {
            break;
        }
        if patience.is_some_and(|w| path.loo_corrected.len() - 1 - best_step >= w) {
            break;
        }

        // Equiangular direction for the active set.
        let signs: Vec<f64> = active.iter().map(|&k| corr[k].signum()).collect();
        let w_raw = qr.gram_solve(&signs);
        let norm2: f64 = w_raw.iter().zip(&signs).map(|(w, s)| w * s).sum();
        if !(norm2 > 0.0) {
            return Err(Error::NumericalBreakdown("indefinite active Gram matrix".into()));
        }
        let aa = 1.0 / norm2.sqrt();
        let mut u = DVector::zeros(n);
        for (&k, w) in active.iter().zip(&w_raw) {
            u.axpy(aa * w, &x.column(k), 1.0);
        }
        let mut gamma = cmax / aa;
        let mut pick = None;
        let a_all = x.tr_mul(&u);
        for k in 0..p {
            if is_active[k] || !usable[k] {
                continue;
            }
            let ak = a_all[k];
            for g in [(cmax - corr[k]) / (aa - ak), (cmax + corr[k]) / (aa + ak)] {
                if g > 1e-14 * gamma && g < gamma {
                    gamma = g;
                    pick = Some(k);
                }
            }
        }
        for (c, ak) in corr.iter_mut().zip(a_all.iter()) {
            *c -= gamma * ak;
        }
        next = pick.or_else(|| argmax_abs(&corr, &is_active, &usable));
    }
    Ok(path)
}

fn argmax_abs(corr: &[f64], is_active: &[bool], usable: &[bool]) -> Option<usize> {
    let mut best: Option<usize> = None;
    for k in 0..corr.len() {
        if is_active[k] || !usable[k] {
            continue;
        }
        if best.is_none_or(|b| corr[k].abs() > corr[b].abs()) {
            best = Some(k);
        }
    }
    best
}

/// Hybrid LAR: the OLS refit on the path prefix with the smallest LOO error.
pub fn lar_select(dm: &DesignMatrix, max_steps: usize) -> Result<SparseSolution> {
    lar_select_with(dm, max_steps, None)
}

/// Hybrid LAR on a path that may stop early; see [`lar_path_with`].
pub fn lar_select_with(dm: &DesignMatrix, max_steps: usize, patience: Option<usize>) -> Result<SparseSolution> {
    let path = lar_path_with(dm, max_steps, patience)?;
    if path.order.is_empty() {
        return Err(Error::NumericalBreakdown("empty LARS path".into()));
    }
    let support = &path.order[..path.best_len()];
    solve_on_support(dm, support)
}
