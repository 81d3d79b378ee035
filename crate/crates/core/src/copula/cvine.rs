use rand::Rng;

use super::fit::{fit_pair_with, PairFit};
use super::pair::{Family, PairCopula};
use super::tau::kendall_tau_empirical;
use crate::error::{Error, Result};

/// Canonical vine. `pairs[t][j]` couples the tree-t root `order[t]` with
/// `order[t + 1 + j]`, conditioned on `order[..t]`. Each pair copula takes
/// the non-root variable as its first argument and the root as its second,
/// so `h_function(other, root)` is the conditional cdf of the non-root
/// variable.
#[derive(Debug, Clone, PartialEq)]
pub struct CvineModel {
    order: Vec<usize>,
    pairs: Vec<Vec<PairCopula>>,
}

#[derive(Debug, Clone)]
pub struct CvineFit {
    pub model: CvineModel,
    pub log_likelihood: f64,
    pub aic: f64,
    /// Per pair, aligned with `model.pairs()`.
    pub pair_fits: Vec<Vec<PairFit>>,
}

impl CvineModel {
    pub fn new(order: Vec<usize>, pairs: Vec<Vec<PairCopula>>) -> Result<Self> {
        let d = order.len();
        let mut seen = vec![false; d];
        for &o in &order {
            if o >= d || seen[o] {
                return Err(Error::InvalidInput(format!("order {order:?} is not a permutation")));
            }
            seen[o] = true;
        }
        if pairs.len() != d.saturating_sub(1) || pairs.iter().enumerate().any(|(t, row)| row.len() != d - 1 - t) {
            return Err(Error::InvalidInput("C-vine pair array has the wrong shape".into()));
        }
        Ok(Self { order, pairs })
    }

    /// All-independence vine in natural order.
    pub fn independent(d: usize) -> Self {
        let pairs = (0..d.saturating_sub(1)).map(|t| vec![PairCopula::independence(); d - 1 - t]).collect();
        Self { order: (0..d).collect(), pairs }
    }

    pub fn dim(&self) -> usize {
        self.order.len()
    }

    pub fn order(&self) -> &[usize] {
        &self.order
    }

    pub fn pairs(&self) -> &[Vec<PairCopula>] {
        &self.pairs
    }

    /// z with independent U(0,1) components when u follows the vine; z is
    /// indexed like u.
    pub fn rosenblatt(&self, u: &[f64]) -> Result<Vec<f64>> {
        let d = self.dim();
        if u.len() != d {
            return Err(Error::LengthMismatch(u.len(), d));
        }
        let mut z = vec![0.0; d];
        let mut cur: Vec<f64> = self.order.iter().map(|&o| u[o]).collect();
        for t in 0..d {
            z[self.order[t]] = cur[0];
            if t + 1 == d {
                break;
            }
            let root = cur[0];
            let next: Vec<f64> = (1..cur.len()).map(|k| self.pairs[t][k - 1].h_function(cur[k], root)).collect();
            cur = next;
        }
        Ok(z)
    }

    /// Inverse of [`rosenblatt`](Self::rosenblatt).
    pub fn inverse_rosenblatt(&self, z: &[f64]) -> Result<Vec<f64>> {
        let d = self.dim();
        if z.len() != d {
            return Err(Error::LengthMismatch(z.len(), d));
        }
        let mut u = vec![0.0; d];
        for k in 0..d {
            let mut w = z[self.order[k]];
            for t in (0..k).rev() {
                // z of the tree-t root is its conditional cdf given order[..t].
                w = self.pairs[t][k - t - 1].inv_h(w, z[self.order[t]])?;
            }
            u[self.order[k]] = w;
        }
        Ok(u)
    }

    pub fn log_density(&self, u: &[f64]) -> Result<f64> {
        let d = self.dim();
        if u.len() != d {
            return Err(Error::LengthMismatch(u.len(), d));
        }
        let mut ll = 0.0;
        let mut cur: Vec<f64> = self.order.iter().map(|&o| u[o]).collect();
        for t in 0..d.saturating_sub(1) {
            let root = cur[0];
            for k in 1..cur.len() {
                ll += self.pairs[t][k - 1].ln_pdf(cur[k], root);
            }
            cur = (1..cur.len()).map(|k| self.pairs[t][k - 1].h_function(cur[k], root)).collect();
        }
        Ok(ll)
    }

    /// n draws by inverse Rosenblatt of independent uniforms.
    pub fn sample<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Result<Vec<Vec<f64>>> {
        (0..n)
            .map(|_| {
                let z: Vec<f64> = (0..self.dim()).map(|_| rng.random::<f64>()).collect();
                self.inverse_rosenblatt(&z)
            })
            .collect()
    }
}

pub fn rosenblatt(c: &CvineModel, u: &[f64]) -> Result<Vec<f64>> {
    c.rosenblatt(u)
}

pub fn inverse_rosenblatt(c: &CvineModel, z: &[f64]) -> Result<Vec<f64>> {
    c.inverse_rosenblatt(z)
}

/// Pairwise |τ| matrix of the columns.
pub fn abs_tau_matrix(cols: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let d = cols.len();
    let mut m = vec![vec![0.0; d]; d];
    for i in 0..d {
        for j in i + 1..d {
            let t = kendall_tau_empirical(&cols[i], &cols[j]).abs();
            m[i][j] = t;
            m[j][i] = t;
        }
    }
    m
}

/// Greedy root ordering: each root maximises the summed |τ| to the variables
/// not yet placed; ties go to the lowest index.
pub fn select_cvine_order(pseudo_obs: &[Vec<f64>]) -> Result<Vec<usize>> {
    let cols = columns(pseudo_obs)?;
    Ok(order_from_tau(&abs_tau_matrix(&cols)))
}

pub(crate) fn order_from_tau(tau: &[Vec<f64>]) -> Vec<usize> {
    let d = tau.len();
    let mut remaining: Vec<usize> = (0..d).collect();
    let mut order = Vec::with_capacity(d);
    while !remaining.is_empty() {
        let mut best = remaining[0];
        let mut best_score = f64::NEG_INFINITY;
        for &i in &remaining {
            let s: f64 = remaining.iter().filter(|&&j| j != i).map(|&j| tau[i][j]).sum();
            if s > best_score + 1e-15 {
                best_score = s;
                best = i;
            }
        }
        order.push(best);
        remaining.retain(|&i| i != best);
    }
    order
}

pub(crate) fn columns(rows: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
    let d = rows.first().map(|r| r.len()).unwrap_or(0);
    if rows.iter().any(|r| r.len() != d) {
        return Err(Error::InvalidInput("ragged pseudo-observation rows".into()));
    }
    Ok((0..d).map(|j| rows.iter().map(|r| r[j]).collect()).collect())
}

/// Sequential C-vine fit: order by [`select_cvine_order`], then each tree's
/// pairs chosen by AIC on pseudo-observations from the shallower trees.
pub fn fit_cvine(pseudo_obs: &[Vec<f64>]) -> Result<CvineFit> {
    fit_cvine_with(pseudo_obs, &Family::ALL, None)
}

pub fn fit_cvine_with(pseudo_obs: &[Vec<f64>], families: &[Family], order: Option<Vec<usize>>) -> Result<CvineFit> {
    let cols = columns(pseudo_obs)?;
    let d = cols.len();
    if d < 2 {
        return Err(Error::InvalidInput("a vine needs at least two variables".into()));
    }
    let order = match order {
        Some(o) => {
            let mut seen = vec![false; d];
            if o.len() != d || o.iter().any(|&i| i >= d || std::mem::replace(&mut seen[i], true)) {
                return Err(Error::InvalidInput(format!("{o:?} is not a permutation of 0..{d}")));
            }
            o
        }
        None => order_from_tau(&abs_tau_matrix(&cols)),
    };
    let mut cur: Vec<Vec<f64>> = order.iter().map(|&o| cols[o].clone()).collect();
    let mut pairs = Vec::with_capacity(d - 1);
    let mut pair_fits = Vec::with_capacity(d - 1);
    let mut ll = 0.0;
    let mut aic = 0.0;
    for _t in 0..d - 1 {
        let root = &cur[0];
        let fits: Vec<PairFit> = (1..cur.len()).map(|k| fit_pair_with(&cur[k], root, families)).collect::<Result<_>>()?;
        for f in &fits {
            ll += f.log_likelihood;
            aic += f.aic;
        }
        let next: Vec<Vec<f64>> = (1..cur.len())
            .map(|k| cur[k].iter().zip(root).map(|(a, b)| fits[k - 1].copula.h_function(*a, *b)).collect())
            .collect();
        pairs.push(fits.iter().map(|f| f.copula.clone()).collect());
        pair_fits.push(fits);
        cur = next;
    }
    Ok(CvineFit { model: CvineModel::new(order, pairs)?, log_likelihood: ll, aic, pair_fits })
}
