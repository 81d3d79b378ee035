//! Truncated multi-index sets and tensor-product basis evaluation.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::orthopoly::OrthonormalBasis1D;

pub const MAX_TERMS: u128 = 10_000_000;
const NORM_EPS: f64 = 1e-10;

pub type MultiIndex = Vec<u32>;

pub fn total_degree(alpha: &[u32]) -> u32 {
    alpha.iter().sum()
}

pub fn q_norm(alpha: &[u32], q: f64) -> f64 {
    alpha.iter().filter(|&&a| a > 0).map(|&a| (a as f64).powf(q)).sum::<f64>().powf(1.0 / q)
}

pub fn rank(alpha: &[u32]) -> usize {
    alpha.iter().filter(|&&a| a > 0).count()
}

/// Indices sorted by total degree, then in descending lexicographic order
/// within a degree, so (1,0) precedes (0,1).
#[derive(Debug, Clone, PartialEq)]
pub struct MultiIndexSet {
    pub d: usize,
    pub p: u32,
    pub q: f64,
    pub r: usize,
    pub indices: Vec<MultiIndex>,
}

pub fn binomial(n: u64, k: u64) -> Option<u128> {
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc.checked_mul((n - i) as u128)? / (i as u128 + 1);
    }
    Some(acc)
}

/// All α with |α| ≤ p.
pub fn total_degree_set(d: usize, p: u32) -> Result<MultiIndexSet> {
    if d == 0 {
        return Err(Error::InvalidInput("dimension must be at least 1".into()));
    }
    let size = binomial((d as u64) + p as u64, p as u64).unwrap_or(u128::MAX);
    if size > MAX_TERMS {
        return Err(Error::SizeOverflow(size));
    }
    let mut indices = Vec::with_capacity(size as usize);
    let mut cur = vec![0u32; d];
    for t in 0..=p {
        compositions(t, 0, &mut cur, &mut indices);
    }
    Ok(MultiIndexSet { d, p, q: 1.0, r: d, indices })
}

fn compositions(rem: u32, pos: usize, cur: &mut Vec<u32>, out: &mut Vec<MultiIndex>) {
    if pos == cur.len() - 1 {
        cur[pos] = rem;
        out.push(cur.clone());
        return;
    }
    for v in (0..=rem).rev() {
        cur[pos] = v;
        compositions(rem - v, pos + 1, cur, out);
    }
    cur[pos] = 0;
}

/// Keeps α with ‖α‖_q ≤ p.
pub fn hyperbolic_filter(s: &MultiIndexSet, q: f64) -> Result<MultiIndexSet> {
    if !(q > 0.0 && q <= 1.0) {
        return Err(Error::InvalidInput(format!("q = {q} not in (0, 1]")));
    }
    let bound = s.p as f64 * (1.0 + NORM_EPS);
    Ok(MultiIndexSet {
        q: s.q.min(q),
        indices: s.indices.iter().filter(|a| q_norm(a, q) <= bound).cloned().collect(),
        ..s.clone()
    })
}

/// Keeps α with at most r nonzero entries.
pub fn interaction_filter(s: &MultiIndexSet, r: usize) -> Result<MultiIndexSet> {
    if r == 0 {
        return Err(Error::InvalidInput("r must be at least 1".into()));
    }
    Ok(MultiIndexSet {
        r: s.r.min(r),
        indices: s.indices.iter().filter(|a| rank(a) <= r).cloned().collect(),
        ..s.clone()
    })
}

impl MultiIndexSet {
    /// Combined truncation 𝒜^{d,p,q,r}.
    pub fn truncated(d: usize, p: u32, q: f64, r: usize) -> Result<Self> {
        let s = total_degree_set(d, p)?;
        let s = interaction_filter(&s, r)?;
        hyperbolic_filter(&s, q)
    }

    /// Wraps explicit indices (used when loading models).
    pub fn from_indices(d: usize, q: f64, r: usize, indices: Vec<MultiIndex>) -> Result<Self> {
        if indices.iter().any(|a| a.len() != d) {
            return Err(Error::InvalidInput("multi-index length differs from d".into()));
        }
        let p = indices.iter().map(|a| total_degree(a)).max().unwrap_or(0);
        Ok(Self { d, p, q, r, indices })
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    /// Largest degree used in each dimension.
    pub fn max_degrees(&self) -> Vec<u32> {
        let mut m = vec![0; self.d];
        for a in &self.indices {
            for (mi, &ai) in m.iter_mut().zip(a) {
                *mi = (*mi).max(ai);
            }
        }
        m
    }
}

fn check_bases(bases: &[OrthonormalBasis1D], s: &MultiIndexSet) -> Result<()> {
    if bases.len() != s.d {
        return Err(Error::LengthMismatch(bases.len(), s.d));
    }
    for (dim, (b, &need)) in bases.iter().zip(&s.max_degrees()).enumerate() {
        if b.degree_max() < need as usize {
            return Err(Error::DegreeMismatch { dim, have: b.degree_max(), need: need as usize });
        }
    }
    Ok(())
}

/// Ψ_α(x) = Π_i φ_{α_i}(x_i) for every α in `s`.
pub fn eval_design_row(bases: &[OrthonormalBasis1D], s: &MultiIndexSet, x: &[f64]) -> Result<Vec<f64>> {
    check_bases(bases, s)?;
    if x.len() != s.d {
        return Err(Error::LengthMismatch(x.len(), s.d));
    }
    let mut row = vec![0.0; s.len()];
    let mut scratch = univariate_tables(s);
    fill_row(bases, s, x, &mut scratch, &mut row);
    Ok(row)
}

fn univariate_tables(s: &MultiIndexSet) -> Vec<Vec<f64>> {
    s.max_degrees().iter().map(|&m| vec![0.0; m as usize + 1]).collect()
}

fn fill_row(bases: &[OrthonormalBasis1D], s: &MultiIndexSet, x: &[f64], tab: &mut [Vec<f64>], row: &mut [f64]) {
    for ((b, t), &xi) in bases.iter().zip(tab.iter_mut()).zip(x) {
        b.eval_into(xi, t);
    }
    for (out, a) in row.iter_mut().zip(&s.indices) {
        let mut v = 1.0;
        for (t, &ai) in tab.iter().zip(a) {
            if ai > 0 {
                v *= t[ai as usize];
            }
        }
        *out = v;
    }
}

/// Design matrix with one row per point of `xs` (each of length d).
pub fn design_matrix(bases: &[OrthonormalBasis1D], s: &MultiIndexSet, xs: &[Vec<f64>]) -> Result<DMatrix<f64>> {
    check_bases(bases, s)?;
    let mut a = DMatrix::zeros(xs.len(), s.len());
    let mut tab = univariate_tables(s);
    let mut row = vec![0.0; s.len()];
    for (j, x) in xs.iter().enumerate() {
        if x.len() != s.d {
            return Err(Error::LengthMismatch(x.len(), s.d));
        }
        fill_row(bases, s, x, &mut tab, &mut row);
        for (k, v) in row.iter().enumerate() {
            a[(j, k)] = *v;
        }
    }
    Ok(a)
}

/// Σ_k c_k Ψ_{α_k}(x) without materialising the row.
pub fn eval_expansion(bases: &[OrthonormalBasis1D], s: &MultiIndexSet, coefficients: &[f64], x: &[f64], tab: &mut Vec<Vec<f64>>) -> f64 {
    if tab.len() != s.d {
        *tab = univariate_tables(s);
    }
    for ((b, t), &xi) in bases.iter().zip(tab.iter_mut()).zip(x) {
        b.eval_into(xi, t);
    }
    let mut y = 0.0;
    for (c, a) in coefficients.iter().zip(&s.indices) {
        if *c == 0.0 {
            continue;
        }
        let mut v = *c;
        for (t, &ai) in tab.iter().zip(a) {
            if ai > 0 {
                v *= t[ai as usize];
            }
        }
        y += v;
    }
    y
}
