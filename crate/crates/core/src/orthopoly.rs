//! Univariate orthonormal polynomials defined by three-term recurrences.

use crate::error::{Error, Result};
use crate::marginals::{KdeMarginal, Marginal};
use crate::quadrature::{gauss_hermite_prob, gauss_legendre};

pub const MAX_DEGREE: usize = 15;
/// Gauss–Hermite nodes per kernel; exact for polynomial degree 2·20 − 1.
const KERNEL_NODES: usize = 20;
const GRAM_TOL: f64 = 1e-4;

/// Orthonormal family φ_0..φ_p with
/// √b_{k+1} φ_{k+1}(x) = (x − a_k) φ_k(x) − √b_k φ_{k−1}(x), φ_0 = 1, b_0 = 1.
#[derive(Debug, Clone, PartialEq)]
pub struct OrthonormalBasis1D {
    pub recurrence_a: Vec<f64>,
    pub recurrence_b: Vec<f64>,
    /// L2 norms of the monic polynomials, √(b_0 b_1 ⋯ b_k).
    pub normalizers: Vec<f64>,
}

impl OrthonormalBasis1D {
    pub fn from_recurrence(recurrence_a: Vec<f64>, recurrence_b: Vec<f64>) -> Result<Self> {
        if recurrence_a.is_empty() || recurrence_a.len() != recurrence_b.len() {
            return Err(Error::LengthMismatch(recurrence_a.len(), recurrence_b.len()));
        }
        if recurrence_b.iter().any(|&b| !(b > 0.0 && b.is_finite())) || recurrence_a.iter().any(|a| !a.is_finite()) {
            return Err(Error::InvalidInput("recurrence coefficients must be finite with b > 0".into()));
        }
        let mut normalizers = Vec::with_capacity(recurrence_b.len());
        let mut acc = 1.0;
        for &b in &recurrence_b {
            acc *= b.sqrt();
            normalizers.push(acc);
        }
        Ok(Self { recurrence_a, recurrence_b, normalizers })
    }

    pub fn degree_max(&self) -> usize {
        self.recurrence_a.len() - 1
    }

    /// φ_0(x), …, φ_p(x).
    pub fn eval(&self, x: f64) -> Vec<f64> {
        let mut out = vec![0.0; self.degree_max() + 1];
        self.eval_into(x, &mut out);
        out
    }

    /// Fills `out` with φ_0..φ_{len−1}; `out` may be shorter than p + 1.
    pub fn eval_into(&self, x: f64, out: &mut [f64]) {
        if out.is_empty() {
            return;
        }
        out[0] = 1.0;
        if out.len() == 1 {
            return;
        }
        let a = &self.recurrence_a;
        let b = &self.recurrence_b;
        out[1] = (x - a[0]) / b[1].sqrt();
        for k in 1..out.len() - 1 {
            out[k + 1] = ((x - a[k]) * out[k] - b[k].sqrt() * out[k - 1]) / b[k + 1].sqrt();
        }
    }
}

/// Orthonormal shifted Legendre polynomials for the uniform density on [lo, hi].
pub fn legendre_basis(lo: f64, hi: f64, p: usize) -> Result<OrthonormalBasis1D> {
    if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
        return Err(Error::InvalidInterval { lo, hi });
    }
    check_degree(p)?;
    let c = 0.5 * (lo + hi);
    let s2 = (0.5 * (hi - lo)).powi(2);
    let a = vec![c; p + 1];
    let b = (0..=p)
        .map(|k| {
            if k == 0 {
                1.0
            } else {
                let k2 = (k * k) as f64;
                s2 * k2 / (4.0 * k2 - 1.0)
            }
        })
        .collect();
    OrthonormalBasis1D::from_recurrence(a, b)
}

/// Discretised Stieltjes procedure against a marginal density.
pub fn stieltjes_basis(density: &Marginal, p: usize) -> Result<OrthonormalBasis1D> {
    check_degree(p)?;
    let (x, w) = match density {
        Marginal::Kde(k) => kde_rule(k),
        Marginal::Uniform(u) => {
            let (t, wt) = gauss_legendre(32);
            let c = 0.5 * (u.lo() + u.hi());
            let s = 0.5 * (u.hi() - u.lo());
            (t.iter().map(|v| c + s * v).collect(), wt.iter().map(|v| 0.5 * v).collect())
        }
    };
    stieltjes_discrete(&x, &w, p)
}

/// Quadrature for a Gaussian-kernel mixture: a Gauss–Hermite rule per kernel.
pub fn kde_rule(k: &KdeMarginal) -> (Vec<f64>, Vec<f64>) {
    let (t, wt) = gauss_hermite_prob(KERNEL_NODES);
    let n = k.n() as f64;
    let h = k.bandwidth();
    let mut x = Vec::with_capacity(k.n() * KERNEL_NODES);
    let mut w = Vec::with_capacity(k.n() * KERNEL_NODES);
    for &c in k.centers() {
        for (ti, wi) in t.iter().zip(wt) {
            x.push(c + h * ti);
            w.push(wi / n);
        }
    }
    (x, w)
}

/// Stieltjes (Lanczos form) on a discrete measure with weights summing to 1.
pub fn stieltjes_discrete(x: &[f64], w: &[f64], p: usize) -> Result<OrthonormalBasis1D> {
    check_degree(p)?;
    let mass: f64 = w.iter().sum();
    let m = x.len();
    let mut prev = vec![0.0; m];
    let mut cur: Vec<f64> = vec![1.0 / mass.sqrt(); m];
    let mut a = Vec::with_capacity(p + 1);
    let mut b: Vec<f64> = vec![1.0];
    let mut next = vec![0.0; m];
    for k in 0..=p {
        let ak: f64 = (0..m).map(|i| w[i] * x[i] * cur[i] * cur[i]).sum();
        a.push(ak);
        if k == p {
            break;
        }
        let sb = b[k].sqrt();
        for i in 0..m {
            next[i] = (x[i] - ak) * cur[i] - if k > 0 { sb * prev[i] } else { 0.0 };
        }
        // One pass of reorthogonalisation against the two previous vectors.
        let c1: f64 = (0..m).map(|i| w[i] * next[i] * cur[i]).sum();
        let c0: f64 = (0..m).map(|i| w[i] * next[i] * prev[i]).sum();
        for i in 0..m {
            next[i] -= c1 * cur[i] + c0 * prev[i];
        }
        let bk1: f64 = (0..m).map(|i| w[i] * next[i] * next[i]).sum();
        if !(bk1 > 0.0 && bk1.is_finite()) {
            return Err(Error::QuadratureFailure { degree: k + 1, deviation: f64::INFINITY });
        }
        b.push(bk1);
        let s = bk1.sqrt();
        for v in next.iter_mut() {
            *v /= s;
        }
        std::mem::swap(&mut prev, &mut cur);
        std::mem::swap(&mut cur, &mut next);
    }
    let basis = OrthonormalBasis1D::from_recurrence(a, b)?;
    let dev = gram_deviation(&basis, x, w);
    if dev > GRAM_TOL {
        return Err(Error::QuadratureFailure { degree: p, deviation: dev });
    }
    Ok(basis)
}

/// max |G − I| for the Gram matrix of `basis` under the rule (x, w).
pub fn gram_deviation(basis: &OrthonormalBasis1D, x: &[f64], w: &[f64]) -> f64 {
    let q = basis.degree_max() + 1;
    let mut g = vec![0.0; q * q];
    let mut v = vec![0.0; q];
    for (xi, wi) in x.iter().zip(w) {
        basis.eval_into(*xi, &mut v);
        for r in 0..q {
            let wr = wi * v[r];
            for c in r..q {
                g[r * q + c] += wr * v[c];
            }
        }
    }
    let mut dev: f64 = 0.0;
    for r in 0..q {
        for c in r..q {
            let target = if r == c { 1.0 } else { 0.0 };
            dev = dev.max((g[r * q + c] - target).abs());
        }
    }
    dev
}

fn check_degree(p: usize) -> Result<()> {
    if p > MAX_DEGREE {
        return Err(Error::InvalidInput(format!("degree {p} exceeds the cap of {MAX_DEGREE}")));
    }
    Ok(())
}
