use std::collections::HashMap;

use rand::Rng;

use super::cvine::{abs_tau_matrix, columns, CvineModel};
use super::fit::fit_pair_with;
use super::pair::{Family, PairCopula};
use crate::error::{Error, Result};

/// Edge {a, b} | D. The pair copula takes F(a | D) first and F(b | D) second.
#[derive(Debug, Clone, PartialEq)]
pub struct RvineEdge {
    pub a: usize,
    pub b: usize,
    /// Sorted conditioning set.
    pub cond: Vec<usize>,
    pub copula: PairCopula,
}

impl RvineEdge {
    fn full_set(&self) -> Vec<usize> {
        let mut s = self.cond.clone();
        s.push(self.a);
        s.push(self.b);
        s.sort_unstable();
        s
    }
}

/// General regular vine, used for evaluation and sampling only.
#[derive(Debug, Clone, PartialEq)]
pub struct RvineSpec {
    d: usize,
    trees: Vec<Vec<RvineEdge>>,
    /// Variable order σ such that F(σ_k | σ_1..σ_{k−1}) is an edge h-value.
    sampling_order: Vec<usize>,
}

type Memo = HashMap<(usize, Vec<usize>), f64>;

impl RvineSpec {
    pub fn new(d: usize, mut trees: Vec<Vec<RvineEdge>>) -> Result<Self> {
        for tree in trees.iter_mut() {
            for e in tree.iter_mut() {
                e.cond.sort_unstable();
            }
        }
        validate(d, &trees)?;
        let sampling_order = find_sampling_order(d, &trees)
            .ok_or_else(|| Error::InvalidInput("vine admits no sequential sampling order".into()))?;
        Ok(Self { d, trees, sampling_order })
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn trees(&self) -> &[Vec<RvineEdge>] {
        &self.trees
    }

    pub fn sampling_order(&self) -> &[usize] {
        &self.sampling_order
    }

    pub fn from_cvine(c: &CvineModel) -> Result<Self> {
        let o = c.order();
        let trees = c
            .pairs()
            .iter()
            .enumerate()
            .map(|(t, row)| {
                row.iter()
                    .enumerate()
                    .map(|(j, pc)| RvineEdge { a: o[t + 1 + j], b: o[t], cond: o[..t].to_vec(), copula: pc.clone() })
                    .collect()
            })
            .collect();
        Self::new(c.dim(), trees)
    }

    /// D-vine along `order`; `pairs[i][j]` couples order[j] and order[j+i+1].
    pub fn dvine(order: &[usize], pairs: Vec<Vec<PairCopula>>) -> Result<Self> {
        let trees = dvine_structure(order)
            .into_iter()
            .zip(pairs)
            .map(|(row, pcs)| {
                if row.len() != pcs.len() {
                    return Err(Error::InvalidInput("D-vine pair array has the wrong shape".into()));
                }
                Ok(row.into_iter().zip(pcs).map(|((a, b, cond), copula)| RvineEdge { a, b, cond, copula }).collect())
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(order.len(), trees)
    }

    fn find_edge(&self, j: usize, s: &[usize]) -> Option<(&RvineEdge, usize)> {
        let t = s.len().checked_sub(1)?;
        self.trees.get(t)?.iter().find_map(|e| {
            let partner = if e.a == j {
                e.b
            } else if e.b == j {
                e.a
            } else {
                return None;
            };
            let mut rest: Vec<usize> = s.iter().copied().filter(|&x| x != partner).collect();
            rest.sort_unstable();
            (s.contains(&partner) && rest == e.cond).then_some((e, partner))
        })
    }

    /// F(j | S) for sorted S.
    fn cond_value(&self, j: usize, s: &[usize], u: &[f64], memo: &mut Memo) -> Result<f64> {
        if s.is_empty() {
            return Ok(u[j]);
        }
        if let Some(v) = memo.get(&(j, s.to_vec())) {
            return Ok(*v);
        }
        let (e, k) = self
            .find_edge(j, s)
            .ok_or_else(|| Error::InvalidInput(format!("F({j} | {s:?}) is not available from the vine")))?;
        let fj = self.cond_value(j, &e.cond, u, memo)?;
        let fk = self.cond_value(k, &e.cond, u, memo)?;
        let v = if e.a == j { e.copula.h_function(fj, fk) } else { e.copula.h_function_rev(fk, fj) };
        memo.insert((j, s.to_vec()), v);
        Ok(v)
    }

    pub fn log_density(&self, u: &[f64]) -> Result<f64> {
        if u.len() != self.d {
            return Err(Error::LengthMismatch(u.len(), self.d));
        }
        let mut memo = Memo::new();
        let mut ll = 0.0;
        for tree in &self.trees {
            for e in tree {
                let fa = self.cond_value(e.a, &e.cond, u, &mut memo)?;
                let fb = self.cond_value(e.b, &e.cond, u, &mut memo)?;
                ll += e.copula.ln_pdf(fa, fb);
            }
        }
        Ok(ll)
    }

    /// z_{σ_k} = F(σ_k | σ_1..σ_{k−1}) along the sampling order.
    pub fn rosenblatt(&self, u: &[f64]) -> Result<Vec<f64>> {
        if u.len() != self.d {
            return Err(Error::LengthMismatch(u.len(), self.d));
        }
        let mut memo = Memo::new();
        let mut z = vec![0.0; self.d];
        for k in 0..self.d {
            let mut prev = self.sampling_order[..k].to_vec();
            prev.sort_unstable();
            z[self.sampling_order[k]] = self.cond_value(self.sampling_order[k], &prev, u, &mut memo)?;
        }
        Ok(z)
    }

    pub fn inverse_rosenblatt(&self, z: &[f64]) -> Result<Vec<f64>> {
        if z.len() != self.d {
            return Err(Error::LengthMismatch(z.len(), self.d));
        }
        let mut u = vec![0.0; self.d];
        let mut memo = Memo::new();
        for k in 0..self.d {
            let j = self.sampling_order[k];
            let mut s = self.sampling_order[..k].to_vec();
            s.sort_unstable();
            let mut w = z[j];
            while !s.is_empty() {
                let (e, partner) = self
                    .find_edge(j, &s)
                    .ok_or_else(|| Error::InvalidInput(format!("F({j} | {s:?}) is not available from the vine")))?;
                let fk = self.cond_value(partner, &e.cond, &u, &mut memo)?;
                w = if e.a == j { e.copula.inv_h(w, fk)? } else { e.copula.inv_h_rev(w, fk)? };
                s = e.cond.clone();
            }
            u[j] = w;
        }
        Ok(u)
    }

    pub fn sample<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Result<Vec<Vec<f64>>> {
        (0..n)
            .map(|_| {
                let z: Vec<f64> = (0..self.d).map(|_| rng.random::<f64>()).collect();
                self.inverse_rosenblatt(&z)
            })
            .collect()
    }
}

fn validate(d: usize, trees: &[Vec<RvineEdge>]) -> Result<()> {
    let bad = |m: String| Err(Error::InvalidInput(m));
    if d < 2 || trees.len() != d - 1 {
        return bad(format!("expected {} trees for d = {d}", d.saturating_sub(1)));
    }
    for (i, tree) in trees.iter().enumerate() {
        if tree.len() != d - 1 - i {
            return bad(format!("tree {} has {} edges, expected {}", i + 1, tree.len(), d - 1 - i));
        }
        for e in tree {
            if e.a == e.b || e.a >= d || e.b >= d || e.cond.len() != i || e.cond.contains(&e.a) || e.cond.contains(&e.b) {
                return bad(format!("malformed edge {{{}, {}}} | {:?} in tree {}", e.a, e.b, e.cond, i + 1));
            }
        }
    }
    // Tree 1 must be a spanning tree on the variables.
    let mut uf = UnionFind::new(d);
    for e in &trees[0] {
        if !uf.union(e.a, e.b) {
            return bad("tree 1 contains a cycle".into());
        }
    }
    // Each later edge joins two edges of the previous tree that share a node.
    for i in 1..trees.len() {
        let prev: Vec<Vec<usize>> = trees[i - 1].iter().map(|e| e.full_set()).collect();
        let mut uf = UnionFind::new(prev.len());
        for e in &trees[i] {
            let full = e.full_set();
            let mut parents = None;
            'outer: for p in 0..prev.len() {
                for q in p + 1..prev.len() {
                    let mut union: Vec<usize> = prev[p].iter().chain(&prev[q]).copied().collect();
                    union.sort_unstable();
                    union.dedup();
                    let inter: Vec<usize> = prev[p].iter().copied().filter(|x| prev[q].contains(x)).collect();
                    if union == full && inter == e.cond {
                        parents = Some((p, q));
                        break 'outer;
                    }
                }
            }
            let Some((p, q)) = parents else {
                return bad(format!("edge {{{}, {}}} | {:?} violates the proximity condition", e.a, e.b, e.cond));
            };
            if !uf.union(p, q) {
                return bad(format!("tree {} contains a cycle", i + 1));
            }
        }
    }
    Ok(())
}

struct UnionFind(Vec<usize>);

impl UnionFind {
    fn new(n: usize) -> Self {
        Self((0..n).collect())
    }

    fn find(&mut self, x: usize) -> usize {
        let mut r = x;
        while self.0[r] != r {
            r = self.0[r];
        }
        self.0[x] = r;
        r
    }

    fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        self.0[ra] = rb;
        true
    }
}

/// Peels variables off the top tree, preferring its first argument. The
/// peeled variable must sit in exactly one edge per tree and in no
/// conditioning set.
fn find_sampling_order(d: usize, trees: &[Vec<RvineEdge>]) -> Option<Vec<usize>> {
    let mut vars: Vec<usize> = (0..d).collect();
    let mut trees: Vec<Vec<&RvineEdge>> = trees.iter().map(|t| t.iter().collect()).collect();
    let mut rev = Vec::with_capacity(d);
    while vars.len() > 1 {
        let top = trees.last()?.first()?;
        let pick = [top.a, top.b].into_iter().find(|&x| {
            trees.iter().all(|t| t.iter().filter(|e| e.a == x || e.b == x).count() == 1 && t.iter().all(|e| !e.cond.contains(&x)))
        })?;
        rev.push(pick);
        vars.retain(|&v| v != pick);
        trees.pop();
        for t in trees.iter_mut() {
            t.retain(|e| e.a != pick && e.b != pick);
        }
    }
    rev.push(vars[0]);
    rev.reverse();
    Some(rev)
}

/// (a, b, D) triples of a D-vine along `order`.
pub fn dvine_structure(order: &[usize]) -> Vec<Vec<(usize, usize, Vec<usize>)>> {
    let d = order.len();
    (0..d.saturating_sub(1))
        .map(|i| {
            (0..d - 1 - i)
                .map(|j| {
                    let mut cond = order[j + 1..j + 1 + i].to_vec();
                    cond.sort_unstable();
                    (order[j], order[j + i + 1], cond)
                })
                .collect()
        })
        .collect()
}

/// Path maximising the summed |τ| of neighbours: exhaustive for d ≤ 8,
/// nearest-neighbour greedy from the best starting node beyond.
pub fn dvine_order(pseudo_obs: &[Vec<f64>]) -> Result<Vec<usize>> {
    let cols = columns(pseudo_obs)?;
    Ok(dvine_order_from_tau(&abs_tau_matrix(&cols)))
}

pub(crate) fn dvine_order_from_tau(tau: &[Vec<f64>]) -> Vec<usize> {
    let d = tau.len();
    let score = |p: &[usize]| p.windows(2).map(|w| tau[w[0]][w[1]]).sum::<f64>();
    if d <= 8 {
        let mut perm: Vec<usize> = (0..d).collect();
        let mut best = perm.clone();
        let mut best_s = score(&perm);
        while next_permutation(&mut perm) {
            // A path and its reverse score the same; keep the one starting lower.
            if perm.first() > perm.last() {
                continue;
            }
            let s = score(&perm);
            if s > best_s + 1e-15 {
                best_s = s;
                best = perm.clone();
            }
        }
        return best;
    }
    let mut best: Option<(f64, Vec<usize>)> = None;
    for start in 0..d {
        let mut path = vec![start];
        let mut used = vec![false; d];
        used[start] = true;
        while path.len() < d {
            let last = *path.last().unwrap();
            let next = (0..d).filter(|&j| !used[j]).max_by(|&i, &j| tau[last][i].total_cmp(&tau[last][j]).then(j.cmp(&i))).unwrap();
            used[next] = true;
            path.push(next);
        }
        let s = score(&path);
        if best.as_ref().is_none_or(|b| s > b.0 + 1e-15) {
            best = Some((s, path));
        }
    }
    best.map(|b| b.1).unwrap_or_default()
}

fn next_permutation(p: &mut [usize]) -> bool {
    let n = p.len();
    if n < 2 {
        return false;
    }
    let mut i = n - 1;
    while i > 0 && p[i - 1] >= p[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = n - 1;
    while p[j] <= p[i - 1] {
        j -= 1;
    }
    p.swap(i - 1, j);
    p[i..].reverse();
    true
}

/// Sequential AIC fit of a given vine structure.
pub fn fit_rvine_structure(
    pseudo_obs: &[Vec<f64>],
    structure: Vec<Vec<(usize, usize, Vec<usize>)>>,
    families: &[Family],
) -> Result<RvineSpec> {
    let cols = columns(pseudo_obs)?;
    let d = cols.len();
    let n = cols.first().map(|c| c.len()).unwrap_or(0);
    let mut cond_cols: HashMap<(usize, Vec<usize>), Vec<f64>> = HashMap::new();
    for (j, c) in cols.iter().enumerate() {
        cond_cols.insert((j, Vec::new()), c.clone());
    }
    let mut trees: Vec<Vec<RvineEdge>> = Vec::new();
    for row in structure {
        let mut tree = Vec::new();
        for (a, b, mut cond) in row {
            cond.sort_unstable();
            let ua = cond_cols
                .get(&(a, cond.clone()))
                .ok_or_else(|| Error::InvalidInput(format!("F({a} | {cond:?}) unavailable")))?
                .clone();
            let ub = cond_cols
                .get(&(b, cond.clone()))
                .ok_or_else(|| Error::InvalidInput(format!("F({b} | {cond:?}) unavailable")))?
                .clone();
            let fit = fit_pair_with(&ua, &ub, families)?;
            let pc = fit.copula;
            let mut sa = cond.clone();
            sa.push(b);
            sa.sort_unstable();
            let mut sb = cond.clone();
            sb.push(a);
            sb.sort_unstable();
            cond_cols.insert((a, sa), (0..n).map(|i| pc.h_function(ua[i], ub[i])).collect());
            cond_cols.insert((b, sb), (0..n).map(|i| pc.h_function_rev(ua[i], ub[i])).collect());
            tree.push(RvineEdge { a, b, cond, copula: pc });
        }
        trees.push(tree);
    }
    RvineSpec::new(d, trees)
}

/// D-vine with the |τ|-maximising path order, fitted sequentially.
pub fn fit_dvine(pseudo_obs: &[Vec<f64>]) -> Result<RvineSpec> {
    let order = dvine_order(pseudo_obs)?;
    fit_rvine_structure(pseudo_obs, dvine_structure(&order), &Family::ALL)
}
