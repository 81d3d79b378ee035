use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{Benchmark, Dataset};
use crate::copula::{CvineModel, Family, PairCopula, Rotation};
use crate::error::{Error, Result};
use crate::special::{norm_quantile, EULER_GAMMA};

pub const N_BARS: usize = 23;
pub const SPAN: f64 = 24.0;
pub const HEIGHT: f64 = 2.0;
/// Index of the midspan bottom-chord node (12, 0).
pub const MID_NODE: usize = 3;

pub const E_MEAN: f64 = 2.1e11;
pub const E_STD: f64 = 2.1e10;
pub const A1_MEAN: f64 = 2e-3;
pub const A1_STD: f64 = 2e-4;
pub const A2_MEAN: f64 = 1e-3;
pub const A2_STD: f64 = 1e-4;
pub const LOAD_MEAN: f64 = 5e4;
pub const LOAD_STD: f64 = 7.5e3;
pub const LOAD_THETA: f64 = 1.1;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BarGroup {
    /// Upper and lower chords, properties (E1, A1).
    Horizontal,
    /// Diagonals, properties (E2, A2).
    Diagonal,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrussSpec {
    pub nodes: Vec<[f64; 2]>,
    pub bars: Vec<(usize, usize, BarGroup)>,
    /// Upper nodes carrying P1..P6.
    pub load_nodes: Vec<usize>,
    /// (node, dof) pairs held fixed; dof 0 is x, 1 is y.
    pub fixed: Vec<(usize, usize)>,
}

impl TrussSpec {
    /// Lower chord at x = 0, 4, …, 24 (nodes 0..=6), upper chord at
    /// x = 2, 6, …, 22 (nodes 7..=12), pin at node 0 and roller at node 6.
    pub fn standard() -> Self {
        let bay = SPAN / 6.0;
        let mut nodes: Vec<[f64; 2]> = (0..7).map(|i| [bay * i as f64, 0.0]).collect();
        nodes.extend((0..6).map(|i| [bay * (i as f64 + 0.5), HEIGHT]));
        let mut bars = Vec::with_capacity(N_BARS);
        for i in 0..6 {
            bars.push((i, i + 1, BarGroup::Horizontal));
        }
        for i in 0..5 {
            bars.push((7 + i, 8 + i, BarGroup::Horizontal));
        }
        for i in 0..6 {
            bars.push((i, 7 + i, BarGroup::Diagonal));
            bars.push((7 + i, i + 1, BarGroup::Diagonal));
        }
        Self { nodes, bars, load_nodes: (7..13).collect(), fixed: vec![(0, 0), (0, 1), (6, 1)] }
    }
}

/// Downward midspan deflection of the standard truss.
pub fn truss_solve(e1: f64, e2: f64, a1: f64, a2: f64, p: &[f64; 6]) -> Result<f64> {
    truss_solve_spec(&TrussSpec::standard(), e1, e2, a1, a2, p)
}

pub fn truss_solve_spec(spec: &TrussSpec, e1: f64, e2: f64, a1: f64, a2: f64, p: &[f64]) -> Result<f64> {
    if [e1, e2, a1, a2].iter().any(|v| !(*v > 0.0)) {
        return Err(Error::InvalidInput("moduli and areas must be positive".into()));
    }
    if p.len() != spec.load_nodes.len() {
        return Err(Error::LengthMismatch(p.len(), spec.load_nodes.len()));
    }
    let ndof = 2 * spec.nodes.len();
    let mut k = DMatrix::<f64>::zeros(ndof, ndof);
    for &(i, j, g) in &spec.bars {
        let (e, a) = match g {
            BarGroup::Horizontal => (e1, a1),
            BarGroup::Diagonal => (e2, a2),
        };
        let dx = spec.nodes[j][0] - spec.nodes[i][0];
        let dy = spec.nodes[j][1] - spec.nodes[i][1];
        let l = dx.hypot(dy);
        let (c, s) = (dx / l, dy / l);
        let kk = e * a / l;
        let local = [[c * c, c * s], [c * s, s * s]];
        let dofs = [2 * i, 2 * i + 1, 2 * j, 2 * j + 1];
        for r in 0..4 {
            for q in 0..4 {
                let sign = if (r < 2) == (q < 2) { 1.0 } else { -1.0 };
                k[(dofs[r], dofs[q])] += sign * kk * local[r % 2][q % 2];
            }
        }
    }
    let mut f = DVector::<f64>::zeros(ndof);
    for (&node, &load) in spec.load_nodes.iter().zip(p) {
        f[2 * node + 1] -= load;
    }
    let fixed: Vec<usize> = spec.fixed.iter().map(|&(n, d)| 2 * n + d).collect();
    let free: Vec<usize> = (0..ndof).filter(|i| !fixed.contains(i)).collect();
    let kf = DMatrix::from_fn(free.len(), free.len(), |r, q| k[(free[r], free[q])]);
    let ff = DVector::from_fn(free.len(), |r, _| f[free[r]]);
    let chol = kf.cholesky().ok_or(Error::SingularStiffness)?;
    let u = chol.solve(&ff);
    let pos = free.iter().position(|&i| i == 2 * MID_NODE + 1).ok_or(Error::SingularStiffness)?;
    Ok(-u[pos])
}

fn lognormal_params(mean: f64, std: f64) -> (f64, f64) {
    let s2 = (1.0 + (std / mean).powi(2)).ln();
    (mean.ln() - 0.5 * s2, s2.sqrt())
}

pub fn lognormal_quantile(u: f64, mean: f64, std: f64) -> f64 {
    let (mu, s) = lognormal_params(mean, std);
    (mu + s * norm_quantile(u)).exp()
}

/// (α, β) of the Gumbel (maximum) law with the given mean and std.
pub fn gumbel_params(mean: f64, std: f64) -> (f64, f64) {
    let beta = 6f64.sqrt() * std / std::f64::consts::PI;
    (mean - EULER_GAMMA * beta, beta)
}

pub fn gumbel_quantile(u: f64, mean: f64, std: f64) -> f64 {
    let (alpha, beta) = gumbel_params(mean, std);
    alpha - beta * (-u.ln()).ln()
}

/// C-vine over the loads: Gumbel(1.1) pairs between P1 and each other load, nothing deeper.
pub fn load_vine() -> CvineModel {
    let g = PairCopula::new(Family::Gumbel, Rotation::R0, vec![LOAD_THETA]).expect("valid Gumbel");
    let mut pairs = vec![vec![g; 5]];
    pairs.extend((1..5).map(|t| vec![PairCopula::independence(); 5 - t]));
    CvineModel::new((0..6).collect(), pairs).expect("valid vine")
}

#[derive(Debug, Clone)]
pub struct Truss {
    spec: TrussSpec,
    loads: CvineModel,
}

impl Truss {
    pub fn new() -> Self {
        Self { spec: TrussSpec::standard(), loads: load_vine() }
    }
}

impl Default for Truss {
    fn default() -> Self {
        Self::new()
    }
}

impl Benchmark for Truss {
    fn name(&self) -> &'static str {
        "truss"
    }

    fn dim(&self) -> usize {
        10
    }

    /// x = (E1, E2, A1, A2, P1, …, P6).
    fn eval(&self, x: &[f64]) -> f64 {
        truss_solve_spec(&self.spec, x[0], x[1], x[2], x[3], &x[4..10]).unwrap_or(f64::NAN)
    }

    fn sample_inputs(&self, n: usize, seed: u64) -> Vec<Vec<f64>> {
        use rand::Rng;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n)
            .map(|_| {
                let w: Vec<f64> = (0..10).map(|_| rng.random::<f64>().max(f64::MIN_POSITIVE)).collect();
                let pu = self.loads.inverse_rosenblatt(&w[4..]).expect("Gumbel inverse h converges");
                let mut x = vec![
                    lognormal_quantile(w[0], E_MEAN, E_STD),
                    lognormal_quantile(w[1], E_MEAN, E_STD),
                    lognormal_quantile(w[2], A1_MEAN, A1_STD),
                    lognormal_quantile(w[3], A2_MEAN, A2_STD),
                ];
                x.extend(pu.iter().map(|&u| gumbel_quantile(u.clamp(1e-16, 1.0 - 1e-16), LOAD_MEAN, LOAD_STD)));
                x
            })
            .collect()
    }
}

pub fn truss_sampler(n: usize, seed: u64) -> Dataset {
    Truss::new().sample(n, seed)
}
