#![allow(dead_code)]

use pceuq::marginals::KdeMarginal;
use pceuq::orthopoly::OrthonormalBasis1D;
use pceuq::quadrature::gauss_legendre;

/// Composite 64-node Gauss–Legendre panels between sorted kernel centres,
/// extended 10h beyond the extremes. Independent of the basis construction.
pub fn panel_rule(k: &KdeMarginal) -> (Vec<f64>, Vec<f64>) {
    let h = k.bandwidth();
    let c = k.centers();
    let mut edges = vec![c[0] - 10.0 * h];
    for &x in c {
        if x - edges.last().unwrap() > 0.25 * h {
            edges.push(x);
        }
    }
    edges.push(c[c.len() - 1] + 10.0 * h);
    // Subdivide long panels so each spans at most h.
    let mut fine = vec![edges[0]];
    for w in edges.windows(2) {
        let m = ((w[1] - w[0]) / h).ceil().max(1.0) as usize;
        for j in 1..=m {
            fine.push(w[0] + (w[1] - w[0]) * j as f64 / m as f64);
        }
    }
    let (t, wt) = gauss_legendre(64);
    let (mut xs, mut ws) = (Vec::new(), Vec::new());
    for p in fine.windows(2) {
        let (mid, half) = (0.5 * (p[0] + p[1]), 0.5 * (p[1] - p[0]));
        for (ti, wi) in t.iter().zip(wt) {
            let x = mid + half * ti;
            xs.push(x);
            ws.push(wi * half * k.pdf(x));
        }
    }
    (xs, ws)
}

pub fn gram(b: &OrthonormalBasis1D, xs: &[f64], ws: &[f64]) -> Vec<Vec<f64>> {
    let q = b.degree_max() + 1;
    let mut g = vec![vec![0.0; q]; q];
    for (x, w) in xs.iter().zip(ws) {
        let v = b.eval(*x);
        for i in 0..q {
            for j in 0..q {
                g[i][j] += w * v[i] * v[j];
            }
        }
    }
    g
}

/// Independent truss solver: bar forces from joint equilibrium (26 equations
/// in 23 bar forces and 3 reactions, dense Gaussian elimination), then the
/// unit-load method Δ = Σ N n L / (E A).
pub mod oracle {
    const NODES: usize = 13;

    fn coords(k: usize) -> (f64, f64) {
        if k < 7 {
            (4.0 * k as f64, 0.0)
        } else {
            (2.0 + 4.0 * (k - 7) as f64, 2.0)
        }
    }

    /// (i, j, horizontal?)
    fn bars() -> Vec<(usize, usize, bool)> {
        let mut b = Vec::new();
        for i in 0..6 {
            b.push((i, i + 1, true));
        }
        for i in 7..12 {
            b.push((i, i + 1, true));
        }
        for k in 0..6 {
            b.push((k, 7 + k, false));
            b.push((7 + k, k + 1, false));
        }
        b
    }

    fn gauss(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Vec<f64> {
        let n = b.len();
        for c in 0..n {
            let p = (c..n).max_by(|&i, &j| a[i][c].abs().total_cmp(&a[j][c].abs())).unwrap();
            a.swap(c, p);
            b.swap(c, p);
            for r in c + 1..n {
                let f = a[r][c] / a[c][c];
                if f != 0.0 {
                    for k in c..n {
                        a[r][k] -= f * a[c][k];
                    }
                    b[r] -= f * b[c];
                }
            }
        }
        let mut x = vec![0.0; n];
        for r in (0..n).rev() {
            let s: f64 = (r + 1..n).map(|k| a[r][k] * x[k]).sum();
            x[r] = (b[r] - s) / a[r][r];
        }
        x
    }

    /// Tension-positive bar forces for downward nodal loads.
    fn bar_forces(loads: &[(usize, f64)]) -> Vec<f64> {
        let bars = bars();
        let m = bars.len();
        let mut a = vec![vec![0.0; m + 3]; 2 * NODES];
        for (k, &(i, j, _)) in bars.iter().enumerate() {
            let (xi, yi) = coords(i);
            let (xj, yj) = coords(j);
            let l = (xj - xi).hypot(yj - yi);
            let (c, s) = ((xj - xi) / l, (yj - yi) / l);
            // Tension pulls node i towards j and node j towards i.
            a[2 * i][k] += c;
            a[2 * i + 1][k] += s;
            a[2 * j][k] -= c;
            a[2 * j + 1][k] -= s;
        }
        // Reactions: Rx and Ry at node 0, Ry at node 6.
        a[0][m] = 1.0;
        a[1][m + 1] = 1.0;
        a[13][m + 2] = 1.0;
        let mut rhs = vec![0.0; 2 * NODES];
        for &(node, p) in loads {
            rhs[2 * node + 1] += p;
        }
        gauss(a, rhs)[..m].to_vec()
    }

    pub fn deflection(e1: f64, e2: f64, a1: f64, a2: f64, p: &[f64]) -> f64 {
        let loads: Vec<(usize, f64)> = (0..6).map(|k| (7 + k, p[k])).collect();
        let n = bar_forces(&loads);
        let unit = bar_forces(&[(3, 1.0)]);
        bars()
            .iter()
            .enumerate()
            .map(|(k, &(i, j, horiz))| {
                let (xi, yi) = coords(i);
                let (xj, yj) = coords(j);
                let l = (xj - xi).hypot(yj - yi);
                let ea = if horiz { e1 * a1 } else { e2 * a2 };
                n[k] * unit[k] * l / ea
            })
            .sum()
    }
}
