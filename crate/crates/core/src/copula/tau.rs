use super::pair::{base_tau, Family};
use crate::optimize::newton_bracketed;

/// Kendall's τ_a, (concordant − discordant)/C(n, 2) with tied pairs counted
/// as neither, in O(n log n) by Knight's merge-sort algorithm.
pub fn kendall_tau_empirical(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len().min(y.len());
    if n < 2 {
        return 0.0;
    }
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&i, &j| x[i].total_cmp(&x[j]).then(y[i].total_cmp(&y[j])));
    let n0 = (n as u64) * (n as u64 - 1) / 2;

    let mut n1 = 0u64;
    let mut n3 = 0u64;
    let mut i = 0;
    while i < n {
        let mut j = i + 1;
        while j < n && x[idx[j]] == x[idx[i]] {
            j += 1;
        }
        let t = (j - i) as u64;
        n1 += t * (t - 1) / 2;
        let mut k = i;
        while k < j {
            let mut l = k + 1;
            while l < j && y[idx[l]] == y[idx[k]] {
                l += 1;
            }
            let u = (l - k) as u64;
            n3 += u * (u - 1) / 2;
            k = l;
        }
        i = j;
    }

    let mut ys: Vec<f64> = idx.iter().map(|&k| y[k]).collect();
    let mut buf = ys.clone();
    let swaps = merge_count(&mut ys, &mut buf);

    let mut n2 = 0u64;
    let mut i = 0;
    while i < n {
        let mut j = i + 1;
        while j < n && ys[j] == ys[i] {
            j += 1;
        }
        let t = (j - i) as u64;
        n2 += t * (t - 1) / 2;
        i = j;
    }
    let s = n0 as i64 - n1 as i64 - n2 as i64 + n3 as i64 - 2 * swaps as i64;
    s as f64 / n0 as f64
}

/// Sorts `a` ascending, returning the number of strict inversions.
fn merge_count(a: &mut [f64], buf: &mut [f64]) -> u64 {
    let n = a.len();
    if n < 2 {
        return 0;
    }
    let mid = n / 2;
    let mut swaps = {
        let (l, r) = a.split_at_mut(mid);
        let (bl, br) = buf.split_at_mut(mid);
        merge_count(l, bl) + merge_count(r, br)
    };
    let (mut i, mut j, mut k) = (0, mid, 0);
    while i < mid && j < n {
        if a[j] < a[i] {
            buf[k] = a[j];
            swaps += (mid - i) as u64;
            j += 1;
        } else {
            buf[k] = a[i];
            i += 1;
        }
        k += 1;
    }
    buf[k..k + mid - i].copy_from_slice(&a[i..mid]);
    k += mid - i;
    buf[k..k + n - j].copy_from_slice(&a[j..n]);
    a.copy_from_slice(&buf[..n]);
    swaps
}

/// Parameter of the unrotated family matching a nonnegative |τ|
/// (any sign for the elliptical and Frank families).
pub fn tau_to_param(family: Family, tau: f64) -> f64 {
    let t = tau.clamp(-0.98, 0.98);
    match family {
        Family::Independence => 0.0,
        Family::Gaussian | Family::StudentT => (std::f64::consts::FRAC_PI_2 * t).sin(),
        Family::Clayton => 2.0 * t.abs().max(1e-4) / (1.0 - t.abs()),
        Family::Gumbel => 1.0 / (1.0 - t.abs()),
        Family::Frank => {
            if t.abs() < 1e-6 {
                return 1e-3_f64.copysign(t + 1e-300);
            }
            let sign = t.signum();
            let target = t.abs();
            let g = |th: f64| {
                let f = base_tau(Family::Frank, &[th]) - target;
                let h = 1e-6 * th.max(1.0);
                let df = (base_tau(Family::Frank, &[th + h]) - base_tau(Family::Frank, &[th - h])) / (2.0 * h);
                (f, df)
            };
            sign * newton_bracketed(g, 1e-6, 700.0, 9.0 * target / (1.0 - target), 1e-10, 1e-12, 200).unwrap_or(1.0)
        }
    }
}
