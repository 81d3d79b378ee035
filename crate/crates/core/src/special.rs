//! Scalar special functions on top of `statrs`.

use statrs::function::beta::{beta_reg, inv_beta_reg};
use libm::erfc;
use statrs::function::erf::erfc_inv;
use statrs::function::gamma::ln_gamma;

use crate::quadrature::gauss_legendre;

pub const FRAC_1_SQRT_2PI: f64 = 0.398_942_280_401_432_7;
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

#[inline]
pub fn norm_pdf(x: f64) -> f64 {
    FRAC_1_SQRT_2PI * (-0.5 * x * x).exp()
}

#[inline]
pub fn norm_cdf(x: f64) -> f64 {
    0.5 * erfc(-x / std::f64::consts::SQRT_2)
}

/// Standard normal quantile. Saturates to ±inf outside (0,1).
pub fn norm_quantile(p: f64) -> f64 {
    if p <= 0.0 {
        return f64::NEG_INFINITY;
    }
    if p >= 1.0 {
        return f64::INFINITY;
    }
    let mut x = -std::f64::consts::SQRT_2 * erfc_inv(2.0 * p);
    // statrs' inverse is only good to ~1e-11; Halley steps on the libm cdf.
    for _ in 0..2 {
        let r = if x > 0.0 { (1.0 - p) - norm_cdf(-x) } else { norm_cdf(x) - p };
        let d = norm_pdf(x);
        if d == 0.0 {
            break;
        }
        let u = r / d;
        x -= u / (1.0 + 0.5 * x * u);
    }
    x
}

pub fn t_pdf(x: f64, nu: f64) -> f64 {
    t_ln_pdf(x, nu).exp()
}

pub fn t_ln_pdf(x: f64, nu: f64) -> f64 {
    ln_gamma(0.5 * (nu + 1.0))
        - ln_gamma(0.5 * nu)
        - 0.5 * (nu * std::f64::consts::PI).ln()
        - 0.5 * (nu + 1.0) * (x * x / nu).ln_1p()
}

/// Student-t cdf. Uses the complementary incomplete-beta form near the
/// centre so that values close to 1/2 keep full relative precision.
pub fn t_cdf(x: f64, nu: f64) -> f64 {
    if x.is_nan() {
        return f64::NAN;
    }
    if x.is_infinite() {
        return if x > 0.0 { 1.0 } else { 0.0 };
    }
    let x2 = x * x;
    let tail = if x2 < nu {
        0.5 * (1.0 - beta_reg(0.5, 0.5 * nu, x2 / (nu + x2)))
    } else {
        0.5 * beta_reg(0.5 * nu, 0.5, nu / (nu + x2))
    };
    if x < 0.0 {
        tail
    } else {
        1.0 - tail
    }
}

/// Student-t quantile: incomplete-beta inversion as a start, then Newton.
pub fn t_quantile(p: f64, nu: f64) -> f64 {
    if p <= 0.0 {
        return f64::NEG_INFINITY;
    }
    if p >= 1.0 {
        return f64::INFINITY;
    }
    if p == 0.5 {
        return 0.0;
    }
    let q = p.min(1.0 - p);
    let ib = inv_beta_reg(0.5 * nu, 0.5, 2.0 * q);
    let mut x = if ib > 0.0 && ib < 1.0 {
        -(nu * (1.0 / ib - 1.0)).sqrt()
    } else {
        norm_quantile(q)
    };
    if !x.is_finite() {
        x = norm_quantile(q);
    }
    // Newton on the lower half only, where the cdf is convex.
    for _ in 0..60 {
        let f = t_cdf(x, nu) - q;
        let d = t_pdf(x, nu);
        if d <= 0.0 || !d.is_finite() {
            break;
        }
        let step = f / d;
        let mut nx = x - step;
        if nx > 0.0 {
            nx = 0.5 * x;
        }
        let done = (nx - x).abs() <= 1e-15 * (1.0 + x.abs());
        x = nx;
        if done {
            break;
        }
    }
    if p < 0.5 {
        x
    } else {
        -x
    }
}

/// Debye function D1(x) = (1/x) ∫_0^x t/(e^t − 1) dt.
pub fn debye1(x: f64) -> f64 {
    if x == 0.0 {
        return 1.0;
    }
    if x < 0.0 {
        return debye1(-x) + 0.5 * (-x);
    }
    let (nodes, weights) = gauss_legendre(48);
    let half = 0.5 * x;
    let mut s = 0.0;
    for (t, w) in nodes.iter().zip(weights.iter()) {
        let u = half * (t + 1.0);
        let g = if u < 1e-8 { 1.0 - 0.5 * u } else { u / u.exp_m1() };
        s += w * g;
    }
    s * half / x
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normal_reference_values() {
        assert!((norm_cdf(1.0) - 0.841_344_746_068_542_9).abs() < 1e-14);
        assert!((norm_quantile(0.975) - 1.959_963_984_540_054).abs() < 1e-13);
        for &p in &[1e-12, 1e-6, 0.3, 0.5, 0.9, 1.0 - 1e-9] {
            assert!((norm_cdf(norm_quantile(p)) - p).abs() < 1e-13 * p.min(1.0 - p));
        }
    }

    #[test]
    fn t_matches_closed_forms() {
        // nu = 1 is Cauchy, nu = 2 has an explicit cdf.
        for &x in &[-30.0f64, -2.0, -0.3, 0.0, 0.01, 1.5, 12.0] {
            let cauchy = 0.5 + x.atan() / std::f64::consts::PI;
            assert!((t_cdf(x, 1.0) - cauchy).abs() < 1e-13, "x={x}");
            let t2 = 0.5 + x / (2.0 * (2.0 + x * x).sqrt());
            assert!((t_cdf(x, 2.0) - t2).abs() < 1e-13, "x={x}");
        }
    }

    #[test]
    fn t_quantile_round_trip() {
        for &nu in &[2.0, 3.0, 4.5, 10.0, 50.0] {
            for &p in &[1e-10, 1e-4, 0.1, 0.4999, 0.5, 0.5001, 0.77, 0.999999] {
                let x = t_quantile(p, nu);
                assert!((t_cdf(x, nu) - p).abs() < 1e-13, "nu={nu} p={p}");
            }
        }
    }

    #[test]
    fn debye_limits() {
        assert!((debye1(1e-6) - 1.0).abs() < 1e-6);
        // D1(1) = 0.777504634112...
        assert!((debye1(1.0) - 0.777_504_634_112_248).abs() < 1e-12);
        assert!((debye1(-1.0) - (0.777_504_634_112_248 + 0.5)).abs() < 1e-12);
    }
}
