use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::optimize::newton_bracketed;
use crate::quadrature::integrate_adaptive;
use crate::special::{debye1, norm_cdf, norm_quantile, t_cdf, t_ln_pdf, t_quantile};

/// Clamp applied to copula arguments before h-function and density evaluation.
pub const U_EPS: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Family {
    Independence,
    Gaussian,
    Clayton,
    Frank,
    Gumbel,
    StudentT,
}

impl Family {
    pub const ALL: [Family; 6] =
        [Family::Independence, Family::Gaussian, Family::Clayton, Family::Frank, Family::Gumbel, Family::StudentT];

    pub fn n_params(self) -> usize {
        match self {
            Family::Independence => 0,
            Family::StudentT => 2,
            _ => 1,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Family::Independence => "independence",
            Family::Gaussian => "gaussian",
            Family::Clayton => "clayton",
            Family::Frank => "frank",
            Family::Gumbel => "gumbel",
            Family::StudentT => "student_t",
        }
    }

    pub fn parse(name: &str) -> Result<Family> {
        let key = name.to_ascii_lowercase().replace(['-', ' '], "_");
        Family::ALL
            .into_iter()
            .find(|f| f.name() == key || (key == "t" && *f == Family::StudentT) || (key == "normal" && *f == Family::Gaussian))
            .ok_or_else(|| Error::UnsupportedFamily(name.to_string()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Rotation {
    R0,
    R90,
    R180,
    R270,
}

impl Rotation {
    pub const ALL: [Rotation; 4] = [Rotation::R0, Rotation::R90, Rotation::R180, Rotation::R270];

    pub fn degrees(self) -> u32 {
        match self {
            Rotation::R0 => 0,
            Rotation::R90 => 90,
            Rotation::R180 => 180,
            Rotation::R270 => 270,
        }
    }

    pub fn from_degrees(deg: u32) -> Result<Rotation> {
        match deg {
            0 => Ok(Rotation::R0),
            90 => Ok(Rotation::R90),
            180 => Ok(Rotation::R180),
            270 => Ok(Rotation::R270),
            _ => Err(Error::InvalidInput(format!("rotation {deg} not in {{0, 90, 180, 270}}"))),
        }
    }
}

/// A bivariate copula: family, axis-flip rotation and parameters
/// (θ, plus ν for the Student-t).
#[derive(Debug, Clone, PartialEq)]
pub struct PairCopula {
    family: Family,
    rotation: Rotation,
    params: Vec<f64>,
}

impl PairCopula {
    pub fn new(family: Family, rotation: Rotation, params: Vec<f64>) -> Result<Self> {
        validate(family, &params)?;
        let rotation = if matches!(family, Family::Independence) { Rotation::R0 } else { rotation };
        Ok(Self { family, rotation, params })
    }

    pub fn independence() -> Self {
        Self { family: Family::Independence, rotation: Rotation::R0, params: Vec::new() }
    }

    pub fn family(&self) -> Family {
        self.family
    }

    pub fn rotation(&self) -> Rotation {
        self.rotation
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    fn base(&self) -> Base {
        Base::new(self.family, &self.params)
    }

    /// C(u, v) with the rotation applied; exact on the boundary of the square.
    pub fn cdf(&self, u: f64, v: f64) -> f64 {
        if u <= 0.0 || v <= 0.0 {
            return 0.0;
        }
        if u >= 1.0 {
            return v.min(1.0);
        }
        if v >= 1.0 {
            return u;
        }
        let b = self.base();
        let c = match self.rotation {
            Rotation::R0 => b.cdf(u, v),
            Rotation::R90 => v - b.cdf(1.0 - u, v),
            Rotation::R180 => u + v - 1.0 + b.cdf(1.0 - u, 1.0 - v),
            Rotation::R270 => u - b.cdf(u, 1.0 - v),
        };
        c.clamp(0.0, u.min(v))
    }

    pub fn pdf(&self, u: f64, v: f64) -> f64 {
        self.ln_pdf(u, v).exp()
    }

    pub fn ln_pdf(&self, u: f64, v: f64) -> f64 {
        let (u, v) = (clamp(u), clamp(v));
        let b = self.base();
        match self.rotation {
            Rotation::R0 => b.ln_pdf(u, v),
            Rotation::R90 => b.ln_pdf(1.0 - u, v),
            Rotation::R180 => b.ln_pdf(1.0 - u, 1.0 - v),
            Rotation::R270 => b.ln_pdf(u, 1.0 - v),
        }
    }

    /// h(u | v) = ∂C(u, v)/∂v.
    pub fn h_function(&self, u: f64, v: f64) -> f64 {
        let (u, v) = (clamp(u), clamp(v));
        let b = self.base();
        let h = match self.rotation {
            Rotation::R0 => b.h(u, v),
            Rotation::R90 => 1.0 - b.h(1.0 - u, v),
            Rotation::R180 => 1.0 - b.h(1.0 - u, 1.0 - v),
            Rotation::R270 => b.h(u, 1.0 - v),
        };
        h.clamp(0.0, 1.0)
    }

    /// ∂C(u, v)/∂u, the conditional distribution of the second argument given the first.
    pub fn h_function_rev(&self, u: f64, v: f64) -> f64 {
        let (u, v) = (clamp(u), clamp(v));
        let b = self.base();
        let h = match self.rotation {
            Rotation::R0 => b.h(v, u),
            Rotation::R90 => b.h(v, 1.0 - u),
            Rotation::R180 => 1.0 - b.h(1.0 - v, 1.0 - u),
            Rotation::R270 => 1.0 - b.h(1.0 - v, u),
        };
        h.clamp(0.0, 1.0)
    }

    /// u with h_function(u, v) = z.
    pub fn inv_h(&self, z: f64, v: f64) -> Result<f64> {
        let (z, v) = (clamp(z), clamp(v));
        let b = self.base();
        let u = match self.rotation {
            Rotation::R0 => b.h_inv(z, v)?,
            Rotation::R90 => 1.0 - b.h_inv(1.0 - z, v)?,
            Rotation::R180 => 1.0 - b.h_inv(1.0 - z, 1.0 - v)?,
            Rotation::R270 => b.h_inv(z, 1.0 - v)?,
        };
        Ok(u.clamp(0.0, 1.0))
    }

    /// v with h_function_rev(u, v) = z.
    pub fn inv_h_rev(&self, z: f64, u: f64) -> Result<f64> {
        let (z, u) = (clamp(z), clamp(u));
        let b = self.base();
        let v = match self.rotation {
            Rotation::R0 => b.h_inv(z, u)?,
            Rotation::R90 => b.h_inv(z, 1.0 - u)?,
            Rotation::R180 => 1.0 - b.h_inv(1.0 - z, 1.0 - u)?,
            Rotation::R270 => 1.0 - b.h_inv(1.0 - z, u)?,
        };
        Ok(v.clamp(0.0, 1.0))
    }

    /// Kendall's τ of the model.
    pub fn kendall_tau(&self) -> f64 {
        let t = base_tau(self.family, &self.params);
        match self.rotation {
            Rotation::R0 | Rotation::R180 => t,
            Rotation::R90 | Rotation::R270 => -t,
        }
    }
}

pub fn pair_cdf(pc: &PairCopula, u: f64, v: f64) -> f64 {
    pc.cdf(u, v)
}

pub fn pair_pdf(pc: &PairCopula, u: f64, v: f64) -> f64 {
    pc.pdf(u, v)
}

pub fn h_function(pc: &PairCopula, u: f64, v: f64) -> f64 {
    pc.h_function(u, v)
}

pub fn inv_h(pc: &PairCopula, z: f64, v: f64) -> Result<f64> {
    pc.inv_h(z, v)
}

pub fn kendall_tau_model(pc: &PairCopula) -> f64 {
    pc.kendall_tau()
}

#[inline]
fn clamp(u: f64) -> f64 {
    u.clamp(U_EPS, 1.0 - U_EPS)
}

fn validate(family: Family, p: &[f64]) -> Result<()> {
    let bad = |msg: String| Err(Error::ParamOutOfRange(msg));
    if p.len() != family.n_params() {
        return bad(format!("{} takes {} parameters, got {}", family.name(), family.n_params(), p.len()));
    }
    if p.iter().any(|v| !v.is_finite()) {
        return bad("non-finite parameter".into());
    }
    match family {
        Family::Independence => Ok(()),
        Family::Gaussian if p[0].abs() < 1.0 => Ok(()),
        Family::StudentT if p[0].abs() < 1.0 && p[1] > 1.0 => Ok(()),
        Family::Clayton if p[0] > 0.0 => Ok(()),
        Family::Frank if p[0] != 0.0 && p[0].abs() <= 700.0 => Ok(()),
        Family::Gumbel if p[0] >= 1.0 => Ok(()),
        _ => bad(format!("{} parameters {:?}", family.name(), p)),
    }
}

/// Kendall's τ of the unrotated family.
pub fn base_tau(family: Family, p: &[f64]) -> f64 {
    match family {
        Family::Independence => 0.0,
        Family::Gaussian | Family::StudentT => std::f64::consts::FRAC_2_PI * p[0].asin(),
        Family::Clayton => p[0] / (p[0] + 2.0),
        Family::Gumbel => 1.0 - 1.0 / p[0],
        Family::Frank => 1.0 - 4.0 / p[0] * (1.0 - debye1(p[0])),
    }
}

/// Unrotated, exchangeable family with arguments already clamped.
#[derive(Clone, Copy)]
pub(crate) enum Base {
    Indep,
    Gauss { rho: f64 },
    T { rho: f64, nu: f64 },
    Clayton { theta: f64 },
    Frank { theta: f64 },
    Gumbel { theta: f64 },
}

impl Base {
    pub(crate) fn new(family: Family, p: &[f64]) -> Base {
        match family {
            Family::Independence => Base::Indep,
            Family::Gaussian => Base::Gauss { rho: p[0] },
            Family::StudentT => Base::T { rho: p[0], nu: p[1] },
            Family::Clayton => Base::Clayton { theta: p[0] },
            Family::Frank if p[0].abs() < 1e-10 => Base::Indep,
            Family::Frank => Base::Frank { theta: p[0] },
            Family::Gumbel if p[0] == 1.0 => Base::Indep,
            Family::Gumbel => Base::Gumbel { theta: p[0] },
        }
    }

    fn cdf(self, u: f64, v: f64) -> f64 {
        match self {
            Base::Indep => u * v,
            Base::Gauss { .. } | Base::T { .. } => {
                // C(u, v) = ∫_0^v h(u | s) ds; the integrand is bounded in [0, 1].
                integrate_adaptive(|s| if s <= 0.0 { 0.0 } else { self.h(u, clamp(s)) }, 0.0, v, 1e-13)
            }
            Base::Clayton { theta } => (-clayton_ln_a(theta, u, v) / theta).exp(),
            Base::Frank { theta } if theta < 0.0 => u - Base::Frank { theta: -theta }.cdf(u, 1.0 - v),
            Base::Frank { theta } => -((frank_neg_d(theta, u, v) / -(-theta).exp_m1()).ln()) / theta,
            Base::Gumbel { theta } => {
                let a = (-u.ln()).powf(theta) + (-v.ln()).powf(theta);
                (-a.powf(1.0 / theta)).exp()
            }
        }
    }

    pub(crate) fn ln_pdf(self, u: f64, v: f64) -> f64 {
        match self {
            Base::Indep => 0.0,
            Base::Gauss { rho } => gauss_ln_pdf(rho, norm_quantile(u), norm_quantile(v)),
            Base::T { rho, nu } => t_copula_ln_pdf(rho, nu, t_quantile(u, nu), t_quantile(v, nu)),
            Base::Clayton { theta } => clayton_ln_pdf(theta, u.ln(), v.ln()),
            Base::Frank { theta } => frank_ln_pdf(theta, u, v),
            Base::Gumbel { theta } => gumbel_ln_pdf(theta, u.ln(), v.ln()),
        }
    }

    /// ∂C/∂v at (u, v).
    pub(crate) fn h(self, u: f64, v: f64) -> f64 {
        match self {
            Base::Indep => u,
            Base::Gauss { rho } => {
                let (x, y) = (norm_quantile(u), norm_quantile(v));
                norm_cdf((x - rho * y) / (1.0 - rho * rho).sqrt())
            }
            Base::T { rho, nu } => {
                let (x, y) = (t_quantile(u, nu), t_quantile(v, nu));
                let s = ((nu + y * y) * (1.0 - rho * rho) / (nu + 1.0)).sqrt();
                t_cdf((x - rho * y) / s, nu + 1.0)
            }
            Base::Clayton { theta } => {
                let ln_h = (-theta - 1.0) * v.ln() + (-1.0 / theta - 1.0) * clayton_ln_a(theta, u, v);
                ln_h.exp()
            }
            Base::Frank { theta } if theta < 0.0 => Base::Frank { theta: -theta }.h(u, 1.0 - v),
            Base::Frank { theta } => {
                let ln_h = -theta * v + (-(-theta * u).exp_m1()).ln() - frank_neg_d(theta, u, v).ln();
                ln_h.exp()
            }
            Base::Gumbel { theta } => {
                let (x, y) = (-u.ln(), -v.ln());
                let a = x.powf(theta) + y.powf(theta);
                let ln_h = -a.powf(1.0 / theta) + (1.0 / theta - 1.0) * a.ln() + (theta - 1.0) * y.ln() + y;
                ln_h.exp()
            }
        }
    }

    /// u with h(u, v) = z.
    pub(crate) fn h_inv(self, z: f64, v: f64) -> Result<f64> {
        Ok(match self {
            Base::Indep => z,
            Base::Gauss { rho } => {
                let y = norm_quantile(v);
                norm_cdf(norm_quantile(z) * (1.0 - rho * rho).sqrt() + rho * y)
            }
            Base::T { rho, nu } => {
                let y = t_quantile(v, nu);
                let s = ((nu + y * y) * (1.0 - rho * rho) / (nu + 1.0)).sqrt();
                t_cdf(t_quantile(z, nu + 1.0) * s + rho * y, nu)
            }
            Base::Clayton { theta } => {
                let k = theta / (1.0 + theta);
                let lnv = v.ln();
                let t1 = -k * z.ln() - theta * lnv;
                let ln_b = t1 + (-(k * z.ln()).exp_m1() + (-t1).exp()).ln();
                (-ln_b / theta).exp()
            }
            Base::Frank { theta } if theta < 0.0 => Base::Frank { theta: -theta }.h_inv(z, 1.0 - v)?,
            Base::Frank { theta } => {
                // e^{−θu} = e^{−θv} (1 − z + z e^{−θ(1−v)}) / (e^{−θv}(1 − z) + z), all terms positive.
                let num = (1.0 - z) + z * (-theta * (1.0 - v)).exp();
                let den = (-theta * v).exp() * (1.0 - z) + z;
                (v - (num.ln() - den.ln()) / theta).clamp(0.0, 1.0)
            }
            Base::Gumbel { .. } => {
                let g = |u: f64| {
                    let uc = clamp(u);
                    (self.h(uc, v) - z, self.ln_pdf(uc, v).exp())
                };
                newton_bracketed(g, 0.0, 1.0, z, 1e-15, 1e-13, 200)
                    .map_err(|_| Error::ConvergenceFailure(format!("Gumbel inverse h at z={z}, v={v}")))?
            }
        })
    }
}

/// ln(u^−θ + v^−θ − 1) without overflow.
fn clayton_ln_a(theta: f64, u: f64, v: f64) -> f64 {
    let a = -theta * u.ln();
    let b = -theta * v.ln();
    let m = a.max(b);
    m + ((a - m).exp() + (b - m).exp() - (-m).exp()).ln()
}

pub(crate) fn gauss_ln_pdf(rho: f64, x: f64, y: f64) -> f64 {
    let r2 = 1.0 - rho * rho;
    -0.5 * r2.ln() - (rho * rho * (x * x + y * y) - 2.0 * rho * x * y) / (2.0 * r2)
}

pub(crate) fn t_copula_ln_pdf(rho: f64, nu: f64, x: f64, y: f64) -> f64 {
    let r2 = 1.0 - rho * rho;
    let q = (x * x - 2.0 * rho * x * y + y * y) / (nu * r2);
    let ln_f2 = -(2.0 * std::f64::consts::PI).ln() - 0.5 * r2.ln() - 0.5 * (nu + 2.0) * q.ln_1p();
    ln_f2 - t_ln_pdf(x, nu) - t_ln_pdf(y, nu)
}

pub(crate) fn clayton_ln_pdf(theta: f64, lnu: f64, lnv: f64) -> f64 {
    let a = -theta * lnu;
    let b = -theta * lnv;
    let m = a.max(b);
    let ln_a = m + ((a - m).exp() + (b - m).exp() - (-m).exp()).ln();
    theta.ln_1p() + (-theta - 1.0) * (lnu + lnv) + (-1.0 / theta - 2.0) * ln_a
}

pub(crate) fn frank_ln_pdf(theta: f64, u: f64, v: f64) -> f64 {
    if theta < 0.0 {
        return frank_ln_pdf(-theta, u, 1.0 - v);
    }
    (-theta * (-theta).exp_m1()).ln() - theta * (u + v) - 2.0 * frank_neg_d(theta, u, v).ln()
}

/// 1 − e^{−θ} − (1 − e^{−θu})(1 − e^{−θv}) for θ > 0, written as a sum of two
/// positive terms so it keeps full precision near (1, 1).
fn frank_neg_d(theta: f64, u: f64, v: f64) -> f64 {
    -(-theta * u).exp() * (-theta * v).exp_m1() - (-theta * v).exp() * (-theta * (1.0 - v)).exp_m1()
}

pub(crate) fn gumbel_ln_pdf(theta: f64, lnu: f64, lnv: f64) -> f64 {
    let (x, y) = (-lnu, -lnv);
    let a = x.powf(theta) + y.powf(theta);
    let a1 = a.powf(1.0 / theta);
    -a1 - lnu - lnv + (theta - 1.0) * (x.ln() + y.ln()) + (2.0 / theta - 2.0) * a.ln() + ((theta - 1.0) / a1).ln_1p()
}
