//! Nakagami-m links: squared-gain distributions, sampling, and the
//! order statistics of `N` i.i.d. squared gains.

use rand::Rng;
use rand_distr::{Distribution, Exp1};

use crate::error::{domain, Error, Result};
use crate::specfun::{self, binomial, CompensatedSum, MultinomialTerm};

/// One fading link. The squared gain `g²` is Gamma distributed with shape `m`
/// and mean `omega`, so its rate is `λ̃ = m / omega`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NakagamiLink {
    m: u32,
    omega: f64,
    distance: f64,
    pathloss_exp: f64,
}

impl NakagamiLink {
    pub fn new(m: u32, omega: f64, distance: f64, pathloss_exp: f64) -> Result<Self> {
        if m == 0 {
            return Err(Error::InvalidParams("fading shape m must be >= 1".into()));
        }
        for (name, v) in [("omega", omega), ("distance", distance), ("path-loss exponent", pathloss_exp)] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::InvalidParams(format!("{name} = {v} must be positive and finite")));
            }
        }
        Ok(Self {
            m,
            omega,
            distance,
            pathloss_exp,
        })
    }

    /// Builds a link from its rate parameter `λ̃ = m / Ω` instead of the mean.
    pub fn from_lambda(m: u32, lambda_tilde: f64, distance: f64, pathloss_exp: f64) -> Result<Self> {
        if !(lambda_tilde > 0.0) {
            return Err(Error::InvalidParams(format!("lambda = {lambda_tilde} must be positive")));
        }
        Self::new(m, m as f64 / lambda_tilde, distance, pathloss_exp)
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    pub fn distance(&self) -> f64 {
        self.distance
    }

    pub fn pathloss_exp(&self) -> f64 {
        self.pathloss_exp
    }

    pub fn lambda_tilde(&self) -> f64 {
        self.m as f64 / self.omega
    }

    /// Large-scale attenuation `d'^{-u}`.
    pub fn path_gain(&self) -> f64 {
        self.distance.powf(-self.pathloss_exp)
    }

    pub fn with_distance(self, distance: f64) -> Result<Self> {
        Self::new(self.m, self.omega, distance, self.pathloss_exp)
    }

    /// Same rate `λ̃`, different shape.
    pub fn with_m_fixed_lambda(self, m: u32) -> Result<Self> {
        Self::from_lambda(m, self.lambda_tilde(), self.distance, self.pathloss_exp)
    }

    pub fn pdf_gain_sq(&self, t: f64) -> Result<f64> {
        if !(t > 0.0) {
            return Err(domain("pdf_gain_sq", format!("t = {t} must be positive")));
        }
        let lam = self.lambda_tilde();
        let m = self.m as f64;
        let ln = m * lam.ln() + (m - 1.0) * t.ln() - lam * t - specfun::ln_gamma(m)?;
        Ok(ln.exp())
    }

    pub fn cdf_gain_sq(&self, t: f64) -> Result<f64> {
        if !(t >= 0.0) {
            return Err(domain("cdf_gain_sq", format!("t = {t} must be non-negative")));
        }
        specfun::reg_lower_inc_gamma(self.m as f64, self.lambda_tilde() * t)
    }

    /// `1 - Σ_{j<m} e^{-λ̃t} (λ̃t)^j / j!`, the integer-shape form of the CDF.
    pub fn cdf_gain_sq_finite_sum(&self, t: f64) -> Result<f64> {
        if !(t >= 0.0) {
            return Err(domain("cdf_gain_sq", format!("t = {t} must be non-negative")));
        }
        Ok(1.0 - survival_finite_sum(self.m, self.lambda_tilde() * t))
    }

    /// Draws `g²` as a sum of `m` exponentials with mean `Ω/m`.
    pub fn sample_gain_sq<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let scale = self.omega / self.m as f64;
        let mut acc = 0.0;
        for _ in 0..self.m {
            let e: f64 = Exp1.sample(rng);
            acc += e;
        }
        acc * scale
    }

    /// CDF of the largest of `n_tags` i.i.d. squared gains, `F(t)^N`.
    pub fn cdf_max_order_stat(&self, n_tags: u32, t: f64) -> Result<f64> {
        check_tags(n_tags)?;
        Ok(self.cdf_gain_sq(t)?.powi(n_tags as i32))
    }

    /// Same quantity evaluated through the multinomial expansion.
    pub fn cdf_max_order_stat_expansion(&self, n_tags: u32, t: f64) -> Result<f64> {
        check_tags(n_tags)?;
        if !(t >= 0.0) {
            return Err(domain("cdf_max_order_stat", format!("t = {t} must be non-negative")));
        }
        let terms = specfun::power_cdf_expansion(n_tags, self.m, self.lambda_tilde());
        Ok(eval_expansion(&terms, self.lambda_tilde(), t))
    }

    /// CDF of the smallest of `n_tags` i.i.d. squared gains, `1 - (1 - F(t))^N`.
    pub fn cdf_min_order_stat(&self, n_tags: u32, t: f64) -> Result<f64> {
        check_tags(n_tags)?;
        let surv = 1.0 - self.cdf_gain_sq(t)?;
        Ok(1.0 - surv.powi(n_tags as i32))
    }

    /// Same quantity via the binomial/multinomial expansion.
    pub fn cdf_min_order_stat_expansion(&self, n_tags: u32, t: f64) -> Result<f64> {
        check_tags(n_tags)?;
        if !(t >= 0.0) {
            return Err(domain("cdf_min_order_stat", format!("t = {t} must be non-negative")));
        }
        let terms = min_cdf_expansion(n_tags, self.m, self.lambda_tilde());
        Ok(eval_expansion(&terms, self.lambda_tilde(), t))
    }

    /// Density of the smallest squared gain, the term-by-term derivative of
    /// the expansion: `Σ c (θ₄ t^{θ₄-1} - λ̃θ₃ t^{θ₄}) e^{-λ̃θ₃t}`.
    pub fn pdf_min_order_stat(&self, n_tags: u32, t: f64) -> Result<f64> {
        check_tags(n_tags)?;
        if !(t > 0.0) {
            return Err(domain("pdf_min_order_stat", format!("t = {t} must be positive")));
        }
        let lam = self.lambda_tilde();
        let mut acc = CompensatedSum::new();
        for term in min_cdf_expansion(n_tags, self.m, lam) {
            let th3 = term.theta1 as f64;
            let th4 = term.theta2 as i32;
            let e = (-lam * th3 * t).exp();
            let mut d = -lam * th3 * t.powi(th4);
            if th4 > 0 {
                d += th4 as f64 * t.powi(th4 - 1);
            }
            acc.add(term.coeff * d * e);
        }
        Ok(acc.value())
    }
}

fn check_tags(n_tags: u32) -> Result<()> {
    if n_tags == 0 {
        return Err(Error::InvalidParams("n_tags must be >= 1".into()));
    }
    Ok(())
}

/// `Σ_{j<m} e^{-x} x^j / j!`.
pub(crate) fn survival_finite_sum(m: u32, x: f64) -> f64 {
    let e = (-x).exp();
    let mut term = 1.0;
    let mut acc = 0.0;
    for j in 0..m {
        if j > 0 {
            term *= x / j as f64;
        }
        acc += term;
    }
    e * acc
}

fn eval_expansion(terms: &[MultinomialTerm], lam: f64, t: f64) -> f64 {
    terms
        .iter()
        .map(|k| k.coeff * t.powi(k.theta2 as i32) * (-lam * k.theta1 as f64 * t).exp())
        .collect::<CompensatedSum>()
        .value()
}

/// Expansion of the min-order-statistic CDF,
/// `Σ_{l=1}^{N} C(N,l) (-1)^{l+1} (F(t))^l`, flattened into terms
/// `coeff · t^{θ₂} e^{-λ̃θ₁t}` (the binomial weight is folded into `coeff`).
pub fn min_cdf_expansion(n_tags: u32, m: u32, lambda: f64) -> Vec<MultinomialTerm> {
    let mut out = Vec::new();
    for l in 1..=n_tags {
        let w = binomial(n_tags, l) * if l % 2 == 1 { 1.0 } else { -1.0 };
        for term in specfun::power_cdf_expansion(l, m, lambda) {
            out.push(MultinomialTerm {
                coeff: w * term.coeff,
                ..term
            });
        }
    }
    out
}
