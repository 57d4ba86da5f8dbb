//! Special functions and combinatorial enumeration used by the closed forms.
//!
//! Gamma-family functions are thin wrappers over `statrs` with explicit domain
//! checks. The modified Bessel function of the second kind is evaluated for
//! integer orders only: `K_0`/`K_1` come from Temme's series (x < 2) or
//! Steed's continued fraction (x >= 2), higher orders from the upward
//! recurrence, which is stable for `K`.

use std::f64::consts::PI;

use statrs::function::gamma as sg;

use crate::error::{domain, Error, Result};

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;
const BESSEL_EPS: f64 = 1e-16;
const BESSEL_MAXIT: usize = 10_000;

/// `ln Γ(x)` for `x > 0`.
pub fn ln_gamma(x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(domain("ln_gamma", format!("x = {x} must be positive")));
    }
    Ok(sg::ln_gamma(x))
}

/// `Γ(x)` for `x > 0`.
pub fn gamma(x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(domain("gamma", format!("x = {x} must be positive")));
    }
    Ok(sg::gamma(x))
}

/// `n!` as a float. Exact for `n <= 22`.
pub fn factorial(n: u32) -> f64 {
    (2..=n).fold(1.0, |acc, k| acc * k as f64)
}

/// Binomial coefficient `C(n, k)` as a float.
pub fn binomial(n: u32, k: u32) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

fn check_shape(func: &'static str, m: f64, x: f64) -> Result<()> {
    if !(m > 0.0) || !m.is_finite() {
        return Err(domain(func, format!("shape m = {m} must be positive")));
    }
    if !(x >= 0.0) {
        return Err(domain(func, format!("x = {x} must be non-negative")));
    }
    Ok(())
}

/// Regularized lower incomplete gamma `γ(m, x) / Γ(m)`.
pub fn reg_lower_inc_gamma(m: f64, x: f64) -> Result<f64> {
    check_shape("reg_lower_inc_gamma", m, x)?;
    if x == 0.0 {
        return Ok(0.0);
    }
    if x.is_infinite() {
        return Ok(1.0);
    }
    Ok(sg::gamma_lr(m, x))
}

/// Regularized upper incomplete gamma `Γ(m, x) / Γ(m)`.
pub fn reg_upper_inc_gamma(m: f64, x: f64) -> Result<f64> {
    check_shape("reg_upper_inc_gamma", m, x)?;
    if x == 0.0 {
        return Ok(1.0);
    }
    if x.is_infinite() {
        return Ok(0.0);
    }
    Ok(sg::gamma_ur(m, x))
}

/// Upper incomplete gamma `Γ(m, x)` (not regularized).
pub fn upper_inc_gamma(m: f64, x: f64) -> Result<f64> {
    Ok(gamma(m)? * reg_upper_inc_gamma(m, x)?)
}

/// `K_0(x)` and `K_1(x)` together.
fn bessel_k01(x: f64) -> (f64, f64) {
    if x < 2.0 {
        // Temme's series at order zero
        let x2 = 0.5 * x;
        let d = -x2.ln();
        let mut ff = d - EULER_GAMMA;
        let mut sum = ff;
        let mut p = 0.5;
        let mut q = 0.5;
        let mut c = 1.0;
        let dd = x2 * x2;
        let mut sum1 = p;
        for i in 1..BESSEL_MAXIT {
            let fi = i as f64;
            ff = (fi * ff + p + q) / (fi * fi);
            c *= dd / fi;
            p /= fi;
            q /= fi;
            let del = c * ff;
            sum += del;
            sum1 += c * (p - fi * ff);
            if del.abs() < sum.abs() * BESSEL_EPS {
                break;
            }
        }
        (sum, sum1 * 2.0 / x)
    } else {
        // Steed's continued fraction
        let mut b = 2.0 * (1.0 + x);
        let mut d = 1.0 / b;
        let mut delh = d;
        let mut h = d;
        let mut q1 = 0.0;
        let mut q2 = 1.0;
        let a1 = 0.25;
        let mut q = a1;
        let mut c = a1;
        let mut a = -a1;
        let mut s = 1.0 + q * delh;
        for i in 2..BESSEL_MAXIT {
            let fi = i as f64;
            a -= 2.0 * (fi - 1.0);
            c = -a * c / fi;
            let qnew = (q1 - b * q2) / a;
            q1 = q2;
            q2 = qnew;
            q += c * qnew;
            b += 2.0;
            d = 1.0 / (b + a * d);
            delh = (b * d - 1.0) * delh;
            h += delh;
            let dels = q * delh;
            s += dels;
            if (dels / s).abs() < BESSEL_EPS {
                break;
            }
        }
        h *= a1;
        let k0 = (PI / (2.0 * x)).sqrt() * (-x).exp() / s;
        let k1 = k0 * (x + 0.5 - h) / x;
        (k0, k1)
    }
}

/// Modified Bessel function of the second kind `K_n(x)` for integer `n`.
///
/// Negative orders fold onto positive ones (`K_{-n} = K_n`).
pub fn bessel_k(order: i32, x: f64) -> Result<f64> {
    if !(x > 0.0) {
        return Err(domain("bessel_k", format!("x = {x} must be positive")));
    }
    let n = order.unsigned_abs();
    let (k0, k1) = bessel_k01(x);
    if n == 0 {
        return Ok(k0);
    }
    let (mut prev, mut cur) = (k0, k1);
    for j in 1..n {
        let next = prev + 2.0 * j as f64 / x * cur;
        prev = cur;
        cur = next;
    }
    Ok(cur)
}

/// `∫₀^∞ v^{a-1} exp(-p v - q / v) dv` for integer `a`, `p > 0`, `q >= 0`.
///
/// Equals `2 (q/p)^{a/2} K_a(2 sqrt(p q))` for `q > 0`; for `q = 0` it
/// collapses to `Γ(a) / p^a`, which requires `a > 0`.
pub fn gamma_bessel_integral(a: i32, p: f64, q: f64) -> Result<f64> {
    if !(p > 0.0) {
        return Err(domain("gamma_bessel_integral", format!("p = {p} must be positive")));
    }
    if !(q >= 0.0) {
        return Err(domain("gamma_bessel_integral", format!("q = {q} must be non-negative")));
    }
    if q == 0.0 {
        if a <= 0 {
            return Err(domain(
                "gamma_bessel_integral",
                format!("integral diverges for a = {a} when q = 0"),
            ));
        }
        return Ok((ln_gamma(a as f64)? - a as f64 * p.ln()).exp());
    }
    let k = bessel_k(a, 2.0 * (p * q).sqrt())?;
    Ok(2.0 * (0.5 * a as f64 * (q / p).ln()).exp() * k)
}

/// Neumaier's compensated summation.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    comp: f64,
    abs_sum: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
        self.abs_sum += x.abs();
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }

    /// Sum of absolute values of everything added so far.
    pub fn magnitude(&self) -> f64 {
        self.abs_sum
    }
}

impl FromIterator<f64> for CompensatedSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut s = Self::new();
        for x in iter {
            s.add(x);
        }
        s
    }
}

/// An ordered split of `total` into non-negative parts.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Composition {
    parts: Vec<u32>,
    total: u32,
}

impl Composition {
    pub fn new(parts: Vec<u32>) -> Self {
        let total = parts.iter().sum();
        Self { parts, total }
    }

    pub fn parts(&self) -> &[u32] {
        &self.parts
    }

    pub fn total(&self) -> u32 {
        self.total
    }

    pub fn len(&self) -> usize {
        self.parts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parts.is_empty()
    }
}

/// All compositions of `total` into `parts` non-negative parts.
///
/// Order is lexicographic with the first part descending, so the first
/// element is always `(total, 0, ..., 0)`.
pub fn compositions(total: u32, parts: usize) -> Vec<Composition> {
    assert!(parts >= 1, "compositions need at least one part");
    let mut out = Vec::new();
    let mut buf = vec![0u32; parts];
    fill(total, 0, &mut buf, &mut out);
    out
}

fn fill(remaining: u32, idx: usize, buf: &mut Vec<u32>, out: &mut Vec<Composition>) {
    if idx + 1 == buf.len() {
        buf[idx] = remaining;
        out.push(Composition::new(buf.clone()));
        return;
    }
    for v in (0..=remaining).rev() {
        buf[idx] = v;
        fill(remaining - v, idx + 1, buf, out);
    }
}

/// One term of the multinomial expansion of
/// `(1 - Σ_{j<m} e^{-λt} (λt)^j / j!)^N`, i.e. `coeff · t^{θ₂} · e^{-λ θ₁ t}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MultinomialTerm {
    pub coeff: f64,
    /// Total count of non-leading parts, the multiplier of `λt` in the exponent.
    pub theta1: u32,
    /// Power of `t`.
    pub theta2: u32,
}

/// Coefficient and exponents of the expansion term selected by `comp`.
///
/// `comp` must have `m + 1` parts summing to `n`.
pub fn multinomial_delta(n: u32, comp: &Composition, m: u32, lambda: f64) -> Result<MultinomialTerm> {
    if comp.len() != m as usize + 1 {
        return Err(Error::InvalidParams(format!(
            "composition has {} parts, expected m + 1 = {}",
            comp.len(),
            m + 1
        )));
    }
    if comp.total() != n {
        return Err(Error::InvalidParams(format!(
            "composition sums to {}, expected {n}",
            comp.total()
        )));
    }
    let parts = comp.parts();
    let theta1: u32 = parts[1..].iter().sum();
    let theta2: u32 = parts[2..]
        .iter()
        .enumerate()
        .map(|(i, &ni)| (i as u32 + 1) * ni)
        .sum();
    let mut coeff = factorial(n);
    for &ni in parts {
        coeff /= factorial(ni);
    }
    // part i+1 carries Γ(i) = (i-1)! per unit
    for (i, &ni) in parts.iter().enumerate().skip(1) {
        coeff /= factorial(i as u32 - 1).powi(ni as i32);
    }
    coeff *= lambda.powi(theta2 as i32);
    if theta1 % 2 == 1 {
        coeff = -coeff;
    }
    Ok(MultinomialTerm {
        coeff,
        theta1,
        theta2,
    })
}

/// Full expansion of `(F(t))^n` for a Gamma(m, rate λ) CDF `F`.
pub fn power_cdf_expansion(n: u32, m: u32, lambda: f64) -> Vec<MultinomialTerm> {
    compositions(n, m as usize + 1)
        .iter()
        .map(|c| multinomial_delta(n, c, m, lambda).expect("shape matches by construction"))
        .collect()
}
