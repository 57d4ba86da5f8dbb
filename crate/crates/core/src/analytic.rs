//! Exact and high-SNR closed forms for the secrecy outage probability (SOP)
//! and intercept probability (IP) under each selection protocol.
//!
//! Every expression splits on the harvesting event: `P1 = Pr(β* = 0)` plus
//! `P2 = Pr(β* > 0, (1 + γ_d)/(1 + γ_e) < τ)` (for IP, `τ = 1`). With
//! `a = φ / (P d_s^{-u_s})` and `V = g²_sk - a`, the SNRs become
//! `γ_x = η_x Γ_t V g²_kx`, so the outage event reads
//!
//! ```text
//! g²_kd < b / V + r g²_ke,    b = (τ - 1) / (η₁ Γ_t),    r = τ η₂ / η₁.
//! ```
//!
//! Expanding the destination-side CDF into `t^k e^{-c t}` terms splits the
//! double integral into a source-side factor `E[1{V>0} V^{-k} e^{-c'/V}]`
//! (a Bessel-K integral after expanding `(V + a)^{m_s - 1}`) and an
//! eavesdropper-side Gamma moment. The high-SNR limit is the same expression
//! with `a = b = 0`.

use std::collections::BTreeMap;
use std::fmt;

use crate::channel::min_cdf_expansion;
use crate::error::Result;
use crate::specfun::{self, binomial, factorial, gamma_bessel_integral, CompensatedSum};
use crate::system::{ProtocolKind, SystemParams};

/// Cancellation ratio (sum of absolute term magnitudes over |result|) above
/// which a closed-form value is flagged as numerically unreliable.
pub const DEFAULT_CANCELLATION_LIMIT: f64 = 1e10;

/// Raw values outside `[-RANGE_SLACK, 1 + RANGE_SLACK]` are flagged.
const RANGE_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MetricKind {
    ExactSop,
    ExactIp,
    AsymptoticSop,
    AsymptoticIp,
}

impl MetricKind {
    pub fn name(self) -> &'static str {
        match self {
            Self::ExactSop => "exact_sop",
            Self::ExactIp => "exact_ip",
            Self::AsymptoticSop => "asymptotic_sop",
            Self::AsymptoticIp => "asymptotic_ip",
        }
    }

    fn is_ip(self) -> bool {
        matches!(self, Self::ExactIp | Self::AsymptoticIp)
    }

    fn is_asymptotic(self) -> bool {
        matches!(self, Self::AsymptoticSop | Self::AsymptoticIp)
    }
}

impl fmt::Display for MetricKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Result of one closed-form evaluation.
#[derive(Debug, Clone, PartialEq)]
pub struct ClosedFormReport {
    /// `raw` clamped to `[0, 1]`.
    pub value: f64,
    /// Unclamped value straight from the sums.
    pub raw: f64,
    pub protocol: ProtocolKind,
    pub kind: MetricKind,
    /// Named partial sums: `P1`, `P2` or `P3`, and per-term contributions.
    pub term_breakdown: BTreeMap<String, f64>,
    /// Sum of absolute term magnitudes divided by `|raw|`.
    pub cancellation: f64,
}

impl ClosedFormReport {
    pub fn is_unstable(&self, cancellation_limit: f64) -> bool {
        !self.raw.is_finite()
            || self.raw < -RANGE_SLACK
            || self.raw > 1.0 + RANGE_SLACK
            || self.cancellation > cancellation_limit
    }

    /// Number of composition terms that entered the evaluation.
    pub fn composition_terms(&self) -> usize {
        self.term_breakdown.keys().filter(|k| k.starts_with("comp")).count()
    }
}

/// Quantities shared by every term of one evaluation.
struct Regime {
    m_s: u32,
    lam_s: f64,
    m_d: u32,
    lam_d: f64,
    m_e: u32,
    lam_e: f64,
    /// Activation gain `a`.
    a: f64,
    /// `(τ - 1)/(η₁ Γ_t)`.
    b: f64,
    /// `τ η₂ / η₁`.
    r: f64,
    p1: f64,
}

impl Regime {
    fn new(params: &SystemParams, kind: MetricKind) -> Result<Self> {
        params.validate()?;
        let thr = if kind.is_ip() { 1.0 } else { params.tau() };
        let (eta1, eta2) = (params.eta1(), params.eta2());
        let (a, b, p1) = if kind.is_asymptotic() {
            (0.0, 0.0, 0.0)
        } else {
            (
                params.activation_gain(),
                (thr - 1.0) / (eta1 * params.gamma_t),
                p1(params)?,
            )
        };
        Ok(Self {
            m_s: params.link_s.m(),
            lam_s: params.link_s.lambda_tilde(),
            m_d: params.link_d.m(),
            lam_d: params.link_d.lambda_tilde(),
            m_e: params.link_e.m(),
            lam_e: params.link_e.lambda_tilde(),
            a,
            b,
            r: thr * eta2 / eta1,
            p1,
        })
    }

    /// `b^k E[1{g²_sk > a} V^{-k} e^{-c b / V}]` with `V = g²_sk - a`.
    fn source_factor(&self, k: u32, c: f64) -> Result<f64> {
        if k > 0 && self.b == 0.0 {
            return Ok(0.0);
        }
        let q = c * self.b;
        let ms = self.m_s;
        let mut acc = CompensatedSum::new();
        for p in 0..ms {
            let pw = ms - 1 - p;
            if pw > 0 && self.a == 0.0 {
                continue;
            }
            let order = p as i32 - k as i32 + 1;
            let integral = gamma_bessel_integral(order, self.lam_s, q)?;
            acc.add(binomial(ms - 1, p) * self.a.powi(pw as i32) * integral);
        }
        let front = (ms as f64 * self.lam_s.ln() - self.lam_s * self.a - specfun::ln_gamma(ms as f64)?).exp();
        Ok(front * self.b.powi(k as i32) * acc.value())
    }

    /// `E[W^q e^{-c W}]` for a single eavesdropper gain `W`.
    fn eve_moment(&self, q: u32, c: f64) -> Result<f64> {
        let me = self.m_e as f64;
        let ln = me * self.lam_e.ln() + specfun::ln_gamma(me + q as f64)?
            - specfun::ln_gamma(me)?
            - (me + q as f64) * (self.lam_e + c).ln();
        Ok(ln.exp())
    }

    /// `E[W^q e^{-c W}]` for the smallest of `n` eavesdropper gains,
    /// integrated against the term-wise derivative of the min-CDF expansion.
    fn min_eve_moment(&self, n: u32, q: u32, c: f64) -> Result<f64> {
        let mut acc = CompensatedSum::new();
        for term in min_cdf_expansion(n, self.m_e, self.lam_e) {
            if term.theta1 == 0 {
                continue;
            }
            let th3 = term.theta1 as f64;
            let th4 = term.theta2;
            let big_a = self.lam_e * th3 + c;
            let mut v = -self.lam_e * th3 * gamma_over_pow(th4 + q + 1, big_a)?;
            if th4 > 0 {
                v += th4 as f64 * gamma_over_pow(th4 + q, big_a)?;
            }
            acc.add(term.coeff * v);
        }
        Ok(acc.value())
    }
}

/// `Γ(s) / A^s` for integer `s >= 1`.
fn gamma_over_pow(s: u32, a: f64) -> Result<f64> {
    Ok((specfun::ln_gamma(s as f64)? - s as f64 * a.ln()).exp())
}

/// Probability that a tag cannot power its circuit, `F_{g²_sk}(a)`.
pub fn p1(params: &SystemParams) -> Result<f64> {
    params.link_s.cdf_gain_sq(params.activation_gain())
}

/// Exact secrecy outage probability.
pub fn sop_exact(protocol: ProtocolKind, params: &SystemParams) -> Result<ClosedFormReport> {
    evaluate(protocol, params, MetricKind::ExactSop)
}

/// Exact intercept probability.
pub fn ip_exact(protocol: ProtocolKind, params: &SystemParams) -> Result<ClosedFormReport> {
    evaluate(protocol, params, MetricKind::ExactIp)
}

/// High-SNR limit of the SOP; independent of `Γ_t`.
pub fn sop_asymptotic(protocol: ProtocolKind, params: &SystemParams) -> Result<ClosedFormReport> {
    evaluate(protocol, params, MetricKind::AsymptoticSop)
}

/// High-SNR limit of the IP; independent of `Γ_t`.
pub fn ip_asymptotic(protocol: ProtocolKind, params: &SystemParams) -> Result<ClosedFormReport> {
    evaluate(protocol, params, MetricKind::AsymptoticIp)
}

/// Dispatches on `kind`.
pub fn evaluate(protocol: ProtocolKind, params: &SystemParams, kind: MetricKind) -> Result<ClosedFormReport> {
    let reg = Regime::new(params, kind)?;
    let n = params.n_tags;
    let mut breakdown = BTreeMap::new();
    let second = if kind.is_ip() { "P3" } else { "P2" };

    // C_sec >= 0, so with R = 0 only an unpowered selection is an outage;
    // OTS picks a powered tag whenever one exists.
    if kind == MetricKind::ExactSop && params.rate_threshold == 0.0 {
        breakdown.insert("P1".to_string(), reg.p1);
        breakdown.insert(second.to_string(), 0.0);
        let raw = if protocol == ProtocolKind::Ots { reg.p1.powi(n as i32) } else { reg.p1 };
        return Ok(finish(protocol, kind, raw, 1.0, breakdown));
    }

    let (raw, magnitude) = match protocol {
        ProtocolKind::Sots => {
            let (p2, mag) = sots_second_term(&reg, n, &mut breakdown)?;
            breakdown.insert("P1".into(), reg.p1);
            breakdown.insert(second.into(), p2);
            (reg.p1 + p2, mag + reg.p1)
        }
        ProtocolKind::Mets => {
            let (p2, mag) = gamma_dest_second_term(&reg, Some(n), &mut breakdown)?;
            breakdown.insert("P1".into(), reg.p1);
            breakdown.insert(second.into(), p2);
            (reg.p1 + p2, mag + reg.p1)
        }
        ProtocolKind::Ots | ProtocolKind::Rts => {
            let (p2, mag) = gamma_dest_second_term(&reg, None, &mut breakdown)?;
            breakdown.insert("P1".into(), reg.p1);
            breakdown.insert(second.into(), p2);
            let single = reg.p1 + p2;
            breakdown.insert("single_tag".into(), single);
            if protocol == ProtocolKind::Ots {
                let pw = single.powi(n as i32);
                // cancellation is inherited from the single-tag value
                let ratio = (mag + reg.p1) / single.abs().max(f64::MIN_POSITIVE);
                (pw, ratio * pw.abs())
            } else {
                (single, mag + reg.p1)
            }
        }
    };
    let cancellation = if raw == 0.0 && magnitude == 0.0 {
        1.0
    } else {
        magnitude / raw.abs().max(f64::MIN_POSITIVE)
    };
    Ok(finish(protocol, kind, raw, cancellation, breakdown))
}

fn finish(
    protocol: ProtocolKind,
    kind: MetricKind,
    raw: f64,
    cancellation: f64,
    term_breakdown: BTreeMap<String, f64>,
) -> ClosedFormReport {
    ClosedFormReport {
        value: raw.clamp(0.0, 1.0),
        raw,
        protocol,
        kind,
        term_breakdown,
        cancellation,
    }
}

/// SOTS: the destination gain of the chosen tag is the largest of `n`, with
/// CDF `Σ δ t^{θ₂} e^{-λ̃_d θ₁ t}`; the eavesdropper gain is a plain draw.
fn sots_second_term(reg: &Regime, n: u32, breakdown: &mut BTreeMap<String, f64>) -> Result<(f64, f64)> {
    let mut total = CompensatedSum::new();
    for comp in specfun::compositions(n, reg.m_d as usize + 1) {
        let term = specfun::multinomial_delta(n, &comp, reg.m_d, reg.lam_d)?;
        let c = reg.lam_d * term.theta1 as f64;
        let mut inner = CompensatedSum::new();
        for q in 0..=term.theta2 {
            let src = reg.source_factor(term.theta2 - q, c)?;
            if src == 0.0 {
                continue;
            }
            let eve = reg.eve_moment(q, c * reg.r)?;
            inner.add(binomial(term.theta2, q) * reg.r.powi(q as i32) * src * eve);
        }
        let contrib = term.coeff * inner.value();
        breakdown.insert(format!("comp{:?}", comp.parts()), contrib);
        total.add(contrib);
    }
    Ok((total.value(), total.magnitude()))
}

/// Destination gain is a single Gamma draw (finite-sum CDF). The eavesdropper
/// gain is the minimum of `n` draws for METS (`Some(n)`) or a plain draw.
fn gamma_dest_second_term(
    reg: &Regime,
    eve_min_of: Option<u32>,
    breakdown: &mut BTreeMap<String, f64>,
) -> Result<(f64, f64)> {
    let powered = reg.source_factor(0, 0.0)?;
    breakdown.insert("powered".into(), powered);
    let mut total = CompensatedSum::new();
    total.add(powered);
    let c_src = reg.lam_d;
    let c_eve = reg.lam_d * reg.r;
    for j in 0..reg.m_d {
        let mut inner = CompensatedSum::new();
        for q in 0..=j {
            let src = reg.source_factor(j - q, c_src)?;
            if src == 0.0 {
                continue;
            }
            let eve = match eve_min_of {
                Some(n) => reg.min_eve_moment(n, q, c_eve)?,
                None => reg.eve_moment(q, c_eve)?,
            };
            inner.add(binomial(j, q) * reg.r.powi(q as i32) * src * eve);
        }
        let contrib = -reg.lam_d.powi(j as i32) / factorial(j) * inner.value();
        breakdown.insert(format!("j={j}"), contrib);
        total.add(contrib);
    }
    if let Some(n) = eve_min_of {
        // keep the composition count visible for diagnostics
        for term in min_cdf_expansion(n, reg.m_e, reg.lam_e).iter().enumerate() {
            breakdown.insert(
                format!("comp_min#{:03}(θ3={},θ4={})", term.0, term.1.theta1, term.1.theta2),
                term.1.coeff,
            );
        }
    }
    Ok((total.value(), total.magnitude()))
}
