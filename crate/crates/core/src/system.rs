//! Scenario assembly: link budget, per-tag SNRs, secrecy capacity and the
//! four tag-selection rules.

use std::fmt;
use std::str::FromStr;

use rand::Rng;

use crate::channel::NakagamiLink;
use crate::ehmodel::{reflection_from_received, EhParams};
use crate::error::{Error, Result};

/// Tag-selection protocol.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ProtocolKind {
    /// Strongest tag-to-destination gain.
    Sots,
    /// Weakest tag-to-eavesdropper gain.
    Mets,
    /// Largest instantaneous secrecy capacity.
    Ots,
    /// Uniformly random tag.
    Rts,
}

impl ProtocolKind {
    pub const ALL: [ProtocolKind; 4] = [Self::Sots, Self::Mets, Self::Ots, Self::Rts];

    pub fn name(self) -> &'static str {
        match self {
            Self::Sots => "SOTS",
            Self::Mets => "METS",
            Self::Ots => "OTS",
            Self::Rts => "RTS",
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for ProtocolKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ProtocolKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_uppercase().as_str() {
            "SOTS" => Ok(Self::Sots),
            "METS" => Ok(Self::Mets),
            "OTS" => Ok(Self::Ots),
            "RTS" => Ok(Self::Rts),
            other => Err(Error::InvalidParams(format!("unknown protocol `{other}`"))),
        }
    }
}

/// Receiving node.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Receiver {
    Destination,
    Eavesdropper,
}

/// Full scenario. Transmit power follows the SNR: `P = Γ_t · σ²`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SystemParams {
    /// Receiver noise power σ² in watts.
    pub noise_power: f64,
    /// Average transmit SNR Γ_t (linear).
    pub gamma_t: f64,
    /// Modulation performance gap Γ_p (linear).
    pub gamma_p: f64,
    /// Tag scattering coefficient ζ.
    pub zeta: f64,
    pub n_tags: u32,
    /// Secrecy threshold R in bits/s/Hz.
    pub rate_threshold: f64,
    pub link_s: NakagamiLink,
    pub link_d: NakagamiLink,
    pub link_e: NakagamiLink,
    pub eh: EhParams,
}

impl SystemParams {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("noise_power", self.noise_power),
            ("gamma_t", self.gamma_t),
            ("gamma_p", self.gamma_p),
            ("zeta", self.zeta),
        ] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::InvalidParams(format!("{name} = {v} must be positive and finite")));
            }
        }
        if self.n_tags == 0 {
            return Err(Error::InvalidParams("n_tags must be >= 1".into()));
        }
        if !(self.rate_threshold >= 0.0) || !self.rate_threshold.is_finite() {
            return Err(Error::InvalidParams(format!(
                "rate threshold R = {} must be non-negative",
                self.rate_threshold
            )));
        }
        self.eh.validate()
    }

    /// Transmit power `P`.
    pub fn p_tx(&self) -> f64 {
        self.gamma_t * self.noise_power
    }

    /// `τ = 2^R`.
    pub fn tau(&self) -> f64 {
        self.rate_threshold.exp2()
    }

    /// `η₁ = ζ d_s^{-u_s} d_d^{-u_d} / Γ_p`.
    pub fn eta1(&self) -> f64 {
        self.zeta * self.link_s.path_gain() * self.link_d.path_gain() / self.gamma_p
    }

    /// `η₂ = ζ d_s^{-u_s} d_e^{-u_e} / Γ_p`.
    pub fn eta2(&self) -> f64 {
        self.zeta * self.link_s.path_gain() * self.link_e.path_gain() / self.gamma_p
    }

    /// Squared source-to-tag gain below which a tag cannot power itself,
    /// `φ / (P d_s^{-u_s})`.
    pub fn activation_gain(&self) -> f64 {
        self.eh.phi() / (self.p_tx() * self.link_s.path_gain())
    }

    pub fn with_gamma_t(mut self, gamma_t: f64) -> Self {
        self.gamma_t = gamma_t;
        self
    }

    pub fn with_n_tags(mut self, n_tags: u32) -> Self {
        self.n_tags = n_tags;
        self
    }

    pub fn with_rate(mut self, rate: f64) -> Self {
        self.rate_threshold = rate;
        self
    }

    /// Sets the same fading shape on all three links, keeping each `λ̃`.
    pub fn with_m_all(mut self, m: u32) -> Result<Self> {
        self.link_s = self.link_s.with_m_fixed_lambda(m)?;
        self.link_d = self.link_d.with_m_fixed_lambda(m)?;
        self.link_e = self.link_e.with_m_fixed_lambda(m)?;
        Ok(self)
    }

    /// One tag's realization for the given squared gains.
    pub fn realize(&self, g_sk_sq: f64, g_kd_sq: f64, g_ke_sq: f64) -> TagRealization {
        let p_rx = self.p_tx() * self.link_s.path_gain() * g_sk_sq;
        let beta_star = reflection_from_received(self.eh.phi(), p_rx);
        self.realize_with_beta(g_sk_sq, g_kd_sq, g_ke_sq, beta_star)
    }

    pub(crate) fn realize_with_beta(
        &self,
        g_sk_sq: f64,
        g_kd_sq: f64,
        g_ke_sq: f64,
        beta_star: f64,
    ) -> TagRealization {
        let common = beta_star * g_sk_sq * self.gamma_t;
        TagRealization {
            g_sk_sq,
            g_kd_sq,
            g_ke_sq,
            beta_star,
            snr_d: common * self.eta1() * g_kd_sq,
            snr_e: common * self.eta2() * g_ke_sq,
        }
    }
}

/// One fading draw for one tag, with its reflection coefficient and the
/// resulting SNRs at destination and eavesdropper.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TagRealization {
    pub g_sk_sq: f64,
    pub g_kd_sq: f64,
    pub g_ke_sq: f64,
    pub beta_star: f64,
    snr_d: f64,
    snr_e: f64,
}

impl TagRealization {
    pub(crate) fn from_parts(
        g_sk_sq: f64,
        g_kd_sq: f64,
        g_ke_sq: f64,
        beta_star: f64,
        snr_d: f64,
        snr_e: f64,
    ) -> Self {
        Self {
            g_sk_sq,
            g_kd_sq,
            g_ke_sq,
            beta_star,
            snr_d,
            snr_e,
        }
    }

    pub fn is_powered(&self) -> bool {
        self.beta_star > 0.0
    }

    pub fn secrecy_capacity(&self) -> f64 {
        secrecy_capacity(self.snr_d, self.snr_e)
    }

    pub fn snr(&self, receiver: Receiver) -> f64 {
        match receiver {
            Receiver::Destination => self.snr_d,
            Receiver::Eavesdropper => self.snr_e,
        }
    }
}

/// Instantaneous SNR `ζ β* d_s^{-u_s} d_x^{-u_x} g²_sk g²_kx Γ_t / Γ_p`.
pub fn snr_at(params: &SystemParams, realization: &TagRealization, receiver: Receiver) -> f64 {
    let (link, g_kx) = match receiver {
        Receiver::Destination => (&params.link_d, realization.g_kd_sq),
        Receiver::Eavesdropper => (&params.link_e, realization.g_ke_sq),
    };
    params.zeta
        * realization.beta_star
        * params.link_s.path_gain()
        * link.path_gain()
        * realization.g_sk_sq
        * g_kx
        * params.gamma_t
        / params.gamma_p
}

/// `max(log₂((1+γ_d)/(1+γ_e)), 0)`.
pub fn secrecy_capacity(gamma_d: f64, gamma_e: f64) -> f64 {
    ((1.0 + gamma_d) / (1.0 + gamma_e)).log2().max(0.0)
}

/// Index of the tag picked by `protocol`. Ties go to the lowest index; for
/// OTS a powered tag wins a capacity tie against an unpowered one.
///
/// Only RTS consumes randomness.
pub fn select_tag<R: Rng + ?Sized>(
    protocol: ProtocolKind,
    realizations: &[TagRealization],
    rng: &mut R,
) -> usize {
    assert!(!realizations.is_empty(), "select_tag needs at least one tag");
    match protocol {
        ProtocolKind::Sots => arg_best(realizations, |a, b| a.g_kd_sq > b.g_kd_sq),
        ProtocolKind::Mets => arg_best(realizations, |a, b| a.g_ke_sq < b.g_ke_sq),
        ProtocolKind::Ots => arg_best(realizations, |a, b| {
            let (ca, cb) = (a.secrecy_capacity(), b.secrecy_capacity());
            ca > cb || (ca == cb && a.is_powered() && !b.is_powered())
        }),
        ProtocolKind::Rts => rng.random_range(0..realizations.len()),
    }
}

fn arg_best(tags: &[TagRealization], better: impl Fn(&TagRealization, &TagRealization) -> bool) -> usize {
    let mut best = 0;
    for (i, t) in tags.iter().enumerate().skip(1) {
        if better(t, &tags[best]) {
            best = i;
        }
    }
    best
}
