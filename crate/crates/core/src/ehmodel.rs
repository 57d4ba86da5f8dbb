//! Non-linear (logistic) energy harvester and the optimal dynamic reflection
//! coefficient that leaves exactly the circuit power for harvesting.

use crate::channel::NakagamiLink;
use crate::error::{Error, Result};

/// Harvester curve constants, all powers in watts.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EhParams {
    /// Saturation output power.
    pub p_max: f64,
    /// Sensitivity threshold.
    pub xi0: f64,
    /// Steepness (resistance-related), 1/W.
    pub xi1: f64,
    /// Turn-on point (capacitance-related), W.
    pub xi2: f64,
    /// Circuit consumption of a tag.
    pub p_c: f64,
}

impl EhParams {
    pub fn new(p_max: f64, xi0: f64, xi1: f64, xi2: f64, p_c: f64) -> Result<Self> {
        let eh = Self {
            p_max,
            xi0,
            xi1,
            xi2,
            p_c,
        };
        eh.validate()?;
        Ok(eh)
    }

    /// Default harvester curve (200 uW saturation, 5 uW sensitivity,
    /// ξ₁ = 5000, ξ₂ = 0.0002) with the given circuit power.
    pub fn default_curve(p_c: f64) -> Result<Self> {
        Self::new(200e-6, 5e-6, 5000.0, 2e-4, p_c)
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [self.p_max, self.xi0, self.xi1, self.xi2, self.p_c]
            .iter()
            .all(|v| v.is_finite());
        if !finite {
            return Err(Error::InvalidParams("harvester constants must be finite".into()));
        }
        if !(self.p_max > 0.0) || !(self.xi1 > 0.0) || !(self.xi2 > 0.0) || !(self.p_c > 0.0) {
            return Err(Error::InvalidParams(
                "p_max, xi1, xi2 and p_c must be positive".into(),
            ));
        }
        if !(self.xi0 >= 0.0) {
            return Err(Error::InvalidParams("xi0 must be non-negative".into()));
        }
        if self.p_c >= self.p_max {
            return Err(Error::InvalidParams(format!(
                "p_c = {} W must be below p_max = {} W (phi2 = p_max - p_c = {} W leaves the reflection threshold undefined)",
                self.p_c,
                self.p_max,
                self.p_max - self.p_c
            )));
        }
        Ok(())
    }

    /// Harvested output power for input `p_in`, clamped at zero below the
    /// sensitivity threshold.
    pub fn harvested_power(&self, p_in: f64) -> f64 {
        let num = 1.0 - (-self.xi1 * p_in + self.xi1 * self.xi0).exp();
        let den = 1.0 + (-self.xi1 * p_in + self.xi1 * self.xi2).exp();
        (self.p_max * num / den).max(0.0)
    }

    /// Input power `φ` at which the harvester output equals `p_c`:
    /// `φ = ln(φ₁/φ₂)/ξ₁` with `φ₁ = p_max e^{ξ₁ξ₀} + p_c e^{ξ₁ξ₂}` and
    /// `φ₂ = p_max - p_c`, the exact inverse of [`Self::harvested_power`].
    pub fn phi(&self) -> f64 {
        let phi1 = self.p_max * (self.xi1 * self.xi0).exp() + self.p_c * (self.xi1 * self.xi2).exp();
        let phi2 = self.p_max - self.p_c;
        (phi1 / phi2).ln() / self.xi1
    }

    /// `β* = max(1 - φ / (P d'^{-u} g²), 0)`.
    pub fn optimal_reflection(&self, p_tx: f64, link_sk: &NakagamiLink, g_sk_sq: f64) -> f64 {
        reflection_from_received(self.phi(), p_tx * link_sk.path_gain() * g_sk_sq)
    }
}

/// `β*` given `φ` and the received power at the tag.
pub(crate) fn reflection_from_received(phi: f64, p_rx: f64) -> f64 {
    if p_rx <= phi {
        0.0
    } else {
        1.0 - phi / p_rx
    }
}
