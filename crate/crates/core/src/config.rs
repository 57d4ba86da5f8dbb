//! Flat `key = value` sweep configuration.
//!
//! Lines are `key = value`, `#` starts a comment. Numeric values may carry a
//! unit suffix: `dB` (converted as `10^{x/10}`, power ratios only), `m`, `uW`
//! or `W`. A bare number is taken as linear / meters / watts.
//!
//! [`SweepSpec::to_config_string`] writes a fully resolved file (linear
//! units, per-link values, no defaults left implicit) that loads back to an
//! identical spec.

use std::collections::BTreeMap;
use std::fmt::{self, Write as _};
use std::path::Path;

use crate::analytic::DEFAULT_CANCELLATION_LIMIT;
use crate::channel::NakagamiLink;
use crate::ehmodel::EhParams;
use crate::montecarlo::{McConfig, Metric};
use crate::system::{ProtocolKind, SystemParams};

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("invalid configuration: {0}")]
    Invalid(String),
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

fn invalid(msg: impl Into<String>) -> ConfigError {
    ConfigError::Invalid(msg.into())
}

impl From<crate::Error> for ConfigError {
    fn from(e: crate::Error) -> Self {
        ConfigError::Invalid(e.to_string())
    }
}

/// How a curve is produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    Exact,
    Asymptotic,
    Mc,
}

impl Method {
    pub const ALL: [Method; 3] = [Method::Exact, Method::Asymptotic, Method::Mc];

    pub fn name(self) -> &'static str {
        match self {
            Self::Exact => "exact",
            Self::Asymptotic => "asymptotic",
            Self::Mc => "mc",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Method {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|m| m.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| format!("unknown method '{s}' (expected exact, asymptotic or mc)"))
    }
}

/// The swept parameter.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Axis {
    /// Γ_t in dB.
    GammaTDb,
    /// Tag-to-destination distance in meters.
    DistanceD,
    /// Tag-to-eavesdropper distance in meters.
    DistanceE,
    /// Secrecy threshold R.
    Rate,
    /// Common fading shape on all links (each `λ̃` held fixed).
    MAll,
}

impl Axis {
    pub const ALL: [Axis; 5] = [Axis::GammaTDb, Axis::DistanceD, Axis::DistanceE, Axis::Rate, Axis::MAll];

    pub fn name(self) -> &'static str {
        match self {
            Self::GammaTDb => "gamma_t_db",
            Self::DistanceD => "d_d",
            Self::DistanceE => "d_e",
            Self::Rate => "rate",
            Self::MAll => "m_all",
        }
    }

    /// `base` with this axis set to `value`.
    pub fn apply(self, base: &SystemParams, value: f64) -> crate::Result<SystemParams> {
        let mut p = *base;
        match self {
            Self::GammaTDb => p.gamma_t = db_to_linear(value),
            Self::DistanceD => p.link_d = p.link_d.with_distance(value)?,
            Self::DistanceE => p.link_e = p.link_e.with_distance(value)?,
            Self::Rate => p.rate_threshold = value,
            Self::MAll => p = p.with_m_all(value as u32)?,
        }
        p.validate()?;
        Ok(p)
    }
}

impl fmt::Display for Axis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Axis {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| format!("unknown axis '{s}' (expected gamma_t_db, d_d, d_e, rate or m_all)"))
    }
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// A fully validated sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub metric: Metric,
    pub methods: Vec<Method>,
    pub protocols: Vec<ProtocolKind>,
    pub axis: Axis,
    pub axis_values: Vec<f64>,
    pub base: SystemParams,
    pub mc: McConfig,
    /// Closed-form points whose cancellation ratio exceeds this are flagged.
    pub cancellation_limit: f64,
}

impl SweepSpec {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.methods.is_empty() {
            return Err(invalid("methods must list at least one method"));
        }
        if self.protocols.is_empty() {
            return Err(invalid("protocols must list at least one protocol"));
        }
        if self.axis_values.is_empty() {
            return Err(invalid("axis_values must not be empty"));
        }
        if self.axis_values.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(invalid("axis_values must be strictly increasing"));
        }
        if self.axis == Axis::MAll {
            if let Some(v) = self.axis_values.iter().find(|v| !(v.fract() == 0.0 && **v >= 1.0)) {
                return Err(invalid(format!("m_all axis values must be positive integers, got {v}")));
            }
        }
        if !(self.cancellation_limit > 0.0) {
            return Err(invalid("cancellation_limit must be positive"));
        }
        self.base.validate()?;
        self.mc.validate()?;
        for &v in &self.axis_values {
            self.axis
                .apply(&self.base, v)
                .map_err(|e| invalid(format!("{} = {v}: {e}", self.axis)))?;
        }
        Ok(())
    }

    /// Resolved configuration text; loading it yields `self` again.
    pub fn to_config_string(&self) -> String {
        let b = &self.base;
        let join = |v: Vec<String>| v.join(", ");
        let mut s = String::new();
        let mut kv = |k: &str, v: String| {
            let _ = writeln!(s, "{k} = {v}");
        };
        kv("metric", self.metric.name().to_string());
        kv("methods", join(self.methods.iter().map(|m| m.name().to_string()).collect()));
        kv("protocols", join(self.protocols.iter().map(|p| p.name().to_lowercase()).collect()));
        kv("axis", self.axis.name().to_string());
        kv("axis_values", join(self.axis_values.iter().map(|v| v.to_string()).collect()));
        kv("noise_power", format!("{} W", b.noise_power));
        kv("gamma_t", b.gamma_t.to_string());
        kv("gamma_p", b.gamma_p.to_string());
        kv("zeta", b.zeta.to_string());
        kv("n_tags", b.n_tags.to_string());
        kv("rate", b.rate_threshold.to_string());
        for (tag, link) in [("s", &b.link_s), ("d", &b.link_d), ("e", &b.link_e)] {
            kv(&format!("m_{tag}"), link.m().to_string());
            kv(&format!("omega_{tag}"), link.omega().to_string());
            kv(&format!("d_{tag}"), format!("{} m", link.distance()));
            kv(&format!("u_{tag}"), link.pathloss_exp().to_string());
        }
        kv("p_max", format!("{} W", b.eh.p_max));
        kv("xi0", format!("{} W", b.eh.xi0));
        kv("xi1", b.eh.xi1.to_string());
        kv("xi2", format!("{} W", b.eh.xi2));
        kv("p_c", format!("{} W", b.eh.p_c));
        kv("trials", self.mc.trials.to_string());
        kv("seed", self.mc.seed.to_string());
        kv("batch_size", self.mc.batch_size.to_string());
        kv("workers", self.mc.workers.to_string());
        kv("cancellation_limit", self.cancellation_limit.to_string());
        s
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Unit {
    None,
    Db,
    Meter,
    MicroWatt,
    Watt,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Kind {
    /// Power ratio: bare linear or dB.
    Ratio,
    /// Power: bare watts, W or uW.
    Power,
    /// Distance: bare or m.
    Length,
    /// Plain number, no unit allowed.
    Plain,
}

struct Entry {
    line: usize,
    value: String,
}

struct Doc {
    entries: BTreeMap<String, Entry>,
}

fn parse_err(line: usize, msg: impl Into<String>) -> ConfigError {
    ConfigError::Parse { line, msg: msg.into() }
}

const KNOWN_KEYS: &[&str] = &[
    "metric", "methods", "protocols", "axis", "axis_values", "noise_power", "gamma_t", "gamma_p",
    "zeta", "n_tags", "rate", "m", "m_s", "m_d", "m_e", "lambda_s", "lambda_d", "lambda_e",
    "omega_s", "omega_d", "omega_e", "d_s", "d_d", "d_e", "u", "u_s", "u_d", "u_e", "p_max", "xi0",
    "xi1", "xi2", "p_c", "trials", "seed", "batch_size", "workers", "cancellation_limit",
];

fn split_unit(raw: &str) -> (&str, Unit) {
    let raw = raw.trim();
    for (suffix, unit) in [("dB", Unit::Db), ("uW", Unit::MicroWatt), ("W", Unit::Watt), ("m", Unit::Meter)] {
        if let Some(num) = raw.strip_suffix(suffix) {
            return (num.trim_end(), unit);
        }
    }
    (raw, Unit::None)
}

fn parse_quantity(raw: &str, kind: Kind) -> Result<f64, String> {
    let (num, unit) = split_unit(raw);
    let x: f64 = num.parse().map_err(|_| format!("'{raw}' is not a number"))?;
    if !x.is_finite() {
        return Err(format!("'{raw}' is not finite"));
    }
    match (kind, unit) {
        (_, Unit::None) => Ok(x),
        (Kind::Ratio, Unit::Db) => Ok(db_to_linear(x)),
        (Kind::Power, Unit::Watt) | (Kind::Length, Unit::Meter) => Ok(x),
        (Kind::Power, Unit::MicroWatt) => Ok(x / 1e6),
        _ => Err(format!("unit not allowed here: '{raw}'")),
    }
}

impl Doc {
    fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut entries = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let (key, value) = content
                .split_once('=')
                .ok_or_else(|| parse_err(line, format!("expected 'key = value', got '{content}'")))?;
            let key = key.trim();
            let value = value.trim();
            if !KNOWN_KEYS.contains(&key) {
                return Err(parse_err(line, format!("unknown key '{key}'")));
            }
            if value.is_empty() {
                return Err(parse_err(line, format!("missing value for '{key}'")));
            }
            if let Some(prev) = entries.insert(
                key.to_string(),
                Entry {
                    line,
                    value: value.to_string(),
                },
            ) {
                return Err(parse_err(line, format!("duplicate key '{key}' (first set on line {})", prev.line)));
            }
        }
        Ok(Self { entries })
    }

    fn has(&self, key: &str) -> bool {
        self.entries.contains_key(key)
    }

    fn get<T>(&self, key: &str, f: impl FnOnce(&str) -> Result<T, String>) -> Result<Option<T>, ConfigError> {
        match self.entries.get(key) {
            None => Ok(None),
            Some(e) => f(&e.value).map(Some).map_err(|msg| parse_err(e.line, format!("{key}: {msg}"))),
        }
    }

    fn quantity(&self, key: &str, kind: Kind, default: f64) -> Result<f64, ConfigError> {
        Ok(self.get(key, |v| parse_quantity(v, kind))?.unwrap_or(default))
    }

    fn int<T: std::str::FromStr>(&self, key: &str, default: T) -> Result<T, ConfigError> {
        Ok(self
            .get(key, |v| v.parse::<T>().map_err(|_| format!("'{v}' is not a valid integer")))?
            .unwrap_or(default))
    }

    fn list<T>(&self, key: &str, f: impl Fn(&str) -> Result<T, String>) -> Result<Option<Vec<T>>, ConfigError> {
        self.get(key, |v| v.split(',').map(|item| f(item.trim())).collect())
    }
}

/// Expands `start:step:stop` (inclusive) or a comma list.
fn parse_axis_values(raw: &str) -> Result<Vec<f64>, String> {
    let num = |s: &str| s.trim().parse::<f64>().map_err(|_| format!("'{}' is not a number", s.trim()));
    let parts: Vec<&str> = raw.split(':').collect();
    match parts.as_slice() {
        [start, step, stop] => {
            let (start, step, stop) = (num(start)?, num(step)?, num(stop)?);
            if !(step > 0.0) || stop < start {
                return Err("range needs step > 0 and stop >= start".into());
            }
            let n = ((stop - start) / step + 1e-9).floor() as usize;
            Ok((0..=n).map(|i| start + i as f64 * step).collect())
        }
        [_] => raw.split(',').map(num).collect(),
        _ => Err("expected a comma list or start:step:stop".into()),
    }
}

/// Parses configuration text into a validated spec.
pub fn parse_config(text: &str) -> Result<SweepSpec, ConfigError> {
    let doc = Doc::parse(text)?;

    let metric = doc
        .get("metric", |v| match v {
            "sop" => Ok(Metric::Sop),
            "ip" => Ok(Metric::Ip),
            _ => Err(format!("unknown metric '{v}' (expected sop or ip)")),
        })?
        .unwrap_or(Metric::Sop);
    let methods = doc.list("methods", |v| v.parse())?.unwrap_or_else(|| vec![Method::Exact]);
    let protocols = doc.list("protocols", |v| v.parse::<ProtocolKind>().map_err(|e| e.to_string()))?.unwrap_or_else(|| ProtocolKind::ALL.to_vec());
    let axis = doc.get("axis", |v| v.parse())?.unwrap_or(Axis::GammaTDb);
    let axis_values = match doc.get("axis_values", parse_axis_values)? {
        Some(v) => v,
        None => (0..=8).map(|i| 5.0 * i as f64).collect(),
    };

    let m_all = doc.int("m", 2u32)?;
    let u_all = doc.quantity("u", Kind::Plain, 2.0)?;
    let mut links = Vec::with_capacity(3);
    for (tag, lambda_db, dist) in [("s", 2.0, 1.0), ("d", 3.0, 2.0), ("e", 5.0, 4.0)] {
        let m = doc.int(&format!("m_{tag}"), m_all)?;
        let u = doc.quantity(&format!("u_{tag}"), Kind::Plain, u_all)?;
        let d = doc.quantity(&format!("d_{tag}"), Kind::Length, dist)?;
        let (lk, ok) = (format!("lambda_{tag}"), format!("omega_{tag}"));
        let link = if doc.has(&ok) {
            if doc.has(&lk) {
                return Err(invalid(format!("set only one of {lk} and {ok}")));
            }
            NakagamiLink::new(m, doc.quantity(&ok, Kind::Ratio, 0.0)?, d, u)?
        } else {
            NakagamiLink::from_lambda(m, doc.quantity(&lk, Kind::Ratio, db_to_linear(lambda_db))?, d, u)?
        };
        links.push(link);
    }

    let p_c = doc
        .get("p_c", |v| parse_quantity(v, Kind::Power))?
        .ok_or_else(|| invalid("p_c (tag circuit power) is required; no default is assumed"))?;
    let eh = EhParams {
        p_max: doc.quantity("p_max", Kind::Power, 200e-6)?,
        xi0: doc.quantity("xi0", Kind::Power, 5e-6)?,
        xi1: doc.quantity("xi1", Kind::Plain, 5000.0)?,
        xi2: doc.quantity("xi2", Kind::Power, 2e-4)?,
        p_c,
    };
    eh.validate()?;

    let base = SystemParams {
        noise_power: doc.quantity("noise_power", Kind::Power, 1e-5)?,
        gamma_t: doc.quantity("gamma_t", Kind::Ratio, db_to_linear(30.0))?,
        gamma_p: doc.quantity("gamma_p", Kind::Ratio, db_to_linear(5.0))?,
        zeta: doc.quantity("zeta", Kind::Plain, 2.2)?,
        n_tags: doc.int("n_tags", 3u32)?,
        rate_threshold: doc.quantity("rate", Kind::Plain, 0.5)?,
        link_s: links[0],
        link_d: links[1],
        link_e: links[2],
        eh,
    };

    let defaults = McConfig::default();
    let mc = McConfig {
        trials: doc.int("trials", defaults.trials)?,
        seed: doc.int("seed", defaults.seed)?,
        batch_size: doc.int("batch_size", defaults.batch_size)?,
        workers: doc.int("workers", defaults.workers)?,
    };

    let spec = SweepSpec {
        metric,
        methods,
        protocols,
        axis,
        axis_values,
        base,
        mc,
        cancellation_limit: doc.quantity("cancellation_limit", Kind::Plain, DEFAULT_CANCELLATION_LIMIT)?,
    };
    spec.validate()?;
    Ok(spec)
}

pub fn load_config(path: impl AsRef<Path>) -> Result<SweepSpec, ConfigError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_config(&text)
}

/// Bundled figure presets as `(name, text)`.
pub const PRESETS: [(&str, &str); 6] = [
    ("fig2", include_str!("../presets/fig2.cfg")),
    ("fig3", include_str!("../presets/fig3.cfg")),
    ("fig4", include_str!("../presets/fig4.cfg")),
    ("fig5", include_str!("../presets/fig5.cfg")),
    ("fig6", include_str!("../presets/fig6.cfg")),
    ("fig7", include_str!("../presets/fig7.cfg")),
];

pub fn preset_text(name: &str) -> Option<&'static str> {
    PRESETS.iter().find(|(n, _)| *n == name).map(|(_, t)| *t)
}

pub fn load_preset(name: &str) -> Result<SweepSpec, ConfigError> {
    let text = preset_text(name).ok_or_else(|| {
        invalid(format!("unknown preset '{name}' (available: fig2, fig3, fig4, fig5, fig6, fig7)"))
    })?;
    parse_config(text)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn units() {
        assert_eq!(parse_quantity("5 dB", Kind::Ratio).unwrap(), db_to_linear(5.0));
        assert_eq!(parse_quantity("100 uW", Kind::Power).unwrap(), 1e-4);
        assert_eq!(parse_quantity("4 m", Kind::Length).unwrap(), 4.0);
        assert_eq!(parse_quantity("0.5", Kind::Plain).unwrap(), 0.5);
        assert!(parse_quantity("4 dB", Kind::Length).is_err());
        assert!(parse_quantity("2 m", Kind::Plain).is_err());
        assert!(parse_quantity("abc W", Kind::Power).is_err());
    }

    #[test]
    fn axis_ranges() {
        assert_eq!(parse_axis_values("0:10:40").unwrap(), vec![0.0, 10.0, 20.0, 30.0, 40.0]);
        assert_eq!(parse_axis_values("1, 2.5").unwrap(), vec![1.0, 2.5]);
        assert!(parse_axis_values("1:0:3").is_err());
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        let err = parse_config("p_c = 100 uW\n\nbogus = 1\n").unwrap_err();
        assert!(matches!(err, ConfigError::Parse { line: 3, .. }), "{err}");
        let err = parse_config("p_c = 100 uW\nd_e = 4 dB\n").unwrap_err();
        assert!(matches!(err, ConfigError::Parse { line: 2, .. }), "{err}");
        let err = parse_config("p_c = 1 uW\np_c = 2 uW\n").unwrap_err();
        assert!(err.to_string().contains("duplicate"), "{err}");
    }
}
