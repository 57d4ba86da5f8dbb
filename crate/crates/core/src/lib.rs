//! Secrecy performance of energy-harvesting backscatter networks with tag
//! selection under Nakagami-m fading.
//!
//! The crate pairs closed-form evaluators ([`analytic`]) with a Monte Carlo
//! simulator ([`montecarlo`]) that scores the same model directly, and a
//! small configuration/sweep layer ([`config`], [`sweep`]) used by the CLI.

pub mod analytic;
pub mod channel;
pub mod config;
pub mod ehmodel;
pub mod error;
pub mod montecarlo;
pub mod specfun;
pub mod sweep;
pub mod system;

pub use analytic::{ClosedFormReport, MetricKind};
pub use channel::NakagamiLink;
pub use config::{load_config, parse_config, Axis, ConfigError, Method, SweepSpec};
pub use ehmodel::EhParams;
pub use error::{Error, Result};
pub use montecarlo::{McConfig, McReport, Metric, MetricEstimate};
pub use sweep::{run_sweep, SweepResult};
pub use system::{ProtocolKind, Receiver, SystemParams, TagRealization};
