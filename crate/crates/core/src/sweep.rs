//! Runs a [`SweepSpec`] and renders the result as CSV.

use std::fmt::Write as _;

use crate::analytic::{self, ClosedFormReport, MetricKind};
use crate::config::{Method, SweepSpec};
use crate::error::Result;
use crate::montecarlo::{self, Metric};
use crate::system::ProtocolKind;

pub const CSV_HEADER: &str = "axis_name,axis_value,protocol,method,value,stderr,trials";

/// One output row. `stderr` and `trials` are only set for Monte Carlo rows.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub axis_value: f64,
    pub protocol: ProtocolKind,
    pub method: Method,
    pub value: f64,
    pub stderr: Option<f64>,
    pub trials: Option<u64>,
}

/// A closed-form point whose alternating sums lost too many digits, or whose
/// raw value fell outside `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct InstabilityFlag {
    pub axis_value: f64,
    pub protocol: ProtocolKind,
    pub method: Method,
    pub raw: f64,
    pub cancellation: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub axis_name: &'static str,
    pub rows: Vec<SweepRow>,
    pub flags: Vec<InstabilityFlag>,
}

impl SweepResult {
    pub fn is_unstable(&self) -> bool {
        !self.flags.is_empty()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::with_capacity(64 * (self.rows.len() + 1));
        out.push_str(CSV_HEADER);
        out.push('\n');
        let opt = |v: Option<String>| v.unwrap_or_default();
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{}",
                self.axis_name,
                r.axis_value,
                r.protocol.name(),
                r.method.name(),
                r.value,
                opt(r.stderr.map(|s| s.to_string())),
                opt(r.trials.map(|t| t.to_string())),
            );
        }
        out
    }
}

/// Evaluates every (axis value, protocol, method) in that nesting order.
/// Any error aborts the whole sweep.
pub fn run_sweep(spec: &SweepSpec) -> Result<SweepResult> {
    let (exact_kind, asym_kind) = match spec.metric {
        Metric::Sop => (MetricKind::ExactSop, MetricKind::AsymptoticSop),
        Metric::Ip => (MetricKind::ExactIp, MetricKind::AsymptoticIp),
    };
    let mut rows = Vec::new();
    let mut flags = Vec::new();
    for &x in &spec.axis_values {
        let params = spec.axis.apply(&spec.base, x)?;
        let mc = if spec.methods.contains(&Method::Mc) {
            Some(montecarlo::simulate(&params, &spec.mc)?)
        } else {
            None
        };
        for &protocol in &spec.protocols {
            for &method in &spec.methods {
                let closed = |kind| -> Result<ClosedFormReport> { analytic::evaluate(protocol, &params, kind) };
                let row = match method {
                    Method::Exact | Method::Asymptotic => {
                        let report = closed(if method == Method::Exact { exact_kind } else { asym_kind })?;
                        if report.is_unstable(spec.cancellation_limit) {
                            flags.push(InstabilityFlag {
                                axis_value: x,
                                protocol,
                                method,
                                raw: report.raw,
                                cancellation: report.cancellation,
                            });
                        }
                        SweepRow {
                            axis_value: x,
                            protocol,
                            method,
                            value: report.value,
                            stderr: None,
                            trials: None,
                        }
                    }
                    Method::Mc => {
                        let est = mc.as_ref().expect("simulated above").get(protocol, spec.metric);
                        SweepRow {
                            axis_value: x,
                            protocol,
                            method,
                            value: est.p_hat,
                            stderr: Some(est.stderr),
                            trials: Some(est.trials),
                        }
                    }
                };
                rows.push(row);
            }
        }
    }
    Ok(SweepResult {
        axis_name: spec.axis.name(),
        rows,
        flags,
    })
}
