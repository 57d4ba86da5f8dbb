//! Python bindings: scenario construction, closed forms, Monte Carlo and
//! config-driven sweeps.

use std::collections::BTreeMap;

use backsec::analytic::{self, MetricKind};
use backsec::config::{load_preset, ConfigError};
use backsec::montecarlo::{self, Metric};
use backsec::{ProtocolKind, SweepSpec};
use pyo3::exceptions::{PyArithmeticError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

fn core_err(e: backsec::Error) -> PyErr {
    match e {
        backsec::Error::Domain { .. } => PyArithmeticError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn config_err(e: ConfigError) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn protocol(name: &str) -> PyResult<ProtocolKind> {
    name.parse().map_err(core_err)
}

fn closed_kind(metric: Metric, method: &str) -> PyResult<MetricKind> {
    match (metric, method.to_ascii_lowercase().as_str()) {
        (Metric::Sop, "exact") => Ok(MetricKind::ExactSop),
        (Metric::Sop, "asymptotic") => Ok(MetricKind::AsymptoticSop),
        (Metric::Ip, "exact") => Ok(MetricKind::ExactIp),
        (Metric::Ip, "asymptotic") => Ok(MetricKind::AsymptoticIp),
        (_, other) => Err(PyValueError::new_err(format!(
            "method must be 'exact' or 'asymptotic', got '{other}'"
        ))),
    }
}

/// A single operating point. Keyword arguments use the config-file keys;
/// values may be numbers or strings with units, e.g. `gamma_t="30 dB"`.
#[pyclass(name = "System", module = "pybacksec")]
#[derive(Clone)]
struct PySystem {
    spec: SweepSpec,
}

#[pymethods]
impl PySystem {
    #[new]
    #[pyo3(signature = (**kwargs))]
    fn new(kwargs: Option<&Bound<'_, PyDict>>) -> PyResult<Self> {
        let mut text = String::new();
        if let Some(kw) = kwargs {
            for (k, v) in kw.iter() {
                text.push_str(&format!("{} = {}\n", k.str()?, v.str()?));
            }
        }
        Self::from_config(&text)
    }

    /// Builds a point from config-file text (sweep keys are accepted and
    /// ignored apart from the Monte Carlo settings).
    #[staticmethod]
    fn from_config(text: &str) -> PyResult<Self> {
        let spec = backsec::parse_config(text).map_err(config_err)?;
        Ok(Self { spec })
    }

    #[getter]
    fn gamma_t(&self) -> f64 {
        self.spec.base.gamma_t
    }

    #[getter]
    fn n_tags(&self) -> u32 {
        self.spec.base.n_tags
    }

    #[getter]
    fn rate(&self) -> f64 {
        self.spec.base.rate_threshold
    }

    /// Reflection threshold φ in watts.
    #[getter]
    fn phi(&self) -> f64 {
        self.spec.base.eh.phi()
    }

    /// Copy with the transmit SNR set, given in dB.
    fn with_gamma_t_db(&self, db: f64) -> Self {
        let mut s = self.clone();
        s.spec.base = s.spec.base.with_gamma_t(backsec::config::db_to_linear(db));
        s
    }

    fn with_n_tags(&self, n: u32) -> PyResult<Self> {
        let mut s = self.clone();
        s.spec.base = s.spec.base.with_n_tags(n);
        s.spec.base.validate().map_err(core_err)?;
        Ok(s)
    }

    fn with_rate(&self, rate: f64) -> PyResult<Self> {
        let mut s = self.clone();
        s.spec.base = s.spec.base.with_rate(rate);
        s.spec.base.validate().map_err(core_err)?;
        Ok(s)
    }

    /// Probability that the selected tag cannot power itself.
    fn p1(&self) -> PyResult<f64> {
        analytic::p1(&self.spec.base).map_err(core_err)
    }

    #[pyo3(signature = (protocol_name, method = "exact"))]
    fn sop(&self, protocol_name: &str, method: &str) -> PyResult<f64> {
        self.closed(Metric::Sop, protocol_name, method)
    }

    #[pyo3(signature = (protocol_name, method = "exact"))]
    fn ip(&self, protocol_name: &str, method: &str) -> PyResult<f64> {
        self.closed(Metric::Ip, protocol_name, method)
    }

    /// Closed form with diagnostics: value, raw, cancellation and the
    /// named partial sums.
    #[pyo3(signature = (protocol_name, metric, method = "exact"))]
    fn report(&self, py: Python<'_>, protocol_name: &str, metric: &str, method: &str) -> PyResult<PyObject> {
        let kind = closed_kind(parse_metric(metric)?, method)?;
        let r = analytic::evaluate(protocol(protocol_name)?, &self.spec.base, kind).map_err(core_err)?;
        let d = PyDict::new_bound(py);
        d.set_item("value", r.value)?;
        d.set_item("raw", r.raw)?;
        d.set_item("cancellation", r.cancellation)?;
        d.set_item("terms", r.term_breakdown.clone())?;
        Ok(d.into())
    }

    /// Monte Carlo estimates for all protocols and both metrics, keyed by
    /// `(protocol, metric)` with `(p_hat, stderr)` values.
    #[pyo3(signature = (trials = None, seed = None, workers = None))]
    fn simulate(
        &self,
        py: Python<'_>,
        trials: Option<u64>,
        seed: Option<u64>,
        workers: Option<usize>,
    ) -> PyResult<BTreeMap<(String, String), (f64, f64)>> {
        let mut mc = self.spec.mc;
        mc.trials = trials.unwrap_or(mc.trials);
        mc.seed = seed.unwrap_or(mc.seed);
        mc.workers = workers.unwrap_or(mc.workers);
        let params = self.spec.base;
        let report = py
            .allow_threads(|| montecarlo::simulate(&params, &mc))
            .map_err(core_err)?;
        let mut out = BTreeMap::new();
        for p in ProtocolKind::ALL {
            for m in [Metric::Sop, Metric::Ip] {
                let e = report.get(p, m);
                out.insert((p.name().to_string(), m.name().to_string()), (e.p_hat, e.stderr));
            }
        }
        Ok(out)
    }

    fn __repr__(&self) -> String {
        let b = &self.spec.base;
        format!(
            "System(gamma_t={}, n_tags={}, rate={}, m=({}, {}, {}))",
            b.gamma_t,
            b.n_tags,
            b.rate_threshold,
            b.link_s.m(),
            b.link_d.m(),
            b.link_e.m()
        )
    }
}

impl PySystem {
    fn closed(&self, metric: Metric, protocol_name: &str, method: &str) -> PyResult<f64> {
        let kind = closed_kind(metric, method)?;
        let r = analytic::evaluate(protocol(protocol_name)?, &self.spec.base, kind).map_err(core_err)?;
        Ok(r.value)
    }
}

fn parse_metric(s: &str) -> PyResult<Metric> {
    match s.to_ascii_lowercase().as_str() {
        "sop" => Ok(Metric::Sop),
        "ip" => Ok(Metric::Ip),
        other => Err(PyValueError::new_err(format!("metric must be 'sop' or 'ip', got '{other}'"))),
    }
}

/// A validated sweep loaded from a config file, text or preset.
#[pyclass(name = "Sweep", module = "pybacksec")]
struct PySweep {
    spec: SweepSpec,
}

#[pymethods]
impl PySweep {
    #[staticmethod]
    fn load(path: &str) -> PyResult<Self> {
        Ok(Self {
            spec: backsec::load_config(path).map_err(config_err)?,
        })
    }

    #[staticmethod]
    fn parse(text: &str) -> PyResult<Self> {
        Ok(Self {
            spec: backsec::parse_config(text).map_err(config_err)?,
        })
    }

    #[staticmethod]
    fn preset(name: &str) -> PyResult<Self> {
        Ok(Self {
            spec: load_preset(name).map_err(config_err)?,
        })
    }

    #[getter]
    fn axis_name(&self) -> &'static str {
        self.spec.axis.name()
    }

    #[getter]
    fn axis_values(&self) -> Vec<f64> {
        self.spec.axis_values.clone()
    }

    #[getter]
    fn trials(&self) -> u64 {
        self.spec.mc.trials
    }

    #[setter]
    fn set_trials(&mut self, trials: u64) -> PyResult<()> {
        let mut spec = self.spec.clone();
        spec.mc.trials = trials;
        spec.validate().map_err(config_err)?;
        self.spec = spec;
        Ok(())
    }

    #[getter]
    fn seed(&self) -> u64 {
        self.spec.mc.seed
    }

    #[setter]
    fn set_seed(&mut self, seed: u64) {
        self.spec.mc.seed = seed;
    }

    /// Resolved configuration text.
    fn to_config(&self) -> String {
        self.spec.to_config_string()
    }

    /// Runs the sweep and returns the CSV text. Raises ArithmeticError if any
    /// closed-form point is flagged as numerically unstable.
    fn run_csv(&self, py: Python<'_>) -> PyResult<String> {
        let spec = self.spec.clone();
        let result = py.allow_threads(|| backsec::run_sweep(&spec)).map_err(core_err)?;
        if result.is_unstable() {
            return Err(PyArithmeticError::new_err(format!(
                "{} closed-form point(s) flagged as numerically unstable",
                result.flags.len()
            )));
        }
        Ok(result.to_csv())
    }

    /// Runs the sweep and returns rows as
    /// `(axis_value, protocol, method, value, stderr, trials)` tuples.
    #[allow(clippy::type_complexity)]
    fn run(&self, py: Python<'_>) -> PyResult<Vec<(f64, String, String, f64, Option<f64>, Option<u64>)>> {
        let spec = self.spec.clone();
        let result = py.allow_threads(|| backsec::run_sweep(&spec)).map_err(core_err)?;
        Ok(result
            .rows
            .into_iter()
            .map(|r| {
                (
                    r.axis_value,
                    r.protocol.name().to_string(),
                    r.method.name().to_string(),
                    r.value,
                    r.stderr,
                    r.trials,
                )
            })
            .collect())
    }
}

#[pymodule]
fn pybacksec(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PySystem>()?;
    m.add_class::<PySweep>()?;
    m.add("PROTOCOLS", ProtocolKind::ALL.map(|p| p.name()).to_vec())?;
    m.add("CSV_HEADER", backsec::sweep::CSV_HEADER)?;
    Ok(())
}
