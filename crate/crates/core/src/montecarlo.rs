//! Monte Carlo estimation of SOP and IP by direct simulation of the fading
//! draws, the reflection coefficient, the SNRs and the selection rules.
//!
//! All four protocols are scored on the same draws (common random numbers).
//! Trials are cut into fixed batches; batch `i` gets its own ChaCha stream
//! seeded from `(seed, i)`, so results do not depend on the worker count.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::ehmodel::reflection_from_received;
use crate::error::{Error, Result};
use crate::system::{secrecy_capacity, select_tag, ProtocolKind, SystemParams, TagRealization};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct McConfig {
    pub trials: u64,
    pub seed: u64,
    pub batch_size: u64,
    pub workers: usize,
}

impl Default for McConfig {
    fn default() -> Self {
        Self {
            trials: 1_000_000,
            seed: 0x5EC2_E7B5,
            batch_size: 10_000,
            workers: std::thread::available_parallelism().map_or(1, |n| n.get()),
        }
    }
}

impl McConfig {
    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 || self.batch_size == 0 || self.workers == 0 {
            return Err(Error::InvalidParams(
                "trials, batch_size and workers must all be positive".into(),
            ));
        }
        Ok(())
    }
}

/// Which probability is being estimated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Metric {
    Sop,
    Ip,
}

impl Metric {
    pub fn name(self) -> &'static str {
        match self {
            Self::Sop => "sop",
            Self::Ip => "ip",
        }
    }
}

/// Estimated probability with its binomial standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricEstimate {
    pub p_hat: f64,
    pub stderr: f64,
    pub trials: u64,
    /// Events where the chosen tag could not power itself.
    pub case1: u64,
    /// Events where it could, but the secrecy condition failed.
    pub case2: u64,
}

impl MetricEstimate {
    fn from_counts(case1: u64, case2: u64, trials: u64) -> Self {
        let p_hat = (case1 + case2) as f64 / trials as f64;
        Self {
            p_hat,
            stderr: (p_hat * (1.0 - p_hat) / trials as f64).sqrt(),
            trials,
            case1,
            case2,
        }
    }

    pub fn case1_fraction(&self) -> f64 {
        self.case1 as f64 / self.trials as f64
    }
}

/// Estimates for every protocol and both metrics from one simulation pass.
#[derive(Debug, Clone, PartialEq)]
pub struct McReport {
    sop: [MetricEstimate; 4],
    ip: [MetricEstimate; 4],
}

impl McReport {
    pub fn get(&self, protocol: ProtocolKind, metric: Metric) -> MetricEstimate {
        match metric {
            Metric::Sop => self.sop[protocol.index()],
            Metric::Ip => self.ip[protocol.index()],
        }
    }
}

#[derive(Debug, Clone, Copy, Default)]
struct Counts {
    case1: [u64; 4],
    sop_case2: [u64; 4],
    ip_case2: [u64; 4],
}

impl Counts {
    fn merge(mut self, other: &Counts) -> Self {
        for i in 0..4 {
            self.case1[i] += other.case1[i];
            self.sop_case2[i] += other.sop_case2[i];
            self.ip_case2[i] += other.ip_case2[i];
        }
        self
    }
}

/// Stream seed for one batch (SplitMix64 finalizer over seed and index).
fn batch_seed(seed: u64, batch: u64) -> u64 {
    let mut z = seed ^ batch.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

struct Kernel<'a> {
    params: &'a SystemParams,
    phi: f64,
    rx_scale: f64,
    snr_d_scale: f64,
    snr_e_scale: f64,
}

impl<'a> Kernel<'a> {
    fn new(params: &'a SystemParams) -> Self {
        Self {
            params,
            phi: params.eh.phi(),
            rx_scale: params.p_tx() * params.link_s.path_gain(),
            snr_d_scale: params.eta1() * params.gamma_t,
            snr_e_scale: params.eta2() * params.gamma_t,
        }
    }

    fn draw_tag(&self, rng: &mut ChaCha8Rng) -> TagRealization {
        let p = self.params;
        let g_sk = p.link_s.sample_gain_sq(rng);
        let g_kd = p.link_d.sample_gain_sq(rng);
        let g_ke = p.link_e.sample_gain_sq(rng);
        let beta = reflection_from_received(self.phi, self.rx_scale * g_sk);
        let common = beta * g_sk;
        TagRealization::from_parts(
            g_sk,
            g_kd,
            g_ke,
            beta,
            common * self.snr_d_scale * g_kd,
            common * self.snr_e_scale * g_ke,
        )
    }

    fn run_batch(&self, seed: u64, batch: u64, trials: u64) -> Counts {
        let mut rng = ChaCha8Rng::seed_from_u64(batch_seed(seed, batch));
        let n = self.params.n_tags as usize;
        let rate = self.params.rate_threshold;
        let mut tags = Vec::with_capacity(n);
        let mut counts = Counts::default();
        for _ in 0..trials {
            tags.clear();
            for _ in 0..n {
                tags.push(self.draw_tag(&mut rng));
            }
            for proto in ProtocolKind::ALL {
                let i = proto.index();
                let t = &tags[select_tag(proto, &tags, &mut rng)];
                if !t.is_powered() {
                    counts.case1[i] += 1;
                    continue;
                }
                let (gd, ge) = (
                    t.snr(crate::system::Receiver::Destination),
                    t.snr(crate::system::Receiver::Eavesdropper),
                );
                if secrecy_capacity(gd, ge) < rate {
                    counts.sop_case2[i] += 1;
                }
                if gd < ge {
                    counts.ip_case2[i] += 1;
                }
            }
        }
        counts
    }
}

/// Runs the simulation once and reports all protocols and both metrics.
pub fn simulate(params: &SystemParams, mc: &McConfig) -> Result<McReport> {
    params.validate()?;
    mc.validate()?;
    let kernel = Kernel::new(params);
    let batches = mc.trials.div_ceil(mc.batch_size);
    let sizes = move |b: u64| mc.batch_size.min(mc.trials - b * mc.batch_size);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(mc.workers)
        .build()
        .map_err(|e| Error::InvalidParams(format!("cannot start worker pool: {e}")))?;
    let per_batch: Vec<Counts> = pool.install(|| {
        (0..batches)
            .into_par_iter()
            .map(|b| kernel.run_batch(mc.seed, b, sizes(b)))
            .collect()
    });
    let total = per_batch.iter().fold(Counts::default(), |acc, c| acc.merge(c));
    let mk = |case2: &[u64; 4]| {
        std::array::from_fn(|i| MetricEstimate::from_counts(total.case1[i], case2[i], mc.trials))
    };
    Ok(McReport {
        sop: mk(&total.sop_case2),
        ip: mk(&total.ip_case2),
    })
}

/// Monte Carlo SOP of one protocol. The pass still scores every protocol, so
/// the estimate equals `simulate(..).get(protocol, Metric::Sop)`.
pub fn sop_mc(protocol: ProtocolKind, params: &SystemParams, mc: &McConfig) -> Result<MetricEstimate> {
    Ok(simulate(params, mc)?.get(protocol, Metric::Sop))
}

/// Monte Carlo IP of one protocol.
pub fn ip_mc(protocol: ProtocolKind, params: &SystemParams, mc: &McConfig) -> Result<MetricEstimate> {
    Ok(simulate(params, mc)?.get(protocol, Metric::Ip))
}
