use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use backsec::analytic::{self, MetricKind};
use backsec::config::{load_preset, ConfigError};
use backsec::montecarlo::{self, Metric};
use backsec::{load_config, parse_config, run_sweep, ProtocolKind, SweepSpec};
use clap::{Args, Parser, Subcommand};

const EXIT_CONFIG: u8 = 2;
const EXIT_UNSTABLE: u8 = 3;

const CONFIG_HELP: &str = "\
Configuration files are flat `key = value` lines; `#` starts a comment.
Numbers may carry a unit: dB, m, uW or W. Power ratios (gamma_t, gamma_p,
lambda_*) given in dB are converted as 10^(x/10); a bare number is linear.
Powers without a unit are in watts, distances in meters.

p_c (tag circuit power) is required. Everything else defaults to the
reference scenario: lambda_s/d/e = 2/3/5 dB, d_s/d/e = 1/2/4 m, u = 2,
m = 2, gamma_p = 5 dB, zeta = 2.2, R = 0.5, N = 3, noise_power = 10 uW
(transmit power P = gamma_t * noise_power), p_max = 200 uW, xi0 = 5 uW,
xi1 = 5000, xi2 = 200 uW.

Exit codes: 0 success, 2 configuration error, 3 numerical instability
flagged in a closed-form evaluation.";

#[derive(Parser)]
#[command(name = "backsec", version, about = "Secrecy outage and intercept probability sweeps for tag-selection backscatter networks", after_help = CONFIG_HELP)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a parameter sweep and write CSV.
    #[command(after_help = CONFIG_HELP)]
    Sweep(SweepArgs),
    /// Check a configuration and print it fully resolved.
    #[command(after_help = CONFIG_HELP)]
    Validate {
        #[arg(long)]
        config: PathBuf,
    },
    /// Exact, asymptotic and simulated values side by side at one point.
    #[command(after_help = CONFIG_HELP)]
    Oracle(OracleArgs),
}

#[derive(Args)]
#[command(group(clap::ArgGroup::new("source").required(true).args(["config", "preset"])))]
struct SweepArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    /// Bundled preset: fig2, fig3, fig4, fig5, fig6 or fig7.
    #[arg(long)]
    preset: Option<String>,
    /// Output file; CSV goes to stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    trials: Option<u64>,
    /// Worker threads for Monte Carlo (does not change the output).
    #[arg(long)]
    workers: Option<usize>,
}

#[derive(Args)]
struct OracleArgs {
    /// Inline `key = value` pairs separated by `;`, e.g.
    /// "p_c = 100 uW; gamma_t = 30 dB; n_tags = 4".
    #[arg(long)]
    point: String,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    trials: Option<u64>,
    #[arg(long)]
    workers: Option<usize>,
}

enum Failure {
    Config(String),
    Unstable(String),
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        Failure::Config(e.to_string())
    }
}

impl From<backsec::Error> for Failure {
    fn from(e: backsec::Error) -> Self {
        match e {
            backsec::Error::Domain { .. } => Failure::Unstable(e.to_string()),
            _ => Failure::Config(e.to_string()),
        }
    }
}

fn override_mc(spec: &mut SweepSpec, seed: Option<u64>, trials: Option<u64>, workers: Option<usize>) -> Result<(), Failure> {
    if let Some(s) = seed {
        spec.mc.seed = s;
    }
    if let Some(t) = trials {
        spec.mc.trials = t;
    }
    if let Some(w) = workers {
        spec.mc.workers = w;
    }
    spec.validate()?;
    Ok(())
}

fn sweep(args: SweepArgs) -> Result<(), Failure> {
    let mut spec = match (&args.config, &args.preset) {
        (Some(path), _) => load_config(path)?,
        (None, Some(name)) => load_preset(name)?,
        (None, None) => unreachable!("clap requires one source"),
    };
    override_mc(&mut spec, args.seed, args.trials, args.workers)?;
    let result = run_sweep(&spec)?;
    let csv = result.to_csv();
    match &args.out {
        Some(path) => fs::write(path, csv.as_bytes())
            .map_err(|e| Failure::Config(format!("cannot write {}: {e}", path.display())))?,
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(csv.as_bytes())
                .and_then(|_| out.flush())
                .map_err(|e| Failure::Config(format!("cannot write CSV: {e}")))?;
        }
    }
    if result.is_unstable() {
        let lines: Vec<String> = result
            .flags
            .iter()
            .map(|f| {
                format!(
                    "  {}={} {} {}: raw {:e}, cancellation {:.2e}",
                    result.axis_name,
                    f.axis_value,
                    f.protocol,
                    f.method,
                    f.raw,
                    f.cancellation
                )
            })
            .collect();
        return Err(Failure::Unstable(format!(
            "{} closed-form point(s) flagged as numerically unstable:\n{}",
            lines.len(),
            lines.join("\n")
        )));
    }
    Ok(())
}

fn validate(config: PathBuf) -> Result<(), Failure> {
    let spec = load_config(&config)?;
    print!("{}", spec.to_config_string());
    Ok(())
}

fn oracle(args: OracleArgs) -> Result<(), Failure> {
    let text = args.point.replace(';', "\n");
    let mut spec = parse_config(&text)?;
    override_mc(&mut spec, args.seed, args.trials, args.workers)?;
    let params = spec.base;
    let sim = montecarlo::simulate(&params, &spec.mc)?;
    let mut unstable = Vec::new();
    println!(
        "{:<6} {:<4} {:>14} {:>14} {:>14} {:>11}",
        "proto", "kind", "exact", "asymptotic", "mc", "mc_stderr"
    );
    for metric in [Metric::Sop, Metric::Ip] {
        let (ek, ak) = match metric {
            Metric::Sop => (MetricKind::ExactSop, MetricKind::AsymptoticSop),
            Metric::Ip => (MetricKind::ExactIp, MetricKind::AsymptoticIp),
        };
        for proto in ProtocolKind::ALL {
            let exact = analytic::evaluate(proto, &params, ek)?;
            let asym = analytic::evaluate(proto, &params, ak)?;
            for r in [&exact, &asym] {
                if r.is_unstable(spec.cancellation_limit) {
                    unstable.push(format!("{} {}", r.protocol, r.kind));
                }
            }
            let est = sim.get(proto, metric);
            println!(
                "{:<6} {:<4} {:>14.6e} {:>14.6e} {:>14.6e} {:>11.3e}",
                proto.name(),
                metric.name(),
                exact.value,
                asym.value,
                est.p_hat,
                est.stderr
            );
        }
    }
    println!("p1 = {:.6e}, trials = {}, seed = {}", analytic::p1(&params)?, spec.mc.trials, spec.mc.seed);
    if !unstable.is_empty() {
        return Err(Failure::Unstable(format!("unstable closed forms: {}", unstable.join(", "))));
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Sweep(args) => sweep(args),
        Command::Validate { config } => validate(config),
        Command::Oracle(args) => oracle(args),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Config(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_CONFIG)
        }
        Err(Failure::Unstable(msg)) => {
            eprintln!("warning: {msg}");
            ExitCode::from(EXIT_UNSTABLE)
        }
    }
}
