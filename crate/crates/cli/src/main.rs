use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use dmimo::asymptotics::{
    complexity_count, global_assumption_metric, per_bs_assumption_metric, Pinned,
};
use dmimo::combining::SchemeRegistry;
use dmimo::error::ConfigIssue;
use dmimo::harness::{self, DropSetup, ExperimentConfig};
use dmimo::{Error, Result};

/// Distributed Massive MIMO uplink simulator.
#[derive(Debug, Parser)]
#[command(name = "dmimo", version, about)]
struct Cli {
    /// Key-value config file; defaults are used for missing keys.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,

    /// Master seed, overriding the config.
    #[arg(long, global = true, value_name = "U64")]
    seed: Option<u64>,

    /// Output file, overriding the config.
    #[arg(long, global = true, value_name = "PATH")]
    out: Option<PathBuf>,

    /// Worker threads (results do not depend on this).
    #[arg(long, global = true, value_name = "N")]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run the full M-sweep and write CSV, plot script and summary.
    Run,
    /// Run the invariant suite on random instances.
    Check {
        /// Number of random instances per check.
        #[arg(long, default_value_t = 20)]
        instances: usize,
    },
    /// Print complex multiplications per coherence block for each scheme.
    Complexity,
    /// Report the linear-independence metric of the two UEs' covariances
    /// for one drop.
    Assumptions {
        /// Drop index.
        #[arg(long, default_value_t = 0)]
        drop: usize,
    },
}

fn load_config(cli: &Cli) -> Result<ExperimentConfig> {
    let mut cfg = match &cli.config {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|e| {
                Error::Config(vec![ConfigIssue::new(
                    "--config",
                    format!("cannot read {}: {e}", path.display()),
                )])
            })?;
            harness::validate_config(&text)?
        }
        None => ExperimentConfig::default(),
    };
    if let Some(seed) = cli.seed {
        cfg.set_seed(seed);
    }
    if let Some(out) = &cli.out {
        cfg.output = Some(out.clone());
    }
    Ok(cfg)
}

fn run(cfg: &ExperimentConfig) -> Result<()> {
    let registry = SchemeRegistry::builtin();
    let result = harness::run_experiment(cfg, &registry)?;
    let path = cfg
        .output
        .clone()
        .unwrap_or_else(|| PathBuf::from("results.csv"));
    let script = harness::write_outputs(&result, &path)?;
    print!("{}", harness::summary_table(&result));
    println!("wrote {} and {}", path.display(), script.display());
    Ok(())
}

fn check(cfg: &ExperimentConfig, instances: usize) -> Result<bool> {
    let report = harness::run_checks(cfg.seed(), instances)?;
    for o in &report.outcomes {
        println!(
            "{} {:<26} {}",
            if o.passed { "PASS" } else { "FAIL" },
            o.name,
            o.detail
        );
    }
    Ok(report.all_passed())
}

fn complexity(cfg: &ExperimentConfig, out: Option<&Path>) -> Result<()> {
    let registry = SchemeRegistry::builtin();
    let net = &cfg.network;
    let mut csv = String::from("scheme,N,M,tau_p,est_mults,comb_mults\n");
    println!(
        "{:<10}{:>6}{:>16}{:>20}",
        "scheme", "M", "estimation", "combiner"
    );
    for name in &cfg.schemes {
        let scheme = registry.get(name)?;
        for &m in &cfg.antenna_grid {
            let c = complexity_count(
                scheme.complexity(),
                net.num_bs as u64,
                m as u64,
                net.pilot_length as u64,
            );
            println!(
                "{:<10}{:>6}{:>16}{:>20}",
                scheme.name(),
                m,
                c.estimation_mults,
                c.combiner_mults
            );
            csv.push_str(&format!(
                "{},{},{},{},{},{}\n",
                scheme.name(),
                net.num_bs,
                m,
                net.pilot_length,
                c.estimation_mults,
                c.combiner_mults
            ));
        }
    }
    if let Some(path) = out {
        fs::write(path, csv)?;
    }
    Ok(())
}

fn assumptions(cfg: &ExperimentConfig, drop: usize) -> Result<()> {
    if drop >= cfg.drops {
        return Err(Error::Config(vec![ConfigIssue::new(
            "--drop",
            format!("drop {drop} is out of range (drops = {})", cfg.drops),
        )]));
    }
    let setup = DropSetup::new(cfg, drop)?;
    let gains = harness::drop::reference_gains(cfg)?;
    for (i, p) in setup.geometry.ue_positions.iter().enumerate() {
        println!("UE {i} at ({:.1}, {:.1}) m", p.x, p.y);
    }
    println!(
        "{:>6}{:>14}{:>14}{:>14}{:>14}",
        "M", "global(i=1)", "global(i=2)", "min per-BS", "max per-BS"
    );
    for (&m, &gain) in cfg.antenna_grid.iter().zip(&gains) {
        let cov = setup.covariances(m, gain, cfg.network.correlation_factor)?;
        let g1 = global_assumption_metric(&cov, Pinned::First)?;
        let g2 = global_assumption_metric(&cov, Pinned::Second)?;
        let per_bs = (0..cov.num_bs())
            .map(|n| per_bs_assumption_metric(&cov, n, Pinned::First).map(|r| r.value))
            .collect::<Result<Vec<_>>>()?;
        let lo = per_bs.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = per_bs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        println!(
            "{m:>6}{:>14.6e}{:>14.6e}{lo:>14.6e}{hi:>14.6e}",
            g1.value, g2.value
        );
    }
    Ok(())
}

fn execute(cli: &Cli) -> Result<bool> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(Error::Config(vec![ConfigIssue::new(
                "--threads",
                "must be positive",
            )]));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Error::Numerical(format!("cannot start thread pool: {e}")))?;
    }
    let cfg = load_config(cli)?;
    match &cli.command {
        Command::Run => run(&cfg).map(|_| true),
        Command::Check { instances } => check(&cfg, *instances),
        Command::Complexity => complexity(&cfg, cli.out.as_deref()).map(|_| true),
        Command::Assumptions { drop } => assumptions(&cfg, *drop).map(|_| true),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match execute(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
