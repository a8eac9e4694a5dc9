//! `iab`: run rate-coverage experiments from a TOML configuration.
//!
//! Exit status: 0 on success, 1 when validation fails or a run errors,
//! 2 on configuration errors.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use iab_core::experiment::{
    self, ExperimentConfig, PointStatus, COVERAGE_FILE, LOAD_DIST_FILE, OPTIMAL_ETA_FILE,
    VALIDATION_FILE,
};
use iab_core::{exec, Error, PartitionStrategy};

#[derive(Parser, Debug)]
#[command(
    name = "iab",
    version,
    about = "Rate coverage of mmWave integrated access and backhaul networks"
)]
struct Cli {
    /// TOML configuration; omitted keys take the built-in defaults.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Root seed of the simulation.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Simulation trials per point (0 = analysis only).
    #[arg(long, global = true)]
    trials: Option<u64>,
    #[arg(long, global = true)]
    out_dir: Option<PathBuf>,
    /// Worker threads (0 = one per core).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[arg(long, global = true)]
    sequential: bool,
    /// Backhaul fractions to sweep, comma separated.
    #[arg(long, global = true, value_delimiter = ',')]
    eta: Option<Vec<f64>>,
    /// Total bandwidths in MHz, comma separated.
    #[arg(long, global = true, value_delimiter = ',')]
    bandwidth_mhz: Option<Vec<f64>>,
    /// Users per hotspot, comma separated.
    #[arg(long, global = true, value_delimiter = ',')]
    users: Option<Vec<usize>>,
    /// Rate thresholds in Mbit/s, comma separated.
    #[arg(long, global = true, value_delimiter = ',')]
    rho_mbps: Option<Vec<f64>>,
    /// Partition strategies: equal, load-based.
    #[arg(long, global = true, value_delimiter = ',')]
    strategy: Option<Vec<String>>,
    /// Number of hotspots.
    #[arg(long, global = true)]
    hotspots: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// SNR coverage probability, analysis and simulation.
    Coverage {
        /// Thresholds in dB for backhaul, SBS access and ABS access.
        #[arg(long, num_args = 3, value_names = ["T1", "T2", "T3"], allow_negative_numbers = true)]
        theta_db: Option<Vec<f64>>,
    },
    /// Rate coverage over the sweep grid.
    RateSweep {
        /// Flag points that move by more than the quadrature tolerance
        /// when node counts are doubled.
        #[arg(long)]
        check_convergence: bool,
    },
    /// Best access/backhaul split per strategy.
    OptimalEta,
    /// Compare analysis with simulation at every sweep point.
    Validate,
    /// Exact vs Gaussian load of the other hotspots.
    LoadDist,
    /// Print the effective configuration.
    Config,
}

enum Failure {
    Config(Error),
    Run(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Config { .. } | Error::Parse(_) => Failure::Config(e),
            other => Failure::Run(other),
        }
    }
}

fn build_config(cli: &Cli) -> Result<ExperimentConfig, Failure> {
    let mut cfg = match &cli.config {
        Some(path) => experiment::load_config(path).map_err(Failure::Config)?,
        None => ExperimentConfig::default(),
    };
    if let Some(s) = cli.seed {
        cfg.monte_carlo.seed = s;
    }
    if let Some(t) = cli.trials {
        cfg.monte_carlo.trials = t;
    }
    if let Some(d) = &cli.out_dir {
        cfg.output.dir = d.clone();
    }
    if let Some(t) = cli.threads {
        cfg.execution.threads = t;
    }
    if cli.sequential {
        cfg.execution.sequential = true;
    }
    if let Some(e) = &cli.eta {
        cfg.sweep.eta = e.clone();
    }
    if let Some(w) = &cli.bandwidth_mhz {
        cfg.sweep.bandwidth_mhz = Some(w.clone());
    }
    if let Some(m) = &cli.users {
        cfg.sweep.users_per_hotspot = Some(m.clone());
    }
    if let Some(r) = &cli.rho_mbps {
        cfg.sweep.rho_mbps = Some(r.clone());
    }
    if let Some(s) = &cli.strategy {
        cfg.sweep.strategies = s
            .iter()
            .map(|v| v.parse::<PartitionStrategy>())
            .collect::<Result<_, _>>()
            .map_err(|e| {
                Failure::Config(Error::Config {
                    key: "--strategy".into(),
                    reason: e.to_string(),
                })
            })?;
    }
    if let Some(n) = cli.hotspots {
        cfg.system.hotspots = n;
    }
    match &cli.command {
        Command::Coverage { theta_db: Some(t) } => {
            cfg.coverage.theta1_db = t[0];
            cfg.coverage.theta2_db = t[1];
            cfg.coverage.theta3_db = t[2];
        }
        Command::RateSweep {
            check_convergence: true,
        } => cfg.sweep.check_convergence = true,
        _ => {}
    }
    cfg.validate().map_err(Failure::Config)?;
    Ok(cfg)
}

fn run(cli: &Cli, cfg: &ExperimentConfig) -> Result<bool, Failure> {
    let dir = &cfg.output.dir;
    match cli.command {
        Command::Coverage { .. } => {
            for r in experiment::run_coverage(cfg)? {
                let mc = match (r.pc_mc, r.mc_se) {
                    (Some(v), Some(se)) => format!("  simulation {v:.4} ± {se:.4}"),
                    _ => String::new(),
                };
                println!(
                    "W = {:.0} MHz  Pc = {:.6}{mc}",
                    r.bandwidth_hz / 1e6,
                    r.pc_analytical
                );
            }
            println!("wrote {}", dir.join(COVERAGE_FILE).display());
        }
        Command::RateSweep { .. } => {
            let out = experiment::run_sweep(cfg)?;
            let flagged = out
                .records
                .iter()
                .filter(|r| r.quad_flag != experiment::QuadFlag::Ok)
                .count();
            println!("{} points, {} flagged", out.records.len(), flagged);
            println!("wrote {}", out.csv.display());
        }
        Command::OptimalEta => {
            println!("strategy     W[MHz]  m   rho[Mbps]  eta*    Pr*     Pr(0)   gain");
            for r in experiment::find_optimal_eta(cfg)? {
                println!(
                    "{:<11} {:>7.0} {:>3} {:>9.1}  {:.3}  {:.4}  {:.4}  {:+.4}",
                    r.strategy.as_str(),
                    r.bandwidth_hz / 1e6,
                    r.users_per_hotspot,
                    r.rho_bps / 1e6,
                    r.eta_star,
                    r.pr_star,
                    r.baseline,
                    r.gain()
                );
            }
            println!("grid step {} refined by golden section", cfg.sweep.eta_step);
            println!("wrote {}", dir.join(OPTIMAL_ETA_FILE).display());
        }
        Command::Validate => {
            let report = experiment::validate(cfg)?;
            let count = |s| report.points.iter().filter(|p| p.status == s).count();
            println!(
                "points: {} pass, {} fail, {} insufficient precision",
                count(PointStatus::Pass),
                count(PointStatus::Fail),
                count(PointStatus::Insufficient)
            );
            for p in report
                .points
                .iter()
                .filter(|p| p.status == PointStatus::Fail)
            {
                let r = &p.record;
                println!(
                    "  FAIL {} eta={} W={} m={}: |diff| {:.5} > {:.5}",
                    r.strategy, r.eta, r.bandwidth_hz, r.users_per_hotspot, p.abs_diff, p.tolerance
                );
            }
            for l in &report.loads {
                println!(
                    "load TV m={} {:?}: {:.5} (limit {}) {}",
                    l.users_per_hotspot,
                    l.side,
                    l.total_variation,
                    l.limit,
                    if l.passed { "pass" } else { "FAIL" }
                );
            }
            println!("wrote {}", dir.join(VALIDATION_FILE).display());
            let ok = report.passed();
            println!("{}", if ok { "PASS" } else { "FAIL" });
            return Ok(ok);
        }
        Command::LoadDist => {
            for c in experiment::run_load_dist(cfg)? {
                println!(
                    "{:?}: mean {:.4} var {:.4} TV(exact, gaussian) {:.5}",
                    c.side, c.exact.mean, c.exact.variance, c.total_variation
                );
            }
            println!("wrote {}", dir.join(LOAD_DIST_FILE).display());
        }
        Command::Config => {
            print!("{}", cfg.to_toml()?);
        }
    }
    Ok(true)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let cfg = match build_config(&cli) {
        Ok(c) => c,
        Err(Failure::Config(e) | Failure::Run(e)) => {
            eprintln!("configuration error: {e}");
            return ExitCode::from(2);
        }
    };
    let outcome = exec::with_threads(cfg.execution.threads, || run(&cli, &cfg));
    match outcome {
        Ok(Ok(true)) => ExitCode::SUCCESS,
        Ok(Ok(false)) => ExitCode::from(1),
        Ok(Err(Failure::Config(e))) => {
            eprintln!("configuration error: {e}");
            ExitCode::from(2)
        }
        Ok(Err(Failure::Run(e))) | Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
