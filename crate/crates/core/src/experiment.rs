//! Experiment orchestration: configuration files, parameter sweeps, the
//! backhaul-fraction search and analysis-vs-simulation validation.
//!
//! Every command reads one [`ExperimentConfig`] (TOML) and writes CSV files
//! into `output.dir`. Rows come out in sweep order: bandwidth, then users per
//! hotspot, then rate threshold, then strategy, then `η`.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::analytics::{Analysis, CoverageThresholds, PartitionStrategy, ETA_GRID_STEP};
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::geometry::Tier;
use crate::load_dist::{compare_other_load, LoadComparison};
use crate::params::{db_to_linear, QuadratureSpec, SystemConfig, SystemParams};
use crate::simulator::{MonteCarlo, RateQuery};

pub const RATE_SWEEP_FILE: &str = "rate_sweep.csv";
pub const OPTIMAL_ETA_FILE: &str = "optimal_eta.csv";
pub const VALIDATION_FILE: &str = "validation.csv";
pub const COVERAGE_FILE: &str = "coverage.csv";
pub const LOAD_DIST_FILE: &str = "load_dist.csv";
pub const LOAD_SUMMARY_FILE: &str = "load_dist_summary.csv";

/// Header of the rate-sweep CSV. The column order is part of the file format.
pub const SWEEP_COLUMNS: [&str; 11] = [
    "strategy",
    "eta",
    "W_hz",
    "m_bar",
    "rho_bps",
    "pr_analytical",
    "pr_m",
    "pr_s",
    "pr_mc",
    "mc_se",
    "quad_flag",
];

fn default_eta_grid() -> Vec<f64> {
    (0..20).map(|i| f64::from(i) / 20.0).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepConfig {
    pub eta: Vec<f64>,
    /// Falls back to `system.bandwidth_mhz` when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bandwidth_mhz: Option<Vec<f64>>,
    /// Falls back to `system.users_per_hotspot` when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub users_per_hotspot: Option<Vec<usize>>,
    /// Falls back to `system.rho_mbps` when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rho_mbps: Option<Vec<f64>>,
    pub strategies: Vec<PartitionStrategy>,
    /// Grid step of the optimal-`η` scan before refinement.
    pub eta_step: f64,
    /// Re-evaluate every point with doubled node counts and flag changes
    /// above `quadrature.tolerance`.
    pub check_convergence: bool,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            eta: default_eta_grid(),
            bandwidth_mhz: None,
            users_per_hotspot: None,
            rho_mbps: None,
            strategies: PartitionStrategy::ALL.to_vec(),
            eta_step: ETA_GRID_STEP,
            check_convergence: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MonteCarloConfig {
    /// Trials per sweep point; 0 skips the simulation.
    pub trials: u64,
    pub seed: u64,
}

impl Default for MonteCarloConfig {
    fn default() -> Self {
        Self {
            trials: 200_000,
            seed: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CoverageConfig {
    pub theta1_db: f64,
    pub theta2_db: f64,
    pub theta3_db: f64,
}

impl Default for CoverageConfig {
    fn default() -> Self {
        Self {
            theta1_db: 0.0,
            theta2_db: 0.0,
            theta3_db: 0.0,
        }
    }
}

impl CoverageConfig {
    pub fn thresholds(&self) -> Result<CoverageThresholds> {
        CoverageThresholds::new(
            db_to_linear(self.theta1_db),
            db_to_linear(self.theta2_db),
            db_to_linear(self.theta3_db),
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ValidationConfig {
    /// Model-error allowance added to the simulation standard error.
    pub analytic_margin: f64,
    /// Below this many trials a point is reported as imprecise, not failed.
    pub min_trials: u64,
    /// Largest accepted total variation between exact and Gaussian loads.
    pub load_tv_limit: f64,
}

impl Default for ValidationConfig {
    fn default() -> Self {
        Self {
            analytic_margin: 0.005,
            min_trials: 1000,
            load_tv_limit: 0.05,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
pub struct ExecutionConfig {
    /// Worker threads; 0 lets the runtime decide.
    pub threads: usize,
    pub sequential: bool,
}

impl ExecutionConfig {
    pub fn mode(&self) -> Execution {
        if self.sequential {
            Execution::Sequential
        } else {
            Execution::Parallel
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    pub dir: PathBuf,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self {
            dir: PathBuf::from("results"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub system: SystemConfig,
    pub quadrature: QuadratureSpec,
    pub sweep: SweepConfig,
    pub monte_carlo: MonteCarloConfig,
    pub coverage: CoverageConfig,
    pub validation: ValidationConfig,
    pub execution: ExecutionConfig,
    pub output: OutputConfig,
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Parse(e.to_string()))
    }

    /// Base parameters with the quadrature section applied.
    pub fn params(&self) -> Result<SystemParams> {
        self.system.to_params_with(self.quadrature)
    }

    pub fn bandwidths_mhz(&self) -> Vec<f64> {
        self.sweep
            .bandwidth_mhz
            .clone()
            .unwrap_or_else(|| vec![self.system.bandwidth_mhz])
    }

    pub fn users_per_hotspot(&self) -> Vec<usize> {
        self.sweep
            .users_per_hotspot
            .clone()
            .unwrap_or_else(|| vec![self.system.users_per_hotspot])
    }

    pub fn rhos_mbps(&self) -> Vec<f64> {
        self.sweep
            .rho_mbps
            .clone()
            .unwrap_or_else(|| vec![self.system.rho_mbps])
    }

    pub fn validate(&self) -> Result<()> {
        self.params()?;
        let s = &self.sweep;
        if s.eta.is_empty() {
            return Err(Error::config("sweep.eta", "list is empty"));
        }
        if let Some(e) = s.eta.iter().find(|e| !(0.0..=1.0).contains(*e)) {
            return Err(Error::config("sweep.eta", format!("{e} outside [0, 1]")));
        }
        if s.strategies.is_empty() {
            return Err(Error::config("sweep.strategies", "list is empty"));
        }
        let w = self.bandwidths_mhz();
        if w.is_empty() {
            return Err(Error::config("sweep.bandwidth_mhz", "list is empty"));
        }
        if let Some(b) = w.iter().find(|b| !(**b > 0.0 && b.is_finite())) {
            return Err(Error::config(
                "sweep.bandwidth_mhz",
                format!("{b} must be positive"),
            ));
        }
        let m = self.users_per_hotspot();
        if m.is_empty() {
            return Err(Error::config("sweep.users_per_hotspot", "list is empty"));
        }
        if m.contains(&0) {
            return Err(Error::config(
                "sweep.users_per_hotspot",
                "must be at least 1",
            ));
        }
        let r = self.rhos_mbps();
        if r.is_empty() {
            return Err(Error::config("sweep.rho_mbps", "list is empty"));
        }
        if let Some(v) = r.iter().find(|v| !(**v >= 0.0 && v.is_finite())) {
            return Err(Error::config("sweep.rho_mbps", format!("{v} must be >= 0")));
        }
        if !(s.eta_step > 0.0 && s.eta_step <= 0.5) {
            return Err(Error::config(
                "sweep.eta_step",
                format!("{} outside (0, 0.5]", s.eta_step),
            ));
        }
        let v = &self.validation;
        if !(v.analytic_margin >= 0.0) {
            return Err(Error::config("validation.analytic_margin", "must be >= 0"));
        }
        if !(v.load_tv_limit > 0.0) {
            return Err(Error::config(
                "validation.load_tv_limit",
                "must be positive",
            ));
        }
        self.coverage
            .thresholds()
            .map_err(|e| Error::config("coverage", e.to_string()))?;
        Ok(())
    }

    /// One parameter set per `(W, m̄)` group, in sweep order.
    fn groups(&self) -> Result<Vec<SystemParams>> {
        let base = self.params()?;
        let mut out = Vec::new();
        for w in self.bandwidths_mhz() {
            for &m in &self.users_per_hotspot() {
                out.push(SystemParams {
                    bandwidth: w * 1e6,
                    users_per_hotspot: m,
                    ..base.clone()
                });
            }
        }
        Ok(out)
    }

    fn monte_carlo(&self, params: &SystemParams) -> MonteCarlo {
        MonteCarlo::new(
            group_seed(self.monte_carlo.seed, params),
            self.monte_carlo.trials,
        )
        .with_execution(self.execution.mode())
    }

    fn analysis(&self, params: &SystemParams) -> Result<Analysis> {
        Analysis::with_execution(params, self.execution.mode())
    }
}

pub fn load_config(path: &Path) -> Result<ExperimentConfig> {
    let text = fs::read_to_string(path)
        .map_err(|e| Error::Io(format!("cannot read {}: {e}", path.display())))?;
    ExperimentConfig::from_toml(&text)
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Simulation seed of a `(W, m̄)` group. It depends on the group's values,
/// not its position, so adding sweep points leaves other groups unchanged.
pub fn group_seed(root: u64, params: &SystemParams) -> u64 {
    let h = splitmix64(root ^ splitmix64(params.bandwidth.to_bits()));
    splitmix64(h ^ params.users_per_hotspot as u64)
}

/// One row of the rate sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRecord {
    pub strategy: PartitionStrategy,
    pub eta: f64,
    pub bandwidth_hz: f64,
    pub users_per_hotspot: usize,
    pub rho_bps: f64,
    pub pr_analytical: f64,
    pub pr_m: f64,
    pub pr_s: f64,
    pub pr_mc: Option<f64>,
    pub mc_se: Option<f64>,
    pub quad_flag: QuadFlag,
}

/// Quadrature diagnostics of a sweep row.
#[derive(Debug, Clone, PartialEq)]
pub enum QuadFlag {
    Ok,
    /// Gaussian load mass left outside the integration range.
    Tail(f64),
    /// Doubling the node counts moved the value by this much.
    Unconverged(f64),
    Error(String),
}

impl QuadFlag {
    fn classify(leaked: f64, delta: Option<f64>, tolerance: f64) -> Self {
        match delta {
            Some(d) if d > tolerance => QuadFlag::Unconverged(d),
            _ if leaked > tolerance => QuadFlag::Tail(leaked),
            _ => QuadFlag::Ok,
        }
    }

    pub fn is_error(&self) -> bool {
        matches!(self, QuadFlag::Error(_))
    }
}

impl std::fmt::Display for QuadFlag {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            QuadFlag::Ok => f.write_str("ok"),
            QuadFlag::Tail(m) => write!(f, "tail:{m:.3e}"),
            QuadFlag::Unconverged(d) => write!(f, "unconverged:{d:.3e}"),
            QuadFlag::Error(e) => write!(f, "error:{e}"),
        }
    }
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

impl SweepRecord {
    fn csv_fields(&self) -> [String; 11] {
        [
            self.strategy.to_string(),
            self.eta.to_string(),
            self.bandwidth_hz.to_string(),
            self.users_per_hotspot.to_string(),
            self.rho_bps.to_string(),
            self.pr_analytical.to_string(),
            self.pr_m.to_string(),
            self.pr_s.to_string(),
            opt(self.pr_mc),
            opt(self.mc_se),
            self.quad_flag.to_string(),
        ]
    }
}

struct Point {
    strategy: PartitionStrategy,
    eta: f64,
    rho: f64,
}

fn group_points(cfg: &ExperimentConfig) -> Vec<Point> {
    let mut pts = Vec::new();
    for rho in cfg.rhos_mbps() {
        for &strategy in &cfg.sweep.strategies {
            for &eta in &cfg.sweep.eta {
                pts.push(Point {
                    strategy,
                    eta,
                    rho: rho * 1e6,
                });
            }
        }
    }
    pts
}

fn error_record(p: &Point, params: &SystemParams, e: &Error) -> SweepRecord {
    SweepRecord {
        strategy: p.strategy,
        eta: p.eta,
        bandwidth_hz: params.bandwidth,
        users_per_hotspot: params.users_per_hotspot,
        rho_bps: p.rho,
        pr_analytical: f64::NAN,
        pr_m: f64::NAN,
        pr_s: f64::NAN,
        pr_mc: None,
        mc_se: None,
        quad_flag: QuadFlag::Error(e.to_string()),
    }
}

fn sweep_group(cfg: &ExperimentConfig, params: &SystemParams) -> Vec<SweepRecord> {
    let points = group_points(cfg);
    let analysis = match cfg.analysis(params) {
        Ok(a) => a,
        Err(e) => return points.iter().map(|p| error_record(p, params, &e)).collect(),
    };
    let fine = if cfg.sweep.check_convergence {
        let fp = SystemParams {
            quadrature: params.quadrature.doubled(),
            ..params.clone()
        };
        cfg.analysis(&fp).ok()
    } else {
        None
    };
    let mc = if cfg.monte_carlo.trials > 0 {
        let queries: Vec<RateQuery> = points
            .iter()
            .map(|p| RateQuery {
                eta: p.eta,
                rho: p.rho,
                strategy: p.strategy,
            })
            .collect();
        Some(cfg.monte_carlo(params).rate_coverage_many(&queries, params))
    } else {
        None
    };
    points
        .iter()
        .enumerate()
        .map(|(i, p)| {
            let rc = analysis.rate_coverage_at(p.rho, p.eta, p.strategy);
            let delta = fine
                .as_ref()
                .map(|f| (f.rate_coverage_at(p.rho, p.eta, p.strategy).total - rc.total).abs());
            let mut flag = QuadFlag::classify(rc.leaked_mass, delta, params.quadrature.tolerance);
            let (pr_mc, mc_se) = match &mc {
                Some(Ok(est)) => (Some(est[i].value), Some(est[i].std_error)),
                Some(Err(e)) => {
                    flag = QuadFlag::Error(e.to_string());
                    (None, None)
                }
                None => (None, None),
            };
            SweepRecord {
                strategy: p.strategy,
                eta: p.eta,
                bandwidth_hz: params.bandwidth,
                users_per_hotspot: params.users_per_hotspot,
                rho_bps: p.rho,
                pr_analytical: rc.total,
                pr_m: rc.abs,
                pr_s: rc.sbs,
                pr_mc,
                mc_se,
                quad_flag: flag,
            }
        })
        .collect()
}

/// Evaluates every sweep point without writing anything.
pub fn sweep_records(cfg: &ExperimentConfig) -> Result<Vec<SweepRecord>> {
    cfg.validate()?;
    Ok(cfg
        .groups()?
        .iter()
        .flat_map(|p| sweep_group(cfg, p))
        .collect())
}

fn prepare_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| {
        Error::Io(format!(
            "cannot create output directory {}: {e}",
            dir.display()
        ))
    })
}

fn write_csv<I, R>(path: &Path, header: &[&str], rows: I) -> Result<()>
where
    I: IntoIterator<Item = R>,
    R: IntoIterator,
    R::Item: AsRef<[u8]>,
{
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(header)?;
    for r in rows {
        w.write_record(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_sweep_csv(path: &Path, records: &[SweepRecord]) -> Result<()> {
    write_csv(path, &SWEEP_COLUMNS, records.iter().map(|r| r.csv_fields()))
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepOutput {
    pub records: Vec<SweepRecord>,
    pub csv: PathBuf,
}

/// Runs the rate sweep and writes `rate_sweep.csv`.
pub fn run_sweep(cfg: &ExperimentConfig) -> Result<SweepOutput> {
    let records = sweep_records(cfg)?;
    prepare_dir(&cfg.output.dir)?;
    let csv = cfg.output.dir.join(RATE_SWEEP_FILE);
    write_sweep_csv(&csv, &records)?;
    Ok(SweepOutput { records, csv })
}

/// Best backhaul fraction of one `(W, m̄, ρ, strategy)` combination.
#[derive(Debug, Clone, PartialEq)]
pub struct OptimalEtaRecord {
    pub strategy: PartitionStrategy,
    pub bandwidth_hz: f64,
    pub users_per_hotspot: usize,
    pub rho_bps: f64,
    pub eta_star: f64,
    pub pr_star: f64,
    /// Macro-only rate coverage, `η = 0`.
    pub baseline: f64,
    pub grid_step: f64,
}

impl OptimalEtaRecord {
    pub fn gain(&self) -> f64 {
        self.pr_star - self.baseline
    }
}

pub const OPTIMAL_ETA_COLUMNS: [&str; 9] = [
    "strategy",
    "W_hz",
    "m_bar",
    "rho_bps",
    "eta_star",
    "pr_star",
    "pr_eta0",
    "iab_gain",
    "grid_step",
];

pub fn optimal_eta_records(cfg: &ExperimentConfig) -> Result<Vec<OptimalEtaRecord>> {
    cfg.validate()?;
    let mut out = Vec::new();
    for params in cfg.groups()? {
        let analysis = cfg.analysis(&params)?;
        for rho in cfg.rhos_mbps() {
            let rho = rho * 1e6;
            for &strategy in &cfg.sweep.strategies {
                let best = analysis.optimal_eta(rho, strategy, cfg.sweep.eta_step);
                out.push(OptimalEtaRecord {
                    strategy,
                    bandwidth_hz: params.bandwidth,
                    users_per_hotspot: params.users_per_hotspot,
                    rho_bps: rho,
                    eta_star: best.eta,
                    pr_star: best.rate_coverage,
                    baseline: analysis.rate_coverage_at(rho, 0.0, strategy).total,
                    grid_step: cfg.sweep.eta_step,
                });
            }
        }
    }
    Ok(out)
}

/// Runs the optimal-`η` search and writes `optimal_eta.csv`.
pub fn find_optimal_eta(cfg: &ExperimentConfig) -> Result<Vec<OptimalEtaRecord>> {
    let records = optimal_eta_records(cfg)?;
    prepare_dir(&cfg.output.dir)?;
    let rows = records.iter().map(|r| {
        [
            r.strategy.to_string(),
            r.bandwidth_hz.to_string(),
            r.users_per_hotspot.to_string(),
            r.rho_bps.to_string(),
            r.eta_star.to_string(),
            r.pr_star.to_string(),
            r.baseline.to_string(),
            r.gain().to_string(),
            r.grid_step.to_string(),
        ]
    });
    write_csv(
        &cfg.output.dir.join(OPTIMAL_ETA_FILE),
        &OPTIMAL_ETA_COLUMNS,
        rows,
    )?;
    Ok(records)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PointStatus {
    Pass,
    Fail,
    /// Too few trials for a meaningful comparison.
    Insufficient,
}

impl PointStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            PointStatus::Pass => "pass",
            PointStatus::Fail => "fail",
            PointStatus::Insufficient => "insufficient",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ValidationPoint {
    pub record: SweepRecord,
    pub abs_diff: f64,
    pub tolerance: f64,
    pub status: PointStatus,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LoadCheck {
    pub users_per_hotspot: usize,
    pub side: Tier,
    pub total_variation: f64,
    pub limit: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ValidationReport {
    pub points: Vec<ValidationPoint>,
    pub loads: Vec<LoadCheck>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.points.iter().all(|p| p.status != PointStatus::Fail)
            && self.loads.iter().all(|l| l.passed)
    }

    pub fn insufficient(&self) -> usize {
        self.points
            .iter()
            .filter(|p| p.status == PointStatus::Insufficient)
            .count()
    }
}

/// Joint tolerance for comparing an analytical value with a simulated one.
pub fn joint_tolerance(std_error: f64, margin: f64) -> f64 {
    3.0 * (std_error + margin)
}

fn judge(record: SweepRecord, cfg: &ExperimentConfig) -> ValidationPoint {
    let margin = cfg.validation.analytic_margin;
    match (record.pr_mc, record.mc_se) {
        _ if record.quad_flag.is_error() => ValidationPoint {
            record,
            abs_diff: f64::NAN,
            tolerance: f64::NAN,
            status: PointStatus::Fail,
        },
        (Some(mc), Some(se)) => {
            let abs_diff = (record.pr_analytical - mc).abs();
            let tolerance = joint_tolerance(se, margin);
            let status = if cfg.monte_carlo.trials < cfg.validation.min_trials {
                PointStatus::Insufficient
            } else if abs_diff <= tolerance {
                PointStatus::Pass
            } else {
                PointStatus::Fail
            };
            ValidationPoint {
                record,
                abs_diff,
                tolerance,
                status,
            }
        }
        _ => ValidationPoint {
            record,
            abs_diff: f64::NAN,
            tolerance: f64::NAN,
            status: PointStatus::Insufficient,
        },
    }
}

pub fn load_checks(cfg: &ExperimentConfig) -> Result<Vec<LoadCheck>> {
    let base = cfg.params()?;
    let mut out = Vec::new();
    for &m in &cfg.users_per_hotspot() {
        let params = SystemParams {
            users_per_hotspot: m,
            ..base.clone()
        };
        for side in [Tier::Abs, Tier::Sbs] {
            let c = compare_other_load(side, &params)?;
            out.push(LoadCheck {
                users_per_hotspot: m,
                side,
                total_variation: c.total_variation,
                limit: cfg.validation.load_tv_limit,
                passed: c.total_variation < cfg.validation.load_tv_limit,
            });
        }
    }
    Ok(out)
}

pub const VALIDATION_COLUMNS: [&str; 10] = [
    "strategy",
    "eta",
    "W_hz",
    "m_bar",
    "rho_bps",
    "pr_analytical",
    "pr_mc",
    "abs_diff",
    "tolerance",
    "status",
];

/// Compares every sweep point against simulation and writes `validation.csv`.
pub fn validate(cfg: &ExperimentConfig) -> Result<ValidationReport> {
    let points: Vec<ValidationPoint> = sweep_records(cfg)?
        .into_iter()
        .map(|r| judge(r, cfg))
        .collect();
    let loads = load_checks(cfg)?;
    prepare_dir(&cfg.output.dir)?;
    let rows = points.iter().map(|p| {
        let r = &p.record;
        [
            r.strategy.to_string(),
            r.eta.to_string(),
            r.bandwidth_hz.to_string(),
            r.users_per_hotspot.to_string(),
            r.rho_bps.to_string(),
            r.pr_analytical.to_string(),
            opt(r.pr_mc),
            p.abs_diff.to_string(),
            p.tolerance.to_string(),
            p.status.as_str().to_string(),
        ]
    });
    write_csv(
        &cfg.output.dir.join(VALIDATION_FILE),
        &VALIDATION_COLUMNS,
        rows,
    )?;
    Ok(ValidationReport { points, loads })
}

#[derive(Debug, Clone, PartialEq)]
pub struct CoverageRecord {
    pub bandwidth_hz: f64,
    pub thresholds: CoverageThresholds,
    pub pc_analytical: f64,
    pub pc_mc: Option<f64>,
    pub mc_se: Option<f64>,
}

pub const COVERAGE_COLUMNS: [&str; 7] = [
    "W_hz",
    "theta1_db",
    "theta2_db",
    "theta3_db",
    "pc_analytical",
    "pc_mc",
    "mc_se",
];

/// SNR coverage per swept bandwidth; writes `coverage.csv`.
pub fn run_coverage(cfg: &ExperimentConfig) -> Result<Vec<CoverageRecord>> {
    cfg.validate()?;
    let thresholds = cfg.coverage.thresholds()?;
    let base = cfg.params()?;
    let mut out = Vec::new();
    for w in cfg.bandwidths_mhz() {
        let params = SystemParams {
            bandwidth: w * 1e6,
            ..base.clone()
        };
        let pc = cfg.analysis(&params)?.coverage_probability(&thresholds);
        let est = if cfg.monte_carlo.trials > 0 {
            Some(cfg.monte_carlo(&params).coverage(&thresholds, &params)?)
        } else {
            None
        };
        out.push(CoverageRecord {
            bandwidth_hz: params.bandwidth,
            thresholds,
            pc_analytical: pc,
            pc_mc: est.map(|e| e.value),
            mc_se: est.map(|e| e.std_error),
        });
    }
    prepare_dir(&cfg.output.dir)?;
    let rows = out.iter().map(|r| {
        [
            r.bandwidth_hz.to_string(),
            cfg.coverage.theta1_db.to_string(),
            cfg.coverage.theta2_db.to_string(),
            cfg.coverage.theta3_db.to_string(),
            r.pc_analytical.to_string(),
            opt(r.pc_mc),
            opt(r.mc_se),
        ]
    });
    write_csv(&cfg.output.dir.join(COVERAGE_FILE), &COVERAGE_COLUMNS, rows)?;
    Ok(out)
}

fn side_name(side: Tier) -> &'static str {
    match side {
        Tier::Abs => "abs",
        Tier::Sbs => "sbs",
    }
}

/// Exact and Gaussian other-hotspot loads per swept `m̄`; writes the pmfs
/// and a summary with the total variation.
pub fn run_load_dist(cfg: &ExperimentConfig) -> Result<Vec<LoadComparison>> {
    cfg.validate()?;
    let base = cfg.params()?;
    let mut out = Vec::new();
    for &m in &cfg.users_per_hotspot() {
        let params = SystemParams {
            users_per_hotspot: m,
            ..base.clone()
        };
        for side in [Tier::Abs, Tier::Sbs] {
            out.push(compare_other_load(side, &params)?);
        }
    }
    prepare_dir(&cfg.output.dir)?;
    let n = base.hotspots;
    let ms = cfg.users_per_hotspot();
    let mut pmf_rows = Vec::new();
    let mut summary_rows = Vec::new();
    for (i, c) in out.iter().enumerate() {
        let m = ms[i / 2];
        for (k, (e, g)) in c.exact.masses.iter().zip(&c.gaussian.masses).enumerate() {
            pmf_rows.push([
                side_name(c.side).to_string(),
                n.to_string(),
                m.to_string(),
                k.to_string(),
                e.to_string(),
                g.to_string(),
            ]);
        }
        summary_rows.push([
            side_name(c.side).to_string(),
            n.to_string(),
            m.to_string(),
            c.exact.mean.to_string(),
            c.exact.variance.to_string(),
            c.gaussian.mean.to_string(),
            c.gaussian.variance.to_string(),
            c.total_variation.to_string(),
        ]);
    }
    write_csv(
        &cfg.output.dir.join(LOAD_DIST_FILE),
        &["side", "n", "m_bar", "load", "exact_pmf", "gaussian_pmf"],
        pmf_rows,
    )?;
    write_csv(
        &cfg.output.dir.join(LOAD_SUMMARY_FILE),
        &[
            "side",
            "n",
            "m_bar",
            "exact_mean",
            "exact_variance",
            "clt_mean",
            "clt_variance",
            "total_variation",
        ],
        summary_rows,
    )?;
    Ok(out)
}

/// Writes the effective configuration next to the results.
pub fn write_effective_config(cfg: &ExperimentConfig) -> Result<PathBuf> {
    prepare_dir(&cfg.output.dir)?;
    let path = cfg.output.dir.join("config.toml");
    let mut f = fs::File::create(&path)?;
    f.write_all(cfg.to_toml()?.as_bytes())?;
    Ok(path)
}
