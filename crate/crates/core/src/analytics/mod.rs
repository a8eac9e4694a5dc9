//! Closed-form coverage and rate coverage, evaluated by nested Gauss–Legendre
//! quadrature.
//!
//! [`Analysis`] precomputes the hotspot-distance slices for one parameter
//! set. The slices do not depend on `η`, `ρ`, `m̄` or `n`, so a single
//! `Analysis` serves a whole sweep over those axes; only a change of
//! geometry, power, gain or bandwidth needs a rebuild.

pub mod association;
pub mod coverage;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::{self, Execution};
use crate::load_dist::{gaussian_cdf, in_hotspot_load_pmf_given, CltMoments};
use crate::params::SystemParams;

pub use association::{association_prob_abs, association_prob_sbs, u_max};
pub use coverage::{gamma_ccdf, HotspotSlice};

use association::x_nodes;
use coverage::Rules;

/// Gaussian load integrals cover `mean ± LOAD_SPAN_SIGMAS · sd`.
pub const LOAD_SPAN_SIGMAS: f64 = 8.0;

/// Rate thresholds `2^e - 1` with `e` above this are treated as unreachable.
pub const MAX_RATE_EXPONENT: f64 = 1e3;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoverageThresholds {
    pub theta1: f64,
    pub theta2: f64,
    pub theta3: f64,
}

impl CoverageThresholds {
    pub fn new(theta1: f64, theta2: f64, theta3: f64) -> Result<Self> {
        for (name, v) in [("theta1", theta1), ("theta2", theta2), ("theta3", theta3)] {
            if !(v >= 0.0) {
                return Err(Error::Domain(format!("{name} must be >= 0, got {v}")));
            }
        }
        Ok(Self {
            theta1,
            theta2,
            theta3,
        })
    }

    pub fn uniform(theta: f64) -> Self {
        Self {
            theta1: theta,
            theta2: theta,
            theta3: theta,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PartitionStrategy {
    #[serde(rename = "equal")]
    EqualPartition,
    #[serde(rename = "load-based")]
    LoadBased,
}

impl PartitionStrategy {
    pub const ALL: [PartitionStrategy; 2] = [Self::EqualPartition, Self::LoadBased];

    pub fn as_str(self) -> &'static str {
        match self {
            Self::EqualPartition => "equal",
            Self::LoadBased => "load-based",
        }
    }
}

impl fmt::Display for PartitionStrategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for PartitionStrategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "equal" | "equal-partition" | "equal_partition" => Ok(Self::EqualPartition),
            "load-based" | "load_based" | "loadbased" | "load" => Ok(Self::LoadBased),
            other => Err(Error::Parse(format!(
                "unknown partition strategy `{other}`"
            ))),
        }
    }
}

/// SNR threshold equivalent to sustaining `rho` over `bandwidth / load`.
///
/// `None` means the threshold is unreachable (zero bandwidth or an
/// exponent past [`MAX_RATE_EXPONENT`]) and the coverage factor is zero.
pub fn rate_to_snr_threshold(rho: f64, load: f64, bandwidth: f64) -> Option<f64> {
    if !(bandwidth > 0.0) {
        return None;
    }
    let e = rho * load / bandwidth;
    if e > MAX_RATE_EXPONENT {
        None
    } else {
        Some((e * std::f64::consts::LN_2).exp_m1())
    }
}

/// Rate coverage split into its ABS- and SBS-served parts.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateCoverage {
    pub total: f64,
    pub abs: f64,
    pub sbs: f64,
    /// Gaussian load mass outside the integrated range (below zero or
    /// beyond the truncation span), not renormalized.
    pub leaked_mass: f64,
}

/// Gaussian quadrature for the other-hotspot load: `(t, weight · density)`.
#[derive(Debug, Clone, PartialEq)]
pub struct LoadNodes {
    pub nodes: Vec<(f64, f64)>,
    pub leaked_mass: f64,
}

impl LoadNodes {
    pub(crate) fn new(mean: f64, variance: f64, rule: &crate::quadrature::GaussLegendre) -> Self {
        if !(variance > 0.0) {
            return Self {
                nodes: vec![(mean, 1.0)],
                leaked_mass: 0.0,
            };
        }
        let sd = variance.sqrt();
        let lo = (mean - LOAD_SPAN_SIGMAS * sd).max(0.0);
        let hi = mean + LOAD_SPAN_SIGMAS * sd;
        let norm = 1.0 / (sd * (2.0 * std::f64::consts::PI).sqrt());
        let nodes = rule
            .on(lo, hi)
            .map(|(t, w)| {
                let z = (t - mean) / sd;
                (t, w * norm * (-0.5 * z * z).exp())
            })
            .collect();
        let leaked_mass = gaussian_cdf(lo, mean, variance) + 1.0 - gaussian_cdf(hi, mean, variance);
        Self { nodes, leaked_mass }
    }
}

#[derive(Debug, Clone)]
struct WeightedSlice {
    weight: f64,
    slice: HotspotSlice,
}

/// Precomputed quadrature state for one parameter set.
#[derive(Debug, Clone)]
pub struct Analysis {
    params: SystemParams,
    slices: Vec<WeightedSlice>,
    t_rule: crate::quadrature::GaussLegendre,
    execution: Execution,
}

impl Analysis {
    pub fn new(params: &SystemParams) -> Result<Self> {
        Self::with_execution(params, Execution::default())
    }

    pub fn with_execution(params: &SystemParams, execution: Execution) -> Result<Self> {
        params.validate()?;
        let rules = Rules::new(params);
        let xs = x_nodes(params, &rules.x)?;
        let built = exec::map(execution, &xs, |&(x, weight)| {
            HotspotSlice::build(x, params, &rules).map(|slice| WeightedSlice { weight, slice })
        });
        let slices = built.into_iter().collect::<Result<Vec<_>>>()?;
        Ok(Self {
            params: params.clone(),
            slices,
            t_rule: rules.t,
            execution,
        })
    }

    pub fn params(&self) -> &SystemParams {
        &self.params
    }

    /// Same geometry with a different user count, hotspot count or rate
    /// threshold; those only enter the load weights.
    pub fn with_loads(&self, hotspots: usize, users_per_hotspot: usize) -> Result<Self> {
        let params = SystemParams {
            hotspots,
            users_per_hotspot,
            ..self.params.clone()
        };
        params.validate()?;
        Ok(Self {
            params,
            ..self.clone()
        })
    }

    fn slice(&self, x: f64) -> Result<HotspotSlice> {
        HotspotSlice::build(x, &self.params, &Rules::new(&self.params))
    }

    fn x_map<F>(&self, f: F) -> f64
    where
        F: Fn(&HotspotSlice) -> f64 + Sync + Send,
    {
        let parts = exec::map(self.execution, &self.slices, |ws| ws.weight * f(&ws.slice));
        parts.into_iter().sum()
    }

    pub fn moments(&self) -> CltMoments {
        let profile: Vec<_> = self
            .slices
            .iter()
            .map(|ws| association::XNode {
                x: ws.slice.x,
                weight: ws.weight,
                assoc_sbs: ws.slice.assoc_sbs,
            })
            .collect();
        CltMoments::from_profile(
            &profile,
            self.params.hotspots,
            self.params.users_per_hotspot,
        )
    }

    pub fn mean_association_sbs(&self) -> f64 {
        self.x_map(|s| s.assoc_sbs)
    }

    pub fn cov_prob_sbs_conditional(&self, theta1: f64, theta2: f64, x: f64) -> Result<f64> {
        self.check_x(x)?;
        Ok(self.slice(x)?.pc_sbs(theta1, theta2))
    }

    pub fn cov_prob_abs_conditional(&self, theta3: f64, x: f64) -> Result<f64> {
        self.check_x(x)?;
        Ok(self.slice(x)?.pc_abs(theta3))
    }

    fn check_x(&self, x: f64) -> Result<()> {
        if (0.0..=self.params.center_range()).contains(&x) {
            Ok(())
        } else {
            Err(Error::Domain(format!(
                "hotspot distance {x} outside [0, {}]",
                self.params.center_range()
            )))
        }
    }

    pub fn coverage_probability(&self, th: &CoverageThresholds) -> f64 {
        self.x_map(|s| s.pc_sbs(th.theta1, th.theta2) + s.pc_abs(th.theta3))
            .clamp(0.0, 1.0)
    }

    /// ABS-served rate coverage at backhaul fraction `eta`.
    pub fn rate_cov_abs(&self, rho: f64, eta: f64) -> (f64, f64) {
        let w_access = self.params.bandwidth - eta * self.params.bandwidth;
        if !(w_access > 0.0) {
            return (0.0, 0.0);
        }
        let users = self.params.users_per_hotspot;
        let m = self.moments();
        let load = LoadNodes::new(m.mean_abs, m.variance_abs, &self.t_rule);

        // loads k + t in ascending order; thresholds are monotone in the load
        let mut entries: Vec<(f64, usize, f64)> = Vec::with_capacity(users * load.nodes.len());
        for k in 1..=users {
            for &(t, g) in &load.nodes {
                entries.push((k as f64 + t, k, g));
            }
        }
        entries.sort_by(|a, b| a.0.total_cmp(&b.0));
        let cut = entries
            .iter()
            .position(|&(s, _, _)| rate_to_snr_threshold(rho, s, w_access).is_none())
            .unwrap_or(entries.len());
        let thetas: Vec<f64> = entries[..cut]
            .iter()
            .map(|&(s, _, _)| rate_to_snr_threshold(rho, s, w_access).unwrap_or(f64::INFINITY))
            .collect();

        let value = self.x_map(|s| {
            let a_m = s.assoc_abs();
            let pk: Vec<f64> = (0..=users)
                .map(|k| in_hotspot_load_pmf_given(k, users, a_m))
                .collect();
            let weights: Vec<f64> = entries[..cut].iter().map(|&(_, k, g)| pk[k] * g).collect();
            s.pc_abs_weighted(&thetas, &weights)
        });
        (value.clamp(0.0, 1.0), load.leaked_mass)
    }

    /// SBS-served rate coverage at backhaul fraction `eta`.
    pub fn rate_cov_sbs(&self, rho: f64, eta: f64, strategy: PartitionStrategy) -> (f64, f64) {
        let w = self.params.bandwidth;
        let w_backhaul = eta * w;
        let w_access = w - w_backhaul;
        if !(w_backhaul > 0.0) || !(w_access > 0.0) {
            return (0.0, 0.0);
        }
        let users = self.params.users_per_hotspot;
        let n = self.params.hotspots as f64;
        let m = self.moments();
        let load = LoadNodes::new(m.mean_sbs, m.variance_sbs, &self.t_rule);

        let access: Vec<Option<f64>> = (1..=users)
            .map(|k| rate_to_snr_threshold(rho, k as f64, w_access))
            .collect();
        let value = self.x_map(|s| {
            let a_s = s.assoc_sbs;
            let mut total = 0.0;
            for k in 1..=users {
                let Some(theta2) = access[k - 1] else { break };
                let pk = in_hotspot_load_pmf_given(k, users, a_s);
                if pk == 0.0 {
                    continue;
                }
                let backhaul = match strategy {
                    PartitionStrategy::EqualPartition => {
                        rate_to_snr_threshold(rho, n * k as f64, w_backhaul)
                            .map_or(0.0, |th| s.backhaul_coverage(th))
                    }
                    PartitionStrategy::LoadBased => load
                        .nodes
                        .iter()
                        .map(|&(t, g)| {
                            rate_to_snr_threshold(rho, k as f64 + t, w_backhaul)
                                .map_or(0.0, |th| g * s.backhaul_coverage(th))
                        })
                        .sum(),
                };
                if backhaul == 0.0 {
                    continue;
                }
                total += pk * backhaul * s.sbs_access_coverage(theta2);
            }
            total
        });
        let leaked = match strategy {
            PartitionStrategy::EqualPartition => 0.0,
            PartitionStrategy::LoadBased => load.leaked_mass,
        };
        (value.clamp(0.0, 1.0), leaked)
    }

    pub fn rate_coverage_at(
        &self,
        rho: f64,
        eta: f64,
        strategy: PartitionStrategy,
    ) -> RateCoverage {
        let (abs, leak_m) = self.rate_cov_abs(rho, eta);
        let (sbs, leak_s) = self.rate_cov_sbs(rho, eta, strategy);
        RateCoverage {
            total: abs + sbs,
            abs,
            sbs,
            leaked_mass: leak_m.max(leak_s),
        }
    }

    pub fn rate_coverage(&self, rho: f64, strategy: PartitionStrategy) -> RateCoverage {
        self.rate_coverage_at(rho, self.params.eta, strategy)
    }

    /// Rate coverage for both strategies, sharing the ABS term.
    pub fn rate_coverage_both(&self, rho: f64, eta: f64) -> [RateCoverage; 2] {
        let (abs, leak_m) = self.rate_cov_abs(rho, eta);
        PartitionStrategy::ALL.map(|strategy| {
            let (sbs, leak_s) = self.rate_cov_sbs(rho, eta, strategy);
            RateCoverage {
                total: abs + sbs,
                abs,
                sbs,
                leaked_mass: leak_m.max(leak_s),
            }
        })
    }
}

fn check_rho(rho: f64) -> Result<()> {
    if rho >= 0.0 && rho.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!(
            "rate threshold must be >= 0, got {rho}"
        )))
    }
}

pub fn cov_prob_sbs_conditional(
    theta1: f64,
    theta2: f64,
    x: f64,
    params: &SystemParams,
) -> Result<f64> {
    Analysis::new(params)?.cov_prob_sbs_conditional(theta1, theta2, x)
}

pub fn cov_prob_abs_conditional(theta3: f64, x: f64, params: &SystemParams) -> Result<f64> {
    Analysis::new(params)?.cov_prob_abs_conditional(theta3, x)
}

pub fn coverage_probability(thresholds: &CoverageThresholds, params: &SystemParams) -> Result<f64> {
    Ok(Analysis::new(params)?.coverage_probability(thresholds))
}

pub fn rate_cov_abs(rho: f64, params: &SystemParams) -> Result<f64> {
    check_rho(rho)?;
    Ok(Analysis::new(params)?.rate_cov_abs(rho, params.eta).0)
}

pub fn rate_cov_sbs(rho: f64, params: &SystemParams, strategy: PartitionStrategy) -> Result<f64> {
    check_rho(rho)?;
    Ok(Analysis::new(params)?
        .rate_cov_sbs(rho, params.eta, strategy)
        .0)
}

pub fn rate_coverage(
    rho: f64,
    params: &SystemParams,
    strategy: PartitionStrategy,
) -> Result<RateCoverage> {
    check_rho(rho)?;
    Ok(Analysis::new(params)?.rate_coverage(rho, strategy))
}

/// Largest change of a probability when every node count is doubled.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConvergenceReport {
    pub value: f64,
    pub refined: f64,
    pub delta: f64,
    pub target: f64,
}

impl ConvergenceReport {
    pub fn converged(&self) -> bool {
        self.delta <= self.target
    }

    pub fn into_result(self) -> Result<Self> {
        if self.converged() {
            Ok(self)
        } else {
            Err(Error::NonConvergence {
                achieved: self.delta,
                target: self.target,
            })
        }
    }
}

/// Runs `f` at the configured and at doubled node counts.
pub fn convergence_check<F>(params: &SystemParams, f: F) -> Result<ConvergenceReport>
where
    F: Fn(&Analysis) -> f64,
{
    let base = Analysis::new(params)?;
    let fine_params = SystemParams {
        quadrature: params.quadrature.doubled(),
        ..params.clone()
    };
    let fine = Analysis::new(&fine_params)?;
    let value = f(&base);
    let refined = f(&fine);
    Ok(ConvergenceReport {
        value,
        refined,
        delta: (value - refined).abs(),
        target: params.quadrature.tolerance,
    })
}

pub fn rate_coverage_checked(
    rho: f64,
    params: &SystemParams,
    strategy: PartitionStrategy,
) -> Result<(RateCoverage, ConvergenceReport)> {
    check_rho(rho)?;
    let report =
        convergence_check(params, |a| a.rate_coverage(rho, strategy).total)?.into_result()?;
    let rc = Analysis::new(params)?.rate_coverage(rho, strategy);
    Ok((rc, report))
}

/// Result of the backhaul-fraction search.
#[derive(Debug, Clone, PartialEq)]
pub struct OptimalEta {
    pub eta: f64,
    pub rate_coverage: f64,
    pub grid: Vec<(f64, f64)>,
}

/// Default grid step of the backhaul-fraction scan.
pub const ETA_GRID_STEP: f64 = 0.05;

/// Maximizes `f` over `[0, 1)`: grid scan with the given step, then golden
/// section on the bracket around the best grid point. Ties keep the
/// smallest `η`.
pub fn maximize_eta<F: FnMut(f64) -> f64>(step: f64, mut f: F) -> OptimalEta {
    let points = (1.0 / step).round().max(1.0) as usize;
    let grid: Vec<(f64, f64)> = (0..points)
        .map(|i| {
            let eta = i as f64 * step;
            (eta, f(eta))
        })
        .collect();
    let (mut best_eta, mut best) = grid[0];
    for &(eta, v) in &grid[1..] {
        if v > best {
            best = v;
            best_eta = eta;
        }
    }

    let lo = (best_eta - step).max(0.0);
    let hi = (best_eta + step).min(1.0);
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (lo, hi);
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while b - a > 1e-4 {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    let (eta, v) = if fc >= fd { (c, fc) } else { (d, fd) };
    if v > best && eta < 1.0 {
        best = v;
        best_eta = eta;
    }
    OptimalEta {
        eta: best_eta,
        rate_coverage: best,
        grid,
    }
}

impl Analysis {
    pub fn optimal_eta(&self, rho: f64, strategy: PartitionStrategy, step: f64) -> OptimalEta {
        maximize_eta(step, |eta| self.rate_coverage_at(rho, eta, strategy).total)
    }
}

pub fn optimal_eta(
    rho: f64,
    params: &SystemParams,
    strategy: PartitionStrategy,
) -> Result<OptimalEta> {
    check_rho(rho)?;
    Ok(Analysis::new(params)?.optimal_eta(rho, strategy, ETA_GRID_STEP))
}
