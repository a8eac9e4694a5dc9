//! Load distributions.
//!
//! Given the typical user's hotspot at `x`, the number of users that the
//! hotspot puts on the ABS (or on its own SBS), typical user included, is
//! `1 + Binomial(m̄ - 1, A(x))`. The load from the other `n - 1` hotspots is
//! a sum of i.i.d. mixed binomials; it is approximated by a Gaussian with
//! matched moments, and also available exactly through direct convolution.

use std::f64::consts::PI;

use statrs::function::erf::erfc;

use crate::analytics::association::{association_prob_sbs, association_profile, XNode};
use crate::error::{Error, Result};
use crate::geometry::Tier;
use crate::params::SystemParams;

/// Largest `(n - 1) m̄` for which the exact convolution is attempted.
pub const MAX_EXACT_SUPPORT: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LoadKind {
    ExactConvolution,
    GaussianApprox,
}

/// PMF over the integer loads `0..masses.len()`.
#[derive(Debug, Clone, PartialEq)]
pub struct LoadDistribution {
    pub masses: Vec<f64>,
    pub kind: LoadKind,
    pub mean: f64,
    pub variance: f64,
    /// Probability outside the support (non-zero only for the Gaussian).
    pub tail_mass: f64,
}

impl LoadDistribution {
    fn from_masses(masses: Vec<f64>, kind: LoadKind, tail_mass: f64) -> Self {
        let mean: f64 = masses.iter().enumerate().map(|(k, p)| k as f64 * p).sum();
        let second: f64 = masses
            .iter()
            .enumerate()
            .map(|(k, p)| (k as f64 - mean).powi(2) * p)
            .sum();
        Self {
            masses,
            kind,
            mean,
            variance: second.max(0.0),
            tail_mass,
        }
    }

    pub fn total_mass(&self) -> f64 {
        self.masses.iter().sum::<f64>() + self.tail_mass
    }

    /// Total-variation distance; the other distribution's tail mass counts
    /// fully, and support mismatch is treated as zero mass.
    pub fn total_variation(&self, other: &LoadDistribution) -> f64 {
        let len = self.masses.len().max(other.masses.len());
        let inside: f64 = (0..len)
            .map(|k| {
                let a = self.masses.get(k).copied().unwrap_or(0.0);
                let b = other.masses.get(k).copied().unwrap_or(0.0);
                (a - b).abs()
            })
            .sum();
        0.5 * (inside + self.tail_mass + other.tail_mass)
    }
}

fn binomial_coefficient(trials: usize, k: usize) -> f64 {
    if k > trials {
        return 0.0;
    }
    let k = k.min(trials - k);
    let mut c = 1.0;
    for i in 0..k {
        c *= (trials - i) as f64 / (i + 1) as f64;
    }
    c
}

/// `C(n, k) p^k (1-p)^(n-k)`.
pub fn binomial(n: usize, k: usize, p: f64) -> f64 {
    if k > n {
        return 0.0;
    }
    binomial_coefficient(n, k) * p.powi(k as i32) * (1.0 - p).powi((n - k) as i32)
}

/// Probability that the hotspot at `x` loads the given side with `k` users,
/// typical user included: `C(m̄-1, k-1) A^(k-1) (1-A)^(m̄-k)`.
pub fn in_hotspot_load_pmf_given(k: usize, users: usize, assoc: f64) -> f64 {
    if k == 0 || k > users {
        return 0.0;
    }
    binomial(users - 1, k - 1, assoc)
}

pub fn in_hotspot_load_pmf(k: usize, x: f64, side: Tier, params: &SystemParams) -> Result<f64> {
    let a_s = association_prob_sbs(x, params)?;
    let a = match side {
        Tier::Abs => 1.0 - a_s,
        Tier::Sbs => a_s,
    };
    Ok(in_hotspot_load_pmf_given(k, params.users_per_hotspot, a))
}

/// Mean and variance of the load contributed by the other `n - 1` hotspots.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CltMoments {
    pub mean_abs: f64,
    pub mean_sbs: f64,
    pub variance_abs: f64,
    pub variance_sbs: f64,
}

impl CltMoments {
    pub fn from_profile(profile: &[XNode], hotspots: usize, users: usize) -> Self {
        let others = hotspots.saturating_sub(1) as f64;
        let m = users as f64;
        let (mut e_am, mut e_am_as, mut e_am2) = (0.0, 0.0, 0.0);
        for node in profile {
            let am = node.assoc_abs();
            e_am += node.weight * am;
            e_am_as += node.weight * am * node.assoc_sbs;
            e_am2 += node.weight * am * am;
        }
        let var_am = (e_am2 - e_am * e_am).max(0.0);
        let variance = others * (m * e_am_as + m * m * var_am);
        let mean_abs = others * m * e_am;
        Self {
            mean_abs,
            mean_sbs: others * m - mean_abs,
            variance_abs: variance,
            variance_sbs: variance,
        }
    }

    pub fn mean(&self, side: Tier) -> f64 {
        match side {
            Tier::Abs => self.mean_abs,
            Tier::Sbs => self.mean_sbs,
        }
    }

    pub fn variance(&self, side: Tier) -> f64 {
        match side {
            Tier::Abs => self.variance_abs,
            Tier::Sbs => self.variance_sbs,
        }
    }
}

pub fn clt_moments(params: &SystemParams) -> Result<CltMoments> {
    let profile = association_profile(params)?;
    Ok(CltMoments::from_profile(
        &profile,
        params.hotspots,
        params.users_per_hotspot,
    ))
}

/// Gaussian density with the given mean and variance.
pub fn gaussian_density(t: f64, mean: f64, variance: f64) -> Result<f64> {
    if !(variance > 0.0) {
        return Err(Error::PointMass { mean });
    }
    let sd = variance.sqrt();
    let z = (t - mean) / sd;
    Ok((-0.5 * z * z).exp() / (sd * (2.0 * PI).sqrt()))
}

/// `P(N ≤ t)` for `N ~ Normal(mean, variance)`.
pub fn gaussian_cdf(t: f64, mean: f64, variance: f64) -> f64 {
    let sd = variance.sqrt();
    if sd == 0.0 {
        return if t >= mean { 1.0 } else { 0.0 };
    }
    0.5 * erfc(-(t - mean) / (sd * std::f64::consts::SQRT_2))
}

/// Per-hotspot load PMF `E_X[C(m̄,k) A(X)^k (1-A(X))^(m̄-k)]` for `k = 0..=m̄`.
pub fn single_hotspot_pmf(profile: &[XNode], users: usize, side: Tier) -> Vec<f64> {
    (0..=users)
        .map(|k| {
            profile
                .iter()
                .map(|node| {
                    let a = match side {
                        Tier::Abs => node.assoc_abs(),
                        Tier::Sbs => node.assoc_sbs,
                    };
                    node.weight * binomial(users, k, a)
                })
                .sum()
        })
        .collect()
}

/// Direct discrete convolution.
pub fn convolve(a: &[f64], b: &[f64]) -> Vec<f64> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![0.0; a.len() + b.len() - 1];
    for (i, &pa) in a.iter().enumerate() {
        if pa == 0.0 {
            continue;
        }
        for (j, &pb) in b.iter().enumerate() {
            out[i + j] += pa * pb;
        }
    }
    out
}

/// Exact PMF of the load from the other `n - 1` hotspots.
pub fn other_load_pmf_exact(side: Tier, params: &SystemParams) -> Result<LoadDistribution> {
    let others = params.hotspots.saturating_sub(1);
    let support = others * params.users_per_hotspot;
    if support > MAX_EXACT_SUPPORT {
        return Err(Error::SupportTooLarge {
            support,
            limit: MAX_EXACT_SUPPORT,
        });
    }
    let profile = association_profile(params)?;
    let single = single_hotspot_pmf(&profile, params.users_per_hotspot, side);
    let mut acc = vec![1.0];
    for _ in 0..others {
        acc = convolve(&acc, &single);
    }
    Ok(LoadDistribution::from_masses(
        acc,
        LoadKind::ExactConvolution,
        0.0,
    ))
}

/// The Gaussian integrated over unit bins centered on `0..len`, with the
/// mass outside `[-0.5, len - 0.5]` kept as tail mass.
pub fn discretized_gaussian(mean: f64, variance: f64, len: usize) -> LoadDistribution {
    let cdf = |t: f64| gaussian_cdf(t, mean, variance);
    let masses: Vec<f64> = (0..len)
        .map(|k| cdf(k as f64 + 0.5) - cdf(k as f64 - 0.5))
        .collect();
    let tail = cdf(-0.5) + (1.0 - cdf(len as f64 - 0.5));
    LoadDistribution {
        masses,
        kind: LoadKind::GaussianApprox,
        mean,
        variance,
        tail_mass: tail,
    }
}

/// Exact vs Gaussian comparison for one side.
#[derive(Debug, Clone, PartialEq)]
pub struct LoadComparison {
    pub side: Tier,
    pub exact: LoadDistribution,
    pub gaussian: LoadDistribution,
    pub total_variation: f64,
}

pub fn compare_other_load(side: Tier, params: &SystemParams) -> Result<LoadComparison> {
    let exact = other_load_pmf_exact(side, params)?;
    let m = clt_moments(params)?;
    let gaussian = discretized_gaussian(m.mean(side), m.variance(side), exact.masses.len());
    let total_variation = exact.total_variation(&gaussian);
    Ok(LoadComparison {
        side,
        exact,
        gaussian,
        total_variation,
    })
}
