//! Full-network Monte-Carlo simulation.
//!
//! Each trial draws a complete network (hotspot centers, every user, every
//! link's blockage and fading), then picks the typical user uniformly among
//! all users and tests its rate or SNR event. Trial `i` uses its own
//! ChaCha8 stream `i` under the root seed, so results do not depend on how
//! trials are scheduled across threads.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::analytics::{CoverageThresholds, PartitionStrategy};
use crate::error::{Error, Result};
use crate::exec::{self, Execution};
use crate::geometry::{
    associate, sample_hotspot_centers, sample_link, sample_user_offset, LinkSample, PolarPoint,
    Tier, UserPlacement, MIN_LINK_DISTANCE,
};
use crate::params::SystemParams;

const TRIAL_BATCH: u64 = 256;

#[derive(Debug, Clone, PartialEq)]
pub struct SimUser {
    pub placement: UserPlacement,
    pub tier: Tier,
    /// Link from the serving BS.
    pub access: LinkSample,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimHotspot {
    pub center: PolarPoint,
    /// ABS-to-SBS link.
    pub backhaul: LinkSample,
    pub users: Vec<SimUser>,
    /// Users of this hotspot served by the ABS.
    pub abs_load: usize,
    /// Users of this hotspot served by its SBS.
    pub sbs_load: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NetworkRealization {
    pub hotspots: Vec<SimHotspot>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct UserId {
    pub hotspot: usize,
    pub user: usize,
}

impl NetworkRealization {
    pub fn total_abs_load(&self) -> usize {
        self.hotspots.iter().map(|h| h.abs_load).sum()
    }

    pub fn total_sbs_load(&self) -> usize {
        self.hotspots.iter().map(|h| h.sbs_load).sum()
    }

    pub fn user_count(&self) -> usize {
        self.hotspots.iter().map(|h| h.users.len()).sum()
    }

    pub fn user(&self, id: UserId) -> Result<&SimUser> {
        self.hotspots
            .get(id.hotspot)
            .and_then(|h| h.users.get(id.user))
            .ok_or_else(|| Error::Index(format!("no user {}/{}", id.hotspot, id.user)))
    }
}

/// Draws one network.
pub fn realize<R: Rng + ?Sized>(rng: &mut R, params: &SystemParams) -> Result<NetworkRealization> {
    let g = params.antenna_gain;
    let centers = sample_hotspot_centers(rng, params);
    let mut hotspots = Vec::with_capacity(centers.len());
    for center in centers {
        let backhaul = sample_link(
            rng,
            params.macro_power,
            g * g,
            center.radius.max(MIN_LINK_DISTANCE),
            params,
        )?;
        let mut users = Vec::with_capacity(params.users_per_hotspot);
        let (mut abs_load, mut sbs_load) = (0, 0);
        for _ in 0..params.users_per_hotspot {
            let placement = UserPlacement::new(center, sample_user_offset(rng, params));
            let tier = associate(&placement, params);
            let access = match tier {
                Tier::Sbs => {
                    sbs_load += 1;
                    let d = placement.distance_to_sbs().max(MIN_LINK_DISTANCE);
                    sample_link(rng, params.small_power, g, d, params)?
                }
                Tier::Abs => {
                    abs_load += 1;
                    let d = placement.distance_to_abs().max(MIN_LINK_DISTANCE);
                    sample_link(rng, params.macro_power, g, d, params)?
                }
            };
            users.push(SimUser {
                placement,
                tier,
                access,
            });
        }
        hotspots.push(SimHotspot {
            center,
            backhaul,
            users,
            abs_load,
            sbs_load,
        });
    }
    Ok(NetworkRealization { hotspots })
}

/// Backhaul bandwidth granted to the SBS of hotspot `index`.
pub fn backhaul_share(
    real: &NetworkRealization,
    index: usize,
    strategy: PartitionStrategy,
    params: &SystemParams,
) -> f64 {
    let w_b = params.backhaul_bandwidth();
    match strategy {
        PartitionStrategy::EqualPartition => w_b / real.hotspots.len() as f64,
        PartitionStrategy::LoadBased => {
            let total = real.total_sbs_load();
            if total == 0 {
                0.0
            } else {
                w_b * real.hotspots[index].sbs_load as f64 / total as f64
            }
        }
    }
}

/// Per-user outcome.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateReport {
    pub rate: f64,
    pub tier: Tier,
    pub strategy: PartitionStrategy,
    pub covered: bool,
}

/// Downlink rate of one user, bit/s.
pub fn user_rate(
    real: &NetworkRealization,
    id: UserId,
    strategy: PartitionStrategy,
    params: &SystemParams,
) -> Result<f64> {
    let user = real.user(id)?;
    let w_a = params.access_bandwidth();
    let rate = match user.tier {
        Tier::Abs => {
            let load = real.total_abs_load() as f64;
            w_a / load * (1.0 + user.access.snr).log2()
        }
        Tier::Sbs => {
            let hotspot = &real.hotspots[id.hotspot];
            let load = hotspot.sbs_load as f64;
            let access = w_a / load * (1.0 + user.access.snr).log2();
            let w_s = backhaul_share(real, id.hotspot, strategy, params);
            let backhaul = w_s / load * (1.0 + hotspot.backhaul.snr).log2();
            access.min(backhaul)
        }
    };
    Ok(rate.max(0.0))
}

pub fn user_report(
    real: &NetworkRealization,
    id: UserId,
    strategy: PartitionStrategy,
    rho: f64,
    params: &SystemParams,
) -> Result<RateReport> {
    let rate = user_rate(real, id, strategy, params)?;
    Ok(RateReport {
        rate,
        tier: real.user(id)?.tier,
        strategy,
        covered: rate >= rho,
    })
}

/// Whether a user meets the SNR coverage event pair.
pub fn user_covered(
    real: &NetworkRealization,
    id: UserId,
    th: &CoverageThresholds,
) -> Result<bool> {
    let user = real.user(id)?;
    Ok(match user.tier {
        Tier::Sbs => {
            real.hotspots[id.hotspot].backhaul.snr > th.theta1 && user.access.snr > th.theta2
        }
        Tier::Abs => user.access.snr > th.theta3,
    })
}

/// Proportion estimate with its binomial standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub std_error: f64,
    pub trials: u64,
    pub seed: u64,
}

impl Estimate {
    pub fn from_count(hits: u64, trials: u64, seed: u64) -> Self {
        let value = if trials == 0 {
            0.0
        } else {
            hits as f64 / trials as f64
        };
        let std_error = if trials == 0 {
            f64::INFINITY
        } else {
            (value * (1.0 - value) / trials as f64).sqrt()
        };
        Self {
            value,
            std_error,
            trials,
            seed,
        }
    }
}

/// Random stream of one trial.
pub fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

/// Draws the network of a trial and its typical user.
pub fn typical_trial(
    seed: u64,
    trial: u64,
    params: &SystemParams,
) -> Result<(NetworkRealization, UserId)> {
    let mut rng = trial_rng(seed, trial);
    let real = realize(&mut rng, params)?;
    let id = UserId {
        hotspot: rng.random_range(0..params.hotspots),
        user: rng.random_range(0..params.users_per_hotspot),
    };
    Ok((real, id))
}

/// One rate-coverage point evaluated on shared realizations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateQuery {
    pub eta: f64,
    pub rho: f64,
    pub strategy: PartitionStrategy,
}

/// Monte-Carlo settings.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MonteCarlo {
    pub seed: u64,
    pub trials: u64,
    pub execution: Execution,
}

impl MonteCarlo {
    pub fn new(seed: u64, trials: u64) -> Self {
        Self {
            seed,
            trials,
            execution: Execution::default(),
        }
    }

    pub fn with_execution(self, execution: Execution) -> Self {
        Self { execution, ..self }
    }

    fn check(&self, params: &SystemParams) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::Domain("Monte-Carlo needs at least one trial".into()));
        }
        params.validate()
    }

    /// Rate coverage for several `(η, ρ, strategy)` points. Realizations do
    /// not depend on `η`, `ρ` or the strategy, so every point sees the same
    /// networks.
    pub fn rate_coverage_many(
        &self,
        queries: &[RateQuery],
        params: &SystemParams,
    ) -> Result<Vec<Estimate>> {
        self.check(params)?;
        for q in queries {
            if !(0.0..=1.0).contains(&q.eta) {
                return Err(Error::config("eta", format!("{} outside [0, 1]", q.eta)));
            }
        }
        let variants: Vec<SystemParams> = queries.iter().map(|q| params.with_eta(q.eta)).collect();
        let counts = exec::tally(
            self.execution,
            self.trials,
            queries.len(),
            TRIAL_BATCH,
            |t, acc| {
                let (real, id) = typical_trial(self.seed, t, params).expect("validated parameters");
                for (i, (q, p)) in queries.iter().zip(&variants).enumerate() {
                    let rate = user_rate(&real, id, q.strategy, p).expect("typical user exists");
                    if rate >= q.rho {
                        acc[i] += 1;
                    }
                }
            },
        );
        Ok(counts
            .into_iter()
            .map(|c| Estimate::from_count(c, self.trials, self.seed))
            .collect())
    }

    pub fn rate_coverage(
        &self,
        rho: f64,
        strategy: PartitionStrategy,
        params: &SystemParams,
    ) -> Result<Estimate> {
        let q = RateQuery {
            eta: params.eta,
            rho,
            strategy,
        };
        Ok(self.rate_coverage_many(&[q], params)?[0])
    }

    pub fn coverage(
        &self,
        thresholds: &CoverageThresholds,
        params: &SystemParams,
    ) -> Result<Estimate> {
        self.check(params)?;
        let counts = exec::tally(self.execution, self.trials, 1, TRIAL_BATCH, |t, acc| {
            let (real, id) = typical_trial(self.seed, t, params).expect("validated parameters");
            if user_covered(&real, id, thresholds).expect("typical user exists") {
                acc[0] += 1;
            }
        });
        Ok(Estimate::from_count(counts[0], self.trials, self.seed))
    }
}

pub fn estimate_rate_coverage(
    seed: u64,
    trials: u64,
    rho: f64,
    strategy: PartitionStrategy,
    params: &SystemParams,
) -> Result<Estimate> {
    MonteCarlo::new(seed, trials).rate_coverage(rho, strategy, params)
}

pub fn estimate_coverage(
    seed: u64,
    trials: u64,
    thresholds: &CoverageThresholds,
    params: &SystemParams,
) -> Result<Estimate> {
    MonteCarlo::new(seed, trials).coverage(thresholds, params)
}
