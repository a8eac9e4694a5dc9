//! Network geometry and the mmWave link model.
//!
//! Hotspot centers are uniform in `b(0, R - R_s)`, users uniform in their
//! hotspot disk. Links carry a power-law path loss with separate LOS/NLOS
//! exponents, exponential blockage and unit-mean Nakagami fading. The noise
//! is thermal over the full bandwidth; there is no interference.

use std::f64::consts::TAU;

use rand::Rng;
use rand_distr::{Distribution, Gamma};

use crate::error::{Error, Result};
use crate::params::SystemParams;

/// Smallest link distance fed to the path-loss law by the simulator, m.
pub const MIN_LINK_DISTANCE: f64 = 1e-3;

/// Serving tier of a user, also used to pick the ABS or SBS side of a load.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Tier {
    Abs,
    Sbs,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolarPoint {
    pub radius: f64,
    /// Radians in `(0, 2π]`.
    pub angle: f64,
}

impl PolarPoint {
    pub fn new(radius: f64, angle: f64) -> Self {
        debug_assert!(radius >= 0.0);
        Self { radius, angle }
    }
}

/// A user's position as hotspot center plus offset.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UserPlacement {
    pub hotspot_center: PolarPoint,
    pub offset: PolarPoint,
}

impl UserPlacement {
    pub fn new(hotspot_center: PolarPoint, offset: PolarPoint) -> Self {
        Self {
            hotspot_center,
            offset,
        }
    }

    /// Angle between the offset and the hotspot-center direction.
    pub fn relative_angle(&self) -> f64 {
        self.offset.angle - self.hotspot_center.angle
    }

    /// Distance from the user to the ABS at the origin.
    pub fn distance_to_abs(&self) -> f64 {
        law_of_cosines(
            self.hotspot_center.radius,
            self.offset.radius,
            self.relative_angle(),
        )
    }

    pub fn distance_to_sbs(&self) -> f64 {
        self.offset.radius
    }
}

/// `sqrt(x² + u² + 2xu cos ξ)`, the distance from the ABS to a user at
/// offset `(u, ξ)` from a hotspot center at distance `x`.
pub fn law_of_cosines(x: f64, u: f64, xi: f64) -> f64 {
    (x * x + u * u + 2.0 * x * u * xi.cos()).max(0.0).sqrt()
}

/// Transmit side of a link before the channel is drawn.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Link {
    pub tx_power: f64,
    /// Combined antenna gain ψ, linear.
    pub antenna_gain: f64,
    pub distance: f64,
    pub los: bool,
    pub fading_gain: f64,
}

/// One realized link.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkSample {
    pub distance: f64,
    pub los: bool,
    pub fading_gain: f64,
    pub antenna_gain: f64,
    pub snr: f64,
}

/// Draws `n` hotspot centers uniformly in `b(0, R - R_s)`.
pub fn sample_hotspot_centers<R: Rng + ?Sized>(
    rng: &mut R,
    params: &SystemParams,
) -> Vec<PolarPoint> {
    let range = params.center_range();
    (0..params.hotspots)
        .map(|_| sample_uniform_disk(rng, range))
        .collect()
}

/// Draws a user offset uniformly in `b(0, R_s)`.
pub fn sample_user_offset<R: Rng + ?Sized>(rng: &mut R, params: &SystemParams) -> PolarPoint {
    sample_uniform_disk(rng, params.hotspot_radius)
}

fn sample_uniform_disk<R: Rng + ?Sized>(rng: &mut R, radius: f64) -> PolarPoint {
    let r = radius * rng.random::<f64>().sqrt();
    // [0, 1) -> (0, 2π]
    let angle = TAU * (1.0 - rng.random::<f64>());
    PolarPoint::new(r, angle)
}

/// Linear path loss `β d^α`.
pub fn path_loss(distance: f64, exponent: f64, params: &SystemParams) -> Result<f64> {
    if !(distance > 0.0) || !distance.is_finite() {
        return Err(Error::Domain(format!(
            "path loss needs a positive distance, got {distance}"
        )));
    }
    Ok(params.path_loss_1m * distance.powf(exponent))
}

/// LOS probability `exp(-r / μ)`.
pub fn los_probability(r: f64, params: &SystemParams) -> f64 {
    (-r / params.los_range).exp()
}

/// Unit-mean Gamma(m, 1/m) fading power.
pub fn sample_fading<R: Rng + ?Sized>(rng: &mut R, shape: u32) -> f64 {
    assert!(shape >= 1, "Nakagami shape must be >= 1");
    let m = f64::from(shape);
    Gamma::new(m, 1.0 / m)
        .expect("positive shape and scale")
        .sample(rng)
}

pub fn nakagami_shape(los: bool, params: &SystemParams) -> u32 {
    if los {
        params.nakagami_los
    } else {
        params.nakagami_nlos
    }
}

pub fn path_loss_exponent(los: bool, params: &SystemParams) -> f64 {
    if los {
        params.alpha_los
    } else {
        params.alpha_nlos
    }
}

/// Linear SNR `P ψ h / (β d^α N₀W)`.
pub fn snr(link: &Link, params: &SystemParams) -> Result<f64> {
    let loss = path_loss(link.distance, path_loss_exponent(link.los, params), params)?;
    Ok(link.tx_power * link.antenna_gain * link.fading_gain / (loss * params.noise_power()))
}

/// Draws blockage and fading for a link and evaluates its SNR.
pub fn sample_link<R: Rng + ?Sized>(
    rng: &mut R,
    tx_power: f64,
    antenna_gain: f64,
    distance: f64,
    params: &SystemParams,
) -> Result<LinkSample> {
    let los = rng.random::<f64>() < los_probability(distance, params);
    let fading_gain = sample_fading(rng, nakagami_shape(los, params));
    let link = Link {
        tx_power,
        antenna_gain,
        distance,
        los,
        fading_gain,
    };
    Ok(LinkSample {
        distance,
        los,
        fading_gain,
        antenna_gain,
        snr: snr(&link, params)?,
    })
}

/// Max-received-power association on the paging channel.
///
/// SBS wins iff `P_s u^-α > P_m κ^-α`, evaluated as `P_s κ^α > P_m u^α` so
/// that `u = 0` needs no special case; ties go to the ABS.
pub fn associate(placement: &UserPlacement, params: &SystemParams) -> Tier {
    let u = placement.distance_to_sbs();
    let kappa = placement.distance_to_abs();
    let a = params.alpha_assoc;
    if params.small_power * kappa.powf(a) > params.macro_power * u.powf(a) {
        Tier::Sbs
    } else {
        Tier::Abs
    }
}
