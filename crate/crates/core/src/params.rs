//! System parameters.
//!
//! [`SystemConfig`] is the on-disk form with powers in dBm and gains in dB.
//! [`SystemParams`] is the linear form every computation consumes; the
//! conversion happens once in [`SystemConfig::to_params`].

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Thermal noise power spectral density, dBm/Hz.
pub const NOISE_PSD_DBM_HZ: f64 = -174.0;

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn dbm_to_watts(dbm: f64) -> f64 {
    db_to_linear(dbm - 30.0)
}

pub fn linear_to_db(x: f64) -> f64 {
    10.0 * x.log10()
}

/// Node counts and convergence target for the nested Gauss–Legendre rules.
///
/// `xi_nodes` is the count on the half circle `[0, π]`; the angular
/// integrands depend on the angle only through its cosine.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct QuadratureSpec {
    pub x_nodes: usize,
    pub u_nodes: usize,
    pub xi_nodes: usize,
    pub t_nodes: usize,
    pub tolerance: f64,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self {
            x_nodes: 32,
            u_nodes: 32,
            xi_nodes: 32,
            t_nodes: 48,
            tolerance: 1e-4,
        }
    }
}

impl QuadratureSpec {
    pub const MIN_NODES: usize = 16;

    pub fn doubled(&self) -> Self {
        Self {
            x_nodes: 2 * self.x_nodes,
            u_nodes: 2 * self.u_nodes,
            xi_nodes: 2 * self.xi_nodes,
            t_nodes: 2 * self.t_nodes,
            tolerance: self.tolerance,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (key, n) in [
            ("quadrature.x_nodes", self.x_nodes),
            ("quadrature.u_nodes", self.u_nodes),
            ("quadrature.xi_nodes", self.xi_nodes),
            ("quadrature.t_nodes", self.t_nodes),
        ] {
            if n < Self::MIN_NODES {
                return Err(Error::config(
                    key,
                    format!("node count {n} is below the minimum {}", Self::MIN_NODES),
                ));
            }
        }
        if !(self.tolerance > 0.0 && self.tolerance.is_finite()) {
            return Err(Error::config("quadrature.tolerance", "must be positive"));
        }
        Ok(())
    }
}

/// Network parameters in linear units.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemParams {
    /// Macrocell radius `R`, m.
    pub cell_radius: f64,
    /// Hotspot radius `R_s`, m.
    pub hotspot_radius: f64,
    pub hotspots: usize,
    pub users_per_hotspot: usize,
    /// ABS transmit power, W.
    pub macro_power: f64,
    /// SBS transmit power, W.
    pub small_power: f64,
    pub alpha_los: f64,
    pub alpha_nlos: f64,
    /// Path-loss exponent of the sub-6 GHz paging channel used for association.
    pub alpha_assoc: f64,
    /// Path loss at 1 m, linear.
    pub path_loss_1m: f64,
    /// BS main-lobe gain, linear.
    pub antenna_gain: f64,
    /// LOS range constant, m.
    pub los_range: f64,
    pub nakagami_los: u32,
    pub nakagami_nlos: u32,
    /// Total mmWave bandwidth, Hz.
    pub bandwidth: f64,
    /// Backhaul fraction of the bandwidth.
    pub eta: f64,
    pub noise_figure_db: f64,
    /// Rate threshold, bit/s.
    pub rate_threshold: f64,
    pub quadrature: QuadratureSpec,
}

impl Default for SystemParams {
    fn default() -> Self {
        SystemConfig::default()
            .to_params()
            .expect("default configuration is valid")
    }
}

impl SystemParams {
    /// Power-ratio constant `(P_s / P_m)^(1/α)` of the association boundary.
    pub fn power_ratio_constant(&self) -> f64 {
        (self.small_power / self.macro_power).powf(1.0 / self.alpha_assoc)
    }

    /// Largest distance from the ABS to a hotspot center, `R - R_s`.
    pub fn center_range(&self) -> f64 {
        self.cell_radius - self.hotspot_radius
    }

    pub fn backhaul_bandwidth(&self) -> f64 {
        self.eta * self.bandwidth
    }

    pub fn access_bandwidth(&self) -> f64 {
        self.bandwidth - self.backhaul_bandwidth()
    }

    /// Noise power over the full bandwidth, W.
    pub fn noise_power(&self) -> f64 {
        dbm_to_watts(NOISE_PSD_DBM_HZ + 10.0 * self.bandwidth.log10() + self.noise_figure_db)
    }

    pub fn with_eta(&self, eta: f64) -> Self {
        Self {
            eta,
            ..self.clone()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let finite_pos = |key: &str, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(Error::config(
                    key,
                    format!("must be positive and finite, got {v}"),
                ))
            }
        };
        finite_pos("system.cell_radius_m", self.cell_radius)?;
        finite_pos("system.hotspot_radius_m", self.hotspot_radius)?;
        if self.hotspot_radius >= self.cell_radius {
            return Err(Error::config(
                "system.hotspot_radius_m",
                "hotspot radius must be smaller than the cell radius",
            ));
        }
        if self.hotspots == 0 {
            return Err(Error::config(
                "system.hotspots",
                "need at least one hotspot",
            ));
        }
        if self.users_per_hotspot == 0 {
            return Err(Error::config(
                "system.users_per_hotspot",
                "need at least one user per hotspot",
            ));
        }
        finite_pos("system.macro_power_dbm", self.macro_power)?;
        finite_pos("system.small_power_dbm", self.small_power)?;
        if self.small_power >= self.macro_power {
            return Err(Error::config(
                "system.small_power_dbm",
                "SBS power must be below ABS power",
            ));
        }
        finite_pos("system.alpha_los", self.alpha_los)?;
        finite_pos("system.alpha_nlos", self.alpha_nlos)?;
        finite_pos("system.alpha_assoc", self.alpha_assoc)?;
        finite_pos("system.path_loss_1m_db", self.path_loss_1m)?;
        finite_pos("system.antenna_gain_db", self.antenna_gain)?;
        finite_pos("system.los_range_m", self.los_range)?;
        if self.nakagami_los == 0 {
            return Err(Error::config("system.nakagami_los", "shape must be >= 1"));
        }
        if self.nakagami_nlos == 0 {
            return Err(Error::config("system.nakagami_nlos", "shape must be >= 1"));
        }
        finite_pos("system.bandwidth_mhz", self.bandwidth)?;
        if !(0.0..=1.0).contains(&self.eta) {
            return Err(Error::config(
                "system.eta",
                format!("backhaul fraction must lie in [0, 1], got {}", self.eta),
            ));
        }
        if !self.noise_figure_db.is_finite() {
            return Err(Error::config("system.noise_figure_db", "must be finite"));
        }
        if !(self.rate_threshold.is_finite() && self.rate_threshold >= 0.0) {
            return Err(Error::config("system.rho_mbps", "must be non-negative"));
        }
        let kp = self.power_ratio_constant();
        if !(kp > 0.0 && kp < 1.0) {
            return Err(Error::config(
                "system.small_power_dbm",
                format!("power-ratio constant {kp} must lie in (0, 1)"),
            ));
        }
        self.quadrature.validate()
    }
}

/// Network parameters as written in a configuration file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SystemConfig {
    pub cell_radius_m: f64,
    pub hotspot_radius_m: f64,
    pub hotspots: usize,
    pub users_per_hotspot: usize,
    pub macro_power_dbm: f64,
    pub small_power_dbm: f64,
    pub alpha_los: f64,
    pub alpha_nlos: f64,
    pub alpha_assoc: f64,
    pub path_loss_1m_db: f64,
    pub antenna_gain_db: f64,
    pub los_range_m: f64,
    pub nakagami_los: u32,
    pub nakagami_nlos: u32,
    pub bandwidth_mhz: f64,
    pub eta: f64,
    pub noise_figure_db: f64,
    pub rho_mbps: f64,
}

impl Default for SystemConfig {
    fn default() -> Self {
        Self {
            cell_radius_m: 40.0,
            hotspot_radius_m: 5.0,
            hotspots: 10,
            users_per_hotspot: 5,
            macro_power_dbm: 30.0,
            small_power_dbm: 0.0,
            alpha_los: 2.0,
            alpha_nlos: 3.3,
            alpha_assoc: 3.3,
            path_loss_1m_db: 70.0,
            antenna_gain_db: 18.0,
            los_range_m: 30.0,
            nakagami_los: 2,
            nakagami_nlos: 3,
            bandwidth_mhz: 300.0,
            eta: 0.5,
            noise_figure_db: 10.0,
            rho_mbps: 50.0,
        }
    }
}

impl SystemConfig {
    pub fn to_params_with(&self, quadrature: QuadratureSpec) -> Result<SystemParams> {
        let p = SystemParams {
            cell_radius: self.cell_radius_m,
            hotspot_radius: self.hotspot_radius_m,
            hotspots: self.hotspots,
            users_per_hotspot: self.users_per_hotspot,
            macro_power: dbm_to_watts(self.macro_power_dbm),
            small_power: dbm_to_watts(self.small_power_dbm),
            alpha_los: self.alpha_los,
            alpha_nlos: self.alpha_nlos,
            alpha_assoc: self.alpha_assoc,
            path_loss_1m: db_to_linear(self.path_loss_1m_db),
            antenna_gain: db_to_linear(self.antenna_gain_db),
            los_range: self.los_range_m,
            nakagami_los: self.nakagami_los,
            nakagami_nlos: self.nakagami_nlos,
            bandwidth: self.bandwidth_mhz * 1e6,
            eta: self.eta,
            noise_figure_db: self.noise_figure_db,
            rate_threshold: self.rho_mbps * 1e6,
            quadrature,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn to_params(&self) -> Result<SystemParams> {
        self.to_params_with(QuadratureSpec::default())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn defaults_convert_to_linear() {
        let p = SystemParams::default();
        assert_relative_eq!(p.macro_power, 1.0, max_relative = 1e-12);
        assert_relative_eq!(p.small_power, 1e-3, max_relative = 1e-12);
        assert_relative_eq!(p.path_loss_1m, 1e7, max_relative = 1e-12);
        assert_relative_eq!(p.antenna_gain, 10f64.powf(1.8), max_relative = 1e-12);
        assert_eq!(p.bandwidth, 300e6);
        assert_eq!(p.rate_threshold, 50e6);
    }

    #[test]
    fn noise_power_follows_db_chain() {
        let p = SystemParams::default();
        // -174 + 10 log10(3e8) + 10 = -79.2288 dBm
        let dbm = -174.0 + 10.0 * 3e8f64.log10() + 10.0;
        assert_relative_eq!(linear_to_db(p.noise_power()) + 30.0, dbm, epsilon = 1e-9);
        assert_relative_eq!(dbm, -79.22878745280338, epsilon = 1e-9);
    }

    #[test]
    fn power_ratio_constant_in_unit_interval() {
        let kp = SystemParams::default().power_ratio_constant();
        assert_relative_eq!(kp, 1e-3f64.powf(1.0 / 3.3), max_relative = 1e-12);
        assert!(kp > 0.0 && kp < 1.0);
    }

    #[test]
    fn rejects_bad_values_naming_the_key() {
        let cfg = SystemConfig {
            eta: 1.2,
            ..Default::default()
        };
        match cfg.to_params() {
            Err(Error::Config { key, .. }) => assert_eq!(key, "system.eta"),
            other => panic!("expected config error, got {other:?}"),
        }
        let cfg = SystemConfig {
            hotspot_radius_m: 50.0,
            ..Default::default()
        };
        assert!(matches!(cfg.to_params(), Err(Error::Config { .. })));
        let cfg = SystemConfig {
            small_power_dbm: 35.0,
            ..Default::default()
        };
        assert!(matches!(cfg.to_params(), Err(Error::Config { .. })));
        let q = QuadratureSpec {
            u_nodes: 8,
            ..Default::default()
        };
        assert!(matches!(
            SystemConfig::default().to_params_with(q),
            Err(Error::Config { key, .. }) if key == "quadrature.u_nodes"
        ));
    }

    proptest! {
        #[test]
        fn bandwidth_split_conserves_total(w in 1e6f64..5e9, eta in 0.0f64..1.0) {
            let p = SystemParams { bandwidth: w, eta, ..SystemParams::default() };
            let (b, a) = (p.backhaul_bandwidth(), p.access_bandwidth());
            prop_assert!(b >= 0.0 && a >= 0.0);
            prop_assert!((b + a - w).abs() <= f64::EPSILON * w);
        }
    }
}
