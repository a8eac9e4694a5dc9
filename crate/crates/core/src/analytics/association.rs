//! Association region of the SBS inside its hotspot.
//!
//! A user at offset `(u, ξ)` from a hotspot center at distance `x` picks the
//! SBS iff `u²(1 - k²) - 2xk² cos ξ · u - k²x² < 0` with `k = (P_s/P_m)^(1/α)`.
//! The positive root of that quadratic, capped at `R_s`, bounds the region.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::params::SystemParams;
use crate::quadrature::{breakpoints, GaussLegendre};

fn checked_kp(params: &SystemParams) -> Result<f64> {
    let kp = params.power_ratio_constant();
    if kp > 0.0 && kp < 1.0 {
        Ok(kp)
    } else {
        Err(Error::config(
            "system.small_power_dbm",
            format!("power-ratio constant {kp} must lie in (0, 1)"),
        ))
    }
}

fn boundary_root(x: f64, xi: f64, kp: f64) -> f64 {
    let s = xi.sin();
    x * kp * ((1.0 - kp * kp * s * s).sqrt() + kp * xi.cos()) / (1.0 - kp * kp)
}

/// Radius of the SBS association region along direction `ξ`, capped at `R_s`.
pub fn u_max(x: f64, xi: f64, params: &SystemParams) -> Result<f64> {
    let kp = checked_kp(params)?;
    Ok(boundary_root(x, xi, kp).min(params.hotspot_radius))
}

/// Angle in `(0, π)` where the uncapped root crosses `R_s`, if it does.
///
/// The root decreases in `ξ` on `[0, π]`, so `u_max = R_s` on `[0, ξ_c]`.
pub(crate) fn cap_angle(x: f64, kp: f64, rs: f64) -> Option<f64> {
    if x <= 0.0 {
        return None;
    }
    let c = (rs * rs * (1.0 - kp * kp) - kp * kp * x * x) / (2.0 * x * kp * kp * rs);
    if c > -1.0 && c < 1.0 {
        Some(c.acos())
    } else {
        None
    }
}

/// Hotspot distances where the cap starts to bind and where it binds for every angle.
pub(crate) fn cap_distances(kp: f64, rs: f64) -> [f64; 2] {
    [rs * (1.0 - kp) / kp, rs * (1.0 + kp) / kp]
}

pub(crate) fn angle_panels(x: f64, kp: f64, rs: f64) -> Vec<f64> {
    let inner: Vec<f64> = cap_angle(x, kp, rs).into_iter().collect();
    breakpoints(0.0, PI, &inner)
}

pub(crate) fn association_prob_sbs_with(
    x: f64,
    params: &SystemParams,
    xi_rule: &GaussLegendre,
) -> Result<f64> {
    let kp = checked_kp(params)?;
    let rs = params.hotspot_radius;
    let panels = angle_panels(x, kp, rs);
    let integral = xi_rule.integrate_panels(&panels, |xi| {
        let um = boundary_root(x, xi, kp).min(rs);
        um * um / (rs * rs)
    });
    Ok((integral / PI).clamp(0.0, 1.0))
}

/// Probability that a user of the hotspot at distance `x` associates with its SBS.
pub fn association_prob_sbs(x: f64, params: &SystemParams) -> Result<f64> {
    let rule = GaussLegendre::new(params.quadrature.xi_nodes);
    association_prob_sbs_with(x, params, &rule)
}

pub fn association_prob_abs(x: f64, params: &SystemParams) -> Result<f64> {
    Ok(1.0 - association_prob_sbs(x, params)?)
}

/// A hotspot-distance quadrature node: `weight` already includes `f_X(x)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct XNode {
    pub x: f64,
    pub weight: f64,
    pub assoc_sbs: f64,
}

impl XNode {
    pub fn assoc_abs(&self) -> f64 {
        1.0 - self.assoc_sbs
    }
}

/// Nodes and weights for `∫₀^{R-R_s} g(x) f_X(x) dx` with `f_X(x) = 2x/(R-R_s)²`,
/// split at the distances where the `R_s` cap changes behaviour.
pub(crate) fn x_nodes(params: &SystemParams, x_rule: &GaussLegendre) -> Result<Vec<(f64, f64)>> {
    let kp = checked_kp(params)?;
    let l = params.center_range();
    let panels = breakpoints(0.0, l, &cap_distances(kp, params.hotspot_radius));
    Ok(panels
        .windows(2)
        .flat_map(|w| x_rule.on(w[0], w[1]).collect::<Vec<_>>())
        .map(|(x, w)| (x, w * 2.0 * x / (l * l)))
        .collect())
}

/// The association probability at every hotspot-distance node.
pub fn association_profile(params: &SystemParams) -> Result<Vec<XNode>> {
    let x_rule = GaussLegendre::new(params.quadrature.x_nodes);
    let xi_rule = GaussLegendre::new(params.quadrature.xi_nodes);
    x_nodes(params, &x_rule)?
        .into_iter()
        .map(|(x, weight)| {
            Ok(XNode {
                x,
                weight,
                assoc_sbs: association_prob_sbs_with(x, params, &xi_rule)?,
            })
        })
        .collect()
}

/// `E[A_s(X)]` over the hotspot-distance distribution.
pub fn mean_association_sbs(params: &SystemParams) -> Result<f64> {
    Ok(association_profile(params)?
        .iter()
        .map(|n| n.weight * n.assoc_sbs)
        .sum())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{associate, law_of_cosines, PolarPoint, Tier, UserPlacement};
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn quadratic(u: f64, x: f64, xi: f64, kp: f64) -> f64 {
        u * u * (1.0 - kp * kp) - 2.0 * x * xi.cos() * kp * kp * u - kp * kp * x * x
    }

    #[test]
    fn u_max_zero_at_origin() {
        let p = SystemParams::default();
        assert_eq!(u_max(0.0, 1.3, &p).unwrap(), 0.0);
    }

    #[test]
    fn u_max_is_a_root_of_the_boundary_quadratic() {
        let p = SystemParams::default();
        let kp = p.power_ratio_constant();
        for i in 0..40 {
            let x = 0.5 + i as f64 * 0.85;
            for j in 0..24 {
                let xi = j as f64 * 2.0 * PI / 24.0;
                let um = u_max(x, xi, &p).unwrap();
                assert!(um >= 0.0 && um <= p.hotspot_radius);
                let q = quadratic(um, x, xi, kp);
                assert!(q <= 1e-9 * x * x, "q = {q} at x={x} xi={xi}");
                if um < p.hotspot_radius {
                    assert_abs_diff_eq!(q, 0.0, epsilon = 1e-9 * x * x);
                }
            }
        }
    }

    #[test]
    fn u_max_caps_at_hotspot_radius() {
        // with equal-ish powers the root easily exceeds R_s
        let p = SystemParams {
            small_power: 0.5,
            ..SystemParams::default()
        };
        assert_eq!(u_max(30.0, 0.0, &p).unwrap(), p.hotspot_radius);
    }

    #[test]
    fn association_flips_across_the_boundary() {
        let p = SystemParams::default();
        for (x, xi) in [(10.0, 0.4), (25.0, 2.0), (34.0, 3.1)] {
            let um = u_max(x, xi, &p).unwrap();
            let c = PolarPoint::new(x, 0.5);
            let inside = UserPlacement::new(c, PolarPoint::new(um * 0.999, 0.5 + xi));
            let outside = UserPlacement::new(c, PolarPoint::new(um * 1.001, 0.5 + xi));
            assert_eq!(associate(&inside, &p), Tier::Sbs);
            assert_eq!(associate(&outside, &p), Tier::Abs);
        }
    }

    #[test]
    fn cap_angle_splits_the_capped_arc() {
        let p = SystemParams {
            small_power: 0.05,
            ..SystemParams::default()
        };
        let kp = p.power_ratio_constant();
        let x = 12.0;
        let xc = cap_angle(x, kp, p.hotspot_radius).expect("cap binds partially");
        assert_abs_diff_eq!(boundary_root(x, xc, kp), p.hotspot_radius, epsilon = 1e-9);
        assert_eq!(u_max(x, xc * 0.9, &p).unwrap(), p.hotspot_radius);
        assert!(u_max(x, xc * 1.1, &p).unwrap() < p.hotspot_radius);
    }

    #[test]
    fn association_probability_bounds_and_monotonicity() {
        let p = SystemParams::default();
        assert_eq!(association_prob_sbs(0.0, &p).unwrap(), 0.0);
        let mut prev = 0.0;
        for i in 0..100 {
            let x = p.center_range() * i as f64 / 99.0;
            let a = association_prob_sbs(x, &p).unwrap();
            assert!((0.0..=1.0).contains(&a));
            assert!(a >= prev - 1e-15, "A_s not monotone at x={x}");
            prev = a;
            assert_eq!(a + association_prob_abs(x, &p).unwrap(), 1.0);
        }
    }

    #[test]
    fn association_probability_matches_monte_carlo_at_30m() {
        let p = SystemParams::default();
        let x = 30.0;
        let n = 1_000_000;
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        let rs = p.hotspot_radius;
        let mut hits = 0u64;
        let kp = p.power_ratio_constant();
        for _ in 0..n {
            let u = rs * rng.random::<f64>().sqrt();
            let xi = 2.0 * PI * rng.random::<f64>();
            // direct comparison of received paging powers
            let kappa = law_of_cosines(x, u, xi);
            if p.small_power * u.powf(-p.alpha_assoc) > p.macro_power * kappa.powf(-p.alpha_assoc) {
                hits += 1;
            }
        }
        let est = hits as f64 / n as f64;
        let se = (est * (1.0 - est) / n as f64).sqrt();
        let a = association_prob_sbs(x, &p).unwrap();
        assert!((a - est).abs() <= 3.0 * se, "A_s={a} mc={est} se={se}");
        assert!(kp > 0.0);
    }

    #[test]
    fn capped_regime_is_integrated_accurately() {
        // Strongly capped configuration: compare against a fine brute-force grid.
        let p = SystemParams {
            small_power: 0.05,
            ..SystemParams::default()
        };
        let x = 20.0;
        let n = 200_000;
        let brute: f64 = (0..n)
            .map(|i| {
                let xi = PI * (i as f64 + 0.5) / n as f64;
                let um = u_max(x, xi, &p).unwrap();
                um * um / (p.hotspot_radius * p.hotspot_radius)
            })
            .sum::<f64>()
            / n as f64;
        assert_abs_diff_eq!(association_prob_sbs(x, &p).unwrap(), brute, epsilon = 1e-8);
    }

    #[test]
    fn x_weights_integrate_the_density() {
        let p = SystemParams::default();
        let prof = association_profile(&p).unwrap();
        let total: f64 = prof.iter().map(|n| n.weight).sum();
        assert_abs_diff_eq!(total, 1.0, epsilon = 1e-13);
        let mean_x: f64 = prof.iter().map(|n| n.weight * n.x).sum();
        assert_abs_diff_eq!(mean_x, 2.0 * p.center_range() / 3.0, epsilon = 1e-12);
    }
}
