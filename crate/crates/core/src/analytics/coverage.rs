//! SNR coverage conditioned on the hotspot distance.

use std::f64::consts::PI;

use crate::analytics::association::{angle_panels, association_prob_sbs_with, u_max};
use crate::error::Result;
use crate::geometry::{law_of_cosines, los_probability};
use crate::params::SystemParams;
use crate::quadrature::GaussLegendre;

/// Above this value of `m·z` the Gamma CCDF is below `e^-60` times a
/// polynomial factor and is treated as zero.
const CCDF_CUTOFF: f64 = 60.0;

/// `e^-y` underflows to zero past this point.
const CCDF_UNDERFLOW: f64 = 745.0;

/// `P(h > t)` for `h ~ Gamma(m, 1/m)`, integer `m`: `e^{-mt} Σ_{j<m} (mt)^j / j!`.
pub fn gamma_ccdf(t: f64, shape: u32) -> f64 {
    if !(t > 0.0) {
        return 1.0;
    }
    if t.is_infinite() {
        return 0.0;
    }
    let y = f64::from(shape) * t;
    if y > CCDF_UNDERFLOW {
        return 0.0;
    }
    let mut term = 1.0;
    let mut sum = 1.0;
    for j in 1..shape {
        term *= y / f64::from(j);
        sum += term;
    }
    (-y).exp() * sum
}

/// A link position reduced to what the coverage integrands need.
///
/// `z_los`/`z_nlos` are `β N₀W d^α / (P ψ)` so that the coverage at
/// threshold `θ` is `p F(z_los θ, m_L) + (1 - p) F(z_nlos θ, m_NL)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkNode {
    pub weight: f64,
    pub p_los: f64,
    pub z_los: f64,
    pub z_nlos: f64,
}

impl LinkNode {
    pub(crate) fn new(weight: f64, distance: f64, scale: f64, params: &SystemParams) -> Self {
        Self {
            weight,
            p_los: los_probability(distance, params),
            z_los: scale * distance.powf(params.alpha_los),
            z_nlos: scale * distance.powf(params.alpha_nlos),
        }
    }

    #[inline]
    pub fn coverage(&self, theta: f64, m_los: u32, m_nlos: u32) -> f64 {
        self.p_los * gamma_ccdf(self.z_los * theta, m_los)
            + (1.0 - self.p_los) * gamma_ccdf(self.z_nlos * theta, m_nlos)
    }

    /// True once both CCDF arguments are past the cutoff; the coverage is
    /// then zero for this and every larger threshold.
    #[inline]
    pub(crate) fn exhausted(&self, theta: f64, m_los: u32, m_nlos: u32) -> bool {
        f64::from(m_los) * self.z_los * theta > CCDF_CUTOFF
            && f64::from(m_nlos) * self.z_nlos * theta > CCDF_CUTOFF
    }
}

/// Everything the coverage integrals need at one hotspot distance `x`.
#[derive(Debug, Clone)]
pub struct HotspotSlice {
    pub x: f64,
    pub assoc_sbs: f64,
    pub backhaul: LinkNode,
    /// Offsets inside the SBS association region; weights integrate `f_U/2π`.
    pub sbs_access: Vec<LinkNode>,
    /// Offsets in the ABS part of the hotspot, with the ABS-to-user distance.
    pub abs_access: Vec<LinkNode>,
    m_los: u32,
    m_nlos: u32,
}

pub(crate) struct Rules {
    pub x: GaussLegendre,
    pub u: GaussLegendre,
    pub xi: GaussLegendre,
    pub t: GaussLegendre,
}

impl Rules {
    pub fn new(params: &SystemParams) -> Self {
        let q = &params.quadrature;
        Self {
            x: GaussLegendre::new(q.x_nodes),
            u: GaussLegendre::new(q.u_nodes),
            xi: GaussLegendre::new(q.xi_nodes),
            t: GaussLegendre::new(q.t_nodes),
        }
    }
}

impl HotspotSlice {
    pub(crate) fn build(x: f64, params: &SystemParams, rules: &Rules) -> Result<Self> {
        let kp = params.power_ratio_constant();
        let rs = params.hotspot_radius;
        let noise = params.path_loss_1m * params.noise_power();
        let g = params.antenna_gain;
        let backhaul_scale = noise / (params.macro_power * g * g);
        let sbs_scale = noise / (params.small_power * g);
        let abs_scale = noise / (params.macro_power * g);

        let mut sbs_access = Vec::with_capacity(rules.xi.len() * rules.u.len() * 2);
        let mut abs_access = Vec::with_capacity(rules.xi.len() * rules.u.len() * 2);
        let panels = angle_panels(x, kp, rs);
        for w in panels.windows(2) {
            for (xi, w_xi) in rules.xi.on(w[0], w[1]) {
                let um = u_max(x, xi, params)?;
                // (1/2π)∫₀^{2π} = (1/π)∫₀^π by symmetry in ξ; f_U(u) = 2u/R_s²
                let base = w_xi / PI;
                if um > 0.0 {
                    for (u, w_u) in rules.u.on(0.0, um) {
                        let weight = base * w_u * 2.0 * u / (rs * rs);
                        sbs_access.push(LinkNode::new(weight, u, sbs_scale, params));
                    }
                }
                if um < rs {
                    for (u, w_u) in rules.u.on(um, rs) {
                        let weight = base * w_u * 2.0 * u / (rs * rs);
                        let kappa = law_of_cosines(x, u, xi);
                        abs_access.push(LinkNode::new(weight, kappa, abs_scale, params));
                    }
                }
            }
        }
        Ok(Self {
            x,
            assoc_sbs: association_prob_sbs_with(x, params, &rules.xi)?,
            backhaul: LinkNode::new(1.0, x, backhaul_scale, params),
            sbs_access,
            abs_access,
            m_los: params.nakagami_los,
            m_nlos: params.nakagami_nlos,
        })
    }

    pub fn assoc_abs(&self) -> f64 {
        1.0 - self.assoc_sbs
    }

    /// `P(SNR_b(x) > θ₁)`.
    pub fn backhaul_coverage(&self, theta1: f64) -> f64 {
        self.backhaul.coverage(theta1, self.m_los, self.m_nlos)
    }

    /// `P(SNR_a^SBS > θ₂, user associates with the SBS | x)`.
    pub fn sbs_access_coverage(&self, theta2: f64) -> f64 {
        integrate_nodes(&self.sbs_access, theta2, self.m_los, self.m_nlos)
    }

    pub fn pc_sbs(&self, theta1: f64, theta2: f64) -> f64 {
        self.backhaul_coverage(theta1) * self.sbs_access_coverage(theta2)
    }

    pub fn pc_abs(&self, theta3: f64) -> f64 {
        integrate_nodes(&self.abs_access, theta3, self.m_los, self.m_nlos)
    }

    /// `Σ_j weights[j] · Pc_m(thetas[j] | x)` for ascending `thetas`.
    pub fn pc_abs_weighted(&self, thetas: &[f64], weights: &[f64]) -> f64 {
        debug_assert_eq!(thetas.len(), weights.len());
        let (ml, mn) = (self.m_los, self.m_nlos);
        let mut total = 0.0;
        for node in &self.abs_access {
            let mut acc = 0.0;
            for (&theta, &w) in thetas.iter().zip(weights) {
                if node.exhausted(theta, ml, mn) {
                    break;
                }
                if w != 0.0 {
                    acc += w * node.coverage(theta, ml, mn);
                }
            }
            total += node.weight * acc;
        }
        total
    }
}

fn integrate_nodes(nodes: &[LinkNode], theta: f64, m_los: u32, m_nlos: u32) -> f64 {
    nodes
        .iter()
        .map(|n| n.weight * n.coverage(theta, m_los, m_nlos))
        .sum()
}
