//! Closed-form coverage checked against direct sampling and exact limits.

use iab_core::analytics::{self, CoverageThresholds};
use iab_core::geometry::{
    associate, sample_link, sample_user_offset, PolarPoint, Tier, UserPlacement,
};
use iab_core::params::db_to_linear;
use iab_core::simulator::trial_rng;
use iab_core::{Analysis, PartitionStrategy, SystemParams};

const RHO: f64 = 50e6;

/// Samples users of a hotspot pinned at distance `x` and counts the two
/// coverage events directly.
fn conditional_mc(x: f64, th: &CoverageThresholds, trials: u64, p: &SystemParams) -> (f64, f64) {
    let g = p.antenna_gain;
    let center = PolarPoint::new(x, 0.7);
    let mut rng = trial_rng(2024, 0);
    let (mut sbs, mut abs) = (0u64, 0u64);
    for _ in 0..trials {
        let user = UserPlacement::new(center, sample_user_offset(&mut rng, p));
        match associate(&user, p) {
            Tier::Sbs => {
                let b = sample_link(&mut rng, p.macro_power, g * g, x, p).unwrap();
                let a = sample_link(&mut rng, p.small_power, g, user.distance_to_sbs(), p).unwrap();
                if b.snr > th.theta1 && a.snr > th.theta2 {
                    sbs += 1;
                }
            }
            Tier::Abs => {
                let a = sample_link(&mut rng, p.macro_power, g, user.distance_to_abs(), p).unwrap();
                if a.snr > th.theta3 {
                    abs += 1;
                }
            }
        }
    }
    (sbs as f64 / trials as f64, abs as f64 / trials as f64)
}

fn se(p: f64, n: u64) -> f64 {
    (p * (1.0 - p) / n as f64).sqrt()
}

#[test]
fn conditional_coverage_matches_sampling() {
    let p = SystemParams::default();
    let a = Analysis::new(&p).unwrap();
    let n = 400_000;
    for x in [8.0, 20.0, 33.0] {
        for (t1, t2, t3) in [
            (0.0, 0.0, 0.0),
            (45.0, 15.0, 25.0),
            (30.0, 10.0, 30.0),
            (48.0, 20.0, 20.0),
        ] {
            let th = CoverageThresholds::new(db_to_linear(t1), db_to_linear(t2), db_to_linear(t3))
                .unwrap();
            let (mc_s, mc_m) = conditional_mc(x, &th, n, &p);
            let an_s = a.cov_prob_sbs_conditional(th.theta1, th.theta2, x).unwrap();
            let an_m = a.cov_prob_abs_conditional(th.theta3, x).unwrap();
            assert!(
                (an_s - mc_s).abs() <= 3.0 * se(mc_s, n) + 1e-4,
                "Pc_s x={x} θ=({t1},{t2}) dB: {an_s} vs {mc_s}"
            );
            assert!(
                (an_m - mc_m).abs() <= 3.0 * se(mc_m, n) + 1e-4,
                "Pc_m x={x} θ3={t3} dB: {an_m} vs {mc_m}"
            );
        }
    }
}

#[test]
fn conditional_coverage_rejects_distances_outside_the_cell() {
    let p = SystemParams::default();
    assert!(analytics::cov_prob_sbs_conditional(1.0, 1.0, 36.0, &p).is_err());
    assert!(analytics::cov_prob_abs_conditional(1.0, -0.5, &p).is_err());
}

#[test]
fn zero_thresholds_give_full_coverage() {
    let p = SystemParams::default();
    let pc = analytics::coverage_probability(&CoverageThresholds::uniform(0.0), &p).unwrap();
    assert!((pc - 1.0).abs() <= 1e-4, "{pc}");
}

#[test]
fn unreachable_backhaul_leaves_the_macro_users() {
    let p = SystemParams::default();
    let a = Analysis::new(&p).unwrap();
    let th = CoverageThresholds::new(f64::INFINITY, 0.0, 0.0).unwrap();
    let pc = a.coverage_probability(&th);
    assert!((pc - (1.0 - a.mean_association_sbs())).abs() <= 1e-12);
}

#[test]
fn coverage_decreases_in_each_threshold() {
    let p = SystemParams::default();
    let a = Analysis::new(&p).unwrap();
    let grid: Vec<f64> = (0..=16)
        .map(|i| db_to_linear(-10.0 + 5.0 * f64::from(i)))
        .collect();
    for which in 0..3 {
        let mut prev = f64::INFINITY;
        for &t in &grid {
            let mut th = [db_to_linear(20.0); 3];
            th[which] = t;
            let pc = a.coverage_probability(&CoverageThresholds::new(th[0], th[1], th[2]).unwrap());
            assert!(pc <= prev + 1e-12, "θ{} = {t}: {pc} > {prev}", which + 1);
            prev = pc;
        }
    }
}

#[test]
fn rate_coverage_boundaries_are_exact() {
    let p = SystemParams::default();
    let a = Analysis::new(&p).unwrap();
    for s in PartitionStrategy::ALL {
        assert_eq!(a.rate_coverage_at(RHO, 1.0, s).total, 0.0);
        let at0 = a.rate_coverage_at(RHO, 0.0, s);
        assert_eq!(at0.sbs, 0.0);
        assert!(at0.abs > 0.0);
    }
}

#[test]
fn rate_coverage_decreases_in_rho() {
    let p = SystemParams::default();
    let a = Analysis::new(&p).unwrap();
    for s in PartitionStrategy::ALL {
        let mut prev = f64::INFINITY;
        for i in 0..=30 {
            let rho = 5e6 * f64::from(i);
            let r = a.rate_coverage_at(rho, 0.4, s);
            assert!(r.total <= prev + 1e-12, "{s} ρ={rho}");
            assert!((r.total - r.abs - r.sbs).abs() <= 1e-15);
            prev = r.total;
        }
        let zero = a.rate_coverage_at(0.0, 0.4, s).total;
        assert!((zero - 1.0).abs() <= 1e-4, "{zero}");
    }
}

#[test]
fn one_hotspot_strategies_coincide() {
    let p = SystemParams {
        hotspots: 1,
        ..SystemParams::default()
    };
    let a = Analysis::new(&p).unwrap();
    for eta in [0.1, 0.35, 0.6, 0.9] {
        let [e, l] = a.rate_coverage_both(RHO, eta);
        assert!(
            (e.total - l.total).abs() <= 1e-12,
            "η={eta}: {} vs {}",
            e.total,
            l.total
        );
    }
}

#[test]
fn free_functions_match_the_cached_analysis() {
    let p = SystemParams::default().with_eta(0.3);
    let a = Analysis::new(&p).unwrap();
    for s in PartitionStrategy::ALL {
        let r = analytics::rate_coverage(RHO, &p, s).unwrap();
        assert_eq!(r, a.rate_coverage_at(RHO, 0.3, s));
        assert_eq!(analytics::rate_cov_sbs(RHO, &p, s).unwrap(), r.sbs);
    }
    assert_eq!(
        analytics::rate_cov_abs(RHO, &p).unwrap(),
        a.rate_coverage_at(RHO, 0.3, PartitionStrategy::LoadBased)
            .abs
    );
}

#[test]
fn optimal_eta_ties_resolve_to_the_smallest_split() {
    let best = analytics::maximize_eta(0.1, |_| 0.5);
    assert_eq!(best.eta, 0.0);
    let peaked = analytics::maximize_eta(0.05, |e| -(e - 0.37) * (e - 0.37));
    assert!((peaked.eta - 0.37).abs() < 1e-3);
}

#[test]
fn zero_threshold_masses_sum_to_one_at_random_distances() {
    use rand::Rng;
    let p = SystemParams::default();
    let a = Analysis::new(&p).unwrap();
    let mut rng = trial_rng(7, 7);
    for _ in 0..20 {
        let x = rng.random_range(0.0..p.center_range());
        let total = a.cov_prob_sbs_conditional(0.0, 0.0, x).unwrap() + a.cov_prob_abs_conditional(0.0, x).unwrap();
        assert!((total - 1.0).abs() <= p.quadrature.tolerance, "x={x}: {total}");
    }
}

#[test]
fn random_parameter_tuples_match_simulation() {
    use iab_core::simulator::MonteCarlo;
    use rand::Rng;
    let mut rng = trial_rng(8, 8);
    let trials = 50_000;
    for case in 0..10 {
        let s = PartitionStrategy::ALL[rng.random_range(0..2)];
        let p = SystemParams {
            hotspots: rng.random_range(5..=12),
            users_per_hotspot: rng.random_range(2..=10),
            bandwidth: rng.random_range(100.0..1000.0) * 1e6,
            eta: rng.random_range(0.05..0.95),
            ..SystemParams::default()
        };
        let rho = rng.random_range(10.0..100.0) * 1e6;
        let an = Analysis::new(&p).unwrap().rate_coverage_at(rho, p.eta, s).total;
        let est = MonteCarlo::new(100 + case, trials).rate_coverage(rho, s, &p).unwrap();
        let tol = 3.0 * (est.std_error + p.quadrature.tolerance);
        assert!(
            (an - est.value).abs() <= tol,
            "case {case} {s} n={} m={} W={:.0} η={:.3} ρ={:.0}: {an} vs {} (tol {tol})",
            p.hotspots,
            p.users_per_hotspot,
            p.bandwidth,
            p.eta,
            rho,
            est.value
        );
    }
}
