//! Shared test fixtures: small configurations and fixed-grid integration
//! oracles used across module tests.

use crate::model::{
    db_to_linear, dbm_to_watts, per_km2_to_per_m2, NetworkConfig, TierParams, UserParams,
};

/// Fixed-grid composite Simpson rule, the independent oracle for
/// integrals without a closed antiderivative.
pub(crate) fn simpson_oracle<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, n: usize) -> f64 {
    assert!(n % 2 == 0);
    let h = (b - a) / n as f64;
    let mut sum = f(a) + f(b);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        sum += w * f(a + i as f64 * h);
    }
    sum * h / 3.0
}

/// Simpson oracle for [a, ∞) integrals, on the mapped variable
/// u = a + t/(1-t) over [0, 1).
pub(crate) fn simpson_oracle_semi_infinite<F: Fn(f64) -> f64>(f: F, a: f64, n: usize) -> f64 {
    let g = |t: f64| {
        let om = 1.0 - t;
        f(a + t / om) / (om * om)
    };
    // stay strictly below t = 1
    simpson_oracle(g, 0.0, 1.0 - 1e-9, n)
}

/// Two-tier macro/pico network with typical urban parameters; both tiers
/// share τ = 0 dB, α = 3.5 and silence probability `chi`.
pub(crate) fn two_tier_fig2(chi: f64) -> NetworkConfig {
    NetworkConfig {
        tiers: vec![
            TierParams {
                density: per_km2_to_per_m2(1.0),
                tx_power: dbm_to_watts(46.0),
                sir_threshold: 1.0,
                silence_prob: chi,
                pathloss_alpha: 3.5,
                fd_distance: 300.0,
                power_static: 139.0,
                power_slope: 5.0,
                power_sleep: 80.0,
            },
            TierParams {
                density: per_km2_to_per_m2(5.0),
                tx_power: dbm_to_watts(30.0),
                sir_threshold: 1.0,
                silence_prob: chi,
                pathloss_alpha: 3.5,
                fd_distance: 150.0,
                power_static: 9.7,
                power_slope: 5.7,
                power_sleep: 6.1,
            },
        ],
        user: UserParams {
            density: per_km2_to_per_m2(50.0),
            tx_power: dbm_to_watts(23.0),
            pathloss_alpha: 3.5,
            si_residual: db_to_linear(-70.0),
            p_sic: 0.05,
        },
        slot_duration: 1.0,
    }
}

/// Single-tier network; closed-form association quantities exist.
pub(crate) fn single_tier(chi: f64, density_per_km2: f64, fd_distance: f64) -> NetworkConfig {
    NetworkConfig {
        tiers: vec![TierParams {
            density: per_km2_to_per_m2(density_per_km2),
            tx_power: dbm_to_watts(46.0),
            sir_threshold: 1.0,
            silence_prob: chi,
            pathloss_alpha: 3.5,
            fd_distance,
            power_static: 139.0,
            power_slope: 5.0,
            power_sleep: 80.0,
        }],
        user: UserParams {
            density: per_km2_to_per_m2(50.0),
            tx_power: dbm_to_watts(23.0),
            pathloss_alpha: 3.5,
            si_residual: db_to_linear(-70.0),
            p_sic: 0.05,
        },
        slot_duration: 1.0,
    }
}
