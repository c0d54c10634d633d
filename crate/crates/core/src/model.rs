//! Domain parameters and unit conversions.
//!
//! Everything downstream works in linear SI units: meters, watts, densities
//! per m², dimensionless linear ratios. dB/dBm/per-km² values are converted
//! at the configuration boundary and never appear inside formulas. Delays
//! are reported in slots; the slot duration is carried as an inert
//! annotation and never enters a formula.

use thiserror::Error;

/// Per-tier base-station parameters, in canonical SI units.
#[derive(Debug, Clone, PartialEq)]
pub struct TierParams {
    /// BS density λ_k, points per m².
    pub density: f64,
    /// BS transmit power p_k, watts.
    pub tx_power: f64,
    /// SIR threshold τ_k, linear ratio.
    pub sir_threshold: f64,
    /// Silence (sleep) probability χ_k per slot, in [0, 1].
    pub silence_prob: f64,
    /// Path-loss exponent α_k, must exceed 2.
    pub pathloss_alpha: f64,
    /// FD distance threshold ϑ_k, meters; users within it operate full-duplex.
    pub fd_distance: f64,
    /// Static power draw P_k0 of an active BS, watts.
    pub power_static: f64,
    /// Slope Δ_k of the load-dependent power term.
    pub power_slope: f64,
    /// Power draw in sleep mode, watts.
    pub power_sleep: f64,
}

/// User-side parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct UserParams {
    /// User density λ_u, points per m².
    pub density: f64,
    /// User transmit power p_u, watts.
    pub tx_power: f64,
    /// Path-loss exponent α_u for user-to-user links.
    pub pathloss_alpha: f64,
    /// Residual self-interference power ratio β, in [0, 1].
    pub si_residual: f64,
    /// Power spent on self-interference cancellation, watts.
    pub p_sic: f64,
}

/// A K-tier network configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkConfig {
    pub tiers: Vec<TierParams>,
    pub user: UserParams,
    /// Slot duration annotation; delays are reported in slots regardless.
    pub slot_duration: f64,
}

/// Duplex mode of a link.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DuplexMode {
    Fd,
    Hd,
}

impl DuplexMode {
    /// Indicator 1_† : 1 for FD, 0 for HD.
    pub fn indicator(self) -> f64 {
        match self {
            DuplexMode::Fd => 1.0,
            DuplexMode::Hd => 0.0,
        }
    }
}

impl std::fmt::Display for DuplexMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            DuplexMode::Fd => write!(f, "FD"),
            DuplexMode::Hd => write!(f, "HD"),
        }
    }
}

/// Convert a power in dBm to watts.
pub fn dbm_to_watts(dbm: f64) -> f64 {
    10f64.powf(dbm / 10.0) / 1000.0
}

/// Convert a ratio in dB to a linear ratio.
pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// Convert a linear ratio to dB.
pub fn linear_to_db(x: f64) -> f64 {
    10.0 * x.log10()
}

/// Convert a density given per km² to per m².
pub fn per_km2_to_per_m2(x: f64) -> f64 {
    x / 1.0e6
}

/// Convert a density per m² back to per km².
pub fn per_m2_to_per_km2(x: f64) -> f64 {
    x * 1.0e6
}

/// A validation failure; carries one diagnostic per violated invariant.
#[derive(Debug, Error, Clone, PartialEq)]
#[error("invalid configuration: {}", diagnostics.join("; "))]
pub struct ValidationError {
    pub diagnostics: Vec<String>,
}

/// Check every type invariant; returns the config unchanged when all hold.
pub fn validate(config: NetworkConfig) -> Result<NetworkConfig, ValidationError> {
    let mut diagnostics = Vec::new();
    if config.tiers.is_empty() {
        diagnostics.push("network must have at least one tier".to_string());
    }
    for (i, t) in config.tiers.iter().enumerate() {
        let tier = i + 1;
        if !(t.density > 0.0) {
            diagnostics.push(format!("tier {tier}: density must be positive"));
        }
        if !(t.tx_power > 0.0) {
            diagnostics.push(format!("tier {tier}: tx_power must be positive"));
        }
        if !(t.sir_threshold > 0.0) {
            diagnostics.push(format!("tier {tier}: sir_threshold must be positive"));
        }
        if !(0.0..=1.0).contains(&t.silence_prob) {
            diagnostics.push(format!("tier {tier}: silence probability outside [0,1]"));
        }
        if !(t.pathloss_alpha > 2.0) {
            diagnostics.push(format!(
                "tier {tier}: α must exceed 2 (path-loss integrability)"
            ));
        }
        if !(t.fd_distance >= 0.0) {
            diagnostics.push(format!("tier {tier}: fd_distance must be non-negative"));
        }
        if !(t.power_static >= 0.0) {
            diagnostics.push(format!("tier {tier}: power_static must be non-negative"));
        }
        if !(t.power_slope >= 0.0) {
            diagnostics.push(format!("tier {tier}: power_slope must be non-negative"));
        }
        if !(t.power_sleep >= 0.0 && t.power_sleep <= t.power_static) {
            diagnostics.push(format!(
                "tier {tier}: power_sleep must lie in [0, power_static]"
            ));
        }
    }
    let u = &config.user;
    if !(u.density > 0.0) {
        diagnostics.push("user: density must be positive".to_string());
    }
    if !(u.tx_power > 0.0) {
        diagnostics.push("user: tx_power must be positive".to_string());
    }
    if !(u.pathloss_alpha > 2.0) {
        diagnostics.push("user: α must exceed 2 (path-loss integrability)".to_string());
    }
    if !(0.0..=1.0).contains(&u.si_residual) {
        diagnostics.push("user: si_residual outside [0,1]".to_string());
    }
    if !(u.p_sic >= 0.0) {
        diagnostics.push("user: p_sic must be non-negative".to_string());
    }
    if !(config.slot_duration > 0.0) {
        diagnostics.push("slot_duration must be positive".to_string());
    }
    if diagnostics.is_empty() {
        Ok(config)
    } else {
        Err(ValidationError { diagnostics })
    }
}

impl NetworkConfig {
    pub fn num_tiers(&self) -> usize {
        self.tiers.len()
    }

    /// True when every tier and the user share one path-loss exponent.
    pub fn equal_alpha(&self) -> Option<f64> {
        let alpha = self.tiers[0].pathloss_alpha;
        let all = self
            .tiers
            .iter()
            .all(|t| t.pathloss_alpha == alpha)
            && self.user.pathloss_alpha == alpha;
        all.then_some(alpha)
    }

    /// Common SIR threshold, if every tier uses the same one.
    pub fn common_threshold(&self) -> Option<f64> {
        let tau = self.tiers[0].sir_threshold;
        self.tiers
            .iter()
            .all(|t| t.sir_threshold == tau)
            .then_some(tau)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testutil::two_tier_fig2;
    use approx::assert_relative_eq;

    #[test]
    fn dbm_examples() {
        assert_relative_eq!(dbm_to_watts(46.0), 39.8107, max_relative = 1e-5);
        assert_relative_eq!(dbm_to_watts(30.0), 1.0, max_relative = 1e-12);
        assert_relative_eq!(dbm_to_watts(0.0), 0.001, max_relative = 1e-12);
    }

    #[test]
    fn db_examples() {
        assert_relative_eq!(db_to_linear(0.0), 1.0);
        assert_relative_eq!(db_to_linear(-70.0), 1e-7, max_relative = 1e-12);
        assert_relative_eq!(db_to_linear(10.0), 10.0, max_relative = 1e-12);
    }

    #[test]
    fn decade_scaling_is_exact() {
        for x in [-31.0, -7.5, 0.0, 12.25, 46.0] {
            assert_relative_eq!(
                dbm_to_watts(x + 10.0),
                10.0 * dbm_to_watts(x),
                max_relative = 1e-14
            );
            assert!(dbm_to_watts(x + 0.1) > dbm_to_watts(x));
            assert!(db_to_linear(x + 0.1) > db_to_linear(x));
        }
    }

    #[test]
    fn density_round_trip() {
        for d in [1.0, 5.0, 50.0, 0.137, 8.0e3] {
            let back = per_m2_to_per_km2(per_km2_to_per_m2(d));
            assert_relative_eq!(back, d, max_relative = 1e-12);
        }
    }

    #[test]
    fn fig2_config_is_valid() {
        let cfg = two_tier_fig2(0.5);
        let validated = validate(cfg.clone()).expect("fig2 preset must validate");
        assert_eq!(validated, cfg);
    }

    #[test]
    fn validate_is_idempotent() {
        let cfg = two_tier_fig2(0.1);
        let once = validate(cfg.clone()).unwrap();
        let twice = validate(once.clone()).unwrap();
        assert_eq!(once, twice);
    }

    #[test]
    fn alpha_at_most_two_rejected() {
        let mut cfg = two_tier_fig2(0.5);
        cfg.tiers[0].pathloss_alpha = 2.0;
        let err = validate(cfg).unwrap_err();
        assert!(err.diagnostics.iter().any(|d| d.contains("α must exceed 2")));
    }

    #[test]
    fn silence_probability_out_of_range_rejected() {
        let mut cfg = two_tier_fig2(0.5);
        cfg.tiers[0].silence_prob = 1.2;
        let err = validate(cfg).unwrap_err();
        assert!(err
            .diagnostics
            .iter()
            .any(|d| d.contains("silence probability outside [0,1]")));
    }

    #[test]
    fn every_violation_reported() {
        let mut cfg = two_tier_fig2(0.5);
        cfg.tiers[0].density = 0.0;
        cfg.tiers[1].sir_threshold = -1.0;
        cfg.user.si_residual = 2.0;
        let err = validate(cfg).unwrap_err();
        assert_eq!(err.diagnostics.len(), 3);
    }
}
