//! Bundled figure presets: pinned two- and three-tier configurations and
//! the sweeps that reproduce each study figure.
//!
//! Densities are pinned from the one absolute anchor available,
//! λ_u = 50 users/km², giving λ₁ = 1 and λ₂ = 5 BSs/km² for the two-tier
//! network and λ₁ = 1, λ₂ = 2, λ₃ = 8 for the three-tier one.

use crate::sweep::{Engine, Outputs, ParamPath, SweepSpec};
use hetnet::model::{
    db_to_linear, dbm_to_watts, per_km2_to_per_m2, NetworkConfig, TierParams, UserParams,
};
use std::fmt;
use std::str::FromStr;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PresetName {
    Fig2,
    Fig3,
    Fig4,
    Fig5,
    Fig6,
    Fig7,
}

impl PresetName {
    pub const ALL: [PresetName; 6] = [
        PresetName::Fig2,
        PresetName::Fig3,
        PresetName::Fig4,
        PresetName::Fig5,
        PresetName::Fig6,
        PresetName::Fig7,
    ];
}

impl fmt::Display for PresetName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            PresetName::Fig2 => "fig2",
            PresetName::Fig3 => "fig3",
            PresetName::Fig4 => "fig4",
            PresetName::Fig5 => "fig5",
            PresetName::Fig6 => "fig6",
            PresetName::Fig7 => "fig7",
        };
        f.write_str(s)
    }
}

impl FromStr for PresetName {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "fig2" => Ok(PresetName::Fig2),
            "fig3" => Ok(PresetName::Fig3),
            "fig4" => Ok(PresetName::Fig4),
            "fig5" => Ok(PresetName::Fig5),
            "fig6" => Ok(PresetName::Fig6),
            "fig7" => Ok(PresetName::Fig7),
            other => Err(format!("unknown preset '{other}' (expected fig2..fig7)")),
        }
    }
}

fn user_params() -> UserParams {
    UserParams {
        density: per_km2_to_per_m2(50.0),
        tx_power: dbm_to_watts(23.0),
        pathloss_alpha: 3.5,
        si_residual: db_to_linear(-70.0),
        p_sic: 0.05,
    }
}

fn macro_tier(chi: f64) -> TierParams {
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
    }
}

fn pico_tier(chi: f64, density_per_km2: f64) -> TierParams {
    TierParams {
        density: per_km2_to_per_m2(density_per_km2),
        tx_power: dbm_to_watts(30.0),
        sir_threshold: 1.0,
        silence_prob: chi,
        pathloss_alpha: 3.5,
        fd_distance: 150.0,
        power_static: 9.7,
        power_slope: 5.7,
        power_sleep: 6.1,
    }
}

fn femto_tier(chi: f64, density_per_km2: f64) -> TierParams {
    TierParams {
        density: per_km2_to_per_m2(density_per_km2),
        tx_power: dbm_to_watts(23.0),
        sir_threshold: 1.0,
        silence_prob: chi,
        pathloss_alpha: 3.5,
        fd_distance: 75.0,
        power_static: 7.7,
        power_slope: 7.0,
        power_sleep: 4.8,
    }
}

/// The pinned two-tier (macro + pico) network with common silence
/// probability `chi`; τ defaults to 0 dB.
pub fn two_tier_config(chi: f64) -> NetworkConfig {
    NetworkConfig {
        tiers: vec![macro_tier(chi), pico_tier(chi, 5.0)],
        user: user_params(),
        slot_duration: 1.0,
    }
}

/// The pinned three-tier (macro + pico + femto) network.
pub fn three_tier_config(chi: f64) -> NetworkConfig {
    NetworkConfig {
        tiers: vec![macro_tier(chi), pico_tier(chi, 2.0), femto_tier(chi, 8.0)],
        user: user_params(),
        slot_duration: 1.0,
    }
}

/// Integer-dB grid from lo to hi inclusive.
fn db_grid(lo: i32, hi: i32) -> Vec<f64> {
    (lo..=hi).map(f64::from).collect()
}

#[derive(Debug, Clone)]
pub struct FigurePreset {
    pub name: PresetName,
    pub spec: SweepSpec,
}

/// Build the sweep reproducing one figure (analytical engine by default;
/// callers may switch the engine afterwards).
pub fn preset(name: PresetName) -> FigurePreset {
    let delay_and_ee = Outputs { per_tier: false, ee: true };
    let spec = match name {
        PresetName::Fig2 => SweepSpec {
            series: [0.1, 0.5, 0.9]
                .map(|chi| (format!("chi={chi}"), two_tier_config(chi)))
                .to_vec(),
            parameter: ParamPath::CommonThresholdDb,
            grid: db_grid(-10, 10),
            engine: Engine::Analytical,
            outputs: delay_and_ee,
        },
        PresetName::Fig3 => SweepSpec {
            series: [0.1, 0.5, 0.9]
                .map(|chi| (format!("chi={chi}"), three_tier_config(chi)))
                .to_vec(),
            parameter: ParamPath::CommonThresholdDb,
            grid: db_grid(-10, 10),
            engine: Engine::Analytical,
            outputs: delay_and_ee,
        },
        PresetName::Fig4 => SweepSpec {
            series: [1.0, 5.0, 10.0]
                .map(|ratio| {
                    let mut c = two_tier_config(0.5);
                    c.tiers[1].density = per_km2_to_per_m2(ratio);
                    (format!("ratio={ratio}"), c)
                })
                .to_vec(),
            parameter: ParamPath::CommonThresholdDb,
            grid: db_grid(-10, 10),
            engine: Engine::Analytical,
            outputs: delay_and_ee,
        },
        PresetName::Fig5 => SweepSpec {
            series: [1.0, 5.0, 10.0]
                .map(|ratio| {
                    let mut c = two_tier_config(0.5);
                    c.tiers[1].density = per_km2_to_per_m2(ratio);
                    (format!("ratio={ratio}"), c)
                })
                .to_vec(),
            parameter: ParamPath::TierSilence(1),
            grid: (0..=9).map(|i| i as f64 / 10.0).collect(),
            engine: Engine::Analytical,
            outputs: delay_and_ee,
        },
        PresetName::Fig6 => SweepSpec {
            series: [-50.0, -70.0, -90.0]
                .map(|beta_db: f64| {
                    let mut c = two_tier_config(0.5);
                    c.user.si_residual = db_to_linear(beta_db);
                    (format!("beta={beta_db}dB"), c)
                })
                .to_vec(),
            parameter: ParamPath::CommonThresholdDb,
            grid: db_grid(-10, 10),
            engine: Engine::Analytical,
            outputs: Outputs { per_tier: false, ee: false },
        },
        PresetName::Fig7 => SweepSpec {
            series: [0.5, 0.95]
                .map(|chi| (format!("chi={chi}"), two_tier_config(chi)))
                .to_vec(),
            parameter: ParamPath::CommonThresholdDb,
            grid: db_grid(-10, 10),
            engine: Engine::Analytical,
            outputs: Outputs { per_tier: true, ee: false },
        },
    };
    FigurePreset { name, spec }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use hetnet::model::validate;

    #[test]
    fn every_preset_validates() {
        for name in PresetName::ALL {
            let p = preset(name);
            p.spec.validate().expect("sweep spec valid");
            for (label, cfg) in &p.spec.series {
                validate(cfg.clone())
                    .unwrap_or_else(|e| panic!("{name} series '{label}': {e}"));
            }
        }
    }

    #[test]
    fn pinned_two_tier_values() {
        let c = two_tier_config(0.5);
        assert_relative_eq!(c.tiers[0].tx_power, dbm_to_watts(46.0));
        assert_relative_eq!(c.tiers[1].tx_power, 1.0, max_relative = 1e-12);
        assert_relative_eq!(c.user.tx_power, dbm_to_watts(23.0));
        assert_eq!(c.tiers[0].fd_distance, 300.0);
        assert_eq!(c.tiers[1].fd_distance, 150.0);
        assert_relative_eq!(c.user.si_residual, 1e-7, max_relative = 1e-12);
        assert_eq!(c.tiers[0].power_static, 139.0);
        assert_eq!(c.tiers[1].power_static, 9.7);
        assert_eq!(c.tiers[0].power_slope, 5.0);
        assert_eq!(c.tiers[1].power_slope, 5.7);
        assert_eq!(c.user.p_sic, 0.05);
        assert_eq!(c.tiers[0].power_sleep, 80.0);
        assert_eq!(c.tiers[1].power_sleep, 6.1);
        assert_relative_eq!(c.tiers[0].density, 1e-6, max_relative = 1e-12);
        assert_relative_eq!(c.tiers[1].density, 5e-6, max_relative = 1e-12);
        assert_relative_eq!(c.user.density, 5e-5, max_relative = 1e-12);
        for t in &c.tiers {
            assert_eq!(t.pathloss_alpha, 3.5);
        }
    }

    #[test]
    fn pinned_three_tier_values() {
        let c = three_tier_config(0.1);
        assert_relative_eq!(c.tiers[2].tx_power, dbm_to_watts(23.0));
        assert_eq!(c.tiers[2].fd_distance, 75.0);
        assert_eq!(c.tiers[2].power_static, 7.7);
        assert_eq!(c.tiers[2].power_slope, 7.0);
        assert_eq!(c.tiers[2].power_sleep, 4.8);
        // λ₃ = 4λ₂ = 8λ₁ with λ₁ = 1 per km².
        assert_relative_eq!(c.tiers[0].density, 1e-6, max_relative = 1e-12);
        assert_relative_eq!(c.tiers[1].density, 2e-6, max_relative = 1e-12);
        assert_relative_eq!(c.tiers[2].density, 8e-6, max_relative = 1e-12);
    }

    #[test]
    fn figure_grids_match_axes() {
        assert_eq!(preset(PresetName::Fig2).spec.grid.len(), 21);
        assert_eq!(preset(PresetName::Fig5).spec.grid.len(), 10);
        assert_eq!(preset(PresetName::Fig5).spec.grid[9], 0.9);
        assert_eq!(preset(PresetName::Fig6).spec.series.len(), 3);
        assert!(preset(PresetName::Fig7).spec.outputs.per_tier);
        assert!(!preset(PresetName::Fig6).spec.outputs.ee);
    }
}
