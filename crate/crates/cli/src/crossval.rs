//! Cross-validation harness: runs the same quantities through the
//! analytical and Monte Carlo engines and reports per-check agreement.

use hetnet::analysis::{Analyzer, AnalysisError};
use hetnet::model::{DuplexMode, NetworkConfig};
use hetnet::montecarlo::{
    estimate_association, estimate_fd_user_density, estimate_local_delay,
    estimate_success_probability, SimulationError, SimulationSettings,
};
use hetnet::quadrature::QuadratureSettings;
use std::fmt;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CrossvalError {
    #[error(transparent)]
    Analysis(#[from] AnalysisError),
    #[error(transparent)]
    Simulation(#[from] SimulationError),
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckResult {
    pub name: String,
    pub analytical: f64,
    pub monte_carlo: f64,
    pub sigma: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CrossvalReport {
    pub checks: Vec<CheckResult>,
}

impl CrossvalReport {
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }
}

impl fmt::Display for CrossvalReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "{:<34} {:>14} {:>14} {:>12}  result",
            "check", "analytical", "monte carlo", "sigma"
        )?;
        for c in &self.checks {
            writeln!(
                f,
                "{:<34} {:>14.6e} {:>14.6e} {:>12.3e}  {}",
                c.name,
                c.analytical,
                c.monte_carlo,
                c.sigma,
                if c.pass { "pass" } else { "FAIL" }
            )?;
        }
        let failed = self.checks.iter().filter(|c| !c.pass).count();
        if failed == 0 {
            writeln!(f, "all {} checks passed", self.checks.len())
        } else {
            writeln!(f, "{failed} of {} checks FAILED", self.checks.len())
        }
    }
}

/// Serving distances probed by the success-probability checks, meters.
pub const SUCCESS_RADII: [f64; 5] = [25.0, 50.0, 100.0, 200.0, 400.0];

fn three_sigma(analytical: f64, mc: f64, sigma: f64, rel_slack: f64) -> bool {
    (analytical - mc).abs() <= 3.0 * sigma + rel_slack * analytical.abs()
}

/// Run the association, FD-user-density, success-probability, and delay
/// cross-checks. `rel_slack` is extra relative tolerance absorbing the
/// finite-window truncation bias of the simulation.
pub fn crossval(
    config: &NetworkConfig,
    quad: &QuadratureSettings,
    sim: &SimulationSettings,
    rel_slack: f64,
) -> Result<CrossvalReport, CrossvalError> {
    let analyzer = Analyzer::new(config, quad.clone())?;
    let mut checks = Vec::new();

    let assoc_mc = estimate_association(config, sim)?;
    for (k, (fd, hd)) in assoc_mc.iter().enumerate() {
        let a = analyzer.associations().tiers[k];
        for (name, exact, est) in [
            (format!("association tier{} FD", k + 1), a.a_fd, fd),
            (format!("association tier{} HD", k + 1), a.a_hd, hd),
        ] {
            checks.push(CheckResult {
                name,
                analytical: exact,
                monte_carlo: est.mean,
                sigma: est.std_error,
                pass: three_sigma(exact, est.mean, est.std_error, rel_slack),
            });
        }
    }

    let mut density_sim = sim.clone();
    density_sim.realizations = sim.realizations.clamp(1, 32);
    let fd_density_mc = estimate_fd_user_density(config, &density_sim)?;
    for (j, est) in fd_density_mc.iter().enumerate() {
        let exact = analyzer.fd_user_density(j);
        checks.push(CheckResult {
            name: format!("fd user density tier{}", j + 1),
            analytical: exact,
            monte_carlo: est.mean,
            sigma: est.std_error,
            pass: exact == 0.0 && est.mean == 0.0
                || three_sigma(exact, est.mean, est.std_error, rel_slack),
        });
    }
    let fd_density: Vec<f64> = fd_density_mc.iter().map(|e| e.mean).collect();

    for &r in &SUCCESS_RADII {
        let est = estimate_success_probability(config, 0, r, &fd_density, sim)?;
        for (mode, m) in [(DuplexMode::Fd, est.fd), (DuplexMode::Hd, est.hd)] {
            let exact = analyzer.success_probability(0, r, mode)?.value;
            checks.push(CheckResult {
                name: format!("success tier1 {mode} r={r}m"),
                analytical: exact,
                monte_carlo: m.mean,
                sigma: m.std_error,
                pass: exact == 0.0 && m.mean == 0.0
                    || three_sigma(exact, m.mean, m.std_error, rel_slack),
            });
        }
    }

    // Delay is compared in capped form E[min(T, delay_cap)]: the raw mean
    // is dominated by rare far users whose waiting time has infinite
    // variance (whenever the uncapped integral diverges or nearly does),
    // so a direct sample mean is not a sound check. The simulation's
    // truncation at `delay_cap` matches the capped expectation exactly.
    let delay_mc = estimate_local_delay(config, sim)?;
    for (mode, m) in [
        (DuplexMode::Fd, &delay_mc.d_fd),
        (DuplexMode::Hd, &delay_mc.d_hd),
    ] {
        let exact = analyzer.capped_local_delay(mode, sim.delay_cap)?;
        checks.push(CheckResult {
            name: format!("capped delay {mode} (C={})", sim.delay_cap),
            analytical: exact.value,
            monte_carlo: m.mean,
            sigma: m.std_error,
            pass: three_sigma(exact.value, m.mean, m.std_error, rel_slack),
        });
    }

    Ok(CrossvalReport { checks })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presets::two_tier_config;

    fn quick_sim() -> SimulationSettings {
        SimulationSettings {
            window_radius: 3_000.0,
            guard_radius: 1_000.0,
            realizations: 300,
            slots: 30,
            delay_cap: 200,
            quenched: false,
            seed: 11,
        }
    }

    #[test]
    fn fig2_config_passes() {
        let cfg = two_tier_config(0.5);
        let report = crossval(&cfg, &QuadratureSettings::default(), &quick_sim(), 0.02).unwrap();
        assert!(report.all_pass(), "{report}");
        // association (4) + density (2) + success (10) + delay (2)
        assert_eq!(report.checks.len(), 18);
    }

    #[test]
    fn corrupted_si_factor_is_caught() {
        // Make FD self-interference overwhelming in the config handed to
        // the simulation only; FD success checks must then fail.
        let cfg = two_tier_config(0.5);
        let mut corrupted = cfg.clone();
        corrupted.user.si_residual = 1e-3;
        let quad = QuadratureSettings::default();
        let good = crossval(&cfg, &quad, &quick_sim(), 0.02).unwrap();
        let bad = crossval(&corrupted, &quad, &quick_sim(), 0.02).unwrap();
        // The corrupted run is self-consistent, so compare its MC numbers
        // against the clean analytical values instead.
        let mut found_discrepancy = false;
        for (g, b) in good.checks.iter().zip(&bad.checks) {
            if g.name.contains("FD r=400") {
                found_discrepancy = (g.analytical - b.monte_carlo).abs()
                    > 3.0 * b.sigma + 0.02 * g.analytical;
            }
        }
        assert!(found_discrepancy, "corrupted β must shift FD success at large r");
    }

    #[test]
    fn fully_silent_network_passes_vacuously() {
        let cfg = two_tier_config(1.0);
        let mut sim = quick_sim();
        sim.realizations = 20;
        sim.delay_cap = 50;
        let report = crossval(&cfg, &QuadratureSettings::default(), &sim, 0.02).unwrap();
        for c in &report.checks {
            if c.name.starts_with("success") {
                assert_eq!(c.analytical, 0.0);
                assert_eq!(c.monte_carlo, 0.0);
            }
            if c.name.starts_with("capped delay") {
                // Every slot fails, so both engines report the cap times
                // the mode's association probability.
                assert!(c.analytical.is_finite());
                assert!(c.monte_carlo > 0.0);
            }
            assert!(c.pass, "{}: expected pass", c.name);
        }
    }
}
