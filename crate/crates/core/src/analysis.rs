//! Analytical engine: association probabilities, success probability via
//! the interference Laplace transform, local delay (general and equal-α
//! special case), per-tier delay, and energy efficiency.
//!
//! The typical user at the origin associates with the tier maximizing the
//! average downlink received power p_i r^{-α_i}. Conditioned on the serving
//! distance, per-slot successes are i.i.d., so the conditional local delay
//! is geometric with mean 1/P_suc; the unconditional delay integrates
//! 1/P_suc against the association-distance density.

use thiserror::Error;

use crate::model::{DuplexMode, NetworkConfig};
use crate::quadrature::{
    integrate_finite, integrate_semi_infinite, Estimate, QuadratureError, QuadratureSettings,
};

use std::f64::consts::PI;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AnalysisError {
    #[error(transparent)]
    Quadrature(#[from] QuadratureError),
    #[error("special-case delay requires a single common path-loss exponent")]
    AlphaMismatch,
    #[error("tier {tier} never wins association; conditional quantity undefined")]
    DegenerateTier { tier: usize },
    #[error("energy efficiency requires a single common SIR threshold")]
    MixedThresholds,
}

/// Association probability split of one tier.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TierAssociation {
    /// A_k^FD: typical user associates with this tier and lands within ϑ_k.
    pub a_fd: f64,
    /// A_k^HD: associates with this tier beyond ϑ_k.
    pub a_hd: f64,
    /// A_k = A_k^FD + A_k^HD, computed by its own full-range integral.
    pub a_total: f64,
    /// Propagated quadrature error bound.
    pub error: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AssociationProbabilities {
    pub tiers: Vec<TierAssociation>,
}

/// A delay value in slots, with quadrature error bound and divergence flag.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DelayEntry {
    pub value: f64,
    pub error: f64,
    pub diverged: bool,
}

impl DelayEntry {
    fn diverged() -> Self {
        DelayEntry { value: f64::INFINITY, error: f64::INFINITY, diverged: true }
    }

    /// Ordering value for trend comparisons: diverged sorts above any finite delay.
    pub fn ordering_value(&self) -> f64 {
        if self.diverged { f64::INFINITY } else { self.value }
    }
}

/// Per-tier delay decomposition: conditional FD/HD delays (when the
/// conditioning event has positive probability) and their combination.
#[derive(Debug, Clone, PartialEq)]
pub struct TierDelay {
    pub d_fd: Option<DelayEntry>,
    pub d_hd: Option<DelayEntry>,
    pub d_total: DelayEntry,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DelayResult {
    pub d_fd: DelayEntry,
    pub d_hd: DelayEntry,
    pub per_tier: Vec<TierDelay>,
}

/// Throughput, area power, and their ratio (nats/Joule/Hz).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyResult {
    pub throughput_fd: f64,
    pub throughput_hd: f64,
    pub power_area: f64,
    pub eta: f64,
}

/// Distance below which the closest tier-j interferer cannot lie when the
/// serving tier-k BS is at distance r: e_k(j) = ((p_j/p_k) r^{α_k})^{1/α_j}.
pub fn exclusion_radius(config: &NetworkConfig, k: usize, j: usize, r: f64) -> f64 {
    let tk = &config.tiers[k];
    let tj = &config.tiers[j];
    (tj.tx_power / tk.tx_power * r.powf(tk.pathloss_alpha)).powf(1.0 / tj.pathloss_alpha)
}

/// ρ(τ, α) = ∫_1^∞ τ/(τ + u^{α/2}) du.
pub fn rho(tau: f64, alpha: f64, settings: &QuadratureSettings) -> Result<Estimate, QuadratureError> {
    integrate_semi_infinite(|u| tau / (tau + u.powf(alpha / 2.0)), 1.0, settings)
}

/// ρ'(τ, α) = ∫_1^∞ τ p_u/(τ p_u + u^{α/2} p_j) du, the user-interference
/// analogue; depends on the power ratio p_u/p_j of the interfering tier.
pub fn rho_prime(
    tau: f64,
    alpha: f64,
    p_u: f64,
    p_j: f64,
    settings: &QuadratureSettings,
) -> Result<Estimate, QuadratureError> {
    integrate_semi_infinite(
        |u| tau * p_u / (tau * p_u + u.powf(alpha / 2.0) * p_j),
        1.0,
        settings,
    )
}

/// Evaluator holding the per-config caches (association probabilities, the
/// r-independent BS interference integrals, FD user densities).
pub struct Analyzer<'a> {
    config: &'a NetworkConfig,
    settings: QuadratureSettings,
    inner: QuadratureSettings,
    delay_ceiling: f64,
    assoc: AssociationProbabilities,
    /// ρ(τ_k, α_j) for serving tier k, interfering tier j.
    rho_bs: Vec<Vec<Estimate>>,
    /// λ_{j,u}^FD per tier.
    fd_user_density: Vec<f64>,
}

pub const DEFAULT_DELAY_CEILING: f64 = 1e9;

impl<'a> Analyzer<'a> {
    pub fn new(config: &'a NetworkConfig, settings: QuadratureSettings) -> Result<Self, AnalysisError> {
        Self::with_delay_ceiling(config, settings, DEFAULT_DELAY_CEILING)
    }

    pub fn with_delay_ceiling(
        config: &'a NetworkConfig,
        settings: QuadratureSettings,
        delay_ceiling: f64,
    ) -> Result<Self, AnalysisError> {
        // Inner (nested) integrals run tighter so the outer adaptive pass
        // sees an effectively smooth integrand.
        let mut inner = settings.clone();
        inner.rel_tol = (settings.rel_tol * 1e-2).max(1e-13);

        let k_tiers = config.num_tiers();
        let mut tiers = Vec::with_capacity(k_tiers);
        for k in 0..k_tiers {
            tiers.push(association_triplet(config, k, &settings)?);
        }
        let assoc = AssociationProbabilities { tiers };

        let mut rho_bs = Vec::with_capacity(k_tiers);
        for k in 0..k_tiers {
            let tau_k = config.tiers[k].sir_threshold;
            let mut row = Vec::with_capacity(k_tiers);
            for j in 0..k_tiers {
                row.push(rho(tau_k, config.tiers[j].pathloss_alpha, &inner)?);
            }
            rho_bs.push(row);
        }

        let mut fd_user_density = Vec::with_capacity(k_tiers);
        for (j, t) in config.tiers.iter().enumerate() {
            let a = &assoc.tiers[j];
            if a.a_total <= 0.0 {
                return Err(AnalysisError::DegenerateTier { tier: j });
            }
            fd_user_density
                .push(a.a_fd / a.a_total * (1.0 - t.silence_prob) * config.user.density);
        }

        Ok(Analyzer { config, settings, inner, delay_ceiling, assoc, rho_bs, fd_user_density })
    }

    pub fn config(&self) -> &NetworkConfig {
        self.config
    }

    pub fn associations(&self) -> &AssociationProbabilities {
        &self.assoc
    }

    /// λ_{j,u}^FD = (A_j^FD / A_j)(1 - χ_j) λ_u.
    pub fn fd_user_density(&self, j: usize) -> f64 {
        self.fd_user_density[j]
    }

    /// Exponent of the conditional success probability, excluding the
    /// (1 - χ_k) activity factor: ln P_suc = ln(1-χ_k) + E(r).
    /// Returns (E, error bound on E).
    fn success_exponent(&self, k: usize, r: f64, mode: DuplexMode) -> (f64, f64) {
        let tk = &self.config.tiers[k];
        let user = &self.config.user;
        let s = tk.sir_threshold * r.powf(tk.pathloss_alpha) / tk.tx_power;

        let mut exponent = -s * user.si_residual * user.tx_power * mode.indicator();
        let mut err = 0.0;
        for (j, tj) in self.config.tiers.iter().enumerate() {
            let e_kj = exclusion_radius(self.config, k, j, r);
            let e2 = e_kj * e_kj;
            // Active-BS PGFL factor, reduced to the r-independent kernel
            // ρ(τ_k, α_j) by the substitution u = (y/e_k(j))².
            let rho_j = self.rho_bs[k][j];
            exponent -= PI * (1.0 - tj.silence_prob) * tj.density * e2 * rho_j.value;
            err += PI * (1.0 - tj.silence_prob) * tj.density * e2 * rho_j.error;
            // FD-user factor: interferers approximated by a PPP of density
            // λ_{j,u}^FD outside e_k(j).
            let lam_fd = self.fd_user_density[j];
            if lam_fd > 0.0 && s > 0.0 {
                let alpha_u = user.pathloss_alpha;
                let sp = s * user.tx_power;
                let est = integrate_semi_infinite(
                    |y| sp * y / (y.powf(alpha_u) + sp),
                    e_kj,
                    &self.inner,
                );
                match est {
                    Ok(est) => {
                        exponent -= 2.0 * PI * lam_fd * est.value;
                        err += 2.0 * PI * lam_fd * est.error;
                    }
                    Err(_) => return (f64::NAN, f64::NAN),
                }
            }
        }
        (exponent, err)
    }

    /// P_suc^†(r) for a tier-k user at serving distance r (Laplace-transform
    /// route through the PGFL of each interfering point process).
    pub fn success_probability(
        &self,
        k: usize,
        r: f64,
        mode: DuplexMode,
    ) -> Result<Estimate, AnalysisError> {
        let (exponent, err) = self.success_exponent(k, r, mode);
        if !exponent.is_finite() {
            return Err(AnalysisError::Quadrature(QuadratureError::NonConvergence));
        }
        let chi = self.config.tiers[k].silence_prob;
        let p = (1.0 - chi) * exponent.exp();
        Ok(Estimate { value: p, error: p * err })
    }

    /// Distance pdf of a tier-k FD user (zero beyond ϑ_k, truncated and
    /// renormalized association-distance density inside).
    pub fn fd_distance_pdf(&self, k: usize, r: f64) -> Result<f64, AnalysisError> {
        let a_fd = self.assoc.tiers[k].a_fd;
        if a_fd <= 0.0 {
            return Err(AnalysisError::DegenerateTier { tier: k });
        }
        let tk = &self.config.tiers[k];
        if r > tk.fd_distance {
            return Ok(0.0);
        }
        Ok(association_density(self.config, k, r) / a_fd)
    }

    /// Unnormalized association-distance density times 1/P_suc; the
    /// integrand of the local-delay distance integral.
    fn delay_integrand(&self, k: usize, r: f64, mode: DuplexMode) -> f64 {
        let tk = &self.config.tiers[k];
        let (suc_exp, _) = self.success_exponent(k, r, mode);
        let mut exponent = -suc_exp;
        for (j, tj) in self.config.tiers.iter().enumerate() {
            let e_kj = exclusion_radius(self.config, k, j, r);
            exponent -= PI * tj.density * e_kj * e_kj;
        }
        2.0 * PI * tk.density / (1.0 - tk.silence_prob) * r * exponent.exp()
    }

    fn tier_mode_range(&self, k: usize, mode: DuplexMode) -> (f64, Option<f64>) {
        let theta = self.config.tiers[k].fd_distance;
        match mode {
            DuplexMode::Fd => (0.0, Some(theta)),
            DuplexMode::Hd => (theta, None),
        }
    }

    /// ∫ over the mode's distance range of the unnormalized delay integrand;
    /// this equals A_k^† · D_k^†.
    fn tier_delay_unnormalized(&self, k: usize, mode: DuplexMode) -> Result<Estimate, QuadratureError> {
        if self.config.tiers[k].silence_prob >= 1.0 {
            // Silent tier: no success ever.
            return Err(QuadratureError::NonConvergence);
        }
        let f = |r: f64| self.delay_integrand(k, r, mode);
        match self.tier_mode_range(k, mode) {
            (lo, Some(hi)) => integrate_finite(f, lo, hi, &self.settings),
            (lo, None) => integrate_semi_infinite(f, lo, &self.settings),
        }
    }

    /// Aggregate local delay D_† = Σ_k A_k^† D_k^† by direct evaluation of
    /// the general integrals; divergence is reported via the flag.
    pub fn local_delay(&self, mode: DuplexMode) -> DelayEntry {
        let mut value = 0.0;
        let mut error = 0.0;
        for k in 0..self.config.num_tiers() {
            match self.tier_delay_unnormalized(k, mode) {
                Ok(est) => {
                    value += est.value;
                    error += est.error;
                }
                Err(_) => return DelayEntry::diverged(),
            }
        }
        if !value.is_finite() || value > self.delay_ceiling {
            return DelayEntry::diverged();
        }
        DelayEntry { value, error, diverged: false }
    }

    /// Per-tier decomposition D_k = (A_k^FD D_k^FD + A_k^HD D_k^HD)/A_k.
    pub fn per_tier_delay(&self) -> Vec<TierDelay> {
        let mut out = Vec::with_capacity(self.config.num_tiers());
        for k in 0..self.config.num_tiers() {
            let a = self.assoc.tiers[k];
            let fd = self.tier_delay_unnormalized(k, DuplexMode::Fd);
            let hd = self.tier_delay_unnormalized(k, DuplexMode::Hd);
            let normalize = |est: &Result<Estimate, QuadratureError>, a_mode: f64| -> Option<DelayEntry> {
                if a_mode <= 0.0 {
                    return None;
                }
                Some(match est {
                    Ok(e) if e.value.is_finite() && e.value / a_mode <= self.delay_ceiling => {
                        DelayEntry { value: e.value / a_mode, error: e.error / a_mode, diverged: false }
                    }
                    _ => DelayEntry::diverged(),
                })
            };
            let d_fd = normalize(&fd, a.a_fd);
            let d_hd = normalize(&hd, a.a_hd);
            let d_total = match (&fd, &hd) {
                (Ok(f), Ok(h)) if (f.value + h.value).is_finite()
                    && (f.value + h.value) / a.a_total <= self.delay_ceiling =>
                {
                    DelayEntry {
                        value: (f.value + h.value) / a.a_total,
                        error: (f.error + h.error) / a.a_total,
                        diverged: false,
                    }
                }
                _ => DelayEntry::diverged(),
            };
            out.push(TierDelay { d_fd, d_hd, d_total });
        }
        out
    }

    /// E[min(T, cap)] over the mode's users, where T is the geometric
    /// waiting time with per-slot success P_suc(r). Unlike the raw mean,
    /// this truncated delay always has finite variance under simulation,
    /// so it is the quantity of choice for cross-engine comparisons: the
    /// Monte Carlo estimator with the same `delay_cap` targets it exactly.
    pub fn capped_local_delay(
        &self,
        mode: DuplexMode,
        cap: usize,
    ) -> Result<Estimate, AnalysisError> {
        let cap_f = cap as f64;
        // g(P) = (1 - (1-P)^cap)/P, continuously extended by g(0) = cap.
        let g = move |p: f64| {
            if p < 1e-12 {
                cap_f
            } else {
                -f64::exp_m1(cap_f * f64::ln_1p(-p)) / p
            }
        };
        let mut value = 0.0;
        let mut error = 0.0;
        for k in 0..self.config.num_tiers() {
            let f = |r: f64| {
                let (suc_exp, _) = self.success_exponent(k, r, mode);
                let p = (1.0 - self.config.tiers[k].silence_prob) * suc_exp.exp();
                association_density(self.config, k, r) * g(p)
            };
            let est = match self.tier_mode_range(k, mode) {
                (lo, Some(hi)) => integrate_finite(f, lo, hi, &self.settings),
                (lo, None) => integrate_semi_infinite(f, lo, &self.settings),
            }?;
            value += est.value;
            error += est.error;
        }
        Ok(Estimate { value, error })
    }

    pub fn delay_result(&self) -> DelayResult {
        DelayResult {
            d_fd: self.local_delay(DuplexMode::Fd),
            d_hd: self.local_delay(DuplexMode::Hd),
            per_tier: self.per_tier_delay(),
        }
    }

    /// Equal-α simplification: the FD delay keeps a one-dimensional
    /// integral over [0, ϑ_k]; the HD delay is closed form, diverging
    /// exactly when Σ_j p_j^{2/α}[λ_j(1-(1-χ_j)ρ) - λ_{j,u}^FD ρ'] ≤ 0.
    pub fn special_case_delay(&self, mode: DuplexMode) -> Result<DelayEntry, AnalysisError> {
        let alpha = self.config.equal_alpha().ok_or(AnalysisError::AlphaMismatch)?;
        let user = &self.config.user;

        let mut value = 0.0;
        let mut error = 0.0;
        for tk in self.config.tiers.iter() {
            if tk.silence_prob >= 1.0 {
                return Ok(DelayEntry::diverged());
            }
            let tau_k = tk.sir_threshold;
            let rho_k = rho(tau_k, alpha, &self.inner)?;
            // Coefficient of -π r² (p_j/p_k)^{2/α} per interfering tier.
            let mut s_sum = 0.0; // Σ_j p_j^{2/α} C_j
            let mut s_err = 0.0;
            for (j, tj) in self.config.tiers.iter().enumerate() {
                let rp = rho_prime(tau_k, alpha, user.tx_power, tj.tx_power, &self.inner)?;
                let c_j = tj.density * (1.0 - (1.0 - tj.silence_prob) * rho_k.value)
                    - self.fd_user_density[j] * rp.value;
                let c_err = tj.density * (1.0 - tj.silence_prob) * rho_k.error
                    + self.fd_user_density[j] * rp.error;
                let w = tj.tx_power.powf(2.0 / alpha);
                s_sum += w * c_j;
                s_err += w * c_err;
            }
            let pk_w = tk.tx_power.powf(2.0 / alpha);
            let b_k = s_sum / pk_w;
            let theta = tk.fd_distance;
            match mode {
                DuplexMode::Hd => {
                    if s_sum <= 0.0 {
                        return Ok(DelayEntry::diverged());
                    }
                    let v = tk.density * pk_w / (1.0 - tk.silence_prob)
                        * (-PI * b_k * theta * theta).exp()
                        / s_sum;
                    value += v;
                    // First-order sensitivity to the ρ/ρ' quadrature errors.
                    error += v * (s_err / s_sum) * (1.0 + PI * b_k.abs() * theta * theta);
                }
                DuplexMode::Fd => {
                    let si = tau_k * user.si_residual * user.tx_power / tk.tx_power;
                    let est = integrate_finite(
                        |r| r * (si * r.powf(alpha) - PI * b_k * r * r).exp(),
                        0.0,
                        theta,
                        &self.settings,
                    )?;
                    let v = 2.0 * PI * tk.density / (1.0 - tk.silence_prob) * est.value;
                    value += v;
                    error += 2.0 * PI * tk.density / (1.0 - tk.silence_prob) * est.error
                        + v * PI * theta * theta * s_err / pk_w;
                }
            }
        }
        if !value.is_finite() || value > self.delay_ceiling {
            return Ok(DelayEntry::diverged());
        }
        Ok(DelayEntry { value, error, diverged: false })
    }

    /// Area energy efficiency: throughput density over power density,
    /// combined over both duplex modes; diverged delays contribute zero
    /// throughput.
    pub fn energy_efficiency(
        &self,
        delay_fd: &DelayEntry,
        delay_hd: &DelayEntry,
    ) -> Result<EnergyResult, AnalysisError> {
        let tau = self.config.common_threshold().ok_or(AnalysisError::MixedThresholds)?;
        let user = &self.config.user;
        let log_term = (1.0 + tau).ln();

        let mut throughput = [0.0f64; 2];
        let mut power = 0.0f64;
        for (mi, (mode, delay)) in [(DuplexMode::Fd, delay_fd), (DuplexMode::Hd, delay_hd)]
            .into_iter()
            .enumerate()
        {
            let mut active_fraction = 0.0;
            for (k, tk) in self.config.tiers.iter().enumerate() {
                let a = self.assoc.tiers[k];
                let a_mode = match mode {
                    DuplexMode::Fd => a.a_fd,
                    DuplexMode::Hd => a.a_hd,
                };
                let lam_k = a_mode / a.a_total;
                active_fraction += (1.0 - tk.silence_prob) * lam_k;
                power += lam_k
                    * ((1.0 - tk.silence_prob)
                        * (tk.power_static
                            + tk.power_slope * tk.tx_power
                            + mode.indicator() * user.p_sic)
                        + tk.silence_prob * tk.power_sleep);
            }
            if !delay.diverged && delay.value > 0.0 {
                throughput[mi] = log_term * active_fraction / delay.value;
            }
        }
        let eta = if power > 0.0 {
            (throughput[0] + throughput[1]) / power
        } else {
            0.0
        };
        Ok(EnergyResult {
            throughput_fd: throughput[0],
            throughput_hd: throughput[1],
            power_area: power,
            eta,
        })
    }
}

/// Unnormalized association-distance density of tier k at distance r:
/// 2πλ_k r exp(-π Σ_i λ_i ((p_i/p_k) r^{α_k})^{2/α_i}).
fn association_density(config: &NetworkConfig, k: usize, r: f64) -> f64 {
    let tk = &config.tiers[k];
    let mut exponent = 0.0;
    for i in 0..config.num_tiers() {
        let xi = exclusion_radius(config, k, i, r);
        exponent -= PI * config.tiers[i].density * xi * xi;
    }
    2.0 * PI * tk.density * r * exponent.exp()
}

fn association_triplet(
    config: &NetworkConfig,
    k: usize,
    settings: &QuadratureSettings,
) -> Result<TierAssociation, QuadratureError> {
    let theta = config.tiers[k].fd_distance;
    let f = |x: f64| association_density(config, k, x);
    let fd = integrate_finite(f, 0.0, theta, settings)?;
    let hd = integrate_semi_infinite(f, theta, settings)?;
    let total = integrate_semi_infinite(f, 0.0, settings)?;
    Ok(TierAssociation {
        a_fd: fd.value,
        a_hd: hd.value,
        a_total: total.value,
        error: fd.error + hd.error + total.error,
    })
}

/// A_k^FD by itself (Lemma 1, FD branch).
pub fn association_fd(
    config: &NetworkConfig,
    k: usize,
    settings: &QuadratureSettings,
) -> Result<Estimate, QuadratureError> {
    let f = |x: f64| association_density(config, k, x);
    integrate_finite(f, 0.0, config.tiers[k].fd_distance, settings)
}

/// A_k^HD by itself (Lemma 1, HD branch).
pub fn association_hd(
    config: &NetworkConfig,
    k: usize,
    settings: &QuadratureSettings,
) -> Result<Estimate, QuadratureError> {
    let f = |x: f64| association_density(config, k, x);
    integrate_semi_infinite(f, config.tiers[k].fd_distance, settings)
}

/// A_k over the full range; Σ_k A_k = 1.
pub fn association_total(
    config: &NetworkConfig,
    k: usize,
    settings: &QuadratureSettings,
) -> Result<Estimate, QuadratureError> {
    let f = |x: f64| association_density(config, k, x);
    integrate_semi_infinite(f, 0.0, settings)
}
