//! Monte Carlo engine: samples Poisson network realizations and estimates
//! success probabilities, FD user densities, and local delay empirically.
//!
//! The estimators are independent of the quadrature route: interference is
//! accumulated point by point from sampled geometries, with per-slot
//! Rayleigh fading and Bernoulli silence. Runs are deterministic for a
//! given seed: realization `i` draws from ChaCha8 stream `i`, and the
//! parallel reduction folds per-realization results in index order, so
//! serial and parallel execution produce bit-identical output.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1, Poisson};
use rayon::prelude::*;
use std::collections::HashMap;
use thiserror::Error;

use crate::analysis::exclusion_radius;
use crate::model::{DuplexMode, NetworkConfig};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SimulationError {
    #[error("window too small: exclusion radius {required:.1} m leaves less than the {guard:.1} m guard inside the {window:.1} m window")]
    InsufficientGuard { required: f64, guard: f64, window: f64 },
    #[error("invalid simulation settings: {0}")]
    InvalidSettings(String),
}

/// Simulation controls.
#[derive(Debug, Clone, PartialEq)]
pub struct SimulationSettings {
    /// Radius of the sampling disk for interferers, meters.
    pub window_radius: f64,
    /// Margin kept between observed statistics and the window edge, meters.
    pub guard_radius: f64,
    /// Number of independent outer realizations.
    pub realizations: usize,
    /// Slots evaluated per realization in success estimation.
    pub slots: usize,
    /// Maximum slots waited for a success in delay estimation.
    pub delay_cap: usize,
    /// Fixed geometry across slots within a realization when true;
    /// resampled every slot (matching the analytical averaging) when false.
    pub quenched: bool,
    pub seed: u64,
}

impl SimulationSettings {
    /// Conservative defaults sized for the densities in `config`: the
    /// window spans several times the typical cell radius of the sparsest
    /// tier so truncated far-field interference is negligible.
    pub fn for_config(config: &NetworkConfig) -> Self {
        let min_density = config
            .tiers
            .iter()
            .map(|t| t.density)
            .fold(f64::INFINITY, f64::min);
        // Mean nearest-BS distance of the sparsest tier is 1/(2√λ).
        let cell = 0.5 / min_density.sqrt();
        let window_radius = (24.0 * cell).max(4_000.0);
        SimulationSettings {
            window_radius,
            guard_radius: window_radius / 2.0,
            realizations: 1_000,
            slots: 100,
            delay_cap: 100_000,
            quenched: false,
            seed: 0,
        }
    }

    pub fn validate(&self) -> Result<(), SimulationError> {
        let mut problems = Vec::new();
        if !(self.window_radius > 0.0) {
            problems.push("window_radius must be positive");
        }
        if !(self.guard_radius >= 0.0 && self.guard_radius < self.window_radius) {
            problems.push("guard_radius must lie in [0, window_radius)");
        }
        if self.realizations == 0 {
            problems.push("realizations must be positive");
        }
        if self.slots == 0 {
            problems.push("slots must be positive");
        }
        if self.delay_cap == 0 {
            problems.push("delay_cap must be positive");
        }
        if problems.is_empty() {
            Ok(())
        } else {
            Err(SimulationError::InvalidSettings(problems.join("; ")))
        }
    }
}

/// Sample mean with its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeanEstimate {
    pub mean: f64,
    pub std_error: f64,
}

/// Joint FD/HD success estimate from shared interference samples.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SuccessEstimate {
    pub fd: MeanEstimate,
    pub hd: MeanEstimate,
}

/// Aggregate delay estimate; each realization contributes its waiting time
/// to exactly one duplex branch (the other contributes zero), so the two
/// branch means sum to the total local delay.
#[derive(Debug, Clone, PartialEq)]
pub struct DelayEstimate {
    pub d_fd: MeanEstimate,
    pub d_hd: MeanEstimate,
    pub d_total: MeanEstimate,
    /// Fraction of realizations that hit `delay_cap` without a success;
    /// the mean is an underestimate when this is materially above zero.
    pub truncated_fraction: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub fn dist(&self, other: Point) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }

    pub fn norm(&self) -> f64 {
        self.x.hypot(self.y)
    }
}

/// Homogeneous PPP restricted to the annulus r_min ≤ ‖x‖ ≤ r_max.
pub fn sample_ppp_annulus<R: Rng>(
    density: f64,
    r_min: f64,
    r_max: f64,
    rng: &mut R,
) -> Vec<Point> {
    if density <= 0.0 || r_max <= r_min {
        return Vec::new();
    }
    let area = std::f64::consts::PI * (r_max * r_max - r_min * r_min);
    let mean = density * area;
    let n = if mean > 0.0 {
        Poisson::new(mean).expect("positive mean").sample(rng) as usize
    } else {
        0
    };
    let lo2 = r_min * r_min;
    let hi2 = r_max * r_max;
    (0..n)
        .map(|_| {
            let r = (lo2 + rng.gen::<f64>() * (hi2 - lo2)).sqrt();
            let phi = rng.gen::<f64>() * std::f64::consts::TAU;
            Point { x: r * phi.cos(), y: r * phi.sin() }
        })
        .collect()
}

/// Homogeneous PPP on a disk of the given radius centered at the origin.
pub fn sample_ppp<R: Rng>(density: f64, radius: f64, rng: &mut R) -> Vec<Point> {
    sample_ppp_annulus(density, 0.0, radius, rng)
}

/// One sampled network: BS positions per tier and user positions.
#[derive(Debug, Clone)]
pub struct Realization {
    pub bs: Vec<Vec<Point>>,
    pub users: Vec<Point>,
}

impl Realization {
    pub fn sample<R: Rng>(config: &NetworkConfig, window_radius: f64, rng: &mut R) -> Self {
        let bs = config
            .tiers
            .iter()
            .map(|t| sample_ppp(t.density, window_radius, rng))
            .collect();
        let users = sample_ppp(config.user.density, window_radius, rng);
        Realization { bs, users }
    }
}

/// FD if the serving distance is within the tier's FD threshold
/// (boundary inclusive), HD otherwise.
pub fn select_mode(config: &NetworkConfig, tier: usize, r: f64) -> DuplexMode {
    if r <= config.tiers[tier].fd_distance {
        DuplexMode::Fd
    } else {
        DuplexMode::Hd
    }
}

/// SIR of a slot; an interference-free slot has infinite SIR.
pub fn slot_sir(signal: f64, interference: f64) -> f64 {
    if interference <= 0.0 {
        f64::INFINITY
    } else {
        signal / interference
    }
}

/// Uniform-grid nearest-neighbor index over one tier's BS positions.
struct GridIndex {
    cell: f64,
    buckets: HashMap<(i64, i64), Vec<Point>>,
}

impl GridIndex {
    fn build(points: &[Point], cell: f64) -> Self {
        let mut buckets: HashMap<(i64, i64), Vec<Point>> = HashMap::new();
        for &p in points {
            let key = ((p.x / cell).floor() as i64, (p.y / cell).floor() as i64);
            buckets.entry(key).or_default().push(p);
        }
        GridIndex { cell, buckets }
    }

    /// Distance to the nearest stored point, or ∞ when empty.
    fn nearest_dist(&self, q: Point) -> f64 {
        if self.buckets.is_empty() {
            return f64::INFINITY;
        }
        let qi = (q.x / self.cell).floor() as i64;
        let qj = (q.y / self.cell).floor() as i64;
        let mut best = f64::INFINITY;
        let mut ring = 0i64;
        loop {
            // Any point in a cell at Chebyshev ring R is at distance
            // at least (R - 1)·cell, so once best is below that bound
            // no farther ring can improve it.
            if best < (ring - 1) as f64 * self.cell {
                return best;
            }
            let mut any_cell = false;
            for di in -ring..=ring {
                for dj in -ring..=ring {
                    if di.abs().max(dj.abs()) != ring {
                        continue;
                    }
                    if let Some(pts) = self.buckets.get(&(qi + di, qj + dj)) {
                        any_cell = true;
                        for p in pts {
                            best = best.min(p.dist(q));
                        }
                    }
                }
            }
            let _ = any_cell;
            ring += 1;
            if ring > 1_000_000 {
                return best;
            }
        }
    }
}

/// Tier index and serving distance maximizing average received power
/// p_j d_j^{-α_j}; `dists` holds the per-tier nearest distances.
fn strongest_tier(config: &NetworkConfig, dists: &[f64]) -> Option<(usize, f64)> {
    let mut best: Option<(usize, f64, f64)> = None;
    for (j, t) in config.tiers.iter().enumerate() {
        let d = dists[j];
        if !d.is_finite() || d <= 0.0 {
            if d == 0.0 {
                // Co-located BS: infinite average power, immediate winner.
                return Some((j, 0.0));
            }
            continue;
        }
        let pw = t.tx_power.ln() - t.pathloss_alpha * d.ln();
        match best {
            Some((_, _, b)) if b >= pw => {}
            _ => best = Some((j, d, pw)),
        }
    }
    best.map(|(j, d, _)| (j, d))
}

/// Associate the typical user at the origin: nearest BS per tier, then
/// the max-average-power rule across tiers.
pub fn associate_origin(config: &NetworkConfig, bs: &[Vec<Point>]) -> Option<(usize, f64)> {
    let dists: Vec<f64> = bs
        .iter()
        .map(|pts| {
            pts.iter()
                .map(|p| p.norm())
                .fold(f64::INFINITY, f64::min)
        })
        .collect();
    strongest_tier(config, &dists)
}

/// Per-user association of a realization: (tier, serving distance) for each
/// user, using a grid index per tier for the nearest-neighbor queries.
pub fn associate(config: &NetworkConfig, real: &Realization) -> Vec<Option<(usize, f64)>> {
    let grids: Vec<GridIndex> = real
        .bs
        .iter()
        .zip(&config.tiers)
        .map(|(pts, t)| GridIndex::build(pts, 0.75 / t.density.sqrt()))
        .collect();
    real.users
        .iter()
        .map(|&u| {
            let dists: Vec<f64> = grids.iter().map(|g| g.nearest_dist(u)).collect();
            strongest_tier(config, &dists)
        })
        .collect()
}

fn cluster_mean_se(per_realization: &[f64]) -> MeanEstimate {
    let n = per_realization.len() as f64;
    let mean = per_realization.iter().sum::<f64>() / n;
    if per_realization.len() < 2 {
        return MeanEstimate { mean, std_error: f64::INFINITY };
    }
    let var = per_realization
        .iter()
        .map(|x| (x - mean) * (x - mean))
        .sum::<f64>()
        / (n - 1.0);
    MeanEstimate { mean, std_error: (var / n).sqrt() }
}

fn stream_rng(seed: u64, salt: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ salt);
    rng.set_stream(index);
    rng
}

/// Empirical λ_{j,u}^FD per tier: fraction of tier-j users within ϑ_j,
/// times (1 - χ_j) λ_u. Users are only counted inside the guard region so
/// every counted user sees its true serving BS.
pub fn estimate_fd_user_density(
    config: &NetworkConfig,
    settings: &SimulationSettings,
) -> Result<Vec<MeanEstimate>, SimulationError> {
    settings.validate()?;
    let k_tiers = config.num_tiers();
    let count_radius = settings.window_radius - settings.guard_radius;

    let per_real: Vec<Vec<Option<f64>>> = (0..settings.realizations)
        .into_par_iter()
        .map(|i| {
            let mut rng = stream_rng(settings.seed, 0x7573_6572, i as u64);
            let real = Realization::sample(config, settings.window_radius, &mut rng);
            let assoc = associate(config, &real);
            let mut n = vec![0usize; k_tiers];
            let mut n_fd = vec![0usize; k_tiers];
            for (u, a) in real.users.iter().zip(&assoc) {
                if u.norm() > count_radius {
                    continue;
                }
                if let Some((j, d)) = a {
                    n[*j] += 1;
                    if *d <= config.tiers[*j].fd_distance {
                        n_fd[*j] += 1;
                    }
                }
            }
            (0..k_tiers)
                .map(|j| {
                    (n[j] > 0).then(|| {
                        n_fd[j] as f64 / n[j] as f64
                            * (1.0 - config.tiers[j].silence_prob)
                            * config.user.density
                    })
                })
                .collect()
        })
        .collect();

    Ok((0..k_tiers)
        .map(|j| {
            let vals: Vec<f64> = per_real.iter().filter_map(|r| r[j]).collect();
            if vals.is_empty() {
                MeanEstimate { mean: 0.0, std_error: f64::INFINITY }
            } else {
                cluster_mean_se(&vals)
            }
        })
        .collect())
}

/// Interference geometry conditioned on the typical tier-k user at serving
/// distance r: per tier, no BS (or approximating FD user) closer than the
/// exclusion radius implied by max-power association.
struct ConditionedGeometry {
    /// (distance, tx_power, alpha, activity) per interferer.
    bs: Vec<(f64, f64, f64, f64)>,
    users: Vec<(f64, f64)>, // (distance, activity)
}

fn sample_conditioned<R: Rng>(
    config: &NetworkConfig,
    k: usize,
    r: f64,
    fd_density: &[f64],
    window: f64,
    rng: &mut R,
) -> ConditionedGeometry {
    let mut bs = Vec::new();
    let mut users = Vec::new();
    for (j, t) in config.tiers.iter().enumerate() {
        let e_kj = exclusion_radius(config, k, j, r);
        let active = 1.0 - t.silence_prob;
        for p in sample_ppp_annulus(t.density, e_kj.min(window), window, rng) {
            bs.push((p.norm(), t.tx_power, t.pathloss_alpha, active));
        }
        // fd_density already carries the (1 - χ_j) thinning; sample the
        // unthinned process and flip activity per slot instead.
        let raw = if active > 0.0 { fd_density[j] / active } else { 0.0 };
        for p in sample_ppp_annulus(raw, e_kj.min(window), window, rng) {
            users.push((p.norm(), active));
        }
    }
    ConditionedGeometry { bs, users }
}

fn slot_interference<R: Rng>(
    geometry: &ConditionedGeometry,
    user_power: f64,
    user_alpha: f64,
    rng: &mut R,
) -> f64 {
    let mut total = 0.0;
    for &(d, p, alpha, active) in &geometry.bs {
        if rng.gen::<f64>() < active {
            let h: f64 = Exp1.sample(rng);
            total += h * p * d.powf(-alpha);
        }
    }
    for &(d, active) in &geometry.users {
        if rng.gen::<f64>() < active {
            let h: f64 = Exp1.sample(rng);
            total += h * user_power * d.powf(-user_alpha);
        }
    }
    total
}

fn guard_check(
    config: &NetworkConfig,
    k: usize,
    r: f64,
    settings: &SimulationSettings,
) -> Result<(), SimulationError> {
    for j in 0..config.num_tiers() {
        let e = exclusion_radius(config, k, j, r);
        if e > settings.window_radius - settings.guard_radius {
            return Err(SimulationError::InsufficientGuard {
                required: e,
                guard: settings.guard_radius,
                window: settings.window_radius,
            });
        }
    }
    Ok(())
}

/// Estimate P_suc^FD and P_suc^HD for a tier-k user at serving distance r.
/// Both are computed from the same interference samples; they differ only
/// by the residual self-interference term in the FD denominator.
pub fn estimate_success_probability(
    config: &NetworkConfig,
    k: usize,
    r: f64,
    fd_density: &[f64],
    settings: &SimulationSettings,
) -> Result<SuccessEstimate, SimulationError> {
    settings.validate()?;
    guard_check(config, k, r, settings)?;
    let tk = config.tiers[k].clone();
    let si = config.user.si_residual * config.user.tx_power;

    let per_real: Vec<(f64, f64)> = (0..settings.realizations)
        .into_par_iter()
        .map(|i| {
            let mut rng = stream_rng(settings.seed, 0x7375_6363, i as u64);
            let mut geometry = sample_conditioned(
                config,
                k,
                r,
                fd_density,
                settings.window_radius,
                &mut rng,
            );
            let mut fd_hits = 0usize;
            let mut hd_hits = 0usize;
            for slot in 0..settings.slots {
                if slot > 0 && !settings.quenched {
                    geometry = sample_conditioned(
                        config,
                        k,
                        r,
                        fd_density,
                        settings.window_radius,
                        &mut rng,
                    );
                }
                if rng.gen::<f64>() >= 1.0 - tk.silence_prob {
                    continue; // serving BS silent this slot
                }
                let h: f64 = Exp1.sample(&mut rng);
                let signal = h * tk.tx_power * r.powf(-tk.pathloss_alpha);
                let interf = slot_interference(
                    &geometry,
                    config.user.tx_power,
                    config.user.pathloss_alpha,
                    &mut rng,
                );
                if slot_sir(signal, interf) >= tk.sir_threshold {
                    hd_hits += 1;
                }
                if slot_sir(signal, interf + si) >= tk.sir_threshold {
                    fd_hits += 1;
                }
            }
            let n = settings.slots as f64;
            (fd_hits as f64 / n, hd_hits as f64 / n)
        })
        .collect();

    let fd: Vec<f64> = per_real.iter().map(|x| x.0).collect();
    let hd: Vec<f64> = per_real.iter().map(|x| x.1).collect();
    Ok(SuccessEstimate { fd: cluster_mean_se(&fd), hd: cluster_mean_se(&hd) })
}

/// Empirical association/mode frequencies of the typical user: one
/// observation per realization, reported per tier as (FD share, HD share).
pub fn estimate_association(
    config: &NetworkConfig,
    settings: &SimulationSettings,
) -> Result<Vec<(MeanEstimate, MeanEstimate)>, SimulationError> {
    settings.validate()?;
    let k_tiers = config.num_tiers();
    let hits: Vec<(usize, DuplexMode)> = (0..settings.realizations)
        .into_par_iter()
        .map(|i| {
            let mut rng = stream_rng(settings.seed, 0x6173_736f, i as u64);
            loop {
                let bs: Vec<Vec<Point>> = config
                    .tiers
                    .iter()
                    .map(|t| sample_ppp(t.density, settings.window_radius, &mut rng))
                    .collect();
                if let Some((k, r)) = associate_origin(config, &bs) {
                    return (k, select_mode(config, k, r));
                }
            }
        })
        .collect();
    let n = hits.len() as f64;
    Ok((0..k_tiers)
        .map(|k| {
            let stat = |mode: DuplexMode| {
                let c = hits.iter().filter(|h| h.0 == k && h.1 == mode).count() as f64;
                let p = c / n;
                MeanEstimate { mean: p, std_error: (p * (1.0 - p) / n).sqrt() }
            };
            (stat(DuplexMode::Fd), stat(DuplexMode::Hd))
        })
        .collect())
}

/// Estimate the aggregate local delays D_FD and D_HD. Each realization
/// draws the typical user's association from a full network sample, then
/// counts slots until the first success under the resulting duplex mode.
pub fn estimate_local_delay(
    config: &NetworkConfig,
    settings: &SimulationSettings,
) -> Result<DelayEstimate, SimulationError> {
    settings.validate()?;
    let mut density_settings = settings.clone();
    density_settings.realizations = settings.realizations.clamp(1, 32);
    let fd_density: Vec<f64> = estimate_fd_user_density(config, &density_settings)?
        .into_iter()
        .map(|e| e.mean)
        .collect();
    estimate_local_delay_with_densities(config, &fd_density, settings)
}

/// Delay estimation with externally supplied FD user densities (per m²).
pub fn estimate_local_delay_with_densities(
    config: &NetworkConfig,
    fd_density: &[f64],
    settings: &SimulationSettings,
) -> Result<DelayEstimate, SimulationError> {
    settings.validate()?;
    let si = config.user.si_residual * config.user.tx_power;

    // (fd contribution, hd contribution, truncated)
    let per_real: Vec<(f64, f64, bool)> = (0..settings.realizations)
        .into_par_iter()
        .map(|i| {
            let mut rng = stream_rng(settings.seed, 0x6465_6c61, i as u64);
            let (k, r) = loop {
                let bs: Vec<Vec<Point>> = config
                    .tiers
                    .iter()
                    .map(|t| sample_ppp(t.density, settings.window_radius, &mut rng))
                    .collect();
                if let Some(found) = associate_origin(config, &bs) {
                    break found;
                }
            };
            let tk = &config.tiers[k];
            let mode = select_mode(config, k, r);
            let si_term = si * mode.indicator();

            let mut geometry = sample_conditioned(
                config,
                k,
                r,
                fd_density,
                settings.window_radius,
                &mut rng,
            );
            let mut delay = settings.delay_cap;
            let mut truncated = true;
            for slot in 0..settings.delay_cap {
                if slot > 0 && !settings.quenched {
                    geometry = sample_conditioned(
                        config,
                        k,
                        r,
                        fd_density,
                        settings.window_radius,
                        &mut rng,
                    );
                }
                let success = if rng.gen::<f64>() < 1.0 - tk.silence_prob {
                    let h: f64 = Exp1.sample(&mut rng);
                    let signal = h * tk.tx_power * r.powf(-tk.pathloss_alpha);
                    let interf = slot_interference(
                        &geometry,
                        config.user.tx_power,
                        config.user.pathloss_alpha,
                        &mut rng,
                    );
                    slot_sir(signal, interf + si_term) >= tk.sir_threshold
                } else {
                    false
                };
                if success {
                    delay = slot + 1;
                    truncated = false;
                    break;
                }
            }
            match mode {
                DuplexMode::Fd => (delay as f64, 0.0, truncated),
                DuplexMode::Hd => (0.0, delay as f64, truncated),
            }
        })
        .collect();

    let fd: Vec<f64> = per_real.iter().map(|x| x.0).collect();
    let hd: Vec<f64> = per_real.iter().map(|x| x.1).collect();
    let total: Vec<f64> = per_real.iter().map(|x| x.0 + x.1).collect();
    let truncated_fraction =
        per_real.iter().filter(|x| x.2).count() as f64 / per_real.len() as f64;
    Ok(DelayEstimate {
        d_fd: cluster_mean_se(&fd),
        d_hd: cluster_mean_se(&hd),
        d_total: cluster_mean_se(&total),
        truncated_fraction,
    })
}
