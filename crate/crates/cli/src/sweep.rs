//! Parameter sweeps: apply a grid of values to a base configuration and
//! evaluate each point with the analytical engine, the Monte Carlo engine,
//! or both, producing ordered CSV rows.

use hetnet::analysis::{AnalysisError, Analyzer, DelayEntry};
use hetnet::model::{db_to_linear, per_km2_to_per_m2, validate, DuplexMode, NetworkConfig};
use hetnet::montecarlo::{estimate_local_delay, DelayEstimate, SimulationSettings};
use hetnet::quadrature::QuadratureSettings;
use rayon::prelude::*;
use std::path::Path;
use std::time::Instant;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SweepError {
    #[error("invalid sweep: {0}")]
    Invalid(String),
    #[error("cannot write {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Engine {
    Analytical,
    MonteCarlo,
    Both,
}

impl Engine {
    pub fn runs_analytical(self) -> bool {
        matches!(self, Engine::Analytical | Engine::Both)
    }

    pub fn runs_monte_carlo(self) -> bool {
        matches!(self, Engine::MonteCarlo | Engine::Both)
    }
}

/// Which optional output blocks a sweep emits (delay is always emitted).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Outputs {
    pub per_tier: bool,
    pub ee: bool,
}

/// The swept parameter. dB-valued paths convert to linear on application.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ParamPath {
    /// Common SIR threshold of every tier, grid in dB.
    CommonThresholdDb,
    /// Residual self-interference factor β, grid in dB.
    SiResidualDb,
    /// Silence probability of one tier (zero-based index).
    TierSilence(usize),
    /// Silence probability of every tier at once.
    AllSilence,
    /// Density of one tier, grid in per km².
    TierDensityPerKm2(usize),
}

impl ParamPath {
    /// Parse the CLI spelling; tier indices are 1-based there.
    pub fn parse(text: &str) -> Result<Self, SweepError> {
        fn tier_field(t: &str) -> Option<(usize, &str)> {
            let rest = t.strip_prefix("tier[")?;
            let (idx, field) = rest.split_once("].")?;
            let idx: usize = idx.parse().ok()?;
            (idx >= 1).then(|| (idx - 1, field))
        }
        match text {
            "tau_db" => Ok(ParamPath::CommonThresholdDb),
            "beta_db" => Ok(ParamPath::SiResidualDb),
            "silence_prob" => Ok(ParamPath::AllSilence),
            other => match tier_field(other) {
                Some((i, "silence_prob")) => Ok(ParamPath::TierSilence(i)),
                Some((i, "density_per_km2")) => Ok(ParamPath::TierDensityPerKm2(i)),
                _ => Err(SweepError::Invalid(format!(
                    "unknown parameter '{other}' (expected tau_db, beta_db, silence_prob, \
                     tier[N].silence_prob, or tier[N].density_per_km2)"
                ))),
            },
        }
    }

    pub fn column_label(&self) -> &'static str {
        match self {
            ParamPath::CommonThresholdDb => "tau_db",
            ParamPath::SiResidualDb => "beta_db",
            ParamPath::TierSilence(_) | ParamPath::AllSilence => "silence_prob",
            ParamPath::TierDensityPerKm2(_) => "density_per_km2",
        }
    }

    fn resolves_in(&self, config: &NetworkConfig) -> bool {
        match *self {
            ParamPath::TierSilence(i) | ParamPath::TierDensityPerKm2(i) => i < config.num_tiers(),
            _ => true,
        }
    }

    pub fn apply(&self, config: &mut NetworkConfig, value: f64) {
        match *self {
            ParamPath::CommonThresholdDb => {
                for t in &mut config.tiers {
                    t.sir_threshold = db_to_linear(value);
                }
            }
            ParamPath::SiResidualDb => config.user.si_residual = db_to_linear(value),
            ParamPath::TierSilence(i) => config.tiers[i].silence_prob = value,
            ParamPath::AllSilence => {
                for t in &mut config.tiers {
                    t.silence_prob = value;
                }
            }
            ParamPath::TierDensityPerKm2(i) => {
                config.tiers[i].density = per_km2_to_per_m2(value)
            }
        }
    }
}

/// A sweep: one or more labeled base configs ("series") sharing one swept
/// parameter, one grid, and one output layout.
#[derive(Debug, Clone)]
pub struct SweepSpec {
    pub series: Vec<(String, NetworkConfig)>,
    pub parameter: ParamPath,
    pub grid: Vec<f64>,
    pub engine: Engine,
    pub outputs: Outputs,
}

impl SweepSpec {
    pub fn validate(&self) -> Result<(), SweepError> {
        if self.series.is_empty() {
            return Err(SweepError::Invalid("no series".into()));
        }
        let k = self.series[0].1.num_tiers();
        if self.series.iter().any(|(_, c)| c.num_tiers() != k) {
            return Err(SweepError::Invalid(
                "all series must have the same tier count".into(),
            ));
        }
        if self.grid.is_empty() {
            return Err(SweepError::Invalid("empty grid".into()));
        }
        if !self.grid.windows(2).all(|w| w[0] < w[1])
            && !self.grid.windows(2).all(|w| w[0] > w[1])
        {
            return Err(SweepError::Invalid("grid must be strictly monotone".into()));
        }
        for (label, c) in &self.series {
            if !self.parameter.resolves_in(c) {
                return Err(SweepError::Invalid(format!(
                    "parameter does not resolve in series '{label}'"
                )));
            }
        }
        Ok(())
    }

    pub fn num_tiers(&self) -> usize {
        self.series[0].1.num_tiers()
    }
}

/// Per-run knobs shared by every point.
#[derive(Debug, Clone)]
pub struct RunSettings {
    pub quadrature: QuadratureSettings,
    pub simulation: SimulationSettings,
    /// Emit a wall-clock column; off by default because it breaks the
    /// byte-identical-output guarantee.
    pub timings: bool,
}

impl RunSettings {
    pub fn for_config(config: &NetworkConfig) -> Self {
        RunSettings {
            quadrature: QuadratureSettings::default(),
            simulation: SimulationSettings::for_config(config),
            timings: false,
        }
    }
}

/// In-memory CSV: a header and string rows in final order.
#[derive(Debug, Clone, PartialEq)]
pub struct CsvTable {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl CsvTable {
    pub fn write_to(&self, path: &Path) -> Result<(), SweepError> {
        let mut w = csv::Writer::from_path(path).map_err(csv::Error::from)?;
        w.write_record(&self.header)?;
        for row in &self.rows {
            w.write_record(row)?;
        }
        w.flush().map_err(|source| SweepError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Ok(())
    }
}

struct PointOutcome {
    analytical: Option<AnalyticalPoint>,
    monte_carlo: Option<DelayEstimate>,
    failure: Option<String>,
    wall_ms: f64,
}

struct AnalyticalPoint {
    d_fd: DelayEntry,
    d_hd: DelayEntry,
    per_tier: Vec<DelayEntry>,
    ee: Option<[f64; 4]>, // eta, throughput_fd, throughput_hd, power_area
    /// E[min(T, delay_cap)] per mode, the quantity the Monte Carlo engine
    /// targets exactly; used for the cross-engine agreement columns
    /// because the raw waiting-time mean can have infinite variance.
    capped: Option<[f64; 2]>,
}

fn fmt(v: f64) -> String {
    format!("{v}")
}

fn delay_cells(entry: Option<&DelayEntry>, with_err: bool) -> Vec<String> {
    match entry {
        Some(e) if e.diverged => {
            let mut cells = vec!["div".to_string()];
            if with_err {
                cells.push(String::new());
            }
            cells.push("1".to_string());
            cells
        }
        Some(e) => {
            let mut cells = vec![fmt(e.value)];
            if with_err {
                cells.push(fmt(e.error));
            }
            cells.push("0".to_string());
            cells
        }
        None => {
            let mut cells = vec![String::new()];
            if with_err {
                cells.push(String::new());
            }
            cells.push(String::new());
            cells
        }
    }
}

fn evaluate_point(
    spec: &SweepSpec,
    settings: &RunSettings,
    series_idx: usize,
    grid_idx: usize,
) -> PointOutcome {
    let start = Instant::now();
    let mut config = spec.series[series_idx].1.clone();
    spec.parameter.apply(&mut config, spec.grid[grid_idx]);
    let config = match validate(config) {
        Ok(c) => c,
        Err(e) => {
            return PointOutcome {
                analytical: None,
                monte_carlo: None,
                failure: Some(e.to_string()),
                wall_ms: start.elapsed().as_secs_f64() * 1e3,
            }
        }
    };

    let mut failure = None;
    let analytical = if spec.engine.runs_analytical() {
        match Analyzer::new(&config, settings.quadrature.clone()) {
            Ok(az) => {
                let d_fd = az.local_delay(DuplexMode::Fd);
                let d_hd = az.local_delay(DuplexMode::Hd);
                let per_tier = if spec.outputs.per_tier {
                    az.per_tier_delay().into_iter().map(|t| t.d_total).collect()
                } else {
                    Vec::new()
                };
                let ee = if spec.outputs.ee {
                    match az.energy_efficiency(&d_fd, &d_hd) {
                        Ok(e) => Some([e.eta, e.throughput_fd, e.throughput_hd, e.power_area]),
                        Err(AnalysisError::MixedThresholds) => None,
                        Err(e) => {
                            failure = Some(e.to_string());
                            None
                        }
                    }
                } else {
                    None
                };
                let capped = if spec.engine == Engine::Both {
                    let cap = settings.simulation.delay_cap;
                    match (
                        az.capped_local_delay(DuplexMode::Fd, cap),
                        az.capped_local_delay(DuplexMode::Hd, cap),
                    ) {
                        (Ok(f), Ok(h)) => Some([f.value, h.value]),
                        _ => None,
                    }
                } else {
                    None
                };
                Some(AnalyticalPoint { d_fd, d_hd, per_tier, ee, capped })
            }
            Err(e) => {
                failure = Some(e.to_string());
                None
            }
        }
    } else {
        None
    };

    let monte_carlo = if spec.engine.runs_monte_carlo() {
        let mut sim = settings.simulation.clone();
        // Decorrelate points while keeping the run reproducible.
        sim.seed = sim
            .seed
            .wrapping_add(((series_idx * 100_003 + grid_idx) as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15));
        match estimate_local_delay(&config, &sim) {
            Ok(d) => Some(d),
            Err(e) => {
                failure = Some(e.to_string());
                None
            }
        }
    } else {
        None
    };

    PointOutcome {
        analytical,
        monte_carlo,
        failure,
        wall_ms: start.elapsed().as_secs_f64() * 1e3,
    }
}

/// Run the sweep. Points are dispatched to the worker pool; rows come out
/// ordered by (series, grid index, engine) regardless of completion order.
pub fn run_sweep(spec: &SweepSpec, settings: &RunSettings) -> Result<CsvTable, SweepError> {
    spec.validate()?;
    let k_tiers = spec.num_tiers();

    let mut header = vec![
        "series".to_string(),
        spec.parameter.column_label().to_string(),
        "engine".to_string(),
        "d_fd".to_string(),
        "d_fd_err".to_string(),
        "d_fd_diverged".to_string(),
        "d_hd".to_string(),
        "d_hd_err".to_string(),
        "d_hd_diverged".to_string(),
    ];
    if spec.outputs.per_tier {
        for k in 0..k_tiers {
            header.push(format!("d_tier{}", k + 1));
            header.push(format!("d_tier{}_diverged", k + 1));
        }
    }
    if spec.outputs.ee {
        header.extend(
            ["ee", "throughput_fd", "throughput_hd", "power_area"]
                .map(str::to_string),
        );
    }
    if spec.engine == Engine::Both {
        header.push("agree_fd_sigma".to_string());
        header.push("agree_hd_sigma".to_string());
    }
    header.push("status".to_string());
    if settings.timings {
        header.push("wall_ms".to_string());
    }

    let points: Vec<(usize, usize)> = (0..spec.series.len())
        .flat_map(|s| (0..spec.grid.len()).map(move |g| (s, g)))
        .collect();
    let outcomes: Vec<PointOutcome> = points
        .par_iter()
        .map(|&(s, g)| evaluate_point(spec, settings, s, g))
        .collect();

    let mut rows = Vec::new();
    for (&(s, g), outcome) in points.iter().zip(&outcomes) {
        let prefix = vec![
            spec.series[s].0.clone(),
            fmt(spec.grid[g]),
        ];
        let status = outcome
            .failure
            .clone()
            .unwrap_or_else(|| "ok".to_string());
        let mut engine_rows: Vec<Vec<String>> = Vec::new();
        if spec.engine.runs_analytical() {
            let mut row = prefix.clone();
            row.push("analytical".to_string());
            match &outcome.analytical {
                Some(a) => {
                    row.extend(delay_cells(Some(&a.d_fd), true));
                    row.extend(delay_cells(Some(&a.d_hd), true));
                    if spec.outputs.per_tier {
                        for t in &a.per_tier {
                            row.extend(delay_cells(Some(t), false));
                        }
                    }
                    if spec.outputs.ee {
                        match &a.ee {
                            Some(vals) => row.extend(vals.iter().map(|v| fmt(*v))),
                            None => row.extend(std::iter::repeat(String::new()).take(4)),
                        }
                    }
                }
                None => {
                    row.extend(delay_cells(None, true));
                    row.extend(delay_cells(None, true));
                    if spec.outputs.per_tier {
                        for _ in 0..k_tiers {
                            row.extend(delay_cells(None, false));
                        }
                    }
                    if spec.outputs.ee {
                        row.extend(std::iter::repeat(String::new()).take(4));
                    }
                }
            }
            engine_rows.push(row);
        }
        if spec.engine.runs_monte_carlo() {
            let mut row = prefix.clone();
            row.push("mc".to_string());
            match &outcome.monte_carlo {
                Some(d) => {
                    row.push(fmt(d.d_fd.mean));
                    row.push(fmt(d.d_fd.std_error));
                    row.push(if d.truncated_fraction > 0.0 { "1" } else { "0" }.to_string());
                    row.push(fmt(d.d_hd.mean));
                    row.push(fmt(d.d_hd.std_error));
                    row.push(if d.truncated_fraction > 0.0 { "1" } else { "0" }.to_string());
                }
                None => {
                    row.extend(delay_cells(None, true));
                    row.extend(delay_cells(None, true));
                }
            }
            if spec.outputs.per_tier {
                for _ in 0..k_tiers {
                    row.extend(delay_cells(None, false));
                }
            }
            if spec.outputs.ee {
                row.extend(std::iter::repeat(String::new()).take(4));
            }
            engine_rows.push(row);
        }
        for (i, mut row) in engine_rows.into_iter().enumerate() {
            if spec.engine == Engine::Both {
                let is_mc_row = i == 1;
                match (&outcome.analytical, &outcome.monte_carlo) {
                    (Some(a), Some(m)) if is_mc_row => {
                        let sigma = |capped: Option<f64>, e: &hetnet::montecarlo::MeanEstimate| {
                            match capped {
                                Some(x) if e.std_error > 0.0 => {
                                    fmt((x - e.mean).abs() / e.std_error)
                                }
                                _ => String::new(),
                            }
                        };
                        row.push(sigma(a.capped.map(|c| c[0]), &m.d_fd));
                        row.push(sigma(a.capped.map(|c| c[1]), &m.d_hd));
                    }
                    _ => {
                        row.push(String::new());
                        row.push(String::new());
                    }
                }
            }
            row.push(status.clone());
            if settings.timings {
                row.push(fmt(outcome.wall_ms));
            }
            debug_assert_eq!(row.len(), header.len());
            rows.push(row);
        }
    }

    Ok(CsvTable { header, rows })
}
