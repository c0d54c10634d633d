//! `hetnet` binary: evaluate, sweep, render presets, and cross-validate.

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use std::path::PathBuf;

use hetnet::analysis::Analyzer;
use hetnet::model::NetworkConfig;
use hetnet::montecarlo::{estimate_local_delay, SimulationSettings};
use hetnet::quadrature::QuadratureSettings;
use hetnet_cli::config::{load_config, serialize_config};
use hetnet_cli::crossval::crossval;
use hetnet_cli::plot::{emit_plot_script, PlotKind};
use hetnet_cli::presets::{preset, two_tier_config, PresetName};
use hetnet_cli::sweep::{run_sweep, Engine, Outputs, ParamPath, RunSettings, SweepSpec};

#[derive(Parser)]
#[command(
    name = "hetnet",
    about = "Local delay and energy efficiency of hybrid FD/HD heterogeneous cellular networks"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum EngineArg {
    Analytical,
    Mc,
    Both,
}

impl From<EngineArg> for Engine {
    fn from(e: EngineArg) -> Engine {
        match e {
            EngineArg::Analytical => Engine::Analytical,
            EngineArg::Mc => Engine::MonteCarlo,
            EngineArg::Both => Engine::Both,
        }
    }
}

#[derive(Args)]
struct ConfigSource {
    /// Config file in the documented key-value format.
    #[arg(long, conflicts_with = "base_preset")]
    config: Option<PathBuf>,
    /// Use a bundled preset's base configuration instead of a file.
    #[arg(long = "base-preset")]
    base_preset: Option<PresetNameArg>,
    /// Silence probability applied when building from a preset.
    #[arg(long, default_value_t = 0.5)]
    chi: f64,
}

#[derive(Clone, Copy)]
struct PresetNameArg(PresetName);

impl std::str::FromStr for PresetNameArg {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        s.parse().map(PresetNameArg)
    }
}

impl ConfigSource {
    fn load(&self) -> Result<NetworkConfig> {
        match (&self.config, &self.base_preset) {
            (Some(path), _) => Ok(load_config(path)?),
            (None, Some(PresetNameArg(name))) => {
                let mut cfg = match name {
                    PresetName::Fig3 => hetnet_cli::presets::three_tier_config(self.chi),
                    _ => two_tier_config(self.chi),
                };
                for t in &mut cfg.tiers {
                    t.silence_prob = self.chi;
                }
                Ok(cfg)
            }
            (None, None) => Ok(two_tier_config(self.chi)),
        }
    }
}

#[derive(Args)]
struct SimArgs {
    /// Monte Carlo seed.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Monte Carlo realizations.
    #[arg(long)]
    realizations: Option<usize>,
    /// Slots per realization (success estimation).
    #[arg(long)]
    slots: Option<usize>,
    /// Sampling window radius in meters.
    #[arg(long)]
    window: Option<f64>,
    /// Guard margin in meters.
    #[arg(long)]
    guard: Option<f64>,
}

impl SimArgs {
    fn settings(&self, config: &NetworkConfig) -> SimulationSettings {
        let mut s = SimulationSettings::for_config(config);
        s.seed = self.seed;
        if let Some(r) = self.realizations {
            s.realizations = r;
        }
        if let Some(n) = self.slots {
            s.slots = n;
        }
        if let Some(w) = self.window {
            s.window_radius = w;
        }
        if let Some(g) = self.guard {
            s.guard_radius = g;
        }
        s
    }
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate delays and EE for a single configuration.
    Eval {
        #[command(flatten)]
        source: ConfigSource,
        #[arg(long, value_enum, default_value = "analytical")]
        engine: EngineArg,
        #[command(flatten)]
        sim: SimArgs,
        /// Dump the parsed configuration in canonical units and exit.
        #[arg(long)]
        show_config: bool,
    },
    /// Sweep one parameter over a grid and write CSV.
    Sweep {
        #[command(flatten)]
        source: ConfigSource,
        /// Swept parameter: tau_db, beta_db, silence_prob,
        /// tier[N].silence_prob, tier[N].density_per_km2.
        #[arg(long)]
        param: String,
        /// Grid as start:stop:step or a comma-separated list.
        #[arg(long)]
        grid: String,
        #[arg(long, value_enum, default_value = "analytical")]
        engine: EngineArg,
        /// Output CSV path.
        #[arg(long)]
        out: PathBuf,
        /// Also write a matplotlib script next to the CSV.
        #[arg(long)]
        plot: bool,
        /// Include per-tier delay columns.
        #[arg(long)]
        per_tier: bool,
        /// Include energy-efficiency columns.
        #[arg(long)]
        ee: bool,
        /// Append a wall-clock column (breaks byte-identical output).
        #[arg(long)]
        timings: bool,
        #[command(flatten)]
        sim: SimArgs,
    },
    /// Reproduce a bundled figure: CSV plus plot script.
    Preset {
        /// fig2 | fig3 | fig4 | fig5 | fig6 | fig7
        name: PresetNameArg,
        /// Output directory.
        #[arg(long, default_value = ".")]
        out: PathBuf,
        #[arg(long, value_enum, default_value = "analytical")]
        engine: EngineArg,
        #[arg(long)]
        timings: bool,
        #[command(flatten)]
        sim: SimArgs,
    },
    /// Cross-validate the analytical and Monte Carlo engines.
    Crossval {
        #[command(flatten)]
        source: ConfigSource,
        /// Extra relative slack on top of the 3σ agreement bands.
        #[arg(long, default_value_t = 0.01)]
        tol: f64,
        #[command(flatten)]
        sim: SimArgs,
    },
}

fn parse_grid(text: &str) -> Result<Vec<f64>> {
    if text.contains(':') {
        let parts: Vec<&str> = text.split(':').collect();
        if parts.len() != 3 {
            bail!("grid range must be start:stop:step");
        }
        let start: f64 = parts[0].parse().context("grid start")?;
        let stop: f64 = parts[1].parse().context("grid stop")?;
        let step: f64 = parts[2].parse().context("grid step")?;
        if step <= 0.0 || stop < start {
            bail!("grid range needs stop >= start and step > 0");
        }
        let n = ((stop - start) / step).round() as usize;
        Ok((0..=n).map(|i| start + i as f64 * step).collect())
    } else {
        text.split(',')
            .map(|v| v.trim().parse::<f64>().context("grid value"))
            .collect()
    }
}

fn print_eval(config: &NetworkConfig, engine: Engine, sim: &SimArgs) -> Result<()> {
    let analyzer = Analyzer::new(config, QuadratureSettings::default())?;
    println!("tier associations (FD / HD / total):");
    for (k, t) in analyzer.associations().tiers.iter().enumerate() {
        println!(
            "  tier {}: {:.6} / {:.6} / {:.6}",
            k + 1,
            t.a_fd,
            t.a_hd,
            t.a_total
        );
    }
    let show = |label: &str, value: f64, diverged: bool, extra: &str| {
        if diverged {
            println!("  {label}: diverged{extra}");
        } else {
            println!("  {label}: {value:.6}{extra}");
        }
    };
    if engine.runs_analytical() {
        let d = analyzer.delay_result();
        println!("analytical local delay (slots):");
        show("D_FD", d.d_fd.value, d.d_fd.diverged, "");
        show("D_HD", d.d_hd.value, d.d_hd.diverged, "");
        for (k, t) in d.per_tier.iter().enumerate() {
            show(
                &format!("D_tier{}", k + 1),
                t.d_total.value,
                t.d_total.diverged,
                "",
            );
        }
        match analyzer.energy_efficiency(&d.d_fd, &d.d_hd) {
            Ok(ee) => println!("energy efficiency: {:.6e} nats/Joule/Hz", ee.eta),
            Err(e) => println!("energy efficiency: unavailable ({e})"),
        }
    }
    if engine.runs_monte_carlo() {
        let settings = sim.settings(config);
        let d = estimate_local_delay(config, &settings)?;
        println!(
            "monte carlo local delay (slots), {} realizations, waits capped at {} slots:",
            settings.realizations, settings.delay_cap
        );
        println!("  D_FD: {:.6} ± {:.6}", d.d_fd.mean, d.d_fd.std_error);
        println!("  D_HD: {:.6} ± {:.6}", d.d_hd.mean, d.d_hd.std_error);
        if d.truncated_fraction > 0.0 {
            println!(
                "  ({:.2}% of trials truncated at {} slots)",
                100.0 * d.truncated_fraction,
                settings.delay_cap
            );
        }
    }
    Ok(())
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    match cli.command {
        Command::Eval { source, engine, sim, show_config } => {
            let config = source.load()?;
            if show_config {
                print!("{}", serialize_config(&config));
                return Ok(());
            }
            print_eval(&config, engine.into(), &sim)?;
        }
        Command::Sweep {
            source,
            param,
            grid,
            engine,
            out,
            plot,
            per_tier,
            ee,
            timings,
            sim,
        } => {
            let config = source.load()?;
            let spec = SweepSpec {
                series: vec![("base".to_string(), config.clone())],
                parameter: ParamPath::parse(&param)?,
                grid: parse_grid(&grid)?,
                engine: engine.into(),
                outputs: Outputs { per_tier, ee },
            };
            let mut settings = RunSettings::for_config(&config);
            settings.simulation = sim.settings(&config);
            settings.timings = timings;
            let table = run_sweep(&spec, &settings)?;
            table.write_to(&out)?;
            println!("wrote {} ({} rows)", out.display(), table.rows.len());
            if plot {
                let kind = match (per_tier, ee) {
                    (true, _) => PlotKind::PerTier,
                    (_, true) => PlotKind::DelayAndEe,
                    _ => PlotKind::DelayOnly,
                };
                let script = out.with_extension("py");
                emit_plot_script(&out, &script, kind)?;
                println!("wrote {}", script.display());
            }
        }
        Command::Preset { name, out, engine, timings, sim } => {
            let PresetNameArg(name) = name;
            let mut p = preset(name);
            p.spec.engine = engine.into();
            let base = p.spec.series[0].1.clone();
            let mut settings = RunSettings::for_config(&base);
            settings.simulation = sim.settings(&base);
            settings.timings = timings;
            std::fs::create_dir_all(&out)
                .with_context(|| format!("creating {}", out.display()))?;
            let csv_path = out.join(format!("{name}.csv"));
            let table = run_sweep(&p.spec, &settings)?;
            table.write_to(&csv_path)?;
            let kind = match name {
                PresetName::Fig6 => PlotKind::FdDelay,
                PresetName::Fig7 => PlotKind::PerTier,
                _ => PlotKind::DelayAndEe,
            };
            let script_path = out.join(format!("{name}.py"));
            emit_plot_script(&csv_path, &script_path, kind)?;
            let cfg_path = out.join(format!("{name}.cfg"));
            std::fs::write(&cfg_path, serialize_config(&base))
                .with_context(|| format!("writing {}", cfg_path.display()))?;
            println!(
                "wrote {}, {}, {}",
                csv_path.display(),
                script_path.display(),
                cfg_path.display()
            );
        }
        Command::Crossval { source, tol, sim } => {
            let config = source.load()?;
            let settings = sim.settings(&config);
            let report = crossval(&config, &QuadratureSettings::default(), &settings, tol)?;
            print!("{report}");
            if !report.all_pass() {
                std::process::exit(1);
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_parsing() {
        assert_eq!(parse_grid("-2:2:1").unwrap(), vec![-2.0, -1.0, 0.0, 1.0, 2.0]);
        assert_eq!(parse_grid("0.5,0.9").unwrap(), vec![0.5, 0.9]);
        assert!(parse_grid("1:0:1").is_err());
        assert!(parse_grid("a,b").is_err());
    }

    #[test]
    fn cli_parses() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }
}
