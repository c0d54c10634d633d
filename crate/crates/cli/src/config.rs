//! Structured text config format: `[tier]` / `[user]` sections of
//! `key = value [unit]` lines. Units are mandatory wherever a quantity has
//! one — powers in `W`, `mW` or `dBm`; distances in `m` or `km`; densities
//! in `/km2` or `/m2`; ratios in `dB` or `lin` — so a bare number is never
//! ambiguous. Serialization writes canonical SI units and round-trips
//! exactly.

use hetnet::model::{
    db_to_linear, dbm_to_watts, per_km2_to_per_m2, validate, NetworkConfig, TierParams,
    UserParams, ValidationError,
};
use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::Path;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error(transparent)]
    Invalid(#[from] ValidationError),
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

fn perr(line: usize, message: impl Into<String>) -> ConfigError {
    ConfigError::Parse { line, message: message.into() }
}

/// A raw `value [unit]` pair with the line it came from.
struct RawValue {
    number: f64,
    unit: Option<String>,
    line: usize,
}

#[derive(PartialEq, Clone, Copy)]
enum Dimension {
    Power,
    Distance,
    Density,
    Ratio,
    Plain,
}

impl RawValue {
    fn in_si(&self, dim: Dimension, key: &str) -> Result<f64, ConfigError> {
        let unit = self.unit.as_deref();
        let fail = |expected: &str| {
            Err(perr(
                self.line,
                format!(
                    "{key}: expected a unit in {{{expected}}}, got {}",
                    unit.map_or("none".to_string(), |u| format!("'{u}'"))
                ),
            ))
        };
        match dim {
            Dimension::Power => match unit {
                Some("W") => Ok(self.number),
                Some("mW") => Ok(self.number / 1000.0),
                Some("dBm") => Ok(dbm_to_watts(self.number)),
                _ => fail("W, mW, dBm"),
            },
            Dimension::Distance => match unit {
                Some("m") => Ok(self.number),
                Some("km") => Ok(self.number * 1000.0),
                _ => fail("m, km"),
            },
            Dimension::Density => match unit {
                Some("/km2") => Ok(per_km2_to_per_m2(self.number)),
                Some("/m2") => Ok(self.number),
                _ => fail("/km2, /m2"),
            },
            Dimension::Ratio => match unit {
                Some("dB") => Ok(db_to_linear(self.number)),
                Some("lin") => Ok(self.number),
                _ => fail("dB, lin"),
            },
            Dimension::Plain => match unit {
                None => Ok(self.number),
                Some(u) => Err(perr(
                    self.line,
                    format!("{key}: dimensionless quantity takes no unit, got '{u}'"),
                )),
            },
        }
    }
}

struct Section {
    header_line: usize,
    values: HashMap<String, RawValue>,
}

impl Section {
    fn take(&mut self, key: &str, dim: Dimension) -> Result<f64, ConfigError> {
        match self.values.remove(key) {
            Some(raw) => raw.in_si(dim, key),
            None => Err(perr(self.header_line, format!("missing key '{key}'"))),
        }
    }

    fn finish(self, section: &str) -> Result<(), ConfigError> {
        if let Some((key, raw)) = self.values.into_iter().next() {
            return Err(perr(
                raw.line,
                format!("unknown key '{key}' in [{section}] section"),
            ));
        }
        Ok(())
    }
}

/// Parse the config text format; the result is already validated.
pub fn parse_config(text: &str) -> Result<NetworkConfig, ConfigError> {
    let mut tier_sections: Vec<Section> = Vec::new();
    let mut user_section: Option<Section> = None;
    let mut global = Section { header_line: 0, values: HashMap::new() };
    // Index into which section the current lines belong: None = global.
    let mut current: Option<(bool, usize)> = None; // (is_user, tier index)

    for (idx, raw_line) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = match raw_line.find('#') {
            Some(pos) => &raw_line[..pos],
            None => raw_line,
        }
        .trim();
        if line.is_empty() {
            continue;
        }
        if let Some(name) = line.strip_prefix('[').and_then(|s| s.strip_suffix(']')) {
            match name.trim() {
                "tier" => {
                    tier_sections.push(Section {
                        header_line: line_no,
                        values: HashMap::new(),
                    });
                    current = Some((false, tier_sections.len() - 1));
                }
                "user" => {
                    if user_section.is_some() {
                        return Err(perr(line_no, "duplicate [user] section"));
                    }
                    user_section = Some(Section {
                        header_line: line_no,
                        values: HashMap::new(),
                    });
                    current = Some((true, 0));
                }
                other => return Err(perr(line_no, format!("unknown section '[{other}]'"))),
            }
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| perr(line_no, format!("expected 'key = value', got '{line}'")))?;
        let key = key.trim().to_string();
        let mut parts = value.trim().split_whitespace();
        let number_text = parts
            .next()
            .ok_or_else(|| perr(line_no, format!("{key}: empty value")))?;
        let number: f64 = number_text
            .parse()
            .map_err(|_| perr(line_no, format!("{key}: '{number_text}' is not a number")))?;
        let unit = parts.next().map(str::to_string);
        if let Some(extra) = parts.next() {
            return Err(perr(
                line_no,
                format!("{key}: unexpected trailing token '{extra}'"),
            ));
        }
        let raw = RawValue { number, unit, line: line_no };
        let section = match current {
            None => &mut global,
            Some((true, _)) => user_section.as_mut().expect("user section exists"),
            Some((false, i)) => &mut tier_sections[i],
        };
        if section.values.insert(key.clone(), raw).is_some() {
            return Err(perr(line_no, format!("duplicate key '{key}'")));
        }
    }

    let slot_duration = match global.values.remove("slot_duration") {
        Some(raw) => raw.in_si(Dimension::Plain, "slot_duration")?,
        None => 1.0,
    };
    global.finish("global")?;

    if tier_sections.is_empty() {
        return Err(perr(0, "config needs at least one [tier] section"));
    }
    let mut tiers = Vec::with_capacity(tier_sections.len());
    for mut s in tier_sections {
        let tier = TierParams {
            density: s.take("density", Dimension::Density)?,
            tx_power: s.take("tx_power", Dimension::Power)?,
            sir_threshold: s.take("sir_threshold", Dimension::Ratio)?,
            silence_prob: s.take("silence_prob", Dimension::Plain)?,
            pathloss_alpha: s.take("pathloss_alpha", Dimension::Plain)?,
            fd_distance: s.take("fd_distance", Dimension::Distance)?,
            power_static: s.take("power_static", Dimension::Power)?,
            power_slope: s.take("power_slope", Dimension::Plain)?,
            power_sleep: s.take("power_sleep", Dimension::Power)?,
        };
        s.finish("tier")?;
        tiers.push(tier);
    }
    let mut s = user_section.ok_or_else(|| perr(0, "config needs a [user] section"))?;
    let user = UserParams {
        density: s.take("density", Dimension::Density)?,
        tx_power: s.take("tx_power", Dimension::Power)?,
        pathloss_alpha: s.take("pathloss_alpha", Dimension::Plain)?,
        si_residual: s.take("si_residual", Dimension::Ratio)?,
        p_sic: s.take("p_sic", Dimension::Power)?,
    };
    s.finish("user")?;

    Ok(validate(NetworkConfig { tiers, user, slot_duration })?)
}

pub fn load_config(path: &Path) -> Result<NetworkConfig, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_config(&text)
}

/// Serialize in canonical SI units; `{}` formatting of f64 is shortest
/// round-trip, so parse(serialize(c)) == c field for field.
pub fn serialize_config(config: &NetworkConfig) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "slot_duration = {}", config.slot_duration);
    for t in &config.tiers {
        let _ = writeln!(out);
        let _ = writeln!(out, "[tier]");
        let _ = writeln!(out, "density = {} /m2", t.density);
        let _ = writeln!(out, "tx_power = {} W", t.tx_power);
        let _ = writeln!(out, "sir_threshold = {} lin", t.sir_threshold);
        let _ = writeln!(out, "silence_prob = {}", t.silence_prob);
        let _ = writeln!(out, "pathloss_alpha = {}", t.pathloss_alpha);
        let _ = writeln!(out, "fd_distance = {} m", t.fd_distance);
        let _ = writeln!(out, "power_static = {} W", t.power_static);
        let _ = writeln!(out, "power_slope = {}", t.power_slope);
        let _ = writeln!(out, "power_sleep = {} W", t.power_sleep);
    }
    let u = &config.user;
    let _ = writeln!(out);
    let _ = writeln!(out, "[user]");
    let _ = writeln!(out, "density = {} /m2", u.density);
    let _ = writeln!(out, "tx_power = {} W", u.tx_power);
    let _ = writeln!(out, "pathloss_alpha = {}", u.pathloss_alpha);
    let _ = writeln!(out, "si_residual = {} lin", u.si_residual);
    let _ = writeln!(out, "p_sic = {} W", u.p_sic);
    out
}
