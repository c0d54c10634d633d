//! Emits self-contained matplotlib scripts rendering a sweep CSV as the
//! corresponding figure analogue. Diverged points ("div" cells) break the
//! line instead of being interpolated across.

use std::path::Path;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum PlotError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("{path}: missing required column '{column}'")]
    MissingColumn { path: String, column: String },
    #[error("{path}: no data rows")]
    Empty { path: String },
}

/// Layout of the emitted figure.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlotKind {
    /// Two panels: D_FD / D_HD vs the parameter, and η vs the parameter.
    DelayAndEe,
    /// Single panel with both duplex delays.
    DelayOnly,
    /// Single panel, FD delay only (the β study).
    FdDelay,
    /// Single panel, per-tier combined delays.
    PerTier,
}

impl PlotKind {
    fn required_columns(self) -> &'static [&'static str] {
        match self {
            PlotKind::DelayAndEe => &["series", "engine", "d_fd", "d_hd", "ee"],
            PlotKind::DelayOnly => &["series", "engine", "d_fd", "d_hd"],
            PlotKind::FdDelay => &["series", "engine", "d_fd"],
            PlotKind::PerTier => &["series", "engine", "d_tier1", "d_tier2"],
        }
    }
}

/// Validate the CSV shape and write a python script next to it.
pub fn emit_plot_script(
    csv_path: &Path,
    script_path: &Path,
    kind: PlotKind,
) -> Result<(), PlotError> {
    let display = csv_path.display().to_string();
    let mut reader = csv::Reader::from_path(csv_path).map_err(PlotError::from)?;
    let header: Vec<String> = reader
        .headers()?
        .iter()
        .map(str::to_string)
        .collect();
    for required in kind.required_columns() {
        if !header.iter().any(|h| h == required) {
            return Err(PlotError::MissingColumn {
                path: display,
                column: (*required).to_string(),
            });
        }
    }
    if !reader.records().any(|r| r.is_ok()) {
        return Err(PlotError::Empty { path: display });
    }
    // The parameter column sits between "series" and "engine".
    let param = header[1].clone();

    let (panels, columns) = match kind {
        PlotKind::DelayAndEe => (
            2,
            vec![("d_fd", "FD"), ("d_hd", "HD"), ("ee", "EE")],
        ),
        PlotKind::DelayOnly => (1, vec![("d_fd", "FD"), ("d_hd", "HD")]),
        PlotKind::FdDelay => (1, vec![("d_fd", "FD")]),
        PlotKind::PerTier => (1, vec![("d_tier1", "tier 1"), ("d_tier2", "tier 2")]),
    };
    let column_list = columns
        .iter()
        .map(|(c, l)| format!("(\"{c}\", \"{l}\")"))
        .collect::<Vec<_>>()
        .join(", ");

    let script = format!(
        r#"#!/usr/bin/env python3
"""Render {csv} ({param} sweep)."""
import csv
import math
from collections import defaultdict

import matplotlib.pyplot as plt

CSV = {csv:?}
PARAM = {param:?}
PANELS = {panels}
COLUMNS = [{column_list}]

rows = list(csv.DictReader(open(CSV, newline="")))
series = sorted({{(r["series"], r["engine"]) for r in rows}})

def trace(label, engine, column):
    xs, ys = [], []
    for r in rows:
        if (r["series"], r["engine"]) != (label, engine):
            continue
        v = r[column]
        x = float(r[PARAM])
        # "div" breaks the line so plots never interpolate across divergence
        if v in ("div", ""):
            ys.append(math.nan)
        else:
            ys.append(float(v))
        xs.append(x)
    return xs, ys

fig, axes = plt.subplots(1, PANELS, figsize=(6 * PANELS, 4.5))
axes = [axes] if PANELS == 1 else list(axes)
delay_axis, ee_axis = axes[0], axes[-1]
for column, suffix in COLUMNS:
    ax = ee_axis if column == "ee" else delay_axis
    for label, engine in series:
        xs, ys = trace(label, engine, column)
        if not xs:
            continue
        style = "-" if engine == "analytical" else "--"
        ax.plot(xs, ys, style, marker=".", label=f"{{suffix}} {{label}} ({{engine}})")
delay_axis.set_xlabel(PARAM)
delay_axis.set_ylabel("local delay (slots)")
delay_axis.set_yscale("log")
delay_axis.legend(fontsize=7)
if PANELS == 2:
    ee_axis.set_xlabel(PARAM)
    ee_axis.set_ylabel("energy efficiency (nats/Joule/Hz)")
    ee_axis.legend(fontsize=7)
fig.tight_layout()
out = CSV.rsplit(".", 1)[0] + ".png"
fig.savefig(out, dpi=150)
print(f"wrote {{out}}")
"#,
        csv = display,
        param = param,
        panels = panels,
        column_list = column_list,
    );
    std::fs::write(script_path, script).map_err(|source| PlotError::Io {
        path: script_path.display().to_string(),
        source,
    })
}
