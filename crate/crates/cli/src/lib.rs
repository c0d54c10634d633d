//! Command-line front end for the hetnet library: config parsing, figure
//! presets, parameter sweeps with CSV output, plot-script emission, and
//! the cross-validation harness.

pub mod config;
pub mod crossval;
pub mod plot;
pub mod presets;
pub mod sweep;
