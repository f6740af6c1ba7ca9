//! Parameter sweeps, optimal-point reports and temperature scans on top of
//! `upb-core`, with CSV, JSON and SVG output.

pub mod config;
pub mod emit;
pub mod optimal;
pub mod sweep;
pub mod tempscan;

pub use config::{Config, ConfigError};
pub use sweep::{run_sweep, Route, RouteSettings, SweepResult, SweepSpec, SweptVariable};

/// Process exit status for a configuration or usage problem.
pub const EXIT_CONFIG: u8 = 2;
/// Process exit status when every requested point failed numerically.
pub const EXIT_NUMERICAL: u8 = 3;
