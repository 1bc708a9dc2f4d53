//! Scenario configs and presets, the run pipeline, stripe detection, the
//! identity suite and plot-data export.

mod check;
mod config;
mod export;
mod json;
mod manifest;
mod presets;
mod run;
mod stripes;
mod verify;

pub use check::*;
pub use config::*;
pub use export::*;
pub use json::to_json_string;
pub use manifest::*;
pub use presets::*;
pub use run::*;
pub use stripes::*;
pub use verify::*;
