//! File formats and the sweep front end for `lasernet-core`.

pub mod cli;
pub mod config;
pub mod output;

pub use config::{load_scene, scene_to_toml, ConfigError, LoadedScene};
pub use output::{emit_outputs, OutputError, RunInfo};
