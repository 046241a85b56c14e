//! Configuration, presets, output formats and command dispatch.

mod commands;
mod config;
pub mod output;
pub mod presets;

pub use commands::{consecutive_pairs, orbits_from_seeds, run, unit_circle_seeds, Command, Outcome};
pub use config::{parse_config, serialize, ConfigError, MapSpec, RunConfig, Style, ViewportSpec};
pub use output::{encode_p6, format_rays, write_image, write_rays, Palette, Rgb};
