//! Configuration, figure presets and the scenario runner behind the `grating` binary.

pub mod config;
pub mod presets;
pub mod run;

pub use config::{ConfigError, Distance, Output, Scenario};
pub use run::{run, RunReport};
