//! Experiment runner: bound formulas, viewpoint sweeps, reports and figures.

mod bounds;
mod config;
mod svg;
mod sweep;
mod verify;

pub use bounds::*;
pub use config::*;
pub use svg::*;
pub use sweep::*;
pub use verify::*;
