//! Simulation and learned reconstruction for 3D single-pixel imaging.

pub mod baseline;
pub mod cli;
pub mod detector;
pub mod error;
pub mod formats;
pub mod fringe;
pub mod grid;
pub mod manifest;
pub mod metrics;
pub mod models;
pub mod pipeline;
pub mod rng;
pub mod sampling;
pub mod scene;
pub mod spectrum;

pub use error::{Error, Result};
pub use grid::{DepthMap, FringeImage, FringeKind, Grid, LowResFringe, LowResKind};
