//! Analytic fringe-projection forward model.
//!
//! Vertical sinusoidal fringes of period `T` are shifted laterally by the
//! depth: `I(x, y) = 0.5 + 0.5 cos(2 pi x / T + 2 pi g d(x, y) tan(A) / T)`.

use std::f64::consts::PI;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{param, Result};
use crate::grid::{DepthMap, FringeImage, FringeKind, Grid};
use crate::rng;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProjectionGeometry {
    /// Projector to camera angle in degrees, in `(0, 90)`.
    pub angle_deg: f64,
    /// Fringe period on the reference plane in pixels, at least 2.
    pub period: f64,
    /// Lateral shift in pixels per unit depth per unit `tan(angle)`.
    pub phase_gain: f64,
}

impl ProjectionGeometry {
    pub const DEFAULT_PHASE_GAIN: f64 = 1.0;

    pub fn new(angle_deg: f64, period: f64) -> Result<Self> {
        let g = Self {
            angle_deg,
            period,
            phase_gain: Self::DEFAULT_PHASE_GAIN,
        };
        g.validate()?;
        Ok(g)
    }

    pub fn with_gain(mut self, phase_gain: f64) -> Result<Self> {
        self.phase_gain = phase_gain;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.angle_deg > 0.0 && self.angle_deg < 90.0) {
            return Err(param(format!("angle {} not in (0, 90) degrees", self.angle_deg)));
        }
        if !(self.period >= 2.0 && self.period.is_finite()) {
            return Err(param(format!("fringe period {} below 2 px", self.period)));
        }
        if !(self.phase_gain > 0.0 && self.phase_gain.is_finite()) {
            return Err(param(format!("phase gain {} must be positive", self.phase_gain)));
        }
        Ok(())
    }

    /// Lateral carrier shift in pixels produced by depth `d`.
    pub fn shift(&self, depth: f64) -> f64 {
        self.phase_gain * depth * self.angle_deg.to_radians().tan()
    }
}

pub fn render_sinusoid(depth: &DepthMap, geom: &ProjectionGeometry) -> Result<FringeImage> {
    geom.validate()?;
    let d = depth.grid();
    let k = 2.0 * PI / geom.period;
    let grid = Grid::from_fn(d.height(), d.width(), |r, c| {
        let v = 0.5 + 0.5 * (k * (c as f64 + geom.shift(d.get(r, c)))).cos();
        v.clamp(0.0, 1.0)
    });
    FringeImage::new(grid, FringeKind::Sinusoidal)
}

pub const DEFAULT_THRESHOLD: f64 = 0.5;

/// Thresholds to `{0, 1}`; values equal to the threshold become 1.
pub fn binarize(fringe: &FringeImage, threshold: f64) -> Result<FringeImage> {
    if !(threshold > 0.0 && threshold < 1.0) {
        return Err(param(format!("threshold {threshold} not in (0, 1)")));
    }
    if fringe.kind() == FringeKind::Binary {
        return Ok(fringe.clone());
    }
    let grid = fringe.grid().map(|v| if v >= threshold { 1.0 } else { 0.0 });
    FringeImage::new(grid, FringeKind::Binary)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseSpec {
    pub low: f64,
    pub high: f64,
    pub seed: u64,
}

impl NoiseSpec {
    pub fn new(low: f64, high: f64, seed: u64) -> Result<Self> {
        let n = Self { low, high, seed };
        n.validate()?;
        Ok(n)
    }

    pub fn none() -> Self {
        Self {
            low: 0.0,
            high: 0.0,
            seed: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0 <= self.low && self.low <= self.high && self.high < 1.0) {
            return Err(param(format!(
                "noise range [{}, {}] must satisfy 0 <= low <= high < 1",
                self.low, self.high
            )));
        }
        Ok(())
    }
}

/// Adds uniform noise in `[-a, a]` per pixel, with `a` drawn once from the
/// spec's range, and clamps to `[0, 1]`. Noisy binary images become
/// [`FringeKind::Continuous`].
pub fn add_noise(image: &FringeImage, noise: &NoiseSpec) -> Result<FringeImage> {
    noise.validate()?;
    if noise.high == 0.0 {
        return Ok(image.clone());
    }
    let mut rng = rng::stream(noise.seed, 0);
    let a = if noise.low == noise.high {
        noise.low
    } else {
        rng.random_range(noise.low..=noise.high)
    };
    let grid = image
        .grid()
        .map(|v| (v + rng.random_range(-a..=a)).clamp(0.0, 1.0));
    let kind = match image.kind() {
        FringeKind::Binary => FringeKind::Continuous,
        k => k,
    };
    FringeImage::new(grid, kind)
}

/// Uniform draw from `[low, high]` degrees.
pub fn sample_angle(range: (f64, f64), seed: u64) -> Result<f64> {
    let (low, high) = range;
    if !(0.0 < low && low <= high && high < 90.0) {
        return Err(param(format!(
            "angle range [{low}, {high}] must satisfy 0 < low <= high < 90"
        )));
    }
    if low == high {
        return Ok(low);
    }
    Ok(rng::stream(seed, 0).random_range(low..=high))
}
