//! Image-like containers: a plain row-major [`Grid`] and the validated
//! [`DepthMap`], [`FringeImage`] and [`LowResFringe`] built on it.

use serde::{Deserialize, Serialize};

use crate::error::{param, Error, Result};

/// Row-major `height x width` array of `f64`.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    height: usize,
    width: usize,
    data: Vec<f64>,
}

impl Grid {
    pub fn new(height: usize, width: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != height * width {
            return Err(Error::Shape(format!(
                "{height}x{width} grid needs {} values, got {}",
                height * width,
                data.len()
            )));
        }
        Ok(Self {
            height,
            width,
            data,
        })
    }

    pub fn filled(height: usize, width: usize, value: f64) -> Self {
        Self {
            height,
            width,
            data: vec![value; height * width],
        }
    }

    pub fn from_fn(height: usize, width: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(height * width);
        for r in 0..height {
            for c in 0..width {
                data.push(f(r, c));
            }
        }
        Self {
            height,
            width,
            data,
        }
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.height, self.width)
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.data[row * self.width + col]
    }

    #[inline]
    pub fn set(&mut self, row: usize, col: usize, value: f64) {
        self.data[row * self.width + col] = value;
    }

    pub fn row(&self, row: usize) -> &[f64] {
        &self.data[row * self.width..(row + 1) * self.width]
    }

    pub fn map(&self, mut f: impl FnMut(f64) -> f64) -> Self {
        Self {
            height: self.height,
            width: self.width,
            data: self.data.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn sum(&self) -> f64 {
        self.data.iter().sum()
    }

    fn in_unit_range(&self) -> bool {
        self.data.iter().all(|v| v.is_finite() && (0.0..=1.0).contains(v))
    }

    fn is_binary(&self) -> bool {
        self.data.iter().all(|&v| v == 0.0 || v == 1.0)
    }

    /// Nearest-neighbour upsampling by integer per-axis factors.
    pub fn upsample_nearest(&self, fy: usize, fx: usize) -> Grid {
        Grid::from_fn(self.height * fy, self.width * fx, |r, c| self.get(r / fy, c / fx))
    }
}

/// Smallest side accepted for depth maps.
pub const MIN_DEPTH_SIDE: usize = 8;

/// Normalized depth in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct DepthMap(Grid);

impl DepthMap {
    pub fn new(grid: Grid) -> Result<Self> {
        if grid.height < MIN_DEPTH_SIDE || grid.width < MIN_DEPTH_SIDE {
            return Err(param(format!(
                "depth map {}x{} below minimum {MIN_DEPTH_SIDE}x{MIN_DEPTH_SIDE}",
                grid.height, grid.width
            )));
        }
        if !grid.in_unit_range() {
            return Err(param("depth values must be finite and in [0, 1]"));
        }
        Ok(Self(grid))
    }

    /// Clamps into `[0, 1]` (non-finite values become 0) before validating dims.
    pub fn clamped(grid: Grid) -> Result<Self> {
        Self::new(grid.map(|v| if v.is_finite() { v.clamp(0.0, 1.0) } else { 0.0 }))
    }

    pub fn grid(&self) -> &Grid {
        &self.0
    }

    pub fn into_grid(self) -> Grid {
        self.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FringeKind {
    Sinusoidal,
    Binary,
    /// Arbitrary intensities in `[0, 1]`, e.g. a binary image after additive noise.
    Continuous,
}

/// Intensity image in `[0, 1]`; binary images hold only `0` and `1`.
#[derive(Debug, Clone, PartialEq)]
pub struct FringeImage {
    grid: Grid,
    kind: FringeKind,
}

impl FringeImage {
    pub fn new(grid: Grid, kind: FringeKind) -> Result<Self> {
        if !grid.in_unit_range() {
            return Err(param("fringe intensities must be finite and in [0, 1]"));
        }
        if kind == FringeKind::Binary && !grid.is_binary() {
            return Err(param("binary fringe image holds a value other than 0 or 1"));
        }
        Ok(Self { grid, kind })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn kind(&self) -> FringeKind {
        self.kind
    }

    pub fn into_grid(self) -> Grid {
        self.grid
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LowResKind {
    /// Rounded window averages, values in `{0, 1}` for `[0, 1]` scenes.
    Binary,
    /// Raw window averages.
    Continuous,
}

/// Low-resolution image restored from a detector trace.
#[derive(Debug, Clone, PartialEq)]
pub struct LowResFringe {
    grid: Grid,
    kind: LowResKind,
}

impl LowResFringe {
    pub fn new(grid: Grid, kind: LowResKind) -> Result<Self> {
        if kind == LowResKind::Binary && !grid.is_binary() {
            return Err(param("binary low-res fringe holds a value other than 0 or 1"));
        }
        Ok(Self { grid, kind })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn kind(&self) -> LowResKind {
        self.kind
    }

    pub fn into_grid(self) -> Grid {
        self.grid
    }
}
