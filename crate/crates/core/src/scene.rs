//! Procedural depth scenes.
//!
//! Scenes are analytic heightfields over a zero background: Gaussian bumps,
//! hemispheres, tilted ramps and polygonal pyramids, plus composites of
//! these. A composite is the clamped pointwise maximum of its members, which
//! is what a camera sees of overlapping opaque objects.
//!
//! Coordinates are in pixels, `center = [x, y]` with `x` along columns. The
//! pose angle rotates the primitive about the image center.

use std::f64::consts::PI;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{param, Result};
use crate::grid::{DepthMap, Grid, MIN_DEPTH_SIDE};
use crate::rng;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Primitive {
    GaussianBump {
        center: [f64; 2],
        sigma: f64,
        amplitude: f64,
    },
    Hemisphere {
        center: [f64; 2],
        radius: f64,
        amplitude: f64,
    },
    /// Linear slope through the image center, rising along the pose direction.
    Ramp { amplitude: f64 },
    /// Pyramid with `facets` planar faces over a regular polygonal base.
    PolyhedralHeightfield {
        center: [f64; 2],
        radius: f64,
        amplitude: f64,
        facets: u32,
    },
    Composite { members: Vec<Primitive> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneSpec {
    pub primitive: Primitive,
    pub pose_deg: f64,
    pub seed: u64,
}

fn check_amplitude(a: f64) -> Result<()> {
    if a > 0.0 && a <= 1.0 {
        Ok(())
    } else {
        Err(param(format!("amplitude {a} outside (0, 1]")))
    }
}

fn check_positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(param(format!("{name} must be positive and finite, got {v}")))
    }
}

fn check_center(c: [f64; 2]) -> Result<()> {
    if c.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(param("center must be finite"))
    }
}

impl Primitive {
    pub fn validate(&self) -> Result<()> {
        match self {
            Primitive::GaussianBump {
                center,
                sigma,
                amplitude,
            } => {
                check_center(*center)?;
                check_positive("sigma", *sigma)?;
                check_amplitude(*amplitude)
            }
            Primitive::Hemisphere {
                center,
                radius,
                amplitude,
            } => {
                check_center(*center)?;
                check_positive("radius", *radius)?;
                check_amplitude(*amplitude)
            }
            Primitive::Ramp { amplitude } => check_amplitude(*amplitude),
            Primitive::PolyhedralHeightfield {
                center,
                radius,
                amplitude,
                facets,
            } => {
                check_center(*center)?;
                check_positive("radius", *radius)?;
                check_amplitude(*amplitude)?;
                if *facets < 3 {
                    return Err(param(format!("pyramid needs at least 3 facets, got {facets}")));
                }
                Ok(())
            }
            Primitive::Composite { members } => {
                if members.is_empty() {
                    return Err(param("composite needs at least one member"));
                }
                members.iter().try_for_each(Primitive::validate)
            }
        }
    }

    fn centers_mut(&mut self, f: &mut impl FnMut(&mut [f64; 2])) {
        match self {
            Primitive::GaussianBump { center, .. }
            | Primitive::Hemisphere { center, .. }
            | Primitive::PolyhedralHeightfield { center, .. } => f(center),
            Primitive::Ramp { .. } => {}
            Primitive::Composite { members } => {
                for m in members {
                    m.centers_mut(f);
                }
            }
        }
    }

    /// Height at pixel `(x, y)` for a scene whose pose has rotation `(cos, sin)`
    /// about `pivot`, before clamping.
    fn eval(&self, x: f64, y: f64, frame: &Frame) -> f64 {
        match self {
            Primitive::GaussianBump {
                center,
                sigma,
                amplitude,
            } => {
                let (cx, cy) = frame.place(*center);
                let d2 = (x - cx).powi(2) + (y - cy).powi(2);
                amplitude * (-d2 / (2.0 * sigma * sigma)).exp()
            }
            Primitive::Hemisphere {
                center,
                radius,
                amplitude,
            } => {
                let (cx, cy) = frame.place(*center);
                let d2 = (x - cx).powi(2) + (y - cy).powi(2);
                amplitude * (radius * radius - d2).max(0.0).sqrt() / radius
            }
            Primitive::Ramp { amplitude } => {
                let (dx, dy) = (x - frame.pivot.0, y - frame.pivot.1);
                let along = dx * frame.cos + dy * frame.sin;
                let extent = (frame.span.0 * frame.cos).abs() + (frame.span.1 * frame.sin).abs();
                amplitude * (along / extent + 0.5)
            }
            Primitive::PolyhedralHeightfield {
                center,
                radius,
                amplitude,
                facets,
            } => {
                let (cx, cy) = frame.place(*center);
                let (dx, dy) = (x - cx, y - cy);
                let base = frame.sin.atan2(frame.cos);
                let reach = (0..*facets)
                    .map(|k| {
                        let phi = base + 2.0 * PI * k as f64 / *facets as f64;
                        dx * phi.cos() + dy * phi.sin()
                    })
                    .fold(f64::NEG_INFINITY, f64::max);
                amplitude * (1.0 - reach / radius).max(0.0)
            }
            Primitive::Composite { members } => members
                .iter()
                .map(|m| m.eval(x, y, frame))
                .fold(0.0, f64::max),
        }
    }
}

struct Frame {
    pivot: (f64, f64),
    span: (f64, f64),
    cos: f64,
    sin: f64,
}

impl Frame {
    fn new(height: usize, width: usize, pose_deg: f64) -> Self {
        let t = pose_deg.to_radians();
        let (span_x, span_y) = ((width - 1) as f64, (height - 1) as f64);
        Self {
            pivot: (span_x / 2.0, span_y / 2.0),
            span: (span_x, span_y),
            cos: t.cos(),
            sin: t.sin(),
        }
    }

    /// Rotates a primitive center about the image center.
    fn place(&self, c: [f64; 2]) -> (f64, f64) {
        if self.sin == 0.0 && self.cos == 1.0 {
            return (c[0], c[1]);
        }
        let (dx, dy) = (c[0] - self.pivot.0, c[1] - self.pivot.1);
        (
            self.pivot.0 + dx * self.cos - dy * self.sin,
            self.pivot.1 + dx * self.sin + dy * self.cos,
        )
    }
}

impl SceneSpec {
    pub fn new(primitive: Primitive) -> Self {
        Self {
            primitive,
            pose_deg: 0.0,
            seed: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !self.pose_deg.is_finite() {
            return Err(param("pose angle must be finite"));
        }
        self.primitive.validate()
    }

    /// Draws a random scene sized for `height x width`.
    pub fn random(seed: u64, height: usize, width: usize) -> Self {
        let mut rng = rng::stream(seed, rng::purpose::SCENE);
        let primitive = match rng.random_range(0..5u32) {
            4 => {
                let count = rng.random_range(2..=3);
                Primitive::Composite {
                    members: (0..count)
                        .map(|_| random_simple(&mut rng, height, width, true))
                        .collect(),
                }
            }
            _ => random_simple(&mut rng, height, width, false),
        };
        Self {
            primitive,
            pose_deg: rng.random_range(0.0..360.0),
            seed,
        }
    }
}

fn random_simple(rng: &mut impl Rng, height: usize, width: usize, member: bool) -> Primitive {
    let side = height.min(width) as f64;
    let center = [
        rng.random_range(0.3..0.7) * (width - 1) as f64,
        rng.random_range(0.3..0.7) * (height - 1) as f64,
    ];
    let amplitude = rng.random_range(0.5..=1.0);
    let scale = if member { 0.7 } else { 1.0 };
    let kinds = if member { 3 } else { 4 };
    match rng.random_range(0..kinds) {
        0 => Primitive::GaussianBump {
            center,
            sigma: scale * rng.random_range(0.08..0.2) * side,
            amplitude,
        },
        1 => Primitive::Hemisphere {
            center,
            radius: scale * rng.random_range(0.15..0.35) * side,
            amplitude,
        },
        2 => Primitive::PolyhedralHeightfield {
            center,
            radius: scale * rng.random_range(0.2..0.4) * side,
            amplitude,
            facets: rng.random_range(3..=6),
        },
        _ => Primitive::Ramp { amplitude },
    }
}

/// Renders `spec` into a `height x width` depth map.
pub fn gen_scene(spec: &SceneSpec, height: usize, width: usize) -> Result<DepthMap> {
    spec.validate()?;
    if height < MIN_DEPTH_SIDE || width < MIN_DEPTH_SIDE {
        return Err(param(format!(
            "scene {height}x{width} below minimum {MIN_DEPTH_SIDE}x{MIN_DEPTH_SIDE}"
        )));
    }
    let frame = Frame::new(height, width, spec.pose_deg);
    let grid = Grid::from_fn(height, width, |r, c| {
        spec.primitive.eval(c as f64, r as f64, &frame).clamp(0.0, 1.0)
    });
    DepthMap::new(grid)
}

/// `count` pose variants: angles stepped uniformly over `[0, 360)` from the
/// base pose, with every variant after the first getting its primitive
/// centers jittered by up to `POSE_JITTER_PX` pixels.
pub fn augment_pose(spec: &SceneSpec, count: usize, seed: u64) -> Result<Vec<SceneSpec>> {
    if count == 0 {
        return Err(param("pose count must be at least 1"));
    }
    spec.validate()?;
    let step = 360.0 / count as f64;
    Ok((0..count)
        .map(|i| {
            let mut v = spec.clone();
            v.pose_deg = (spec.pose_deg + step * i as f64).rem_euclid(360.0);
            if i > 0 {
                let mut rng = rng::stream(seed, rng::stream_id(i as u64, rng::purpose::JITTER));
                v.primitive.centers_mut(&mut |c| {
                    c[0] += rng.random_range(-POSE_JITTER_PX..=POSE_JITTER_PX);
                    c[1] += rng.random_range(-POSE_JITTER_PX..=POSE_JITTER_PX);
                });
            }
            v
        })
        .collect())
}

pub const POSE_JITTER_PX: f64 = 2.0;
