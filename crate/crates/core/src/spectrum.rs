//! Row spectra of fringe images and the window-extent aliasing demonstration.
//!
//! DFT bins count cycles across the full image width, so a bin of a
//! low-resolution row compares directly with a bin of the full-resolution row.

use rustfft::{num_complex::Complex, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::detector::{acquire, reorder, ReorderMode};
use crate::error::{param, Result};
use crate::fringe::{binarize, render_sinusoid, ProjectionGeometry, DEFAULT_THRESHOLD};
use crate::grid::{DepthMap, FringeImage, Grid, LowResFringe};
use crate::sampling::{check_nyquist, make_sequence, Regime, ScanOrder, Window, WindowSet, WindowShape};

/// Magnitudes of bins `0..=len/2` of the DFT of `row`.
pub fn magnitudes(row: &[f64]) -> Vec<f64> {
    let mut buf: Vec<Complex<f64>> = row.iter().map(|&v| Complex::new(v, 0.0)).collect();
    FftPlanner::new().plan_fft_forward(buf.len()).process(&mut buf);
    buf.truncate(row.len() / 2 + 1);
    buf.iter().map(|c| c.norm()).collect()
}

/// Strongest nonzero bin of the row-summed magnitude spectrum; ties resolve
/// to the lowest bin. `None` for images narrower than two pixels.
pub fn dominant_bin(grid: &Grid) -> Option<usize> {
    let mut total = vec![0.0; grid.width() / 2 + 1];
    for r in 0..grid.height() {
        for (t, m) in total.iter_mut().zip(magnitudes(grid.row(r))) {
            *t += m;
        }
    }
    (1..total.len()).fold(None, |best: Option<usize>, k| match best {
        Some(b) if total[b] + 1e-9 >= total[k] => Some(b),
        _ => Some(k),
    })
}

/// Binarized fringe of a flat scene.
pub fn carrier(height: usize, width: usize, period: f64) -> Result<FringeImage> {
    let flat = DepthMap::new(Grid::filled(height, width, 0.0))?;
    let geom = ProjectionGeometry::new(15.0, period)?;
    binarize(&render_sinusoid(&flat, &geom)?, DEFAULT_THRESHOLD)
}

/// One-row window `extent` pixels wide.
pub fn row_window(extent: usize) -> Result<WindowSet> {
    Ok(WindowSet::Single(Window::new(
        (0..extent).map(|c| (0, c)).collect(),
        WindowShape::Rect,
    )?))
}

/// Width divisible by every extent and by an integral period, at least 64.
pub fn demo_width(extents: &[usize], period: f64) -> Result<usize> {
    if extents.contains(&0) {
        return Err(param("window extents must be positive"));
    }
    let mut l = extents.iter().fold(1usize, |a, &m| lcm(a, m));
    if period.fract() == 0.0 && period >= 1.0 {
        l = lcm(l, period as usize);
    }
    if l > 1 << 16 {
        return Err(param(format!("extents {extents:?} need an image {l} pixels wide")));
    }
    Ok(l * 64usize.div_ceil(l))
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

fn lcm(a: usize, b: usize) -> usize {
    a / gcd(a, b) * b
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AliasCase {
    pub extent: usize,
    pub regime: Regime,
    pub carrier_bin: usize,
    pub sampled_bin: usize,
    pub shift: usize,
    #[serde(skip)]
    pub low_res: Option<LowResFringe>,
}

/// Samples `scene` with a one-row window of `extent` pixels, restores the
/// rounded low-res fringe and compares dominant bins.
pub fn alias_case(scene: &FringeImage, period: f64, extent: usize) -> Result<AliasCase> {
    let regime = check_nyquist(extent, period)?;
    let seq = make_sequence(scene.grid().dims(), &row_window(extent)?, ScanOrder::Raster)?;
    let low = reorder(&acquire(scene, &seq)?, &seq, ReorderMode::Rounded)?;
    let carrier_bin = dominant_bin(scene.grid()).ok_or_else(|| param("scene too narrow"))?;
    // a constant low-res row has no nonzero bin: report the DC bin
    let sampled_bin = dominant_bin(low.grid()).unwrap_or(0);
    Ok(AliasCase {
        extent,
        regime,
        carrier_bin,
        sampled_bin,
        shift: carrier_bin.abs_diff(sampled_bin),
        low_res: Some(low),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AliasReport {
    pub period: f64,
    pub width: usize,
    pub height: usize,
    pub cases: Vec<AliasCase>,
}

/// Runs [`alias_case`] for each extent on a carrier wide enough for all.
pub fn nyquist_demo(period: f64, extents: &[usize]) -> Result<(FringeImage, AliasReport)> {
    if extents.is_empty() {
        return Err(param("need at least one window extent"));
    }
    let width = demo_width(extents, period)?;
    let height = 8;
    let scene = carrier(height, width, period)?;
    let cases = extents
        .iter()
        .map(|&m| alias_case(&scene, period, m))
        .collect::<Result<_>>()?;
    Ok((
        scene,
        AliasReport {
            period,
            width,
            height,
            cases,
        },
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pure_tone_bin() {
        let g = Grid::from_fn(2, 60, |_, c| (2.0 * std::f64::consts::PI * 7.0 * c as f64 / 60.0).sin());
        assert_eq!(dominant_bin(&g), Some(7));
        assert_eq!(dominant_bin(&Grid::filled(1, 1, 1.0)), None);
    }

    #[test]
    fn carrier_bin_is_width_over_period() {
        for t in [6.0, 8.0, 4.0] {
            let c = carrier(8, 96, t).unwrap();
            assert_eq!(dominant_bin(c.grid()), Some((96.0 / t) as usize));
        }
    }

    #[test]
    fn unit_window_keeps_the_carrier() {
        let (_, r) = nyquist_demo(6.0, &[1]).unwrap();
        assert_eq!(r.cases[0].regime, Regime::Strict);
        assert_eq!(r.cases[0].shift, 0);
    }

    #[test]
    fn demo_regimes_and_aliasing() {
        let (_, r) = nyquist_demo(6.0, &[3, 5, 7]).unwrap();
        assert_eq!(r.width, 210);
        let regimes: Vec<_> = r.cases.iter().map(|c| c.regime).collect();
        assert_eq!(regimes, [Regime::Strict, Regime::Relaxed, Regime::Aliased]);
        assert_eq!(r.cases[0].shift, 0);
        assert!(r.cases[2].shift > 1);
    }

    #[test]
    fn width_covers_all_extents() {
        assert_eq!(demo_width(&[2, 4], 8.0).unwrap(), 64);
        assert_eq!(demo_width(&[3], 6.5).unwrap(), 66);
        assert!(demo_width(&[0], 6.0).is_err());
    }
}
