//! Linear reconstruction from random-pattern traces, and the active versus
//! random comparison at a matched measurement budget.
//!
//! With fewer masks than pixels the system is underdetermined; the estimate
//! is the ridge-regularized minimum-norm solution
//! `x = A^T (A A^T + lambda s I)^-1 y`, where `s` is the mean diagonal of
//! `A A^T` so that `lambda` is scale free.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};
use serde::{Deserialize, Serialize};

use crate::detector::{acquire, acquire_random, reorder, ReorderMode, SignalTrace};
use crate::error::{Error, Result};
use crate::grid::{FringeImage, Grid};
use crate::sampling::{
    make_random_patterns, make_sequence, make_window, matched_count, Orientation, RandomPatternSet, ScanOrder,
    WindowKind, DEFAULT_DENSITY,
};

/// Relative regularization strengths searched by [`best_ridge`].
pub const LAMBDA_GRID: [f64; 6] = [1e-6, 1e-4, 1e-3, 1e-2, 1e-1, 1.0];

pub struct RidgeSolver {
    dims: (usize, usize),
    /// Masks as rows, `count x pixels`.
    masks: DMatrix<f64>,
    gram: Cholesky<f64, Dyn>,
    lambda: f64,
}

fn mask_matrix(patterns: &RandomPatternSet) -> DMatrix<f64> {
    let (h, w) = patterns.dims();
    let m = patterns.masks();
    DMatrix::from_fn(m.len(), h * w, |i, j| m[i][j] as f64)
}

impl RidgeSolver {
    pub fn new(patterns: &RandomPatternSet, lambda: f64) -> Result<Self> {
        Self::with_masks(patterns.dims(), mask_matrix(patterns), lambda)
    }

    fn with_masks(dims: (usize, usize), masks: DMatrix<f64>, lambda: f64) -> Result<Self> {
        let gram = &masks * masks.transpose();
        Self::factor(dims, masks, gram, lambda)
    }

    fn factor(dims: (usize, usize), masks: DMatrix<f64>, mut gram: DMatrix<f64>, lambda: f64) -> Result<Self> {
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(Error::Parameter(format!("ridge strength {lambda} must be positive")));
        }
        let n = gram.nrows();
        let scale = (0..n).map(|i| gram[(i, i)]).sum::<f64>() / n as f64;
        for i in 0..n {
            gram[(i, i)] += lambda * scale.max(1.0);
        }
        let gram = Cholesky::new(gram)
            .ok_or_else(|| Error::Consistency("regularized Gram matrix not positive definite".into()))?;
        Ok(Self { dims, masks, gram, lambda })
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn reconstruct(&self, trace: &SignalTrace) -> Result<Grid> {
        if trace.len() != self.masks.nrows() {
            return Err(Error::Consistency(format!(
                "trace has {} values for {} masks",
                trace.len(),
                self.masks.nrows()
            )));
        }
        let y = DVector::from_column_slice(&trace.values);
        let x = self.masks.tr_mul(&self.gram.solve(&y));
        Grid::new(self.dims.0, self.dims.1, x.iter().copied().collect())
    }
}

/// Mean SSIM of clamped ridge reconstructions against `truths`, for the
/// strength in [`LAMBDA_GRID`] that maximizes it. Returns `(lambda, ssim)`.
pub fn best_ridge(patterns: &RandomPatternSet, traces: &[SignalTrace], truths: &[Grid]) -> Result<(f64, f64)> {
    if traces.len() != truths.len() || traces.is_empty() {
        return Err(Error::Consistency("need one truth per trace".into()));
    }
    let masks = mask_matrix(patterns);
    let gram = &masks * masks.transpose();
    let mut best = (f64::NAN, f64::NEG_INFINITY);
    for lambda in LAMBDA_GRID {
        let solver = RidgeSolver::factor(patterns.dims(), masks.clone(), gram.clone(), lambda)?;
        let mut total = 0.0;
        for (t, truth) in traces.iter().zip(truths) {
            let x = solver.reconstruct(t)?.map(|v| v.clamp(0.0, 1.0));
            total += spi_tensor::global_ssim(x.data(), truth.data());
        }
        let mean = total / traces.len() as f64;
        if mean > best.1 {
            best = (lambda, mean);
        }
    }
    Ok(best)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PatternComparison {
    pub window_cells: usize,
    pub rate: f64,
    pub measurements: usize,
    pub scenes: usize,
    /// Mean SSIM of the nearest-upsampled active low-res fringe.
    pub active_ssim: f64,
    /// Mean SSIM of the best ridge reconstruction from random masks.
    pub random_ssim: f64,
    pub best_lambda: f64,
    pub per_scene_active: Vec<f64>,
}

/// Measures every binary scene with an `n`-cell active window and with an
/// equal number of random masks, and scores both against the scene.
pub fn compare_patterns(scenes: &[FringeImage], n: usize, seed: u64) -> Result<PatternComparison> {
    let first = scenes.first().ok_or_else(|| Error::Data("no scenes to compare".into()))?;
    let dims = first.grid().dims();
    let window = make_window(n, WindowKind::Rect, Orientation::Vertical)?;
    let seq = make_sequence(dims, &window, ScanOrder::Raster)?;
    let patterns = make_random_patterns(dims, matched_count(dims, n), DEFAULT_DENSITY, seed)?;
    let (fy, fx) = window.tile();

    let mut per_scene_active = Vec::with_capacity(scenes.len());
    let mut traces = Vec::with_capacity(scenes.len());
    for s in scenes {
        let low = reorder(&acquire(s, &seq)?, &seq, ReorderMode::Rounded)?;
        let up = low.grid().upsample_nearest(fy, fx);
        per_scene_active.push(spi_tensor::global_ssim(up.data(), s.grid().data()));
        traces.push(acquire_random(s, &patterns)?);
    }
    let truths: Vec<_> = scenes.iter().map(|s| s.grid().clone()).collect();
    let (best_lambda, random_ssim) = best_ridge(&patterns, &traces, &truths)?;
    Ok(PatternComparison {
        window_cells: n,
        rate: seq.rate(),
        measurements: seq.len(),
        scenes: scenes.len(),
        active_ssim: per_scene_active.iter().sum::<f64>() / scenes.len() as f64,
        random_ssim,
        best_lambda,
        per_scene_active,
    })
}
