//! Single-pixel detector: masked scene sums in projection order, and the
//! inverse mapping of a trace back onto the low-resolution grid.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{FringeImage, Grid, LowResFringe, LowResKind};
use crate::sampling::{PatternSequence, RandomPatternSet, Window};

/// Detector readings, one per projected pattern.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SignalTrace {
    pub values: Vec<f64>,
    /// Measurements per scene pixel.
    pub rate: f64,
    #[serde(default)]
    pub period: Option<f64>,
    #[serde(default)]
    pub seed: Option<u64>,
}

impl SignalTrace {
    pub fn new(values: Vec<f64>, rate: f64) -> Self {
        Self {
            values,
            rate,
            period: None,
            seed: None,
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Total intensity under `window` anchored at `anchor = (row, col)`.
pub fn measure(scene: &FringeImage, window: &Window, anchor: (usize, usize)) -> Result<f64> {
    let g = scene.grid();
    let (rows, cols) = window.span();
    if anchor.0 + rows > g.height() || anchor.1 + cols > g.width() {
        return Err(Error::Bounds(format!(
            "{rows}x{cols} window at {anchor:?} leaves {}x{} scene",
            g.height(),
            g.width()
        )));
    }
    Ok(window
        .cells()
        .iter()
        .map(|&(dr, dc)| g.get(anchor.0 + dr, anchor.1 + dc))
        .sum())
}

pub fn acquire(scene: &FringeImage, seq: &PatternSequence) -> Result<SignalTrace> {
    if scene.grid().dims() != seq.dims() {
        return Err(Error::Bounds(format!(
            "scene {:?} does not match sequence {:?}",
            scene.grid().dims(),
            seq.dims()
        )));
    }
    let values = seq
        .placements()
        .iter()
        .map(|p| measure(scene, seq.windows().window(p.window), (p.row, p.col)))
        .collect::<Result<Vec<_>>>()?;
    Ok(SignalTrace::new(values, seq.rate()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReorderMode {
    /// Window average rounded half-up.
    Rounded,
    /// Plain window average.
    Raw,
}

/// Places each reading at its low-res pixel, normalized by the window size.
pub fn reorder(trace: &SignalTrace, seq: &PatternSequence, mode: ReorderMode) -> Result<LowResFringe> {
    if trace.len() != seq.len() {
        return Err(Error::Consistency(format!(
            "trace has {} values, sequence {} placements",
            trace.len(),
            seq.len()
        )));
    }
    let n = seq.windows().cells_per_window() as f64;
    let (h, w) = seq.low_res_dims();
    let mut grid = Grid::filled(h, w, 0.0);
    for (p, &v) in seq.placements().iter().zip(&trace.values) {
        let (r, c) = seq.target(p);
        let avg = v / n;
        grid.set(
            r,
            c,
            match mode {
                ReorderMode::Rounded => (avg + 0.5).floor(),
                ReorderMode::Raw => avg,
            },
        );
    }
    let kind = match mode {
        ReorderMode::Rounded => LowResKind::Binary,
        ReorderMode::Raw => LowResKind::Continuous,
    };
    LowResFringe::new(grid, kind)
}

/// Masked sums for each random pattern.
pub fn acquire_random(scene: &FringeImage, patterns: &RandomPatternSet) -> Result<SignalTrace> {
    let g = scene.grid();
    if g.dims() != patterns.dims() {
        return Err(Error::Bounds(format!(
            "scene {:?} does not match patterns {:?}",
            g.dims(),
            patterns.dims()
        )));
    }
    let values = patterns
        .masks()
        .iter()
        .map(|m| {
            m.iter()
                .zip(g.data())
                .filter(|(&on, _)| on == 1)
                .map(|(_, &v)| v)
                .sum()
        })
        .collect();
    let rate = patterns.count() as f64 / g.data().len() as f64;
    Ok(SignalTrace::new(values, rate))
}
