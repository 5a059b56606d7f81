//! Active sampling patterns: windows, their placements over the scene and
//! the order in which they are projected, plus the random-mask baseline.
//!
//! A pattern sequence partitions the scene: each pixel falls under exactly
//! one (placement, window cell) pair, so a sequence of `H W / N` windows of
//! `N` cells yields a sampling rate of `1 / N`.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{param, Error, Result};
use crate::rng;

pub type Cell = (usize, usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WindowShape {
    Rect,
    SplitPairA,
    SplitPairB,
}

/// Direction of the long edge. Fringes are vertical, so `Vertical` keeps the
/// horizontal extent small.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Orientation {
    #[default]
    Vertical,
    Horizontal,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WindowKind {
    Rect,
    SplitPair,
}

/// A set of cell offsets from an anchor, kept sorted row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Window {
    cells: Vec<Cell>,
    shape: WindowShape,
}

impl Window {
    pub fn new(mut cells: Vec<Cell>, shape: WindowShape) -> Result<Self> {
        if cells.is_empty() {
            return Err(param("window needs at least one cell"));
        }
        cells.sort_unstable();
        if cells.windows(2).any(|p| p[0] == p[1]) {
            return Err(param("window cells must be distinct"));
        }
        Ok(Self { cells, shape })
    }

    pub fn cells(&self) -> &[Cell] {
        &self.cells
    }

    pub fn shape(&self) -> WindowShape {
        self.shape
    }

    /// Cell count `N`.
    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    /// Horizontal extent `M` in pixels.
    pub fn extent(&self) -> usize {
        let min = self.cells.iter().map(|c| c.1).min().unwrap_or(0);
        let max = self.cells.iter().map(|c| c.1).max().unwrap_or(0);
        1 + max - min
    }

    /// Bounding box `(rows, cols)` measured from the anchor.
    pub fn span(&self) -> (usize, usize) {
        let rows = self.cells.iter().map(|c| c.0).max().unwrap_or(0) + 1;
        let cols = self.cells.iter().map(|c| c.1).max().unwrap_or(0) + 1;
        (rows, cols)
    }
}

/// A single window, or two complementary windows sharing one super-cell.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum WindowSet {
    Single(Window),
    Pair {
        a: Window,
        b: Window,
        orientation: Orientation,
    },
}

impl WindowSet {
    pub fn windows(&self) -> Vec<&Window> {
        match self {
            WindowSet::Single(w) => vec![w],
            WindowSet::Pair { a, b, .. } => vec![a, b],
        }
    }

    pub fn window(&self, index: usize) -> &Window {
        match (self, index) {
            (WindowSet::Single(w), _) => w,
            (WindowSet::Pair { a, .. }, 0) => a,
            (WindowSet::Pair { b, .. }, _) => b,
        }
    }

    /// Cells per measurement `N`.
    pub fn cells_per_window(&self) -> usize {
        self.window(0).len()
    }

    /// Largest horizontal extent among the windows.
    pub fn extent(&self) -> usize {
        self.windows().iter().map(|w| w.extent()).max().unwrap_or(1)
    }

    /// Size of the block that the sequence tiles the scene with.
    pub fn tile(&self) -> (usize, usize) {
        match self {
            WindowSet::Single(w) => w.span(),
            WindowSet::Pair { a, b, .. } => {
                let (ra, ca) = a.span();
                let (rb, cb) = b.span();
                (ra.max(rb), ca.max(cb))
            }
        }
    }

    pub fn rate(&self) -> f64 {
        1.0 / self.cells_per_window() as f64
    }
}

/// Most-square `h x w = n` with `h >= w`.
fn rect_dims(n: usize) -> (usize, usize) {
    let mut w = (n as f64).sqrt() as usize;
    while w > 1 && !n.is_multiple_of(w) {
        w -= 1;
    }
    (n / w.max(1), w.max(1))
}

/// Builds an `N`-cell window (or complementary pair).
pub fn make_window(n: usize, kind: WindowKind, orientation: Orientation) -> Result<WindowSet> {
    if n == 0 {
        return Err(param("window needs N >= 1"));
    }
    match kind {
        WindowKind::Rect => {
            let (long, short) = rect_dims(n);
            let (h, w) = match orientation {
                Orientation::Vertical => (long, short),
                Orientation::Horizontal => (short, long),
            };
            let cells = (0..h).flat_map(|r| (0..w).map(move |c| (r, c))).collect();
            Ok(WindowSet::Single(Window::new(cells, WindowShape::Rect)?))
        }
        WindowKind::SplitPair => make_split_pair(n, n.div_ceil(2), orientation),
    }
}

/// Complementary windows over a `2 x N` super-cell: `a` is the top row's
/// first `k` columns plus the bottom row's remaining columns, `b` the rest.
/// `Vertical` orientation transposes the super-cell to `N x 2`.
pub fn make_split_pair(n: usize, k: usize, orientation: Orientation) -> Result<WindowSet> {
    if n == 0 || k > n {
        return Err(param(format!("split pair needs N >= 1 and k <= N, got N {n} k {k}")));
    }
    let mut a = Vec::with_capacity(n);
    let mut b = Vec::with_capacity(n);
    for col in 0..n {
        let (top, bottom) = if col < k { (&mut a, &mut b) } else { (&mut b, &mut a) };
        top.push((0, col));
        bottom.push((1, col));
    }
    let place = |cells: Vec<Cell>| -> Vec<Cell> {
        match orientation {
            Orientation::Horizontal => cells,
            Orientation::Vertical => cells.into_iter().map(|(r, c)| (c, r)).collect(),
        }
    };
    Ok(WindowSet::Pair {
        a: Window::new(place(a), WindowShape::SplitPairA)?,
        b: Window::new(place(b), WindowShape::SplitPairB)?,
        orientation,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScanOrder {
    Raster,
    Swirl,
}

impl std::fmt::Display for ScanOrder {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            ScanOrder::Raster => "raster",
            ScanOrder::Swirl => "swirl",
        })
    }
}

impl std::str::FromStr for ScanOrder {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "raster" => Ok(ScanOrder::Raster),
            "swirl" => Ok(ScanOrder::Swirl),
            _ => Err(param(format!("unknown scan order `{s}`"))),
        }
    }
}

/// One projected window: anchor of its tile and which window of the set.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Placement {
    pub row: usize,
    pub col: usize,
    pub window: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PatternSequence {
    dims: (usize, usize),
    windows: WindowSet,
    order: ScanOrder,
    placements: Vec<Placement>,
}

/// Anchor grid positions in outward rectangular spiral order from
/// `(rows / 2, cols / 2)`: steps right, down, left, up with run lengths
/// 1, 1, 2, 2, 3, 3, ... skipping positions off the grid.
pub fn swirl_order(rows: usize, cols: usize) -> Vec<(usize, usize)> {
    let total = rows * cols;
    let mut out = Vec::with_capacity(total);
    if total == 0 {
        return out;
    }
    let (mut r, mut c) = ((rows / 2) as i64, (cols / 2) as i64);
    out.push((r as usize, c as usize));
    const DIRS: [(i64, i64); 4] = [(0, 1), (1, 0), (0, -1), (-1, 0)];
    let mut run = 1;
    let mut dir = 0;
    while out.len() < total {
        for _ in 0..2 {
            let (dr, dc) = DIRS[dir % 4];
            for _ in 0..run {
                r += dr;
                c += dc;
                if r >= 0 && c >= 0 && (r as usize) < rows && (c as usize) < cols {
                    out.push((r as usize, c as usize));
                }
            }
            dir += 1;
        }
        run += 1;
    }
    out
}

pub fn make_sequence(
    dims: (usize, usize),
    windows: &WindowSet,
    order: ScanOrder,
) -> Result<PatternSequence> {
    let (h, w) = dims;
    let (th, tw) = windows.tile();
    if h == 0 || w == 0 || h % th != 0 || w % tw != 0 {
        return Err(Error::Tiling(format!(
            "{th}x{tw} tile does not divide {h}x{w} scene"
        )));
    }
    let (rows, cols) = (h / th, w / tw);
    let anchors: Vec<(usize, usize)> = match order {
        ScanOrder::Raster => (0..rows)
            .flat_map(|r| (0..cols).map(move |c| (r, c)))
            .collect(),
        ScanOrder::Swirl => swirl_order(rows, cols),
    };
    let per_tile = windows.windows().len();
    let placements = anchors
        .into_iter()
        .flat_map(|(r, c)| {
            (0..per_tile).map(move |window| Placement {
                row: r * th,
                col: c * tw,
                window,
            })
        })
        .collect();
    let seq = PatternSequence {
        dims,
        windows: windows.clone(),
        order,
        placements,
    };
    seq.check_partition()?;
    Ok(seq)
}

impl PatternSequence {
    pub fn dims(&self) -> (usize, usize) {
        self.dims
    }

    pub fn windows(&self) -> &WindowSet {
        &self.windows
    }

    pub fn order(&self) -> ScanOrder {
        self.order
    }

    pub fn placements(&self) -> &[Placement] {
        &self.placements
    }

    pub fn len(&self) -> usize {
        self.placements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.placements.is_empty()
    }

    pub fn rate(&self) -> f64 {
        self.windows.rate()
    }

    /// Dimensions of the image restored from the trace.
    pub fn low_res_dims(&self) -> (usize, usize) {
        let (h, w) = self.dims;
        let (th, tw) = self.windows.tile();
        match &self.windows {
            WindowSet::Single(_) => (h / th, w / tw),
            WindowSet::Pair { orientation, .. } => match orientation {
                Orientation::Horizontal => (h / th, 2 * w / tw),
                Orientation::Vertical => (2 * h / th, w / tw),
            },
        }
    }

    /// Low-res pixel that placement `p` restores to.
    pub fn target(&self, p: &Placement) -> (usize, usize) {
        let (th, tw) = self.windows.tile();
        let (r, c) = (p.row / th, p.col / tw);
        match &self.windows {
            WindowSet::Single(_) => (r, c),
            WindowSet::Pair { orientation, .. } => match orientation {
                Orientation::Horizontal => (r, 2 * c + p.window),
                Orientation::Vertical => (2 * r + p.window, c),
            },
        }
    }

    /// Absolute pixel coordinates illuminated by placement `p`.
    pub fn pixels<'a>(&'a self, p: &'a Placement) -> impl Iterator<Item = Cell> + 'a {
        self.windows
            .window(p.window)
            .cells()
            .iter()
            .map(move |&(dr, dc)| (p.row + dr, p.col + dc))
    }

    /// Coverage count per scene pixel.
    pub fn coverage(&self) -> Vec<u32> {
        let (h, w) = self.dims;
        let mut hits = vec![0u32; h * w];
        for p in &self.placements {
            for (r, c) in self.pixels(p) {
                if r < h && c < w {
                    hits[r * w + c] += 1;
                }
            }
        }
        hits
    }

    fn check_partition(&self) -> Result<()> {
        let (h, w) = self.dims;
        let expected = h * w / self.windows.cells_per_window();
        if self.placements.len() != expected || self.coverage().iter().any(|&n| n != 1) {
            return Err(Error::Tiling(
                "windows do not cover every pixel exactly once".into(),
            ));
        }
        Ok(())
    }
}

/// On-disk form of a [`PatternSequence`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SequenceFile {
    pub dims: [usize; 2],
    pub window: WindowFile,
    pub order: ScanOrder,
    /// `[row, col, window]` per measurement, in projection order.
    pub placements: Vec<[usize; 3]>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WindowFile {
    pub kind: WindowKind,
    pub orientation: Orientation,
    pub cells: Vec<[usize; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pair: Option<Vec<[usize; 2]>>,
}

fn cells_out(w: &Window) -> Vec<[usize; 2]> {
    w.cells().iter().map(|&(r, c)| [r, c]).collect()
}

fn cells_in(cells: &[[usize; 2]]) -> Vec<Cell> {
    cells.iter().map(|&[r, c]| (r, c)).collect()
}

impl From<&PatternSequence> for SequenceFile {
    fn from(seq: &PatternSequence) -> Self {
        let window = match &seq.windows {
            WindowSet::Single(w) => WindowFile {
                kind: WindowKind::Rect,
                orientation: if w.span().0 >= w.span().1 {
                    Orientation::Vertical
                } else {
                    Orientation::Horizontal
                },
                cells: cells_out(w),
                pair: None,
            },
            WindowSet::Pair { a, b, orientation } => WindowFile {
                kind: WindowKind::SplitPair,
                orientation: *orientation,
                cells: cells_out(a),
                pair: Some(cells_out(b)),
            },
        };
        SequenceFile {
            dims: [seq.dims.0, seq.dims.1],
            window,
            order: seq.order,
            placements: seq
                .placements
                .iter()
                .map(|p| [p.row, p.col, p.window])
                .collect(),
        }
    }
}

impl TryFrom<SequenceFile> for PatternSequence {
    type Error = Error;

    fn try_from(f: SequenceFile) -> Result<Self> {
        let windows = match (&f.window.kind, &f.window.pair) {
            (WindowKind::Rect, None) => {
                WindowSet::Single(Window::new(cells_in(&f.window.cells), WindowShape::Rect)?)
            }
            (WindowKind::SplitPair, Some(pair)) => WindowSet::Pair {
                a: Window::new(cells_in(&f.window.cells), WindowShape::SplitPairA)?,
                b: Window::new(cells_in(pair), WindowShape::SplitPairB)?,
                orientation: f.window.orientation,
            },
            _ => return Err(Error::Format("window kind and pair cells disagree".into())),
        };
        let per_tile = windows.windows().len();
        let placements = f
            .placements
            .iter()
            .map(|&[row, col, window]| {
                if window >= per_tile {
                    Err(Error::Format(format!("placement names window {window}")))
                } else {
                    Ok(Placement { row, col, window })
                }
            })
            .collect::<Result<Vec<_>>>()?;
        let seq = PatternSequence {
            dims: (f.dims[0], f.dims[1]),
            windows,
            order: f.order,
            placements,
        };
        seq.check_partition()?;
        Ok(seq)
    }
}

impl PatternSequence {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(&SequenceFile::from(self))?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str::<SequenceFile>(s)?.try_into()
    }
}

/// Binary masks for the random-pattern baseline.
#[derive(Debug, Clone, PartialEq)]
pub struct RandomPatternSet {
    dims: (usize, usize),
    density: f64,
    seed: u64,
    masks: Vec<Vec<u8>>,
}

pub const DEFAULT_DENSITY: f64 = 0.5;

/// Mask count matching the measurement budget of an `N`-cell active scheme.
pub fn matched_count(dims: (usize, usize), n: usize) -> usize {
    dims.0 * dims.1 / n.max(1)
}

pub fn make_random_patterns(
    dims: (usize, usize),
    count: usize,
    density: f64,
    seed: u64,
) -> Result<RandomPatternSet> {
    if count == 0 {
        return Err(param("random pattern count must be positive"));
    }
    if !(density > 0.0 && density < 1.0) {
        return Err(param(format!("density {density} not in (0, 1)")));
    }
    let mut rng = rng::stream(seed, 0);
    let masks = (0..count)
        .map(|_| {
            (0..dims.0 * dims.1)
                .map(|_| rng.random_bool(density) as u8)
                .collect()
        })
        .collect();
    Ok(RandomPatternSet {
        dims,
        density,
        seed,
        masks,
    })
}

impl RandomPatternSet {
    /// Builds a set from explicit row-major `{0, 1}` masks.
    pub fn from_masks(dims: (usize, usize), masks: Vec<Vec<u8>>) -> Result<Self> {
        if masks.is_empty() {
            return Err(param("random pattern count must be positive"));
        }
        if masks
            .iter()
            .any(|m| m.len() != dims.0 * dims.1 || m.iter().any(|&v| v > 1))
        {
            return Err(param("masks must be binary and match the scene dims"));
        }
        let ones: usize = masks.iter().flatten().map(|&v| v as usize).sum();
        let density = ones as f64 / (masks.len() * dims.0 * dims.1) as f64;
        Ok(Self {
            dims,
            density,
            seed: 0,
            masks,
        })
    }

    pub fn dims(&self) -> (usize, usize) {
        self.dims
    }

    pub fn count(&self) -> usize {
        self.masks.len()
    }

    pub fn density(&self) -> f64 {
        self.density
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn masks(&self) -> &[Vec<u8>] {
        &self.masks
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    /// `M <= T / 2`: fringes sampled without distortion.
    Strict,
    /// `T / 2 < M <= T`: sampled with some distortion.
    Relaxed,
    /// `M > T`: under-sampled, the carrier aliases.
    Aliased,
}

/// Classifies a window of horizontal extent `m` against fringe period `period`.
pub fn check_nyquist(m: usize, period: f64) -> Result<Regime> {
    if m == 0 || !(period >= 2.0 && period.is_finite()) {
        return Err(param(format!("need M >= 1 and T >= 2, got M {m} T {period}")));
    }
    let m = m as f64;
    Ok(if 2.0 * m <= period {
        Regime::Strict
    } else if m <= period {
        Regime::Relaxed
    } else {
        Regime::Aliased
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    fn rect(n: usize) -> WindowSet {
        make_window(n, WindowKind::Rect, Orientation::Vertical).unwrap()
    }

    #[test]
    fn rect_shapes_and_rates() {
        for (n, span) in [(1, (1, 1)), (2, (2, 1)), (4, (2, 2)), (16, (4, 4)), (8, (4, 2))] {
            let w = rect(n);
            assert_eq!(w.tile(), span, "N {n}");
            assert_eq!(w.cells_per_window(), n);
        }
        assert_eq!(rect(1).extent(), 1);
        assert_eq!(rect(2).rate(), 0.5);
        assert_eq!(rect(4).rate(), 0.25);
        assert_eq!(rect(16).rate(), 0.0625);
        let h = make_window(2, WindowKind::Rect, Orientation::Horizontal).unwrap();
        assert_eq!(h.tile(), (1, 2));
        assert!(make_window(0, WindowKind::Rect, Orientation::Vertical).is_err());
    }

    #[test]
    fn split_pair_two_cells() {
        let WindowSet::Pair { a, b, .. } =
            make_window(2, WindowKind::SplitPair, Orientation::Horizontal).unwrap()
        else {
            panic!("expected pair");
        };
        assert_eq!(a.cells(), &[(0, 0), (1, 1)]);
        assert_eq!(b.cells(), &[(0, 1), (1, 0)]);
    }

    #[test]
    fn split_pair_complementary() {
        for n in 1..=16 {
            for k in 0..=n {
                for o in [Orientation::Horizontal, Orientation::Vertical] {
                    let set = make_split_pair(n, k, o).unwrap();
                    let (a, b) = (set.window(0), set.window(1));
                    assert_eq!(a.len(), n);
                    assert_eq!(b.len(), n);
                    let sa: HashSet<_> = a.cells().iter().collect();
                    let sb: HashSet<_> = b.cells().iter().collect();
                    assert!(sa.is_disjoint(&sb));
                    assert_eq!(sa.len() + sb.len(), 2 * n);
                }
            }
        }
        let set = make_window(4, WindowKind::SplitPair, Orientation::Horizontal).unwrap();
        assert_eq!(set.extent(), 4);
    }

    #[test]
    fn raster_identity_traversal() {
        let seq = make_sequence((4, 4), &rect(1), ScanOrder::Raster).unwrap();
        let got: Vec<_> = seq.placements().iter().map(|p| (p.row, p.col)).collect();
        let want: Vec<_> = (0..4).flat_map(|r| (0..4).map(move |c| (r, c))).collect();
        assert_eq!(got, want);
    }

    #[test]
    fn swirl_is_permutation_starting_at_center() {
        for (rows, cols) in [(4, 4), (1, 1), (3, 5), (32, 32), (16, 4), (1, 7)] {
            let s = swirl_order(rows, cols);
            assert_eq!(s[0], (rows / 2, cols / 2));
            let set: HashSet<_> = s.iter().copied().collect();
            assert_eq!(set.len(), rows * cols);
            assert_eq!(s.len(), rows * cols);
        }
        let seq = make_sequence((4, 4), &rect(1), ScanOrder::Swirl).unwrap();
        assert_eq!((seq.placements()[0].row, seq.placements()[0].col), (2, 2));
        assert_eq!(
            &swirl_order(4, 4)[..5],
            &[(2, 2), (2, 3), (3, 3), (3, 2), (3, 1)]
        );
    }

    #[test]
    fn standard_sequence_at_64() {
        let seq = make_sequence((64, 64), &rect(4), ScanOrder::Raster).unwrap();
        assert_eq!(seq.len(), 1024);
        assert_eq!(seq.rate(), 0.25);
        assert_eq!(seq.low_res_dims(), (32, 32));
        let pair = make_window(16, WindowKind::SplitPair, Orientation::Horizontal).unwrap();
        let seq = make_sequence((64, 64), &pair, ScanOrder::Swirl).unwrap();
        assert_eq!(seq.len(), 256);
        assert_eq!(seq.low_res_dims(), (32, 8));
    }

    #[test]
    fn non_tiling_rejected() {
        let err = make_sequence((64, 64), &rect(3), ScanOrder::Raster).unwrap_err();
        assert_eq!(err.kind(), "tiling");
        let pair = make_window(3, WindowKind::SplitPair, Orientation::Horizontal).unwrap();
        assert!(make_sequence((64, 64), &pair, ScanOrder::Raster).is_err());
    }

    #[test]
    fn targets_fill_low_res_grid() {
        for set in [
            rect(2),
            make_window(4, WindowKind::SplitPair, Orientation::Horizontal).unwrap(),
            make_window(4, WindowKind::SplitPair, Orientation::Vertical).unwrap(),
        ] {
            let seq = make_sequence((16, 16), &set, ScanOrder::Swirl).unwrap();
            let (lh, lw) = seq.low_res_dims();
            let t: HashSet<_> = seq.placements().iter().map(|p| seq.target(p)).collect();
            assert_eq!(t.len(), lh * lw);
            assert!(t.iter().all(|&(r, c)| r < lh && c < lw));
        }
    }

    #[test]
    fn json_round_trip() {
        let pair = make_window(4, WindowKind::SplitPair, Orientation::Horizontal).unwrap();
        for set in [rect(4), pair] {
            let seq = make_sequence((8, 8), &set, ScanOrder::Swirl).unwrap();
            let text = seq.to_json().unwrap();
            assert_eq!(PatternSequence::from_json(&text).unwrap(), seq);
        }
        let v: serde_json::Value =
            serde_json::from_str(&make_sequence((4, 4), &rect(1), ScanOrder::Raster).unwrap().to_json().unwrap())
                .unwrap();
        for key in ["dims", "order", "placements"] {
            assert!(v.get(key).is_some());
        }
        assert!(v["window"].get("cells").is_some());
    }

    #[test]
    fn random_patterns_density() {
        let set = make_random_patterns((64, 64), 1024, 0.5, 4).unwrap();
        assert_eq!(set.count(), matched_count((64, 64), 4));
        // binomial(4096, 0.5): sd 32
        for m in set.masks() {
            let ones: usize = m.iter().map(|&v| v as usize).sum();
            assert!((ones as f64 - 2048.0).abs() <= 4.0 * 32.0);
        }
        assert_eq!(set, make_random_patterns((64, 64), 1024, 0.5, 4).unwrap());
        assert!(make_random_patterns((64, 64), 0, 0.5, 4).is_err());
        assert!(make_random_patterns((64, 64), 1, 1.0, 4).is_err());
    }

    #[test]
    fn nyquist_regimes() {
        let r = |m| check_nyquist(m, 6.0).unwrap();
        assert_eq!(r(3), Regime::Strict);
        for m in [4, 5, 6] {
            assert_eq!(r(m), Regime::Relaxed);
        }
        assert_eq!(r(7), Regime::Aliased);
        for t in [2.0, 3.0, 8.0, 100.0] {
            assert_eq!(check_nyquist(1, t).unwrap(), Regime::Strict);
        }
        assert_eq!(check_nyquist(3, 7.0).unwrap(), Regime::Strict);
        assert_eq!(check_nyquist(4, 7.0).unwrap(), Regime::Relaxed);
        assert!(check_nyquist(0, 6.0).is_err());
        assert!(check_nyquist(1, 1.0).is_err());
    }
}
