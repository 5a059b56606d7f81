//! Network inputs and targets, and seed-deterministic batch schedules that
//! honour the sampling-rate mix.

use std::path::Path;

use rand::seq::SliceRandom;
use spi_tensor::{Scalar, Tensor};

use crate::error::{Error, Result};
use crate::formats::{load_depth, PgmImage};
use crate::grid::{Grid, LowResFringe};
use crate::manifest::{DatasetManifest, ManifestEntry, RateMix, Split, STANDARD_WINDOWS};
use crate::pipeline::Synthesized;
use crate::rng;

/// Nearest-neighbour resize of a low-res fringe to `canonical x canonical`,
/// as a `[1, 1, canonical, canonical]` tensor.
pub fn prepare_input<S: Scalar>(lowres: &LowResFringe, canonical: usize) -> Result<Tensor<S>> {
    let up = upsample_to(lowres.grid(), canonical)?;
    Ok(grid_tensor(&up))
}

/// Per-axis integer nearest-neighbour upsampling to a square side.
pub fn upsample_to(grid: &Grid, canonical: usize) -> Result<Grid> {
    let (h, w) = grid.dims();
    if h == 0 || w == 0 || !canonical.is_multiple_of(h) || !canonical.is_multiple_of(w) {
        return Err(Error::Resize(format!("{h}x{w} does not divide {canonical}x{canonical}")));
    }
    Ok(grid.upsample_nearest(canonical / h, canonical / w))
}

/// `[1, 1, h, w]` tensor of a grid.
pub fn grid_tensor<S: Scalar>(grid: &Grid) -> Tensor<S> {
    let (h, w) = grid.dims();
    Tensor::new([1, 1, h, w], grid.data().iter().map(|&v| S::of(v)).collect())
        .expect("grid length matches dims")
}

/// Grid of one sample of a `[batch, 1, h, w]` tensor.
pub fn tensor_grid<S: Scalar>(t: &Tensor<S>, index: usize) -> Result<Grid> {
    let (_, _, h, w) = t.dims4("tensor_grid")?;
    Grid::new(h, w, t.sample(index).iter().map(|v| v.as_f64()).collect())
}

/// One training example at canonical resolution, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Example {
    pub input: Vec<f32>,
    pub depth: Vec<f32>,
    pub fringe: Vec<f32>,
    /// Index into the standard rates.
    pub rate_slot: usize,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Dataset {
    pub canonical: usize,
    pub examples: Vec<Example>,
}

fn rate_slot(entry: &ManifestEntry) -> Result<usize> {
    let n = entry.window_cells();
    STANDARD_WINDOWS
        .iter()
        .position(|&w| w == n)
        .ok_or_else(|| Error::Data(format!("entry {} has non-standard rate {}", entry.scene_id, entry.rate)))
}

fn to_f32(g: &Grid) -> Vec<f32> {
    g.data().iter().map(|&v| v as f32).collect()
}

impl Dataset {
    pub fn new(canonical: usize) -> Self {
        Self {
            canonical,
            examples: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.examples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.examples.is_empty()
    }

    pub fn push_synthesized(&mut self, entry: &ManifestEntry, s: &Synthesized) -> Result<()> {
        let input = upsample_to(s.fringe_lo.grid(), self.canonical)?;
        self.push_grids(rate_slot(entry)?, &input, s.depth.grid(), s.fringe_hi.grid())
    }

    fn push_grids(&mut self, slot: usize, input: &Grid, depth: &Grid, fringe: &Grid) -> Result<()> {
        let side = (self.canonical, self.canonical);
        if input.dims() != side || depth.dims() != side || fringe.dims() != side {
            return Err(Error::Data(format!(
                "example does not match canonical size {}",
                self.canonical
            )));
        }
        self.examples.push(Example {
            input: to_f32(input),
            depth: to_f32(depth),
            fringe: to_f32(fringe),
            rate_slot: slot,
        });
        Ok(())
    }

    /// Loads the `split` entries of a generated dataset rooted at `root`.
    pub fn load(manifest: &DatasetManifest, root: &Path, split: Split, canonical: usize) -> Result<Self> {
        let mut set = Self::new(canonical);
        for e in manifest.split(split) {
            let depth = load_depth(root.join(&e.depth_path))?;
            let hi = PgmImage::load(root.join(&e.fringe_hi_path))?.to_grid();
            let lo = PgmImage::load(root.join(&e.fringe_lo_path))?.to_grid();
            let input = upsample_to(&lo, canonical)?;
            set.push_grids(rate_slot(e)?, &input, depth.grid(), &hi)?;
        }
        Ok(set)
    }

    /// `[batch, 1, side, side]` tensor of one field for the given examples.
    pub fn batch(&self, indices: &[usize], field: impl Fn(&Example) -> &[f32]) -> Tensor<f32> {
        let c = self.canonical;
        let mut data = Vec::with_capacity(indices.len() * c * c);
        for &i in indices {
            data.extend_from_slice(field(&self.examples[i]));
        }
        Tensor::new([indices.len(), 1, c, c], data).expect("examples have canonical size")
    }
}

/// Batches of one epoch: each batch position draws its rate slot from the
/// mix schedule, then the next example of that rate from a per-epoch
/// shuffled pool. Slots without examples are dropped from the mix.
pub fn epoch_batches(
    data: &Dataset,
    mix: RateMix,
    batch_size: usize,
    epoch: usize,
    seed: u64,
) -> Result<Vec<Vec<usize>>> {
    if data.is_empty() {
        return Err(Error::Data("no training examples".into()));
    }
    let mut rng = rng::stream(seed, u64::MAX - 1 - epoch as u64);
    let mut pools: [Vec<usize>; 3] = Default::default();
    for (i, e) in data.examples.iter().enumerate() {
        pools[e.rate_slot].push(i);
    }
    for p in &mut pools {
        p.shuffle(&mut rng);
    }
    let mut weights = mix.0;
    for (w, p) in weights.iter_mut().zip(&pools) {
        if p.is_empty() {
            *w = 0;
        }
    }
    if weights.iter().all(|&w| w == 0) {
        weights = pools.each_ref().map(|p| (!p.is_empty()) as u32);
    }
    let steps = data.len().div_ceil(batch_size);
    let slots = RateMix(weights).schedule(steps * batch_size);
    let mut cursor = [0usize; 3];
    let picks: Vec<usize> = slots
        .into_iter()
        .map(|s| {
            let i = pools[s][cursor[s] % pools[s].len()];
            cursor[s] += 1;
            i
        })
        .collect();
    Ok(picks.chunks(batch_size).map(<[usize]>::to_vec).collect())
}
