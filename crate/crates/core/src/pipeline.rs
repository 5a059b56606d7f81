//! End-to-end synthesis of one dataset sample: depth map, noisy sinusoidal
//! high-resolution fringe, and the binary low-resolution fringe restored
//! from a simulated single-pixel acquisition.

use rand::Rng;

use crate::detector::{acquire, reorder, ReorderMode, SignalTrace};
use crate::error::Result;
use crate::fringe::{self, NoiseSpec, ProjectionGeometry};
use crate::grid::{DepthMap, FringeImage, LowResFringe};
use crate::manifest::ManifestEntry;
use crate::rng;
use crate::sampling::{make_sequence, make_window, Orientation, ScanOrder, WindowKind};
use crate::scene::gen_scene;

/// Lateral shift gain used for datasets: about half a fringe period of
/// shift across the full depth range at the nominal angle.
pub const DATASET_PHASE_GAIN: f64 = 12.0;

#[derive(Debug, Clone, PartialEq)]
pub struct SynthConfig {
    /// Square scene side in pixels.
    pub size: usize,
    pub noise_range: (f64, f64),
    pub phase_gain: f64,
    pub threshold: f64,
    pub order: ScanOrder,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            size: 64,
            noise_range: (0.04, 0.14),
            phase_gain: DATASET_PHASE_GAIN,
            threshold: fringe::DEFAULT_THRESHOLD,
            order: ScanOrder::Raster,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Synthesized {
    pub depth: DepthMap,
    /// Noisy sinusoidal fringe at full resolution.
    pub fringe_hi: FringeImage,
    /// Noise-free binarized fringe at full resolution.
    pub binary_hi: FringeImage,
    pub trace: SignalTrace,
    /// Rounded low-resolution fringe restored from the trace.
    pub fringe_lo: LowResFringe,
}

/// Renders `entry` deterministically from `(seed, entry.scene_id)`.
pub fn synthesize(entry: &ManifestEntry, cfg: &SynthConfig, seed: u64) -> Result<Synthesized> {
    let id = entry.scene_id as u64;
    let noise_seed = |purpose| rng::stream(seed, rng::stream_id(id, purpose)).random::<u64>();
    let depth = gen_scene(&entry.spec, cfg.size, cfg.size)?;
    let geom = ProjectionGeometry::new(entry.angle_deg, entry.period)?.with_gain(cfg.phase_gain)?;
    let sinus = fringe::render_sinusoid(&depth, &geom)?;
    let (lo, hi) = cfg.noise_range;
    let fringe_hi = fringe::add_noise(&sinus, &NoiseSpec::new(lo, hi, noise_seed(rng::purpose::NOISE_HI))?)?;
    let binary_hi = fringe::binarize(&sinus, cfg.threshold)?;
    let observed = fringe::add_noise(&binary_hi, &NoiseSpec::new(lo, hi, noise_seed(rng::purpose::NOISE_LO))?)?;
    let window = make_window(entry.window_cells(), WindowKind::Rect, Orientation::Vertical)?;
    let seq = make_sequence((cfg.size, cfg.size), &window, cfg.order)?;
    let mut trace = acquire(&observed, &seq)?;
    trace.period = Some(entry.period);
    trace.seed = Some(seed);
    let fringe_lo = reorder(&trace, &seq, ReorderMode::Rounded)?;
    Ok(Synthesized {
        depth,
        fringe_hi,
        binary_hi,
        trace,
        fringe_lo,
    })
}
