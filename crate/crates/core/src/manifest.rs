//! Dataset manifests: which scene goes to which split, at which sampling rate
//! and fringe period, and where its images live.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{param, Error, Result};
use crate::rng;
use crate::scene::SceneSpec;

/// Window sizes of the three standard rates: 50%, 25% and 6.25%.
pub const STANDARD_WINDOWS: [usize; 3] = [2, 4, 16];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Split {
    Train,
    Test,
}

/// Relative frequency of each standard rate, e.g. `1:1:2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RateMix(pub [u32; 3]);

impl Default for RateMix {
    fn default() -> Self {
        RateMix([1, 1, 2])
    }
}

impl fmt::Display for RateMix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}", self.0[0], self.0[1], self.0[2])
    }
}

impl FromStr for RateMix {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<u32> = s
            .split(':')
            .map(|p| p.trim().parse::<u32>())
            .collect::<Result<_, _>>()
            .map_err(|_| param(format!("rate mix `{s}` is not three integers `a:b:c`")))?;
        let weights: [u32; 3] = parts
            .try_into()
            .map_err(|_| param(format!("rate mix `{s}` needs exactly three weights")))?;
        let mix = RateMix(weights);
        mix.validate()?;
        Ok(mix)
    }
}

impl RateMix {
    pub fn validate(&self) -> Result<()> {
        if self.0.iter().all(|&w| w == 0) {
            return Err(param("rate mix needs a positive weight"));
        }
        Ok(())
    }

    /// Slot sequence of length `count` where slot `i` appears in proportion
    /// to weight `i`, interleaved by smooth weighted round-robin.
    pub fn schedule(&self, count: usize) -> Vec<usize> {
        let total: i64 = self.0.iter().map(|&w| w as i64).sum();
        let mut current = [0i64; 3];
        (0..count)
            .map(|_| {
                for (c, &w) in current.iter_mut().zip(&self.0) {
                    *c += w as i64;
                }
                let pick = (0..3).fold(0, |best, i| if current[i] > current[best] { i } else { best });
                current[pick] -= total;
                pick
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub scene_id: usize,
    pub spec: SceneSpec,
    pub depth_path: String,
    pub fringe_hi_path: String,
    pub fringe_lo_path: String,
    /// Measurements per scene pixel.
    pub rate: f64,
    /// Fringe period in pixels.
    pub period: f64,
    /// Projector to camera angle in degrees.
    pub angle_deg: f64,
    pub split: Split,
}

impl ManifestEntry {
    /// Cells per window for this entry's rate.
    pub fn window_cells(&self) -> usize {
        (1.0 / self.rate).round() as usize
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetManifest {
    pub entries: Vec<ManifestEntry>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ManifestConfig {
    pub split_ratio: f64,
    pub seed: u64,
    pub rate_mix: RateMix,
    pub period_range: (f64, f64),
    pub angle_range: (f64, f64),
}

impl Default for ManifestConfig {
    fn default() -> Self {
        Self {
            split_ratio: 0.85,
            seed: 0,
            rate_mix: RateMix::default(),
            period_range: (6.0, 8.0),
            angle_range: (13.0, 17.0),
        }
    }
}

pub fn build_manifest(specs: &[SceneSpec], split_ratio: f64, seed: u64) -> Result<DatasetManifest> {
    build_manifest_with(
        specs,
        &ManifestConfig {
            split_ratio,
            seed,
            ..ManifestConfig::default()
        },
    )
}

/// Shuffles `specs` by seed, tags the first `floor(n * ratio)` as train and
/// assigns rate, period and angle per entry.
pub fn build_manifest_with(specs: &[SceneSpec], cfg: &ManifestConfig) -> Result<DatasetManifest> {
    if specs.is_empty() {
        return Err(param("manifest needs at least one scene"));
    }
    if !(cfg.split_ratio > 0.0 && cfg.split_ratio < 1.0) {
        return Err(param(format!("split ratio {} not in (0, 1)", cfg.split_ratio)));
    }
    cfg.rate_mix.validate()?;
    let (plo, phi) = cfg.period_range;
    if !(plo >= 2.0 && plo <= phi && phi.is_finite()) {
        return Err(param(format!("period range [{plo}, {phi}] invalid")));
    }
    crate::fringe::sample_angle(cfg.angle_range, 0)?;

    let mut order: Vec<usize> = (0..specs.len()).collect();
    order.shuffle(&mut rng::stream(cfg.seed, u64::MAX));
    let n_train = (specs.len() as f64 * cfg.split_ratio).floor() as usize;
    let slots = cfg.rate_mix.schedule(specs.len());

    let entries = order
        .iter()
        .enumerate()
        .map(|(pos, &id)| {
            let mut geo = rng::stream(cfg.seed, rng::stream_id(id as u64, rng::purpose::GEOMETRY));
            let period = if plo == phi { plo } else { geo.random_range(plo..=phi) };
            let angle_deg =
                crate::fringe::sample_angle(cfg.angle_range, geo.random::<u64>()).expect("validated");
            let name = format!("{id:05}.pgm");
            ManifestEntry {
                scene_id: id,
                spec: specs[id].clone(),
                depth_path: format!("depth/{name}"),
                fringe_hi_path: format!("fringe_hi/{name}"),
                fringe_lo_path: format!("fringe_lo/{name}"),
                rate: 1.0 / STANDARD_WINDOWS[slots[pos]] as f64,
                period,
                angle_deg,
                split: if pos < n_train { Split::Train } else { Split::Test },
            }
        })
        .collect();
    Ok(DatasetManifest { entries })
}

impl DatasetManifest {
    pub fn split(&self, split: Split) -> impl Iterator<Item = &ManifestEntry> {
        self.entries.iter().filter(move |e| e.split == split)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_json()? + "\n")?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Data(format!("cannot read manifest {}: {e}", path.display())))?;
        Self::from_json(&text)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scene::Primitive;
    use std::collections::HashSet;

    fn specs(n: usize) -> Vec<SceneSpec> {
        (0..n).map(|i| SceneSpec::random(i as u64, 64, 64)).collect()
    }

    fn counts(m: &DatasetManifest) -> (usize, usize) {
        (m.split(Split::Train).count(), m.split(Split::Test).count())
    }

    #[test]
    fn floor_split_sizes() {
        assert_eq!(counts(&build_manifest(&specs(624), 0.85, 1).unwrap()), (530, 94));
        assert_eq!(counts(&build_manifest(&specs(1), 0.85, 1).unwrap()), (0, 1));
        let m = build_manifest(&specs(20), 0.5, 1).unwrap();
        assert_eq!(counts(&m), (10, 10));
        let train: HashSet<_> = m.split(Split::Train).map(|e| e.scene_id).collect();
        let test: HashSet<_> = m.split(Split::Test).map(|e| e.scene_id).collect();
        assert!(train.is_disjoint(&test));
        assert_eq!(train.len() + test.len(), 20);
    }

    #[test]
    fn invalid_inputs() {
        assert!(build_manifest(&[], 0.85, 1).is_err());
        assert!(build_manifest(&specs(3), 1.0, 1).is_err());
        assert!(build_manifest(&specs(3), 0.0, 1).is_err());
    }

    #[test]
    fn rate_mix_and_ranges() {
        let m = build_manifest(&specs(12), 0.85, 7).unwrap();
        let n = |rate: f64| m.entries.iter().filter(|e| e.rate == rate).count();
        assert_eq!((n(0.5), n(0.25), n(0.0625)), (3, 3, 6));
        for e in &m.entries {
            assert!((6.0..=8.0).contains(&e.period));
            assert!((13.0..=17.0).contains(&e.angle_deg));
        }
        assert_eq!(m, build_manifest(&specs(12), 0.85, 7).unwrap());
    }

    #[test]
    fn schedule_proportions() {
        assert_eq!(RateMix([1, 1, 2]).schedule(4).len(), 4);
        let s = RateMix([1, 1, 2]).schedule(400);
        assert_eq!(s.iter().filter(|&&k| k == 2).count(), 200);
        assert_eq!(RateMix([0, 0, 1]).schedule(3), vec![2, 2, 2]);
        assert_eq!("1:1:2".parse::<RateMix>().unwrap(), RateMix([1, 1, 2]));
        assert!("1:1".parse::<RateMix>().is_err());
        assert!("0:0:0".parse::<RateMix>().is_err());
        assert_eq!(RateMix([1, 1, 2]).to_string(), "1:1:2");
    }

    #[test]
    fn json_field_names() {
        let m = build_manifest(&[SceneSpec::new(Primitive::Ramp { amplitude: 1.0 })], 0.5, 0).unwrap();
        let v: serde_json::Value = serde_json::from_str(&m.to_json().unwrap()).unwrap();
        let e = &v["entries"][0];
        for key in [
            "scene_id",
            "spec",
            "depth_path",
            "fringe_hi_path",
            "fringe_lo_path",
            "rate",
            "period",
            "split",
        ] {
            assert!(e.get(key).is_some(), "{key}");
        }
        assert_eq!(e["split"], "test");
        assert_eq!(DatasetManifest::from_json(&m.to_json().unwrap()).unwrap(), m);
    }
}
