//! Command-line front end.
//!
//! Every subcommand resolves its settings from built-in defaults, then an
//! optional `key = value` file (`--config`), then flags; flags win. The
//! resolved settings are written to `config.txt` in the output directory.
//! Failures print one JSON line `{"error": kind, "message": text}` on stderr
//! and exit nonzero.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::baseline::compare_patterns;
use crate::detector::{acquire, reorder, ReorderMode};
use crate::error::{param, Error, Result};
use crate::formats::{self, KeyValues, PgmImage};
use crate::fringe::{binarize, render_sinusoid, sample_angle, ProjectionGeometry, DEFAULT_THRESHOLD};
use crate::grid::{DepthMap, FringeKind, LowResFringe, LowResKind};
use crate::manifest::{build_manifest_with, DatasetManifest, ManifestConfig, RateMix, Split, STANDARD_WINDOWS};
use crate::metrics::{compare_reports, evaluate, EvalReport, SampleReport};
use crate::models::config::TRAIN_KEYS;
use crate::models::infer::load_unet;
use crate::models::train::{train_end_to_end, train_two_stage};
use crate::models::{Approach, Dataset, DiscriminatorConfig, Reconstructor, TrainConfig, TrainOptions, UNetConfig};
use crate::pipeline::{synthesize, SynthConfig, DATASET_PHASE_GAIN};
use crate::rng;
use crate::sampling::{make_sequence, make_window, Orientation, ScanOrder, WindowKind};
use crate::scene::{augment_pose, gen_scene, SceneSpec};
use crate::spectrum::nyquist_demo;

#[derive(Debug, Parser)]
#[command(name = "spi3d", version, about = "Single-pixel 3D imaging simulation and reconstruction")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a procedural dataset: depth maps, fringes, traces and a manifest.
    GenData(GenDataArgs),
    /// Acquire a PGM scene with an active window and restore the low-res fringe.
    Sample(SampleArgs),
    /// Train the end-to-end or two-stage networks on a generated dataset.
    Train(TrainArgs),
    /// Evaluate a checkpoint on one split of a dataset.
    Eval(EvalArgs),
    /// Reconstruct depth from one low-res fringe image.
    Infer(InferArgs),
    /// Sample an ideal carrier with windows of several widths and report aliasing.
    NyquistDemo(NyquistArgs),
    /// Compare active windows with random masks at a matched measurement budget.
    ComparePatterns(CompareArgs),
}

#[derive(Debug, Clone, Args)]
pub struct Common {
    /// Key-value settings file; flags override its entries.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output directory, created if missing.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct GenDataArgs {
    #[command(flatten)]
    pub common: Common,
    /// Number of base scenes.
    #[arg(long)]
    pub count: Option<usize>,
    /// Master random seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Square image side in pixels.
    #[arg(long)]
    pub size: Option<usize>,
    /// Single sampling rate for every entry (e.g. 0.25 or 25%), replacing the mix.
    #[arg(long)]
    pub rate: Option<String>,
    /// Relative frequency of the 50%, 25% and 6.25% rates, e.g. 1:1:2.
    #[arg(long)]
    pub rate_mix: Option<String>,
    /// Fringe period range in pixels, `lo,hi` or a single value.
    #[arg(long)]
    pub period: Option<String>,
    /// Projection angle range in degrees, `lo,hi`.
    #[arg(long)]
    pub angle_range: Option<String>,
    /// Noise amplitude range on normalized intensity, `lo,hi`.
    #[arg(long)]
    pub noise_range: Option<String>,
    /// Window scan order: raster or swirl.
    #[arg(long)]
    pub order: Option<String>,
    /// Fraction of scenes in the training split.
    #[arg(long)]
    pub split: Option<f64>,
    /// Rotated variants per base scene.
    #[arg(long)]
    pub poses: Option<usize>,
}

#[derive(Debug, Args)]
pub struct SampleArgs {
    #[command(flatten)]
    pub common: Common,
    /// Scene image (PGM).
    #[arg(long)]
    pub scene: Option<PathBuf>,
    /// Sampling rate, e.g. 0.25 or 25%.
    #[arg(long)]
    pub rate: Option<String>,
    /// Cells per window; overrides --rate.
    #[arg(long)]
    pub window: Option<usize>,
    /// Window kind: rect or split-pair.
    #[arg(long)]
    pub kind: Option<String>,
    /// Long edge direction: vertical or horizontal.
    #[arg(long)]
    pub orientation: Option<String>,
    /// Window scan order: raster or swirl.
    #[arg(long)]
    pub order: Option<String>,
    /// Low-res restoration: rounded or raw.
    #[arg(long)]
    pub mode: Option<String>,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[command(flatten)]
    pub common: Common,
    /// Dataset manifest written by gen-data.
    #[arg(long)]
    pub manifest: Option<PathBuf>,
    /// Reconstruction approach: e2e or two-stage.
    #[arg(long)]
    pub approach: Option<String>,
    /// Master random seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Passes over the training split.
    #[arg(long)]
    pub epochs: Option<usize>,
    /// Stop after this many optimizer steps per stage.
    #[arg(long)]
    pub max_steps: Option<usize>,
    /// Encoder depth of each network.
    #[arg(long)]
    pub levels: Option<usize>,
    /// Channels of the first encoder block.
    #[arg(long)]
    pub base_channels: Option<usize>,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[command(flatten)]
    pub common: Common,
    /// Directory written by train.
    #[arg(long)]
    pub checkpoint: Option<PathBuf>,
    /// Dataset manifest written by gen-data.
    #[arg(long)]
    pub manifest: Option<PathBuf>,
    /// Split to evaluate: train or test.
    #[arg(long)]
    pub split: Option<String>,
    /// Use the ground truth as the prediction (harness check).
    #[arg(long)]
    pub oracle: bool,
    /// Earlier report.json to compare against.
    #[arg(long)]
    pub against: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct InferArgs {
    #[command(flatten)]
    pub common: Common,
    /// Directory written by train.
    #[arg(long)]
    pub checkpoint: Option<PathBuf>,
    /// Low-res fringe image (PGM).
    #[arg(long)]
    pub input: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct NyquistArgs {
    #[command(flatten)]
    pub common: Common,
    /// Fringe period in pixels.
    #[arg(long)]
    pub period: Option<f64>,
    /// Window widths in pixels, comma separated.
    #[arg(long)]
    pub extents: Option<String>,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    #[command(flatten)]
    pub common: Common,
    /// Number of scenes.
    #[arg(long)]
    pub count: Option<usize>,
    /// Master random seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Square image side in pixels.
    #[arg(long)]
    pub size: Option<usize>,
    /// Sampling rate, e.g. 0.25 or 25%.
    #[arg(long)]
    pub rate: Option<String>,
    /// Fringe period range in pixels, `lo,hi`.
    #[arg(long)]
    pub period: Option<String>,
    /// Projection angle range in degrees, `lo,hi`.
    #[arg(long)]
    pub angle_range: Option<String>,
}

/// Parses `args` (program name first), runs the command and returns the
/// process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) if !e.use_stderr() => {
            print!("{e}");
            return 0;
        }
        Err(e) => {
            let msg = e.to_string();
            let first = msg.lines().next().unwrap_or("invalid arguments");
            report_error("usage", first.trim_start_matches("error: "));
            return 2;
        }
    };
    match execute(&cli.command) {
        Ok(()) => 0,
        Err(e) => {
            report_error(e.kind(), &e.to_string());
            1
        }
    }
}

fn report_error(kind: &str, message: &str) {
    eprintln!("{}", serde_json::json!({ "error": kind, "message": message }));
}

pub fn execute(cmd: &Command) -> Result<()> {
    match cmd {
        Command::GenData(a) => gen_data(a),
        Command::Sample(a) => sample(a),
        Command::Train(a) => train(a),
        Command::Eval(a) => eval(a),
        Command::Infer(a) => infer(a),
        Command::NyquistDemo(a) => nyquist(a),
        Command::ComparePatterns(a) => compare(a),
    }
}

/// Defaults, then the settings file, then flags. Keys outside `defaults`
/// and `optional` are rejected.
fn resolve(
    common: &Common,
    defaults: &[(&str, &str)],
    optional: &[&str],
    flags: Vec<(&str, Option<String>)>,
) -> Result<KeyValues> {
    let mut kv = KeyValues::default();
    for (k, v) in defaults {
        kv.set(k, v);
    }
    if let Some(path) = &common.config {
        let file = KeyValues::load(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        let allowed: Vec<&str> = defaults.iter().map(|(k, _)| *k).chain(optional.iter().copied()).collect();
        file.check_keys(&allowed)?;
        kv.0.extend(file.0);
    }
    for (k, v) in flags {
        if let Some(v) = v {
            kv.set(k, v);
        }
    }
    Ok(kv)
}

fn req<T: std::str::FromStr>(kv: &KeyValues, key: &str) -> Result<T> {
    kv.parsed(key)?
        .ok_or_else(|| Error::Config(format!("missing required setting `{key}`")))
}

fn some<T: ToString>(v: &Option<T>) -> Option<String> {
    v.as_ref().map(T::to_string)
}

fn path_str(p: &Option<PathBuf>) -> Option<String> {
    p.as_ref().map(|p| p.display().to_string())
}

/// `lo,hi` or a single value.
pub fn parse_range(s: &str) -> Result<(f64, f64)> {
    let parse = |t: &str| {
        t.trim()
            .parse::<f64>()
            .map_err(|_| param(format!("cannot parse range `{s}`")))
    };
    match s.split_once(',') {
        Some((a, b)) => Ok((parse(a)?, parse(b)?)),
        None => parse(s).map(|v| (v, v)),
    }
}

/// Fraction such as `0.25` or percentage such as `25%`.
pub fn parse_rate(s: &str) -> Result<f64> {
    let bad = || param(format!("cannot parse rate `{s}`"));
    let r = match s.trim().strip_suffix('%') {
        Some(p) => p.trim().parse::<f64>().map_err(|_| bad())? / 100.0,
        None => s.trim().parse::<f64>().map_err(|_| bad())?,
    };
    if !(r > 0.0 && r <= 1.0) {
        return Err(param(format!("rate {r} not in (0, 1]")));
    }
    Ok(r)
}

/// Window size `N` with rate exactly `1 / N`.
pub fn cells_for_rate(rate: f64) -> Result<usize> {
    let n = (1.0 / rate).round() as usize;
    if n == 0 || (1.0 / n as f64 - rate).abs() > 1e-9 {
        return Err(param(format!("rate {rate} is not 1/N for an integer N")));
    }
    Ok(n)
}

fn create_out(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir)?;
    Ok(())
}

fn write_json<T: Serialize>(value: &T, path: &Path) -> Result<()> {
    fs::write(path, serde_json::to_string_pretty(value)? + "\n")?;
    Ok(())
}

/// Seed of base scene `index`.
pub fn scene_seed(seed: u64, index: usize) -> u64 {
    rng::stream(seed, rng::stream_id(index as u64, rng::purpose::SCENE)).random()
}

fn gen_data(a: &GenDataArgs) -> Result<()> {
    let kv = resolve(
        &a.common,
        &[
            ("seed", "0"),
            ("size", "64"),
            ("rate_mix", "1:1:2"),
            ("period", "6,8"),
            ("angle_range", "13,17"),
            ("noise_range", "0.04,0.14"),
            ("order", "raster"),
            ("split", "0.85"),
            ("poses", "1"),
            ("phase_gain", &DATASET_PHASE_GAIN.to_string()),
        ],
        &["count", "rate"],
        vec![
            ("count", some(&a.count)),
            ("seed", some(&a.seed)),
            ("size", some(&a.size)),
            ("rate", a.rate.clone()),
            ("rate_mix", a.rate_mix.clone()),
            ("period", a.period.clone()),
            ("angle_range", a.angle_range.clone()),
            ("noise_range", a.noise_range.clone()),
            ("order", a.order.clone()),
            ("split", some(&a.split)),
            ("poses", some(&a.poses)),
        ],
    )?;
    let count: usize = req(&kv, "count")?;
    let seed: u64 = req(&kv, "seed")?;
    let size: usize = req(&kv, "size")?;
    let poses: usize = req(&kv, "poses")?;
    if count == 0 || poses == 0 {
        return Err(param("count and poses must be positive"));
    }
    let mut rate_mix: RateMix = req::<String>(&kv, "rate_mix")?.parse()?;
    if let Some(r) = kv.get("rate") {
        let n = cells_for_rate(parse_rate(r)?)?;
        let slot = STANDARD_WINDOWS
            .iter()
            .position(|&w| w == n)
            .ok_or_else(|| param(format!("dataset rates are 50%, 25% or 6.25%, not {r}")))?;
        rate_mix = RateMix([0; 3]);
        rate_mix.0[slot] = 1;
    }
    let mcfg = ManifestConfig {
        split_ratio: req(&kv, "split")?,
        seed,
        rate_mix,
        period_range: parse_range(&req::<String>(&kv, "period")?)?,
        angle_range: parse_range(&req::<String>(&kv, "angle_range")?)?,
    };
    let scfg = SynthConfig {
        size,
        noise_range: parse_range(&req::<String>(&kv, "noise_range")?)?,
        phase_gain: req(&kv, "phase_gain")?,
        threshold: DEFAULT_THRESHOLD,
        order: req::<String>(&kv, "order")?.parse()?,
    };
    let mut specs = Vec::with_capacity(count * poses);
    for i in 0..count {
        let s = scene_seed(seed, i);
        specs.extend(augment_pose(&SceneSpec::random(s, size, size), poses, s)?);
    }
    let manifest = build_manifest_with(&specs, &mcfg)?;
    // fail on bad geometry or noise before touching the disk
    synthesize(&manifest.entries[0], &scfg, seed)?;

    let out = &a.common.out;
    for d in ["depth", "fringe_hi", "fringe_lo", "traces"] {
        fs::create_dir_all(out.join(d))?;
    }
    manifest
        .entries
        .par_iter()
        .map(|e| {
            let s = synthesize(e, &scfg, seed)?;
            formats::save_depth(&s.depth, out.join(&e.depth_path))?;
            formats::save_intensity(s.fringe_hi.grid(), out.join(&e.fringe_hi_path))?;
            formats::save_intensity(s.fringe_lo.grid(), out.join(&e.fringe_lo_path))?;
            formats::save_trace(&s.trace, out.join(format!("traces/{:05}.csv", e.scene_id)))
        })
        .collect::<Result<()>>()?;
    manifest.save(out.join("manifest.json"))?;
    kv.save(out.join("config.txt"))
}

fn parse_orientation(s: &str) -> Result<Orientation> {
    match s {
        "vertical" => Ok(Orientation::Vertical),
        "horizontal" => Ok(Orientation::Horizontal),
        _ => Err(param(format!("unknown orientation `{s}`"))),
    }
}

fn parse_kind(s: &str) -> Result<WindowKind> {
    match s {
        "rect" => Ok(WindowKind::Rect),
        "split-pair" => Ok(WindowKind::SplitPair),
        _ => Err(param(format!("unknown window kind `{s}`"))),
    }
}

fn parse_mode(s: &str) -> Result<ReorderMode> {
    match s {
        "rounded" => Ok(ReorderMode::Rounded),
        "raw" => Ok(ReorderMode::Raw),
        _ => Err(param(format!("unknown reorder mode `{s}`"))),
    }
}

fn sample(a: &SampleArgs) -> Result<()> {
    let kv = resolve(
        &a.common,
        &[
            ("rate", "0.25"),
            ("kind", "rect"),
            ("orientation", "vertical"),
            ("order", "raster"),
            ("mode", "rounded"),
        ],
        &["scene", "window"],
        vec![
            ("scene", path_str(&a.scene)),
            ("rate", a.rate.clone()),
            ("window", some(&a.window)),
            ("kind", a.kind.clone()),
            ("orientation", a.orientation.clone()),
            ("order", a.order.clone()),
            ("mode", a.mode.clone()),
        ],
    )?;
    let scene_path: String = req(&kv, "scene")?;
    let n = match kv.parsed::<usize>("window")? {
        Some(n) => n,
        None => cells_for_rate(parse_rate(&req::<String>(&kv, "rate")?)?)?,
    };
    let window = make_window(
        n,
        parse_kind(&req::<String>(&kv, "kind")?)?,
        parse_orientation(&req::<String>(&kv, "orientation")?)?,
    )?;
    let order: ScanOrder = req::<String>(&kv, "order")?.parse()?;
    let mode = parse_mode(&req::<String>(&kv, "mode")?)?;
    let scene = formats::load_fringe(&scene_path, FringeKind::Continuous)?;
    let seq = make_sequence(scene.grid().dims(), &window, order)?;
    let trace = acquire(&scene, &seq)?;
    let low = reorder(&trace, &seq, mode)?;

    let out = &a.common.out;
    create_out(out)?;
    formats::save_trace(&trace, out.join("trace.csv"))?;
    let maxval = match mode {
        ReorderMode::Rounded => 255,
        ReorderMode::Raw => u16::MAX,
    };
    PgmImage::from_grid(low.grid(), maxval).save(out.join("lowres.pgm"))?;
    fs::write(out.join("sequence.json"), seq.to_json()? + "\n")?;
    kv.save(out.join("config.txt"))
}

const MODEL_FILE: &str = "model.txt";

fn unet_config(kv: &KeyValues, resolution: usize) -> Result<UNetConfig> {
    let cfg = UNetConfig {
        levels: req(kv, "levels")?,
        base_channels: req(kv, "base_channels")?,
        dropout_blocks: req(kv, "dropout_blocks")?,
        resolution,
        ..UNetConfig::desk()
    };
    cfg.validate()?;
    Ok(cfg)
}

/// Side of the square depth maps of the first entry.
fn dataset_size(manifest: &DatasetManifest, root: &Path) -> Result<usize> {
    let first = manifest
        .entries
        .first()
        .ok_or_else(|| Error::Data("manifest has no entries".into()))?;
    let (h, w) = formats::load_depth(root.join(&first.depth_path))?.grid().dims();
    if h != w {
        return Err(Error::Data(format!("depth maps must be square, got {h}x{w}")));
    }
    Ok(h)
}

fn manifest_root(path: &Path) -> PathBuf {
    path.parent().map(Path::to_path_buf).unwrap_or_default()
}

fn train(a: &TrainArgs) -> Result<()> {
    let defaults = TrainConfig::default().to_key_values();
    let mut pairs: Vec<(String, String)> = defaults.0.into_iter().collect();
    let desk = UNetConfig::desk();
    pairs.extend([
        ("approach".into(), "e2e".into()),
        ("levels".into(), desk.levels.to_string()),
        ("base_channels".into(), desk.base_channels.to_string()),
        ("dropout_blocks".into(), desk.dropout_blocks.to_string()),
        ("disc_layers".into(), DiscriminatorConfig::desk().layers.to_string()),
    ]);
    let defaults: Vec<(&str, &str)> = pairs.iter().map(|(k, v)| (k.as_str(), v.as_str())).collect();
    let kv = resolve(
        &a.common,
        &defaults,
        &["manifest", "max_steps"],
        vec![
            ("manifest", path_str(&a.manifest)),
            ("approach", a.approach.clone()),
            ("seed", some(&a.seed)),
            ("epochs", some(&a.epochs)),
            ("max_steps", some(&a.max_steps)),
            ("levels", some(&a.levels)),
            ("base_channels", some(&a.base_channels)),
        ],
    )?;
    let mut tcfg = TrainConfig::default();
    let train_only = KeyValues(
        kv.0.iter()
            .filter(|(k, _)| TRAIN_KEYS.contains(&k.as_str()))
            .map(|(k, v)| (k.clone(), v.clone()))
            .collect(),
    );
    tcfg.apply(&train_only)?;
    let approach: Approach = req::<String>(&kv, "approach")?.parse()?;
    let manifest_path = PathBuf::from(req::<String>(&kv, "manifest")?);
    let manifest = DatasetManifest::load(&manifest_path)?;
    let root = manifest_root(&manifest_path);
    let size = dataset_size(&manifest, &root)?;
    let ucfg = unet_config(&kv, size)?;
    let data = Dataset::load(&manifest, &root, Split::Train, size)?;
    let opts = TrainOptions {
        max_steps: kv.parsed("max_steps")?,
        ..TrainOptions::default()
    };

    let out = &a.common.out;
    create_out(out)?;
    let mut model = KeyValues::default();
    model.set("approach", approach);
    model.set("levels", ucfg.levels);
    model.set("base_channels", ucfg.base_channels);
    model.set("dropout_blocks", ucfg.dropout_blocks);
    model.set("resolution", ucfg.resolution);
    model.set("leaky_slope", tcfg.leaky_slope);
    match approach {
        Approach::EndToEnd => {
            let r = train_end_to_end(&data, &ucfg, &tcfg, &opts)?;
            spi_tensor::Checkpoint::from_params(r.unet.params()).save(out.join("unet.spx"))?;
            formats::save_losses(&r.losses, out.join("losses.csv"))?;
        }
        Approach::TwoStage => {
            let dcfg = DiscriminatorConfig {
                layers: req(&kv, "disc_layers")?,
                resolution: size,
                ..DiscriminatorConfig::desk()
            };
            dcfg.validate()?;
            model.set("disc_layers", dcfg.layers);
            let r = train_two_stage(&data, &ucfg, &dcfg, &ucfg, &tcfg, &opts)?;
            spi_tensor::Checkpoint::from_params(r.generator.params()).save(out.join("generator.spx"))?;
            spi_tensor::Checkpoint::from_params(r.discriminator.params()).save(out.join("discriminator.spx"))?;
            spi_tensor::Checkpoint::from_params(r.depth_net.params()).save(out.join("depth.spx"))?;
            formats::save_losses(&r.stage1, out.join("losses_stage1.csv"))?;
            formats::save_losses(&r.stage2, out.join("losses_stage2.csv"))?;
        }
    }
    model.save(out.join(MODEL_FILE))?;
    kv.save(out.join("config.txt"))
}

/// Networks and activation slope of a directory written by `train`.
pub fn load_reconstructor(dir: &Path) -> Result<(Reconstructor, f64)> {
    let model = KeyValues::load(dir.join(MODEL_FILE))
        .map_err(|e| Error::Data(format!("cannot read {}: {e}", dir.join(MODEL_FILE).display())))?;
    let cfg = unet_config(&model, req(&model, "resolution")?)?;
    let slope: f64 = req(&model, "leaky_slope")?;
    let approach: Approach = req::<String>(&model, "approach")?.parse()?;
    let r = match approach {
        Approach::EndToEnd => Reconstructor::EndToEnd(load_unet(cfg, dir.join("unet.spx"))?),
        Approach::TwoStage => Reconstructor::TwoStage {
            generator: load_unet(cfg, dir.join("generator.spx"))?,
            depth_net: load_unet(cfg, dir.join("depth.spx"))?,
        },
    };
    Ok((r, slope))
}

fn parse_split(s: &str) -> Result<Split> {
    match s {
        "train" => Ok(Split::Train),
        "test" => Ok(Split::Test),
        _ => Err(param(format!("unknown split `{s}`"))),
    }
}

fn eval(a: &EvalArgs) -> Result<()> {
    let kv = resolve(
        &a.common,
        &[("split", "test"), ("oracle", "false")],
        &["checkpoint", "manifest", "against"],
        vec![
            ("checkpoint", path_str(&a.checkpoint)),
            ("manifest", path_str(&a.manifest)),
            ("split", a.split.clone()),
            ("oracle", a.oracle.then(|| "true".to_string())),
            ("against", path_str(&a.against)),
        ],
    )?;
    let oracle: bool = req(&kv, "oracle")?;
    let split = parse_split(&req::<String>(&kv, "split")?)?;
    let manifest_path = PathBuf::from(req::<String>(&kv, "manifest")?);
    let manifest = DatasetManifest::load(&manifest_path)?;
    let root = manifest_root(&manifest_path);
    let model = if oracle {
        None
    } else {
        Some(load_reconstructor(Path::new(&req::<String>(&kv, "checkpoint")?))?)
    };
    let entries: Vec<_> = manifest.split(split).collect();
    let samples = entries
        .par_iter()
        .map(|e| {
            let truth = formats::load_depth(root.join(&e.depth_path))?;
            let pred = match &model {
                None => truth.clone(),
                Some((net, slope)) => {
                    let lo = PgmImage::load(root.join(&e.fringe_lo_path))?.to_grid();
                    net.infer(&LowResFringe::new(lo, LowResKind::Binary)?, *slope)?.depth
                }
            };
            Ok(SampleReport {
                id: e.scene_id,
                rate: e.rate,
                ..evaluate(&pred, &truth)?
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let report = EvalReport::aggregate(samples)?;

    let out = &a.common.out;
    create_out(out)?;
    fs::write(out.join("report.json"), report.to_json()? + "\n")?;
    fs::write(out.join("report.txt"), report.table())?;
    if let Some(p) = kv.get("against") {
        let base = EvalReport::from_json(&fs::read_to_string(p)?)?;
        let c = compare_reports(&base, &report)?;
        fs::write(out.join("comparison.json"), c.to_json()? + "\n")?;
        fs::write(out.join("comparison.txt"), c.table())?;
    }
    kv.save(out.join("config.txt"))
}

fn infer(a: &InferArgs) -> Result<()> {
    let kv = resolve(
        &a.common,
        &[],
        &["checkpoint", "input"],
        vec![("checkpoint", path_str(&a.checkpoint)), ("input", path_str(&a.input))],
    )?;
    let (net, slope) = load_reconstructor(Path::new(&req::<String>(&kv, "checkpoint")?))?;
    let lo = PgmImage::load(req::<String>(&kv, "input")?)?.to_grid();
    let r = net.infer(&LowResFringe::new(lo, LowResKind::Binary)?, slope)?;
    let out = &a.common.out;
    create_out(out)?;
    formats::save_depth(&r.depth, out.join("depth.pgm"))?;
    if let Some(f) = &r.fringe {
        formats::save_intensity(f.grid(), out.join("fringe.pgm"))?;
    }
    kv.save(out.join("config.txt"))
}

fn nyquist(a: &NyquistArgs) -> Result<()> {
    let kv = resolve(
        &a.common,
        &[("period", "6"), ("extents", "3,5,7")],
        &[],
        vec![("period", some(&a.period)), ("extents", a.extents.clone())],
    )?;
    let period: f64 = req(&kv, "period")?;
    let extents = req::<String>(&kv, "extents")?
        .split(',')
        .map(|t| t.trim().parse::<usize>().map_err(|_| param(format!("bad extent `{t}`"))))
        .collect::<Result<Vec<_>>>()?;
    let (carrier, report) = nyquist_demo(period, &extents)?;
    let out = &a.common.out;
    create_out(out)?;
    formats::save_intensity(carrier.grid(), out.join("carrier.pgm"))?;
    let mut text = format!("period {period} width {}\n", report.width);
    for c in &report.cases {
        if let Some(low) = &c.low_res {
            formats::save_intensity(low.grid(), out.join(format!("lowres_m{}.pgm", c.extent)))?;
        }
        text += &format!(
            "M {:>3}  {:<8} carrier bin {:>4}  sampled bin {:>4}  shift {}\n",
            c.extent,
            format!("{:?}", c.regime).to_lowercase(),
            c.carrier_bin,
            c.sampled_bin,
            c.shift
        );
    }
    write_json(&report, &out.join("report.json"))?;
    fs::write(out.join("report.txt"), text)?;
    kv.save(out.join("config.txt"))
}

/// Binarized fringes of `count` procedural scenes.
pub fn procedural_fringes(
    count: usize,
    seed: u64,
    size: usize,
    period: (f64, f64),
    angle: (f64, f64),
) -> Result<Vec<crate::grid::FringeImage>> {
    (0..count)
        .map(|i| {
            let s = scene_seed(seed, i);
            let depth: DepthMap = gen_scene(&SceneSpec::random(s, size, size), size, size)?;
            let mut geo = rng::stream(seed, rng::stream_id(i as u64, rng::purpose::GEOMETRY));
            let t = if period.0 == period.1 { period.0 } else { geo.random_range(period.0..=period.1) };
            let geom = ProjectionGeometry::new(sample_angle(angle, geo.random())?, t)?.with_gain(DATASET_PHASE_GAIN)?;
            binarize(&render_sinusoid(&depth, &geom)?, DEFAULT_THRESHOLD)
        })
        .collect()
}

fn compare(a: &CompareArgs) -> Result<()> {
    let kv = resolve(
        &a.common,
        &[
            ("count", "20"),
            ("seed", "0"),
            ("size", "64"),
            ("rate", "0.25"),
            ("period", "6,8"),
            ("angle_range", "13,17"),
        ],
        &[],
        vec![
            ("count", some(&a.count)),
            ("seed", some(&a.seed)),
            ("size", some(&a.size)),
            ("rate", a.rate.clone()),
            ("period", a.period.clone()),
            ("angle_range", a.angle_range.clone()),
        ],
    )?;
    let count: usize = req(&kv, "count")?;
    if count == 0 {
        return Err(param("count must be positive"));
    }
    let seed: u64 = req(&kv, "seed")?;
    let n = cells_for_rate(parse_rate(&req::<String>(&kv, "rate")?)?)?;
    let scenes = procedural_fringes(
        count,
        seed,
        req(&kv, "size")?,
        parse_range(&req::<String>(&kv, "period")?)?,
        parse_range(&req::<String>(&kv, "angle_range")?)?,
    )?;
    let r = compare_patterns(&scenes, n, seed)?;
    let out = &a.common.out;
    create_out(out)?;
    write_json(&r, &out.join("comparison.json"))?;
    fs::write(
        out.join("comparison.txt"),
        format!(
            "rate {}%  measurements {}  scenes {}\nactive ssim {:.6}\nrandom ssim {:.6} (ridge {})\n",
            r.rate * 100.0,
            r.measurements,
            r.scenes,
            r.active_ssim,
            r.random_ssim,
            r.best_lambda
        ),
    )?;
    kv.save(out.join("config.txt"))
}
