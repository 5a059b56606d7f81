//! Acceptance suite. Prints one `criterion N <name>: PASS|FAIL (detail)` line
//! per criterion, runs every criterion even after a failure, and exits
//! nonzero if any failed. Positional arguments select criteria by number or
//! by a substring of the name.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::error::Error as StdError;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use spi3d::baseline::compare_patterns;
use spi3d::cli::procedural_fringes;
use spi3d::detector::{acquire, reorder, ReorderMode, SignalTrace};
use spi3d::formats::{
    load_depth, read_losses, read_trace, save_depth, write_losses, write_trace, KeyValues, LossRecord, PgmImage,
};
use spi3d::manifest::{build_manifest, DatasetManifest};
use spi3d::metrics::{evaluate, evaluate_grids, EvalReport, SampleReport};
use spi3d::models::train::{initial, smoothed};
use spi3d::models::{
    loss_unet, train_end_to_end, train_two_stage, Dataset, Discriminator, DiscriminatorConfig, Mode, TrainConfig,
    TrainOptions, UNet, UNetConfig,
};
use spi3d::pipeline::{synthesize, SynthConfig};
use spi3d::sampling::{
    make_sequence, make_window, Orientation, PatternSequence, Regime, ScanOrder, WindowKind, WindowSet,
};
use spi3d::scene::SceneSpec;
use spi3d::spectrum::nyquist_demo;
use spi3d::{DepthMap, FringeImage, FringeKind, Grid};
use spi_tensor::{global_ssim, Checkpoint, ParamSet, Tape, Tensor, Var, SSIM_C1, SSIM_C2};

type Outcome = Result<String, Box<dyn StdError>>;

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {
        if !$cond {
            return Err(format!($($fmt)+).into());
        }
    };
}

struct Criterion {
    name: &'static str,
    budget: Option<Duration>,
    run: fn() -> Outcome,
}

fn main() {
    let criteria = [
        Criterion { name: "sampling oracle equivalence", budget: Some(Duration::from_secs(30)), run: sampling_oracle },
        Criterion { name: "coverage partition", budget: None, run: coverage_partition },
        Criterion { name: "ssim correctness", budget: None, run: ssim_correctness },
        Criterion { name: "gradient checks", budget: Some(Duration::from_secs(120)), run: gradient_checks },
        Criterion { name: "nyquist regimes", budget: Some(Duration::from_secs(5)), run: nyquist_regimes },
        Criterion { name: "training smoke end-to-end", budget: Some(Duration::from_secs(600)), run: training_smoke },
        Criterion { name: "two-stage smoke", budget: None, run: two_stage_smoke },
        Criterion { name: "active versus random", budget: None, run: active_vs_random },
        Criterion { name: "metrics identities", budget: None, run: metrics_identities },
        Criterion { name: "round-trip file io", budget: None, run: round_trips },
    ];
    let filters: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let selected = |i: usize, name: &str| {
        filters.is_empty() || filters.iter().any(|f| *f == (i + 1).to_string() || name.contains(f.as_str()))
    };

    let mut failed = 0;
    let mut ran = 0;
    for (i, c) in criteria.iter().enumerate() {
        if !selected(i, c.name) {
            continue;
        }
        ran += 1;
        let start = Instant::now();
        let result = catch_unwind(AssertUnwindSafe(c.run));
        let elapsed = start.elapsed();
        let (pass, detail) = match result {
            Ok(Ok(detail)) => match c.budget {
                Some(b) if elapsed > b => (false, format!("{detail}; exceeded {:.0} s budget", b.as_secs_f64())),
                _ => (true, detail),
            },
            Ok(Err(e)) => (false, e.to_string()),
            Err(_) => (false, "panicked".to_string()),
        };
        if !pass {
            failed += 1;
        }
        println!(
            "criterion {} {}: {} ({detail}; {:.1} s)",
            i + 1,
            c.name,
            if pass { "PASS" } else { "FAIL" },
            elapsed.as_secs_f64()
        );
    }
    println!("acceptance: {} passed, {failed} failed", ran - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

// ---------------------------------------------------------------- sampling

const SIDE: usize = 64;
const WINDOW_CELLS: [usize; 4] = [1, 2, 4, 16];

#[derive(Debug, Clone, Copy)]
enum Layout {
    Rect(Orientation),
    Split(Orientation),
}

fn layouts() -> Vec<(usize, Layout, ScanOrder)> {
    let mut out = Vec::new();
    for n in WINDOW_CELLS {
        for o in [Orientation::Vertical, Orientation::Horizontal] {
            for l in [Layout::Rect(o), Layout::Split(o)] {
                for order in [ScanOrder::Raster, ScanOrder::Swirl] {
                    out.push((n, l, order));
                }
            }
        }
    }
    out
}

fn window_set(n: usize, layout: Layout) -> spi3d::Result<WindowSet> {
    match layout {
        Layout::Rect(o) => make_window(n, WindowKind::Rect, o),
        Layout::Split(o) => make_window(n, WindowKind::SplitPair, o),
    }
}

/// Rows and columns of the rectangular block for `n` cells, long edge vertical.
fn rect_block(n: usize) -> (usize, usize) {
    match n {
        1 => (1, 1),
        2 => (2, 1),
        4 => (2, 2),
        16 => (4, 4),
        _ => unreachable!("unsupported window size {n}"),
    }
}

fn round_half_up(v: f64) -> f64 {
    (v + 0.5).floor()
}

/// Block averages computed straight from the window geometry.
fn oracle(img: &Grid, n: usize, layout: Layout, rounded: bool) -> Grid {
    let finish = |sum: f64| {
        let avg = sum / n as f64;
        if rounded {
            round_half_up(avg)
        } else {
            avg
        }
    };
    let k = n.div_ceil(2);
    match layout {
        Layout::Rect(o) => {
            let (long, short) = rect_block(n);
            let (bh, bw) = match o {
                Orientation::Vertical => (long, short),
                Orientation::Horizontal => (short, long),
            };
            let mut out = Grid::filled(SIDE / bh, SIDE / bw, 0.0);
            for i in 0..SIDE / bh {
                for j in 0..SIDE / bw {
                    let mut sum = 0.0;
                    for a in 0..bh {
                        for b in 0..bw {
                            sum += img.get(i * bh + a, j * bw + b);
                        }
                    }
                    out.set(i, j, finish(sum));
                }
            }
            out
        }
        Layout::Split(Orientation::Vertical) => {
            // super-cell n rows by 2 columns; first window: column 0 above row k, column 1 from row k
            let mut out = Grid::filled(2 * (SIDE / n), SIDE / 2, 0.0);
            for r in 0..SIDE / n {
                for c in 0..SIDE / 2 {
                    let (mut first, mut second) = (0.0, 0.0);
                    for q in 0..n {
                        let left = img.get(r * n + q, 2 * c);
                        let right = img.get(r * n + q, 2 * c + 1);
                        if q < k {
                            first += left;
                            second += right;
                        } else {
                            first += right;
                            second += left;
                        }
                    }
                    out.set(2 * r, c, finish(first));
                    out.set(2 * r + 1, c, finish(second));
                }
            }
            out
        }
        Layout::Split(Orientation::Horizontal) => {
            // super-cell 2 rows by n columns; first window: row 0 left of column k, row 1 from column k
            let mut out = Grid::filled(SIDE / 2, 2 * (SIDE / n), 0.0);
            for r in 0..SIDE / 2 {
                for c in 0..SIDE / n {
                    let (mut first, mut second) = (0.0, 0.0);
                    for q in 0..n {
                        let top = img.get(2 * r, c * n + q);
                        let bottom = img.get(2 * r + 1, c * n + q);
                        if q < k {
                            first += top;
                            second += bottom;
                        } else {
                            first += bottom;
                            second += top;
                        }
                    }
                    out.set(r, 2 * c, finish(first));
                    out.set(r, 2 * c + 1, finish(second));
                }
            }
            out
        }
    }
}

/// Intensities on a 1/256 lattice, so every window sum is exact in any order.
fn dyadic_image(rng: &mut impl Rng, h: usize, w: usize) -> Grid {
    Grid::from_fn(h, w, |_, _| rng.random_range(0..=256u32) as f64 / 256.0)
}

fn sampling_oracle() -> Outcome {
    let mut r = rng(1);
    let images: Vec<Grid> = (0..100).map(|_| dyadic_image(&mut r, SIDE, SIDE)).collect();
    let mut checks = 0;
    for (n, layout, order) in layouts() {
        let seq = make_sequence((SIDE, SIDE), &window_set(n, layout)?, order)?;
        for img in &images {
            let binary = FringeImage::new(img.map(|v| (v >= 0.5) as u8 as f64), FringeKind::Binary)?;
            let gray = FringeImage::new(img.clone(), FringeKind::Continuous)?;
            for (scene, mode) in [
                (&binary, ReorderMode::Rounded),
                (&gray, ReorderMode::Rounded),
                (&binary, ReorderMode::Raw),
                (&gray, ReorderMode::Raw),
            ] {
                let got = reorder(&acquire(scene, &seq)?, &seq, mode)?;
                let want = oracle(scene.grid(), n, layout, mode == ReorderMode::Rounded);
                ensure!(
                    got.grid() == &want,
                    "N {n} {layout:?} {order} {mode:?}: reorder(acquire) differs from block-average oracle"
                );
                checks += 1;
            }
        }
    }
    Ok(format!("{checks} reconstructions over {} window/order configurations match exactly", layouts().len()))
}

fn coverage_partition() -> Outcome {
    let mut configs = 0;
    for (n, layout, order) in layouts() {
        let seq = make_sequence((SIDE, SIDE), &window_set(n, layout)?, order)?;
        let mut hits = vec![0u32; SIDE * SIDE];
        for p in seq.placements() {
            for &(dr, dc) in seq.windows().window(p.window).cells() {
                let (r, c) = (p.row + dr, p.col + dc);
                ensure!(r < SIDE && c < SIDE, "N {n} {layout:?} {order}: cell ({r}, {c}) off the scene");
                hits[r * SIDE + c] += 1;
            }
        }
        ensure!(
            hits.iter().all(|&h| h == 1),
            "N {n} {layout:?} {order}: pixel covered {} times",
            hits.iter().find(|&&h| h != 1).unwrap()
        );
        ensure!(seq.len() * n == SIDE * SIDE, "N {n} {layout:?} {order}: {} placements", seq.len());
        let (lh, lw) = seq.low_res_dims();
        let mut targets = vec![0u32; lh * lw];
        for p in seq.placements() {
            let (r, c) = seq.target(p);
            targets[r * lw + c] += 1;
        }
        ensure!(targets.iter().all(|&t| t == 1), "N {n} {layout:?} {order}: low-res targets not a bijection");
        configs += 1;
    }
    Ok(format!("{configs} configurations cover all {} pixels exactly once", SIDE * SIDE))
}

// -------------------------------------------------------------------- ssim

/// Structural similarity from raw second moments.
fn ssim_oracle(u: &[f64], v: &[f64]) -> f64 {
    let n = u.len() as f64;
    let mu = u.iter().sum::<f64>() / n;
    let mv = v.iter().sum::<f64>() / n;
    let var_u = u.iter().map(|a| a * a).sum::<f64>() / n - mu * mu;
    let var_v = v.iter().map(|b| b * b).sum::<f64>() / n - mv * mv;
    let cov = u.iter().zip(v).map(|(a, b)| a * b).sum::<f64>() / n - mu * mv;
    ((2.0 * mu * mv + SSIM_C1) * (2.0 * cov + SSIM_C2))
        / ((mu * mu + mv * mv + SSIM_C1) * (var_u + var_v + SSIM_C2))
}

fn ssim_correctness() -> Outcome {
    let mut r = rng(3);
    let mut worst_oracle: f64 = 0.0;
    for i in 0..1000 {
        let len = r.random_range(2..=300);
        let scale = if i % 2 == 0 { 1.0 } else { r.random_range(0.01..4.0) };
        let u: Vec<f64> = (0..len).map(|_| r.random::<f64>() * scale).collect();
        let v: Vec<f64> = (0..len).map(|_| r.random::<f64>() * scale).collect();
        let got = global_ssim(&u, &v);
        worst_oracle = worst_oracle.max((got - ssim_oracle(&u, &v)).abs());
        ensure!(global_ssim(&u, &u) - 1.0 < 1e-12 && 1.0 - global_ssim(&u, &u) < 1e-12, "ssim(u, u) != 1");
        ensure!(got.to_bits() == global_ssim(&v, &u).to_bits(), "ssim not symmetric on pair {i}");
    }
    ensure!(worst_oracle < 1e-10, "oracle mismatch {worst_oracle:e}");

    // differentiable op agrees with the slice form
    let u = Tensor::from_fn([1, 1, 7, 9], |_| r.random::<f64>());
    let v = Tensor::from_fn([1, 1, 7, 9], |_| r.random::<f64>());
    let tape = Tape::new();
    let op = tape.constant(u.clone()).ssim(tape.constant(v.clone()))?.value().item();
    ensure!((op - global_ssim(u.data(), v.data())).abs() < 1e-12, "tensor ssim differs from slice ssim");

    let mut worst_closed: f64 = 0.0;
    for _ in 0..100 {
        let a: f64 = r.random();
        let b: f64 = r.random();
        let len = r.random_range(1..=64);
        // one image zero: the luminance cross term vanishes
        for (x, y) in [(a, 0.0), (0.0, b)] {
            let got = global_ssim(&vec![x; len], &vec![y; len]);
            worst_closed = worst_closed.max((got - SSIM_C1 / (x * x + y * y + SSIM_C1)).abs());
        }
        let got = global_ssim(&vec![a; len], &vec![b; len]);
        worst_closed = worst_closed.max((got - (2.0 * a * b + SSIM_C1) / (a * a + b * b + SSIM_C1)).abs());
    }
    ensure!(worst_closed < 1e-12, "constant-image closed form off by {worst_closed:e}");
    Ok(format!(
        "1000 random pairs within {worst_oracle:.1e} of oracle; constant images within {worst_closed:.1e}"
    ))
}

// --------------------------------------------------------------- gradients

type LossFn<'a> = dyn for<'t> Fn(&'t Tape<f64>, &[Var<'t, f64>]) -> spi_tensor::Result<Var<'t, f64>> + 'a;

const FD_STEP: f64 = 1e-6;
const GRAD_TOL: f64 = 1e-6;

fn relative(analytic: &[f64], numeric: &[f64]) -> f64 {
    let diff = analytic.iter().zip(numeric).map(|(a, n)| (a - n).powi(2)).sum::<f64>().sqrt();
    let na = analytic.iter().map(|a| a * a).sum::<f64>().sqrt();
    let nn = numeric.iter().map(|a| a * a).sum::<f64>().sqrt();
    diff / na.max(nn).max(1e-12)
}

/// Norm-wise relative error of the tape gradient against central differences.
fn fd_error(inputs: &[Tensor<f64>], f: &LossFn) -> Result<f64, Box<dyn StdError>> {
    let tape = Tape::new();
    let vars: Vec<_> = inputs.iter().map(|t| tape.var(t.clone())).collect();
    let grads = tape.backward(f(&tape, &vars)?)?;
    let mut analytic = Vec::new();
    for v in &vars {
        analytic.extend_from_slice(grads.get(*v).ok_or("input has no gradient")?.data());
    }
    let eval = |ins: &[Tensor<f64>]| -> Result<f64, Box<dyn StdError>> {
        let tape = Tape::new();
        let vars: Vec<_> = ins.iter().map(|t| tape.var(t.clone())).collect();
        Ok(f(&tape, &vars)?.value().item())
    };
    let mut numeric = Vec::with_capacity(analytic.len());
    let mut work = inputs.to_vec();
    for i in 0..inputs.len() {
        for k in 0..inputs[i].len() {
            let x = inputs[i].data()[k];
            work[i].data_mut()[k] = x + FD_STEP;
            let plus = eval(&work)?;
            work[i].data_mut()[k] = x - FD_STEP;
            let minus = eval(&work)?;
            work[i].data_mut()[k] = x;
            numeric.push((plus - minus) / (2.0 * FD_STEP));
        }
    }
    Ok(relative(&analytic, &numeric))
}

fn uniform(r: &mut impl Rng, shape: &[usize], lo: f64, hi: f64) -> Tensor<f64> {
    Tensor::from_fn(shape.to_vec(), |_| r.random_range(lo..hi))
}

/// Values at least `gap` away from zero, for ops with a kink there.
fn off_kink(r: &mut impl Rng, shape: &[usize], gap: f64) -> Tensor<f64> {
    Tensor::from_fn(shape.to_vec(), |_| {
        let m = r.random_range(gap..2.0);
        if r.random() {
            m
        } else {
            -m
        }
    })
}

/// Random elementwise weighting so every output element carries gradient.
fn weigh<'t>(tape: &'t Tape<f64>, y: Var<'t, f64>, w: &Tensor<f64>) -> spi_tensor::Result<Var<'t, f64>> {
    y.mul(tape.constant(w.clone()))?.sum()
}

fn unet_fd_error(seed: u64) -> Result<f64, Box<dyn StdError>> {
    let cfg = UNetConfig {
        levels: 2,
        base_channels: 2,
        in_channels: 1,
        out_channels: 1,
        resolution: 8,
        dropout_blocks: 1,
    };
    let mut net = UNet::<f64>::new(cfg, seed)?;
    let mut r = rng(seed ^ 0x5eed);
    // nonzero biases so the check covers their gradients away from the init point
    for p in net.params_mut().iter_mut() {
        for v in p.value.data_mut() {
            *v += r.random_range(-0.1..0.1);
        }
    }
    let x = uniform(&mut r, &[2, 1, 8, 8], 0.0, 1.0);
    let target = uniform(&mut r, &[2, 1, 8, 8], 0.0, 1.0);
    let drop_seed: u64 = r.random();

    let loss = |net: &UNet<f64>, x: &Tensor<f64>, grads: bool| -> Result<(f64, Vec<f64>), Box<dyn StdError>> {
        let tape = Tape::new();
        let w = net.params().bind(&tape);
        let xv = tape.var(x.clone());
        let mut drop = rng(drop_seed);
        let mut mode = Mode { training: true, dropout: 0.5, rng: &mut drop };
        let pred = net.forward(xv, &w, 0.2, &mut mode)?;
        let tv = tape.constant(target.clone());
        let l = loss_unet(pred, tv)?.add(pred.mse(tv)?)?;
        let value = l.value().item();
        if !grads {
            return Ok((value, Vec::new()));
        }
        let g = tape.backward(l)?;
        let mut out = Vec::new();
        for v in w.iter().chain(std::iter::once(&xv)) {
            out.extend_from_slice(g.get(*v).ok_or("missing gradient")?.data());
        }
        Ok((value, out))
    };

    let (_, analytic) = loss(&net, &x, true)?;
    let mut numeric = Vec::with_capacity(analytic.len());
    for i in 0..net.params().len() {
        for k in 0..net.params().get(i).value.len() {
            let orig = net.params().get(i).value.data()[k];
            net.params_mut().get_mut(i).value.data_mut()[k] = orig + FD_STEP;
            let plus = loss(&net, &x, false)?.0;
            net.params_mut().get_mut(i).value.data_mut()[k] = orig - FD_STEP;
            let minus = loss(&net, &x, false)?.0;
            net.params_mut().get_mut(i).value.data_mut()[k] = orig;
            numeric.push((plus - minus) / (2.0 * FD_STEP));
        }
    }
    let mut xw = x.clone();
    for k in 0..x.len() {
        xw.data_mut()[k] = x.data()[k] + FD_STEP;
        let plus = loss(&net, &xw, false)?.0;
        xw.data_mut()[k] = x.data()[k] - FD_STEP;
        let minus = loss(&net, &xw, false)?.0;
        xw.data_mut()[k] = x.data()[k];
        numeric.push((plus - minus) / (2.0 * FD_STEP));
    }
    Ok(relative(&analytic, &numeric))
}

fn gradient_checks() -> Outcome {
    const INSTANCES: u64 = 50;
    let mut worst: Vec<(&str, f64)> = Vec::new();
    let mut record = |name: &'static str, err: f64| -> Result<(), Box<dyn StdError>> {
        ensure!(err < GRAD_TOL, "{name}: relative error {err:e}");
        match worst.iter_mut().find(|(n, _)| *n == name) {
            Some(w) => w.1 = w.1.max(err),
            None => worst.push((name, err)),
        }
        Ok(())
    };
    for seed in 0..INSTANCES {
        let mut r = rng(1000 + seed);
        let s = [2, 2, 3, 3];
        let a = uniform(&mut r, &s, -2.0, 2.0);
        let b = uniform(&mut r, &s, -2.0, 2.0);
        let w = uniform(&mut r, &s, -1.0, 1.0);
        let (scale, shift) = (r.random_range(-2.0..2.0), r.random_range(-1.0..1.0));

        record("add", fd_error(&[a.clone(), b.clone()], &|t, v| weigh(t, v[0].add(v[1])?, &w))?)?;
        record("sub", fd_error(&[a.clone(), b.clone()], &|t, v| weigh(t, v[0].sub(v[1])?, &w))?)?;
        record("mul", fd_error(&[a.clone(), b.clone()], &|t, v| weigh(t, v[0].mul(v[1])?, &w))?)?;
        record("affine", fd_error(std::slice::from_ref(&a), &|t, v| weigh(t, v[0].affine(scale, shift)?, &w))?)?;
        record("sum", fd_error(std::slice::from_ref(&a), &|_, v| v[0].sum())?)?;
        record("mean", fd_error(std::slice::from_ref(&a), &|_, v| v[0].mean())?)?;
        record("sigmoid", fd_error(std::slice::from_ref(&a), &|t, v| weigh(t, v[0].sigmoid()?, &w))?)?;
        let k = off_kink(&mut r, &s, 0.01);
        record("relu", fd_error(std::slice::from_ref(&k), &|t, v| weigh(t, v[0].relu()?, &w))?)?;
        record("leaky_relu", fd_error(&[k], &|t, v| weigh(t, v[0].leaky_relu(0.2)?, &w))?)?;
        let drop_seed: u64 = r.random();
        record(
            "dropout",
            fd_error(std::slice::from_ref(&a), &|t, v| {
                let mut d = rng(drop_seed);
                weigh(t, v[0].dropout(0.5, true, &mut d)?, &w)
            })?,
        )?;
        let small = uniform(&mut r, &[2, 1, 2, 3], -1.0, 1.0);
        let wu = uniform(&mut r, &[2, 1, 4, 3], -1.0, 1.0);
        record("upsample_nearest", fd_error(&[small], &|t, v| weigh(t, v[0].upsample_nearest(2, 1)?, &wu))?)?;
        let wc = uniform(&mut r, &[2, 4, 3, 3], -1.0, 1.0);
        record("concat", fd_error(&[a.clone(), b.clone()], &|t, v| weigh(t, v[0].concat(v[1])?, &wc))?)?;
        record("mse", fd_error(&[a.clone(), b.clone()], &|_, v| v[0].mse(v[1]))?)?;
        let u01 = uniform(&mut r, &s, 0.0, 1.0);
        let v01 = uniform(&mut r, &s, 0.0, 1.0);
        record("ssim", fd_error(&[u01, v01], &|_, v| v[0].ssim(v[1]))?)?;

        let (stride, pad, kk) = [(1, 1, 3), (2, 1, 3), (2, 1, 4), (1, 0, 1)][seed as usize % 4];
        let x = uniform(&mut r, &[2, 2, 6, 6], -1.0, 1.0);
        let cw = uniform(&mut r, &[3, 2, kk, kk], -0.5, 0.5);
        let cb = uniform(&mut r, &[3], -0.5, 0.5);
        let side = (6 + 2 * pad - kk) / stride + 1;
        let wo = uniform(&mut r, &[2, 3, side, side], -1.0, 1.0);
        record(
            "conv2d",
            fd_error(&[x, cw, cb], &|t, v| weigh(t, v[0].conv2d(v[1], Some(v[2]), stride, pad)?, &wo))?,
        )?;

        record("two-level unet", unet_fd_error(seed)?)?;
    }
    let max = worst.iter().map(|w| w.1).fold(0.0, f64::max);
    Ok(format!("{} checks x {INSTANCES} instances, worst relative error {max:.1e}", worst.len()))
}

// ----------------------------------------------------------------- nyquist

fn nyquist_regimes() -> Outcome {
    let (_, report) = nyquist_demo(6.0, &[3, 5, 7])?;
    let case = |m: usize| report.cases.iter().find(|c| c.extent == m).ok_or("missing extent");
    let (m3, m5, m7) = (case(3)?, case(5)?, case(7)?);
    let detail = format!(
        "width {}: carrier bin {}; M3 {:?} bin {}, M5 {:?} bin {}, M7 {:?} bin {}",
        report.width, m3.carrier_bin, m3.regime, m3.sampled_bin, m5.regime, m5.sampled_bin, m7.regime, m7.sampled_bin
    );
    ensure!(
        [m3.regime, m5.regime, m7.regime] == [Regime::Strict, Regime::Relaxed, Regime::Aliased],
        "regimes wrong; {detail}"
    );
    ensure!(m3.sampled_bin == m3.carrier_bin, "M 3 moved the dominant bin; {detail}");
    ensure!(m5.shift <= 1, "M 5 moved the dominant bin by {} bins; {detail}", m5.shift);
    ensure!(m7.shift > 1, "M 7 kept the dominant bin; {detail}");
    Ok(detail)
}

// ---------------------------------------------------------------- training

fn smoke_data() -> spi3d::Result<Dataset> {
    let specs: Vec<_> = (0..50u64).map(|i| SceneSpec::random(i, 64, 64)).collect();
    let manifest = build_manifest(&specs, 0.5, 1)?;
    let cfg = SynthConfig::default();
    let mut data = Dataset::new(64);
    for e in &manifest.entries {
        data.push_synthesized(e, &synthesize(e, &cfg, 1)?)?;
    }
    Ok(data)
}

fn smoke_config() -> TrainConfig {
    TrainConfig { epochs: 1000, ..TrainConfig::default() }
}

const SMOKE_STEPS: usize = 200;
const SMOOTHING: usize = 10;

fn params_bits(p: &ParamSet<f32>) -> Vec<u32> {
    p.iter().flat_map(|p| p.value.data().iter().map(|v| v.to_bits()).collect::<Vec<_>>()).collect()
}

fn loss_bits(records: &[LossRecord]) -> Vec<u64> {
    records.iter().map(|r| r.loss.to_bits()).collect()
}

fn training_smoke() -> Outcome {
    let data = smoke_data()?;
    let opts = TrainOptions { max_steps: Some(SMOKE_STEPS), ..Default::default() };
    let first = train_end_to_end(&data, &UNetConfig::desk(), &smoke_config(), &opts)?;
    let second = train_end_to_end(&data, &UNetConfig::desk(), &smoke_config(), &opts)?;
    ensure!(first.losses.len() == SMOKE_STEPS, "ran {} steps", first.losses.len());
    let identical = loss_bits(&first.losses) == loss_bits(&second.losses)
        && params_bits(first.unet.params()) == params_bits(second.unet.params());
    let start = initial(&first.losses, SMOOTHING);
    let end = smoothed(&first.losses, SMOOTHING);
    let detail = format!(
        "{} samples; loss {start:.4} -> {end:.4} (ratio {:.3}, need < 0.5); reruns bit-identical: {identical}",
        data.len(),
        end / start
    );
    ensure!(identical, "{detail}");
    ensure!(end < 0.5 * start, "{detail}");
    Ok(detail)
}

fn two_stage_smoke() -> Outcome {
    let data = smoke_data()?;
    let unet = UNetConfig::desk();
    let disc = DiscriminatorConfig::desk();
    let cfg = smoke_config();
    let opts = TrainOptions { max_steps: Some(SMOKE_STEPS), ..Default::default() };
    let out = train_two_stage(&data, &unet, &disc, &unet, &cfg, &opts)?;
    ensure!(out.stage1.len() == SMOKE_STEPS, "ran {} steps", out.stage1.len());
    let start = initial(&out.stage1, SMOOTHING);
    let end = smoothed(&out.stage1, SMOOTHING);
    ensure!(
        out.stage1.iter().all(|r| r.loss_d.is_some_and(f64::is_finite) && r.loss_g.is_some_and(f64::is_finite)),
        "non-finite adversarial loss"
    );
    ensure!(end <= 0.75 * start, "structural term {start:.4} -> {end:.4}, less than a 25% drop");

    // constant score map: weights of the last layer zero, bias fixed
    const BIAS: f32 = 0.25;
    let mut frozen = Discriminator::<f32>::new(disc, cfg.seed)?;
    let last = 2 * (disc.layers - 1);
    frozen.params_mut().get_mut(last).value.data_mut().fill(0.0);
    frozen.params_mut().get_mut(last + 1).value.data_mut().fill(BIAS);
    let before = params_bits(frozen.params());
    let opts = TrainOptions {
        max_steps: Some(20),
        freeze_discriminator: true,
        discriminator: Some(frozen),
    };
    let held = train_two_stage(&data, &unet, &disc, &unet, &cfg, &opts)?;
    let b = BIAS as f64;
    let adversarial = (b - 1.0).powi(2);
    let mut worst: f64 = 0.0;
    for r in &held.stage1 {
        let g = r.loss_g.ok_or("missing generator loss")?;
        worst = worst.max((g - (adversarial + 100.0 * r.loss)).abs() / g.abs());
        ensure!(
            r.loss_d == held.stage1[0].loss_d && r.loss_d == Some(adversarial + b * b),
            "frozen discriminator loss varies: {:?}",
            r.loss_d
        );
    }
    ensure!(worst < 1e-6, "generator loss deviates from constant + 100 x structural term by {worst:e}");
    ensure!(params_bits(held.discriminator.params()) == before, "frozen discriminator changed");
    Ok(format!(
        "structural term {start:.4} -> {end:.4} ({:.0}% drop); frozen check worst relative deviation {worst:.1e}",
        100.0 * (1.0 - end / start)
    ))
}

// ---------------------------------------------------------- active sampling

fn active_vs_random() -> Outcome {
    let scenes = procedural_fringes(20, 7919, 64, (6.0, 8.0), (13.0, 17.0))?;
    let cmp = compare_patterns(&scenes, 4, 7919)?;
    ensure!(
        cmp.active_ssim > cmp.random_ssim,
        "active {:.4} not above random {:.4}",
        cmp.active_ssim,
        cmp.random_ssim
    );

    let mut r = rng(8);
    let mut scenes_checked = 0;
    for n in WINDOW_CELLS {
        for o in [Orientation::Vertical, Orientation::Horizontal] {
            let windows = make_window(n, WindowKind::Rect, o)?;
            let (th, tw) = windows.tile();
            let seq: PatternSequence = make_sequence((SIDE, SIDE), &windows, ScanOrder::Raster)?;
            for _ in 0..5 {
                let blocks = dyadic_image(&mut r, SIDE / th, SIDE / tw);
                let scene = FringeImage::new(blocks.upsample_nearest(th, tw), FringeKind::Continuous)?;
                let low = reorder(&acquire(&scene, &seq)?, &seq, ReorderMode::Raw)?;
                let rec = low.grid().upsample_nearest(th, tw);
                let err = evaluate_grids(&rec, scene.grid())?;
                ensure!(
                    err.max_abs_error == 0.0 && err.mse == 0.0 && &rec == scene.grid(),
                    "N {n} {o:?}: block-constant scene not reconstructed exactly"
                );
                scenes_checked += 1;
            }
        }
    }
    Ok(format!(
        "20 held-out scenes at {:.0}%: active {:.4} vs best random {:.4} (lambda {:e}); {scenes_checked} block-constant scenes exact",
        100.0 * cmp.rate,
        cmp.active_ssim,
        cmp.random_ssim,
        cmp.best_lambda
    ))
}

// ----------------------------------------------------------------- metrics

fn metrics_identities() -> Outcome {
    let mut r = rng(9);
    let mut worst: f64 = 0.0;
    for _ in 0..10 {
        let (h, w) = (r.random_range(8..40), r.random_range(8..40));
        let x = Grid::from_fn(h, w, |_, _| r.random_range(0.2..0.8));
        let c: f64 = r.random_range(-0.2..0.2);
        let shifted = DepthMap::new(x.map(|v| v + c))?;
        let rep = evaluate(&shifted, &DepthMap::new(x)?)?;
        for (got, want) in [(rep.mean_error, c), (rep.mse, c * c), (rep.max_abs_error, c.abs())] {
            worst = worst.max((got - want).abs());
        }
    }
    ensure!(worst < 1e-12, "translation identity off by {worst:e}");
    Ok(format!("10 random translations within {worst:.1e}"))
}

// -------------------------------------------------------------- round trips

fn random_pgm(r: &mut impl Rng, wide: bool) -> PgmImage {
    let (width, height) = (r.random_range(1..48), r.random_range(1..48));
    let maxval: u16 = if wide { r.random_range(256..=u16::MAX) } else { r.random_range(1..=255) };
    PgmImage { width, height, maxval, samples: (0..width * height).map(|_| r.random_range(0..=maxval)).collect() }
}

fn random_f64(r: &mut impl Rng) -> f64 {
    loop {
        let v = match r.random_range(0..3) {
            0 => f64::from_bits(r.random()),
            1 => r.random::<f64>(),
            _ => r.random_range(-1e6..1e6),
        };
        if v.is_finite() {
            return v;
        }
    }
}

fn round_trips() -> Outcome {
    const ARTIFACTS: usize = 50;
    let mut r = rng(10);
    let dir = tempfile::tempdir()?;

    for i in 0..ARTIFACTS {
        for wide in [false, true] {
            let img = random_pgm(&mut r, wide);
            let mut bytes = Vec::new();
            img.write_to(&mut bytes)?;
            let back = PgmImage::read_from(bytes.as_slice())?;
            ensure!(back == img, "PGM {i} ({} bit) changed", if wide { 16 } else { 8 });
            let path = dir.path().join(format!("img{i}_{wide}.pgm"));
            img.save(&path)?;
            ensure!(PgmImage::load(&path)? == img, "PGM file {i} changed");
            ensure!(PgmImage::from_grid(&img.to_grid(), img.maxval) == img, "PGM {i} grid conversion not stable");
        }

        let depth = DepthMap::new(Grid::from_fn(r.random_range(8..32), r.random_range(8..32), |_, _| {
            r.random_range(0..=u16::MAX) as f64 / u16::MAX as f64
        }))?;
        let path = dir.path().join(format!("depth{i}.pgm"));
        save_depth(&depth, &path)?;
        ensure!(load_depth(&path)? == depth, "16-bit depth {i} changed");

        let trace = SignalTrace::new((0..r.random_range(0..200)).map(|_| random_f64(&mut r)).collect(), 0.25);
        let mut bytes = Vec::new();
        write_trace(&trace, &mut bytes)?;
        let back = read_trace(bytes.as_slice())?;
        ensure!(
            back.iter().map(|v| v.to_bits()).eq(trace.values.iter().map(|v| v.to_bits())),
            "trace CSV {i} changed"
        );

        let adversarial = r.random::<bool>();
        let records: Vec<LossRecord> = (0..r.random_range(0..50))
            .map(|s| LossRecord {
                step: s + 1,
                epoch: s / 7,
                loss: random_f64(&mut r),
                loss_d: adversarial.then(|| random_f64(&mut r)),
                loss_g: adversarial.then(|| random_f64(&mut r)),
            })
            .collect();
        let mut bytes = Vec::new();
        write_losses(&records, &mut bytes)?;
        ensure!(read_losses(bytes.as_slice())? == records, "loss CSV {i} changed");

        let mut kv = KeyValues::default();
        for k in 0..r.random_range(0..8) {
            kv.set(&format!("key_{k}"), random_f64(&mut r));
        }
        ensure!(KeyValues::parse(&kv.render())? == kv, "config file {i} changed");

        let specs: Vec<_> = (0..r.random_range(1..12)).map(|_| SceneSpec::random(r.random(), 64, 64)).collect();
        let manifest = build_manifest(&specs, r.random_range(0.1..0.9), r.random())?;
        let text = manifest.to_json()?;
        let back = DatasetManifest::from_json(&text)?;
        ensure!(back == manifest && back.to_json()? == text, "manifest JSON {i} changed");

        let (n, layout, order) = layouts()[r.random_range(0..layouts().len())];
        let seq = make_sequence((SIDE, SIDE), &window_set(n, layout)?, order)?;
        let text = seq.to_json()?;
        let back = PatternSequence::from_json(&text)?;
        ensure!(back == seq && back.to_json()? == text, "sequence JSON {i} changed");

        let samples: Vec<SampleReport> = (0..r.random_range(1..10))
            .map(|id| SampleReport {
                id,
                rate: [0.5, 0.25, 0.0625][id % 3],
                mean_error: random_f64(&mut r),
                mse: r.random(),
                max_abs_error: r.random(),
                ssim: r.random(),
            })
            .collect();
        let report = EvalReport::aggregate(samples)?;
        let text = report.to_json()?;
        let back = EvalReport::from_json(&text)?;
        ensure!(back == report && back.to_json()? == text, "report JSON {i} changed");

        let mut params = ParamSet::<f32>::new();
        for p in 0..r.random_range(1..6) {
            let shape: Vec<usize> = (0..r.random_range(1..=4)).map(|_| r.random_range(1..5)).collect();
            params.push(format!("layer{p}.weight"), Tensor::from_fn(shape, |_| f32::from_bits(r.random())));
        }
        let ckpt = Checkpoint::from_params(&params);
        let mut bytes = Vec::new();
        ckpt.write_to(&mut bytes)?;
        let back = Checkpoint::read_from(bytes.as_slice())?;
        let mut again = Vec::new();
        back.write_to(&mut again)?;
        ensure!(again == bytes, "checkpoint {i} bytes changed");
        let path = dir.path().join(format!("ckpt{i}.spx"));
        ckpt.save(&path)?;
        let mut restored = params.clone();
        for p in restored.iter_mut() {
            p.value.data_mut().fill(0.0);
        }
        Checkpoint::load(&path)?.restore(&mut restored)?;
        ensure!(params_bits(&restored) == params_bits(&params), "checkpoint {i} values changed");
    }
    Ok(format!(
        "{ARTIFACTS} each of PGM 8/16 bit, depth PGM, trace and loss CSV, config, manifest/sequence/report JSON, checkpoint"
    ))
}
