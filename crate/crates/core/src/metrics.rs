//! Reconstruction error statistics: mean signed error, mean squared error,
//! largest absolute error and whole-image SSIM, per sample and aggregated.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{DepthMap, Grid};
use crate::manifest::STANDARD_WINDOWS;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SampleReport {
    pub id: usize,
    /// Sampling rate of the input this prediction came from.
    pub rate: f64,
    pub mean_error: f64,
    pub mse: f64,
    pub max_abs_error: f64,
    pub ssim: f64,
}

/// Errors of a sample population. Mean error, MSE and SSIM average over
/// samples; the largest absolute error is the maximum over samples.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub mean_error: f64,
    pub mse: f64,
    pub max_abs_error: f64,
    pub ssim: f64,
    pub count: usize,
    pub samples: Vec<SampleReport>,
}

/// Statistics of `pred - truth` on raw grids; values need not lie in `[0, 1]`.
pub fn evaluate_grids(pred: &Grid, truth: &Grid) -> Result<SampleReport> {
    if pred.dims() != truth.dims() {
        return Err(Error::Shape(format!(
            "prediction {:?} vs truth {:?}",
            pred.dims(),
            truth.dims()
        )));
    }
    let n = pred.data().len() as f64;
    let (mut sum, mut sq, mut max) = (0.0, 0.0, 0.0f64);
    for (&p, &t) in pred.data().iter().zip(truth.data()) {
        let d = p - t;
        sum += d;
        sq += d * d;
        max = max.max(d.abs());
    }
    Ok(SampleReport {
        id: 0,
        rate: 1.0,
        mean_error: sum / n,
        mse: sq / n,
        max_abs_error: max,
        ssim: spi_tensor::global_ssim(pred.data(), truth.data()),
    })
}

pub fn evaluate(pred: &DepthMap, truth: &DepthMap) -> Result<SampleReport> {
    evaluate_grids(pred.grid(), truth.grid())
}

impl EvalReport {
    pub fn aggregate(samples: Vec<SampleReport>) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::Data("no samples to aggregate".into()));
        }
        let n = samples.len() as f64;
        let mean = |f: fn(&SampleReport) -> f64| samples.iter().map(f).sum::<f64>() / n;
        Ok(Self {
            mean_error: mean(|s| s.mean_error),
            mse: mean(|s| s.mse),
            ssim: mean(|s| s.ssim),
            max_abs_error: samples.iter().map(|s| s.max_abs_error).fold(0.0, f64::max),
            count: samples.len(),
            samples,
        })
    }

    /// Report restricted to samples acquired at `rate`, if any.
    pub fn at_rate(&self, rate: f64) -> Option<Self> {
        let subset: Vec<_> = self.samples.iter().filter(|s| same_rate(s.rate, rate)).copied().collect();
        Self::aggregate(subset).ok()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    /// Aligned table with one column per standard sampling rate.
    pub fn table(&self) -> String {
        let cols: Vec<_> = standard_rates().iter().map(|&r| self.at_rate(r)).collect();
        let mut out = header("metric", 14);
        for (name, f) in METRICS {
            let _ = write!(out, "{name:<14}");
            for c in &cols {
                let _ = write!(out, "{:>12}", c.as_ref().map_or("-".into(), |r| format!("{:.6}", f(r))));
            }
            out.push('\n');
        }
        out
    }
}

fn same_rate(a: f64, b: f64) -> bool {
    (a - b).abs() < 1e-9
}

/// Sampling rates of the standard windows, densest first.
pub fn standard_rates() -> [f64; 3] {
    STANDARD_WINDOWS.map(|n| 1.0 / n as f64)
}

fn rate_label(rate: f64) -> String {
    format!("{}%", rate * 100.0)
}

fn header(first: &str, width: usize) -> String {
    let mut out = format!("{first:<width$}");
    for r in standard_rates() {
        let _ = write!(out, "{:>12}", rate_label(r));
    }
    out.push('\n');
    out
}

type Metric = (&'static str, fn(&EvalReport) -> f64);

const METRICS: [Metric; 4] = [
    ("mean_error", |r| r.mean_error),
    ("mse", |r| r.mse),
    ("max_abs_error", |r| r.max_abs_error),
    ("ssim", |r| r.ssim),
];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricDelta {
    pub a: f64,
    pub b: f64,
    /// `b - a`.
    pub delta: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateComparison {
    pub rate: f64,
    pub mean_error: MetricDelta,
    pub mse: MetricDelta,
    pub max_abs_error: MetricDelta,
    pub ssim: MetricDelta,
}

/// Side-by-side comparison of two reports over the same samples.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub overall: RateComparison,
    pub by_rate: Vec<RateComparison>,
}

fn compare_one(rate: f64, a: &EvalReport, b: &EvalReport) -> RateComparison {
    let d = |f: fn(&EvalReport) -> f64| MetricDelta {
        a: f(a),
        b: f(b),
        delta: f(b) - f(a),
    };
    RateComparison {
        rate,
        mean_error: d(|r| r.mean_error),
        mse: d(|r| r.mse),
        max_abs_error: d(|r| r.max_abs_error),
        ssim: d(|r| r.ssim),
    }
}

pub fn compare_reports(a: &EvalReport, b: &EvalReport) -> Result<Comparison> {
    let key = |r: &EvalReport| -> Vec<(usize, u64)> {
        let mut k: Vec<_> = r.samples.iter().map(|s| (s.id, s.rate.to_bits())).collect();
        k.sort_unstable();
        k
    };
    if a.count != b.count || key(a) != key(b) {
        return Err(Error::Consistency(format!(
            "reports cover different samples ({} vs {})",
            a.count, b.count
        )));
    }
    let by_rate = standard_rates()
        .into_iter()
        .filter_map(|r| Some(compare_one(r, &a.at_rate(r)?, &b.at_rate(r)?)))
        .collect();
    Ok(Comparison {
        overall: compare_one(0.0, a, b),
        by_rate,
    })
}

impl Comparison {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// One row per metric and side (`a`, `b`, `b-a`), one column per rate.
    pub fn table(&self) -> String {
        let mut out = header("metric", 20);
        let pick: [(&str, fn(&RateComparison) -> MetricDelta); 4] = [
            ("mean_error", |c| c.mean_error),
            ("mse", |c| c.mse),
            ("max_abs_error", |c| c.max_abs_error),
            ("ssim", |c| c.ssim),
        ];
        for (name, f) in pick {
            for (side, g) in [("a", 0), ("b", 1), ("b-a", 2)] {
                let _ = write!(out, "{:<20}", format!("{name} {side}"));
                for r in standard_rates() {
                    let cell = self
                        .by_rate
                        .iter()
                        .find(|c| same_rate(c.rate, r))
                        .map(|c| {
                            let m = f(c);
                            format!("{:.6}", [m.a, m.b, m.delta][g])
                        })
                        .unwrap_or_else(|| "-".into());
                    let _ = write!(out, "{cell:>12}");
                }
                out.push('\n');
            }
        }
        out
    }
}
