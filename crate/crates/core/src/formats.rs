//! On-disk formats: binary PGM images, CSV traces and loss curves, and flat
//! `key = value` configuration files.

use std::collections::BTreeMap;
use std::fs;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::detector::SignalTrace;
use crate::error::{Error, Result};
use crate::grid::{DepthMap, FringeImage, FringeKind, Grid};

/// Raw samples of a binary (P5) PGM image.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PgmImage {
    pub width: usize,
    pub height: usize,
    pub maxval: u16,
    pub samples: Vec<u16>,
}

impl PgmImage {
    /// Quantizes `[0, 1]` values to `round(v * maxval)`.
    pub fn from_grid(grid: &Grid, maxval: u16) -> Self {
        let m = maxval as f64;
        Self {
            width: grid.width(),
            height: grid.height(),
            maxval,
            samples: grid
                .data()
                .iter()
                .map(|&v| (v.clamp(0.0, 1.0) * m).round() as u16)
                .collect(),
        }
    }

    pub fn to_grid(&self) -> Grid {
        let m = self.maxval as f64;
        Grid::from_fn(self.height, self.width, |r, c| {
            self.samples[r * self.width + c] as f64 / m
        })
    }

    pub fn write_to(&self, mut w: impl Write) -> Result<()> {
        if self.maxval == 0 || self.samples.len() != self.width * self.height {
            return Err(Error::Format("PGM samples do not match header".into()));
        }
        write!(w, "P5\n{} {}\n{}\n", self.width, self.height, self.maxval)?;
        let bytes: Vec<u8> = if self.maxval < 256 {
            self.samples.iter().map(|&s| s as u8).collect()
        } else {
            self.samples.iter().flat_map(|s| s.to_be_bytes()).collect()
        };
        w.write_all(&bytes)?;
        Ok(())
    }

    pub fn read_from(mut r: impl Read) -> Result<Self> {
        let mut buf = Vec::new();
        r.read_to_end(&mut buf)?;
        let mut pos = 0;
        let mut tokens = Vec::with_capacity(4);
        while tokens.len() < 4 {
            while pos < buf.len() && (buf[pos].is_ascii_whitespace() || buf[pos] == b'#') {
                if buf[pos] == b'#' {
                    while pos < buf.len() && buf[pos] != b'\n' {
                        pos += 1;
                    }
                } else {
                    pos += 1;
                }
            }
            let start = pos;
            while pos < buf.len() && !buf[pos].is_ascii_whitespace() {
                pos += 1;
            }
            if start == pos {
                return Err(Error::Format("truncated PGM header".into()));
            }
            tokens.push(String::from_utf8_lossy(&buf[start..pos]).into_owned());
        }
        if tokens[0] != "P5" {
            return Err(Error::Format(format!("expected P5 magic, got `{}`", tokens[0])));
        }
        let num = |t: &str| -> Result<usize> {
            t.parse()
                .map_err(|_| Error::Format(format!("bad PGM header field `{t}`")))
        };
        let (width, height, maxval) = (num(&tokens[1])?, num(&tokens[2])?, num(&tokens[3])?);
        if maxval == 0 || maxval > 65535 {
            return Err(Error::Format(format!("PGM maxval {maxval} out of range")));
        }
        // exactly one whitespace byte separates the header from the raster
        pos += 1;
        let wide = maxval > 255;
        let need = width * height * if wide { 2 } else { 1 };
        let raster = buf
            .get(pos..pos + need)
            .ok_or_else(|| Error::Format("truncated PGM raster".into()))?;
        let samples = if wide {
            raster
                .chunks_exact(2)
                .map(|b| u16::from_be_bytes([b[0], b[1]]))
                .collect()
        } else {
            raster.iter().map(|&b| b as u16).collect()
        };
        Ok(Self {
            width,
            height,
            maxval: maxval as u16,
            samples,
        })
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut bytes = Vec::new();
        self.write_to(&mut bytes)?;
        fs::write(path, bytes)?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::read_from(fs::File::open(path)?)
    }
}

/// Depth maps are stored as 16-bit PGM.
pub fn save_depth(depth: &DepthMap, path: impl AsRef<Path>) -> Result<()> {
    PgmImage::from_grid(depth.grid(), u16::MAX).save(path)
}

pub fn load_depth(path: impl AsRef<Path>) -> Result<DepthMap> {
    DepthMap::new(PgmImage::load(path)?.to_grid())
}

/// Intensity images are stored as 8-bit PGM.
pub fn save_intensity(grid: &Grid, path: impl AsRef<Path>) -> Result<()> {
    PgmImage::from_grid(grid, 255).save(path)
}

pub fn load_fringe(path: impl AsRef<Path>, kind: FringeKind) -> Result<FringeImage> {
    FringeImage::new(PgmImage::load(path)?.to_grid(), kind)
}

#[derive(Debug, Serialize, Deserialize)]
struct TraceRow {
    index: usize,
    value: f64,
}

pub fn write_trace(trace: &SignalTrace, w: impl Write) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    for (index, &value) in trace.values.iter().enumerate() {
        out.serialize(TraceRow { index, value }).map_err(csv_err)?;
    }
    out.flush()?;
    Ok(())
}

/// Reads `index,value` rows; rate and metadata are not part of the file.
pub fn read_trace(r: impl Read) -> Result<Vec<f64>> {
    let mut values = Vec::new();
    for (i, row) in csv::Reader::from_reader(r).deserialize::<TraceRow>().enumerate() {
        let row = row.map_err(csv_err)?;
        if row.index != i {
            return Err(Error::Format(format!("trace row {i} has index {}", row.index)));
        }
        values.push(row.value);
    }
    Ok(values)
}

pub fn save_trace(trace: &SignalTrace, path: impl AsRef<Path>) -> Result<()> {
    write_trace(trace, fs::File::create(path)?)
}

pub fn load_trace(path: impl AsRef<Path>) -> Result<Vec<f64>> {
    read_trace(fs::File::open(path)?)
}

/// One row of a training loss curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LossRecord {
    pub step: usize,
    pub epoch: usize,
    pub loss: f64,
    #[serde(default)]
    pub loss_d: Option<f64>,
    #[serde(default)]
    pub loss_g: Option<f64>,
}

/// Writes `step,epoch,loss` or, when any record carries adversarial terms,
/// `step,epoch,loss,loss_d,loss_g`.
pub fn write_losses(records: &[LossRecord], w: impl Write) -> Result<()> {
    let adversarial = records.iter().any(|r| r.loss_d.is_some() || r.loss_g.is_some());
    let mut out = csv::Writer::from_writer(w);
    let mut header = vec!["step", "epoch", "loss"];
    if adversarial {
        header.extend(["loss_d", "loss_g"]);
    }
    out.write_record(&header).map_err(csv_err)?;
    for r in records {
        let mut row = vec![r.step.to_string(), r.epoch.to_string(), r.loss.to_string()];
        if adversarial {
            let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
            row.extend([opt(r.loss_d), opt(r.loss_g)]);
        }
        out.write_record(&row).map_err(csv_err)?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_losses(r: impl Read) -> Result<Vec<LossRecord>> {
    csv::Reader::from_reader(r)
        .deserialize()
        .map(|row| row.map_err(csv_err))
        .collect()
}

pub fn save_losses(records: &[LossRecord], path: impl AsRef<Path>) -> Result<()> {
    write_losses(records, fs::File::create(path)?)
}

fn csv_err(e: csv::Error) -> Error {
    Error::Format(e.to_string())
}

/// Flat `key = value` file; `#` starts a comment line.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct KeyValues(pub BTreeMap<String, String>);

impl KeyValues {
    pub fn parse(text: &str) -> Result<Self> {
        let mut map = BTreeMap::new();
        for (n, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| {
                Error::Config(format!("line {}: expected `key = value`", n + 1))
            })?;
            let k = k.trim();
            if k.is_empty() {
                return Err(Error::Config(format!("line {}: empty key", n + 1)));
            }
            if map.insert(k.to_string(), v.trim().to_string()).is_some() {
                return Err(Error::Config(format!("line {}: duplicate key `{k}`", n + 1)));
            }
        }
        Ok(Self(map))
    }

    pub fn read(r: impl Read) -> Result<Self> {
        let mut text = String::new();
        for line in BufReader::new(r).lines() {
            text.push_str(&line?);
            text.push('\n');
        }
        Self::parse(&text)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::parse(&fs::read_to_string(path)?)
    }

    pub fn render(&self) -> String {
        self.0.iter().map(|(k, v)| format!("{k} = {v}\n")).collect()
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        fs::write(path, self.render())?;
        Ok(())
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.0.get(key).map(String::as_str)
    }

    pub fn set(&mut self, key: &str, value: impl ToString) {
        self.0.insert(key.to_string(), value.to_string());
    }

    /// Parses `key` if present.
    pub fn parsed<T: std::str::FromStr>(&self, key: &str) -> Result<Option<T>> {
        self.get(key)
            .map(|v| {
                v.parse()
                    .map_err(|_| Error::Config(format!("cannot parse `{key}` value `{v}`")))
            })
            .transpose()
    }

    /// Fails on any key outside `allowed`.
    pub fn check_keys(&self, allowed: &[&str]) -> Result<()> {
        match self.0.keys().find(|k| !allowed.contains(&k.as_str())) {
            Some(k) => Err(Error::Config(format!("unknown key `{k}`"))),
            None => Ok(()),
        }
    }
}
