//! Binary checkpoint format.
//!
//! ```text
//! magic    4 bytes   "SPX1"
//! version  u32 LE    1
//! count    u32 LE    number of parameter records
//! record:
//!   name_len u32 LE, name (UTF-8, name_len bytes)
//!   rank     u32 LE, dims (rank x u32 LE)
//!   values   prod(dims) x f32 LE
//! ```

use std::io::{Read, Write};
use std::path::Path;

use crate::error::{Result, TensorError};
use crate::{ParamSet, Scalar, Tensor};

pub const MAGIC: &[u8; 4] = b"SPX1";
pub const VERSION: u32 = 1;

/// A decoded checkpoint: named tensors in file order.
#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    pub entries: Vec<(String, Tensor<f32>)>,
}

impl Checkpoint {
    pub fn from_params<S: Scalar>(params: &ParamSet<S>) -> Self {
        Self {
            entries: params
                .iter()
                .map(|p| (p.name.clone(), p.value.cast::<f32>()))
                .collect(),
        }
    }

    pub fn write_to(&self, mut w: impl Write) -> Result<()> {
        w.write_all(MAGIC)?;
        w.write_all(&VERSION.to_le_bytes())?;
        w.write_all(&u32_of(self.entries.len())?.to_le_bytes())?;
        for (name, t) in &self.entries {
            w.write_all(&u32_of(name.len())?.to_le_bytes())?;
            w.write_all(name.as_bytes())?;
            w.write_all(&u32_of(t.shape().len())?.to_le_bytes())?;
            for &d in t.shape() {
                w.write_all(&u32_of(d)?.to_le_bytes())?;
            }
            let mut buf = Vec::with_capacity(t.len() * 4);
            for v in t.data() {
                buf.extend_from_slice(&v.to_le_bytes());
            }
            w.write_all(&buf)?;
        }
        Ok(())
    }

    pub fn read_from(mut r: impl Read) -> Result<Self> {
        let mut magic = [0u8; 4];
        r.read_exact(&mut magic)?;
        if &magic != MAGIC {
            return Err(TensorError::Format(format!("bad magic {magic:?}")));
        }
        let version = read_u32(&mut r)?;
        if version != VERSION {
            return Err(TensorError::Format(format!("unsupported version {version}")));
        }
        let count = read_u32(&mut r)? as usize;
        let mut entries = Vec::with_capacity(count.min(4096));
        for _ in 0..count {
            let len = read_u32(&mut r)? as usize;
            let mut name = vec![0u8; len];
            r.read_exact(&mut name)?;
            let name = String::from_utf8(name)
                .map_err(|_| TensorError::Format("parameter name is not UTF-8".into()))?;
            let rank = read_u32(&mut r)? as usize;
            let dims = (0..rank)
                .map(|_| read_u32(&mut r).map(|d| d as usize))
                .collect::<Result<Vec<_>>>()?;
            let numel = dims
                .iter()
                .try_fold(1usize, |acc, &d| acc.checked_mul(d))
                .ok_or_else(|| TensorError::Format(format!("{name}: dims overflow")))?;
            let mut raw = vec![0u8; numel * 4];
            r.read_exact(&mut raw)?;
            let values = raw
                .chunks_exact(4)
                .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]))
                .collect();
            entries.push((name, Tensor::new(dims, values)?));
        }
        Ok(Self { entries })
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut buf = Vec::new();
        self.write_to(&mut buf)?;
        std::fs::write(path, buf)?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let bytes = std::fs::read(path)?;
        Self::read_from(&bytes[..])
    }

    /// Copies values into `params`, which must have identical names and shapes in order.
    pub fn restore<S: Scalar>(&self, params: &mut ParamSet<S>) -> Result<()> {
        if self.entries.len() != params.len() {
            return Err(TensorError::Load(format!(
                "checkpoint has {} tensors, model has {}",
                self.entries.len(),
                params.len()
            )));
        }
        for ((name, t), p) in self.entries.iter().zip(params.iter_mut()) {
            if *name != p.name || t.shape() != p.value.shape() {
                return Err(TensorError::Load(format!(
                    "{name} {:?} does not match {} {:?}",
                    t.shape(),
                    p.name,
                    p.value.shape()
                )));
            }
            p.value = t.cast();
        }
        Ok(())
    }
}

fn u32_of(v: usize) -> Result<u32> {
    u32::try_from(v).map_err(|_| TensorError::Format(format!("{v} exceeds u32")))
}

fn read_u32(r: &mut impl Read) -> Result<u32> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b)?;
    Ok(u32::from_le_bytes(b))
}
