//! Binary model file.
//!
//! ```text
//! magic        4 bytes  "PVLM"
//! version      u32 LE   MODEL_FORMAT_VERSION
//! header_len   u32 LE
//! header       JSON     {config, labels, vocab_hash, scalar}
//! bias         L x f64 LE
//! rows         L x { nnz: u32 LE, nnz x (index: u32 LE, value: f64 LE) }
//! ```
//!
//! Weights are stored sparsely (untouched buckets stay exactly zero) and
//! always as f64, so `f32` models round-trip exactly.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::model::{LinearModel, TrainConfig};
use crate::error::{Error, Result};
use crate::fsio;
use crate::scalar::Real;

pub const MODEL_MAGIC: &[u8; 4] = b"PVLM";
pub const MODEL_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Header {
    config: TrainConfig,
    labels: Vec<String>,
    vocab_hash: String,
    scalar: String,
}

fn scalar_name<T>() -> String {
    std::any::type_name::<T>().to_string()
}

pub fn encode_model<T: Real>(model: &LinearModel<T>) -> Result<Vec<u8>> {
    let header = serde_json::to_vec(&Header {
        config: model.config,
        labels: model.labels.clone(),
        vocab_hash: model.vocab_hash.clone(),
        scalar: scalar_name::<T>(),
    })?;
    let mut out = Vec::with_capacity(16 + header.len());
    out.extend_from_slice(MODEL_MAGIC);
    out.extend_from_slice(&MODEL_FORMAT_VERSION.to_le_bytes());
    out.extend_from_slice(&(header.len() as u32).to_le_bytes());
    out.extend_from_slice(&header);
    for b in &model.bias {
        out.extend_from_slice(&b.to_f64_lossy().to_le_bytes());
    }
    for row in model.weights.chunks(model.dim()) {
        let nz: Vec<(usize, f64)> = row
            .iter()
            .enumerate()
            .filter(|(_, w)| !w.is_zero())
            .map(|(j, w)| (j, w.to_f64_lossy()))
            .collect();
        out.extend_from_slice(&(nz.len() as u32).to_le_bytes());
        for (j, w) in nz {
            out.extend_from_slice(&(j as u32).to_le_bytes());
            out.extend_from_slice(&w.to_le_bytes());
        }
    }
    Ok(out)
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self
            .pos
            .checked_add(n)
            .filter(|&e| e <= self.buf.len())
            .ok_or_else(|| Error::ModelFormat("truncated file".into()))?;
        let s = &self.buf[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
}

pub fn decode_model<T: Real>(bytes: &[u8]) -> Result<LinearModel<T>> {
    let mut r = Reader { buf: bytes, pos: 0 };
    if r.take(4)? != MODEL_MAGIC {
        return Err(Error::ModelFormat("bad magic; not a model file".into()));
    }
    let version = r.u32()?;
    if version != MODEL_FORMAT_VERSION {
        return Err(Error::ModelFormat(format!(
            "unsupported format version {version} (expected {MODEL_FORMAT_VERSION})"
        )));
    }
    let header_len = r.u32()? as usize;
    let header: Header = serde_json::from_slice(r.take(header_len)?)?;
    header.config.hasher()?;
    let l_count = header.labels.len();
    let dim = header.config.dim;

    let cast = |v: f64| -> Result<T> {
        if !v.is_finite() {
            return Err(Error::ModelFormat("non-finite parameter".into()));
        }
        T::from_f64(v).ok_or_else(|| Error::ModelFormat(format!("value {v} not representable")))
    };

    let mut bias = Vec::with_capacity(l_count);
    for _ in 0..l_count {
        bias.push(cast(r.f64()?)?);
    }
    let mut weights = vec![T::zero(); l_count * dim];
    for l in 0..l_count {
        let nnz = r.u32()? as usize;
        for _ in 0..nnz {
            let j = r.u32()? as usize;
            if j >= dim {
                return Err(Error::ModelFormat(format!(
                    "weight index {j} outside dimension {dim}"
                )));
            }
            weights[l * dim + j] = cast(r.f64()?)?;
        }
    }
    if r.pos != bytes.len() {
        return Err(Error::ModelFormat("trailing bytes after weights".into()));
    }
    Ok(LinearModel {
        config: header.config,
        labels: header.labels,
        vocab_hash: header.vocab_hash,
        weights,
        bias,
    })
}

pub fn save_model<T: Real>(path: &Path, model: &LinearModel<T>) -> Result<()> {
    fsio::write_atomic(path, &encode_model(model)?)
}

pub fn load_model<T: Real>(path: &Path) -> Result<LinearModel<T>> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    let model: LinearModel<T> = decode_model(&bytes)?;
    if model.vocabulary()?.fingerprint() != model.vocab_hash {
        return Err(Error::ModelFormat(
            "stored vocabulary hash does not match stored labels".into(),
        ));
    }
    Ok(model)
}
