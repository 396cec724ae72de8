//! `FCVT` tensor files.
//!
//! ```text
//! "FCVT" | version u8 | kind u8 (0 frequency, 1 temporal) | fbs_k u8 | ndim u8
//!        | dims u32 × ndim (big-endian) | meta_len u16 (big-endian) | meta JSON
//!        | values f32 little-endian, row-major
//! ```

use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::sample::StreamKind;
use crate::error::{Error, Result};
use crate::tensor::Tensor3;

pub const MAGIC: &[u8; 4] = b"FCVT";
pub const VERSION: u8 = 1;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize, Default)]
pub struct ExportMeta {
    pub video_id: String,
    pub frame_indices: Vec<u32>,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TensorRecord {
    pub kind: StreamKind,
    /// Bands per channel for frequency tensors, 0 for temporal ones.
    pub fbs_k: u8,
    pub dims: Vec<u32>,
    pub meta: ExportMeta,
    pub values: Vec<f32>,
}

impl TensorRecord {
    /// Stacks equally shaped tensors into one `(n, h, w, c)` record.
    pub fn stack(
        kind: StreamKind,
        fbs_k: u8,
        tensors: &[Tensor3<f32>],
        meta: ExportMeta,
    ) -> Result<Self> {
        let first = tensors
            .first()
            .ok_or_else(|| Error::param("nothing to export"))?;
        let shape = first.shape();
        let mut values = Vec::with_capacity(tensors.len() * first.data().len());
        for t in tensors {
            if t.shape() != shape {
                return Err(Error::param(format!(
                    "shape {:?} differs from {shape:?}",
                    t.shape()
                )));
            }
            values.extend_from_slice(t.data());
        }
        let dims = [tensors.len(), shape.0, shape.1, shape.2]
            .iter()
            .map(|&d| u32::try_from(d).map_err(|_| Error::param("dimension exceeds u32")))
            .collect::<Result<_>>()?;
        Ok(Self {
            kind,
            fbs_k,
            dims,
            meta,
            values,
        })
    }

    /// Splits an `(n, h, w, c)` record back into tensors.
    pub fn unstack(&self) -> Result<Vec<Tensor3<f32>>> {
        let [n, h, w, c] = self.dims[..] else {
            return Err(Error::Format(format!(
                "expected 4 dims, found {}",
                self.dims.len()
            )));
        };
        let (h, w, c) = (h as usize, w as usize, c as usize);
        if n == 0 {
            return Ok(Vec::new());
        }
        self.values
            .chunks_exact(h * w * c)
            .map(|chunk| Tensor3::new(h, w, c, chunk.to_vec()))
            .collect()
    }

    pub fn element_count(&self) -> usize {
        self.dims.iter().map(|&d| d as usize).product()
    }

    pub fn header_len(&self) -> Result<usize> {
        Ok(8 + 4 * self.dims.len() + 2 + self.meta_json()?.len())
    }

    fn meta_json(&self) -> Result<Vec<u8>> {
        serde_json::to_vec(&self.meta).map_err(|e| Error::Format(e.to_string()))
    }

    pub fn to_bytes(&self) -> Result<Vec<u8>> {
        if self.element_count() != self.values.len() {
            return Err(Error::param(format!(
                "{} values for dims {:?}",
                self.values.len(),
                self.dims
            )));
        }
        let ndim =
            u8::try_from(self.dims.len()).map_err(|_| Error::param("too many dimensions"))?;
        let meta = self.meta_json()?;
        let meta_len =
            u16::try_from(meta.len()).map_err(|_| Error::param("metadata exceeds 65535 bytes"))?;
        let mut out = Vec::with_capacity(self.header_len()? + 4 * self.values.len());
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&[VERSION, self.kind.code(), self.fbs_k, ndim]);
        for d in &self.dims {
            out.extend_from_slice(&d.to_be_bytes());
        }
        out.extend_from_slice(&meta_len.to_be_bytes());
        out.extend_from_slice(&meta);
        for v in &self.values {
            out.extend_from_slice(&v.to_le_bytes());
        }
        Ok(out)
    }

    pub fn from_bytes(b: &[u8]) -> Result<Self> {
        let need = |n: usize, what: &str| {
            if b.len() < n {
                Err(Error::Format(format!(
                    "file ends inside the {what} ({} of {n} bytes)",
                    b.len()
                )))
            } else {
                Ok(())
            }
        };
        need(8, "header")?;
        if &b[..4] != MAGIC {
            return Err(Error::Format(format!("bad magic {:?}", &b[..4])));
        }
        if b[4] != VERSION {
            return Err(Error::Format(format!("unsupported version {}", b[4])));
        }
        let kind = StreamKind::from_code(b[5])
            .ok_or_else(|| Error::Format(format!("unknown stream kind {}", b[5])))?;
        let (fbs_k, ndim) = (b[6], b[7] as usize);
        let mut p = 8;
        need(p + 4 * ndim + 2, "dimensions")?;
        let dims: Vec<u32> = (0..ndim)
            .map(|i| u32::from_be_bytes(b[p + 4 * i..p + 4 * i + 4].try_into().unwrap()))
            .collect();
        p += 4 * ndim;
        let meta_len = u16::from_be_bytes([b[p], b[p + 1]]) as usize;
        p += 2;
        need(p + meta_len, "metadata")?;
        let meta: ExportMeta = serde_json::from_slice(&b[p..p + meta_len])
            .map_err(|e| Error::Format(format!("metadata: {e}")))?;
        p += meta_len;
        let count: usize = dims.iter().map(|&d| d as usize).product();
        let payload = &b[p..];
        if payload.len() != 4 * count {
            return Err(Error::Format(format!(
                "payload holds {} bytes, dims {dims:?} need {}",
                payload.len(),
                4 * count
            )));
        }
        let values = payload
            .chunks_exact(4)
            .map(|c| f32::from_le_bytes(c.try_into().unwrap()))
            .collect();
        Ok(Self {
            kind,
            fbs_k,
            dims,
            meta,
            values,
        })
    }
}

/// Writes through a temporary file in the target directory, then renames.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| Error::Io(e.error))?;
    Ok(())
}

pub fn export(record: &TensorRecord, path: &Path) -> Result<()> {
    write_atomic(path, &record.to_bytes()?)
}

pub fn import(path: &Path) -> Result<TensorRecord> {
    TensorRecord::from_bytes(&std::fs::read(path)?)
}
