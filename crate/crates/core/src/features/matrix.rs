//! Feature matrices and their `WPDF` on-disk format.
//!
//! Layout, all integers little-endian:
//!
//! ```text
//! "WPDF" | version u16 | rows u32 | cols u32
//! rows × cols f64 (row-major)
//! rows × u8 label (0 normal, 1 abnormal, 255 unlabeled)
//! rows × (u32 byte length, UTF-8 recording id)
//! ```

use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::FeatureError;
use crate::signal_io::ClassLabel;

const MAGIC: &[u8; 4] = b"WPDF";
pub const WPDF_VERSION: u16 = 1;
const UNLABELED: u8 = 255;

/// Rows of aggregated feature vectors with their ids and labels.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    pub cols: usize,
    pub ids: Vec<String>,
    pub labels: Vec<Option<ClassLabel>>,
    /// Row-major, `ids.len() * cols` values.
    pub data: Vec<f64>,
}

impl FeatureMatrix {
    pub fn new(cols: usize) -> Self {
        Self {
            cols,
            ids: Vec::new(),
            labels: Vec::new(),
            data: Vec::new(),
        }
    }

    pub fn rows(&self) -> usize {
        self.ids.len()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn push_row(
        &mut self,
        id: impl Into<String>,
        label: Option<ClassLabel>,
        values: &[f64],
    ) -> Result<(), FeatureError> {
        if values.len() != self.cols {
            return Err(FeatureError::WrongLength {
                expected: self.cols,
                found: values.len(),
            });
        }
        self.ids.push(id.into());
        self.labels.push(label);
        self.data.extend_from_slice(values);
        Ok(())
    }

    pub fn position(&self, id: &str) -> Option<usize> {
        self.ids.iter().position(|x| x == id)
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(14 + self.data.len() * 8 + self.rows() * 16);
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&WPDF_VERSION.to_le_bytes());
        out.extend_from_slice(&(self.rows() as u32).to_le_bytes());
        out.extend_from_slice(&(self.cols as u32).to_le_bytes());
        for v in &self.data {
            out.extend_from_slice(&v.to_le_bytes());
        }
        for l in &self.labels {
            out.push(l.map_or(UNLABELED, ClassLabel::as_u8));
        }
        for id in &self.ids {
            out.extend_from_slice(&(id.len() as u32).to_le_bytes());
            out.extend_from_slice(id.as_bytes());
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, FeatureError> {
        let mut r = Cursor { bytes, pos: 0 };
        if r.take(4)? != MAGIC {
            return Err(FeatureError::Format("bad magic, not a WPDF file".into()));
        }
        let version = u16::from_le_bytes(r.array()?);
        if version != WPDF_VERSION {
            return Err(FeatureError::Format(format!(
                "unsupported WPDF version {version}"
            )));
        }
        let rows = u32::from_le_bytes(r.array()?) as usize;
        let cols = u32::from_le_bytes(r.array()?) as usize;
        let n = rows
            .checked_mul(cols)
            .ok_or_else(|| FeatureError::Format("row/column count overflow".into()))?;
        let raw = r.take(n.checked_mul(8).ok_or_else(|| FeatureError::Format("size overflow".into()))?)?;
        let data = raw
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
            .collect();
        let labels = r
            .take(rows)?
            .iter()
            .map(|&b| match b {
                UNLABELED => Ok(None),
                b => ClassLabel::from_u8(b)
                    .map(Some)
                    .ok_or_else(|| FeatureError::Format(format!("bad label byte {b}"))),
            })
            .collect::<Result<Vec<_>, _>>()?;
        let mut ids = Vec::with_capacity(rows);
        for _ in 0..rows {
            let len = u32::from_le_bytes(r.array()?) as usize;
            let s = std::str::from_utf8(r.take(len)?)
                .map_err(|_| FeatureError::Format("recording id is not UTF-8".into()))?;
            ids.push(s.to_string());
        }
        if r.pos != bytes.len() {
            return Err(FeatureError::Format("trailing bytes after id table".into()));
        }
        Ok(FeatureMatrix {
            cols,
            ids,
            labels,
            data,
        })
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<(), FeatureError> {
        let path = path.as_ref();
        std::fs::write(path, self.to_bytes()).map_err(|source| FeatureError::Io {
            path: path.to_path_buf(),
            source,
        })
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self, FeatureError> {
        let path = path.as_ref();
        let bytes = std::fs::read(path).map_err(|source| FeatureError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_bytes(&bytes)
    }

    /// Human-readable export: `id,label,f0,f1,…` with one row per recording.
    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<(), FeatureError> {
        let path = path.as_ref();
        let io = |source| FeatureError::Io {
            path: path.to_path_buf(),
            source,
        };
        let mut out = std::io::BufWriter::new(std::fs::File::create(path).map_err(io)?);
        let mut header = String::from("id,label");
        for c in 0..self.cols {
            header.push_str(&format!(",f{c}"));
        }
        writeln!(out, "{header}").map_err(io)?;
        for i in 0..self.rows() {
            let label = self.labels[i].map_or("", ClassLabel::as_str);
            write!(out, "{},{}", self.ids[i], label).map_err(io)?;
            for v in self.row(i) {
                write!(out, ",{v}").map_err(io)?;
            }
            writeln!(out).map_err(io)?;
        }
        out.flush().map_err(io)
    }
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8], FeatureError> {
        let end = self
            .pos
            .checked_add(n)
            .filter(|&e| e <= self.bytes.len())
            .ok_or_else(|| FeatureError::Format("file truncated".into()))?;
        let s = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn array<const N: usize>(&mut self) -> Result<[u8; N], FeatureError> {
        Ok(self.take(N)?.try_into().unwrap())
    }
}

/// Per-column standardization fitted on a training matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureScaler {
    pub mean: Vec<f64>,
    pub scale: Vec<f64>,
}

impl FeatureScaler {
    pub fn fit(m: &FeatureMatrix) -> Result<Self, FeatureError> {
        if m.rows() == 0 {
            return Err(FeatureError::EmptyInput);
        }
        let n = m.rows() as f64;
        let mut mean = vec![0.0; m.cols];
        for i in 0..m.rows() {
            for (acc, v) in mean.iter_mut().zip(m.row(i)) {
                *acc += v;
            }
        }
        mean.iter_mut().for_each(|v| *v /= n);
        let mut var = vec![0.0; m.cols];
        for i in 0..m.rows() {
            for ((acc, v), mu) in var.iter_mut().zip(m.row(i)).zip(&mean) {
                *acc += (v - mu) * (v - mu);
            }
        }
        let scale = var
            .into_iter()
            .map(|v| {
                let sd = (v / n).sqrt();
                if sd < super::NORMALIZE_EPS {
                    1.0
                } else {
                    sd
                }
            })
            .collect();
        Ok(Self { mean, scale })
    }

    pub fn transform(&self, m: &mut FeatureMatrix) -> Result<(), FeatureError> {
        if m.cols != self.mean.len() {
            return Err(FeatureError::WrongLength {
                expected: self.mean.len(),
                found: m.cols,
            });
        }
        for row in m.data.chunks_exact_mut(m.cols) {
            for ((v, mu), s) in row.iter_mut().zip(&self.mean).zip(&self.scale) {
                *v = (*v - mu) / s;
            }
        }
        Ok(())
    }
}
