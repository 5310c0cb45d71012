//! `WPDM` model files.
//!
//! ```text
//! "WPDM" | version u16 | header_len u32 | header (UTF-8 JSON)
//! base_margin f64 | n_trees u32
//! per tree: n_nodes u32, then 8 × 64-bit words per node
//!   tag (0 split, NaN left | 2 split, NaN right | 1 leaf), feature, bin,
//!   threshold f64, left, right, value f64 (split gain or leaf weight), count
//! CRC32 of everything above, u32
//! ```
//!
//! All integers and floats are little-endian.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{BinMap, GbdtError, GbdtModel, Node, Tree, TrainParams};

const MAGIC: &[u8; 4] = b"WPDM";
pub const MODEL_VERSION: u16 = 1;
const TAG_SPLIT_LEFT: u64 = 0;
const TAG_LEAF: u64 = 1;
const TAG_SPLIT_RIGHT: u64 = 2;

#[derive(Serialize, Deserialize)]
struct Header {
    params: TrainParams,
    bin_map: BinMap,
    feature_count: usize,
}

fn corrupt(msg: impl Into<String>) -> GbdtError {
    GbdtError::CorruptModelFile(msg.into())
}

pub fn model_to_bytes(model: &GbdtModel) -> Vec<u8> {
    let header = serde_json::to_vec(&Header {
        params: model.params.clone(),
        bin_map: model.bin_map.clone(),
        feature_count: model.feature_count,
    })
    .expect("model header serializes");
    let mut out = Vec::new();
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&MODEL_VERSION.to_le_bytes());
    out.extend_from_slice(&(header.len() as u32).to_le_bytes());
    out.extend_from_slice(&header);
    out.extend_from_slice(&model.base_margin.to_le_bytes());
    out.extend_from_slice(&(model.trees.len() as u32).to_le_bytes());
    for tree in &model.trees {
        out.extend_from_slice(&(tree.nodes.len() as u32).to_le_bytes());
        for node in &tree.nodes {
            let words: [u64; 8] = match *node {
                Node::Split {
                    feature,
                    bin,
                    threshold,
                    default_left,
                    left,
                    right,
                    gain,
                    count,
                } => [
                    if default_left { TAG_SPLIT_LEFT } else { TAG_SPLIT_RIGHT },
                    feature as u64,
                    bin as u64,
                    threshold.to_bits(),
                    left as u64,
                    right as u64,
                    gain.to_bits(),
                    count as u64,
                ],
                Node::Leaf { weight, count } => {
                    [TAG_LEAF, 0, 0, 0, 0, 0, weight.to_bits(), count as u64]
                }
            };
            for w in words {
                out.extend_from_slice(&w.to_le_bytes());
            }
        }
    }
    let crc = crc32fast::hash(&out);
    out.extend_from_slice(&crc.to_le_bytes());
    out
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8], GbdtError> {
        let end = self
            .pos
            .checked_add(n)
            .filter(|&e| e <= self.bytes.len())
            .ok_or_else(|| corrupt("unexpected end of data"))?;
        let s = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn u32(&mut self) -> Result<u32, GbdtError> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn u64(&mut self) -> Result<u64, GbdtError> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
}

fn index(word: u64, what: &str) -> Result<usize, GbdtError> {
    usize::try_from(word).map_err(|_| corrupt(format!("{what} out of range")))
}

pub fn model_from_bytes(bytes: &[u8]) -> Result<GbdtModel, GbdtError> {
    if bytes.len() < 6 || &bytes[..4] != MAGIC {
        return Err(corrupt("missing WPDM magic"));
    }
    let version = u16::from_le_bytes([bytes[4], bytes[5]]);
    if version != MODEL_VERSION {
        return Err(GbdtError::UnsupportedVersion {
            found: version,
            supported: MODEL_VERSION,
        });
    }
    if bytes.len() < 10 {
        return Err(corrupt("file too short"));
    }
    let (body, trailer) = bytes.split_at(bytes.len() - 4);
    if crc32fast::hash(body) != u32::from_le_bytes(trailer.try_into().unwrap()) {
        return Err(corrupt("checksum mismatch"));
    }
    let mut r = Reader { bytes: body, pos: 6 };
    let header_len = r.u32()? as usize;
    let header: Header = serde_json::from_slice(r.take(header_len)?)
        .map_err(|e| corrupt(format!("bad header: {e}")))?;
    header
        .params
        .validate()
        .map_err(|e| corrupt(format!("bad parameters: {e}")))?;
    if header.bin_map.n_features() != header.feature_count {
        return Err(corrupt("bin map width differs from feature count"));
    }
    let base_margin = f64::from_bits(r.u64()?);
    let n_trees = r.u32()? as usize;
    let mut trees = Vec::with_capacity(n_trees.min(1 << 16));
    for _ in 0..n_trees {
        let n_nodes = r.u32()? as usize;
        if n_nodes == 0 {
            return Err(corrupt("tree without nodes"));
        }
        let mut nodes = Vec::with_capacity(n_nodes.min(1 << 16));
        for i in 0..n_nodes {
            let mut w = [0u64; 8];
            for slot in &mut w {
                *slot = r.u64()?;
            }
            let count = index(w[7], "count")?;
            let node = match w[0] {
                TAG_LEAF => Node::Leaf {
                    weight: f64::from_bits(w[6]),
                    count,
                },
                TAG_SPLIT_LEFT | TAG_SPLIT_RIGHT => {
                    let feature = index(w[1], "feature")?;
                    let (left, right) = (index(w[4], "child")?, index(w[5], "child")?);
                    if feature >= header.feature_count {
                        return Err(corrupt(format!("node {i}: feature {feature} out of range")));
                    }
                    if w[2] >= header.bin_map.n_bins(feature) as u64 {
                        return Err(corrupt(format!("node {i}: bin out of range")));
                    }
                    if left <= i || right <= i || left >= n_nodes || right >= n_nodes {
                        return Err(corrupt(format!("node {i}: bad child index")));
                    }
                    Node::Split {
                        feature,
                        bin: w[2] as u8,
                        threshold: f64::from_bits(w[3]),
                        default_left: w[0] == TAG_SPLIT_LEFT,
                        left,
                        right,
                        gain: f64::from_bits(w[6]),
                        count,
                    }
                }
                tag => return Err(corrupt(format!("node {i}: unknown tag {tag}"))),
            };
            nodes.push(node);
        }
        trees.push(Tree { nodes });
    }
    if r.pos != body.len() {
        return Err(corrupt("trailing bytes before checksum"));
    }
    Ok(GbdtModel {
        base_margin,
        trees,
        params: header.params,
        bin_map: header.bin_map,
        feature_count: header.feature_count,
    })
}

pub fn save_model(model: &GbdtModel, path: impl AsRef<Path>) -> Result<(), GbdtError> {
    let path = path.as_ref();
    std::fs::write(path, model_to_bytes(model)).map_err(|source| GbdtError::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn load_model(path: impl AsRef<Path>) -> Result<GbdtModel, GbdtError> {
    let path = path.as_ref();
    let bytes = std::fs::read(path).map_err(|source| GbdtError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    model_from_bytes(&bytes)
}
