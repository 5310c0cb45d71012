//! Dataset manifests: CSV with header `path,label,split`.

use std::collections::HashMap;
use std::path::{Path, PathBuf};

use super::CliError;
use crate::signal_io::ClassLabel;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Split {
    Train,
    Eval,
}

impl Split {
    pub fn as_str(self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::Eval => "eval",
        }
    }
}

impl std::str::FromStr for Split {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "train" => Ok(Split::Train),
            "eval" | "test" => Ok(Split::Eval),
            other => Err(format!("unknown split {other:?}")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ManifestEntry {
    /// Resolved against the manifest's directory when relative.
    pub path: PathBuf,
    /// File stem of `path`.
    pub id: String,
    pub label: ClassLabel,
    pub split: Split,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct DatasetManifest {
    pub entries: Vec<ManifestEntry>,
}

impl DatasetManifest {
    pub fn split(&self, split: Split) -> impl Iterator<Item = &ManifestEntry> {
        self.entries.iter().filter(move |e| e.split == split)
    }

    /// Rejects ids that occur twice, whether within one split or across both.
    pub fn validate(&self) -> Result<(), CliError> {
        let mut seen: HashMap<&str, Split> = HashMap::new();
        for e in &self.entries {
            if let Some(prev) = seen.insert(&e.id, e.split) {
                return Err(CliError::Data(if prev == e.split {
                    format!("recording id {:?} listed twice in the {} split", e.id, e.split.as_str())
                } else {
                    format!("recording id {:?} appears in both train and eval splits", e.id)
                }));
            }
        }
        Ok(())
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self, CliError> {
        let path = path.as_ref();
        let base = path.parent().unwrap_or(Path::new(""));
        let data_err = |msg: String| CliError::Data(format!("{}: {msg}", path.display()));
        let mut rdr = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .from_path(path)
            .map_err(|e| data_err(e.to_string()))?;
        let headers = rdr.headers().map_err(|e| data_err(e.to_string()))?.clone();
        let col = |name: &str| {
            headers
                .iter()
                .position(|h| h.eq_ignore_ascii_case(name))
                .ok_or_else(|| data_err(format!("missing column {name:?}")))
        };
        let (pc, lc, sc) = (col("path")?, col("label")?, col("split")?);
        let mut entries = Vec::new();
        for (i, rec) in rdr.records().enumerate() {
            let rec = rec.map_err(|e| data_err(e.to_string()))?;
            let field = |c: usize| rec.get(c).unwrap_or("");
            let row = i + 2;
            let raw = PathBuf::from(field(pc));
            if raw.as_os_str().is_empty() {
                return Err(data_err(format!("line {row}: empty path")));
            }
            let id = crate::signal_io::id_from_path(&raw);
            let path = if raw.is_absolute() { raw } else { base.join(raw) };
            let label = field(lc)
                .parse()
                .map_err(|e| data_err(format!("line {row}: {e}")))?;
            let split = field(sc)
                .parse()
                .map_err(|e| data_err(format!("line {row}: {e}")))?;
            entries.push(ManifestEntry { path, id, label, split });
        }
        let m = DatasetManifest { entries };
        m.validate()?;
        Ok(m)
    }

    /// Writes paths relative to the manifest's directory where possible.
    pub fn write(&self, path: impl AsRef<Path>) -> Result<(), CliError> {
        let path = path.as_ref();
        let base = path.parent().unwrap_or(Path::new(""));
        let mut out = String::from("path,label,split\n");
        for e in &self.entries {
            let p = e.path.strip_prefix(base).unwrap_or(&e.path);
            out.push_str(&format!("{},{},{}\n", p.display(), e.label, e.split.as_str()));
        }
        std::fs::write(path, out).map_err(|source| CliError::Io {
            path: path.to_path_buf(),
            source,
        })
    }
}
