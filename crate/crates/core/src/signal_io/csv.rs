use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use super::{id_from_path, Recording, SignalError};

/// Reads a CSV whose header row holds channel labels and whose remaining
/// rows hold one sample per channel.
pub fn read_csv(path: impl AsRef<Path>, sample_rate: f64) -> Result<Recording, SignalError> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|source| SignalError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let mut reader = ::csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .trim(::csv::Trim::All)
        .from_reader(std::io::BufReader::with_capacity(1 << 20, file));

    let labels: Vec<String> = reader
        .headers()
        .map_err(|e| SignalError::Csv(e.to_string()))?
        .iter()
        .map(str::to_string)
        .collect();
    let width = labels.len();
    let mut columns: Vec<Vec<f64>> = vec![Vec::new(); width];

    let mut record = ::csv::StringRecord::new();
    let mut row = 1usize;
    while reader
        .read_record(&mut record)
        .map_err(|e| SignalError::Csv(e.to_string()))?
    {
        row += 1;
        if record.len() != width {
            return Err(SignalError::RaggedRows {
                row,
                expected: width,
                found: record.len(),
            });
        }
        for (column, (cell, col)) in record.iter().zip(columns.iter_mut()).enumerate() {
            let v: f64 = cell.parse().map_err(|_| SignalError::NonNumericCell {
                row,
                column,
                cell: cell.to_string(),
            })?;
            if !v.is_finite() {
                return Err(SignalError::NonFiniteSample {
                    channel: labels[column].clone(),
                    index: col.len(),
                });
            }
            col.push(v);
        }
    }

    Recording::new(id_from_path(path), sample_rate, labels.into_iter().zip(columns).collect())
}

/// Writes a recording in the layout [`read_csv`] accepts.
///
/// `decimals = None` writes the shortest representation that round-trips
/// exactly; `Some(d)` rounds every sample to `d` decimals.
pub fn write_csv(
    path: impl AsRef<Path>,
    rec: &Recording,
    decimals: Option<usize>,
) -> Result<(), SignalError> {
    let path = path.as_ref();
    let io_err = |source| SignalError::Io {
        path: path.to_path_buf(),
        source,
    };
    let file = File::create(path).map_err(io_err)?;
    let mut out = BufWriter::with_capacity(1 << 20, file);
    let header: Vec<&str> = rec.channels.iter().map(|c| c.label.as_str()).collect();
    writeln!(out, "{}", header.join(",")).map_err(io_err)?;
    let mut line = String::new();
    for i in 0..rec.len() {
        line.clear();
        for (j, ch) in rec.channels.iter().enumerate() {
            if j > 0 {
                line.push(',');
            }
            let v = ch.samples[i];
            match decimals {
                Some(d) => {
                    use std::fmt::Write as _;
                    // avoid "-0.000"
                    let scale = 10f64.powi(d as i32);
                    let r = (v * scale).round() / scale;
                    let r = if r == 0.0 { 0.0 } else { r };
                    let _ = write!(line, "{r:.d$}");
                }
                None => {
                    use std::fmt::Write as _;
                    let _ = write!(line, "{v}");
                }
            }
        }
        line.push('\n');
        out.write_all(line.as_bytes()).map_err(io_err)?;
    }
    out.flush().map_err(io_err)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn write_tmp(contents: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::Builder::new().suffix(".csv").tempfile().unwrap();
        f.write_all(contents.as_bytes()).unwrap();
        f
    }

    #[test]
    fn three_columns_four_rows() {
        let f = write_tmp("FP1,FP2,CZ\n1,2,3\n4,5,6\n7,8,9\n10,11,12\n");
        let rec = read_csv(f.path(), 250.0).unwrap();
        assert_eq!(rec.channels.len(), 3);
        assert_eq!(rec.len(), 4);
        assert_eq!(rec.sample_rate, 250.0);
        assert_eq!(rec.channels[2].samples, vec![3.0, 6.0, 9.0, 12.0]);
    }

    #[test]
    fn ragged_row() {
        let f = write_tmp("A,B,C\n1,2,3\n4,5\n");
        assert!(matches!(
            read_csv(f.path(), 250.0),
            Err(SignalError::RaggedRows { expected: 3, found: 2, .. })
        ));
    }

    #[test]
    fn non_numeric_cell() {
        let f = write_tmp("A,B,C\n1,abc,3\n");
        match read_csv(f.path(), 250.0) {
            Err(SignalError::NonNumericCell { cell, column, .. }) => {
                assert_eq!(cell, "abc");
                assert_eq!(column, 1);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn nan_cell_is_rejected() {
        let f = write_tmp("A\nNaN\n");
        assert!(matches!(
            read_csv(f.path(), 250.0),
            Err(SignalError::NonFiniteSample { .. })
        ));
    }

    #[test]
    fn rounded_write_never_emits_negative_zero() {
        let rec = Recording::new("r", 250.0, vec![("A".into(), vec![-0.0001, 1.23456])]).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("r.csv");
        write_csv(&p, &rec, Some(3)).unwrap();
        assert_eq!(std::fs::read_to_string(&p).unwrap(), "A\n0.000\n1.235\n");
    }
}
