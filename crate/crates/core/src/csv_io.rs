//! Fuzzy CSV serialization.
//!
//! UTF-8, comma separated, `.` decimal, first row is the header. Each feature
//! header cell is `name:kind` with kind in `{tri, trap, gauss, crisp,
//! interval}`, plus exactly one `label` cell. In data rows each feature
//! expands to its parameter cells (tri 3, trap 4, gauss 2, crisp 1,
//! interval 2) and the label cell holds the integer class id.
//!
//! Writing then reading a dataset reproduces it exactly: floats are printed
//! in Rust's shortest round-trip form.

use std::path::Path;

use crate::data::{ColumnSpec, FeatureKind, FuzzyDataset};
use crate::error::{Error, Result};
use crate::fuzzy::{FeatureValue, FuzzyNumber, FuzzyVector, Interval};

fn csv_err(line: usize, cell: usize, msg: impl Into<String>) -> Error {
    Error::CsvFormat {
        line,
        cell,
        msg: msg.into(),
    }
}

/// Write `ds` to `path` in the fuzzy CSV format, label column last.
pub fn write_fuzzy_csv(ds: &FuzzyDataset, path: impl AsRef<Path>) -> Result<()> {
    let mut writer = csv::WriterBuilder::new()
        .flexible(true)
        .from_path(path.as_ref())
        .map_err(io_like)?;
    let mut header: Vec<String> = ds
        .schema()
        .iter()
        .map(|col| format!("{}:{}", col.name, col.kind.tag()))
        .collect();
    header.push("label".to_string());
    writer.write_record(&header).map_err(io_like)?;

    for (fv, label) in ds.instances() {
        let mut row: Vec<String> = Vec::new();
        for feature in fv.features() {
            for p in feature.parameters() {
                row.push(format!("{p}"));
            }
        }
        row.push(label.to_string());
        writer.write_record(&row).map_err(io_like)?;
    }
    writer.flush()?;
    Ok(())
}

fn io_like(err: csv::Error) -> Error {
    Error::InvalidInput(format!("csv write failed: {err}"))
}

struct HeaderLayout {
    schema: Vec<ColumnSpec>,
    /// Expanded cell index where each feature starts.
    feature_offsets: Vec<usize>,
    /// Expanded cell index of the label.
    label_offset: usize,
    /// Total expanded cells per data row.
    row_cells: usize,
}

fn parse_header(record: &csv::StringRecord) -> Result<HeaderLayout> {
    let mut schema = Vec::new();
    let mut feature_offsets = Vec::new();
    let mut label_offset = None;
    let mut offset = 0usize;
    for (idx, cell) in record.iter().enumerate() {
        let cell = cell.trim();
        if cell == "label" {
            if label_offset.is_some() {
                return Err(csv_err(1, idx + 1, "duplicate label column"));
            }
            label_offset = Some(offset);
            offset += 1;
            continue;
        }
        let (name, tag) = cell.split_once(':').ok_or_else(|| {
            csv_err(
                1,
                idx + 1,
                format!("expected 'name:kind' or 'label', got '{cell}'"),
            )
        })?;
        let kind = FeatureKind::from_tag(tag.trim()).ok_or_else(|| {
            csv_err(
                1,
                idx + 1,
                format!("unknown kind tag '{}' in '{cell}'", tag.trim()),
            )
        })?;
        schema.push(ColumnSpec {
            name: name.trim().to_string(),
            kind,
        });
        feature_offsets.push(offset);
        offset += kind.cell_count();
    }
    let label_offset =
        label_offset.ok_or_else(|| csv_err(1, record.len(), "missing label column"))?;
    if schema.is_empty() {
        return Err(csv_err(1, 1, "no feature columns in header"));
    }
    Ok(HeaderLayout {
        schema,
        feature_offsets,
        label_offset,
        row_cells: offset,
    })
}

fn parse_f64(record: &csv::StringRecord, line: usize, cell: usize) -> Result<f64> {
    let raw = record
        .get(cell)
        .ok_or_else(|| csv_err(line, cell + 1, "missing cell"))?
        .trim();
    raw.parse::<f64>()
        .map_err(|_| csv_err(line, cell + 1, format!("expected a number, got '{raw}'")))
}

fn parse_feature(
    record: &csv::StringRecord,
    line: usize,
    offset: usize,
    kind: FeatureKind,
) -> Result<FeatureValue> {
    let wrap = |err: Error| -> Error {
        match err {
            Error::InvalidFuzzyNumber(msg) | Error::Domain(msg) => csv_err(line, offset + 1, msg),
            other => other,
        }
    };
    let value = match kind {
        FeatureKind::Triangular => {
            let a1 = parse_f64(record, line, offset)?;
            let b1 = parse_f64(record, line, offset + 1)?;
            let a2 = parse_f64(record, line, offset + 2)?;
            FeatureValue::Fuzzy(FuzzyNumber::triangular(a1, b1, a2).map_err(wrap)?)
        }
        FeatureKind::Trapezoidal => {
            let a1 = parse_f64(record, line, offset)?;
            let b1 = parse_f64(record, line, offset + 1)?;
            let b2 = parse_f64(record, line, offset + 2)?;
            let a2 = parse_f64(record, line, offset + 3)?;
            FeatureValue::Fuzzy(FuzzyNumber::trapezoidal(a1, b1, b2, a2).map_err(wrap)?)
        }
        FeatureKind::Gaussian => {
            let c = parse_f64(record, line, offset)?;
            let delta = parse_f64(record, line, offset + 1)?;
            FeatureValue::Fuzzy(FuzzyNumber::gaussian(c, delta).map_err(wrap)?)
        }
        FeatureKind::Crisp => {
            let c = parse_f64(record, line, offset)?;
            FeatureValue::Fuzzy(FuzzyNumber::crisp(c).map_err(wrap)?)
        }
        FeatureKind::Interval => {
            let lo = parse_f64(record, line, offset)?;
            let hi = parse_f64(record, line, offset + 1)?;
            FeatureValue::Interval(Interval::new(lo, hi).map_err(wrap)?)
        }
    };
    Ok(value)
}

/// Read a fuzzy CSV file. The class count is inferred as `max label + 1`.
pub fn read_fuzzy_csv(path: impl AsRef<Path>) -> Result<FuzzyDataset> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_path(path.as_ref())
        .map_err(|err| Error::InvalidInput(format!("cannot open csv: {err}")))?;

    let mut records = reader.records();
    let header = match records.next() {
        Some(record) => record.map_err(|err| csv_err(1, 1, err.to_string()))?,
        None => return Err(csv_err(1, 1, "empty file")),
    };
    let layout = parse_header(&header)?;

    let mut instances = Vec::new();
    let mut max_label = 0usize;
    for (i, record) in records.enumerate() {
        let line = i + 2;
        let record = record.map_err(|err| csv_err(line, 1, err.to_string()))?;
        if record.len() != layout.row_cells {
            return Err(csv_err(
                line,
                record.len(),
                format!("expected {} cells, got {}", layout.row_cells, record.len()),
            ));
        }
        let mut features = Vec::with_capacity(layout.schema.len());
        for (col, offset) in layout.schema.iter().zip(&layout.feature_offsets) {
            features.push(parse_feature(&record, line, *offset, col.kind)?);
        }
        let raw_label = record
            .get(layout.label_offset)
            .expect("length checked")
            .trim();
        let label: usize = raw_label.parse().map_err(|_| {
            csv_err(
                line,
                layout.label_offset + 1,
                format!("expected a class id, got '{raw_label}'"),
            )
        })?;
        max_label = max_label.max(label);
        instances.push((FuzzyVector::new(features), label));
    }

    let num_classes = if instances.is_empty() {
        0
    } else {
        max_label + 1
    };
    FuzzyDataset::new(layout.schema, instances, num_classes)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{generate_synthetic, SyntheticConfig};
    use std::io::Write;

    fn write_temp(content: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(content.as_bytes()).unwrap();
        f.flush().unwrap();
        f
    }

    #[test]
    fn reads_single_triangular_row() {
        let f = write_temp("f1:tri,label\n0,1,2,3\n");
        let ds = read_fuzzy_csv(f.path()).unwrap();
        assert_eq!(ds.len(), 1);
        assert_eq!(ds.num_classes(), 4);
        assert_eq!(
            ds.instances()[0].0[0],
            FeatureValue::Fuzzy(FuzzyNumber::triangular(0.0, 1.0, 2.0).unwrap())
        );
        assert_eq!(ds.instances()[0].1, 3);
    }

    #[test]
    fn reads_interval_columns() {
        let f = write_temp("f1:interval,label\n0,2,0\n1,5,1\n");
        let ds = read_fuzzy_csv(f.path()).unwrap();
        assert_eq!(ds.schema()[0].kind, FeatureKind::Interval);
        assert_eq!(
            ds.instances()[1].0[0],
            FeatureValue::Interval(Interval::new(1.0, 5.0).unwrap())
        );
    }

    #[test]
    fn round_trips_generated_dataset() {
        let ds = generate_synthetic(&SyntheticConfig::new(100, 9)).unwrap();
        let f = tempfile::NamedTempFile::new().unwrap();
        write_fuzzy_csv(&ds, f.path()).unwrap();
        let back = read_fuzzy_csv(f.path()).unwrap();
        assert_eq!(ds, back);
    }

    #[test]
    fn rejects_unknown_kind_tag_with_position() {
        let f = write_temp("f1:blob,label\n0,1\n");
        match read_fuzzy_csv(f.path()).unwrap_err() {
            Error::CsvFormat { line, cell, msg } => {
                assert_eq!((line, cell), (1, 1));
                assert!(msg.contains("blob"), "{msg}");
            }
            other => panic!("unexpected error: {other}"),
        }
    }

    #[test]
    fn rejects_ragged_rows_with_position() {
        let f = write_temp("f1:tri,label\n0,1,2,0\n0,1,2\n");
        match read_fuzzy_csv(f.path()).unwrap_err() {
            Error::CsvFormat { line, .. } => assert_eq!(line, 3),
            other => panic!("unexpected error: {other}"),
        }
    }

    #[test]
    fn rejects_ordering_violations_with_position() {
        let f = write_temp("f1:tri,label\n2,1,0,0\n");
        match read_fuzzy_csv(f.path()).unwrap_err() {
            Error::CsvFormat { line, cell, msg } => {
                assert_eq!((line, cell), (2, 1));
                assert!(msg.contains("a1 <= b1"), "{msg}");
            }
            other => panic!("unexpected error: {other}"),
        }
    }

    #[test]
    fn rejects_missing_label_column() {
        let f = write_temp("f1:tri\n0,1,2\n");
        assert!(matches!(
            read_fuzzy_csv(f.path()).unwrap_err(),
            Error::CsvFormat { .. }
        ));
    }

    #[test]
    fn rejects_non_numeric_cells() {
        let f = write_temp("f1:crisp,label\nabc,0\n");
        match read_fuzzy_csv(f.path()).unwrap_err() {
            Error::CsvFormat { line, cell, msg } => {
                assert_eq!((line, cell), (2, 1));
                assert!(msg.contains("abc"), "{msg}");
            }
            other => panic!("unexpected error: {other}"),
        }
    }
}
