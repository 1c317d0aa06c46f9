//! CSV ingestion/emission and the synthetic labeled-stream generator.

use std::path::Path;

use crate::data::{DataStream, Sample};
use crate::error::{Error, Result};
use crate::num::SeededRng;

/// Load a stream from CSV. Each row is `f1,...,fd[,label]`; when `labeled`
/// is true the last column is a binary ground-truth label. A header row is
/// skipped automatically when its first field does not parse as a number.
/// Row order is preserved; ragged rows are an error naming the row.
pub fn load_csv(path: impl AsRef<Path>, labeled: bool) -> Result<DataStream> {
    let path = path.as_ref();
    let name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "csv".to_string());
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_path(path)?;

    let mut samples = Vec::new();
    let mut width = None;
    for (row, record) in reader.records().enumerate() {
        let record = record?;
        if record.is_empty() || (record.len() == 1 && record[0].trim().is_empty()) {
            continue;
        }
        let fields: Vec<&str> = record.iter().map(str::trim).collect();
        if row == 0 && fields[0].parse::<f64>().is_err() {
            continue; // header row
        }
        match width {
            None => width = Some(fields.len()),
            Some(w) if w != fields.len() => {
                return Err(Error::RaggedRow {
                    row,
                    expected: w,
                    got: fields.len(),
                })
            }
            _ => {}
        }
        let feature_count = if labeled {
            fields.len().checked_sub(1).ok_or(Error::RaggedRow {
                row,
                expected: 2,
                got: fields.len(),
            })?
        } else {
            fields.len()
        };
        if feature_count == 0 {
            return Err(Error::RaggedRow {
                row,
                expected: if labeled { 2 } else { 1 },
                got: fields.len(),
            });
        }
        let bad_number = |column: usize, value: &str| Error::BadNumber {
            row,
            column,
            value: value.to_string(),
        };
        let mut features = Vec::with_capacity(feature_count);
        for (col, f) in fields[..feature_count].iter().enumerate() {
            let v: f64 = f.parse().map_err(|_| bad_number(col, f))?;
            if !v.is_finite() {
                return Err(bad_number(col, f));
            }
            features.push(v);
        }
        let label = if labeled {
            let field = fields[feature_count];
            let raw: f64 = field
                .parse()
                .map_err(|_| bad_number(feature_count, field))?;
            if raw != 0.0 && raw != 1.0 {
                return Err(Error::NonBinaryLabel(raw));
            }
            Some(raw as u8)
        } else {
            None
        };
        samples.push(Sample::new(features, label)?);
    }
    if samples.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let dimension = samples[0].features.len();
    DataStream::new(name, dimension, samples)
}

/// Write a stream as CSV, one row per sample, labels last when present.
pub fn write_csv(stream: &DataStream, path: impl AsRef<Path>) -> Result<()> {
    let mut writer = csv::WriterBuilder::new()
        .has_headers(false)
        .from_path(path.as_ref())?;
    for s in &stream.samples {
        let mut row: Vec<String> = s.features.iter().map(|f| format!("{f}")).collect();
        if let Some(l) = s.label {
            row.push(l.to_string());
        }
        writer.write_record(&row)?;
    }
    writer.flush()?;
    Ok(())
}

/// Write a score series as one score per line.
pub fn write_scores(path: impl AsRef<Path>, scores: &[f64]) -> Result<()> {
    let body: String = scores.iter().map(|s| format!("{s}\n")).collect();
    std::fs::write(path, body)?;
    Ok(())
}

/// Deterministic synthetic labeled stream: `round(n * contamination)`
/// outliers drawn uniformly from a box far outside the inlier cloud, the
/// rest standard-normal inliers. Outlier positions are a deterministic
/// shuffle so anomalies are interleaved, not clustered at the end.
pub fn gen_synthetic(n: usize, d: usize, contamination: f64, seed: u64) -> Result<DataStream> {
    if n == 0 || d == 0 {
        return Err(Error::InvalidParameter(
            "sample count and dimension must be positive".into(),
        ));
    }
    if !(0.0..1.0).contains(&contamination) {
        return Err(Error::InvalidContamination(contamination));
    }
    let outliers = (n as f64 * contamination).round() as usize;
    let mut rng = SeededRng::new(seed);

    // Fisher-Yates on the index vector decides which positions are outliers.
    let mut idx: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        let j = (rng.next_u64() % (i as u64 + 1)) as usize;
        idx.swap(i, j);
    }
    let mut is_outlier = vec![false; n];
    for &i in idx.iter().take(outliers) {
        is_outlier[i] = true;
    }

    let samples: Vec<Sample> = is_outlier
        .iter()
        .map(|&out| {
            if out {
                let f = (0..d).map(|_| 6.0 + 6.0 * rng.uniform()).collect();
                Sample::new(f, Some(1))
            } else {
                let f = (0..d).map(|_| rng.normal()).collect();
                Sample::new(f, Some(0))
            }
        })
        .collect::<Result<_>>()?;
    DataStream::new(format!("synthetic-n{n}-d{d}-s{seed}"), d, samples)
}

/// Resolve a dataset reference: `synthetic:n=..,d=..,c=..,seed=..` uses the
/// generator; anything else is a CSV path, tried literally and then as
/// `<data_dir>/<reference>.csv`. CSV files are loaded labeled when the last
/// column is binary, unlabeled otherwise.
pub fn resolve_dataset(reference: &str, data_dir: &Path) -> Result<DataStream> {
    if let Some(spec) = reference.strip_prefix("synthetic:") {
        let (mut n, mut d, mut c, mut seed) = (1000usize, 4usize, 0.1f64, 0u64);
        for pair in spec.split(',') {
            let (key, value) = pair
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("bad synthetic field '{pair}'")))?;
            let bad = || Error::Config(format!("bad value '{value}' for '{key}'"));
            match key.trim() {
                "n" => n = value.parse().map_err(|_| bad())?,
                "d" => d = value.parse().map_err(|_| bad())?,
                "c" | "contamination" => c = value.parse().map_err(|_| bad())?,
                "seed" => seed = value.parse().map_err(|_| bad())?,
                other => {
                    return Err(Error::Config(format!("unknown synthetic field '{other}'")))
                }
            }
        }
        let mut stream = gen_synthetic(n, d, c, seed)?;
        stream.name = reference.to_string();
        return Ok(stream);
    }
    let direct = Path::new(reference);
    let path = if direct.exists() {
        direct.to_path_buf()
    } else {
        let candidate = data_dir.join(format!("{reference}.csv"));
        if candidate.exists() {
            candidate
        } else {
            return Err(Error::UnknownDataset(format!(
                "'{reference}' (no such file, and {} not found)",
                candidate.display()
            )));
        }
    };
    load_csv(&path, true).or_else(|_| load_csv(&path, false))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn synthetic_exact_outlier_count() {
        let s = gen_synthetic(1831, 21, 0.0961, 5).unwrap();
        let ones = s.labels().unwrap().iter().filter(|&&l| l == 1).count();
        assert_eq!(ones, (1831.0_f64 * 0.0961).round() as usize);
        assert_eq!(s.len(), 1831);
        assert_eq!(s.dimension, 21);
    }

    #[test]
    fn synthetic_is_deterministic() {
        let a = gen_synthetic(200, 3, 0.1, 9).unwrap();
        let b = gen_synthetic(200, 3, 0.1, 9).unwrap();
        assert_eq!(a.samples, b.samples);
        let c = gen_synthetic(200, 3, 0.1, 10).unwrap();
        assert_ne!(a.samples, c.samples);
    }

    #[test]
    fn csv_round_trip_preserves_order_and_labels() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("round.csv");
        let stream = gen_synthetic(50, 4, 0.1, 3).unwrap();
        write_csv(&stream, &path).unwrap();
        let back = load_csv(&path, true).unwrap();
        assert_eq!(back.dimension, 4);
        assert_eq!(back.len(), 50);
        for (a, b) in stream.samples.iter().zip(&back.samples) {
            assert_eq!(a.label, b.label);
            for (x, y) in a.features.iter().zip(&b.features) {
                assert!((x - y).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn csv_header_is_skipped() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("head.csv");
        std::fs::write(&path, "f1,f2,label\n1.0,2.0,0\n3.0,4.0,1\n").unwrap();
        let s = load_csv(&path, true).unwrap();
        assert_eq!(s.len(), 2);
        assert_eq!(s.labels().unwrap(), vec![0, 1]);
    }

    #[test]
    fn csv_ragged_row_names_row() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("ragged.csv");
        std::fs::write(&path, "1.0,2.0,0\n3.0,1\n").unwrap();
        match load_csv(&path, true) {
            Err(Error::RaggedRow { row, expected, got }) => {
                assert_eq!(row, 1);
                assert_eq!(expected, 3);
                assert_eq!(got, 2);
            }
            other => panic!("expected ragged-row error, got {other:?}"),
        }
    }

    #[test]
    fn csv_non_binary_label_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.csv");
        std::fs::write(&path, "1.0,2.0,3\n").unwrap();
        assert!(matches!(
            load_csv(&path, true),
            Err(Error::NonBinaryLabel(_))
        ));
    }

    #[test]
    fn csv_unlabeled_mode() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("unl.csv");
        std::fs::write(&path, "1.0,2.0\n3.0,4.0\n").unwrap();
        let s = load_csv(&path, false).unwrap();
        assert_eq!(s.dimension, 2);
        assert!(s.labels().is_none());
    }
}
