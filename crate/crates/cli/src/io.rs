//! File formats and atomic writes.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use nalgebra::DMatrix;
use qke_core::dataset::{RegionFace, Sample};
use qke_core::qke::KernelMatrix;
use serde::de::DeserializeOwned;
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::{CliError, CliResult};

/// Writes through a temporary file in the same directory, then renames.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> CliResult<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
        _ => PathBuf::from("."),
    };
    fs::create_dir_all(&dir).map_err(|e| CliError::io(&dir, e))?;
    let mut tmp = tempfile::NamedTempFile::new_in(&dir).map_err(|e| CliError::io(&dir, e))?;
    tmp.write_all(bytes).map_err(|e| CliError::io(path, e))?;
    tmp.persist(path).map_err(|e| CliError::io(path, e.error))?;
    Ok(())
}

pub fn to_json<T: Serialize>(value: &T) -> Vec<u8> {
    let mut bytes = serde_json::to_vec_pretty(value).expect("serializable");
    bytes.push(b'\n');
    bytes
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> CliResult<T> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| CliError::format(path, e))
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

fn csv_bytes(write: impl FnOnce(&mut csv::Writer<Vec<u8>>) -> csv::Result<()>) -> Vec<u8> {
    let mut w = csv::Writer::from_writer(Vec::new());
    write(&mut w).expect("in-memory csv");
    w.into_inner().expect("in-memory csv")
}

/// Columns x0..x{f-1}, y.
pub fn dataset_csv(samples: &[Sample]) -> Vec<u8> {
    let n_features = samples.first().map_or(3, |s| s.x.len());
    csv_bytes(|w| {
        let mut header: Vec<String> = (0..n_features).map(|i| format!("x{i}")).collect();
        header.push("y".into());
        w.write_record(&header)?;
        for s in samples {
            let mut row: Vec<String> = s.x.iter().map(|v| v.to_string()).collect();
            row.push(s.y.to_string());
            w.write_record(&row)?;
        }
        Ok(())
    })
}

pub fn read_dataset_csv(path: &Path) -> CliResult<Vec<Sample>> {
    let mut reader = csv::Reader::from_path(path).map_err(|e| CliError::format(path, e))?;
    let header = reader.headers().map_err(|e| CliError::format(path, e))?.clone();
    if header.iter().last() != Some("y") || header.len() < 2 {
        return Err(CliError::format(path, "expected columns x0,…,y"));
    }
    let mut samples = Vec::new();
    for (line, record) in reader.records().enumerate() {
        let record = record.map_err(|e| CliError::format(path, e))?;
        let bad = |what: &str| CliError::format(path, format!("row {}: bad {what}", line + 1));
        let values: Vec<&str> = record.iter().collect();
        let (y, x) = values.split_last().ok_or_else(|| bad("row"))?;
        let x = x.iter().map(|v| v.trim().parse::<f64>().map_err(|_| bad("feature"))).collect::<CliResult<Vec<_>>>()?;
        let y: i8 = y.trim().trim_start_matches('+').parse().map_err(|_| bad("label"))?;
        if y != 1 && y != -1 {
            return Err(bad("label"));
        }
        samples.push(Sample { x, y });
    }
    Ok(samples)
}

/// Header `id,<column ids>`, then one row per row sample.
pub fn kernel_csv(k: &KernelMatrix) -> Vec<u8> {
    csv_bytes(|w| {
        let mut header = vec!["id".to_string()];
        header.extend(k.col_ids.iter().cloned());
        w.write_record(&header)?;
        for (i, id) in k.row_ids.iter().enumerate() {
            let mut row = vec![id.clone()];
            row.extend(k.values.row(i).iter().map(|v| v.to_string()));
            w.write_record(&row)?;
        }
        Ok(())
    })
}

/// Values plus row and column ids.
pub fn read_kernel_csv(path: &Path) -> CliResult<(DMatrix<f64>, Vec<String>, Vec<String>)> {
    let mut reader = csv::Reader::from_path(path).map_err(|e| CliError::format(path, e))?;
    let header = reader.headers().map_err(|e| CliError::format(path, e))?.clone();
    let col_ids: Vec<String> = header.iter().skip(1).map(String::from).collect();
    let mut row_ids = Vec::new();
    let mut values = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| CliError::format(path, e))?;
        if record.len() != col_ids.len() + 1 {
            return Err(CliError::format(path, format!("row {} has {} fields", row_ids.len() + 1, record.len())));
        }
        row_ids.push(record[0].to_string());
        for v in record.iter().skip(1) {
            let v: f64 = v.trim().parse().map_err(|_| CliError::format(path, format!("bad entry {v:?}")))?;
            if !v.is_finite() {
                return Err(CliError::format(path, "non-finite kernel entry"));
            }
            values.push(v);
        }
    }
    let m = DMatrix::from_row_slice(row_ids.len(), col_ids.len(), &values);
    Ok((m, row_ids, col_ids))
}

/// `resolution` rows of integer labels, no header.
pub fn region_csv(face: &RegionFace) -> Vec<u8> {
    csv_bytes(|w| {
        for row in face.labels.chunks(face.resolution) {
            w.write_record(row.iter().map(|l| l.to_string()))?;
        }
        Ok(())
    })
}

pub fn read_region_csv(path: &Path) -> CliResult<Vec<Vec<i8>>> {
    let mut reader = csv::ReaderBuilder::new().has_headers(false).from_path(path).map_err(|e| CliError::format(path, e))?;
    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| CliError::format(path, e))?;
        let row = record
            .iter()
            .map(|v| match v.trim().parse::<i8>() {
                Ok(l @ (-1..=1)) => Ok(l),
                _ => Err(CliError::format(path, format!("bad region label {v:?}"))),
            })
            .collect::<CliResult<Vec<i8>>>()?;
        rows.push(row);
    }
    Ok(rows)
}
