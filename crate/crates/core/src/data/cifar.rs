//! CIFAR-10 binary batches: 3073-byte records, one label byte followed by
//! 1024 red, 1024 green and 1024 blue pixel bytes (row-major 32x32 planes).

use std::path::Path;

use crate::data::{Dataset, Provenance};
use crate::error::{Error, Result};
use crate::net::Matrix;

pub const CIFAR_PIXELS: usize = 3 * 32 * 32;
pub const CIFAR_RECORD_LEN: usize = CIFAR_PIXELS + 1;
const N_CLASSES: usize = 10;

const TRAIN_BATCHES: [&str; 5] = [
    "data_batch_1.bin",
    "data_batch_2.bin",
    "data_batch_3.bin",
    "data_batch_4.bin",
    "data_batch_5.bin",
];
const TEST_BATCH: &str = "test_batch.bin";

fn parse_records(bytes: &[u8], path: &Path, data: &mut Vec<f64>, labels: &mut Vec<usize>) -> Result<()> {
    if !bytes.len().is_multiple_of(CIFAR_RECORD_LEN) {
        let whole = bytes.len() / CIFAR_RECORD_LEN * CIFAR_RECORD_LEN;
        return Err(Error::Ingestion {
            path: path.to_path_buf(),
            offset: whole as u64,
            message: format!(
                "truncated record: {} bytes is not a multiple of {CIFAR_RECORD_LEN}",
                bytes.len()
            ),
        });
    }
    data.reserve(bytes.len() / CIFAR_RECORD_LEN * CIFAR_PIXELS);
    for (i, record) in bytes.chunks_exact(CIFAR_RECORD_LEN).enumerate() {
        let label = record[0] as usize;
        if label >= N_CLASSES {
            return Err(Error::Ingestion {
                path: path.to_path_buf(),
                offset: (i * CIFAR_RECORD_LEN) as u64,
                message: format!("label byte {label} > 9"),
            });
        }
        labels.push(label);
        data.extend(record[1..].iter().map(|&b| f64::from(b) / 255.0));
    }
    Ok(())
}

fn read_file(path: &Path) -> Result<Vec<u8>> {
    std::fs::read(path).map_err(|e| Error::Ingestion {
        path: path.to_path_buf(),
        offset: 0,
        message: e.to_string(),
    })
}

/// Parses one batch file into a dataset with pixels scaled to `[0, 1]`.
pub fn read_cifar_batch(path: &Path) -> Result<Dataset> {
    read_batches(&[path], path)
}

fn read_batches(paths: &[&Path], provenance: &Path) -> Result<Dataset> {
    let mut data = Vec::new();
    let mut labels = Vec::new();
    for path in paths {
        parse_records(&read_file(path)?, path, &mut data, &mut labels)?;
    }
    let rows = labels.len();
    Dataset::new(
        Matrix::new(rows, CIFAR_PIXELS, data)?,
        labels,
        N_CLASSES,
        Provenance::File {
            path: provenance.to_path_buf(),
        },
    )
}

/// Loads `data_batch_1..5.bin` as the training set and `test_batch.bin` as the test set.
pub fn load_cifar10(dir: &Path) -> Result<(Dataset, Dataset)> {
    let train_paths: Vec<_> = TRAIN_BATCHES.iter().map(|f| dir.join(f)).collect();
    let train_refs: Vec<&Path> = train_paths.iter().map(|p| p.as_path()).collect();
    let train = read_batches(&train_refs, dir)?;
    let test = read_batches(&[&dir.join(TEST_BATCH)], dir)?;
    Ok((train, test))
}

/// Inverse of parsing: label byte then `round(255 * x)` per pixel.
pub fn encode_cifar_batch(data: &Dataset) -> Result<Vec<u8>> {
    if data.n_dims() != CIFAR_PIXELS {
        return Err(Error::Shape(format!(
            "CIFAR records need {CIFAR_PIXELS} features, got {}",
            data.n_dims()
        )));
    }
    let mut out = Vec::with_capacity(data.len() * CIFAR_RECORD_LEN);
    for (row, &label) in data.features().iter_rows().zip(data.labels()) {
        let label = u8::try_from(label).map_err(|_| Error::Data(format!("label {label} does not fit a byte")))?;
        out.push(label);
        out.extend(row.iter().map(|&v| (v * 255.0).round().clamp(0.0, 255.0) as u8));
    }
    Ok(out)
}
