//! Datasets: synthetic generators, CIFAR-10 ingestion, CSV export.

mod cifar;
mod generators;
mod spec;

use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fmt::sig9;
use crate::net::Matrix;

pub use cifar::{encode_cifar_batch, load_cifar10, read_cifar_batch, CIFAR_PIXELS, CIFAR_RECORD_LEN};
pub use generators::{make_fine_grained, make_moons, simplex_centers, FineGrainedConfig, MoonsConfig};
pub use spec::{DatasetSource, DatasetSpec};

/// Where a dataset came from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    InMemory,
    Moons(MoonsConfig),
    FineGrained(FineGrainedConfig),
    File {
        path: PathBuf,
    },
    Subsample {
        parent: Box<Provenance>,
        n_per_class: usize,
        seed: u64,
    },
    MinMaxScaled {
        parent: Box<Provenance>,
    },
}

/// Feature matrix plus integer labels in `[0, n_classes)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    features: Matrix,
    labels: Vec<usize>,
    n_classes: usize,
    provenance: Provenance,
}

impl Dataset {
    pub fn new(features: Matrix, labels: Vec<usize>, n_classes: usize, provenance: Provenance) -> Result<Self> {
        if labels.len() != features.rows() {
            return Err(Error::Shape(format!(
                "{} labels for {} samples",
                labels.len(),
                features.rows()
            )));
        }
        if n_classes == 0 {
            return Err(Error::Data("n_classes must be positive".into()));
        }
        if let Some(&bad) = labels.iter().find(|&&l| l >= n_classes) {
            return Err(Error::Data(format!("label {bad} out of range for {n_classes} classes")));
        }
        if !features.all_finite() {
            return Err(Error::Data("features contain non-finite values".into()));
        }
        Ok(Dataset {
            features,
            labels,
            n_classes,
            provenance,
        })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn n_dims(&self) -> usize {
        self.features.cols()
    }

    pub fn n_classes(&self) -> usize {
        self.n_classes
    }

    pub fn features(&self) -> &Matrix {
        &self.features
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    pub fn class_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.n_classes];
        for &l in &self.labels {
            counts[l] += 1;
        }
        counts
    }

    /// CSV with header `label,f0,f1,...`, floats at 9 significant digits.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("label");
        for j in 0..self.n_dims() {
            out.push_str(&format!(",f{j}"));
        }
        out.push('\n');
        for (row, label) in self.features.iter_rows().zip(&self.labels) {
            out.push_str(&label.to_string());
            for v in row {
                out.push(',');
                out.push_str(&sig9(*v));
            }
            out.push('\n');
        }
        out
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_csv()).map_err(|e| Error::io(path, e))
    }

    /// Reads the CSV layout written by [`Dataset::to_csv`].
    pub fn read_csv(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let ingest = |line: usize, message: String| Error::Ingestion {
            path: path.to_path_buf(),
            offset: line as u64,
            message,
        };
        let mut lines = text.lines();
        let header = lines.next().ok_or_else(|| ingest(0, "empty file".into()))?;
        let n_dims = header.split(',').count().saturating_sub(1);
        if !header.starts_with("label") || n_dims == 0 {
            return Err(ingest(0, format!("unexpected header {header:?}")));
        }
        let mut data = Vec::new();
        let mut labels = Vec::new();
        for (i, line) in lines.enumerate().filter(|(_, l)| !l.trim().is_empty()) {
            let mut fields = line.split(',');
            let label = fields
                .next()
                .and_then(|f| f.trim().parse::<usize>().ok())
                .ok_or_else(|| ingest(i + 1, "bad label".into()))?;
            let before = data.len();
            for f in fields {
                data.push(
                    f.trim()
                        .parse::<f64>()
                        .map_err(|_| ingest(i + 1, format!("bad value {f:?}")))?,
                );
            }
            if data.len() - before != n_dims {
                return Err(ingest(i + 1, format!("expected {n_dims} features")));
            }
            labels.push(label);
        }
        let n_classes = labels.iter().max().map_or(1, |m| m + 1);
        let rows = labels.len();
        Dataset::new(
            Matrix::new(rows, n_dims, data)?,
            labels,
            n_classes,
            Provenance::File {
                path: path.to_path_buf(),
            },
        )
    }

    /// Stratified subsample of exactly `n_per_class` samples per class, class by class.
    pub fn subsample(&self, n_per_class: usize, seed: u64) -> Result<Dataset> {
        if n_per_class == 0 {
            return Err(Error::Parameter("n_per_class must be positive".into()));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut by_class: Vec<Vec<usize>> = vec![Vec::new(); self.n_classes];
        for (i, &l) in self.labels.iter().enumerate() {
            by_class[l].push(i);
        }
        let mut chosen = Vec::with_capacity(n_per_class * self.n_classes);
        for (class, mut idx) in by_class.into_iter().enumerate() {
            if idx.len() < n_per_class {
                return Err(Error::Data(format!(
                    "class {class} has {} samples, {n_per_class} requested",
                    idx.len()
                )));
            }
            idx.shuffle(&mut rng);
            chosen.extend_from_slice(&idx[..n_per_class]);
        }
        Ok(Dataset {
            features: self.features.select_rows(&chosen),
            labels: chosen.iter().map(|&i| self.labels[i]).collect(),
            n_classes: self.n_classes,
            provenance: Provenance::Subsample {
                parent: Box::new(self.provenance.clone()),
                n_per_class,
                seed,
            },
        })
    }
}

/// Per-feature min-max scaling to `[0, 1]`, fitted on one dataset and applied to others.
#[derive(Debug, Clone, PartialEq)]
pub struct MinMaxScaler {
    min: Vec<f64>,
    range: Vec<f64>,
}

impl MinMaxScaler {
    pub fn fit(data: &Dataset) -> Self {
        let d = data.n_dims();
        let mut min = vec![f64::INFINITY; d];
        let mut max = vec![f64::NEG_INFINITY; d];
        for row in data.features.iter_rows() {
            for j in 0..d {
                min[j] = min[j].min(row[j]);
                max[j] = max[j].max(row[j]);
            }
        }
        let range = min
            .iter()
            .zip(&max)
            .map(|(lo, hi)| if hi > lo { hi - lo } else { 1.0 })
            .collect();
        MinMaxScaler { min, range }
    }

    pub fn apply(&self, data: &Dataset) -> Result<Dataset> {
        if data.n_dims() != self.min.len() {
            return Err(Error::Shape(format!(
                "scaler fitted on {} features, dataset has {}",
                self.min.len(),
                data.n_dims()
            )));
        }
        let mut features = data.features.clone();
        for r in 0..features.rows() {
            for (j, v) in features.row_mut(r).iter_mut().enumerate() {
                *v = (*v - self.min[j]) / self.range[j];
            }
        }
        Ok(Dataset {
            features,
            labels: data.labels.clone(),
            n_classes: data.n_classes,
            provenance: Provenance::MinMaxScaled {
                parent: Box::new(data.provenance.clone()),
            },
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> Dataset {
        let x = Matrix::from_rows(&[[0.0, 1.0], [2.0, 3.0], [4.0, 5.0], [6.0, 7.0], [8.0, 9.0]]).unwrap();
        Dataset::new(x, vec![0, 1, 0, 1, 0], 2, Provenance::InMemory).unwrap()
    }

    #[test]
    fn validation() {
        let x = Matrix::zeros(2, 1);
        assert!(Dataset::new(x.clone(), vec![0], 2, Provenance::InMemory).is_err());
        assert!(Dataset::new(x.clone(), vec![0, 2], 2, Provenance::InMemory).is_err());
        let nan = Matrix::new(1, 1, vec![f64::NAN]).unwrap();
        assert!(Dataset::new(nan, vec![0], 1, Provenance::InMemory).is_err());
    }

    #[test]
    fn subsample_is_balanced_and_deterministic() {
        let ds = small();
        let sub = ds.subsample(2, 7).unwrap();
        assert_eq!(sub.class_counts(), vec![2, 2]);
        assert_eq!(sub, ds.subsample(2, 7).unwrap());
        assert!(matches!(ds.subsample(3, 7), Err(Error::Data(_))));
    }

    #[test]
    fn full_size_subsample_is_a_permutation() {
        let balanced = Dataset::new(
            Matrix::from_rows(&[[1.0], [2.0], [3.0], [4.0]]).unwrap(),
            vec![0, 1, 0, 1],
            2,
            Provenance::InMemory,
        )
        .unwrap();
        let perm = balanced.subsample(2, 11).unwrap();
        let mut got: Vec<f64> = perm.features.data().to_vec();
        got.sort_by(f64::total_cmp);
        assert_eq!(got, vec![1.0, 2.0, 3.0, 4.0]);
    }

    #[test]
    fn csv_layout_and_round_trip() {
        let ds = small();
        let csv = ds.to_csv();
        assert!(csv.starts_with("label,f0,f1\n0,0,1\n1,2,3\n"));
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("d.csv");
        ds.write_csv(&path).unwrap();
        let back = Dataset::read_csv(&path).unwrap();
        assert_eq!(back.features, ds.features);
        assert_eq!(back.labels, ds.labels);
    }

    #[test]
    fn min_max_scaling() {
        let ds = small();
        let scaled = MinMaxScaler::fit(&ds).apply(&ds).unwrap();
        assert_eq!(scaled.features.row(0), &[0.0, 0.0]);
        assert_eq!(scaled.features.row(4), &[1.0, 1.0]);
        assert!(matches!(scaled.provenance, Provenance::MinMaxScaled { .. }));
    }
}
