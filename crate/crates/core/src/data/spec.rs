//! Textual dataset descriptors used by the CLI and the experiment harness:
//!
//! - `moons:sigma=0.2,n=100,seed=0`
//! - `fg:c=0.4,k=5,dims=16,n=200,r=1,seed=0`
//! - `cifar10:dir=/data/cifar,per_class=500,test_per_class=100,seed=0`
//! - `csv:train=a.csv,test=b.csv`
//!
//! Any descriptor accepts `scale=minmax` to min-max scale features with
//! statistics from the training split.

use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::data::{load_cifar10, make_fine_grained, make_moons, Dataset, FineGrainedConfig, MinMaxScaler, MoonsConfig};
use crate::error::{Error, Result};

/// Added to a generator seed to draw the held-out split.
const TEST_SEED_OFFSET: u64 = 0x9e37_79b9_7f4a_7c15;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DatasetSource {
    Moons(MoonsConfig),
    FineGrained(FineGrainedConfig),
    Cifar10 {
        dir: PathBuf,
        per_class: Option<usize>,
        test_per_class: Option<usize>,
        seed: u64,
    },
    Csv {
        train: PathBuf,
        test: PathBuf,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetSpec {
    pub source: DatasetSource,
    pub min_max_scale: bool,
}

impl DatasetSpec {
    pub fn moons(noise_sigma: f64, n_per_class: usize, seed: u64) -> Self {
        DatasetSpec {
            source: DatasetSource::Moons(MoonsConfig {
                n_per_class,
                noise_sigma,
                seed,
            }),
            min_max_scale: false,
        }
    }

    pub fn fine_grained(config: FineGrainedConfig) -> Self {
        DatasetSpec {
            source: DatasetSource::FineGrained(config),
            min_max_scale: false,
        }
    }

    /// Builds the `(train, test)` pair. Generated test splits reuse the
    /// generator config with a shifted seed.
    pub fn materialize(&self) -> Result<(Dataset, Dataset)> {
        let (train, test) = match &self.source {
            DatasetSource::Moons(cfg) => {
                let test_cfg = MoonsConfig {
                    seed: cfg.seed.wrapping_add(TEST_SEED_OFFSET),
                    ..cfg.clone()
                };
                (make_moons(cfg)?, make_moons(&test_cfg)?)
            }
            DatasetSource::FineGrained(cfg) => {
                let test_cfg = FineGrainedConfig {
                    seed: cfg.seed.wrapping_add(TEST_SEED_OFFSET),
                    ..cfg.clone()
                };
                (make_fine_grained(cfg)?, make_fine_grained(&test_cfg)?)
            }
            DatasetSource::Cifar10 {
                dir,
                per_class,
                test_per_class,
                seed,
            } => {
                let (train, test) = load_cifar10(dir)?;
                let train = match per_class {
                    Some(n) => train.subsample(*n, *seed)?,
                    None => train,
                };
                let test_n = test_per_class.or(per_class.map(|n| (n / 5).max(1)));
                let test = match test_n {
                    Some(n) => test.subsample(n, seed.wrapping_add(TEST_SEED_OFFSET))?,
                    None => test,
                };
                (train, test)
            }
            DatasetSource::Csv { train, test } => (Dataset::read_csv(train)?, Dataset::read_csv(test)?),
        };
        if self.min_max_scale {
            let scaler = MinMaxScaler::fit(&train);
            Ok((scaler.apply(&train)?, scaler.apply(&test)?))
        } else {
            Ok((train, test))
        }
    }
}

fn parse_kv(body: &str, full: &str) -> Result<BTreeMap<String, String>> {
    let mut map = BTreeMap::new();
    for part in body.split(',').filter(|p| !p.trim().is_empty()) {
        let (k, v) = part
            .split_once('=')
            .ok_or_else(|| Error::Parameter(format!("expected key=value, got {part:?} in {full:?}")))?;
        map.insert(k.trim().to_ascii_lowercase(), v.trim().to_string());
    }
    Ok(map)
}

struct Fields {
    map: BTreeMap<String, String>,
    full: String,
}

impl Fields {
    fn take<T: FromStr>(&mut self, key: &str) -> Result<Option<T>> {
        match self.map.remove(key) {
            None => Ok(None),
            Some(v) => v
                .parse()
                .map(Some)
                .map_err(|_| Error::Parameter(format!("bad value {v:?} for {key} in {:?}", self.full))),
        }
    }

    fn finish(self) -> Result<()> {
        match self.map.keys().next() {
            Some(k) => Err(Error::Parameter(format!("unknown key {k:?} in {:?}", self.full))),
            None => Ok(()),
        }
    }
}

impl FromStr for DatasetSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (kind, body) = s.split_once(':').unwrap_or((s, ""));
        let mut f = Fields {
            map: parse_kv(body, s)?,
            full: s.to_string(),
        };
        let min_max_scale = match f.take::<String>("scale")?.as_deref() {
            None | Some("none") => false,
            Some("minmax") => true,
            Some(other) => return Err(Error::Parameter(format!("unknown scaling {other:?}"))),
        };
        let source = match kind.trim().to_ascii_lowercase().as_str() {
            "moons" => DatasetSource::Moons(MoonsConfig {
                n_per_class: f.take("n")?.unwrap_or(100),
                noise_sigma: f.take("sigma")?.unwrap_or(0.1),
                seed: f.take("seed")?.unwrap_or(0),
            }),
            "fg" => DatasetSource::FineGrained(FineGrainedConfig {
                separation: f
                    .take("c")?
                    .ok_or_else(|| Error::Parameter(format!("fg dataset needs c=<separation> in {s:?}")))?,
                n_classes: f.take("k")?.unwrap_or(5),
                n_dims: f.take("dims")?.unwrap_or(16),
                n_per_class: f.take("n")?.unwrap_or(200),
                within_radius: f.take("r")?.unwrap_or(1.0),
                seed: f.take("seed")?.unwrap_or(0),
            }),
            "cifar10" => DatasetSource::Cifar10 {
                dir: f
                    .take::<PathBuf>("dir")?
                    .ok_or_else(|| Error::Parameter(format!("cifar10 dataset needs dir=<path> in {s:?}")))?,
                per_class: f.take("per_class")?,
                test_per_class: f.take("test_per_class")?,
                seed: f.take("seed")?.unwrap_or(0),
            },
            "csv" => DatasetSource::Csv {
                train: f
                    .take::<PathBuf>("train")?
                    .ok_or_else(|| Error::Parameter(format!("csv dataset needs train=<path> in {s:?}")))?,
                test: f
                    .take::<PathBuf>("test")?
                    .ok_or_else(|| Error::Parameter(format!("csv dataset needs test=<path> in {s:?}")))?,
            },
            other => return Err(Error::Parameter(format!("unknown dataset kind {other:?}"))),
        };
        f.finish()?;
        Ok(DatasetSpec { source, min_max_scale })
    }
}

impl fmt::Display for DatasetSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.source {
            DatasetSource::Moons(c) => write!(f, "moons:sigma={},n={},seed={}", c.noise_sigma, c.n_per_class, c.seed)?,
            DatasetSource::FineGrained(c) => write!(
                f,
                "fg:c={},k={},dims={},n={},r={},seed={}",
                c.separation, c.n_classes, c.n_dims, c.n_per_class, c.within_radius, c.seed
            )?,
            DatasetSource::Cifar10 {
                dir,
                per_class,
                test_per_class,
                seed,
            } => {
                write!(f, "cifar10:dir={}", dir.display())?;
                if let Some(n) = per_class {
                    write!(f, ",per_class={n}")?;
                }
                if let Some(n) = test_per_class {
                    write!(f, ",test_per_class={n}")?;
                }
                write!(f, ",seed={seed}")?;
            }
            DatasetSource::Csv { train, test } => write!(f, "csv:train={},test={}", train.display(), test.display())?,
        }
        if self.min_max_scale {
            f.write_str(",scale=minmax")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_descriptors() {
        let spec: DatasetSpec = "moons:sigma=0.2".parse().unwrap();
        assert_eq!(spec, DatasetSpec::moons(0.2, 100, 0));

        let spec: DatasetSpec = "fg:c=0.4,k=3,dims=4".parse().unwrap();
        match &spec.source {
            DatasetSource::FineGrained(c) => {
                assert_eq!((c.separation, c.n_classes, c.n_dims), (0.4, 3, 4));
            }
            other => panic!("{other:?}"),
        }
        let again: DatasetSpec = spec.to_string().parse().unwrap();
        assert_eq!(again, spec);

        let spec: DatasetSpec = "cifar10:dir=/tmp/x,per_class=500".parse().unwrap();
        assert!(matches!(
            spec.source,
            DatasetSource::Cifar10 {
                per_class: Some(500),
                ..
            }
        ));
    }

    #[test]
    fn rejects_bad_descriptors() {
        for bad in [
            "fg:k=3",
            "moons:sigma=abc",
            "moons:bogus=1",
            "blobs:c=1",
            "cifar10:per_class=3",
            "moons:scale=z",
        ] {
            assert!(bad.parse::<DatasetSpec>().is_err(), "{bad}");
        }
    }

    #[test]
    fn test_split_differs_from_train() {
        let (train, test) = DatasetSpec::moons(0.1, 20, 4).materialize().unwrap();
        assert_eq!(train.len(), test.len());
        assert_ne!(train.features(), test.features());
    }

    #[test]
    fn min_max_flag_uses_training_statistics() {
        let mut spec = DatasetSpec::moons(0.1, 30, 1);
        spec.min_max_scale = true;
        let (train, _) = spec.materialize().unwrap();
        for j in 0..2 {
            let col: Vec<f64> = train.features().iter_rows().map(|r| r[j]).collect();
            let lo = col.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = col.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            assert_eq!((lo, hi), (0.0, 1.0));
        }
    }
}
