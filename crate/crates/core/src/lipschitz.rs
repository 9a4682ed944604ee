//! Lipschitz estimates for activations and class-separation measurements for datasets.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::ser::SerializeMap;
use serde::{Serialize, Serializer};

use crate::afzoo::ActivationSpec;
use crate::data::Dataset;
use crate::error::{Error, Result};

/// Interval used for negative-domain claims ("for x <= 0").
pub const NEGATIVE_DOMAIN: Interval = Interval { lo: -50.0, hi: 0.0 };
pub const DEFAULT_GRID_POINTS: usize = 100_001;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite()) {
            return Err(Error::Domain(format!("interval [{lo}, {hi}] is not finite")));
        }
        if lo >= hi {
            return Err(Error::Parameter(format!("degenerate interval [{lo}, {hi}]")));
        }
        Ok(Interval { lo, hi })
    }

    fn point(&self, i: usize, n: usize) -> f64 {
        if i + 1 == n {
            self.hi
        } else {
            self.lo + (self.hi - self.lo) * (i as f64 / (n - 1) as f64)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum EstimateMethod {
    DerivativeGrid,
    SecantPairs,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LipschitzEstimate {
    pub activation: ActivationSpec,
    pub interval: Interval,
    pub l_hat: f64,
    pub method: EstimateMethod,
    /// Grid size for `DerivativeGrid`, number of pairs for `SecantPairs`.
    pub grid_points: usize,
}

impl LipschitzEstimate {
    /// `0 <= L < 1`.
    pub fn is_contraction(&self) -> bool {
        is_contraction(self.l_hat)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("estimate serializes")
    }
}

impl Serialize for LipschitzEstimate {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        struct Params<'a>(&'a ActivationSpec);
        impl Serialize for Params<'_> {
            fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
                let params = self.0.params();
                let mut map = serializer.serialize_map(Some(params.len()))?;
                for (k, v) in params {
                    map.serialize_entry(k, &v)?;
                }
                map.end()
            }
        }

        let mut map = serializer.serialize_map(Some(6))?;
        map.serialize_entry("kind", self.activation.kind().name())?;
        map.serialize_entry("params", &Params(&self.activation))?;
        map.serialize_entry("interval", &[self.interval.lo, self.interval.hi])?;
        map.serialize_entry("grid_points", &self.grid_points)?;
        map.serialize_entry("method", &self.method)?;
        map.serialize_entry("l_hat", &self.l_hat)?;
        map.end()
    }
}

pub fn is_contraction(l_hat: f64) -> bool {
    (0.0..1.0).contains(&l_hat)
}

/// Max of `|f'|` over a uniform grid of `grid_points` points spanning the interval.
///
/// Derivatives are taken from inside the interval: the right endpoint uses the
/// left-hand derivative, every other point the right-hand one. This makes
/// `[-50, 0]` measure the negative part alone.
pub fn estimate_sup_derivative(
    af: &ActivationSpec,
    interval: Interval,
    grid_points: usize,
) -> Result<LipschitzEstimate> {
    let interval = Interval::new(interval.lo, interval.hi)?;
    if grid_points < 2 {
        return Err(Error::Parameter(format!("grid_points must be >= 2, got {grid_points}")));
    }
    af.validate()?;

    let mut l_hat = 0.0f64;
    for i in 0..grid_points {
        let x = interval.point(i, grid_points);
        let d = if i + 1 == grid_points {
            af.left_derivative(x)?
        } else {
            af.grad(x)
        };
        l_hat = l_hat.max(d.abs());
    }

    Ok(LipschitzEstimate {
        activation: *af,
        interval,
        l_hat,
        method: EstimateMethod::DerivativeGrid,
        grid_points,
    })
}

/// Max secant slope `|f(x) - f(y)| / |x - y|` over `n_pairs` seeded random pairs.
pub fn estimate_secant(
    af: &ActivationSpec,
    interval: Interval,
    n_pairs: usize,
    seed: u64,
) -> Result<LipschitzEstimate> {
    let interval = Interval::new(interval.lo, interval.hi)?;
    if n_pairs == 0 {
        return Err(Error::Parameter("n_pairs must be >= 1".into()));
    }
    af.validate()?;

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut l_hat = 0.0f64;
    let mut drawn = 0;
    while drawn < n_pairs {
        let x = rng.random_range(interval.lo..=interval.hi);
        let y = rng.random_range(interval.lo..=interval.hi);
        if x == y {
            continue;
        }
        drawn += 1;
        let slope = (af.apply(x) - af.apply(y)).abs() / (x - y).abs();
        l_hat = l_hat.max(slope);
    }

    Ok(LipschitzEstimate {
        activation: *af,
        interval,
        l_hat,
        method: EstimateMethod::SecantPairs,
        grid_points: n_pairs,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SeparationReport {
    /// Minimum Euclidean distance between samples of different classes.
    pub c: f64,
    /// `c / 2`: the Lipschitz constant sufficient to classify a c-separated set.
    pub recommended_l: f64,
    /// Labels of the closest cross-class pair (lowest index first).
    pub class_pair: (usize, usize),
    /// Sample indices of that pair.
    pub sample_pair: (usize, usize),
}

/// Exhaustive O(n^2) scan over cross-class pairs. Ties resolve to the
/// lexicographically smallest `(i, j)` index pair.
pub fn class_separation(dataset: &Dataset) -> Result<SeparationReport> {
    let labels = dataset.labels();
    let first = labels.first().copied();
    if first.is_none() || labels.iter().all(|&l| Some(l) == first) {
        return Err(Error::Data(
            "class separation needs at least two non-empty classes".into(),
        ));
    }

    let x = dataset.features();
    let mut best = f64::INFINITY;
    let mut pair = (0, 0);
    for i in 0..x.rows() {
        let xi = x.row(i);
        for j in (i + 1)..x.rows() {
            if labels[i] == labels[j] {
                continue;
            }
            let d2: f64 = xi.iter().zip(x.row(j)).map(|(a, b)| (a - b) * (a - b)).sum();
            if d2 < best {
                best = d2;
                pair = (i, j);
            }
        }
    }

    let c = best.sqrt();
    Ok(SeparationReport {
        c,
        recommended_l: c / 2.0,
        class_pair: (labels[pair.0], labels[pair.1]),
        sample_pair: pair,
    })
}
