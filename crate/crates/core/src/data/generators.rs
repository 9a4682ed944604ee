use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::data::{Dataset, Provenance};
use crate::error::{Error, Result};
use crate::net::Matrix;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MoonsConfig {
    pub n_per_class: usize,
    pub noise_sigma: f64,
    pub seed: u64,
}

impl Default for MoonsConfig {
    fn default() -> Self {
        MoonsConfig {
            n_per_class: 100,
            noise_sigma: 0.1,
            seed: 0,
        }
    }
}

/// Two interleaving half circles of radius 1.
///
/// Class 0 lies on `(cos t, sin t)` and class 1 on `(1 - cos t, 0.5 - sin t)`
/// for `t` on an even grid over `[0, pi]`; isotropic Gaussian noise is added on top.
pub fn make_moons(config: &MoonsConfig) -> Result<Dataset> {
    if config.n_per_class == 0 {
        return Err(Error::Parameter("moons: n_per_class must be >= 1".into()));
    }
    if !(config.noise_sigma >= 0.0 && config.noise_sigma.is_finite()) {
        return Err(Error::Parameter(format!(
            "moons: bad noise sigma {}",
            config.noise_sigma
        )));
    }
    let n = config.n_per_class;
    let theta = |i: usize| if n == 1 { 0.0 } else { PI * i as f64 / (n - 1) as f64 };

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let noise = Normal::new(0.0, config.noise_sigma).expect("validated sigma");
    let mut data = Vec::with_capacity(4 * n);
    let mut labels = Vec::with_capacity(2 * n);
    for class in 0..2 {
        for i in 0..n {
            let t = theta(i);
            let (x, y) = if class == 0 {
                (t.cos(), t.sin())
            } else {
                (1.0 - t.cos(), 0.5 - t.sin())
            };
            if config.noise_sigma > 0.0 {
                data.push(x + noise.sample(&mut rng));
                data.push(y + noise.sample(&mut rng));
            } else {
                data.push(x);
                data.push(y);
            }
            labels.push(class);
        }
    }
    Dataset::new(
        Matrix::new(2 * n, 2, data)?,
        labels,
        2,
        Provenance::Moons(config.clone()),
    )
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FineGrainedConfig {
    pub n_classes: usize,
    pub n_per_class: usize,
    pub n_dims: usize,
    /// Minimum distance between the surfaces of two class balls.
    pub separation: f64,
    pub within_radius: f64,
    pub seed: u64,
}

impl FineGrainedConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Parameter(format!("fine-grained: {m}")));
        if self.n_classes < 2 {
            return bad(format!("need at least 2 classes, got {}", self.n_classes));
        }
        if self.n_per_class == 0 || self.n_dims == 0 {
            return bad("n_per_class and n_dims must be positive".into());
        }
        if !(self.separation > 0.0 && self.separation.is_finite()) {
            return bad(format!("separation must be > 0, got {}", self.separation));
        }
        if !(self.within_radius > 0.0 && self.within_radius.is_finite()) {
            return bad(format!("within_radius must be > 0, got {}", self.within_radius));
        }
        if self.n_classes > self.n_dims + 1 {
            return bad(format!(
                "{} simplex vertices do not fit in {} dimensions",
                self.n_classes, self.n_dims
            ));
        }
        Ok(())
    }

    /// Distance between any two class centres.
    pub fn center_spacing(&self) -> f64 {
        self.separation + 2.0 * self.within_radius
    }
}

/// Vertices of a regular simplex with `k` vertices embedded in `dims >= k - 1`
/// dimensions, centred at the origin, with pairwise distance `spacing`.
///
/// Uses the Helmert basis of the hyperplane orthogonal to `(1, ..., 1)`: the
/// centred unit vectors `e_i - 1/k` have pairwise distance `sqrt(2)`.
pub fn simplex_centers(k: usize, dims: usize, spacing: f64) -> Vec<Vec<f64>> {
    assert!(k >= 1 && dims + 1 >= k, "simplex of {k} vertices needs {} dims", k - 1);
    let scale = spacing / std::f64::consts::SQRT_2;
    (0..k)
        .map(|i| {
            let mut v = vec![0.0; dims];
            for (j, coord) in v.iter_mut().enumerate().take(k - 1) {
                // Helmert vector h_j = (1, .., 1, -(j + 1), 0, ..) / sqrt((j + 1)(j + 2)).
                let m = (j + 1) as f64;
                let norm = (m * (m + 1.0)).sqrt();
                *coord = scale
                    * if i <= j {
                        1.0 / norm
                    } else if i == j + 1 {
                        -m / norm
                    } else {
                        0.0
                    };
            }
            v
        })
        .collect()
}

/// Classes drawn uniformly from balls of radius `within_radius` around simplex
/// vertices spaced `separation + 2 * within_radius` apart, so every cross-class
/// pair is at least `separation` apart.
pub fn make_fine_grained(config: &FineGrainedConfig) -> Result<Dataset> {
    config.validate()?;
    let d = config.n_dims;
    let centers = simplex_centers(config.n_classes, d, config.center_spacing());
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);

    let n = config.n_classes * config.n_per_class;
    let mut data = Vec::with_capacity(n * d);
    let mut labels = Vec::with_capacity(n);
    let mut direction = vec![0.0; d];
    for (class, center) in centers.iter().enumerate() {
        for _ in 0..config.n_per_class {
            let norm = loop {
                direction.iter_mut().for_each(|v| *v = StandardNormal.sample(&mut rng));
                let norm = direction.iter().map(|v| v * v).sum::<f64>().sqrt();
                if norm > 1e-12 {
                    break norm;
                }
            };
            let u: f64 = rng.random();
            let radius = config.within_radius * u.powf(1.0 / d as f64);
            data.extend(center.iter().zip(&direction).map(|(c, v)| c + radius * v / norm));
            labels.push(class);
        }
    }
    Dataset::new(
        Matrix::new(n, d, data)?,
        labels,
        config.n_classes,
        Provenance::FineGrained(config.clone()),
    )
}
