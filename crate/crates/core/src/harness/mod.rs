//! Multi-seed experiments: slope sweeps, matched-Lipschitz comparisons,
//! parametric-activation initialisation sensitivity, and the two-moon demo.
//!
//! Every run is a pure function of its config and seed. Seeds execute on the
//! rayon pool and are collected back in input order, so emitted rows are
//! always sorted by `(slope, seed)` regardless of scheduling.

mod output;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::afzoo::{make_lstar_relu, ActivationSpec};
use crate::data::{Dataset, DatasetSpec};
use crate::error::{Error, Result};
use crate::lipschitz::{estimate_sup_derivative, DEFAULT_GRID_POINTS, NEGATIVE_DOMAIN};
use crate::net::{fit, Architecture, Matrix, Network, TrainConfig};

pub use output::{
    demo_output, emit, loss_records_json, matched_output, results_csv, sensitivity_output, sweep_output, LossRecord,
    ResultRow, CSV_HEADER,
};

/// Slope grid covering the stable range `[0.1, 0.4]` plus both endpoints.
pub const DEFAULT_SLOPES: [f64; 11] = [0.0, 0.05, 0.1, 0.15, 0.2, 0.25, 0.3, 0.4, 0.5, 0.7, 1.0];
pub const DEFAULT_SEEDS: [u64; 3] = [1, 2, 3];
pub const DEFAULT_WIDTHS: [usize; 2] = [64, 64];

/// Outcome of one training run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub seed: u64,
    pub train_accuracy: f64,
    /// Final test accuracy; this is the number every statistic is built from.
    pub accuracy: f64,
    pub loss_curve: Vec<f64>,
    pub learned_af_params: Vec<Option<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunStats {
    pub mean_accuracy: f64,
    /// Population standard deviation.
    pub std_accuracy: f64,
    pub n_runs: usize,
    pub per_seed: Vec<RunRecord>,
}

impl RunStats {
    pub fn min_accuracy(&self) -> f64 {
        self.per_seed.iter().map(|r| r.accuracy).fold(f64::INFINITY, f64::min)
    }

    pub fn max_accuracy(&self) -> f64 {
        self.per_seed
            .iter()
            .map(|r| r.accuracy)
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

pub fn aggregate(per_seed: Vec<RunRecord>) -> Result<RunStats> {
    if per_seed.is_empty() {
        return Err(Error::Parameter("cannot aggregate zero runs".into()));
    }
    let n = per_seed.len() as f64;
    let mean = per_seed.iter().map(|r| r.accuracy).sum::<f64>() / n;
    let var = per_seed.iter().map(|r| (r.accuracy - mean).powi(2)).sum::<f64>() / n;
    Ok(RunStats {
        mean_accuracy: mean,
        std_accuracy: var.sqrt(),
        n_runs: per_seed.len(),
        per_seed,
    })
}

/// Mean and population std of a scalar sample.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParamStats {
    pub mean: f64,
    pub std: f64,
}

impl ParamStats {
    fn of(values: &[f64]) -> Self {
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
        ParamStats { mean, std: var.sqrt() }
    }
}

/// What every experiment shares: data, network widths, optimiser settings, seeds.
///
/// `train.seed` is ignored; each run uses its own entry of `seeds`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSetup {
    pub dataset: DatasetSpec,
    pub widths: Vec<usize>,
    pub train: TrainConfig,
    pub seeds: Vec<u64>,
}

impl ExperimentSetup {
    fn validate(&self) -> Result<()> {
        if self.seeds.is_empty() {
            return Err(Error::Parameter("at least one seed is required".into()));
        }
        if self.widths.contains(&0) {
            return Err(Error::Parameter("hidden widths must be positive".into()));
        }
        self.train.validate()
    }
}

/// Materialised data shared read-only by all runs of an experiment.
pub struct Prepared {
    pub train: Dataset,
    pub test: Dataset,
}

impl Prepared {
    pub fn load(spec: &DatasetSpec) -> Result<Self> {
        let (train, test) = spec.materialize()?;
        Ok(Prepared { train, test })
    }

    fn architecture(&self, widths: &[usize], af: ActivationSpec) -> Architecture {
        Architecture {
            input_dim: self.train.n_dims(),
            hidden: widths.to_vec(),
            n_classes: self.train.n_classes().max(self.test.n_classes()),
            hidden_activation: af,
        }
    }
}

fn run_one(
    data: &Prepared,
    widths: &[usize],
    af: ActivationSpec,
    train: &TrainConfig,
    seed: u64,
) -> Result<(RunRecord, Network)> {
    let config = TrainConfig { seed, ..train.clone() };
    let (net, result) = fit(&data.architecture(widths, af), &data.train, &data.test, &config)
        .map_err(|e| e.in_run(format!("af={af} seed={seed}")))?;
    Ok((
        RunRecord {
            seed,
            train_accuracy: result.final_train_accuracy,
            accuracy: result.final_test_accuracy,
            loss_curve: result.loss_curve,
            learned_af_params: result.learned_af_params,
        },
        net,
    ))
}

fn run_seeds(data: &Prepared, setup: &ExperimentSetup, af: ActivationSpec) -> Result<Vec<(RunRecord, Network)>> {
    setup
        .seeds
        .par_iter()
        .map(|&seed| run_one(data, &setup.widths, af, &setup.train, seed))
        .collect()
}

/// Trains one network per seed with `af` in every hidden layer.
pub fn run_af(data: &Prepared, setup: &ExperimentSetup, af: ActivationSpec) -> Result<RunStats> {
    setup.validate()?;
    let runs = run_seeds(data, setup, af)?;
    aggregate(runs.into_iter().map(|(r, _)| r).collect())
}

/// Negative-domain Lipschitz constant of `af` as configured.
pub fn negative_slope(af: &ActivationSpec) -> Result<f64> {
    Ok(estimate_sup_derivative(af, NEGATIVE_DOMAIN, DEFAULT_GRID_POINTS)?.l_hat)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    pub slopes: Vec<f64>,
    pub setup: ExperimentSetup,
}

impl SweepConfig {
    pub fn validate(&self) -> Result<()> {
        if self.slopes.is_empty() {
            return Err(Error::Parameter("slope list is empty".into()));
        }
        if self.slopes.iter().any(|s| !(s.is_finite() && *s >= 0.0)) {
            return Err(Error::Parameter("slopes must be finite and >= 0".into()));
        }
        if self.slopes.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Parameter(format!(
                "slopes must be strictly increasing, got {:?}",
                self.slopes
            )));
        }
        self.setup.validate()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub slope: f64,
    pub stats: RunStats,
}

/// L*ReLU accuracy as a function of the negative-domain slope.
pub fn slope_sweep(config: &SweepConfig) -> Result<Vec<SweepRow>> {
    config.validate()?;
    let data = Prepared::load(&config.setup.dataset)?;
    slope_sweep_on(&data, config)
}

/// [`slope_sweep`] on already materialised data.
pub fn slope_sweep_on(data: &Prepared, config: &SweepConfig) -> Result<Vec<SweepRow>> {
    config.validate()?;
    config
        .slopes
        .iter()
        .map(|&slope| {
            let af = make_lstar_relu(slope)?;
            let stats = run_af(data, &config.setup, af).map_err(|e| e.in_run(format!("slope={slope}")))?;
            Ok(SweepRow { slope, stats })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatchedResult {
    pub alpha: f64,
    pub tanhmix: ActivationSpec,
    /// Negative-domain Lipschitz constant measured for `tanhmix`.
    pub tanhmix_l: f64,
    pub lstar: RunStats,
    pub tanhmix_stats: RunStats,
}

/// Checks that `tanh(a x) + b x` has negative-domain Lipschitz constant `alpha`
/// (within 1e-3) and returns the measured value.
pub fn check_matched_premise(alpha: f64, a: f64, b: f64) -> Result<f64> {
    let tanhmix = ActivationSpec::TanhMix { a, b };
    tanhmix.validate()?;
    let l = negative_slope(&tanhmix)?;
    if (l - alpha).abs() > 1e-3 {
        return Err(Error::Parameter(format!(
            "matched-Lipschitz premise violated: L*ReLU slope {alpha} vs tanhmix({a}, {b}) Lipschitz constant {l}"
        )));
    }
    Ok(l)
}

/// L*ReLU(alpha) against `tanh(a x) + b x` sharing its negative-domain Lipschitz constant.
pub fn matched_lipschitz(setup: &ExperimentSetup, alpha: f64, a: f64, b: f64) -> Result<MatchedResult> {
    let tanhmix_l = check_matched_premise(alpha, a, b)?;
    let lstar_af = make_lstar_relu(alpha)?;
    let tanhmix = ActivationSpec::TanhMix { a, b };
    setup.validate()?;
    let data = Prepared::load(&setup.dataset)?;
    Ok(MatchedResult {
        alpha,
        tanhmix,
        tanhmix_l,
        lstar: run_af(&data, setup, lstar_af)?,
        tanhmix_stats: run_af(&data, setup, tanhmix)?,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Parametric {
    PRelu,
    PSwish,
}

impl Parametric {
    pub fn with_init(self, init: f64) -> ActivationSpec {
        match self {
            Parametric::PRelu => ActivationSpec::PRelu { alpha: init },
            Parametric::PSwish => ActivationSpec::PSwish { beta: init },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SensitivityRow {
    pub init: f64,
    pub stats: RunStats,
    /// Learned parameter across seeds, one entry per hidden layer.
    pub learned: Vec<ParamStats>,
}

/// Spread of mean accuracies across initialisations (max minus min).
pub fn accuracy_spread(rows: &[SensitivityRow]) -> f64 {
    let means = rows.iter().map(|r| r.stats.mean_accuracy);
    let max = means.clone().fold(f64::NEG_INFINITY, f64::max);
    let min = means.fold(f64::INFINITY, f64::min);
    max - min
}

pub fn sensitivity(
    data: &Prepared,
    setup: &ExperimentSetup,
    kind: Parametric,
    inits: &[f64],
) -> Result<Vec<SensitivityRow>> {
    if inits.is_empty() {
        return Err(Error::Parameter("at least one initial value is required".into()));
    }
    inits
        .iter()
        .map(|&init| {
            let af = kind.with_init(init);
            af.validate()?;
            let stats = run_af(data, setup, af).map_err(|e| e.in_run(format!("init={init}")))?;
            let n_hidden = setup.widths.len();
            let learned = (0..n_hidden)
                .map(|layer| {
                    let values: Vec<f64> = stats
                        .per_seed
                        .iter()
                        .filter_map(|r| r.learned_af_params[layer])
                        .collect();
                    ParamStats::of(&values)
                })
                .collect();
            Ok(SensitivityRow { init, stats, learned })
        })
        .collect()
}

/// PReLU trained from each initial slope.
pub fn prelu_sensitivity(setup: &ExperimentSetup, inits: &[f64]) -> Result<Vec<SensitivityRow>> {
    let data = Prepared::load(&setup.dataset)?;
    sensitivity(&data, setup, Parametric::PRelu, inits)
}

/// PSwish trained from each initial beta.
pub fn pswish_sensitivity(setup: &ExperimentSetup, inits: &[f64]) -> Result<Vec<SensitivityRow>> {
    let data = Prepared::load(&setup.dataset)?;
    sensitivity(&data, setup, Parametric::PSwish, inits)
}

/// Class predictions on a regular grid, row 0 at `y_range.0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecisionGrid {
    pub nx: usize,
    pub ny: usize,
    pub x_range: (f64, f64),
    pub y_range: (f64, f64),
    pub classes: Vec<usize>,
}

pub const DEMO_GRID_SIZE: usize = 200;
pub const DEMO_X_RANGE: (f64, f64) = (-1.5, 2.5);
pub const DEMO_Y_RANGE: (f64, f64) = (-1.0, 1.5);

impl DecisionGrid {
    pub fn predict(net: &Network, nx: usize, ny: usize, x_range: (f64, f64), y_range: (f64, f64)) -> Result<Self> {
        if nx < 2 || ny < 2 {
            return Err(Error::Parameter("decision grid needs at least 2x2 points".into()));
        }
        let coord = |i: usize, n: usize, (lo, hi): (f64, f64)| lo + (hi - lo) * i as f64 / (n - 1) as f64;
        let mut points = Vec::with_capacity(2 * nx * ny);
        for iy in 0..ny {
            for ix in 0..nx {
                points.push(coord(ix, nx, x_range));
                points.push(coord(iy, ny, y_range));
            }
        }
        let classes = net.predict(&Matrix::new(nx * ny, 2, points)?)?;
        Ok(DecisionGrid {
            nx,
            ny,
            x_range,
            y_range,
            classes,
        })
    }

    /// One CSV line per grid row, `nx` comma-separated class ids.
    pub fn to_csv(&self) -> String {
        let mut out = String::with_capacity(self.classes.len() * 2);
        for row in self.classes.chunks(self.nx) {
            let line: Vec<String> = row.iter().map(|c| c.to_string()).collect();
            out.push_str(&line.join(","));
            out.push('\n');
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MoonsDemo {
    pub alpha: f64,
    pub lstar: RunStats,
    pub relu: RunStats,
    pub lstar_grid: DecisionGrid,
    pub relu_grid: DecisionGrid,
}

fn best_run(runs: &[(RunRecord, Network)]) -> &Network {
    let mut best = &runs[0];
    for run in runs {
        if run.0.accuracy > best.0.accuracy {
            best = run;
        }
    }
    &best.1
}

/// Two-moons comparison of L*ReLU(alpha) and ReLU with identical data, widths and seeds.
/// `setup.dataset` should be a moons descriptor; the grids assume 2-D inputs.
pub fn two_moon_demo(setup: &ExperimentSetup, alpha: f64) -> Result<MoonsDemo> {
    setup.validate()?;
    let lstar_af = make_lstar_relu(alpha)?;
    let data = Prepared::load(&setup.dataset)?;
    if data.train.n_dims() != 2 {
        return Err(Error::Shape(format!(
            "two-moon demo needs 2-D data, got {} features",
            data.train.n_dims()
        )));
    }
    let lstar_runs = run_seeds(&data, setup, lstar_af)?;
    let relu_runs = run_seeds(&data, setup, ActivationSpec::Relu)?;
    let grid = |net: &Network| DecisionGrid::predict(net, DEMO_GRID_SIZE, DEMO_GRID_SIZE, DEMO_X_RANGE, DEMO_Y_RANGE);
    let lstar_grid = grid(best_run(&lstar_runs))?;
    let relu_grid = grid(best_run(&relu_runs))?;
    Ok(MoonsDemo {
        alpha,
        lstar: aggregate(lstar_runs.into_iter().map(|(r, _)| r).collect())?,
        relu: aggregate(relu_runs.into_iter().map(|(r, _)| r).collect())?,
        lstar_grid,
        relu_grid,
    })
}
