//! Python bindings: activations, Lipschitz estimators, datasets and training runs.

use pyo3::exceptions::{PyIOError, PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use lstar_core::harness::{self, ExperimentSetup, RunStats, SweepConfig, DEFAULT_SLOPES};
use lstar_core::lipschitz::{estimate_secant, estimate_sup_derivative, Interval, DEFAULT_GRID_POINTS};
use lstar_core::{ActivationSpec, Architecture, Dataset, DatasetSpec, Error, TrainConfig};

fn py_err(e: Error) -> PyErr {
    match e {
        Error::Io { .. } | Error::Ingestion { .. } => PyIOError::new_err(e.to_string()),
        Error::Run { .. } | Error::Json(_) => PyRuntimeError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

/// An activation function parsed from a descriptor such as `lstar:0.1` or `tanhmix:0.1:0.15`.
#[pyclass(name = "Activation", frozen, eq, from_py_object)]
#[derive(Clone, PartialEq)]
struct PyActivation(ActivationSpec);

#[pymethods]
impl PyActivation {
    #[new]
    fn new(descriptor: &str) -> PyResult<Self> {
        descriptor.parse().map(PyActivation).map_err(py_err)
    }

    fn __call__(&self, x: f64) -> PyResult<f64> {
        self.eval(x)
    }

    fn eval(&self, x: f64) -> PyResult<f64> {
        self.0.eval(x).map_err(py_err)
    }

    /// Right-hand derivative at kinks.
    fn derivative(&self, x: f64) -> PyResult<f64> {
        self.0.derivative(x).map_err(py_err)
    }

    fn left_derivative(&self, x: f64) -> PyResult<f64> {
        self.0.left_derivative(x).map_err(py_err)
    }

    /// `(p(x), n(x))` with `f(x) = p(x) + n(x)`.
    fn piecewise(&self, x: f64) -> (f64, f64) {
        let view = self.0.piecewise_view();
        (view.positive(x), view.negative(x))
    }

    #[getter]
    fn kind(&self) -> &'static str {
        self.0.kind().name()
    }

    #[getter]
    fn params(&self) -> Vec<(String, f64)> {
        self.0.params().into_iter().map(|(k, v)| (k.to_string(), v)).collect()
    }

    #[getter]
    fn trainable(&self) -> bool {
        self.0.is_trainable()
    }

    fn __str__(&self) -> String {
        self.0.to_string()
    }

    fn __repr__(&self) -> String {
        format!("Activation('{}')", self.0)
    }
}

/// Estimated Lipschitz constant of `af` on `[lo, hi]`.
///
/// Scans the derivative on a grid unless `secant_pairs` is given, in which
/// case random secant slopes are used.
#[pyfunction]
#[pyo3(signature = (af, lo=-50.0, hi=0.0, grid=DEFAULT_GRID_POINTS, secant_pairs=None, seed=0))]
fn lipschitz(
    af: &PyActivation,
    lo: f64,
    hi: f64,
    grid: usize,
    secant_pairs: Option<usize>,
    seed: u64,
) -> PyResult<f64> {
    let interval = Interval::new(lo, hi).map_err(py_err)?;
    let est = match secant_pairs {
        Some(n) => estimate_secant(&af.0, interval, n, seed),
        None => estimate_sup_derivative(&af.0, interval, grid),
    };
    est.map(|e| e.l_hat).map_err(py_err)
}

#[pyclass(name = "Dataset", frozen)]
struct PyDataset(Dataset);

#[pymethods]
impl PyDataset {
    /// Materialises a dataset descriptor; `split` is `"train"` or `"test"`.
    #[staticmethod]
    #[pyo3(signature = (descriptor, split="train"))]
    fn generate(py: Python<'_>, descriptor: &str, split: &str) -> PyResult<Self> {
        let spec: DatasetSpec = descriptor.parse().map_err(py_err)?;
        let take_test = match split {
            "train" => false,
            "test" => true,
            other => {
                return Err(PyValueError::new_err(format!(
                    "split must be 'train' or 'test', got {other:?}"
                )))
            }
        };
        let (train, test) = py.detach(|| spec.materialize()).map_err(py_err)?;
        Ok(PyDataset(if take_test { test } else { train }))
    }

    fn __len__(&self) -> usize {
        self.0.len()
    }

    #[getter]
    fn n_dims(&self) -> usize {
        self.0.n_dims()
    }

    #[getter]
    fn n_classes(&self) -> usize {
        self.0.n_classes()
    }

    #[getter]
    fn features(&self) -> Vec<Vec<f64>> {
        self.0.features().iter_rows().map(|r| r.to_vec()).collect()
    }

    #[getter]
    fn labels(&self) -> Vec<usize> {
        self.0.labels().to_vec()
    }

    fn class_counts(&self) -> Vec<usize> {
        self.0.class_counts()
    }

    fn subsample(&self, n_per_class: usize, seed: u64) -> PyResult<Self> {
        self.0.subsample(n_per_class, seed).map(PyDataset).map_err(py_err)
    }

    fn to_csv(&self) -> String {
        self.0.to_csv()
    }
}

#[pyclass(name = "Separation", frozen, get_all)]
struct PySeparation {
    c: f64,
    recommended_l: f64,
    class_pair: (usize, usize),
    sample_pair: (usize, usize),
}

/// Minimum cross-class distance `c` and the sufficient Lipschitz constant `c / 2`.
#[pyfunction]
fn class_separation(py: Python<'_>, dataset: &PyDataset) -> PyResult<PySeparation> {
    let r = py.detach(|| lstar_core::class_separation(&dataset.0)).map_err(py_err)?;
    Ok(PySeparation {
        c: r.c,
        recommended_l: r.recommended_l,
        class_pair: r.class_pair,
        sample_pair: r.sample_pair,
    })
}

#[pyclass(name = "TrainResult", frozen, get_all)]
struct PyTrainResult {
    train_accuracy: f64,
    test_accuracy: f64,
    loss_curve: Vec<f64>,
    learned_af_params: Vec<Option<f64>>,
    /// Trained network as a JSON checkpoint.
    checkpoint: String,
}

fn config(epochs: usize, batch_size: usize, lr: f64, l2: f64, seed: u64) -> TrainConfig {
    TrainConfig {
        epochs,
        batch_size,
        learning_rate: lr,
        l2,
        seed,
        ..TrainConfig::default()
    }
}

/// Trains one network with `af` in every hidden layer.
#[pyfunction]
#[pyo3(signature = (data, af, widths=vec![64, 64], epochs=50, batch_size=32, lr=1e-3, l2=0.0, seed=0))]
#[allow(clippy::too_many_arguments)]
fn train(
    py: Python<'_>,
    data: &str,
    af: &PyActivation,
    widths: Vec<usize>,
    epochs: usize,
    batch_size: usize,
    lr: f64,
    l2: f64,
    seed: u64,
) -> PyResult<PyTrainResult> {
    let spec: DatasetSpec = data.parse().map_err(py_err)?;
    let cfg = config(epochs, batch_size, lr, l2, seed);
    let af = af.0;
    let (net, result) = py
        .detach(|| {
            let (train, test) = spec.materialize()?;
            let arch = Architecture {
                input_dim: train.n_dims(),
                hidden: widths,
                n_classes: train.n_classes().max(test.n_classes()),
                hidden_activation: af,
            };
            lstar_core::net::fit(&arch, &train, &test, &cfg)
        })
        .map_err(py_err)?;
    Ok(PyTrainResult {
        train_accuracy: result.final_train_accuracy,
        test_accuracy: result.final_test_accuracy,
        loss_curve: result.loss_curve,
        learned_af_params: result.learned_af_params,
        checkpoint: net.to_json(),
    })
}

/// Accuracy statistics of one configuration across seeds.
#[pyclass(name = "RunStats", frozen, get_all)]
struct PyRunStats {
    label: String,
    param: f64,
    mean_accuracy: f64,
    std_accuracy: f64,
    seeds: Vec<u64>,
    accuracies: Vec<f64>,
    loss_curves: Vec<Vec<f64>>,
}

#[pymethods]
impl PyRunStats {
    fn __repr__(&self) -> String {
        format!(
            "RunStats({}, param={}, mean={:.4}, std={:.4}, n={})",
            self.label,
            self.param,
            self.mean_accuracy,
            self.std_accuracy,
            self.seeds.len()
        )
    }
}

fn stats(label: String, param: f64, s: RunStats) -> PyRunStats {
    PyRunStats {
        label,
        param,
        mean_accuracy: s.mean_accuracy,
        std_accuracy: s.std_accuracy,
        seeds: s.per_seed.iter().map(|r| r.seed).collect(),
        accuracies: s.per_seed.iter().map(|r| r.accuracy).collect(),
        loss_curves: s.per_seed.into_iter().map(|r| r.loss_curve).collect(),
    }
}

fn setup(data: &str, seeds: Vec<u64>, widths: Vec<usize>, cfg: TrainConfig) -> PyResult<ExperimentSetup> {
    Ok(ExperimentSetup {
        dataset: data.parse().map_err(py_err)?,
        widths,
        train: cfg,
        seeds,
    })
}

/// L*ReLU slope sweep: one `RunStats` per slope.
#[pyfunction]
#[pyo3(signature = (data, slopes=DEFAULT_SLOPES.to_vec(), seeds=vec![1, 2, 3], widths=vec![64, 64], epochs=50, batch_size=32, lr=1e-3, l2=0.0))]
#[allow(clippy::too_many_arguments)]
fn sweep(
    py: Python<'_>,
    data: &str,
    slopes: Vec<f64>,
    seeds: Vec<u64>,
    widths: Vec<usize>,
    epochs: usize,
    batch_size: usize,
    lr: f64,
    l2: f64,
) -> PyResult<Vec<PyRunStats>> {
    let config = SweepConfig {
        slopes,
        setup: setup(data, seeds, widths, config(epochs, batch_size, lr, l2, 0))?,
    };
    let rows = py.detach(|| harness::slope_sweep(&config)).map_err(py_err)?;
    Ok(rows
        .into_iter()
        .map(|r| stats(format!("lstar:{}", r.slope), r.slope, r.stats))
        .collect())
}

/// L*ReLU(alpha) against tanh(a x) + b x after checking both share the negative-domain Lipschitz constant.
#[pyfunction]
#[pyo3(signature = (data, alpha=0.25, a=0.1, b=0.15, seeds=vec![1, 2, 3], widths=vec![64, 64], epochs=50, batch_size=32, lr=1e-3, l2=0.0))]
#[allow(clippy::too_many_arguments)]
fn matched(
    py: Python<'_>,
    data: &str,
    alpha: f64,
    a: f64,
    b: f64,
    seeds: Vec<u64>,
    widths: Vec<usize>,
    epochs: usize,
    batch_size: usize,
    lr: f64,
    l2: f64,
) -> PyResult<(PyRunStats, PyRunStats)> {
    let setup = setup(data, seeds, widths, config(epochs, batch_size, lr, l2, 0))?;
    let m = py
        .detach(|| harness::matched_lipschitz(&setup, alpha, a, b))
        .map_err(py_err)?;
    Ok((
        stats(format!("lstar:{alpha}"), alpha, m.lstar),
        stats(m.tanhmix.to_string(), alpha, m.tanhmix_stats),
    ))
}

/// Registers the bindings on `m`.
#[pymodule]
pub fn lstar_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyActivation>()?;
    m.add_class::<PyDataset>()?;
    m.add_class::<PySeparation>()?;
    m.add_class::<PyTrainResult>()?;
    m.add_class::<PyRunStats>()?;
    m.add_function(wrap_pyfunction!(lipschitz, m)?)?;
    m.add_function(wrap_pyfunction!(class_separation, m)?)?;
    m.add_function(wrap_pyfunction!(train, m)?)?;
    m.add_function(wrap_pyfunction!(sweep, m)?)?;
    m.add_function(wrap_pyfunction!(matched, m)?)?;
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    Ok(())
}
