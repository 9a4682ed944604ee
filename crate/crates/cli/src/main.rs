use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use lstar_core::fmt::sig9;
use lstar_core::harness::{
    demo_output, loss_records_json, matched_lipschitz, prelu_sensitivity, pswish_sensitivity, results_csv,
    sensitivity_output, slope_sweep, sweep_output, two_moon_demo, ExperimentSetup, LossRecord, Parametric, ResultRow,
    RunStats, SweepConfig,
};
use lstar_core::lipschitz::{estimate_secant, estimate_sup_derivative, Interval, DEFAULT_GRID_POINTS};
use lstar_core::net::fit;
use lstar_core::{class_separation, ActivationSpec, Architecture, DatasetSpec, TrainConfig};

#[derive(Parser)]
#[command(
    name = "lstar",
    version,
    about = "Activation zoo, Lipschitz estimators and slope experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate an activation at one or more points.
    AfEval(PointArgs),
    /// Derivative of an activation (right-hand at kinks).
    AfGrad(PointArgs),
    /// Estimate the Lipschitz constant of an activation on an interval.
    Lipschitz(LipschitzArgs),
    /// Minimum cross-class distance of a dataset and the c/2 Lipschitz target.
    Separation(SeparationArgs),
    /// Generate a dataset and write it as CSV.
    Gen(GenArgs),
    /// Train one network and optionally save a checkpoint.
    Train(TrainArgs),
    /// Multi-seed sweep of the L*ReLU negative slope.
    Sweep(SweepArgs),
    /// Compare L*ReLU(alpha) with tanh(a x) + b x of the same Lipschitz constant.
    Matched(MatchedArgs),
    /// PReLU or PSwish accuracy across initial parameter values.
    Sensitivity(SensitivityArgs),
    /// Two-moons comparison of L*ReLU and ReLU with decision-grid rasters.
    MoonsDemo(MoonsArgs),
}

#[derive(Args)]
#[command(allow_negative_numbers = true)]
struct PointArgs {
    /// Activation descriptor, e.g. relu, lstar:0.1, swish:1, tanhmix:0.1:0.15.
    #[arg(long)]
    af: ActivationSpec,
    /// Input points, comma separated.
    #[arg(long, value_delimiter = ',', required = true, allow_hyphen_values = true)]
    x: Vec<f64>,
}

#[derive(Args)]
#[command(allow_negative_numbers = true)]
struct LipschitzArgs {
    /// Activation descriptor.
    #[arg(long)]
    af: ActivationSpec,
    /// Lower end of the interval.
    #[arg(long, default_value_t = -50.0)]
    lo: f64,
    /// Upper end of the interval.
    #[arg(long, default_value_t = 0.0)]
    hi: f64,
    /// Grid points for the derivative scan.
    #[arg(long, default_value_t = DEFAULT_GRID_POINTS)]
    grid: usize,
    /// Use this many random secant pairs instead of the derivative grid.
    #[arg(long)]
    secant: Option<usize>,
    /// Seed for secant pairs.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Write the estimate as JSON.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Split {
    Train,
    Test,
}

#[derive(Args)]
struct SeparationArgs {
    /// Dataset descriptor, e.g. moons:sigma=0.2 or fg:c=0.4,k=5,dims=16.
    #[arg(long)]
    data: DatasetSpec,
    /// Which generated split to use.
    #[arg(long, value_enum, default_value_t = Split::Train)]
    split: Split,
    /// Write the report as JSON.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct GenArgs {
    /// Dataset descriptor, e.g. moons:sigma=0.2 or fg:c=0.4,k=5,dims=16.
    #[arg(long)]
    data: DatasetSpec,
    /// Which generated split to use.
    #[arg(long, value_enum, default_value_t = Split::Train)]
    split: Split,
    /// Output CSV path; standard output when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Network and optimiser flags shared by every training subcommand.
#[derive(Args)]
struct Training {
    /// Hidden layer widths, comma separated.
    #[arg(long, value_delimiter = ',', default_value = "64,64")]
    widths: Vec<usize>,
    #[arg(long, default_value_t = 50)]
    epochs: usize,
    #[arg(long, default_value_t = 32)]
    batch_size: usize,
    /// Adam learning rate.
    #[arg(long, default_value_t = 1e-3)]
    lr: f64,
    /// L2 penalty on weights.
    #[arg(long, default_value_t = 0.0)]
    l2: f64,
}

impl Training {
    fn config(&self, seed: u64) -> TrainConfig {
        TrainConfig {
            epochs: self.epochs,
            batch_size: self.batch_size,
            learning_rate: self.lr,
            l2: self.l2,
            seed,
            ..TrainConfig::default()
        }
    }

    fn setup(&self, dataset: DatasetSpec, seeds: Vec<u64>) -> ExperimentSetup {
        ExperimentSetup {
            dataset,
            widths: self.widths.clone(),
            train: self.config(0),
            seeds,
        }
    }
}

#[derive(Args)]
struct TrainArgs {
    /// Dataset descriptor, e.g. moons:sigma=0.2 or fg:c=0.4,k=5,dims=16.
    #[arg(long)]
    data: DatasetSpec,
    /// Hidden-layer activation descriptor.
    #[arg(long, default_value = "lstar:0.1")]
    af: ActivationSpec,
    /// Seed for initialisation and shuffling.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    training: Training,
    /// Write the trained network as a JSON checkpoint.
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Seeds and result destination shared by the multi-seed experiments.
#[derive(Args)]
struct Runs {
    /// Training seeds, comma separated.
    #[arg(long, value_delimiter = ',', default_value = "1,2,3")]
    seeds: Vec<u64>,
    /// Results CSV; loss curves go to the same stem with `.loss.json`.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    /// Dataset descriptor, e.g. moons:sigma=0.2 or fg:c=0.4,k=5,dims=16.
    #[arg(long)]
    data: DatasetSpec,
    /// Negative slopes, strictly increasing.
    #[arg(
        long,
        value_delimiter = ',',
        default_value = "0,0.05,0.1,0.15,0.2,0.25,0.3,0.4,0.5,0.7,1"
    )]
    slopes: Vec<f64>,
    #[command(flatten)]
    runs: Runs,
    #[command(flatten)]
    training: Training,
}

#[derive(Args)]
struct MatchedArgs {
    /// Dataset descriptor, e.g. moons:sigma=0.2 or fg:c=0.4,k=5,dims=16.
    #[arg(long)]
    data: DatasetSpec,
    /// L*ReLU slope, which is also the target Lipschitz constant.
    #[arg(long, default_value_t = 0.25)]
    alpha: f64,
    /// TanhMix `a` in tanh(a x) + b x.
    #[arg(long, default_value_t = 0.1)]
    a: f64,
    /// TanhMix `b` in tanh(a x) + b x.
    #[arg(long, default_value_t = 0.15)]
    b: f64,
    #[command(flatten)]
    runs: Runs,
    #[command(flatten)]
    training: Training,
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    Prelu,
    Pswish,
}

#[derive(Args)]
struct SensitivityArgs {
    /// Dataset descriptor, e.g. moons:sigma=0.2 or fg:c=0.4,k=5,dims=16.
    #[arg(long)]
    data: DatasetSpec,
    /// Parametric activation to train.
    #[arg(long, value_enum)]
    kind: Kind,
    /// Initial values, comma separated.
    #[arg(long, value_delimiter = ',', required = true)]
    inits: Vec<f64>,
    #[command(flatten)]
    runs: Runs,
    #[command(flatten)]
    training: Training,
}

#[derive(Args)]
struct MoonsArgs {
    /// Gaussian noise standard deviation.
    #[arg(long, default_value_t = 0.2)]
    sigma: f64,
    /// Samples per class.
    #[arg(long, default_value_t = 100)]
    n: usize,
    /// Seed of the generated data.
    #[arg(long, default_value_t = 0)]
    data_seed: u64,
    /// L*ReLU slope compared against ReLU.
    #[arg(long, default_value_t = 0.1)]
    alpha: f64,
    #[command(flatten)]
    runs: Runs,
    #[command(flatten)]
    training: Training,
}

type Outcome = Result<(), (&'static str, lstar_core::Error)>;

fn tag(module: &'static str) -> impl FnOnce(lstar_core::Error) -> (&'static str, lstar_core::Error) {
    move |e| (module, e)
}

fn write(path: &Path, content: &str) -> Result<(), lstar_core::Error> {
    std::fs::write(path, content).map_err(|e| lstar_core::Error::Io {
        path: path.to_path_buf(),
        source: e,
    })
}

fn sidecar(out: &Path, suffix: &str) -> PathBuf {
    let stem = out
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    out.with_file_name(format!("{stem}{suffix}"))
}

fn emit_results(
    out: Option<&Path>,
    (rows, losses): (Vec<ResultRow>, Vec<LossRecord>),
) -> Result<(), lstar_core::Error> {
    if let Some(out) = out {
        write(out, &results_csv(&rows))?;
        write(&sidecar(out, ".loss.json"), &loss_records_json(&losses))?;
    }
    Ok(())
}

fn stats_line(label: &str, s: &RunStats) -> String {
    format!(
        "{label}\tmean={}\tstd={}\tn={}",
        sig9(s.mean_accuracy),
        sig9(s.std_accuracy),
        s.n_runs
    )
}

fn eval_points(args: &PointArgs, grad: bool) -> Outcome {
    for &x in &args.x {
        let v = if grad { args.af.derivative(x) } else { args.af.eval(x) }.map_err(tag("afzoo"))?;
        println!("{}", sig9(v));
    }
    Ok(())
}

fn lipschitz(args: &LipschitzArgs) -> Outcome {
    let interval = Interval::new(args.lo, args.hi).map_err(tag("lipschitz"))?;
    let est = match args.secant {
        Some(n) => estimate_secant(&args.af, interval, n, args.seed),
        None => estimate_sup_derivative(&args.af, interval, args.grid),
    }
    .map_err(tag("lipschitz"))?;
    println!("{}", sig9(est.l_hat));
    if let Some(out) = &args.out {
        write(out, &est.to_json()).map_err(tag("lipschitz"))?;
    }
    Ok(())
}

fn pick(data: &DatasetSpec, split: Split) -> Result<lstar_core::Dataset, lstar_core::Error> {
    let (train, test) = data.materialize()?;
    Ok(match split {
        Split::Train => train,
        Split::Test => test,
    })
}

fn separation(args: &SeparationArgs) -> Outcome {
    let data = pick(&args.data, args.split).map_err(tag("data"))?;
    let report = class_separation(&data).map_err(tag("lipschitz"))?;
    println!("c\t{}", sig9(report.c));
    println!("recommended_l\t{}", sig9(report.recommended_l));
    println!("class_pair\t{} {}", report.class_pair.0, report.class_pair.1);
    println!("sample_pair\t{} {}", report.sample_pair.0, report.sample_pair.1);
    if let Some(out) = &args.out {
        let json = serde_json::to_string_pretty(&report).map_err(|e| ("lipschitz", e.into()))?;
        write(out, &json).map_err(tag("lipschitz"))?;
    }
    Ok(())
}

fn gen(args: &GenArgs) -> Outcome {
    let data = pick(&args.data, args.split).map_err(tag("data"))?;
    match &args.out {
        Some(out) => {
            data.write_csv(out).map_err(tag("data"))?;
            println!(
                "{} samples, {} features, {} classes",
                data.len(),
                data.n_dims(),
                data.n_classes()
            );
        }
        None => print!("{}", data.to_csv()),
    }
    Ok(())
}

fn train(args: &TrainArgs) -> Outcome {
    let (train, test) = args.data.materialize().map_err(tag("data"))?;
    let arch = Architecture {
        input_dim: train.n_dims(),
        hidden: args.training.widths.clone(),
        n_classes: train.n_classes().max(test.n_classes()),
        hidden_activation: args.af,
    };
    let (net, result) = fit(&arch, &train, &test, &args.training.config(args.seed)).map_err(tag("net"))?;
    println!("train_accuracy\t{}", sig9(result.final_train_accuracy));
    println!("test_accuracy\t{}", sig9(result.final_test_accuracy));
    if let Some(last) = result.loss_curve.last() {
        println!("final_loss\t{}", sig9(*last));
    }
    for (i, p) in result.learned_af_params.iter().enumerate() {
        if let Some(p) = p {
            println!("layer{i}_af_param\t{}", sig9(*p));
        }
    }
    if let Some(out) = &args.out {
        write(out, &net.to_json()).map_err(tag("net"))?;
    }
    Ok(())
}

fn sweep(args: SweepArgs) -> Outcome {
    let config = SweepConfig {
        slopes: args.slopes,
        setup: args.training.setup(args.data, args.runs.seeds),
    };
    let rows = slope_sweep(&config).map_err(tag("harness"))?;
    for row in &rows {
        println!("{}", stats_line(&format!("slope={}", sig9(row.slope)), &row.stats));
    }
    let output = sweep_output("sweep", &rows).map_err(tag("harness"))?;
    emit_results(args.runs.out.as_deref(), output).map_err(tag("harness"))
}

fn matched(args: MatchedArgs) -> Outcome {
    let setup = args.training.setup(args.data, args.runs.seeds);
    let m = matched_lipschitz(&setup, args.alpha, args.a, args.b).map_err(tag("harness"))?;
    println!("{}", stats_line(&format!("lstar:{}", args.alpha), &m.lstar));
    println!(
        "{}",
        stats_line(&format!("{} (L={})", m.tanhmix, sig9(m.tanhmix_l)), &m.tanhmix_stats)
    );
    let output = lstar_core::harness::matched_output("matched", &m).map_err(tag("harness"))?;
    emit_results(args.runs.out.as_deref(), output).map_err(tag("harness"))
}

fn sensitivity(args: SensitivityArgs) -> Outcome {
    let setup = args.training.setup(args.data, args.runs.seeds);
    let kind = kind_of(args.kind);
    let rows = match kind {
        Parametric::PRelu => prelu_sensitivity(&setup, &args.inits),
        Parametric::PSwish => pswish_sensitivity(&setup, &args.inits),
    }
    .map_err(tag("harness"))?;
    for row in &rows {
        let learned: Vec<String> = row
            .learned
            .iter()
            .map(|p| format!("{}±{}", sig9(p.mean), sig9(p.std)))
            .collect();
        println!(
            "{}\tlearned={}",
            stats_line(&format!("init={}", sig9(row.init)), &row.stats),
            learned.join(",")
        );
    }
    println!("spread\t{}", sig9(lstar_core::harness::accuracy_spread(&rows)));
    let output = sensitivity_output("sensitivity", kind, &rows).map_err(tag("harness"))?;
    emit_results(args.runs.out.as_deref(), output).map_err(tag("harness"))
}

fn kind_of(kind: Kind) -> Parametric {
    match kind {
        Kind::Prelu => Parametric::PRelu,
        Kind::Pswish => Parametric::PSwish,
    }
}

fn moons_demo(args: MoonsArgs) -> Outcome {
    let setup = args
        .training
        .setup(DatasetSpec::moons(args.sigma, args.n, args.data_seed), args.runs.seeds);
    let demo = two_moon_demo(&setup, args.alpha).map_err(tag("harness"))?;
    println!("{}", stats_line(&format!("lstar:{}", args.alpha), &demo.lstar));
    println!("{}", stats_line("relu", &demo.relu));
    let output = demo_output("moons", &demo).map_err(tag("harness"))?;
    if let Some(out) = args.runs.out.as_deref() {
        write(&sidecar(out, ".lstar_grid.csv"), &demo.lstar_grid.to_csv()).map_err(tag("harness"))?;
        write(&sidecar(out, ".relu_grid.csv"), &demo.relu_grid.to_csv()).map_err(tag("harness"))?;
    }
    emit_results(args.runs.out.as_deref(), output).map_err(tag("harness"))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::AfEval(args) => eval_points(&args, false),
        Command::AfGrad(args) => eval_points(&args, true),
        Command::Lipschitz(args) => lipschitz(&args),
        Command::Separation(args) => separation(&args),
        Command::Gen(args) => gen(&args),
        Command::Train(args) => train(&args),
        Command::Sweep(args) => sweep(args),
        Command::Matched(args) => matched(args),
        Command::Sensitivity(args) => sensitivity(args),
        Command::MoonsDemo(args) => moons_demo(args),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err((module, e)) => {
            eprintln!("error [{module}]: {e}");
            ExitCode::from(1)
        }
    }
}
