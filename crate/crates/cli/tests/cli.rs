use std::path::Path;
use std::process::{Command, Output};

fn lstar(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lstar"))
        .args(args)
        .output()
        .expect("run lstar")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).expect("utf-8")
}

fn path(p: &Path) -> &str {
    p.to_str().expect("utf-8 path")
}

#[test]
fn af_eval_prints_value() {
    let out = lstar(&["af-eval", "--af", "lstar:0.25", "--x", "-2"]);
    assert!(out.status.success());
    assert_eq!(stdout(&out), "-0.5\n");
}

#[test]
fn af_grad_is_right_hand_at_zero() {
    let out = lstar(&["af-grad", "--af", "lstar:0.1", "--x", "0,-3"]);
    assert_eq!(stdout(&out), "1\n0.1\n");
    let out = lstar(&["af-eval", "--af", "relu", "--x", "-1,0,2"]);
    assert_eq!(stdout(&out), "0\n0\n2\n");
}

#[test]
fn lipschitz_of_swish_negative_part() {
    let out = lstar(&[
        "lipschitz",
        "--af",
        "swish:1",
        "--lo",
        "-10",
        "--hi",
        "0",
        "--grid",
        "10001",
    ]);
    assert!(out.status.success());
    let v: f64 = stdout(&out).trim().parse().unwrap();
    assert!((v - 0.5).abs() < 1e-3, "{v}");
}

#[test]
fn lipschitz_json_output() {
    let dir = tempfile::tempdir().unwrap();
    let out_path = dir.path().join("l.json");
    let out = lstar(&["lipschitz", "--af", "tanhmix:0.1:0.15", "--out", path(&out_path)]);
    assert!(out.status.success());
    let json = std::fs::read_to_string(&out_path).unwrap();
    assert!(json.contains("\"l_hat\""));
    assert!(json.contains("tanhmix"));
}

#[test]
fn usage_errors_exit_two() {
    for args in [
        &["bogus"][..],
        &["af-eval", "--af", "lstar:0.1"],
        &["af-eval", "--af", "nope", "--x", "1"],
        &["af-eval", "--af", "lstar:0.1", "--x", "1", "--frobnicate"],
        &["sweep", "--data", "fg:k=3"],
    ] {
        assert_eq!(lstar(args).status.code(), Some(2), "{args:?}");
    }
}

#[test]
fn runtime_errors_exit_one_and_name_module() {
    let out = lstar(&[
        "sweep",
        "--data",
        "fg:c=0.4,n=5",
        "--slopes",
        "0.2,0.1",
        "--epochs",
        "1",
    ]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(
        err.contains("[harness]") && err.contains("strictly increasing"),
        "{err}"
    );

    let out = lstar(&["gen", "--data", "csv:train=/nonexistent/a.csv,test=/nonexistent/b.csv"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8(out.stderr).unwrap().contains("[data]"));
}

#[test]
fn help_and_version() {
    let out = lstar(&["--version"]);
    assert!(out.status.success());
    assert!(stdout(&out).starts_with("lstar "));
    for sub in [
        "af-eval",
        "af-grad",
        "lipschitz",
        "separation",
        "gen",
        "train",
        "sweep",
        "matched",
        "sensitivity",
        "moons-demo",
    ] {
        let out = lstar(&[sub, "--help"]);
        assert!(out.status.success(), "{sub}");
        assert!(stdout(&out).contains("--"), "{sub}");
    }
    assert!(stdout(&lstar(&["sweep", "--help"])).contains("[default: 64,64]"));
}

#[test]
fn sweep_writes_one_row_per_slope_and_seed() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("sweep.csv");
    let args = [
        "sweep",
        "--data",
        "fg:c=0.4,n=20",
        "--slopes",
        "0.0,0.1,0.2,0.3,0.4",
        "--seeds",
        "1,2,3",
        "--epochs",
        "2",
        "--widths",
        "8",
        "--out",
        path(&csv),
    ];
    assert!(lstar(&args).status.success());
    let text = std::fs::read_to_string(&csv).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(
        lines[0],
        "experiment,af,param,slope,seed,final_train_acc,final_test_acc"
    );
    assert_eq!(lines.len(), 16);
    assert!(lines[1].starts_with("sweep,lstar:0,0,0,1,"));

    let losses: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("sweep.loss.json")).unwrap()).unwrap();
    assert_eq!(losses.as_array().unwrap().len(), 15);
    assert_eq!(losses[0]["loss"].as_array().unwrap().len(), 2);

    let again = dir.path().join("again.csv");
    let mut rerun = args;
    rerun[args.len() - 1] = path(&again);
    assert!(lstar(&rerun).status.success());
    assert_eq!(std::fs::read(&csv).unwrap(), std::fs::read(&again).unwrap());
    assert_eq!(
        std::fs::read(dir.path().join("sweep.loss.json")).unwrap(),
        std::fs::read(dir.path().join("again.loss.json")).unwrap()
    );
}

#[test]
fn gen_then_separation_from_csv() {
    let dir = tempfile::tempdir().unwrap();
    let train = dir.path().join("train.csv");
    let test = dir.path().join("test.csv");
    let data = "fg:c=0.5,k=3,dims=4,n=15";
    assert!(lstar(&["gen", "--data", data, "--out", path(&train)]).status.success());
    assert!(lstar(&["gen", "--data", data, "--split", "test", "--out", path(&test)])
        .status
        .success());
    assert!(std::fs::read_to_string(&train)
        .unwrap()
        .starts_with("label,f0,f1,f2,f3\n"));

    let direct = stdout(&lstar(&["separation", "--data", data]));
    let csv_spec = format!("csv:train={},test={}", path(&train), path(&test));
    let via_csv = stdout(&lstar(&["separation", "--data", &csv_spec]));
    let c = |s: &str| {
        s.lines()
            .next()
            .unwrap()
            .split('\t')
            .nth(1)
            .unwrap()
            .parse::<f64>()
            .unwrap()
    };
    assert!((c(&direct) - c(&via_csv)).abs() < 1e-7);
    assert!(c(&direct) >= 0.95 * 0.5);
}

#[test]
fn train_writes_a_loadable_checkpoint() {
    let dir = tempfile::tempdir().unwrap();
    let ckpt = dir.path().join("net.json");
    let out = lstar(&[
        "train",
        "--data",
        "moons:sigma=0.1,n=50",
        "--af",
        "prelu:0.2",
        "--widths",
        "8,8",
        "--epochs",
        "5",
        "--seed",
        "3",
        "--out",
        path(&ckpt),
    ]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("test_accuracy\t"));
    assert!(text.contains("layer0_af_param\t"));
    let net = lstar_core::Network::from_json(&std::fs::read_to_string(&ckpt).unwrap()).unwrap();
    assert_eq!(net.input_dim(), 2);
}

#[test]
fn matched_premise_failure_is_a_runtime_error() {
    let out = lstar(&[
        "matched",
        "--data",
        "fg:c=0.5,n=5",
        "--alpha",
        "0.25",
        "--a",
        "0.4",
        "--b",
        "0.3",
        "--epochs",
        "1",
    ]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn sensitivity_and_moons_demo_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let sens = dir.path().join("sens.csv");
    let out = lstar(&[
        "sensitivity",
        "--data",
        "fg:c=0.5,n=10",
        "--kind",
        "pswish",
        "--inits",
        "0,1",
        "--seeds",
        "1,2",
        "--epochs",
        "2",
        "--widths",
        "8",
        "--out",
        path(&sens),
    ]);
    assert!(out.status.success());
    assert!(stdout(&out).contains("spread\t"));
    assert_eq!(std::fs::read_to_string(&sens).unwrap().lines().count(), 5);

    let demo = dir.path().join("moons.csv");
    let out = lstar(&[
        "moons-demo",
        "--n",
        "30",
        "--seeds",
        "1,2",
        "--epochs",
        "3",
        "--widths",
        "8,8",
        "--out",
        path(&demo),
    ]);
    assert!(out.status.success());
    let grid = std::fs::read_to_string(dir.path().join("moons.lstar_grid.csv")).unwrap();
    assert_eq!(grid.lines().count(), 200);
    assert!(grid
        .lines()
        .all(|l| l.split(',').count() == 200 && l.split(',').all(|v| v == "0" || v == "1")));
    assert!(dir.path().join("moons.relu_grid.csv").exists());
    assert_eq!(std::fs::read_to_string(&demo).unwrap().lines().count(), 5);
}
