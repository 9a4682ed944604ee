//! CSV rows and loss-curve sidecars for experiment results.
//!
//! `param` is the value the experiment varies (sweep slope, matched Lipschitz
//! target, initial value, demo slope); `slope` is the negative-domain Lipschitz
//! constant of the activation as configured at the start of training.

use serde::Serialize;

use crate::afzoo::ActivationSpec;
use crate::error::Result;
use crate::fmt::{round9, sig9};
use crate::harness::{negative_slope, MatchedResult, MoonsDemo, RunStats, SensitivityRow, SweepRow};

pub const CSV_HEADER: &str = "experiment,af,param,slope,seed,final_train_acc,final_test_acc";

#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub experiment: String,
    pub af: String,
    pub param: f64,
    pub slope: f64,
    pub seed: u64,
    pub final_train_acc: f64,
    pub final_test_acc: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LossRecord {
    pub af: String,
    pub slope: f64,
    pub seed: u64,
    pub loss: Vec<f64>,
}

pub fn results_csv(rows: &[ResultRow]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            r.experiment,
            r.af,
            sig9(r.param),
            sig9(r.slope),
            r.seed,
            sig9(r.final_train_acc),
            sig9(r.final_test_acc)
        ));
    }
    out
}

pub fn loss_records_json(records: &[LossRecord]) -> String {
    let rounded: Vec<LossRecord> = records
        .iter()
        .map(|r| LossRecord {
            slope: round9(r.slope),
            loss: r.loss.iter().map(|&v| round9(v)).collect(),
            ..r.clone()
        })
        .collect();
    serde_json::to_string_pretty(&rounded).expect("loss records serialize")
}

/// Rows and loss records of one activation's runs.
pub fn emit(
    experiment: &str,
    af: &ActivationSpec,
    param: f64,
    stats: &RunStats,
) -> Result<(Vec<ResultRow>, Vec<LossRecord>)> {
    let slope = negative_slope(af)?;
    let rows = stats
        .per_seed
        .iter()
        .map(|r| ResultRow {
            experiment: experiment.to_string(),
            af: af.to_string(),
            param,
            slope,
            seed: r.seed,
            final_train_acc: r.train_accuracy,
            final_test_acc: r.accuracy,
        })
        .collect();
    let losses = stats
        .per_seed
        .iter()
        .map(|r| LossRecord {
            af: af.to_string(),
            slope,
            seed: r.seed,
            loss: r.loss_curve.clone(),
        })
        .collect();
    Ok((rows, losses))
}

fn concat(parts: Vec<(Vec<ResultRow>, Vec<LossRecord>)>) -> (Vec<ResultRow>, Vec<LossRecord>) {
    let mut rows = Vec::new();
    let mut losses = Vec::new();
    for (r, l) in parts {
        rows.extend(r);
        losses.extend(l);
    }
    (rows, losses)
}

pub fn sweep_output(experiment: &str, sweep: &[SweepRow]) -> Result<(Vec<ResultRow>, Vec<LossRecord>)> {
    let parts = sweep
        .iter()
        .map(|row| {
            emit(
                experiment,
                &ActivationSpec::LStarRelu { alpha: row.slope },
                row.slope,
                &row.stats,
            )
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(concat(parts))
}

pub fn matched_output(experiment: &str, m: &MatchedResult) -> Result<(Vec<ResultRow>, Vec<LossRecord>)> {
    Ok(concat(vec![
        emit(
            experiment,
            &ActivationSpec::LStarRelu { alpha: m.alpha },
            m.alpha,
            &m.lstar,
        )?,
        emit(experiment, &m.tanhmix, m.alpha, &m.tanhmix_stats)?,
    ]))
}

pub fn sensitivity_output(
    experiment: &str,
    kind: crate::harness::Parametric,
    rows: &[SensitivityRow],
) -> Result<(Vec<ResultRow>, Vec<LossRecord>)> {
    let parts = rows
        .iter()
        .map(|row| emit(experiment, &kind.with_init(row.init), row.init, &row.stats))
        .collect::<Result<Vec<_>>>()?;
    Ok(concat(parts))
}

pub fn demo_output(experiment: &str, demo: &MoonsDemo) -> Result<(Vec<ResultRow>, Vec<LossRecord>)> {
    Ok(concat(vec![
        emit(
            experiment,
            &ActivationSpec::LStarRelu { alpha: demo.alpha },
            demo.alpha,
            &demo.lstar,
        )?,
        emit(experiment, &ActivationSpec::Relu, demo.alpha, &demo.relu)?,
    ]))
}
