use std::collections::BTreeMap;
use std::io::Write;

use serde::{Deserialize, Serialize};

use super::rsm::RsmIteration;
use super::{UpdateError, UpdatingProblem};
use crate::model::{cost, mac_diagonal};
use crate::optim::HistoryRow;
use crate::surrogate::SurrogateNet;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Rsm,
    Ga,
    Sa,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::Rsm => "rsm",
            Method::Ga => "ga",
            Method::Sa => "sa",
        }
    }
}

/// Calculated modes of one parameter vector set against the measured modes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModalComparison {
    pub frequencies_hz: Vec<f64>,
    /// `100 · |f − f_measured| / f_measured` per mode.
    pub error_pct: Vec<f64>,
    pub mean_error_pct: f64,
    /// MAC between each calculated mode and its measured partner.
    pub mac: Vec<f64>,
    pub mean_mac: f64,
    pub cost: f64,
}

impl ModalComparison {
    pub fn new(problem: &UpdatingProblem, moduli: &[f64]) -> Result<Self, UpdateError> {
        let calc = problem.paired_modes(moduli)?;
        let measured_hz = problem.measured.frequencies_hz();
        let frequencies_hz = calc.frequencies_hz();
        let error_pct: Vec<f64> = frequencies_hz
            .iter()
            .zip(&measured_hz)
            .map(|(f, fm)| 100.0 * (f - fm).abs() / fm)
            .collect();
        let mac = mac_diagonal(&calc.shapes, &problem.measured.shapes)?;
        Ok(Self {
            mean_error_pct: mean(&error_pct),
            mean_mac: mean(&mac),
            cost: cost(&calc, &problem.measured, &problem.weights)?,
            frequencies_hz,
            error_pct,
            mac,
        })
    }
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UpdateReport {
    pub method: Method,
    pub initial_parameters: Vec<f64>,
    pub updated_parameters: Vec<f64>,
    pub measured_hz: Vec<f64>,
    pub initial: ModalComparison,
    pub updated: ModalComparison,
    /// Full-model evaluations charged by the search. Report diagnostics
    /// (the `initial` and `updated` blocks) are not counted.
    pub evaluations: u64,
    /// Per annealing run for SA; a single entry otherwise.
    pub run_evaluations: Vec<u64>,
    /// The response-surface loop reached `target_cost`.
    pub reached_target: bool,
    /// The search stopped early (budget exhausted or a failed surrogate fit).
    pub truncated: bool,
    pub diagnostic: Option<String>,
    pub history: Vec<HistoryRow>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub rsm_iterations: Vec<RsmIteration>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub surrogate: Option<SurrogateNet>,
    pub seeds: BTreeMap<String, u64>,
    /// Resolved configuration of the run.
    pub config: serde_json::Value,
    pub wall_time_s: f64,
}

pub(super) struct Outcome {
    pub best: Vec<f64>,
    pub evaluations: u64,
    pub run_evaluations: Vec<u64>,
    pub reached_target: bool,
    pub truncated: bool,
    pub diagnostic: Option<String>,
    pub history: Vec<HistoryRow>,
}

impl UpdateReport {
    pub(super) fn build(
        problem: &UpdatingProblem,
        method: Method,
        outcome: Outcome,
        seeds: BTreeMap<String, u64>,
        config: serde_json::Value,
        started: std::time::Instant,
    ) -> Result<Self, UpdateError> {
        Ok(Self {
            method,
            initial_parameters: problem.initial.clone(),
            measured_hz: problem.measured.frequencies_hz(),
            initial: ModalComparison::new(problem, &problem.initial)?,
            updated: ModalComparison::new(problem, &outcome.best)?,
            updated_parameters: outcome.best,
            evaluations: outcome.evaluations,
            run_evaluations: outcome.run_evaluations,
            reached_target: outcome.reached_target,
            truncated: outcome.truncated,
            diagnostic: outcome.diagnostic,
            history: outcome.history,
            rsm_iterations: Vec::new(),
            surrogate: None,
            seeds,
            config,
            wall_time_s: started.elapsed().as_secs_f64(),
        })
    }
}

/// Writes history rows as comma-separated values with a header row.
pub fn write_history_csv<W: Write>(history: &[HistoryRow], out: W) -> Result<(), csv::Error> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out);
    for row in history {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

/// Side-by-side comparison of methods on one problem as comma-separated rows:
/// per-mode frequencies (Hz) and percent errors, mean error, mean MAC, full-model
/// evaluations and wall time. Columns are `quantity, mode, measured, initial`
/// followed by one column per report.
pub fn comparison_table(reports: &[UpdateReport]) -> Result<String, csv::Error> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    let Some(first) = reports.first() else {
        return Ok(String::new());
    };
    let mut header = vec![
        "quantity".to_string(),
        "mode".into(),
        "measured".into(),
        "initial".into(),
    ];
    header.extend(reports.iter().map(|r| r.method.as_str().to_string()));
    w.write_record(&header)?;

    let num = |v: f64| v.to_string();
    let mut row =
        |quantity: &str, mode: String, measured: String, initial: String, each: &dyn Fn(&UpdateReport) -> String| {
            let mut rec = vec![quantity.to_string(), mode, measured, initial];
            rec.extend(reports.iter().map(each));
            w.write_record(&rec)
        };
    for i in 0..first.measured_hz.len() {
        row(
            "frequency_hz",
            (i + 1).to_string(),
            num(first.measured_hz[i]),
            num(first.initial.frequencies_hz[i]),
            &|r| num(r.updated.frequencies_hz[i]),
        )?;
    }
    for i in 0..first.measured_hz.len() {
        row(
            "error_pct",
            (i + 1).to_string(),
            String::new(),
            num(first.initial.error_pct[i]),
            &|r| num(r.updated.error_pct[i]),
        )?;
    }
    row(
        "mean_error_pct",
        String::new(),
        String::new(),
        num(first.initial.mean_error_pct),
        &|r| num(r.updated.mean_error_pct),
    )?;
    row(
        "mean_mac",
        String::new(),
        String::new(),
        num(first.initial.mean_mac),
        &|r| num(r.updated.mean_mac),
    )?;
    row("cost", String::new(), String::new(), num(first.initial.cost), &|r| {
        num(r.updated.cost)
    })?;
    row("evaluations", String::new(), String::new(), String::new(), &|r| {
        r.evaluations.to_string()
    })?;
    row("wall_time_s", String::new(), String::new(), String::new(), &|r| {
        num(r.wall_time_s)
    })?;
    let bytes = w.into_inner().map_err(|e| e.into_error())?;
    Ok(String::from_utf8(bytes).expect("CSV output is UTF-8"))
}
