//! Run reports (JSON) and per-iteration traces (CSV).
//!
//! Floats are written with 17 significant digits in scientific notation so
//! that every value round-trips exactly and files are byte-stable.

use std::io;
use std::path::Path;

use serde::ser::Serialize;
use serde::Deserialize;
use serde_json::ser::{Formatter, PrettyFormatter};

use crate::config::ExperimentConfig;
use crate::error::{HarnessError, Result};

/// Offset added to `d_F²` in traces so the values can go on a log axis.
pub const TRACE_EPS: f64 = 1e-8;

pub const TRACE_HEADER: [&str; 5] = ["trial", "t", "dF2_plus_eps", "objective", "dhat_json"];

pub fn format_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// Pretty JSON with [`format_f64`] numbers.
struct SigFigFormatter(PrettyFormatter<'static>);

impl Formatter for SigFigFormatter {
    fn write_f64<W: ?Sized + io::Write>(&mut self, w: &mut W, value: f64) -> io::Result<()> {
        w.write_all(format_f64(value).as_bytes())
    }
    fn write_f32<W: ?Sized + io::Write>(&mut self, w: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(w, f64::from(value))
    }
    fn begin_array<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_array(w)
    }
    fn end_array<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array(w)
    }
    fn begin_array_value<W: ?Sized + io::Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_array_value(w, first)
    }
    fn end_array_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array_value(w)
    }
    fn begin_object<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object(w)
    }
    fn end_object<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object(w)
    }
    fn begin_object_key<W: ?Sized + io::Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_object_key(w, first)
    }
    fn begin_object_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object_value(w)
    }
    fn end_object_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object_value(w)
    }
}

pub fn to_json_bytes<T: Serialize + ?Sized>(value: &T) -> Vec<u8> {
    let mut out = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut out, SigFigFormatter(PrettyFormatter::new()));
    value.serialize(&mut ser).expect("report types serialize infallibly");
    out.push(b'\n');
    out
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, Deserialize)]
pub struct WarningRecord {
    pub t: usize,
    pub cluster: usize,
    pub reseeded: bool,
}

/// One trial. Truth-dependent fields are `null` when no ground truth is
/// available; everything but `trial`, `seed` and `error` is `null` for a
/// failed trial.
#[derive(Debug, Clone, PartialEq, serde::Serialize, Deserialize)]
pub struct TrialRecord {
    pub trial: usize,
    pub seed: u64,
    pub n_points: Option<usize>,
    pub tau: Option<f64>,
    pub edge_count: Option<usize>,
    pub init_accuracy: Option<f64>,
    pub final_accuracy: Option<f64>,
    #[serde(rename = "init_dF2")]
    pub init_df2: Option<usize>,
    #[serde(rename = "final_dF2")]
    pub final_df2: Option<usize>,
    pub iterations: Option<usize>,
    pub reached_fixed_point: Option<bool>,
    /// First `t` with `d_F(H^t, H*) = 0`.
    pub first_exact_iteration: Option<usize>,
    /// Final `d̂` of the cluster matched to each true cluster.
    pub recovered_dims: Option<Vec<usize>>,
    pub true_dims: Option<Vec<usize>>,
    pub dims_match: Option<bool>,
    /// `Σ_k d(U_{π(k)}, U_k*)` at the final iterate.
    pub subspace_error: Option<f64>,
    /// `d_F(H^{t+1}, H*) / d_F(H^t, H*)` while `d_F(H^t, H*) > 0`.
    #[serde(rename = "dF_ratios")]
    pub df_ratios: Option<Vec<f64>>,
    pub final_objective: Option<f64>,
    pub final_dims: Option<Vec<usize>>,
    pub warnings: Vec<WarningRecord>,
    pub error: Option<String>,
}

impl TrialRecord {
    pub fn failed(trial: usize, seed: u64, error: String) -> Self {
        TrialRecord {
            trial,
            seed,
            n_points: None,
            tau: None,
            edge_count: None,
            init_accuracy: None,
            final_accuracy: None,
            init_df2: None,
            final_df2: None,
            iterations: None,
            reached_fixed_point: None,
            first_exact_iteration: None,
            recovered_dims: None,
            true_dims: None,
            dims_match: None,
            subspace_error: None,
            df_ratios: None,
            final_objective: None,
            final_dims: None,
            warnings: Vec::new(),
            error: Some(error),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, Deserialize)]
pub struct Summary {
    pub min: f64,
    pub median: f64,
    pub max: f64,
}

impl Summary {
    pub fn of(values: impl IntoIterator<Item = f64>) -> Option<Summary> {
        let mut v: Vec<f64> = values.into_iter().collect();
        if v.is_empty() {
            return None;
        }
        v.sort_by(f64::total_cmp);
        let m = v.len() / 2;
        let median = if v.len() % 2 == 1 { v[m] } else { 0.5 * (v[m - 1] + v[m]) };
        Some(Summary { min: v[0], median, max: v[v.len() - 1] })
    }
}

#[derive(Debug, Clone, PartialEq, serde::Serialize, Deserialize)]
pub struct Aggregate {
    pub trials: usize,
    pub failed: usize,
    /// Trials whose final iterate has `d_F = 0`.
    pub exact_recoveries: Option<usize>,
    pub init_accuracy: Option<Summary>,
    pub final_accuracy: Option<Summary>,
    #[serde(rename = "init_dF2")]
    pub init_df2: Option<Summary>,
    #[serde(rename = "final_dF2")]
    pub final_df2: Option<Summary>,
    pub iterations: Option<Summary>,
    pub first_exact_iteration: Option<Summary>,
    pub subspace_error: Option<Summary>,
    pub final_objective: Option<Summary>,
}

impl Aggregate {
    pub fn from_trials(trials: &[TrialRecord]) -> Self {
        fn s<F: Fn(&TrialRecord) -> Option<f64>>(t: &[TrialRecord], f: F) -> Option<Summary> {
            Summary::of(t.iter().filter_map(f))
        }
        let with_truth: Vec<_> = trials.iter().filter_map(|t| t.final_df2).collect();
        Aggregate {
            trials: trials.len(),
            failed: trials.iter().filter(|t| t.error.is_some()).count(),
            exact_recoveries: (!with_truth.is_empty()).then(|| with_truth.iter().filter(|&&d| d == 0).count()),
            init_accuracy: s(trials, |t| t.init_accuracy),
            final_accuracy: s(trials, |t| t.final_accuracy),
            init_df2: s(trials, |t| t.init_df2.map(|d| d as f64)),
            final_df2: s(trials, |t| t.final_df2.map(|d| d as f64)),
            iterations: s(trials, |t| t.iterations.map(|d| d as f64)),
            first_exact_iteration: s(trials, |t| t.first_exact_iteration.map(|d| d as f64)),
            subspace_error: s(trials, |t| t.subspace_error),
            final_objective: s(trials, |t| t.final_objective),
        }
    }
}

#[derive(Debug, Clone, PartialEq, serde::Serialize, Deserialize)]
pub struct RunReport {
    pub config_echo: ExperimentConfig,
    pub trials: Vec<TrialRecord>,
    pub aggregate: Aggregate,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TraceRow {
    pub trial: usize,
    pub t: usize,
    /// `d_F²(H^t, H*) + TRACE_EPS`, absent without ground truth.
    pub df2_plus_eps: Option<f64>,
    pub objective: f64,
    pub dims: Vec<usize>,
}

pub fn write_trace(path: &Path, rows: &[TraceRow]) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| HarnessError::io(dir, e))?;
    }
    let csv_err = |e: csv::Error| HarnessError::File { path: path.to_path_buf(), message: e.to_string() };
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_path(path).map_err(csv_err)?;
    w.write_record(TRACE_HEADER).map_err(csv_err)?;
    for r in rows {
        let dims = serde_json::to_string(&r.dims).expect("integer list");
        w.write_record([
            r.trial.to_string(),
            r.t.to_string(),
            r.df2_plus_eps.map(format_f64).unwrap_or_default(),
            format_f64(r.objective),
            dims,
        ])
        .map_err(csv_err)?;
    }
    w.flush().map_err(|e| HarnessError::io(path, e))
}

pub fn read_trace(path: &Path) -> Result<Vec<TraceRow>> {
    let csv_err = |e: csv::Error| {
        let line = e.position().map_or(0, |p| p.line());
        HarnessError::Parse { path: path.to_path_buf(), line, message: e.to_string() }
    };
    let mut r = csv::Reader::from_path(path).map_err(csv_err)?;
    let header = r.headers().map_err(csv_err)?.clone();
    if header.iter().ne(TRACE_HEADER) {
        return Err(HarnessError::Parse { path: path.to_path_buf(), line: 1, message: "unexpected trace header".into() });
    }
    let mut rows = Vec::new();
    for rec in r.records() {
        let rec = rec.map_err(csv_err)?;
        let line = rec.position().map_or(0, |p| p.line());
        let bad = |what: &str| HarnessError::Parse { path: path.to_path_buf(), line, message: format!("bad {what}") };
        rows.push(TraceRow {
            trial: rec[0].parse().map_err(|_| bad("trial"))?,
            t: rec[1].parse().map_err(|_| bad("t"))?,
            df2_plus_eps: if rec[2].is_empty() { None } else { Some(rec[2].parse().map_err(|_| bad("dF2_plus_eps"))?) },
            objective: rec[3].parse().map_err(|_| bad("objective"))?,
            dims: serde_json::from_str(&rec[4]).map_err(|_| bad("dhat_json"))?,
        });
    }
    Ok(rows)
}
