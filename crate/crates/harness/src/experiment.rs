//! Seeded multi-trial sweeps.

use std::path::{Path, PathBuf};
use std::time::Instant;

use kss_core::kss::{run_kss, GroundTruth, KssOutcome};
use kss_core::linalg::OrthonormalBasis;
use kss_core::metrics::match_labels;
use kss_core::tips::tips_initialize_detailed;
use kss_core::uos::{generate_dataset, generate_overlapping_ensemble};
use kss_core::{Matrix, MembershipMatrix};
use rand::Rng;
use serde::Serialize;

use crate::config::{DataMode, ExperimentConfig, InitMethod};
use crate::error::{Context, HarnessError, Result};
use crate::io::{load_csv_dataset, load_labels, write_json};
use crate::report::{write_trace, Aggregate, RunReport, TraceRow, TrialRecord, WarningRecord, TRACE_EPS};
use crate::seed::{stream_rng, trial_seed, Stream};

/// Uniform labels, then `k` distinct random points are moved into clusters
/// `0..k` if any cluster came out empty.
pub fn random_initialization<R: Rng + ?Sized>(n: usize, k: usize, rng: &mut R) -> Result<MembershipMatrix> {
    if k == 0 || k > n {
        return Err(HarnessError::config(format!("cannot form {k} nonempty clusters from {n} points")));
    }
    let mut labels: Vec<usize> = (0..n).map(|_| rng.random_range(0..k)).collect();
    let mut seen = vec![false; k];
    labels.iter().for_each(|&l| seen[l] = true);
    if seen.contains(&false) {
        let mut idx: Vec<usize> = (0..n).collect();
        for c in 0..k {
            let j = rng.random_range(c..n);
            idx.swap(c, j);
            labels[idx[c]] = c;
        }
    }
    MembershipMatrix::new(labels, k).map_err(|e| HarnessError::core("random initialization", e))
}

/// Samples and whatever ground truth comes with them.
#[derive(Debug, Clone)]
pub struct TrialData {
    pub samples: Matrix,
    pub clusters: usize,
    pub truth: Option<MembershipMatrix>,
    pub truth_bases: Option<Vec<OrthonormalBasis>>,
}

/// Loads CSV data once for the whole sweep; `None` in synthetic mode.
pub fn load_shared_data(cfg: &ExperimentConfig) -> Result<Option<TrialData>> {
    if cfg.data.mode != DataMode::Csv {
        return Ok(None);
    }
    let c = cfg.data.csv.as_ref().ok_or_else(|| HarnessError::config("data.csv missing"))?;
    let (samples, truth) = load_csv_dataset(&c.samples_path, c.labels_path.as_deref(), c.clusters)?;
    let clusters = c.clusters.or(truth.as_ref().map(|t| t.n_clusters())).expect("validated");
    if cfg.kss.d_upper > samples.rows() {
        return Err(HarnessError::config(format!(
            "kss.d_upper = {} exceeds the sample dimension {}",
            cfg.kss.d_upper,
            samples.rows()
        )));
    }
    Ok(Some(TrialData { samples, clusters, truth, truth_bases: None }))
}

/// Everything a trial produced.
#[derive(Debug, Clone)]
pub struct TrialOutput {
    pub record: TrialRecord,
    pub trace: Vec<TraceRow>,
    pub wall_seconds: f64,
    pub outcome: Option<KssOutcome>,
    pub initial: Option<MembershipMatrix>,
    pub data: Option<TrialData>,
}

/// Runs one trial. Failures are reported inside the returned record.
pub fn run_trial(cfg: &ExperimentConfig, trial: usize, shared: Option<&TrialData>) -> TrialOutput {
    let seed = trial_seed(cfg.seed, trial);
    let start = Instant::now();
    match try_trial(cfg, trial, seed, shared) {
        Ok(mut out) => {
            out.wall_seconds = start.elapsed().as_secs_f64();
            out
        }
        Err(e) => TrialOutput {
            record: TrialRecord::failed(trial, seed, e.to_string()),
            trace: Vec::new(),
            wall_seconds: start.elapsed().as_secs_f64(),
            outcome: None,
            initial: None,
            data: None,
        },
    }
}

fn trial_data(cfg: &ExperimentConfig, seed: u64, shared: Option<&TrialData>) -> Result<TrialData> {
    if let Some(d) = shared {
        return Ok(d.clone());
    }
    let s = cfg.data.synthetic.as_ref().ok_or_else(|| HarnessError::config("data.synthetic missing"))?;
    let mut rng = stream_rng(seed, Stream::Data);
    let ensemble = generate_overlapping_ensemble(&s.ensemble_params(), &mut rng).context(|| "ensemble".into())?;
    let ds = generate_dataset(&ensemble, &s.cluster_sizes, &mut rng).context(|| "dataset".into())?;
    Ok(TrialData {
        samples: ds.samples,
        clusters: s.clusters,
        truth: Some(ds.truth),
        truth_bases: Some(ensemble.bases().to_vec()),
    })
}

fn try_trial(cfg: &ExperimentConfig, trial: usize, seed: u64, shared: Option<&TrialData>) -> Result<TrialOutput> {
    let ctx = |what: &str| format!("trial {trial}: {what}");
    let data = trial_data(cfg, seed, shared)?;
    let z = &data.samples;
    let (n_points, k) = (z.cols(), data.clusters);

    let mut init_rng = stream_rng(seed, Stream::Init);
    let (h0, tau, edges) = match cfg.init.method {
        InitMethod::Tips => {
            let tau = cfg.tau()?;
            let tips = tips_initialize_detailed(z, tau, k, &cfg.tips_config(), &mut init_rng).context(|| ctx("TIPS"))?;
            (tips.membership, Some(tau), Some(tips.edge_count))
        }
        InitMethod::Random => (random_initialization(n_points, k, &mut init_rng)?, None, None),
        InitMethod::Given => {
            let p = cfg.init.labels_path.as_ref().expect("validated");
            (load_labels(p, n_points, Some(k))?, None, None)
        }
    };

    let kss_cfg = cfg.kss_config(n_points);
    let truth = data
        .truth
        .as_ref()
        .map(|m| GroundTruth { membership: m, bases: data.truth_bases.as_deref() });
    let outcome = run_kss(z, &h0, &kss_cfg, truth, &mut stream_rng(seed, Stream::Kss)).context(|| ctx("KSS"))?;

    let recs = &outcome.trace.records;
    let last = recs.last().expect("at least one iteration");
    let accuracy = |d2: Option<usize>| d2.map(|d| 1.0 - (d / 2) as f64 / n_points as f64);
    let (recovered_dims, true_dims, dims_match) = match (&data.truth, &data.truth_bases) {
        (Some(t), bases) => {
            let (pi, _) = match_labels(t, &outcome.state.membership).context(|| ctx("matching"))?;
            let rec: Vec<usize> = (0..k).map(|c| outcome.state.dims[pi.apply(c)]).collect();
            let truth_dims: Option<Vec<usize>> = bases.as_ref().map(|b| b.iter().map(|u| u.dim()).collect());
            let m = truth_dims.as_ref().map(|d| *d == rec);
            (Some(rec), truth_dims, m)
        }
        _ => (None, None, None),
    };
    let df_ratios = data.truth.as_ref().map(|_| {
        recs.windows(2)
            .filter_map(|w| match (w[0].membership_distance_sq, w[1].membership_distance_sq) {
                (Some(a), Some(b)) if a > 0 => Some((b as f64 / a as f64).sqrt()),
                _ => None,
            })
            .collect()
    });

    let record = TrialRecord {
        trial,
        seed,
        n_points: Some(n_points),
        tau,
        edge_count: edges,
        init_accuracy: accuracy(recs[0].membership_distance_sq),
        final_accuracy: accuracy(last.membership_distance_sq),
        init_df2: recs[0].membership_distance_sq,
        final_df2: last.membership_distance_sq,
        iterations: Some(outcome.state.iteration),
        reached_fixed_point: Some(outcome.reached_fixed_point),
        first_exact_iteration: recs.iter().find(|r| r.membership_distance_sq == Some(0)).map(|r| r.t),
        recovered_dims,
        true_dims,
        dims_match,
        subspace_error: last.subspace_error,
        df_ratios,
        final_objective: Some(last.objective),
        final_dims: Some(outcome.state.dims.clone()),
        warnings: outcome
            .trace
            .warnings
            .iter()
            .map(|w| WarningRecord { t: w.t, cluster: w.cluster, reseeded: w.reseeded })
            .collect(),
        error: None,
    };
    let trace = recs
        .iter()
        .map(|r| TraceRow {
            trial,
            t: r.t,
            df2_plus_eps: r.membership_distance_sq.map(|d| d as f64 + TRACE_EPS),
            objective: r.objective,
            dims: r.dims.clone(),
        })
        .collect();
    Ok(TrialOutput { record, trace, wall_seconds: 0.0, outcome: Some(outcome), initial: Some(h0), data: Some(data) })
}

#[derive(Debug, Clone)]
pub struct ExperimentOutput {
    pub report: RunReport,
    pub trace: Vec<TraceRow>,
    pub wall_seconds: Vec<f64>,
}

/// Runs every trial in order. Only problems that affect all trials, such as
/// unreadable CSV input, are returned as errors.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentOutput> {
    cfg.validate()?;
    let shared = load_shared_data(cfg)?;
    let mut trials = Vec::with_capacity(cfg.trials);
    let mut trace = Vec::new();
    let mut wall_seconds = Vec::with_capacity(cfg.trials);
    for i in 0..cfg.trials {
        let out = run_trial(cfg, i, shared.as_ref());
        trials.push(out.record);
        trace.extend(out.trace);
        wall_seconds.push(out.wall_seconds);
    }
    let aggregate = Aggregate::from_trials(&trials);
    Ok(ExperimentOutput {
        report: RunReport { config_echo: cfg.clone(), trials, aggregate },
        trace,
        wall_seconds,
    })
}

#[derive(Serialize)]
struct Timing<'a> {
    trial_wall_seconds: &'a [f64],
    total_wall_seconds: f64,
}

#[derive(Debug, Clone)]
pub struct OutputPaths {
    pub report: PathBuf,
    pub trace: PathBuf,
    pub timing: PathBuf,
}

/// Writes the report, the trace and a `*.timing.json` sidecar next to the
/// report. Wall times live only in the sidecar so that report and trace are
/// reproducible byte for byte.
pub fn write_outputs(out: &ExperimentOutput, cfg: &ExperimentConfig, dir: &Path) -> Result<OutputPaths> {
    let report = dir.join(&cfg.outputs.report_path);
    let trace = dir.join(&cfg.outputs.trace_path);
    let timing = report.with_extension("timing.json");
    write_json(&report, &out.report)?;
    write_trace(&trace, &out.trace)?;
    write_json(
        &timing,
        &Timing { trial_wall_seconds: &out.wall_seconds, total_wall_seconds: out.wall_seconds.iter().sum() },
    )?;
    Ok(OutputPaths { report, trace, timing })
}
