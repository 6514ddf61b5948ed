use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use kss_core::metrics::{affinity_report, basin_radius, clustering_accuracy};
use kss_core::tips::{connection_matrix, default_tau, tips_initialize_detailed, TipsConfig};
use kss_core::uos::{generate_dataset, generate_overlapping_ensemble, EnsembleParams};
use kss_core::Matrix;
use kss_harness::config::{
    AdjacencyChoice, CsvConfig, DataConfig, DataMode, DimModeChoice, EigenOrderChoice, ExperimentConfig, InitConfig,
    InitMethod, KssSection, OutputConfig, SyntheticConfig, TauSpec,
};
use kss_harness::experiment::{load_shared_data, run_trial, write_outputs, ExperimentOutput};
use kss_harness::io::{load_csv_dataset, read_json, write_dataset, write_json, write_labels, DatasetMetadata};
use kss_harness::report::{Aggregate, RunReport};
use kss_harness::{run_experiment, HarnessError, Result};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

#[derive(Parser)]
#[command(name = "kss", version, about = "K-subspaces clustering with thresholded spectral initialization")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// JSON experiment configuration.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Overrides the configured seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

#[derive(Subcommand)]
enum Command {
    /// Write a synthetic overlapping-subspace dataset (samples, labels, metadata).
    Generate {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 300)]
        n: usize,
        #[arg(long, default_value_t = 3)]
        clusters: usize,
        #[arg(long, default_value_t = 25)]
        d_lo: usize,
        #[arg(long, default_value_t = 30)]
        d_hi: usize,
        #[arg(long, default_value_t = 6)]
        shared: usize,
        /// Points per cluster, comma separated; one value is repeated.
        #[arg(long, value_delimiter = ',', default_value = "500")]
        sizes: Vec<usize>,
    },
    /// Threshold-graph spectral initialization only.
    Init {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        input: Input,
        #[command(flatten)]
        tips: TipsArgs,
    },
    /// Initialization plus K-subspaces on CSV files.
    Cluster {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        input: Input,
        #[command(flatten)]
        tips: TipsArgs,
        /// Eigenvalues inspected by the eigengap rule.
        #[arg(long)]
        d_upper: Option<usize>,
        /// Fixed ranks, comma separated, instead of adaptive ones.
        #[arg(long, value_delimiter = ',')]
        fixed_dims: Option<Vec<usize>>,
        #[arg(long)]
        max_iters: Option<usize>,
        /// Initialization: tips, random or given.
        #[arg(long, default_value = "tips")]
        init: String,
        /// 1-based initial labels for `--init given`.
        #[arg(long)]
        init_labels: Option<PathBuf>,
    },
    /// Config-driven multi-trial sweep.
    Experiment {
        #[command(flatten)]
        common: Common,
    },
    /// Affinities, connection probabilities and basin radius of a generated ensemble.
    Affinity {
        #[command(flatten)]
        common: Common,
        /// metadata.json written by `generate`.
        #[arg(long)]
        metadata: PathBuf,
        /// Threshold for the connection matrix; default 2/sqrt(d_hi).
        #[arg(long)]
        tau: Option<f64>,
    },
    /// Print every config field with its default and an example config.
    ConfigSchema {
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Args)]
struct Input {
    /// Samples CSV, one sample per row.
    #[arg(long)]
    samples: Option<PathBuf>,
    /// Ground-truth 1-based labels.
    #[arg(long)]
    labels: Option<PathBuf>,
    /// Number of clusters; defaults to the largest label.
    #[arg(long)]
    clusters: Option<usize>,
}

#[derive(Args)]
struct TipsArgs {
    /// Explicit threshold.
    #[arg(long)]
    tau: Option<f64>,
    /// Threshold sqrt(c)/sqrt(d_max) together with --d-max.
    #[arg(long, default_value_t = 4.0)]
    tau_c: f64,
    #[arg(long)]
    d_max: Option<usize>,
    /// binary or weighted-top2 (default for CSV data).
    #[arg(long)]
    adjacency: Option<String>,
    /// algebraic or magnitude.
    #[arg(long, default_value = "algebraic")]
    eigen_order: String,
}

fn parse_choice<T: for<'de> serde::Deserialize<'de>>(what: &str, v: &str) -> Result<T> {
    serde_json::from_value(serde_json::Value::from(v))
        .map_err(|_| HarnessError::config(format!("unknown {what} '{v}'")))
}

fn load_config(common: &Common) -> Result<Option<ExperimentConfig>> {
    let Some(path) = &common.config else { return Ok(None) };
    let mut cfg = ExperimentConfig::from_path(path)?;
    if let Some(s) = common.seed {
        cfg.seed = s;
    }
    Ok(Some(cfg))
}

fn csv_data(input: &Input) -> Result<DataConfig> {
    let samples = input.samples.clone().ok_or_else(|| HarnessError::config("--samples or --config is required"))?;
    Ok(DataConfig {
        mode: DataMode::Csv,
        synthetic: None,
        csv: Some(CsvConfig { samples_path: samples, labels_path: input.labels.clone(), clusters: input.clusters }),
    })
}

fn tips_init(t: &TipsArgs) -> Result<InitConfig> {
    Ok(InitConfig {
        tau: match (t.tau, t.d_max) {
            (Some(v), _) => TauSpec::Value(v),
            (None, Some(_)) => TauSpec::Rule { c: t.tau_c },
            (None, None) => return Err(HarnessError::config("give --tau or --d-max")),
        },
        adjacency: t.adjacency.as_deref().map(|a| parse_choice::<AdjacencyChoice>("adjacency", a)).transpose()?,
        eigen_order: parse_choice::<EigenOrderChoice>("eigen order", &t.eigen_order)?,
        ..InitConfig::default()
    })
}

fn print_json<T: Serialize>(value: &T) {
    print!("{}", String::from_utf8(kss_harness::report::to_json_bytes(value)).expect("utf-8"));
}

fn generate(
    common: &Common,
    n: usize,
    clusters: usize,
    d_lo: usize,
    d_hi: usize,
    shared: usize,
    sizes: Vec<usize>,
) -> Result<()> {
    let (synthetic, seed) = match load_config(common)? {
        Some(cfg) => {
            let s = cfg.data.synthetic.ok_or_else(|| HarnessError::config("config has no data.synthetic section"))?;
            (s, cfg.seed)
        }
        None => {
            let cluster_sizes = if sizes.len() == 1 { vec![sizes[0]; clusters] } else { sizes };
            (SyntheticConfig { n, clusters, d_lo, d_hi, s: shared, cluster_sizes }, common.seed.unwrap_or(0))
        }
    };
    let params = synthetic.ensemble_params();
    params.validate().map_err(|e| HarnessError::core("ensemble parameters", e))?;
    if synthetic.cluster_sizes.len() != synthetic.clusters {
        return Err(HarnessError::config("need one cluster size per cluster"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let ensemble = generate_overlapping_ensemble(&params, &mut rng).map_err(|e| HarnessError::core("ensemble", e))?;
    let ds = generate_dataset(&ensemble, &synthetic.cluster_sizes, &mut rng)
        .map_err(|e| HarnessError::core("dataset", e))?;
    let meta = DatasetMetadata {
        seed,
        n: synthetic.n,
        clusters: synthetic.clusters,
        d_lo: synthetic.d_lo,
        d_hi: synthetic.d_hi,
        s: synthetic.s,
        dims: ensemble.dims(),
        cluster_sizes: synthetic.cluster_sizes.clone(),
    };
    let paths = write_dataset(&common.out, &ds, &meta)?;
    println!("wrote {}, {}, {}", paths.samples.display(), paths.labels.display(), paths.metadata.display());
    Ok(())
}

#[derive(Serialize)]
struct InitSummary {
    tau: f64,
    edge_count: usize,
    adjacency_eigenvalues: Vec<f64>,
    kmeans_objective: f64,
    accuracy: Option<f64>,
}

fn init(common: &Common, input: &Input, t: &TipsArgs) -> Result<()> {
    let samples = input.samples.as_deref().ok_or_else(|| HarnessError::config("--samples is required"))?;
    let (z, truth) = load_csv_dataset(samples, input.labels.as_deref(), input.clusters)?;
    let k = input.clusters.or(truth.as_ref().map(|h| h.n_clusters())).ok_or_else(|| {
        HarnessError::config("--clusters is required without --labels")
    })?;
    let tau = t.tau.unwrap_or_else(|| default_tau(t.d_max.unwrap_or(1), t.tau_c));
    if t.tau.is_none() && t.d_max.is_none() {
        return Err(HarnessError::config("give --tau or --d-max"));
    }
    let adjacency = t.adjacency.as_deref().map_or(Ok(AdjacencyChoice::WeightedTop2), |a| parse_choice("adjacency", a))?;
    let order: EigenOrderChoice = parse_choice("eigen order", &t.eigen_order)?;
    let cfg = TipsConfig { adjacency: adjacency.into(), eigen_order: order.into(), ..TipsConfig::default() };
    let mut rng = ChaCha8Rng::seed_from_u64(common.seed.unwrap_or(0));
    let out = tips_initialize_detailed(&z, tau, k, &cfg, &mut rng).map_err(|e| HarnessError::core("TIPS", e))?;
    let accuracy = truth
        .as_ref()
        .map(|h| clustering_accuracy(&out.membership, h))
        .transpose()
        .map_err(|e| HarnessError::core("accuracy", e))?;
    write_labels(&common.out.join("init_labels.csv"), &out.membership)?;
    let summary = InitSummary {
        tau,
        edge_count: out.edge_count,
        adjacency_eigenvalues: out.eigenvalues,
        kmeans_objective: out.kmeans.objective,
        accuracy,
    };
    write_json(&common.out.join("init.json"), &summary)?;
    print_json(&summary);
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn cluster(
    common: &Common,
    input: &Input,
    t: &TipsArgs,
    d_upper: Option<usize>,
    fixed_dims: Option<Vec<usize>>,
    max_iters: Option<usize>,
    method: &str,
    init_labels: Option<PathBuf>,
) -> Result<()> {
    let mut cfg = match load_config(common)? {
        Some(c) => c,
        None => {
            let method: InitMethod = parse_choice("initialization", method)?;
            let mut init = if method == InitMethod::Tips { tips_init(t)? } else { InitConfig::default() };
            init.method = method;
            init.labels_path = init_labels;
            let dim_mode = fixed_dims.map_or(DimModeChoice::Adaptive, DimModeChoice::Fixed);
            let d_upper = match (&dim_mode, d_upper) {
                (_, Some(d)) => d,
                (DimModeChoice::Fixed(d), None) => d.iter().copied().max().unwrap_or(1),
                (DimModeChoice::Adaptive, None) => return Err(HarnessError::config("--d-upper is required")),
            };
            let cfg = ExperimentConfig {
                seed: common.seed.unwrap_or(0),
                data: csv_data(input)?,
                init,
                kss: KssSection { d_upper, max_iters, dim_mode, stop_on_fixed_point: true },
                trials: 1,
                outputs: OutputConfig::default(),
            };
            cfg.validate()?;
            cfg
        }
    };
    cfg.trials = 1;
    let shared = load_shared_data(&cfg)?;
    let trial = run_trial(&cfg, 0, shared.as_ref());
    let final_labels = trial.outcome.as_ref().map(|o| o.state.membership.clone());
    let records = vec![trial.record];
    let out = ExperimentOutput {
        report: RunReport { config_echo: cfg.clone(), aggregate: Aggregate::from_trials(&records), trials: records },
        trace: trial.trace,
        wall_seconds: vec![trial.wall_seconds],
    };
    let paths = write_outputs(&out, &cfg, &common.out)?;
    if let Some(h) = &final_labels {
        write_labels(&common.out.join("assignments.csv"), h)?;
    }
    print_json(&out.report.trials[0]);
    eprintln!("wrote {} and {}", paths.report.display(), paths.trace.display());
    match &out.report.trials[0].error {
        Some(e) => Err(HarnessError::File { path: paths.report, message: e.clone() }),
        None => Ok(()),
    }
}

fn experiment(common: &Common) -> Result<()> {
    let cfg = load_config(common)?.ok_or_else(|| HarnessError::config("--config is required"))?;
    let out = run_experiment(&cfg)?;
    let paths = write_outputs(&out, &cfg, &common.out)?;
    print_json(&out.report.aggregate);
    eprintln!("wrote {}, {} and {}", paths.report.display(), paths.trace.display(), paths.timing.display());
    Ok(())
}

fn rows(m: &Matrix) -> Vec<Vec<f64>> {
    (0..m.rows()).map(|i| m.row(i)).collect()
}

#[derive(Serialize)]
struct AffinitySummary {
    dims: Vec<usize>,
    pairwise: Vec<Vec<f64>>,
    normalized: Vec<Vec<f64>>,
    kappa: Option<f64>,
    kappa_d: f64,
    kappa_n: f64,
    tau: f64,
    connection_matrix: Vec<Vec<f64>>,
    basin_radius: Option<f64>,
}

fn affinity(common: &Common, metadata: &Path, tau: Option<f64>) -> Result<()> {
    let meta: DatasetMetadata = read_json(metadata)?;
    let params = EnsembleParams {
        ambient_dim: meta.n,
        clusters: meta.clusters,
        dim_lo: meta.d_lo,
        dim_hi: meta.d_hi,
        shared_dim: meta.s,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(meta.seed);
    let ensemble = generate_overlapping_ensemble(&params, &mut rng).map_err(|e| HarnessError::core("ensemble", e))?;
    if ensemble.dims() != meta.dims {
        return Err(HarnessError::File {
            path: metadata.to_path_buf(),
            message: format!("regenerated dims {:?} differ from recorded {:?}", ensemble.dims(), meta.dims),
        });
    }
    let report = affinity_report(&ensemble, &meta.cluster_sizes).map_err(|e| HarnessError::core("affinity", e))?;
    let tau = tau.unwrap_or_else(|| default_tau(meta.d_hi, 4.0));
    let b = connection_matrix(&ensemble, tau).map_err(|e| HarnessError::core("connection matrix", e))?;
    let n_min = meta.cluster_sizes.iter().copied().min().unwrap_or(0);
    let basin = report
        .kappa
        .filter(|&k| k < 1.0)
        .and_then(|k| basin_radius(k, report.kappa_d, n_min, meta.cluster_sizes.iter().sum()).ok());
    let summary = AffinitySummary {
        dims: meta.dims.clone(),
        pairwise: rows(&report.pairwise),
        normalized: rows(&report.normalized),
        kappa: report.kappa,
        kappa_d: report.kappa_d,
        kappa_n: report.kappa_n,
        tau,
        connection_matrix: rows(&b),
        basin_radius: basin,
    };
    write_json(&common.out.join("affinity.json"), &summary)?;
    print_json(&summary);
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Generate { common, n, clusters, d_lo, d_hi, shared, sizes } => {
            generate(&common, n, clusters, d_lo, d_hi, shared, sizes)
        }
        Command::Init { common, input, tips } => init(&common, &input, &tips),
        Command::Cluster { common, input, tips, d_upper, fixed_dims, max_iters, init, init_labels } => {
            cluster(&common, &input, &tips, d_upper, fixed_dims, max_iters, &init, init_labels)
        }
        Command::Experiment { common } => experiment(&common),
        Command::Affinity { common, metadata, tau } => affinity(&common, &metadata, tau),
        Command::ConfigSchema { common } => {
            let schema = kss_harness::schema::schema();
            if common.out != Path::new(".") {
                write_json(&common.out.join("config-schema.json"), &schema)?;
            }
            print_json(&schema);
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
