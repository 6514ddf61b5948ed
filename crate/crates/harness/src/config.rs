//! JSON experiment configuration.

use std::path::{Path, PathBuf};

use kss_core::kss::{default_max_iters, DimMode, KssConfig};
use kss_core::kmeans::KMeansConfig;
use kss_core::linalg::EigenOrder;
use kss_core::tips::{default_tau, AdjacencyMode, TipsConfig};
use kss_core::uos::EnsembleParams;
use serde::{Deserialize, Serialize};

use crate::error::{HarnessError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub seed: u64,
    pub data: DataConfig,
    #[serde(default)]
    pub init: InitConfig,
    pub kss: KssSection,
    #[serde(default = "one")]
    pub trials: usize,
    #[serde(default)]
    pub outputs: OutputConfig,
}

fn one() -> usize {
    1
}

fn yes() -> bool {
    true
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DataMode {
    Synthetic,
    Csv,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DataConfig {
    pub mode: DataMode,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub synthetic: Option<SyntheticConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub csv: Option<CsvConfig>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SyntheticConfig {
    pub n: usize,
    #[serde(rename = "K")]
    pub clusters: usize,
    pub d_lo: usize,
    pub d_hi: usize,
    #[serde(default)]
    pub s: usize,
    pub cluster_sizes: Vec<usize>,
}

impl SyntheticConfig {
    pub fn ensemble_params(&self) -> EnsembleParams {
        EnsembleParams {
            ambient_dim: self.n,
            clusters: self.clusters,
            dim_lo: self.d_lo,
            dim_hi: self.d_hi,
            shared_dim: self.s,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CsvConfig {
    pub samples_path: PathBuf,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub labels_path: Option<PathBuf>,
    /// Number of clusters; taken from the labels when omitted.
    #[serde(default, rename = "K", skip_serializing_if = "Option::is_none")]
    pub clusters: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InitMethod {
    #[default]
    Tips,
    Random,
    Given,
}

/// Threshold selection: `{"value": x}`, `{"rule": {"c": c}}` for
/// `√c / √d_max`, or `"experiment"` for `2 / √d_hi`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TauSpec {
    Value(f64),
    Rule { c: f64 },
    #[default]
    Experiment,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AdjacencyChoice {
    Binary,
    WeightedTop2,
}

impl From<AdjacencyChoice> for AdjacencyMode {
    fn from(a: AdjacencyChoice) -> Self {
        match a {
            AdjacencyChoice::Binary => AdjacencyMode::Binary,
            AdjacencyChoice::WeightedTop2 => AdjacencyMode::WeightedTop2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EigenOrderChoice {
    #[default]
    Algebraic,
    Magnitude,
}

impl From<EigenOrderChoice> for EigenOrder {
    fn from(e: EigenOrderChoice) -> Self {
        match e {
            EigenOrderChoice::Algebraic => EigenOrder::Algebraic,
            EigenOrderChoice::Magnitude => EigenOrder::Magnitude,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KMeansSection {
    #[serde(default = "KMeansSection::default_restarts")]
    pub restarts: usize,
    #[serde(default = "KMeansSection::default_max_iters")]
    pub max_iters: usize,
    #[serde(default = "KMeansSection::default_tol")]
    pub tol: f64,
}

impl KMeansSection {
    fn default_restarts() -> usize {
        KMeansConfig::default().restarts
    }
    fn default_max_iters() -> usize {
        KMeansConfig::default().max_iters
    }
    fn default_tol() -> f64 {
        KMeansConfig::default().tol
    }
}

impl Default for KMeansSection {
    fn default() -> Self {
        let d = KMeansConfig::default();
        KMeansSection { restarts: d.restarts, max_iters: d.max_iters, tol: d.tol }
    }
}

impl From<KMeansSection> for KMeansConfig {
    fn from(k: KMeansSection) -> Self {
        KMeansConfig { restarts: k.restarts, max_iters: k.max_iters, tol: k.tol }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitConfig {
    #[serde(default)]
    pub method: InitMethod,
    /// One-based initial labels, for `method = "given"`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub labels_path: Option<PathBuf>,
    #[serde(default)]
    pub tau: TauSpec,
    /// Defaults to `binary` for synthetic data and `weighted-top2` for CSV data.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub adjacency: Option<AdjacencyChoice>,
    #[serde(default)]
    pub kmeans: KMeansSection,
    #[serde(default)]
    pub eigen_order: EigenOrderChoice,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DimModeChoice {
    #[default]
    Adaptive,
    Fixed(Vec<usize>),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KssSection {
    pub d_upper: usize,
    /// Defaults to `max(10, ceil(3 log2 log2 N))`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_iters: Option<usize>,
    #[serde(default)]
    pub dim_mode: DimModeChoice,
    #[serde(default = "yes")]
    pub stop_on_fixed_point: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default = "OutputConfig::default_report")]
    pub report_path: PathBuf,
    #[serde(default = "OutputConfig::default_trace")]
    pub trace_path: PathBuf,
}

impl OutputConfig {
    fn default_report() -> PathBuf {
        PathBuf::from("report.json")
    }
    fn default_trace() -> PathBuf {
        PathBuf::from("trace.csv")
    }
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig { report_path: Self::default_report(), trace_path: Self::default_trace() }
    }
}

fn resolve(base: &Path, p: &mut PathBuf) {
    if p.is_relative() {
        *p = base.join(&*p);
    }
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = serde_json::from_str(text).map_err(|e| HarnessError::config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Reads and validates a config file. Relative input paths are resolved
    /// against the file's directory; output paths are left alone.
    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
        let mut cfg = Self::from_json(&text).map_err(|e| match e {
            HarnessError::Config(m) => HarnessError::config(format!("{}: {m}", path.display())),
            other => other,
        })?;
        let base = path.parent().unwrap_or(Path::new("."));
        if let Some(csv) = cfg.data.csv.as_mut() {
            resolve(base, &mut csv.samples_path);
            if let Some(l) = csv.labels_path.as_mut() {
                resolve(base, l);
            }
        }
        if let Some(l) = cfg.init.labels_path.as_mut() {
            resolve(base, l);
        }
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(HarnessError::config("trials must be at least 1"));
        }
        match self.data.mode {
            DataMode::Synthetic => {
                let s = self
                    .data
                    .synthetic
                    .as_ref()
                    .ok_or_else(|| HarnessError::config("data.mode = synthetic requires data.synthetic"))?;
                s.ensemble_params().validate().map_err(|e| HarnessError::config(format!("data.synthetic: {e}")))?;
                if s.cluster_sizes.len() != s.clusters {
                    return Err(HarnessError::config(format!(
                        "data.synthetic.cluster_sizes has {} entries, expected K = {}",
                        s.cluster_sizes.len(),
                        s.clusters
                    )));
                }
                if s.cluster_sizes.contains(&0) {
                    return Err(HarnessError::config("data.synthetic.cluster_sizes must be positive"));
                }
                if self.kss.dim_mode == DimModeChoice::Adaptive && self.kss.d_upper <= s.d_hi {
                    return Err(HarnessError::config(format!(
                        "kss.d_upper = {} must exceed the largest true dimension d_hi = {}",
                        self.kss.d_upper, s.d_hi
                    )));
                }
                if self.kss.d_upper > s.n {
                    return Err(HarnessError::config(format!(
                        "kss.d_upper = {} exceeds the ambient dimension n = {}",
                        self.kss.d_upper, s.n
                    )));
                }
            }
            DataMode::Csv => {
                let c = self
                    .data
                    .csv
                    .as_ref()
                    .ok_or_else(|| HarnessError::config("data.mode = csv requires data.csv"))?;
                if c.labels_path.is_none() && c.clusters.is_none() {
                    return Err(HarnessError::config("data.csv needs K when no labels_path is given"));
                }
                if c.clusters == Some(0) {
                    return Err(HarnessError::config("data.csv.K must be positive"));
                }
                if let TauSpec::Experiment | TauSpec::Rule { .. } = self.init.tau {
                    if self.init.method == InitMethod::Tips && !matches!(self.kss.dim_mode, DimModeChoice::Fixed(_)) {
                        return Err(HarnessError::config(
                            "init.tau rules need d_max, unknown for CSV data; give {\"value\": x} or fixed kss.dim_mode",
                        ));
                    }
                }
            }
        }
        match self.init.tau {
            TauSpec::Value(v) if !(v >= 0.0 && v.is_finite()) => {
                return Err(HarnessError::config(format!("init.tau.value must be a finite non-negative number, got {v}")))
            }
            TauSpec::Rule { c } if !(c > 0.0 && c.is_finite()) => {
                return Err(HarnessError::config(format!("init.tau.rule.c must be positive, got {c}")))
            }
            _ => {}
        }
        if self.init.method == InitMethod::Given && self.init.labels_path.is_none() {
            return Err(HarnessError::config("init.method = given requires init.labels_path"));
        }
        if self.init.kmeans.restarts == 0 || self.init.kmeans.max_iters == 0 {
            return Err(HarnessError::config("init.kmeans.restarts and max_iters must be at least 1"));
        }
        if self.kss.max_iters == Some(0) {
            return Err(HarnessError::config("kss.max_iters must be at least 1"));
        }
        match &self.kss.dim_mode {
            DimModeChoice::Adaptive if self.kss.d_upper < 2 => {
                return Err(HarnessError::config("adaptive kss.dim_mode needs d_upper >= 2"))
            }
            DimModeChoice::Fixed(d) if d.is_empty() || d.contains(&0) => {
                return Err(HarnessError::config("kss.dim_mode.fixed needs one positive dimension per cluster"))
            }
            _ => {}
        }
        Ok(())
    }

    pub fn adjacency(&self) -> AdjacencyChoice {
        self.init.adjacency.unwrap_or(match self.data.mode {
            DataMode::Synthetic => AdjacencyChoice::Binary,
            DataMode::Csv => AdjacencyChoice::WeightedTop2,
        })
    }

    pub fn tips_config(&self) -> TipsConfig {
        TipsConfig {
            adjacency: self.adjacency().into(),
            eigen_order: self.init.eigen_order.into(),
            kmeans: self.init.kmeans.into(),
        }
    }

    /// Largest subspace dimension used by the threshold rules: `d_hi` for
    /// synthetic data, otherwise the largest fixed rank.
    pub fn d_max(&self) -> Option<usize> {
        match (&self.data.synthetic, &self.kss.dim_mode) {
            (Some(s), _) if self.data.mode == DataMode::Synthetic => Some(s.d_hi),
            (_, DimModeChoice::Fixed(d)) => d.iter().copied().max(),
            _ => None,
        }
    }

    pub fn tau(&self) -> Result<f64> {
        let d_max = || self.d_max().ok_or_else(|| HarnessError::config("threshold rule needs a known d_max"));
        Ok(match self.init.tau {
            TauSpec::Value(v) => v,
            TauSpec::Rule { c } => default_tau(d_max()?, c),
            TauSpec::Experiment => default_tau(d_max()?, 4.0),
        })
    }

    pub fn kss_config(&self, n_points: usize) -> KssConfig {
        KssConfig {
            d_upper: self.kss.d_upper,
            max_iters: self.kss.max_iters.unwrap_or_else(|| default_max_iters(n_points)),
            dim_mode: match &self.kss.dim_mode {
                DimModeChoice::Adaptive => DimMode::Adaptive,
                DimModeChoice::Fixed(d) => DimMode::Fixed(d.clone()),
            },
            stop_on_fixed_point: self.kss.stop_on_fixed_point,
        }
    }

    /// The synthetic setting of the convergence experiment: `n = 300`,
    /// `K = 3`, `d_k ∈ [25, 30]`, `s = 6`, `N_k = 500`, `τ = 2/√30`.
    pub fn overlapping_reference() -> Self {
        ExperimentConfig {
            seed: 20_240_601,
            data: DataConfig {
                mode: DataMode::Synthetic,
                synthetic: Some(SyntheticConfig {
                    n: 300,
                    clusters: 3,
                    d_lo: 25,
                    d_hi: 30,
                    s: 6,
                    cluster_sizes: vec![500; 3],
                }),
                csv: None,
            },
            init: InitConfig::default(),
            kss: KssSection {
                d_upper: 35,
                max_iters: Some(30),
                dim_mode: DimModeChoice::Adaptive,
                stop_on_fixed_point: true,
            },
            trials: 10,
            outputs: OutputConfig::default(),
        }
    }
}
