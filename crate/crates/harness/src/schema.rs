//! Self-describing config documentation for `kss config-schema`.

use serde::Serialize;

use crate::config::ExperimentConfig;

const FIELDS: &[(&str, &str)] = &[
    ("seed", "master seed; trial i uses the (i+1)-th SplitMix64 output of it (default 0)"),
    ("data.mode", "\"synthetic\" or \"csv\""),
    ("data.synthetic.n", "ambient dimension"),
    ("data.synthetic.K", "number of subspaces"),
    ("data.synthetic.d_lo", "smallest subspace dimension"),
    ("data.synthetic.d_hi", "largest subspace dimension"),
    ("data.synthetic.s", "dimension shared by all subspaces (default 0)"),
    ("data.synthetic.cluster_sizes", "points per subspace, K entries"),
    ("data.csv.samples_path", "one sample per row, optional header; rows are scaled to unit norm"),
    ("data.csv.labels_path", "optional ground truth, one 1-based label per row"),
    ("data.csv.K", "number of clusters; defaults to the largest label"),
    ("init.method", "\"tips\" (default), \"random\" or \"given\""),
    ("init.labels_path", "1-based initial labels for method \"given\""),
    (
        "init.tau",
        "{\"value\": x}, {\"rule\": {\"c\": c}} for sqrt(c)/sqrt(d_max), or \"experiment\" for 2/sqrt(d_max) \
         (default); d_max is d_hi for synthetic data and the largest fixed rank otherwise",
    ),
    ("init.adjacency", "\"binary\" or \"weighted-top2\"; default binary for synthetic data, weighted-top2 for csv"),
    ("init.kmeans.restarts", "k-means++ restarts (default 10)"),
    ("init.kmeans.max_iters", "Lloyd iterations per restart (default 100)"),
    ("init.kmeans.tol", "stop when no center moves farther than this (default 1e-6)"),
    ("init.eigen_order", "\"algebraic\" (default) or \"magnitude\" leading eigenvectors of the adjacency"),
    ("kss.d_upper", "eigenvalues inspected for the eigengap; must exceed every true dimension"),
    ("kss.max_iters", "iteration budget (default max(10, ceil(3 log2 log2 N)))"),
    ("kss.dim_mode", "\"adaptive\" (default) or {\"fixed\": [d_1, ..., d_K]}"),
    ("kss.stop_on_fixed_point", "stop once an assignment repeats (default true)"),
    ("trials", "number of seeded trials (default 1)"),
    ("outputs.report_path", "JSON report, relative to --out (default report.json)"),
    ("outputs.trace_path", "per-iteration CSV trace, relative to --out (default trace.csv)"),
];

#[derive(Serialize)]
pub struct Schema {
    /// A complete config for the overlapping-subspace convergence experiment.
    pub example: ExperimentConfig,
    pub fields: serde_json::Map<String, serde_json::Value>,
}

pub fn schema() -> Schema {
    Schema {
        example: ExperimentConfig::overlapping_reference(),
        fields: FIELDS.iter().map(|(k, v)| ((*k).to_owned(), serde_json::Value::from(*v))).collect(),
    }
}
