//! Lloyd's algorithm with k-means++ seeding and restarts.

use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;

use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::membership::MembershipMatrix;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KMeansConfig {
    pub restarts: usize,
    pub max_iters: usize,
    /// Stop once no center moves farther than this.
    pub tol: f64,
}

impl Default for KMeansConfig {
    fn default() -> Self {
        KMeansConfig {
            restarts: 10,
            max_iters: 100,
            tol: 1e-6,
        }
    }
}

#[derive(Debug, Clone)]
pub struct KMeansResult {
    pub membership: MembershipMatrix,
    /// `K x dim`, one center per row.
    pub centers: Matrix,
    /// `‖H X - V‖_F²` for the returned labels and centers.
    pub objective: f64,
    /// Per-iteration objective of the winning restart.
    pub history: Vec<f64>,
}

/// Clusters the rows of `points` into `k` groups, keeping the best of
/// `config.restarts` seeded runs (earliest restart wins ties).
pub fn kmeans<R: Rng + ?Sized>(
    points: &Matrix,
    k: usize,
    config: &KMeansConfig,
    rng: &mut R,
) -> Result<KMeansResult> {
    let (n, _) = points.shape();
    if k == 0 || k > n {
        return Err(Error::invalid(alloc::format!(
            "cannot form {k} clusters from {n} points"
        )));
    }
    if config.restarts == 0 {
        return Err(Error::invalid("k-means needs at least one restart"));
    }
    if !points.is_finite() {
        return Err(Error::NonFinite("kmeans input"));
    }
    let data = RowMajor::from(points);
    let mut best: Option<Run> = None;
    for _ in 0..config.restarts {
        let run = lloyd(&data, k, config, rng);
        if best.as_ref().is_none_or(|b| run.objective < b.objective) {
            best = Some(run);
        }
    }
    let best = best.expect("at least one restart");
    Ok(KMeansResult {
        membership: MembershipMatrix::new(best.labels, k)?,
        centers: Matrix::from_fn(k, data.dim, |c, j| best.centers[c * data.dim + j]),
        objective: best.objective,
        history: best.history,
    })
}

struct RowMajor {
    n: usize,
    dim: usize,
    data: Vec<f64>,
}

impl RowMajor {
    fn from(m: &Matrix) -> Self {
        let (n, dim) = m.shape();
        let mut data = Vec::with_capacity(n * dim);
        for i in 0..n {
            for j in 0..dim {
                data.push(m[(i, j)]);
            }
        }
        RowMajor { n, dim, data }
    }

    fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }
}

struct Run {
    labels: Vec<usize>,
    centers: Vec<f64>,
    objective: f64,
    history: Vec<f64>,
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// D²-weighted seeding.
fn seed_centers<R: Rng + ?Sized>(data: &RowMajor, k: usize, rng: &mut R) -> Vec<f64> {
    let mut centers = Vec::with_capacity(k * data.dim);
    let first = rng.random_range(0..data.n);
    centers.extend_from_slice(data.row(first));
    let mut nearest: Vec<f64> = (0..data.n).map(|i| sq_dist(data.row(i), data.row(first))).collect();
    for _ in 1..k {
        let total: f64 = nearest.iter().sum();
        let pick = if total > 0.0 {
            let mut target = rng.random::<f64>() * total;
            let mut idx = data.n - 1;
            for (i, &w) in nearest.iter().enumerate() {
                if target < w {
                    idx = i;
                    break;
                }
                target -= w;
            }
            idx
        } else {
            rng.random_range(0..data.n)
        };
        let c = data.row(pick).to_vec();
        for (i, d) in nearest.iter_mut().enumerate() {
            *d = d.min(sq_dist(data.row(i), &c));
        }
        centers.extend_from_slice(&c);
    }
    centers
}

/// Nearest center per point (lowest index on ties) and the squared distances.
fn assign(data: &RowMajor, centers: &[f64], k: usize, labels: &mut [usize], dist: &mut [f64]) -> f64 {
    let mut total = 0.0;
    for i in 0..data.n {
        let p = data.row(i);
        let mut best = (0, f64::INFINITY);
        for c in 0..k {
            let d = sq_dist(p, &centers[c * data.dim..(c + 1) * data.dim]);
            if d < best.1 {
                best = (c, d);
            }
        }
        labels[i] = best.0;
        dist[i] = best.1;
        total += best.1;
    }
    total
}

/// Recomputes centers as means. An empty cluster is re-seeded at the point
/// currently farthest from its center. Returns the largest center movement.
fn update(data: &RowMajor, k: usize, labels: &[usize], dist: &[f64], centers: &mut [f64]) -> f64 {
    let dim = data.dim;
    let mut sums = vec![0.0; k * dim];
    let mut counts = vec![0usize; k];
    for i in 0..data.n {
        let c = labels[i];
        counts[c] += 1;
        for (s, x) in sums[c * dim..(c + 1) * dim].iter_mut().zip(data.row(i)) {
            *s += x;
        }
    }
    let mut spare: Vec<f64> = dist.to_vec();
    let mut movement = 0.0f64;
    for c in 0..k {
        let new: Vec<f64> = if counts[c] > 0 {
            sums[c * dim..(c + 1) * dim].iter().map(|s| s / counts[c] as f64).collect()
        } else {
            let far = (0..data.n)
                .fold(0, |b, i| if spare[i] > spare[b] { i } else { b });
            spare[far] = -1.0;
            data.row(far).to_vec()
        };
        let old = &mut centers[c * dim..(c + 1) * dim];
        movement = movement.max(libm::sqrt(sq_dist(old, &new)));
        old.copy_from_slice(&new);
    }
    movement
}

fn lloyd<R: Rng + ?Sized>(data: &RowMajor, k: usize, config: &KMeansConfig, rng: &mut R) -> Run {
    let mut centers = seed_centers(data, k, rng);
    let mut labels = vec![0; data.n];
    let mut dist = vec![0.0; data.n];
    let mut history = Vec::new();
    for _ in 0..config.max_iters {
        history.push(assign(data, &centers, k, &mut labels, &mut dist));
        if update(data, k, &labels, &dist, &mut centers) <= config.tol {
            break;
        }
    }
    let objective = assign(data, &centers, k, &mut labels, &mut dist);
    history.push(objective);
    Run {
        labels,
        centers,
        objective,
        history,
    }
}
