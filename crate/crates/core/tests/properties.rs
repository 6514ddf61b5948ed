//! Property tests against brute-force oracles.

use kss_core::kss::{assign_clusters, estimate_dim, objective, run_kss, DimMode, KssConfig};
use kss_core::linalg::{pca, subspace_distance, sym_eig, sym_eigenvalues, OrthonormalBasis, SymmetricMatrix};
use kss_core::metrics::{affinity, membership_distance_sq};
use kss_core::tips::{build_adjacency, connection_matrix};
use kss_core::uos::{
    generate_dataset, generate_overlapping_ensemble, random_orthogonal, random_subspace, EnsembleParams,
};
use kss_core::{Matrix, MembershipMatrix};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn random_symmetric(n: usize, r: &mut ChaCha8Rng) -> SymmetricMatrix {
    SymmetricMatrix::from_lower_fn(n, |_, _| r.random_range(-1.0..1.0))
}

fn permutations(k: usize) -> Vec<Vec<usize>> {
    if k == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in permutations(k - 1) {
        for pos in 0..k {
            let mut q = p.clone();
            q.insert(pos, k - 1);
            out.push(q);
        }
    }
    out
}

/// `min_π ‖H - H'Q_π‖_F²` by enumeration.
fn brute_distance_sq(a: &[usize], b: &[usize], k: usize) -> usize {
    permutations(k)
        .iter()
        .map(|p| 2 * a.iter().zip(b).filter(|(x, y)| p[**y] != **x).count())
        .min()
        .unwrap()
}

/// Characteristic polynomial coefficients `c_0..c_n` (monic) by Faddeev-LeVerrier.
fn char_poly(a: &Matrix) -> Vec<f64> {
    let n = a.rows();
    let mut c = vec![0.0; n + 1];
    c[n] = 1.0;
    let mut m = Matrix::zeros(n, n);
    for k in 1..=n {
        let mut next = a.matmul(&m).unwrap();
        for i in 0..n {
            next[(i, i)] += c[n - k + 1];
        }
        m = next;
        c[n - k] = -a.matmul(&m).unwrap().trace() / k as f64;
    }
    c
}

fn horner(c: &[f64], x: (f64, f64)) -> (f64, f64) {
    c.iter().rev().fold((0.0, 0.0), |(re, im), &ci| (re * x.0 - im * x.1 + ci, re * x.1 + im * x.0))
}

/// Real roots of a monic polynomial by Durand-Kerner, polished by Newton.
fn real_roots(c: &[f64]) -> Vec<f64> {
    let n = c.len() - 1;
    let mut z: Vec<(f64, f64)> = (0..n)
        .map(|k| {
            let r = 0.9f64.powi(k as i32);
            let th = 0.4 + 2.0 * std::f64::consts::PI * k as f64 / n as f64;
            (r * th.cos(), r * th.sin())
        })
        .collect();
    for _ in 0..2000 {
        for i in 0..n {
            let (mut dr, mut di) = (1.0, 0.0);
            for j in 0..n {
                if j != i {
                    let (er, ei) = (z[i].0 - z[j].0, z[i].1 - z[j].1);
                    (dr, di) = (dr * er - di * ei, dr * ei + di * er);
                }
            }
            let (pr, pi) = horner(c, z[i]);
            let den = dr * dr + di * di;
            z[i].0 -= (pr * dr + pi * di) / den;
            z[i].1 -= (pi * dr - pr * di) / den;
        }
    }
    let dc: Vec<f64> = (1..=n).map(|k| k as f64 * c[k]).collect();
    let mut roots: Vec<f64> = z
        .iter()
        .map(|&(mut x, _)| {
            for _ in 0..5 {
                let d = horner(&dc, (x, 0.0)).0;
                if d != 0.0 {
                    x -= horner(c, (x, 0.0)).0 / d;
                }
            }
            x
        })
        .collect();
    roots.sort_by(|a, b| b.partial_cmp(a).unwrap());
    roots
}

fn min_gap(v: &[f64]) -> f64 {
    v.windows(2).map(|w| (w[0] - w[1]).abs()).fold(f64::INFINITY, f64::min)
}

fn rotated(u: &OrthonormalBasis, r: &mut ChaCha8Rng) -> OrthonormalBasis {
    u.rotate(&random_orthogonal(u.dim(), r).unwrap()).unwrap()
}

fn labels(n: usize, k: usize, r: &mut ChaCha8Rng) -> Vec<usize> {
    (0..n).map(|_| r.random_range(0..k)).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn eigenvalues_sum_to_trace(n in 1usize..40, seed in any::<u64>()) {
        let a = random_symmetric(n, &mut rng(seed));
        let e = sym_eig(&a, n).unwrap();
        let tr = a.trace();
        prop_assert!((e.values.iter().sum::<f64>() - tr).abs() <= 1e-8 * (1.0 + tr.abs()));
    }

    #[test]
    fn eigenvalues_are_characteristic_roots(n in 1usize..=4, seed in any::<u64>()) {
        let a = random_symmetric(n, &mut rng(seed));
        let roots = real_roots(&char_poly(a.as_matrix()));
        // clustered roots are ill-conditioned as polynomial roots
        prop_assume!(min_gap(&roots) > 1e-3);
        let values = sym_eigenvalues(&a).unwrap();
        for (r, v) in roots.iter().zip(&values) {
            prop_assert!((r - v).abs() <= 1e-8, "{roots:?} vs {values:?}");
        }
    }

    #[test]
    fn subspace_distance_symmetric_and_rotation_invariant(
        n in 2usize..20, d in 1usize..6, seed in any::<u64>()
    ) {
        let d = d.min(n);
        let mut r = rng(seed);
        let u = random_subspace(n, d, &mut r).unwrap();
        let v = random_subspace(n, d, &mut r).unwrap();
        let duv = subspace_distance(&u, &v).unwrap();
        prop_assert!((duv - subspace_distance(&v, &u).unwrap()).abs() <= 1e-10);
        prop_assert!(subspace_distance(&u, &rotated(&u, &mut r)).unwrap() <= 1e-10);
        prop_assert!((subspace_distance(&rotated(&u, &mut r), &v).unwrap() - duv).abs() <= 1e-10);
    }

    #[test]
    fn pca_recovers_exact_low_rank_scatter(
        n in 3usize..25, d in 1usize..5, pts in 0usize..10, seed in any::<u64>()
    ) {
        let d = d.min(n - 1);
        let mut r = rng(seed);
        let truth = random_subspace(n, d, &mut r).unwrap();
        let points: Vec<Vec<f64>> = (0..d + pts)
            .map(|_| truth.as_matrix().matvec(&(0..d).map(|_| r.random_range(-1.0..1.0)).collect::<Vec<_>>()))
            .collect();
        let x = Matrix::from_columns(n, &points).unwrap();
        let a = SymmetricMatrix::new(x.matmul(&x.transpose()).unwrap()).unwrap();
        let e = sym_eig(&a, d).unwrap();
        prop_assume!(e.values[d - 1] > 1e-4 * e.values[0]);
        prop_assert!(subspace_distance(&pca(&a, d).unwrap(), &truth).unwrap() <= 1e-8);
    }

    #[test]
    fn pca_commutes_with_conjugation(n in 3usize..20, d in 1usize..4, seed in any::<u64>()) {
        let d = d.min(n - 1);
        let mut r = rng(seed);
        // spectrum with a clear gap after the d-th eigenvalue
        let q0 = random_orthogonal(n, &mut r).unwrap();
        let lam: Vec<f64> = (0..n).map(|i| if i < d { 2.0 + i as f64 } else { r.random_range(0.0..1.0) }).collect();
        let build = |q: &Matrix| {
            let ql = Matrix::from_fn(n, n, |i, j| q[(i, j)] * lam[j]);
            SymmetricMatrix::new(ql.matmul(&q.transpose()).unwrap()).unwrap()
        };
        let a = build(&q0);
        let q = random_orthogonal(n, &mut r).unwrap();
        let conj = build(&q.matmul(&q0).unwrap());
        let u = pca(&a, d).unwrap();
        let qu = OrthonormalBasis::new(q.matmul(u.as_matrix()).unwrap()).unwrap();
        prop_assert!(subspace_distance(&pca(&conj, d).unwrap(), &rotated(&qu, &mut r)).unwrap() <= 1e-8);
    }

    #[test]
    fn affinity_is_rotation_invariant(n in 2usize..20, d1 in 1usize..6, d2 in 1usize..6, seed in any::<u64>()) {
        let mut r = rng(seed);
        let u = random_subspace(n, d1.min(n), &mut r).unwrap();
        let v = random_subspace(n, d2.min(n), &mut r).unwrap();
        let a = affinity(&u, &v).unwrap();
        prop_assert!((affinity(&rotated(&u, &mut r), &rotated(&v, &mut r)).unwrap() - a).abs() <= 1e-10);
        prop_assert!(a <= (u.dim().min(v.dim()) as f64).sqrt() + 1e-12);
        prop_assert_eq!(affinity(&u, &u).unwrap(), (u.dim() as f64).sqrt());
        prop_assert!((affinity(&u, &rotated(&u, &mut r)).unwrap() - (u.dim() as f64).sqrt()).abs() <= 1e-12);
    }

    #[test]
    fn assignment_is_rowwise_argmin(rows in 1usize..30, k in 1usize..7, seed in any::<u64>()) {
        let mut r = rng(seed);
        // a coarse grid makes ties frequent
        let g = Matrix::from_fn(rows, k, |_, _| r.random_range(0..6) as f64 / 8.0);
        let h = assign_clusters(&g).unwrap();
        for i in 0..rows {
            let row: Vec<f64> = (0..k).map(|c| g[(i, c)]).collect();
            let min = row.iter().cloned().fold(f64::INFINITY, f64::min);
            prop_assert_eq!(h.label(i), row.iter().position(|&x| x == min).unwrap());
        }
    }

    #[test]
    fn assignment_ignores_row_shifts_and_monotone_maps(
        rows in 1usize..30, k in 1usize..7, seed in any::<u64>()
    ) {
        let mut r = rng(seed);
        let g = Matrix::from_fn(rows, k, |_, _| r.random_range(0..6) as f64 / 8.0);
        let shifts: Vec<f64> = (0..rows).map(|_| r.random_range(-4..5) as f64).collect();
        let shifted = Matrix::from_fn(rows, k, |i, c| g[(i, c)] + shifts[i]);
        let mapped = Matrix::from_fn(rows, k, |i, c| if i % 2 == 0 { 3.0 * g[(i, c)] - 1.0 } else { g[(i, c)].powi(3) });
        let h = assign_clusters(&g).unwrap();
        prop_assert_eq!(&assign_clusters(&shifted).unwrap(), &h);
        prop_assert_eq!(&assign_clusters(&mapped).unwrap(), &h);
    }

    #[test]
    fn assignment_is_permutation_equivariant(rows in 1usize..30, k in 1usize..7, seed in any::<u64>()) {
        let mut r = rng(seed);
        // continuous costs: ties have probability zero
        let g = Matrix::from_fn(rows, k, |_, _| r.random_range(0.0..1.0));
        let perms = permutations(k);
        let p = &perms[r.random_range(0..perms.len())];
        // column c of g moves to column p[c]
        let mut inv = vec![0; k];
        for (c, &pc) in p.iter().enumerate() {
            inv[pc] = c;
        }
        let gp = Matrix::from_fn(rows, k, |i, c| g[(i, inv[c])]);
        prop_assert_eq!(assign_clusters(&gp).unwrap(), assign_clusters(&g).unwrap().relabel(p).unwrap());
    }

    #[test]
    fn eigengap_matches_enumeration(d in 2usize..12, seed in any::<u64>()) {
        let mut r = rng(seed);
        let mut lam: Vec<f64> = (0..d).map(|_| r.random_range(0..5) as f64 / 4.0).collect();
        lam.sort_by(|a, b| b.partial_cmp(a).unwrap());
        let best = (1..d).map(|i| lam[i - 1] - lam[i]).fold(f64::NEG_INFINITY, f64::max);
        let expected = (1..d).find(|&i| lam[i - 1] - lam[i] == best).unwrap();
        prop_assert_eq!(estimate_dim(&lam).unwrap(), expected);
    }

    #[test]
    fn membership_distance_matches_enumeration(n in 1usize..40, k in 1usize..=6, seed in any::<u64>()) {
        let mut r = rng(seed);
        let (a, b) = (labels(n, k, &mut r), labels(n, k, &mut r));
        let got = membership_distance_sq(
            &MembershipMatrix::new(a.clone(), k).unwrap(),
            &MembershipMatrix::new(b.clone(), k).unwrap(),
        ).unwrap();
        prop_assert_eq!(got, brute_distance_sq(&a, &b, k));
    }

    #[test]
    fn membership_distance_is_a_pseudometric(n in 1usize..40, k in 1usize..=6, seed in any::<u64>()) {
        let mut r = rng(seed);
        let h: Vec<MembershipMatrix> =
            (0..3).map(|_| MembershipMatrix::new(labels(n, k, &mut r), k).unwrap()).collect();
        let d = |a: &MembershipMatrix, b: &MembershipMatrix| (membership_distance_sq(a, b).unwrap() as f64).sqrt();
        prop_assert_eq!(d(&h[0], &h[1]), d(&h[1], &h[0]));
        prop_assert!(d(&h[0], &h[2]) <= d(&h[0], &h[1]) + d(&h[1], &h[2]) + 1e-12);
        let perms = permutations(k);
        let p = &perms[r.random_range(0..perms.len())];
        prop_assert_eq!(d(&h[0], &h[1].relabel(p).unwrap()), d(&h[0], &h[1]));
    }

    #[test]
    fn adjacency_commutes_with_point_permutation(n in 2usize..8, pts in 2usize..30, seed in any::<u64>()) {
        let mut r = rng(seed);
        let z = Matrix::from_fn(n, pts, |_, _| r.random_range(-1.0..1.0));
        let mut order: Vec<usize> = (0..pts).collect();
        for i in (1..pts).rev() {
            order.swap(i, r.random_range(0..=i));
        }
        let zp = z.select_columns(&order);
        let a = build_adjacency(&z, 0.5).unwrap();
        let ap = build_adjacency(&zp, 0.5).unwrap();
        for i in 0..pts {
            for j in 0..pts {
                prop_assert_eq!(ap.adjacency().as_matrix()[(i, j)], a.adjacency().as_matrix()[(order[i], order[j])]);
            }
        }
    }

    #[test]
    fn larger_threshold_never_adds_edges(
        pts in 2usize..30, t1 in 0.01f64..1.0, t2 in 0.01f64..1.0, seed in any::<u64>()
    ) {
        let (lo, hi) = if t1 <= t2 { (t1, t2) } else { (t2, t1) };
        let mut r = rng(seed);
        let z = Matrix::from_fn(4, pts, |_, _| r.random_range(-1.0..1.0));
        let a_lo = build_adjacency(&z, lo).unwrap();
        let a_hi = build_adjacency(&z, hi).unwrap();
        for (x, y) in a_hi.adjacency().as_matrix().as_slice().iter().zip(a_lo.adjacency().as_matrix().as_slice()) {
            prop_assert!(x <= y);
        }
    }

    #[test]
    fn connection_probabilities_decrease_with_threshold(
        t1 in 0.01f64..1.0, t2 in 0.01f64..1.0, seed in any::<u64>()
    ) {
        let (lo, hi) = if t1 <= t2 { (t1, t2) } else { (t2, t1) };
        let p = EnsembleParams { ambient_dim: 30, clusters: 3, dim_lo: 3, dim_hi: 6, shared_dim: 2 };
        let e = generate_overlapping_ensemble(&p, &mut rng(seed)).unwrap();
        let b_lo = connection_matrix(&e, lo).unwrap();
        let b_hi = connection_matrix(&e, hi).unwrap();
        for (x, y) in b_hi.as_slice().iter().zip(b_lo.as_slice()) {
            prop_assert!(x <= y);
            prop_assert!((0.0..=1.0).contains(x));
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(20))]

    #[test]
    fn fixed_rank_alternation_descends_at_every_half_step(seed in any::<u64>()) {
        let mut r = rng(seed);
        let dims = vec![r.random_range(1..4), r.random_range(1..4), r.random_range(1..4)];
        let bases: Vec<_> = dims.iter().map(|&d| random_subspace(12, d, &mut r).unwrap()).collect();
        let e = kss_core::uos::SubspaceEnsemble::new(bases, 0).unwrap();
        let ds = generate_dataset(&e, &[20, 20, 20], &mut r).unwrap();
        let h0 = MembershipMatrix::new(labels(60, 3, &mut r), 3).unwrap();
        let cfg = KssConfig { d_upper: 3, max_iters: 15, dim_mode: DimMode::Fixed(dims), stop_on_fixed_point: false };
        let out = run_kss(&ds.samples, &h0, &cfg, None, &mut r).unwrap();
        let recs = &out.trace.records;
        for w in recs.windows(2) {
            let pre = w[1].pre_assignment_objective.unwrap();
            prop_assert!(pre <= w[0].objective + 1e-8, "subspace step rose: {} -> {}", w[0].objective, pre);
            prop_assert!(w[1].objective <= pre + 1e-8, "assignment step rose: {} -> {}", pre, w[1].objective);
        }
        let last = recs.last().unwrap();
        let direct = objective(&ds.samples, &out.state.membership, &out.state.bases).unwrap();
        prop_assert!((direct - last.objective).abs() <= 1e-9);
    }
}
