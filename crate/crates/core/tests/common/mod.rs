//! Independent reference implementations used as test oracles. Nothing
//! here calls into the library's metric or eigen code.

#![allow(dead_code, clippy::needless_range_loop)]

use std::collections::HashMap;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use typerec::linalg::Matrix;

pub fn random_labels(rng: &mut ChaCha8Rng, n: usize, k: usize) -> Vec<usize> {
    (0..n).map(|_| rng.random_range(0..k)).collect()
}

fn counts(labels: &[usize]) -> HashMap<usize, f64> {
    let mut m = HashMap::new();
    for &l in labels {
        *m.entry(l).or_insert(0.0) += 1.0;
    }
    m
}

fn joint(a: &[usize], b: &[usize]) -> HashMap<(usize, usize), f64> {
    let mut m = HashMap::new();
    for (&x, &y) in a.iter().zip(b) {
        *m.entry((x, y)).or_insert(0.0) += 1.0;
    }
    m
}

/// Shannon entropy (nats) of a labeling from its probability table.
pub fn entropy(labels: &[usize]) -> f64 {
    let n = labels.len() as f64;
    counts(labels)
        .values()
        .map(|&c| {
            let p = c / n;
            -p * p.ln()
        })
        .sum()
}

/// `H(A | B)` from the joint probability table.
pub fn conditional_entropy(a: &[usize], b: &[usize]) -> f64 {
    let n = a.len() as f64;
    let pb = counts(b);
    joint(a, b)
        .iter()
        .map(|(&(_, y), &c)| {
            let p_xy = c / n;
            let p_y = pb[&y] / n;
            -p_xy * (p_xy / p_y).ln()
        })
        .sum()
}

pub fn mutual_information(a: &[usize], b: &[usize]) -> f64 {
    let n = a.len() as f64;
    let pa = counts(a);
    let pb = counts(b);
    joint(a, b)
        .iter()
        .map(|(&(x, y), &c)| {
            let p_xy = c / n;
            p_xy * (p_xy / ((pa[&x] / n) * (pb[&y] / n))).ln()
        })
        .sum()
}

/// Homogeneity, completeness and V-measure straight from their
/// conditional-entropy definitions.
pub fn hcv(truth: &[usize], pred: &[usize]) -> (f64, f64, f64) {
    let h_c = entropy(truth);
    let h_k = entropy(pred);
    let h = if h_c == 0.0 {
        1.0
    } else {
        1.0 - conditional_entropy(truth, pred) / h_c
    };
    let c = if h_k == 0.0 {
        1.0
    } else {
        1.0 - conditional_entropy(pred, truth) / h_k
    };
    let v = if h + c == 0.0 {
        0.0
    } else {
        2.0 * h * c / (h + c)
    };
    (h, c, v)
}

/// ARI by enumerating every pair of samples.
pub fn ari_pairs(truth: &[usize], pred: &[usize]) -> f64 {
    let n = truth.len();
    let (mut ss, mut sd, mut ds, mut dd) = (0f64, 0f64, 0f64, 0f64);
    for i in 0..n {
        for j in (i + 1)..n {
            match (truth[i] == truth[j], pred[i] == pred[j]) {
                (true, true) => ss += 1.0,
                (true, false) => sd += 1.0,
                (false, true) => ds += 1.0,
                (false, false) => dd += 1.0,
            }
        }
    }
    let den = (ss + sd) * (sd + dd) + (ss + ds) * (ds + dd);
    if den == 0.0 {
        return 1.0;
    }
    2.0 * (ss * dd - sd * ds) / den
}

/// Visits every permutation of `items` (Heap's algorithm).
pub fn for_each_permutation(items: &mut [usize], f: &mut impl FnMut(&[usize])) {
    let n = items.len();
    let mut c = vec![0usize; n];
    f(items);
    let mut i = 0;
    while i < n {
        if c[i] < i {
            if i % 2 == 0 {
                items.swap(0, i);
            } else {
                items.swap(c[i], i);
            }
            f(items);
            c[i] += 1;
            i = 0;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
}

/// Mean MI over all n! relabelings of `pred` against a fixed `truth`.
pub fn permutation_emi(truth: &[usize], pred: &[usize]) -> f64 {
    let mut p = pred.to_vec();
    let (mut sum, mut count) = (0.0, 0u64);
    for_each_permutation(&mut p, &mut |perm| {
        sum += mutual_information(truth, perm);
        count += 1;
    });
    sum / count as f64
}

/// Silhouette coefficients from a fully materialized distance matrix.
pub fn silhouette_direct(points: &[Vec<f64>], labels: &[usize]) -> Vec<f64> {
    let n = points.len();
    let dist: Vec<Vec<f64>> = points
        .iter()
        .map(|p| {
            points
                .iter()
                .map(|q| {
                    p.iter()
                        .zip(q)
                        .map(|(a, b)| (a - b) * (a - b))
                        .sum::<f64>()
                        .sqrt()
                })
                .collect()
        })
        .collect();
    let sizes = counts(labels);
    (0..n)
        .map(|i| {
            let own = labels[i];
            if sizes[&own] == 1.0 {
                return 0.0;
            }
            let mut sums: HashMap<usize, f64> = HashMap::new();
            for j in 0..n {
                if j != i {
                    *sums.entry(labels[j]).or_insert(0.0) += dist[i][j];
                }
            }
            let a = sums[&own] / (sizes[&own] - 1.0);
            let b = sums
                .iter()
                .filter(|(&l, _)| l != own)
                .map(|(l, s)| s / sizes[l])
                .fold(f64::INFINITY, f64::min);
            let m = a.max(b);
            if m == 0.0 {
                0.0
            } else {
                (b - a) / m
            }
        })
        .collect()
}

/// Classical Jacobi: always rotates away the largest off-diagonal entry,
/// with the angle from `atan2`. Returns eigenvalues in descending order and
/// the matching unit eigenvectors.
pub fn jacobi_max_pivot(a: &[Vec<f64>]) -> (Vec<f64>, Vec<Vec<f64>>) {
    let n = a.len();
    let mut m = a.to_vec();
    let mut v: Vec<Vec<f64>> = (0..n)
        .map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
        .collect();
    let norm: f64 = m.iter().flatten().map(|x| x * x).sum::<f64>().sqrt();
    for _ in 0..(100 * n * n).max(1) {
        let (mut p, mut q, mut big) = (0, 0, 0.0);
        for i in 0..n {
            for j in (i + 1)..n {
                if m[i][j].abs() > big {
                    big = m[i][j].abs();
                    p = i;
                    q = j;
                }
            }
        }
        if big <= 1e-15 * norm.max(1e-300) {
            break;
        }
        let theta = 0.5 * (2.0 * m[p][q]).atan2(m[q][q] - m[p][p]);
        let (s, c) = theta.sin_cos();
        for k in 0..n {
            let (mkp, mkq) = (m[k][p], m[k][q]);
            m[k][p] = c * mkp - s * mkq;
            m[k][q] = s * mkp + c * mkq;
        }
        for k in 0..n {
            let (mpk, mqk) = (m[p][k], m[q][k]);
            m[p][k] = c * mpk - s * mqk;
            m[q][k] = s * mpk + c * mqk;
        }
        for row in v.iter_mut() {
            let (vp, vq) = (row[p], row[q]);
            row[p] = c * vp - s * vq;
            row[q] = s * vp + c * vq;
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m[j][j].total_cmp(&m[i][i]));
    let values = order.iter().map(|&i| m[i][i]).collect();
    let vectors = order
        .iter()
        .map(|&i| v.iter().map(|row| row[i]).collect())
        .collect();
    (values, vectors)
}

/// Sample covariance (n − 1 denominator) computed by two explicit loops.
pub fn covariance(rows: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = rows.len() as f64;
    let d = rows[0].len();
    let mean: Vec<f64> = (0..d)
        .map(|j| rows.iter().map(|r| r[j]).sum::<f64>() / n)
        .collect();
    (0..d)
        .map(|a| {
            (0..d)
                .map(|b| {
                    rows.iter()
                        .map(|r| (r[a] - mean[a]) * (r[b] - mean[b]))
                        .sum::<f64>()
                        / (n - 1.0)
                })
                .collect()
        })
        .collect()
}

pub fn random_rows(rng: &mut ChaCha8Rng, n: usize, d: usize) -> Vec<Vec<f64>> {
    (0..n)
        .map(|_| (0..d).map(|_| rng.random_range(-5.0..5.0)).collect())
        .collect()
}

pub fn matrix(rows: &[Vec<f64>]) -> Matrix {
    Matrix::from_rows(rows).unwrap()
}

/// Sixteen well-separated Gaussian-ish blobs with `per_blob` points each.
pub fn planted_blobs(rng: &mut ChaCha8Rng, per_blob: usize, dims: usize) -> (Matrix, Vec<usize>) {
    let centers: Vec<Vec<f64>> = (0..16)
        .map(|_| (0..dims).map(|_| rng.random_range(-20.0..20.0)).collect())
        .collect();
    let mut rows = Vec::new();
    let mut labels = Vec::new();
    for (b, c) in centers.iter().enumerate() {
        for _ in 0..per_blob {
            rows.push(
                c.iter()
                    .map(|x| x + rng.random_range(-1.0..1.0))
                    .collect::<Vec<_>>(),
            );
            labels.push(b);
        }
    }
    (matrix(&rows), labels)
}

/// Smallest within-cluster sum of squares over every split into two
/// non-empty groups.
pub fn best_bipartition_sse(points: &[Vec<f64>]) -> f64 {
    let n = points.len();
    let sse = |idx: &[usize]| -> f64 {
        let d = points[0].len();
        let k = idx.len() as f64;
        let mean: Vec<f64> = (0..d)
            .map(|j| idx.iter().map(|&i| points[i][j]).sum::<f64>() / k)
            .collect();
        idx.iter()
            .map(|&i| {
                points[i]
                    .iter()
                    .zip(&mean)
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum::<f64>()
            })
            .sum()
    };
    (1..(1u32 << n) - 1)
        .map(|mask| {
            let (a, b): (Vec<usize>, Vec<usize>) = (0..n).partition(|&i| mask & (1 << i) != 0);
            sse(&a) + sse(&b)
        })
        .fold(f64::INFINITY, f64::min)
}

/// Runs the CLI in-process, returning (exit code, stdout, stderr).
pub fn run_cli(args: &[&str]) -> (i32, String, String) {
    let mut argv = vec!["typerec"];
    argv.extend_from_slice(args);
    let mut out = Vec::new();
    let mut err = Vec::new();
    let code = typerec::cli::run_with(argv, &mut out, &mut err);
    (
        code,
        String::from_utf8(out).unwrap(),
        String::from_utf8(err).unwrap(),
    )
}
