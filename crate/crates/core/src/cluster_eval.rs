//! External and internal clustering evaluation.
//!
//! | Metric | Range | Perfect |
//! |--------|-------|---------|
//! | homogeneity | [0, 1] | 1 |
//! | completeness | [0, 1] | 1 |
//! | V-measure | [0, 1] | 1 |
//! | ARI | [-1, 1] | 1 |
//! | AMI | (-inf, 1] | 1 |
//! | silhouette | [-1, 1] | 1 |
//!
//! Entropies use the natural log. AMI uses the `max(H(C), H(K))`
//! normalization with the exact hypergeometric expectation of MI.

use std::collections::BTreeMap;
use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::domain::MbtiType;
use crate::error::{Error, Result};
use crate::kmeans::{ClusteringResult, Method};
use crate::linalg::{euclidean, Matrix};

/// Class × cluster counts. Rows follow the sorted distinct true labels,
/// columns the sorted distinct predicted labels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ContingencyTable {
    counts: Vec<Vec<u64>>,
    row_sums: Vec<u64>,
    col_sums: Vec<u64>,
    n: u64,
}

impl ContingencyTable {
    /// Builds a table from raw counts. Rows must be equally long.
    pub fn from_counts(counts: Vec<Vec<u64>>) -> Result<Self> {
        let cols = counts.first().map_or(0, Vec::len);
        if counts.is_empty() || cols == 0 {
            return Err(Error::EmptyInput);
        }
        if let Some(bad) = counts.iter().find(|r| r.len() != cols) {
            return Err(Error::DimensionMismatch {
                expected: cols,
                found: bad.len(),
            });
        }
        let row_sums: Vec<u64> = counts.iter().map(|r| r.iter().sum()).collect();
        let col_sums: Vec<u64> = (0..cols)
            .map(|j| counts.iter().map(|r| r[j]).sum())
            .collect();
        let n = row_sums.iter().sum();
        if n == 0 {
            return Err(Error::EmptyInput);
        }
        Ok(ContingencyTable {
            counts,
            row_sums,
            col_sums,
            n,
        })
    }

    pub fn counts(&self) -> &[Vec<u64>] {
        &self.counts
    }

    pub fn row_sums(&self) -> &[u64] {
        &self.row_sums
    }

    pub fn col_sums(&self) -> &[u64] {
        &self.col_sums
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn n_rows(&self) -> usize {
        self.counts.len()
    }

    pub fn n_cols(&self) -> usize {
        self.col_sums.len()
    }

    pub fn transpose(&self) -> Self {
        let counts = (0..self.n_cols())
            .map(|j| self.counts.iter().map(|r| r[j]).collect())
            .collect();
        ContingencyTable {
            counts,
            row_sums: self.col_sums.clone(),
            col_sums: self.row_sums.clone(),
            n: self.n,
        }
    }

    fn cells(&self) -> impl Iterator<Item = (usize, usize, u64)> + '_ {
        self.counts
            .iter()
            .enumerate()
            .flat_map(|(i, r)| r.iter().enumerate().map(move |(j, &c)| (i, j, c)))
    }
}

pub fn contingency<A: Ord + Clone, B: Ord + Clone>(
    labels_true: &[A],
    labels_pred: &[B],
) -> Result<ContingencyTable> {
    if labels_true.len() != labels_pred.len() {
        return Err(Error::LengthMismatch {
            left: labels_true.len(),
            right: labels_pred.len(),
        });
    }
    if labels_true.is_empty() {
        return Err(Error::EmptyInput);
    }
    let rows = dense_ids(labels_true);
    let cols = dense_ids(labels_pred);
    let mut counts = vec![vec![0u64; cols.len()]; rows.len()];
    for (t, p) in labels_true.iter().zip(labels_pred) {
        counts[rows[t]][cols[p]] += 1;
    }
    ContingencyTable::from_counts(counts)
}

fn dense_ids<L: Ord + Clone>(labels: &[L]) -> BTreeMap<L, usize> {
    let mut ids: BTreeMap<L, usize> = labels.iter().map(|l| (l.clone(), 0)).collect();
    for (i, v) in ids.values_mut().enumerate() {
        *v = i;
    }
    ids
}

fn entropy(sums: &[u64], n: u64) -> f64 {
    let n = n as f64;
    -sums
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let p = c as f64 / n;
            p * p.ln()
        })
        .sum::<f64>()
}

/// `H(C)`: entropy of the true classes.
pub fn class_entropy(ct: &ContingencyTable) -> f64 {
    entropy(&ct.row_sums, ct.n)
}

/// `H(K)`: entropy of the predicted clusters.
pub fn cluster_entropy(ct: &ContingencyTable) -> f64 {
    entropy(&ct.col_sums, ct.n)
}

/// `H(C|K)`.
fn conditional_class_entropy(ct: &ContingencyTable) -> f64 {
    let n = ct.n as f64;
    -ct.cells()
        .filter(|&(_, _, c)| c > 0)
        .map(|(_, j, c)| (c as f64 / n) * (c as f64 / ct.col_sums[j] as f64).ln())
        .sum::<f64>()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HomogeneityCompleteness {
    pub homogeneity: f64,
    pub completeness: f64,
    pub v_measure: f64,
}

pub fn homogeneity_completeness_v(ct: &ContingencyTable) -> HomogeneityCompleteness {
    let h_c = class_entropy(ct);
    let h_k = cluster_entropy(ct);
    let homogeneity = if h_c == 0.0 {
        1.0
    } else {
        (1.0 - conditional_class_entropy(ct) / h_c).clamp(0.0, 1.0)
    };
    let completeness = if h_k == 0.0 {
        1.0
    } else {
        (1.0 - conditional_class_entropy(&ct.transpose()) / h_k).clamp(0.0, 1.0)
    };
    let v_measure = if homogeneity + completeness == 0.0 {
        0.0
    } else {
        2.0 * homogeneity * completeness / (homogeneity + completeness)
    };
    HomogeneityCompleteness {
        homogeneity,
        completeness,
        v_measure,
    }
}

fn pairs(x: u64) -> i128 {
    let x = x as i128;
    x * (x - 1) / 2
}

/// Pair-counting adjusted Rand index, evaluated in exact integer
/// arithmetic up to the final division. Returns 1.0 when the expected and
/// maximum indices coincide.
pub fn adjusted_rand(ct: &ContingencyTable) -> Result<f64> {
    if ct.n < 2 {
        return Err(Error::TooFewSamples {
            needed: 2,
            found: ct.n as usize,
        });
    }
    let total = pairs(ct.n);
    let sum_cells: i128 = ct.cells().map(|(_, _, c)| pairs(c)).sum();
    let sum_a: i128 = ct.row_sums.iter().map(|&a| pairs(a)).sum();
    let sum_b: i128 = ct.col_sums.iter().map(|&b| pairs(b)).sum();
    // Scaled by 2·C(n,2): index − expected and max − expected.
    let num = 2 * total * sum_cells - 2 * sum_a * sum_b;
    let den = (sum_a + sum_b) * total - 2 * sum_a * sum_b;
    if den == 0 {
        return Ok(1.0);
    }
    Ok(num as f64 / den as f64)
}

pub fn mutual_information(ct: &ContingencyTable) -> f64 {
    let n = ct.n as f64;
    let mi: f64 = ct
        .cells()
        .filter(|&(_, _, c)| c > 0)
        .map(|(i, j, c)| {
            let c = c as f64;
            let ab = ct.row_sums[i] as f64 * ct.col_sums[j] as f64;
            (c / n) * (c * n / ab).ln()
        })
        .sum();
    mi.max(0.0)
}

fn ln_factorials(n: u64) -> Vec<f64> {
    let mut lf = Vec::with_capacity(n as usize + 1);
    let mut acc = 0.0;
    lf.push(0.0);
    for k in 1..=n {
        acc += (k as f64).ln();
        lf.push(acc);
    }
    lf
}

/// Expected MI under random permutations with both marginals fixed.
///
/// Each cell count follows a hypergeometric law; probabilities are formed
/// from log-factorials and exponentiated term by term.
pub fn expected_mutual_information(ct: &ContingencyTable) -> f64 {
    let n = ct.n;
    if n <= 1 {
        return 0.0;
    }
    let lf = ln_factorials(n);
    let nf = n as f64;
    let mut emi = 0.0;
    for &a in ct.row_sums.iter().filter(|&&a| a > 0) {
        for &b in ct.col_sums.iter().filter(|&&b| b > 0) {
            let lo = (a + b).saturating_sub(n).max(1);
            let hi = a.min(b);
            let base =
                lf[a as usize] + lf[b as usize] + lf[(n - a) as usize] + lf[(n - b) as usize]
                    - lf[n as usize];
            let ab = a as f64 * b as f64;
            for nij in lo..=hi {
                let log_p = base
                    - lf[nij as usize]
                    - lf[(a - nij) as usize]
                    - lf[(b - nij) as usize]
                    - lf[(n + nij - a - b) as usize];
                let x = nij as f64;
                emi += (x / nf) * (nf * x / ab).ln() * log_p.exp();
            }
        }
    }
    emi
}

/// Chance-adjusted MI: `(MI − E[MI]) / (max(H(C), H(K)) − E[MI])`.
///
/// The denominator vanishes only when both partitions are the same trivial
/// shape (one block, or all singletons); those cases score 1.0.
pub fn adjusted_mutual_information(ct: &ContingencyTable) -> Result<f64> {
    if ct.n < 2 {
        return Err(Error::TooFewSamples {
            needed: 2,
            found: ct.n as usize,
        });
    }
    if ct.n_rows() == 1 && ct.n_cols() == 1 {
        return Ok(1.0);
    }
    let mi = mutual_information(ct);
    let emi = expected_mutual_information(ct);
    let norm = class_entropy(ct).max(cluster_entropy(ct));
    let den = norm - emi;
    if den.abs() <= 1e-12 * norm.max(1.0) {
        return Ok(1.0);
    }
    Ok(((mi - emi) / den).min(1.0))
}

/// Per-sample silhouette values. Singleton clusters score 0.
pub fn silhouette_samples<L: Ord + Clone + Sync>(data: &Matrix, labels: &[L]) -> Result<Vec<f64>> {
    let n = data.nrows();
    if labels.len() != n {
        return Err(Error::LengthMismatch {
            left: n,
            right: labels.len(),
        });
    }
    if n < 2 {
        return Err(Error::TooFewSamples {
            needed: 2,
            found: n,
        });
    }
    let ids = dense_ids(labels);
    let k = ids.len();
    if k < 2 {
        return Err(Error::SingleClusterOnly);
    }
    let dense: Vec<usize> = labels.iter().map(|l| ids[l]).collect();
    let mut sizes = vec![0usize; k];
    for &l in &dense {
        sizes[l] += 1;
    }
    let scores = (0..n)
        .into_par_iter()
        .map(|i| {
            let own = dense[i];
            if sizes[own] == 1 {
                return 0.0;
            }
            let mut sums = vec![0.0; k];
            let xi = data.row(i);
            for (j, xj) in data.rows().enumerate() {
                if j != i {
                    sums[dense[j]] += euclidean(xi, xj);
                }
            }
            let a = sums[own] / (sizes[own] - 1) as f64;
            let b = (0..k)
                .filter(|&c| c != own)
                .map(|c| sums[c] / sizes[c] as f64)
                .fold(f64::INFINITY, f64::min);
            let m = a.max(b);
            if m == 0.0 {
                0.0
            } else {
                (b - a) / m
            }
        })
        .collect();
    Ok(scores)
}

/// Mean silhouette coefficient in the space of `data`.
pub fn silhouette<L: Ord + Clone + Sync>(data: &Matrix, labels: &[L]) -> Result<f64> {
    let s = silhouette_samples(data, labels)?;
    Ok(s.iter().sum::<f64>() / s.len() as f64)
}

/// One row of the evaluation table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub category: Option<String>,
    pub method: Method,
    #[serde(rename = "time")]
    pub elapsed: f64,
    #[serde(rename = "homo")]
    pub homogeneity: f64,
    #[serde(rename = "compl")]
    pub completeness: f64,
    #[serde(rename = "v-meas")]
    pub v_measure: f64,
    #[serde(rename = "ARI")]
    pub ari: f64,
    #[serde(rename = "AMI")]
    pub ami: f64,
    #[serde(rename = "Silhouette")]
    pub silhouette: f64,
    pub mutual_information: f64,
    /// Dimension of the space the silhouette was computed in.
    pub silhouette_dims: usize,
}

/// Scores a clustering against the declared types. The silhouette uses the
/// clustering's own working space (PCA coordinates for `pca-based`).
pub fn evaluate(
    data: &Matrix,
    labels_true: &[MbtiType],
    result: &ClusteringResult,
) -> Result<EvaluationReport> {
    if labels_true.len() != result.assignments.len() {
        return Err(Error::LengthMismatch {
            left: labels_true.len(),
            right: result.assignments.len(),
        });
    }
    if data.nrows() != labels_true.len() {
        return Err(Error::LengthMismatch {
            left: data.nrows(),
            right: labels_true.len(),
        });
    }
    let ct = contingency(labels_true, &result.assignments)?;
    let hcv = homogeneity_completeness_v(&ct);
    let space = result.working_space(data)?;
    Ok(EvaluationReport {
        category: None,
        method: result.method,
        elapsed: result.elapsed_seconds,
        homogeneity: hcv.homogeneity,
        completeness: hcv.completeness,
        v_measure: hcv.v_measure,
        ari: adjusted_rand(&ct)?,
        ami: adjusted_mutual_information(&ct)?,
        silhouette: silhouette(&space, &result.assignments)?,
        mutual_information: mutual_information(&ct),
        silhouette_dims: space.ncols(),
    })
}

pub const REPORT_COLUMNS: [&str; 8] = [
    "method",
    "time",
    "homo",
    "compl",
    "v-meas",
    "ARI",
    "AMI",
    "Silhouette",
];

/// Writes the report as CSV with three decimals per value. A leading
/// `category` column is added when any row carries one.
pub fn write_report_csv<W: Write>(writer: W, rows: &[EvaluationReport]) -> Result<()> {
    let with_category = rows.iter().any(|r| r.category.is_some());
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(writer);
    let mut header: Vec<&str> = Vec::new();
    if with_category {
        header.push("category");
    }
    header.extend(REPORT_COLUMNS);
    w.write_record(&header)?;
    for r in rows {
        let mut rec = Vec::with_capacity(header.len());
        if with_category {
            rec.push(r.category.clone().unwrap_or_default());
        }
        rec.push(r.method.tag().to_string());
        for v in [
            r.elapsed,
            r.homogeneity,
            r.completeness,
            r.v_measure,
            r.ari,
            r.ami,
            r.silhouette,
        ] {
            rec.push(format!("{v:.3}"));
        }
        w.write_record(&rec)?;
    }
    w.flush().map_err(|e| Error::io("<report>", e))?;
    Ok(())
}

/// Full-precision JSON report with metadata about the metric variants.
pub fn report_json(rows: &[EvaluationReport]) -> serde_json::Value {
    serde_json::json!({
        "columns": REPORT_COLUMNS,
        "ami_normalization": "max",
        "entropy_log_base": "e",
        "silhouette_space": "clustering working space",
        "rows": rows,
    })
}
