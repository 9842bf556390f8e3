//! Principal component analysis on raw (centered, unscaled) ratings.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::domain::MbtiType;
use crate::error::{Error, Result};
use crate::linalg::{dot, symmetric_eigen, Matrix};

/// Fitted PCA: feature means, `k` unit components (one per row) and the
/// variance captured by each, in descending order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PcaModel {
    pub mean: Vec<f64>,
    pub components: Matrix,
    pub explained_variance: Vec<f64>,
}

impl PcaModel {
    pub fn n_features(&self) -> usize {
        self.mean.len()
    }

    pub fn n_components(&self) -> usize {
        self.components.nrows()
    }

    pub fn project(&self, data: &Matrix) -> Result<Matrix> {
        project(self, data)
    }

    /// Maps projected coordinates back to feature space.
    pub fn inverse_transform(&self, coords: &Matrix) -> Result<Matrix> {
        let k = self.n_components();
        if coords.ncols() != k {
            return Err(Error::DimensionMismatch {
                expected: k,
                found: coords.ncols(),
            });
        }
        let d = self.n_features();
        let mut out = Matrix::zeros(coords.nrows(), d);
        for i in 0..coords.nrows() {
            let row = out.row_mut(i);
            row.copy_from_slice(&self.mean);
            for c in 0..k {
                let w = coords[(i, c)];
                for (x, &v) in row.iter_mut().zip(self.components.row(c)) {
                    *x += w * v;
                }
            }
        }
        Ok(out)
    }
}

/// Sample covariance (n − 1 denominator) of the columns of `data`.
pub fn covariance(data: &Matrix) -> Result<(Vec<f64>, Matrix)> {
    let n = data.nrows();
    if n < 2 {
        return Err(Error::DegenerateInput(format!(
            "covariance needs at least 2 rows, found {n}"
        )));
    }
    let d = data.ncols();
    let mean = data.column_means();
    let mut cov = Matrix::zeros(d, d);
    let mut centered = vec![0.0; d];
    for r in data.rows() {
        for ((c, &x), &m) in centered.iter_mut().zip(r).zip(&mean) {
            *c = x - m;
        }
        for i in 0..d {
            let ci = centered[i];
            if ci == 0.0 {
                continue;
            }
            for j in i..d {
                cov[(i, j)] += ci * centered[j];
            }
        }
    }
    let denom = (n - 1) as f64;
    for i in 0..d {
        for j in i..d {
            let v = cov[(i, j)] / denom;
            cov[(i, j)] = v;
            cov[(j, i)] = v;
        }
    }
    Ok((mean, cov))
}

/// Fits the top-`k` principal components.
///
/// Each component is oriented so that its largest-magnitude entry is
/// positive (first such entry on ties).
pub fn fit_pca(data: &Matrix, k: usize) -> Result<PcaModel> {
    let (n, d) = (data.nrows(), data.ncols());
    if n < 2 {
        return Err(Error::DegenerateInput(format!(
            "PCA needs n >= 2 rows, found {n}"
        )));
    }
    if k == 0 || k > n.min(d) {
        return Err(Error::DegenerateInput(format!(
            "k = {k} outside 1..={} for a {n}x{d} matrix",
            n.min(d)
        )));
    }
    let (mean, cov) = covariance(data)?;
    let eig = symmetric_eigen(&cov)?;
    let mut components = Matrix::zeros(k, d);
    for c in 0..k {
        let v = eig.vectors.row(c);
        let pivot = v.iter().enumerate().fold(
            0,
            |best, (i, x)| if x.abs() > v[best].abs() { i } else { best },
        );
        let sign = if v[pivot] < 0.0 { -1.0 } else { 1.0 };
        for (dst, &x) in components.row_mut(c).iter_mut().zip(v) {
            *dst = sign * x;
        }
    }
    let explained_variance = eig.values[..k].iter().map(|&v| v.max(0.0)).collect();
    Ok(PcaModel {
        mean,
        components,
        explained_variance,
    })
}

/// Row `i` of the result is `components · (data_i − mean)`.
pub fn project(model: &PcaModel, data: &Matrix) -> Result<Matrix> {
    let d = model.n_features();
    if data.ncols() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            found: data.ncols(),
        });
    }
    let k = model.n_components();
    let mut out = Matrix::zeros(data.nrows(), k);
    let mut centered = vec![0.0; d];
    for (i, r) in data.rows().enumerate() {
        for ((c, &x), &m) in centered.iter_mut().zip(r).zip(&model.mean) {
            *c = x - m;
        }
        for c in 0..k {
            out[(i, c)] = dot(model.components.row(c), &centered);
        }
    }
    Ok(out)
}

/// Sum of per-column sample variances.
pub fn total_variance(data: &Matrix) -> Result<f64> {
    let (_, cov) = covariance(data)?;
    Ok((0..cov.nrows()).map(|i| cov[(i, i)]).sum())
}

/// Writes `respondent_id,mbti,pc1,pc2[,pc3...]` rows.
pub fn write_projection<W: Write>(
    writer: W,
    ids: &[String],
    labels: &[MbtiType],
    coords: &Matrix,
) -> Result<()> {
    if ids.len() != coords.nrows() || labels.len() != coords.nrows() {
        return Err(Error::LengthMismatch {
            left: ids.len().min(labels.len()),
            right: coords.nrows(),
        });
    }
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(writer);
    let mut header = vec!["respondent_id".to_string(), "mbti".to_string()];
    header.extend((1..=coords.ncols()).map(|c| format!("pc{c}")));
    w.write_record(&header)?;
    for (i, row) in coords.rows().enumerate() {
        let mut rec = vec![ids[i].clone(), labels[i].code()];
        rec.extend(row.iter().map(|x| x.to_string()));
        w.write_record(&rec)?;
    }
    w.flush().map_err(|e| Error::io("<projection>", e))?;
    Ok(())
}
