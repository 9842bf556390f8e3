//! Lloyd's k-means with k-means++ or random-row seeding, optional PCA
//! reduction, and best-of-`restarts` selection.

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{squared_euclidean, Matrix};
use crate::pca::{fit_pca, PcaModel};

/// Centroid seeding strategy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum InitMethod {
    #[serde(rename = "kmeans++")]
    KmeansPlusPlus,
    #[serde(rename = "random")]
    Random,
}

impl FromStr for InitMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "kmeans++" | "k-means++" => Ok(InitMethod::KmeansPlusPlus),
            "random" => Ok(InitMethod::Random),
            _ => Err(Error::InvalidConfig(format!(
                "unknown init {s:?} (expected kmeans++ or random)"
            ))),
        }
    }
}

/// Tag describing how a clustering was produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Method {
    #[serde(rename = "kmeans++")]
    KmeansPlusPlus,
    #[serde(rename = "random")]
    Random,
    #[serde(rename = "pca-based")]
    PcaBased,
}

impl Method {
    pub fn tag(self) -> &'static str {
        match self {
            Method::KmeansPlusPlus => "kmeans++",
            Method::Random => "random",
            Method::PcaBased => "pca-based",
        }
    }

    /// The configuration regime for this tag: PCA-based means k-means++ in
    /// a `pca_dims`-dimensional projection.
    pub fn config(self, k: usize, pca_dims: usize, seed: u64) -> KmeansConfig {
        let mut cfg = KmeansConfig::new(k, seed);
        match self {
            Method::KmeansPlusPlus => cfg.init = InitMethod::KmeansPlusPlus,
            Method::Random => cfg.init = InitMethod::Random,
            Method::PcaBased => {
                cfg.init = InitMethod::KmeansPlusPlus;
                cfg.reduce_first = Some(pca_dims);
            }
        }
        cfg
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "kmeans++" | "k-means++" => Ok(Method::KmeansPlusPlus),
            "random" => Ok(Method::Random),
            "pca" | "pca-based" => Ok(Method::PcaBased),
            _ => Err(Error::InvalidConfig(format!(
                "unknown method {s:?} (expected kmeans++, random or pca)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KmeansConfig {
    pub k: usize,
    pub init: InitMethod,
    /// Project to this many principal components before clustering.
    pub reduce_first: Option<usize>,
    pub max_iters: usize,
    /// Stop once no centroid moves farther than this (Euclidean).
    pub tol: f64,
    pub seed: u64,
    pub restarts: usize,
}

impl KmeansConfig {
    pub fn new(k: usize, seed: u64) -> Self {
        KmeansConfig {
            k,
            seed,
            ..Default::default()
        }
    }

    pub fn method(&self) -> Method {
        match (self.reduce_first, self.init) {
            (Some(_), _) => Method::PcaBased,
            (None, InitMethod::KmeansPlusPlus) => Method::KmeansPlusPlus,
            (None, InitMethod::Random) => Method::Random,
        }
    }

    fn validate(&self, n: usize) -> Result<()> {
        if self.k == 0 {
            return Err(Error::InvalidConfig("k must be positive".into()));
        }
        if self.k > n {
            return Err(Error::TooFewPoints { k: self.k, n });
        }
        if self.tol.is_nan() || self.tol < 0.0 {
            return Err(Error::InvalidConfig(format!(
                "tol must be >= 0, got {}",
                self.tol
            )));
        }
        if self.max_iters == 0 || self.restarts == 0 {
            return Err(Error::InvalidConfig(
                "max_iters and restarts must be positive".into(),
            ));
        }
        if self.reduce_first == Some(0) {
            return Err(Error::InvalidConfig("reduce_first must be positive".into()));
        }
        Ok(())
    }
}

impl Default for KmeansConfig {
    fn default() -> Self {
        KmeansConfig {
            k: 16,
            init: InitMethod::KmeansPlusPlus,
            reduce_first: None,
            max_iters: 300,
            tol: 1e-6,
            seed: 0,
            restarts: 10,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusteringResult {
    pub method: Method,
    pub k: usize,
    pub assignments: Vec<usize>,
    /// Centroids in the working space (PCA coordinates for `pca-based`).
    pub centroids: Matrix,
    pub inertia: f64,
    pub iterations: usize,
    pub elapsed_seconds: f64,
    /// Inertia after every assignment step, starting with the initial one.
    pub inertia_history: Vec<f64>,
    /// Projection used before clustering, when any.
    pub pca: Option<PcaModel>,
}

impl ClusteringResult {
    pub fn dims(&self) -> usize {
        self.centroids.ncols()
    }

    /// Maps raw feature rows into the space the clustering ran in.
    pub fn working_space(&self, data: &Matrix) -> Result<Matrix> {
        match &self.pca {
            Some(p) => p.project(data),
            None => Ok(data.clone()),
        }
    }

    pub fn cluster_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.k];
        for &a in &self.assignments {
            sizes[a] += 1;
        }
        sizes
    }

    /// `{method, k, inertia, iterations, elapsed_seconds, assignments}`.
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "method": self.method.tag(),
            "k": self.k,
            "inertia": self.inertia,
            "iterations": self.iterations,
            "elapsed_seconds": self.elapsed_seconds,
            "assignments": self.assignments,
        })
    }
}

/// Deterministic per-restart seed (splitmix64 step).
pub fn derive_seed(seed: u64, stream: u64) -> u64 {
    let mut z = seed.wrapping_add(stream.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn check_k(data: &Matrix, k: usize) -> Result<()> {
    if k == 0 {
        return Err(Error::InvalidConfig("k must be positive".into()));
    }
    if k > data.nrows() {
        return Err(Error::TooFewPoints { k, n: data.nrows() });
    }
    Ok(())
}

/// k-means++ seeding: the first center is a uniform row, each later one a
/// row drawn with probability proportional to its squared distance to the
/// nearest chosen center. When every remaining distance is zero the draw
/// falls back to a uniform pick among rows not chosen yet.
pub fn init_kmeanspp(data: &Matrix, k: usize, seed: u64) -> Result<Matrix> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    kmeanspp_with_rng(data, k, &mut rng)
}

pub(crate) fn kmeanspp_with_rng(data: &Matrix, k: usize, rng: &mut impl Rng) -> Result<Matrix> {
    check_k(data, k)?;
    let n = data.nrows();
    let mut chosen = Vec::with_capacity(k);
    let mut taken = vec![false; n];
    let first = rng.random_range(0..n);
    chosen.push(first);
    taken[first] = true;
    let mut d2: Vec<f64> = data
        .rows()
        .map(|r| squared_euclidean(r, data.row(first)))
        .collect();

    while chosen.len() < k {
        let total: f64 = d2.iter().sum();
        let next = if total > 0.0 {
            let target = rng.random::<f64>() * total;
            let mut acc = 0.0;
            let mut pick = None;
            for (i, &w) in d2.iter().enumerate() {
                if w <= 0.0 {
                    continue;
                }
                acc += w;
                pick = Some(i);
                if target < acc {
                    break;
                }
            }
            pick.expect("positive total implies a positive weight")
        } else {
            let free: Vec<usize> = (0..n).filter(|&i| !taken[i]).collect();
            free[rng.random_range(0..free.len())]
        };
        chosen.push(next);
        taken[next] = true;
        let c = data.row(next);
        for (w, r) in d2.iter_mut().zip(data.rows()) {
            let d = squared_euclidean(r, c);
            if d < *w {
                *w = d;
            }
        }
    }
    Ok(data.select_rows(&chosen))
}

/// `k` distinct rows sampled uniformly without replacement.
pub fn init_random(data: &Matrix, k: usize, seed: u64) -> Result<Matrix> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    random_with_rng(data, k, &mut rng)
}

pub(crate) fn random_with_rng(data: &Matrix, k: usize, rng: &mut impl Rng) -> Result<Matrix> {
    check_k(data, k)?;
    let rows = index::sample(rng, data.nrows(), k).into_vec();
    Ok(data.select_rows(&rows))
}

/// Nearest centroid with ties resolved to the lowest index.
#[inline]
pub fn nearest(point: &[f64], centroids: &Matrix) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for (j, c) in centroids.rows().enumerate() {
        let d = squared_euclidean(point, c);
        if d < best.1 {
            best = (j, d);
        }
    }
    best
}

/// Assigns every point to its nearest centroid, then repairs empty clusters
/// by moving the point farthest from its centroid (taken from a cluster with
/// at least two members) into the empty one and centering it there.
/// Returns the inertia and whether a repair happened.
fn assign(
    data: &Matrix,
    centroids: &mut Matrix,
    labels: &mut [usize],
    dist: &mut [f64],
) -> (f64, bool) {
    for (i, r) in data.rows().enumerate() {
        let (j, d) = nearest(r, centroids);
        labels[i] = j;
        dist[i] = d;
    }
    let k = centroids.nrows();
    let mut sizes = vec![0usize; k];
    for &l in labels.iter() {
        sizes[l] += 1;
    }
    let mut repaired = false;
    while let Some(empty) = sizes.iter().position(|&s| s == 0) {
        let victim = (0..labels.len())
            .filter(|&i| sizes[labels[i]] > 1)
            .fold(None, |best: Option<usize>, i| match best {
                Some(b) if dist[b] >= dist[i] => Some(b),
                _ => Some(i),
            })
            .expect("k <= n guarantees a donor cluster");
        sizes[labels[victim]] -= 1;
        sizes[empty] += 1;
        labels[victim] = empty;
        dist[victim] = 0.0;
        centroids.row_mut(empty).copy_from_slice(data.row(victim));
        repaired = true;
    }
    (dist.iter().sum(), repaired)
}

fn update(data: &Matrix, labels: &[usize], k: usize) -> Matrix {
    let d = data.ncols();
    let mut sums = Matrix::zeros(k, d);
    let mut counts = vec![0usize; k];
    for (r, &l) in data.rows().zip(labels) {
        counts[l] += 1;
        for (s, &x) in sums.row_mut(l).iter_mut().zip(r) {
            *s += x;
        }
    }
    for (j, &c) in counts.iter().enumerate() {
        let c = c as f64;
        sums.row_mut(j).iter_mut().for_each(|s| *s /= c);
    }
    sums
}

/// Lloyd iterations from the given centroids.
///
/// Alternates an update step (centroids become cluster means) with an
/// assignment step until no centroid moves more than `cfg.tol` or
/// `cfg.max_iters` updates have run. The returned assignments are always
/// nearest-centroid with respect to the returned centroids.
pub fn lloyd(
    data: &Matrix,
    init_centroids: &Matrix,
    cfg: &KmeansConfig,
) -> Result<ClusteringResult> {
    if init_centroids.ncols() != data.ncols() {
        return Err(Error::DimensionMismatch {
            expected: data.ncols(),
            found: init_centroids.ncols(),
        });
    }
    let k = init_centroids.nrows();
    check_k(data, k)?;
    let n = data.nrows();
    let mut centroids = init_centroids.clone();
    let mut labels = vec![0usize; n];
    let mut dist = vec![0.0; n];
    let (mut inertia, _) = assign(data, &mut centroids, &mut labels, &mut dist);
    let mut history = vec![inertia];
    let mut iterations = 0;

    while iterations < cfg.max_iters {
        let next = update(data, &labels, k);
        let movement = next
            .rows()
            .zip(centroids.rows())
            .map(|(a, b)| squared_euclidean(a, b))
            .fold(0.0f64, f64::max)
            .sqrt();
        centroids = next;
        iterations += 1;
        let (new_inertia, repaired) = assign(data, &mut centroids, &mut labels, &mut dist);
        inertia = new_inertia;
        history.push(inertia);
        if movement <= cfg.tol && !repaired {
            break;
        }
    }

    Ok(ClusteringResult {
        method: cfg.method(),
        k,
        assignments: labels,
        centroids,
        inertia,
        iterations,
        elapsed_seconds: 0.0,
        inertia_history: history,
        pca: None,
    })
}

fn run_once(data: &Matrix, cfg: &KmeansConfig, restart: usize) -> Result<ClusteringResult> {
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(cfg.seed, restart as u64));
    let init = match cfg.init {
        InitMethod::KmeansPlusPlus => kmeanspp_with_rng(data, cfg.k, &mut rng)?,
        InitMethod::Random => random_with_rng(data, cfg.k, &mut rng)?,
    };
    lloyd(data, &init, cfg)
}

/// Full k-means: optional PCA projection, `restarts` independent runs, and
/// the lowest-inertia result (ties go to the earliest restart). Restarts
/// run in parallel; selection does not depend on completion order.
pub fn fit(data: &Matrix, cfg: &KmeansConfig) -> Result<ClusteringResult> {
    cfg.validate(data.nrows())?;
    let start = Instant::now();
    let (space, pca) = match cfg.reduce_first {
        Some(dims) => {
            let model = fit_pca(data, dims)?;
            (model.project(data)?, Some(model))
        }
        None => (data.clone(), None),
    };
    let runs: Vec<ClusteringResult> = (0..cfg.restarts)
        .into_par_iter()
        .map(|r| run_once(&space, cfg, r))
        .collect::<Result<_>>()?;
    let mut best = runs
        .into_iter()
        .reduce(|best, r| if r.inertia < best.inertia { r } else { best })
        .expect("restarts >= 1");
    best.elapsed_seconds = start.elapsed().as_secs_f64();
    best.method = cfg.method();
    best.pca = pca;
    Ok(best)
}
