//! Survey analytics for personality types and media-genre preferences.
//!
//! The pipeline loads (or synthesizes) a respondent × genre rating matrix,
//! reduces it with PCA, clusters it with k-means, scores the clustering
//! against declared types and turns per-type rating profiles into ranked
//! genre recommendations.

pub mod analysis;
pub mod cli;
pub mod cluster_eval;
pub mod domain;
pub mod error;
pub mod ingest;
pub mod kmeans;
pub mod linalg;
pub mod pca;
pub mod recommend;

pub use error::{Error, Result};
