//! Descriptive tables behind the survey figures: genre-pair rating grids,
//! type-frequency bars, cluster composition and scatter exports.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::domain::{Dataset, MbtiType, Rating};
use crate::error::{Error, Result};
use crate::ingest::TypeFrequencyTable;
use crate::kmeans::ClusteringResult;
use crate::linalg::Matrix;

const LEVELS: usize = Rating::MAX as usize + 1;

/// Joint rating counts for two genres within one personality type.
/// `counts[a][b]` is the number of respondents who rated genre A `a` and
/// genre B `b`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairRatingTable {
    pub genre_a: String,
    pub genre_b: String,
    pub mbti: MbtiType,
    pub counts: [[u64; LEVELS]; LEVELS],
}

impl PairRatingTable {
    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }

    fn marginal_a(&self) -> [u64; LEVELS] {
        let mut m = [0; LEVELS];
        for (a, row) in self.counts.iter().enumerate() {
            m[a] = row.iter().sum();
        }
        m
    }

    fn marginal_b(&self) -> [u64; LEVELS] {
        let mut m = [0; LEVELS];
        for row in &self.counts {
            for (b, &c) in row.iter().enumerate() {
                m[b] += c;
            }
        }
        m
    }

    /// CSV grid: metadata comment lines, then a header `,b=0..b=6` and one
    /// row per rating of genre A.
    pub fn write_csv<W: Write>(&self, mut writer: W) -> Result<()> {
        let io = |e| Error::io("<pair table>", e);
        writeln!(writer, "# type={}", self.mbti).map_err(io)?;
        writeln!(writer, "# genre_a={}", self.genre_a).map_err(io)?;
        writeln!(writer, "# genre_b={}", self.genre_b).map_err(io)?;
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(writer);
        let mut header = vec![String::new()];
        header.extend((0..LEVELS).map(|b| format!("b={b}")));
        w.write_record(&header)?;
        for (a, row) in self.counts.iter().enumerate() {
            let mut rec = vec![format!("a={a}")];
            rec.extend(row.iter().map(|c| c.to_string()));
            w.write_record(&rec)?;
        }
        w.flush().map_err(io)?;
        Ok(())
    }
}

pub fn pair_rating_table(
    d: &Dataset,
    mbti: MbtiType,
    genre_a: &str,
    genre_b: &str,
) -> Result<PairRatingTable> {
    let catalog = d.catalog();
    let ia = catalog
        .index_of(genre_a)
        .ok_or_else(|| Error::UnknownGenre(genre_a.to_string()))?;
    let ib = catalog
        .index_of(genre_b)
        .ok_or_else(|| Error::UnknownGenre(genre_b.to_string()))?;
    let mut counts = [[0u64; LEVELS]; LEVELS];
    for r in d.records_of(mbti) {
        counts[r.rating(ia).value() as usize][r.rating(ib).value() as usize] += 1;
    }
    Ok(PairRatingTable {
        genre_a: genre_a.to_string(),
        genre_b: genre_b.to_string(),
        mbti,
        counts,
    })
}

/// Rating statistics for one side of a pair table. Means and shares count
/// only respondents with experience (rating 1..=6).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SideStats {
    pub genre: String,
    pub no_experience: u64,
    pub support: u64,
    pub mean_nonzero: Option<f64>,
    pub enjoyment_share: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InclinationSummary {
    pub mbti: MbtiType,
    pub a: SideStats,
    pub b: SideStats,
    /// Set when nobody in the table has experience with either genre.
    pub no_data: bool,
    /// Genre with the higher nonzero mean, if both have data and differ.
    pub favored: Option<String>,
}

fn side(genre: &str, marginal: &[u64; LEVELS]) -> SideStats {
    let support: u64 = marginal[1..].iter().sum();
    let (mean, share) = if support == 0 {
        (None, None)
    } else {
        let weighted: u64 = marginal
            .iter()
            .enumerate()
            .map(|(r, &c)| r as u64 * c)
            .sum();
        let enjoy: u64 = Rating::all()
            .filter(|r| r.is_enjoyment())
            .map(|r| marginal[r.value() as usize])
            .sum();
        (
            Some(weighted as f64 / support as f64),
            Some(enjoy as f64 / support as f64),
        )
    };
    SideStats {
        genre: genre.to_string(),
        no_experience: marginal[0],
        support,
        mean_nonzero: mean,
        enjoyment_share: share,
    }
}

pub fn inclination(t: &PairRatingTable) -> InclinationSummary {
    let a = side(&t.genre_a, &t.marginal_a());
    let b = side(&t.genre_b, &t.marginal_b());
    let favored = match (a.mean_nonzero, b.mean_nonzero) {
        (Some(x), Some(y)) if x > y => Some(a.genre.clone()),
        (Some(x), Some(y)) if y > x => Some(b.genre.clone()),
        _ => None,
    };
    InclinationSummary {
        mbti: t.mbti,
        no_data: a.support == 0 && b.support == 0,
        a,
        b,
        favored,
    }
}

/// Counts for the requested types, in the requested order.
pub fn frequency_bars(t: &TypeFrequencyTable, types: &[MbtiType]) -> Vec<(MbtiType, u64)> {
    types.iter().map(|&ty| (ty, t.get(ty))).collect()
}

/// Cluster × type cross-tabulation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClusterComposition {
    /// `per_cluster[c][t.index()]`.
    pub per_cluster: Vec<[u64; MbtiType::COUNT]>,
    pub sizes: Vec<u64>,
}

impl ClusterComposition {
    pub fn count(&self, cluster: usize, t: MbtiType) -> u64 {
        self.per_cluster[cluster][t.index()]
    }

    /// Most frequent type in a cluster (ties by code), or `None` if empty.
    pub fn dominant(&self, cluster: usize) -> Option<(MbtiType, u64)> {
        MbtiType::all()
            .map(|t| (t, self.count(cluster, t)))
            .filter(|&(_, c)| c > 0)
            .max_by(|a, b| a.1.cmp(&b.1).then_with(|| b.0.code().cmp(&a.0.code())))
    }
}

pub fn cluster_composition(
    labels_true: &[MbtiType],
    result: &ClusteringResult,
) -> Result<ClusterComposition> {
    if labels_true.len() != result.assignments.len() {
        return Err(Error::LengthMismatch {
            left: labels_true.len(),
            right: result.assignments.len(),
        });
    }
    let k = result
        .k
        .max(result.assignments.iter().map(|&a| a + 1).max().unwrap_or(0));
    let mut per_cluster = vec![[0u64; MbtiType::COUNT]; k];
    let mut sizes = vec![0u64; k];
    for (t, &c) in labels_true.iter().zip(&result.assignments) {
        per_cluster[c][t.index()] += 1;
        sizes[c] += 1;
    }
    Ok(ClusterComposition { per_cluster, sizes })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScatterRow {
    pub coords: Vec<f64>,
    pub mbti: Option<MbtiType>,
    pub cluster: Option<usize>,
    pub is_centroid: bool,
}

/// Plot-ready point table: `pc1,pc2[,pc3],mbti,cluster,is_centroid`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScatterTable {
    pub dims: usize,
    pub rows: Vec<ScatterRow>,
}

impl ScatterTable {
    pub fn header(dims: usize) -> Vec<String> {
        let mut h: Vec<String> = (1..=dims).map(|i| format!("pc{i}")).collect();
        h.extend(["mbti", "cluster", "is_centroid"].map(String::from));
        h
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(writer);
        w.write_record(Self::header(self.dims))?;
        for r in &self.rows {
            let mut rec: Vec<String> = r.coords.iter().map(|x| x.to_string()).collect();
            rec.push(r.mbti.map(|t| t.code()).unwrap_or_default());
            rec.push(r.cluster.map(|c| c.to_string()).unwrap_or_default());
            rec.push(if r.is_centroid { "1" } else { "0" }.to_string());
            w.write_record(&rec)?;
        }
        w.flush().map_err(|e| Error::io("<scatter>", e))?;
        Ok(())
    }

    pub fn read_csv<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(true)
            .from_reader(reader);
        let header = rdr.headers()?.clone();
        let dims = header.len().saturating_sub(3);
        if !(2..=3).contains(&dims)
            || header.iter().collect::<Vec<_>>()
                != Self::header(dims)
                    .iter()
                    .map(String::as_str)
                    .collect::<Vec<_>>()
        {
            return Err(Error::SchemaMismatch(format!(
                "unexpected scatter header `{}`",
                header.iter().collect::<Vec<_>>().join(",")
            )));
        }
        let bad = |m: String| Error::SchemaMismatch(m);
        let mut rows = Vec::new();
        for rec in rdr.records() {
            let rec = rec?;
            let coords = (0..dims)
                .map(|i| {
                    rec[i]
                        .parse::<f64>()
                        .map_err(|e| bad(format!("{:?}: {e}", &rec[i])))
                })
                .collect::<Result<Vec<_>>>()?;
            let mbti = match &rec[dims] {
                "" => None,
                s => Some(s.parse()?),
            };
            let cluster = match &rec[dims + 1] {
                "" => None,
                s => Some(s.parse().map_err(|e| bad(format!("{s:?}: {e}")))?),
            };
            let is_centroid = match &rec[dims + 2] {
                "0" => false,
                "1" => true,
                s => return Err(bad(format!("is_centroid must be 0 or 1, got {s:?}"))),
            };
            rows.push(ScatterRow {
                coords,
                mbti,
                cluster,
                is_centroid,
            });
        }
        Ok(ScatterTable { dims, rows })
    }
}

/// Builds scatter rows from projected coordinates. With a clustering
/// attached, every point carries its cluster and one extra row per centroid
/// is appended with `is_centroid = 1`.
pub fn scatter_export(
    coords: &Matrix,
    labels: &[MbtiType],
    clusters: Option<(&[usize], &Matrix)>,
) -> Result<ScatterTable> {
    let dims = coords.ncols();
    if !(2..=3).contains(&dims) {
        return Err(Error::DimensionMismatch {
            expected: 2,
            found: dims,
        });
    }
    if labels.len() != coords.nrows() {
        return Err(Error::LengthMismatch {
            left: coords.nrows(),
            right: labels.len(),
        });
    }
    if let Some((assign, centroids)) = clusters {
        if assign.len() != coords.nrows() {
            return Err(Error::LengthMismatch {
                left: coords.nrows(),
                right: assign.len(),
            });
        }
        if centroids.ncols() != dims {
            return Err(Error::DimensionMismatch {
                expected: dims,
                found: centroids.ncols(),
            });
        }
    }
    let mut rows: Vec<ScatterRow> = coords
        .rows()
        .enumerate()
        .map(|(i, r)| ScatterRow {
            coords: r.to_vec(),
            mbti: Some(labels[i]),
            cluster: clusters.map(|(a, _)| a[i]),
            is_centroid: false,
        })
        .collect();
    if let Some((_, centroids)) = clusters {
        rows.extend(centroids.rows().enumerate().map(|(c, r)| ScatterRow {
            coords: r.to_vec(),
            mbti: None,
            cluster: Some(c),
            is_centroid: true,
        }));
    }
    Ok(ScatterTable { dims, rows })
}
