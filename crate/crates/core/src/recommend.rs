//! Genre recommendations from per-type rating profiles, optionally blended
//! with a user's own ratings.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::domain::{Dataset, GenreCatalog, MbtiType, SurveyRecord};
use crate::error::{Error, Result};

/// Aggregate of one genre's ratings within a type. Zero ("no experience")
/// ratings are counted separately and never enter the mean or share.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenreStats {
    pub mean_nonzero: Option<f64>,
    pub enjoyment_share: f64,
    pub support: u64,
    pub no_experience: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TypeProfile {
    pub mbti: MbtiType,
    pub respondents: u64,
    /// One entry per catalog column.
    pub genres: Vec<GenreStats>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TypeProfiles {
    pub catalog: GenreCatalog,
    pub profiles: BTreeMap<MbtiType, TypeProfile>,
}

impl TypeProfiles {
    pub fn get(&self, t: MbtiType) -> Result<&TypeProfile> {
        self.profiles
            .get(&t)
            .ok_or_else(|| Error::UnknownType(t.code()))
    }
}

/// Builds a profile for every one of the 16 types; types without
/// respondents get profiles with zero support everywhere.
pub fn build_profiles(d: &Dataset) -> TypeProfiles {
    let g = d.catalog().len();
    // [type][genre] -> (sum of nonzero ratings, nonzero count, enjoy count, zero count)
    let mut acc = vec![vec![[0u64; 4]; g]; MbtiType::COUNT];
    let mut respondents = [0u64; MbtiType::COUNT];
    for r in d.records() {
        let row = &mut acc[r.mbti.index()];
        respondents[r.mbti.index()] += 1;
        for (cell, rating) in row.iter_mut().zip(&r.ratings) {
            if rating.is_no_experience() {
                cell[3] += 1;
            } else {
                cell[0] += rating.value() as u64;
                cell[1] += 1;
                if rating.is_enjoyment() {
                    cell[2] += 1;
                }
            }
        }
    }
    let profiles = MbtiType::all()
        .map(|t| {
            let genres = acc[t.index()]
                .iter()
                .map(|&[sum, support, enjoy, zero]| GenreStats {
                    mean_nonzero: (support > 0).then(|| sum as f64 / support as f64),
                    enjoyment_share: if support > 0 {
                        enjoy as f64 / support as f64
                    } else {
                        0.0
                    },
                    support,
                    no_experience: zero,
                })
                .collect();
            (
                t,
                TypeProfile {
                    mbti: t,
                    respondents: respondents[t.index()],
                    genres,
                },
            )
        })
        .collect();
    TypeProfiles {
        catalog: d.catalog().clone(),
        profiles,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Strategy {
    #[serde(rename = "type-profile")]
    TypeProfile,
    #[serde(rename = "blended")]
    Blended,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecommendedItem {
    pub genre: String,
    pub category: String,
    /// `None` when no respondent of the type has rated the genre.
    pub score: Option<f64>,
    pub support: u64,
    pub low_support: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Recommendation {
    pub mbti: MbtiType,
    pub strategy: Strategy,
    pub items: Vec<RecommendedItem>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RecommendOptions {
    pub category: Option<String>,
    pub top_n: usize,
    /// Items supported by fewer nonzero raters are flagged `low_support`.
    pub min_support: u64,
}

impl Default for RecommendOptions {
    fn default() -> Self {
        RecommendOptions {
            category: None,
            top_n: 10,
            min_support: 5,
        }
    }
}

impl RecommendOptions {
    pub fn top(top_n: usize) -> Self {
        RecommendOptions {
            top_n,
            ..Default::default()
        }
    }
}

/// Descending score, absent scores last, ties by genre name.
fn rank(items: &mut [RecommendedItem]) {
    items.sort_by(|x, y| {
        let by_score = match (x.score, y.score) {
            (Some(a), Some(b)) => b.total_cmp(&a),
            (Some(_), None) => Ordering::Less,
            (None, Some(_)) => Ordering::Greater,
            (None, None) => Ordering::Equal,
        };
        by_score.then_with(|| x.genre.cmp(&y.genre))
    });
}

fn candidate_columns(
    catalog: &GenreCatalog,
    opts: &RecommendOptions,
) -> Result<std::ops::Range<usize>> {
    if opts.top_n == 0 {
        return Err(Error::InvalidConfig("top_n must be at least 1".into()));
    }
    match &opts.category {
        Some(c) => catalog
            .category_range(c)
            .ok_or_else(|| Error::UnknownCategory(c.clone())),
        None => Ok(0..catalog.len()),
    }
}

fn item(
    catalog: &GenreCatalog,
    col: usize,
    score: Option<f64>,
    support: u64,
    min_support: u64,
) -> RecommendedItem {
    RecommendedItem {
        genre: catalog.genre(col).to_string(),
        category: catalog.category_of(col).to_string(),
        score,
        support,
        low_support: support < min_support,
    }
}

/// Ranks genres by the type's mean nonzero rating.
pub fn recommend_for_type(
    profiles: &TypeProfiles,
    t: MbtiType,
    opts: &RecommendOptions,
) -> Result<Recommendation> {
    let profile = profiles.get(t)?;
    let catalog = &profiles.catalog;
    let mut items: Vec<_> = candidate_columns(catalog, opts)?
        .map(|col| {
            let s = &profile.genres[col];
            item(catalog, col, s.mean_nonzero, s.support, opts.min_support)
        })
        .collect();
    rank(&mut items);
    items.truncate(opts.top_n);
    Ok(Recommendation {
        mbti: t,
        strategy: Strategy::TypeProfile,
        items,
    })
}

/// Ranks genres for one respondent.
///
/// Unrated genres score the type mean; rated ones score
/// `blend·rating + (1 − blend)·type mean` (the rating alone when the type
/// has no data). Genres the user rated 1 or 2 are left out.
pub fn recommend_for_user(
    profiles: &TypeProfiles,
    user: &SurveyRecord,
    blend: f64,
    opts: &RecommendOptions,
) -> Result<Recommendation> {
    if !(0.0..=1.0).contains(&blend) {
        return Err(Error::InvalidConfig(format!(
            "blend must be in [0,1], got {blend}"
        )));
    }
    let catalog = &profiles.catalog;
    if user.ratings.len() != catalog.len() {
        return Err(Error::SchemaMismatch(format!(
            "user has {} ratings, catalog has {} genres",
            user.ratings.len(),
            catalog.len()
        )));
    }
    let profile = profiles.get(user.mbti)?;
    let mut items: Vec<_> = candidate_columns(catalog, opts)?
        .filter(|&col| !user.ratings[col].is_dislike())
        .map(|col| {
            let s = &profile.genres[col];
            let r = user.ratings[col];
            let score = if r.is_no_experience() {
                s.mean_nonzero
            } else {
                let own = r.value() as f64;
                Some(match s.mean_nonzero {
                    Some(m) => blend * own + (1.0 - blend) * m,
                    None => own,
                })
            };
            item(catalog, col, score, s.support, opts.min_support)
        })
        .collect();
    rank(&mut items);
    items.truncate(opts.top_n);
    Ok(Recommendation {
        mbti: user.mbti,
        strategy: Strategy::Blended,
        items,
    })
}

/// Numbered plain-text listing for terminals.
pub fn render_text(rec: &Recommendation) -> String {
    let strategy = match rec.strategy {
        Strategy::TypeProfile => "type-profile",
        Strategy::Blended => "blended",
    };
    let mut out = format!("{} ({strategy})\n", rec.mbti);
    for (i, it) in rec.items.iter().enumerate() {
        let score = it
            .score
            .map(|s| format!("{s:.3}"))
            .unwrap_or_else(|| "n/a".into());
        let _ = write!(
            out,
            "{:>3}. {} [{}] score={} support={}",
            i + 1,
            it.genre,
            it.category,
            score,
            it.support
        );
        if it.low_support {
            out.push_str(" (low support)");
        }
        out.push('\n');
    }
    out
}
