//! Loading, validating and summarizing survey datasets, plus a seeded
//! generator for synthetic datasets with planted type structure.

use std::collections::{BTreeMap, HashSet};
use std::io::{Read, Write};
use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::domain::{
    default_catalog, parse_mbti, validate_respondent_id, Dataset, GenreCatalog, MbtiType, Rating,
    SurveyRecord, PSYCHOLOGY, RELIGION_SPIRITUALITY,
};
use crate::error::{Error, Result};

/// Respondent counts for every one of the 16 types.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(try_from = "BTreeMap<String, u64>", into = "BTreeMap<String, u64>")]
pub struct TypeFrequencyTable {
    counts: [u64; MbtiType::COUNT],
}

/// Type frequencies of the 1020-respondent survey.
pub const SURVEY_FREQUENCIES: [(&str, u64); 16] = [
    ("intp", 221),
    ("intj", 160),
    ("infj", 134),
    ("infp", 111),
    ("istp", 81),
    ("entp", 76),
    ("enfp", 71),
    ("istj", 65),
    ("isfj", 26),
    ("isfp", 22),
    ("entj", 17),
    ("estp", 12),
    ("enfj", 11),
    ("esfp", 5),
    ("estj", 5),
    ("esfj", 3),
];

impl TypeFrequencyTable {
    pub fn zeros() -> Self {
        Self::default()
    }

    pub fn survey() -> Self {
        let mut t = Self::zeros();
        for (code, n) in SURVEY_FREQUENCIES {
            t.set(parse_mbti(code).expect("valid code"), n);
        }
        t
    }

    /// Same count for every type.
    pub fn uniform(count: u64) -> Self {
        TypeFrequencyTable {
            counts: [count; MbtiType::COUNT],
        }
    }

    pub fn from_pairs<I: IntoIterator<Item = (MbtiType, u64)>>(pairs: I) -> Self {
        let mut t = Self::zeros();
        for (ty, n) in pairs {
            t.counts[ty.index()] += n;
        }
        t
    }

    #[inline]
    pub fn get(&self, t: MbtiType) -> u64 {
        self.counts[t.index()]
    }

    pub fn set(&mut self, t: MbtiType, count: u64) {
        self.counts[t.index()] = count;
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    /// All 16 types, sorted by descending count with ties broken by code.
    pub fn sorted_desc(&self) -> Vec<(MbtiType, u64)> {
        let mut v: Vec<_> = MbtiType::all().map(|t| (t, self.get(t))).collect();
        v.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.code().cmp(&b.0.code())));
        v
    }

    pub fn iter(&self) -> impl Iterator<Item = (MbtiType, u64)> + '_ {
        MbtiType::all().map(|t| (t, self.get(t)))
    }

    pub fn read_json<R: Read>(reader: R) -> Result<Self> {
        Ok(serde_json::from_reader(reader)?)
    }
}

impl TryFrom<BTreeMap<String, u64>> for TypeFrequencyTable {
    type Error = Error;

    fn try_from(map: BTreeMap<String, u64>) -> Result<Self> {
        let mut t = TypeFrequencyTable::zeros();
        for (code, n) in map {
            t.set(parse_mbti(&code)?, n);
        }
        Ok(t)
    }
}

impl From<TypeFrequencyTable> for BTreeMap<String, u64> {
    fn from(t: TypeFrequencyTable) -> Self {
        t.iter().map(|(ty, n)| (ty.code(), n)).collect()
    }
}

pub fn type_frequencies(d: &Dataset) -> TypeFrequencyTable {
    TypeFrequencyTable::from_pairs(d.records().iter().map(|r| (r.mbti, 1)))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SkewSummary {
    pub total: u64,
    pub introvert_count: u64,
    pub introvert_fraction: f64,
    pub top4: Vec<(MbtiType, u64)>,
}

/// Introvert share and the four most frequent types.
pub fn skew_summary(t: &TypeFrequencyTable) -> Result<SkewSummary> {
    let total = t.total();
    if total == 0 {
        return Err(Error::EmptyTable);
    }
    let introvert_count: u64 = t
        .iter()
        .filter(|(ty, _)| ty.is_introvert())
        .map(|(_, n)| n)
        .sum();
    let mut top4 = t.sorted_desc();
    top4.truncate(4);
    Ok(SkewSummary {
        total,
        introvert_count,
        introvert_fraction: introvert_count as f64 / total as f64,
        top4,
    })
}

// --- CSV I/O ---------------------------------------------------------------

fn expected_header(catalog: &GenreCatalog) -> Vec<&str> {
    let mut h = vec!["respondent_id", "mbti"];
    h.extend(catalog.genres().iter().map(String::as_str));
    h
}

/// Reads a dataset CSV (`respondent_id,mbti,<genres in catalog order>`).
pub fn read_dataset<R: Read>(reader: R, catalog: &GenreCatalog) -> Result<Dataset> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .from_reader(reader);
    let header = rdr.headers()?.clone();
    let expected = expected_header(catalog);
    if header.len() != expected.len() {
        return Err(Error::SchemaMismatch(format!(
            "expected {} columns (respondent_id, mbti and {} genres), found {}",
            expected.len(),
            catalog.len(),
            header.len()
        )));
    }
    if let Some((i, (found, want))) = header
        .iter()
        .zip(&expected)
        .enumerate()
        .find(|(_, (f, w))| f != *w)
    {
        return Err(Error::SchemaMismatch(format!(
            "column {} is {found:?}, expected {want:?}",
            i + 1
        )));
    }

    let mut records = Vec::new();
    let mut seen = HashSet::new();
    for (row_no, row) in rdr.records().enumerate() {
        let row = row?;
        let line = row_no + 1;
        if row.len() != expected.len() {
            return Err(Error::SchemaMismatch(format!(
                "row {line} has {} fields, expected {}",
                row.len(),
                expected.len()
            )));
        }
        let id = &row[0];
        validate_respondent_id(id)?;
        if !seen.insert(id.to_string()) {
            return Err(Error::DuplicateRespondent(id.to_string()));
        }
        let mbti = parse_mbti(&row[1])?;
        let ratings = row
            .iter()
            .skip(2)
            .zip(catalog.genres())
            .map(|(cell, genre)| {
                cell.parse::<Rating>().map_err(|_| Error::InvalidRating {
                    value: cell.to_string(),
                    row: Some(line),
                    column: Some(genre.clone()),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        records.push(SurveyRecord {
            respondent_id: id.to_string(),
            mbti,
            ratings,
        });
    }
    Dataset::new(catalog.clone(), records)
}

pub fn load_dataset(path: impl AsRef<Path>, catalog: &GenreCatalog) -> Result<Dataset> {
    let path = path.as_ref();
    let f = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_dataset(std::io::BufReader::new(f), catalog)
}

pub fn write_dataset<W: Write>(writer: W, d: &Dataset) -> Result<()> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(writer);
    w.write_record(expected_header(d.catalog()))?;
    let mut fields: Vec<String> = Vec::with_capacity(d.catalog().len() + 2);
    for r in d.records() {
        fields.clear();
        fields.push(r.respondent_id.clone());
        fields.push(r.mbti.code());
        fields.extend(r.ratings.iter().map(|x| x.to_string()));
        w.write_record(&fields)?;
    }
    w.flush().map_err(|e| Error::io("<dataset>", e))?;
    Ok(())
}

pub fn dataset_to_csv(d: &Dataset) -> Result<Vec<u8>> {
    let mut buf = Vec::new();
    write_dataset(&mut buf, d)?;
    Ok(buf)
}

// --- synthetic generation --------------------------------------------------

/// Mean override for one (type, genre) cell of the rating model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeanOverride {
    pub mbti: MbtiType,
    pub genre: String,
    pub mean: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dispersion: Option<f64>,
}

/// Parameters of the per-(type, genre) rating distribution.
///
/// Each cell is a discrete Gaussian on 0..=6 centered on a planted mean,
/// mixed with a point mass at 0 ("no experience"). The planted mean is
/// `base_mean`, shifted by `trait_strength / 2` per dichotomy according to a
/// fixed genre pattern, plus `category_boost` on the type's preferred
/// category. `overrides` replace individual cells.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RatingModel {
    pub base_mean: f64,
    pub trait_strength: f64,
    pub category_boost: f64,
    pub dispersion: f64,
    pub no_experience_rate: f64,
    pub overrides: Vec<MeanOverride>,
}

impl Default for RatingModel {
    fn default() -> Self {
        RatingModel::planted(&default_catalog())
    }
}

impl RatingModel {
    /// Planted structure without any overrides.
    pub fn structural() -> Self {
        RatingModel {
            base_mean: 3.0,
            trait_strength: 0.3,
            category_boost: 0.3,
            dispersion: 1.5,
            no_experience_rate: 0.1,
            overrides: Vec::new(),
        }
    }

    /// Planted structure; when the catalog has the two named nonfiction
    /// genres, the four most common types also lean toward Psychology over
    /// Religion & Spirituality.
    pub fn planted(catalog: &GenreCatalog) -> Self {
        let mut m = Self::structural();
        if catalog.index_of(PSYCHOLOGY).is_some()
            && catalog.index_of(RELIGION_SPIRITUALITY).is_some()
        {
            for code in ["intp", "intj", "infj", "infp"] {
                let t = parse_mbti(code).unwrap();
                m.overrides.push(MeanOverride {
                    mbti: t,
                    genre: PSYCHOLOGY.into(),
                    mean: 4.8,
                    dispersion: None,
                });
                m.overrides.push(MeanOverride {
                    mbti: t,
                    genre: RELIGION_SPIRITUALITY.into(),
                    mean: 2.2,
                    dispersion: None,
                });
            }
        }
        m
    }

    fn validate(&self, catalog: &GenreCatalog) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidConfig(m));
        if !(self.dispersion > 0.0 && self.dispersion.is_finite()) {
            return bad(format!(
                "dispersion must be positive, got {}",
                self.dispersion
            ));
        }
        if !(0.0..=1.0).contains(&self.no_experience_rate) {
            return bad(format!(
                "no_experience_rate must be in [0,1], got {}",
                self.no_experience_rate
            ));
        }
        for v in [self.base_mean, self.trait_strength, self.category_boost] {
            if !v.is_finite() {
                return bad("rating model parameters must be finite".into());
            }
        }
        for o in &self.overrides {
            if catalog.index_of(&o.genre).is_none() {
                return Err(Error::UnknownGenre(o.genre.clone()));
            }
            if !(0.0..=6.0).contains(&o.mean) {
                return bad(format!("override mean {} outside [0,6]", o.mean));
            }
            if let Some(d) = o.dispersion {
                if !(d > 0.0 && d.is_finite()) {
                    return bad(format!("override dispersion must be positive, got {d}"));
                }
            }
        }
        Ok(())
    }

    /// Planted mean and dispersion for one (type, column) cell.
    pub fn cell(&self, catalog: &GenreCatalog, t: MbtiType, column: usize) -> (f64, f64) {
        let genre = catalog.genre(column);
        if let Some(o) = self
            .overrides
            .iter()
            .rev()
            .find(|o| o.mbti == t && o.genre == genre)
        {
            return (o.mean, o.dispersion.unwrap_or(self.dispersion));
        }
        let cat_name = catalog.category_of(column);
        let cat_idx = catalog
            .categories()
            .iter()
            .position(|c| c.name == cat_name)
            .unwrap();
        let pos = column - catalog.category_range(cat_name).unwrap().start;
        let pattern = pos + 5 * cat_idx;
        let poles = [
            t.attitude as usize,
            t.perceiving as usize,
            t.judging as usize,
            t.lifestyle as usize,
        ];
        let shift: f64 = poles
            .iter()
            .enumerate()
            .map(|(b, &pole)| {
                let type_sign = if pole == 0 { 1.0 } else { -1.0 };
                let genre_sign = if (pattern >> b) & 1 == 1 { 1.0 } else { -1.0 };
                type_sign * genre_sign
            })
            .sum();
        let boost = if t.index() % catalog.categories().len() == cat_idx {
            self.category_boost
        } else {
            0.0
        };
        let mean = (self.base_mean + 0.5 * self.trait_strength * shift + boost).clamp(0.0, 6.0);
        (mean, self.dispersion)
    }
}

/// Inputs to [`generate_synthetic`]. The seed fully determines the output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthConfig {
    pub seed: u64,
    pub frequencies: TypeFrequencyTable,
    #[serde(default)]
    pub catalog: GenreCatalog,
    #[serde(default)]
    pub rating_model: RatingModel,
}

impl SynthConfig {
    /// Survey-shaped: 1020 respondents with the published type frequencies.
    pub fn survey(seed: u64) -> Self {
        SynthConfig {
            seed,
            frequencies: TypeFrequencyTable::survey(),
            catalog: default_catalog(),
            rating_model: RatingModel::default(),
        }
    }

    pub fn read_json<R: Read>(reader: R) -> Result<Self> {
        Ok(serde_json::from_reader(reader)?)
    }
}

fn cumulative_weights(mean: f64, dispersion: f64) -> [f64; 7] {
    let mut cum = [0.0; 7];
    let mut acc = 0.0;
    for (r, c) in cum.iter_mut().enumerate() {
        let z = (r as f64 - mean) / dispersion;
        acc += (-0.5 * z * z).exp();
        *c = acc;
    }
    cum
}

fn sample_cumulative(cum: &[f64; 7], rng: &mut impl Rng) -> u8 {
    let u = rng.random::<f64>() * cum[6];
    cum.iter().position(|&c| u < c).unwrap_or(6) as u8
}

/// Draws a dataset with exactly `cfg.frequencies` respondents per type.
///
/// Record order is a seeded shuffle; ids are `r0001`, `r0002`, ... in that
/// order.
pub fn generate_synthetic(cfg: &SynthConfig) -> Result<Dataset> {
    let total = cfg.frequencies.total();
    if total == 0 {
        return Err(Error::InvalidConfig(
            "frequency table total must be > 0".into(),
        ));
    }
    cfg.rating_model.validate(&cfg.catalog)?;
    let catalog = &cfg.catalog;
    let g = catalog.len();

    let tables: Vec<Vec<[f64; 7]>> = MbtiType::all()
        .map(|t| {
            (0..g)
                .map(|col| {
                    let (mean, disp) = cfg.rating_model.cell(catalog, t, col);
                    cumulative_weights(mean, disp)
                })
                .collect()
        })
        .collect();

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut types: Vec<MbtiType> = cfg
        .frequencies
        .iter()
        .flat_map(|(t, n)| std::iter::repeat_n(t, n as usize))
        .collect();
    types.shuffle(&mut rng);

    let width = total.to_string().len().max(4);
    let ner = cfg.rating_model.no_experience_rate;
    let records = types
        .into_iter()
        .enumerate()
        .map(|(i, t)| {
            let table = &tables[t.index()];
            let ratings = table
                .iter()
                .map(|cum| {
                    let no_exp = rng.random::<f64>() < ner;
                    let v = sample_cumulative(cum, &mut rng);
                    Rating::new(if no_exp { 0 } else { v }).unwrap()
                })
                .collect();
            SurveyRecord {
                respondent_id: format!("r{:0width$}", i + 1),
                mbti: t,
                ratings,
            }
        })
        .collect();
    Dataset::new(catalog.clone(), records)
}
