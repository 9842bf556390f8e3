//! Core vocabulary: personality types, the rating scale, the genre catalog and
//! survey records.

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::io::{Read, Write};
use std::ops::Range;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::Matrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Attitude {
    Introversion,
    Extraversion,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Perceiving {
    Intuition,
    Sensing,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Judging {
    Thinking,
    Feeling,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Lifestyle {
    Judging,
    Perceiving,
}

/// One of the 16 four-letter Myers-Briggs codes.
///
/// The canonical text form is the lowercase code (`"intp"`); parsing is
/// case-insensitive.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct MbtiType {
    pub attitude: Attitude,
    pub perceiving: Perceiving,
    pub judging: Judging,
    pub lifestyle: Lifestyle,
}

impl MbtiType {
    pub const COUNT: usize = 16;

    pub const fn new(
        attitude: Attitude,
        perceiving: Perceiving,
        judging: Judging,
        lifestyle: Lifestyle,
    ) -> Self {
        MbtiType {
            attitude,
            perceiving,
            judging,
            lifestyle,
        }
    }

    /// Dense index in `0..16`; the inverse of [`MbtiType::from_index`].
    pub fn index(self) -> usize {
        ((self.attitude as usize) << 3)
            | ((self.perceiving as usize) << 2)
            | ((self.judging as usize) << 1)
            | (self.lifestyle as usize)
    }

    pub fn from_index(i: usize) -> Option<Self> {
        if i >= Self::COUNT {
            return None;
        }
        let attitude = if i & 8 == 0 {
            Attitude::Introversion
        } else {
            Attitude::Extraversion
        };
        let perceiving = if i & 4 == 0 {
            Perceiving::Intuition
        } else {
            Perceiving::Sensing
        };
        let judging = if i & 2 == 0 {
            Judging::Thinking
        } else {
            Judging::Feeling
        };
        let lifestyle = if i & 1 == 0 {
            Lifestyle::Judging
        } else {
            Lifestyle::Perceiving
        };
        Some(MbtiType::new(attitude, perceiving, judging, lifestyle))
    }

    /// All 16 types in index order.
    pub fn all() -> impl Iterator<Item = MbtiType> {
        (0..Self::COUNT).map(|i| MbtiType::from_index(i).unwrap())
    }

    pub fn is_introvert(self) -> bool {
        self.attitude == Attitude::Introversion
    }

    pub fn code(self) -> String {
        let mut s = String::with_capacity(4);
        s.push(match self.attitude {
            Attitude::Introversion => 'i',
            Attitude::Extraversion => 'e',
        });
        s.push(match self.perceiving {
            Perceiving::Intuition => 'n',
            Perceiving::Sensing => 's',
        });
        s.push(match self.judging {
            Judging::Thinking => 't',
            Judging::Feeling => 'f',
        });
        s.push(match self.lifestyle {
            Lifestyle::Judging => 'j',
            Lifestyle::Perceiving => 'p',
        });
        s
    }
}

/// Parses one of the 16 codes, ignoring ASCII case.
pub fn parse_mbti(text: &str) -> Result<MbtiType> {
    let invalid = || Error::InvalidMbtiCode(text.to_string());
    let lower = text.to_ascii_lowercase();
    let b = lower.as_bytes();
    if b.len() != 4 {
        return Err(invalid());
    }
    let attitude = match b[0] {
        b'i' => Attitude::Introversion,
        b'e' => Attitude::Extraversion,
        _ => return Err(invalid()),
    };
    let perceiving = match b[1] {
        b'n' => Perceiving::Intuition,
        b's' => Perceiving::Sensing,
        _ => return Err(invalid()),
    };
    let judging = match b[2] {
        b't' => Judging::Thinking,
        b'f' => Judging::Feeling,
        _ => return Err(invalid()),
    };
    let lifestyle = match b[3] {
        b'j' => Lifestyle::Judging,
        b'p' => Lifestyle::Perceiving,
        _ => return Err(invalid()),
    };
    Ok(MbtiType::new(attitude, perceiving, judging, lifestyle))
}

impl FromStr for MbtiType {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        parse_mbti(s)
    }
}

impl TryFrom<String> for MbtiType {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        parse_mbti(&s)
    }
}

impl From<MbtiType> for String {
    fn from(t: MbtiType) -> String {
        t.code()
    }
}

impl fmt::Display for MbtiType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.code())
    }
}

/// A survey rating on the 0..=6 scale. Zero means the respondent has no
/// experience with the genre, which is not the same as disliking it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub struct Rating(u8);

const RATING_LABELS: [&str; 7] = [
    "No Experience",
    "Dislike strongly",
    "Dislike",
    "Neutral/No opinion",
    "Mild enjoyment",
    "Reasonably enjoyable",
    "Highly enjoyable",
];

impl Rating {
    pub const MAX: u8 = 6;
    pub const NO_EXPERIENCE: Rating = Rating(0);

    pub fn new(value: u8) -> Result<Self> {
        if value > Self::MAX {
            return Err(Error::InvalidRating {
                value: value.to_string(),
                row: None,
                column: None,
            });
        }
        Ok(Rating(value))
    }

    pub fn all() -> impl Iterator<Item = Rating> {
        (0..=Self::MAX).map(Rating)
    }

    #[inline]
    pub fn value(self) -> u8 {
        self.0
    }

    pub fn is_no_experience(self) -> bool {
        self.0 == 0
    }

    /// Mild enjoyment and above.
    pub fn is_enjoyment(self) -> bool {
        self.0 >= 4
    }

    /// "Dislike strongly" or "Dislike".
    pub fn is_dislike(self) -> bool {
        matches!(self.0, 1 | 2)
    }

    pub fn meaning(self) -> &'static str {
        rating_meaning(self)
    }
}

pub fn rating_meaning(r: Rating) -> &'static str {
    RATING_LABELS[r.0 as usize]
}

impl TryFrom<u8> for Rating {
    type Error = Error;

    fn try_from(v: u8) -> Result<Self> {
        Rating::new(v)
    }
}

impl From<Rating> for u8 {
    fn from(r: Rating) -> u8 {
        r.0
    }
}

impl FromStr for Rating {
    type Err = Error;

    /// Accepts only bare decimal integers (`"4"`, not `"4.0"` or `" 4"`).
    fn from_str(s: &str) -> Result<Self> {
        let invalid = || Error::InvalidRating {
            value: s.to_string(),
            row: None,
            column: None,
        };
        if s.is_empty() || !s.bytes().all(|b| b.is_ascii_digit()) || s.len() > 3 {
            return Err(invalid());
        }
        let v: u8 = s.parse().map_err(|_| invalid())?;
        Rating::new(v).map_err(|_| invalid())
    }
}

impl fmt::Display for Rating {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// A named group of genres, e.g. all music genres.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Category {
    pub name: String,
    pub genres: Vec<String>,
}

pub const FICTION: &str = "fiction-books";
pub const NONFICTION: &str = "nonfiction-books";
pub const MUSIC: &str = "music";
pub const MOVIES: &str = "movies";
pub const VIDEO_GAMES: &str = "video-games";

pub const PSYCHOLOGY: &str = "Psychology";
pub const RELIGION_SPIRITUALITY: &str = "Religion & Spirituality";

/// Category names and sizes of the default survey layout.
pub const DEFAULT_CATEGORY_SIZES: [(&str, usize); 5] = [
    (FICTION, 30),
    (NONFICTION, 34),
    (MUSIC, 25),
    (MOVIES, 21),
    (VIDEO_GAMES, 11),
];

const RESERVED_COLUMNS: [&str; 2] = ["respondent_id", "mbti"];

/// Ordered genres partitioned into ordered categories. The flat position of
/// a genre is its rating column index.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(try_from = "Vec<Category>", into = "Vec<Category>")]
pub struct GenreCatalog {
    categories: Vec<Category>,
    offsets: Vec<usize>,
    flat: Vec<String>,
    index: HashMap<String, usize>,
}

impl PartialEq for GenreCatalog {
    fn eq(&self, other: &Self) -> bool {
        self.categories == other.categories
    }
}

impl Eq for GenreCatalog {}

impl GenreCatalog {
    pub fn new(categories: Vec<Category>) -> Result<Self> {
        if categories.is_empty() {
            return Err(Error::InvalidCatalog("no categories".into()));
        }
        let mut seen_categories = HashSet::new();
        let mut offsets = Vec::with_capacity(categories.len() + 1);
        let mut flat = Vec::new();
        let mut index = HashMap::new();
        for cat in &categories {
            if cat.name.trim().is_empty() {
                return Err(Error::InvalidCatalog("empty category name".into()));
            }
            if !seen_categories.insert(cat.name.as_str()) {
                return Err(Error::InvalidCatalog(format!(
                    "category {:?} listed twice",
                    cat.name
                )));
            }
            if cat.genres.is_empty() {
                return Err(Error::InvalidCatalog(format!(
                    "category {:?} has no genres",
                    cat.name
                )));
            }
            offsets.push(flat.len());
            for g in &cat.genres {
                if g.is_empty() || g.trim() != g {
                    return Err(Error::InvalidCatalog(format!("bad genre name {g:?}")));
                }
                if RESERVED_COLUMNS.contains(&g.as_str()) {
                    return Err(Error::InvalidCatalog(format!(
                        "genre name {g:?} collides with a dataset column"
                    )));
                }
                if index.insert(g.clone(), flat.len()).is_some() {
                    return Err(Error::InvalidCatalog(format!("duplicate genre {g:?}")));
                }
                flat.push(g.clone());
            }
        }
        offsets.push(flat.len());
        Ok(GenreCatalog {
            categories,
            offsets,
            flat,
            index,
        })
    }

    /// Number of genres (rating columns).
    pub fn len(&self) -> usize {
        self.flat.len()
    }

    pub fn is_empty(&self) -> bool {
        self.flat.is_empty()
    }

    pub fn categories(&self) -> &[Category] {
        &self.categories
    }

    pub fn genres(&self) -> &[String] {
        &self.flat
    }

    pub fn genre(&self, column: usize) -> &str {
        &self.flat[column]
    }

    pub fn index_of(&self, genre: &str) -> Option<usize> {
        self.index.get(genre).copied()
    }

    /// Column range covered by a category.
    pub fn category_range(&self, name: &str) -> Option<Range<usize>> {
        self.categories
            .iter()
            .position(|c| c.name == name)
            .map(|i| self.offsets[i]..self.offsets[i + 1])
    }

    /// Name of the category containing `column`.
    pub fn category_of(&self, column: usize) -> &str {
        let i = self.offsets.partition_point(|&o| o <= column) - 1;
        &self.categories[i].name
    }

    pub fn read_csv<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(true)
            .from_reader(reader);
        let headers = rdr.headers()?.clone();
        if headers.len() != 2 || &headers[0] != "category" || &headers[1] != "genre" {
            return Err(Error::SchemaMismatch(format!(
                "catalog header must be `category,genre`, found `{}`",
                headers.iter().collect::<Vec<_>>().join(",")
            )));
        }
        let mut categories: Vec<Category> = Vec::new();
        for row in rdr.records() {
            let row = row?;
            let (cat, genre) = (&row[0], &row[1]);
            match categories.last_mut() {
                Some(last) if last.name == cat => last.genres.push(genre.to_string()),
                _ => {
                    if categories.iter().any(|c| c.name == cat) {
                        return Err(Error::InvalidCatalog(format!(
                            "rows of category {cat:?} are not contiguous"
                        )));
                    }
                    categories.push(Category {
                        name: cat.to_string(),
                        genres: vec![genre.to_string()],
                    });
                }
            }
        }
        GenreCatalog::new(categories)
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(writer);
        w.write_record(["category", "genre"])?;
        for c in &self.categories {
            for g in &c.genres {
                w.write_record([c.name.as_str(), g.as_str()])?;
            }
        }
        w.flush().map_err(|e| Error::io("<catalog>", e))?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let f = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        Self::read_csv(f)
    }
}

impl TryFrom<Vec<Category>> for GenreCatalog {
    type Error = Error;

    fn try_from(c: Vec<Category>) -> Result<Self> {
        GenreCatalog::new(c)
    }
}

impl From<GenreCatalog> for Vec<Category> {
    fn from(c: GenreCatalog) -> Self {
        c.categories
    }
}

impl Default for GenreCatalog {
    fn default() -> Self {
        default_catalog()
    }
}

/// The 121-genre survey layout: 30 fiction, 34 nonfiction, 25 music,
/// 21 movie and 11 video-game genres. Only two genre names are known
/// ("Psychology" and "Religion & Spirituality", both nonfiction); the rest
/// are positional placeholders such as `nonfiction_03`.
pub fn default_catalog() -> GenreCatalog {
    let prefixes = ["fiction", "nonfiction", "music", "movies", "games"];
    let categories = DEFAULT_CATEGORY_SIZES
        .iter()
        .zip(prefixes)
        .map(|(&(name, size), prefix)| {
            let genres = (1..=size)
                .map(|i| match (name, i) {
                    (NONFICTION, 1) => PSYCHOLOGY.to_string(),
                    (NONFICTION, 2) => RELIGION_SPIRITUALITY.to_string(),
                    _ => format!("{prefix}_{i:02}"),
                })
                .collect();
            Category {
                name: name.to_string(),
                genres,
            }
        })
        .collect();
    GenreCatalog::new(categories).expect("default catalog is valid")
}

/// Respondent ids are restricted to `[A-Za-z0-9_-]+` so dataset files never
/// need quoting.
pub fn validate_respondent_id(id: &str) -> Result<()> {
    if id.is_empty()
        || !id
            .bytes()
            .all(|b| b.is_ascii_alphanumeric() || b == b'_' || b == b'-')
    {
        return Err(Error::InvalidRespondentId(id.to_string()));
    }
    Ok(())
}

/// One respondent's declared type and ratings in catalog column order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SurveyRecord {
    pub respondent_id: String,
    pub mbti: MbtiType,
    pub ratings: Vec<Rating>,
}

impl SurveyRecord {
    pub fn rating(&self, column: usize) -> Rating {
        self.ratings[column]
    }
}

/// Validated survey responses sharing one catalog.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Dataset {
    catalog: GenreCatalog,
    records: Vec<SurveyRecord>,
}

impl Dataset {
    pub fn new(catalog: GenreCatalog, records: Vec<SurveyRecord>) -> Result<Self> {
        let mut ids = HashSet::with_capacity(records.len());
        for r in &records {
            validate_respondent_id(&r.respondent_id)?;
            if r.ratings.len() != catalog.len() {
                return Err(Error::SchemaMismatch(format!(
                    "respondent {:?} has {} ratings, catalog has {} genres",
                    r.respondent_id,
                    r.ratings.len(),
                    catalog.len()
                )));
            }
            if !ids.insert(r.respondent_id.as_str()) {
                return Err(Error::DuplicateRespondent(r.respondent_id.clone()));
            }
        }
        Ok(Dataset { catalog, records })
    }

    pub fn empty(catalog: GenreCatalog) -> Self {
        Dataset {
            catalog,
            records: Vec::new(),
        }
    }

    pub fn catalog(&self) -> &GenreCatalog {
        &self.catalog
    }

    pub fn records(&self) -> &[SurveyRecord] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn record(&self, respondent_id: &str) -> Option<&SurveyRecord> {
        self.records
            .iter()
            .find(|r| r.respondent_id == respondent_id)
    }

    pub fn labels(&self) -> Vec<MbtiType> {
        self.records.iter().map(|r| r.mbti).collect()
    }

    /// Raw ratings as an `n × n_genres` real matrix. Zero ratings stay zero.
    pub fn feature_matrix(&self) -> Matrix {
        self.feature_columns(0..self.catalog.len())
    }

    /// Ratings restricted to a contiguous column range, e.g. one category.
    pub fn feature_columns(&self, columns: Range<usize>) -> Matrix {
        let cols = columns.len();
        let mut data = Vec::with_capacity(self.records.len() * cols);
        for r in &self.records {
            data.extend(r.ratings[columns.clone()].iter().map(|x| x.value() as f64));
        }
        Matrix::from_vec(self.records.len(), cols, data).expect("consistent shape")
    }

    /// Records of a single type, in dataset order.
    pub fn records_of(&self, t: MbtiType) -> impl Iterator<Item = &SurveyRecord> {
        self.records.iter().filter(move |r| r.mbti == t)
    }
}
