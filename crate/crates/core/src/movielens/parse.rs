//! Readers for the `::`-delimited MovieLens files.

use std::collections::{BTreeMap, HashMap};
use std::io::BufRead;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Ordered list of category names.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<String>", into = "Vec<String>")]
pub struct GenreVocabulary {
    names: Vec<String>,
    index: HashMap<String, usize>,
}

/// The 19 MovieLens 10M genres, alphabetically, as spelled in the data files.
pub const MOVIELENS_GENRES: [&str; 19] = [
    "Action",
    "Adventure",
    "Animation",
    "Children",
    "Comedy",
    "Crime",
    "Documentary",
    "Drama",
    "Fantasy",
    "Film-Noir",
    "Horror",
    "IMAX",
    "Musical",
    "Mystery",
    "Romance",
    "Sci-Fi",
    "Thriller",
    "War",
    "Western",
];

impl GenreVocabulary {
    pub fn new<S: Into<String>>(names: impl IntoIterator<Item = S>) -> Result<Self> {
        let names: Vec<String> = names.into_iter().map(Into::into).collect();
        if names.len() < 2 {
            return Err(Error::TooFewCategories(names.len()));
        }
        let mut index = HashMap::with_capacity(names.len());
        for (k, name) in names.iter().enumerate() {
            if name.is_empty() {
                return Err(Error::InvalidArgument("empty genre name".into()));
            }
            if index.insert(name.clone(), k).is_some() {
                return Err(Error::InvalidArgument(format!("duplicate genre {name:?}")));
            }
        }
        Ok(Self { names, index })
    }

    pub fn movielens() -> Self {
        Self::new(MOVIELENS_GENRES).expect("built-in vocabulary is valid")
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    /// Index of a genre token. The older `Children's` spelling maps to
    /// `Children`.
    pub fn index_of(&self, token: &str) -> Option<usize> {
        self.index.get(token).copied().or_else(|| match token {
            "Children's" => self.index.get("Children").copied(),
            "Children" => self.index.get("Children's").copied(),
            _ => None,
        })
    }
}

impl Default for GenreVocabulary {
    fn default() -> Self {
        Self::movielens()
    }
}

impl TryFrom<Vec<String>> for GenreVocabulary {
    type Error = Error;

    fn try_from(names: Vec<String>) -> Result<Self> {
        Self::new(names)
    }
}

impl From<GenreVocabulary> for Vec<String> {
    fn from(v: GenreVocabulary) -> Vec<String> {
        v.names
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UnknownGenrePolicy {
    #[default]
    Reject,
    Skip,
}

/// Movie id to genre indexes.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct MovieTable {
    pub genres: BTreeMap<u32, Vec<usize>>,
    /// Genre tokens dropped under [`UnknownGenrePolicy::Skip`].
    pub skipped_genres: usize,
}

impl MovieTable {
    pub fn get(&self, movie_id: u32) -> Option<&[usize]> {
        self.genres.get(&movie_id).map(Vec::as_slice)
    }

    pub fn len(&self) -> usize {
        self.genres.len()
    }

    pub fn is_empty(&self) -> bool {
        self.genres.is_empty()
    }
}

fn lines<R: BufRead>(source: R) -> impl Iterator<Item = (usize, Result<String>)> {
    source.split(b'\n').enumerate().map(|(k, bytes)| {
        let line = bytes
            .map(|b| {
                let s = String::from_utf8_lossy(&b);
                s.trim_end_matches('\r').to_string()
            })
            .map_err(|e| Error::io("<stream>", e));
        (k + 1, line)
    })
}

fn parse_id(field: &str, line: usize, what: &str) -> Result<u32> {
    field.trim().parse().map_err(|_| Error::MalformedLine {
        line,
        reason: format!("bad {what} {field:?}"),
    })
}

/// Reads `MovieID::Title::Genre1|Genre2|...` lines. The title may itself
/// contain `::`, so the id is taken before the first separator and the
/// genres after the last.
pub fn parse_movies<R: BufRead>(
    source: R,
    vocab: &GenreVocabulary,
    policy: UnknownGenrePolicy,
) -> Result<MovieTable> {
    let mut table = MovieTable::default();
    for (line_no, line) in lines(source) {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let (first, last) = match (line.find("::"), line.rfind("::")) {
            (Some(a), Some(b)) if a < b => (a, b),
            _ => {
                return Err(Error::MalformedLine {
                    line: line_no,
                    reason: "expected MovieID::Title::Genres".into(),
                })
            }
        };
        let id = parse_id(&line[..first], line_no, "movie id")?;
        let mut genres = Vec::new();
        for token in line[last + 2..].split('|') {
            match vocab.index_of(token.trim()) {
                Some(k) => {
                    if !genres.contains(&k) {
                        genres.push(k);
                    }
                }
                None if policy == UnknownGenrePolicy::Skip => table.skipped_genres += 1,
                None => {
                    return Err(Error::UnknownGenre {
                        line: line_no,
                        genre: token.to_string(),
                    })
                }
            }
        }
        genres.sort_unstable();
        if table.genres.insert(id, genres).is_some() {
            return Err(Error::MalformedLine {
                line: line_no,
                reason: format!("duplicate movie id {id}"),
            });
        }
    }
    Ok(table)
}

/// One line of `ratings.dat`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RatingRecord {
    pub user_id: u32,
    pub movie_id: u32,
    pub rating: f64,
    pub timestamp: i64,
}

/// Streaming reader over `UserID::MovieID::Rating::Timestamp` lines.
pub struct RatingReader<R: BufRead> {
    inner: std::iter::Enumerate<std::io::Split<R>>,
}

pub fn parse_ratings<R: BufRead>(source: R) -> RatingReader<R> {
    RatingReader {
        inner: source.split(b'\n').enumerate(),
    }
}

impl<R: BufRead> Iterator for RatingReader<R> {
    type Item = Result<RatingRecord>;

    fn next(&mut self) -> Option<Self::Item> {
        loop {
            let (k, bytes) = self.inner.next()?;
            let bytes = match bytes {
                Ok(b) => b,
                Err(e) => return Some(Err(Error::io("<ratings>", e))),
            };
            let text = String::from_utf8_lossy(&bytes);
            let text = text.trim();
            if text.is_empty() {
                continue;
            }
            return Some(parse_rating_line(text, k + 1));
        }
    }
}

fn parse_rating_line(text: &str, line: usize) -> Result<RatingRecord> {
    let fields: Vec<&str> = text.split("::").collect();
    if fields.len() != 4 {
        return Err(Error::MalformedLine {
            line,
            reason: format!("expected 4 fields, found {}", fields.len()),
        });
    }
    let rating: f64 = fields[2].trim().parse().map_err(|_| Error::MalformedLine {
        line,
        reason: format!("bad rating {:?}", fields[2]),
    })?;
    let timestamp: i64 = fields[3].trim().parse().map_err(|_| Error::MalformedLine {
        line,
        reason: format!("bad timestamp {:?}", fields[3]),
    })?;
    Ok(RatingRecord {
        user_id: parse_id(fields[0], line, "user id")?,
        movie_id: parse_id(fields[1], line, "movie id")?,
        rating,
        timestamp,
    })
}
