//! Genre histograms per user and the population profile.

use std::collections::BTreeMap;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::parse::{GenreVocabulary, MovieTable, RatingRecord};
use crate::error::{Error, Result};
use crate::profile::Pmf;

/// How a rating of a multi-genre movie is split across its genres.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GenreWeight {
    /// One count for every genre of the movie.
    #[default]
    Full,
    /// `1 / |genres|` for each genre.
    Fractional,
}

impl FromStr for GenreWeight {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "full" => Ok(Self::Full),
            "fractional" => Ok(Self::Fractional),
            other => Err(Error::InvalidArgument(format!(
                "unknown genre weight {other:?} (expected full or fractional)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProfileConfig {
    pub min_ratings: usize,
    /// Added to every genre count before normalizing.
    pub smoothing: f64,
    pub genre_weight: GenreWeight,
    /// Ignore ratings of movies missing from the movie table instead of failing.
    pub skip_unknown_movies: bool,
}

impl Default for ProfileConfig {
    fn default() -> Self {
        Self {
            min_ratings: 20,
            smoothing: 0.0,
            genre_weight: GenreWeight::Full,
            skip_unknown_movies: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UserProfile {
    pub user_id: u32,
    pub n_ratings: usize,
    pub counts: Vec<f64>,
    pub q: Pmf,
}

impl UserProfile {
    pub fn is_positive(&self) -> bool {
        self.q.is_strictly_positive()
    }
}

/// Profiles of every retained user, sorted by id, plus the population mean.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UserProfileSet {
    pub genres: GenreVocabulary,
    pub config: ProfileConfig,
    pub population: Pmf,
    pub users: Vec<UserProfile>,
}

impl UserProfileSet {
    pub fn total_users(&self) -> usize {
        self.users.len()
    }

    pub fn user(&self, user_id: u32) -> Result<&UserProfile> {
        self.users
            .binary_search_by_key(&user_id, |u| u.user_id)
            .map(|k| &self.users[k])
            .map_err(|_| Error::UserNotFound(user_id))
    }

    /// Users passing the positivity filter.
    pub fn eligible(&self) -> Result<Vec<&UserProfile>> {
        let ids = positivity_filter(self)?;
        Ok(self
            .users
            .iter()
            .filter(|u| ids.binary_search(&u.user_id).is_ok())
            .collect())
    }
}

/// Unweighted mean of user PMFs.
pub fn population_mean<'a>(profiles: impl IntoIterator<Item = &'a Pmf>) -> Result<Pmf> {
    let mut sum: Vec<f64> = Vec::new();
    let mut count = 0usize;
    for q in profiles {
        if sum.is_empty() {
            sum = vec![0.0; q.len()];
        }
        for (acc, x) in sum.iter_mut().zip(q.as_slice()) {
            *acc += x;
        }
        count += 1;
    }
    if count == 0 {
        return Err(Error::EmptyPopulation);
    }
    Pmf::new(sum.into_iter().map(|x| x / count as f64).collect())
}

/// Accumulates genre counts per user from a rating stream.
pub fn build_profiles<I>(
    ratings: I,
    movies: &MovieTable,
    vocab: &GenreVocabulary,
    config: &ProfileConfig,
) -> Result<UserProfileSet>
where
    I: IntoIterator<Item = Result<RatingRecord>>,
{
    if !(config.smoothing.is_finite() && config.smoothing >= 0.0) {
        return Err(Error::InvalidArgument(format!(
            "smoothing must be a nonnegative number, got {}",
            config.smoothing
        )));
    }
    let n = vocab.len();
    let mut acc: BTreeMap<u32, (usize, Vec<f64>)> = BTreeMap::new();
    for rec in ratings {
        let rec = rec?;
        let genres = match movies.get(rec.movie_id) {
            Some(g) => g,
            None if config.skip_unknown_movies => continue,
            None => {
                return Err(Error::UnknownMovie {
                    movie_id: rec.movie_id,
                })
            }
        };
        let entry = acc.entry(rec.user_id).or_insert_with(|| (0, vec![0.0; n]));
        entry.0 += 1;
        if genres.is_empty() {
            continue;
        }
        let w = match config.genre_weight {
            GenreWeight::Full => 1.0,
            GenreWeight::Fractional => 1.0 / genres.len() as f64,
        };
        for &g in genres {
            entry.1[g] += w;
        }
    }

    let mut users = Vec::with_capacity(acc.len());
    for (user_id, (n_ratings, counts)) in acc {
        if n_ratings < config.min_ratings {
            continue;
        }
        let weights: Vec<f64> = counts.iter().map(|c| c + config.smoothing).collect();
        // users whose movies carry no known genre have no profile
        let Ok(q) = Pmf::from_weights(&weights) else {
            continue;
        };
        users.push(UserProfile {
            user_id,
            n_ratings,
            counts,
            q,
        });
    }
    let population = population_mean(users.iter().map(|u| &u.q))?;
    Ok(UserProfileSet {
        genres: vocab.clone(),
        config: *config,
        population,
        users,
    })
}

/// Ids of users whose profile is strictly positive. Requires a strictly
/// positive population.
pub fn positivity_filter(set: &UserProfileSet) -> Result<Vec<u32>> {
    let zeros = set.population.zero_categories();
    if !zeros.is_empty() {
        return Err(Error::PopulationDegenerate { categories: zeros });
    }
    Ok(set
        .users
        .iter()
        .filter(|u| u.is_positive())
        .map(|u| u.user_id)
        .collect())
}
