//! MovieLens ingestion: file parsers, per-user genre profiles, the
//! population profile, the positivity filter and the profile store.

mod parse;
mod profiles;
mod store;

pub use parse::{
    parse_movies, parse_ratings, GenreVocabulary, MovieTable, RatingReader, RatingRecord,
    UnknownGenrePolicy, MOVIELENS_GENRES,
};
pub use profiles::{
    build_profiles, population_mean, positivity_filter, GenreWeight, ProfileConfig, UserProfile,
    UserProfileSet,
};
pub use store::{load_store, read_store, save_store, write_store, STORE_SCHEMA};

use std::fs::File;
use std::io::BufReader;
use std::path::Path;

use crate::error::{Error, Result};

/// Reads `movies.dat` and `ratings.dat` from disk and builds the profiles.
pub fn ingest_files(
    movies: &Path,
    ratings: &Path,
    vocab: &GenreVocabulary,
    genre_policy: UnknownGenrePolicy,
    config: &ProfileConfig,
) -> Result<UserProfileSet> {
    let open = |p: &Path| File::open(p).map(BufReader::new).map_err(|e| Error::io(p, e));
    let table = parse_movies(open(movies)?, vocab, genre_policy)?;
    build_profiles(parse_ratings(open(ratings)?), &table, vocab, config)
}
