//! Build genre profiles from MovieLens-format files and save a profile store.
//!
//! cargo run --example movielens_ingest -- [DIR]
//! DIR holds movies.dat and ratings.dat; defaults to the bundled fixture.

use std::path::PathBuf;

use fsprivacy::movielens::{
    ingest_files, load_store, save_store, GenreVocabulary, ProfileConfig, UnknownGenrePolicy,
};

fn main() -> fsprivacy::Result<()> {
    let dir = std::env::args().nth(1).map(PathBuf::from).unwrap_or_else(|| {
        PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/movielens")
    });
    let vocab = GenreVocabulary::movielens();
    let set = ingest_files(
        &dir.join("movies.dat"),
        &dir.join("ratings.dat"),
        &vocab,
        UnknownGenrePolicy::Skip,
        &ProfileConfig::default(),
    )?;
    let eligible = set.eligible()?;
    println!("{} users kept, {} with every genre rated", set.total_users(), eligible.len());
    for (name, p) in vocab.names().iter().zip(set.population.as_slice()) {
        println!("  {name:<12} {p:.4}");
    }

    let path = std::env::temp_dir().join("fsprivacy-profiles.jsonl");
    save_store(&set, &path)?;
    assert_eq!(load_store(&path)?, set);
    println!("store written to {}", path.display());
    Ok(())
}
