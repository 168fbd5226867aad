//! JSON-lines profile store.
//!
//! ```text
//! {"kind":"header","schema":"profile-store/v1","genres":[...],"config":{...}}
//! {"kind":"population","p":[...]}
//! {"kind":"user","user_id":1,"n_ratings":45,"counts":[...],"q":[...]}
//! ...
//! ```

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::parse::GenreVocabulary;
use super::profiles::{ProfileConfig, UserProfile, UserProfileSet};
use crate::error::{Error, Result};
use crate::profile::Pmf;

pub const STORE_SCHEMA: &str = "profile-store/v1";

#[derive(Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
enum StoreLine {
    Header {
        schema: String,
        genres: GenreVocabulary,
        config: ProfileConfig,
    },
    Population {
        p: Pmf,
    },
    User(UserProfile),
}

pub fn write_store<W: Write>(set: &UserProfileSet, mut out: W) -> Result<()> {
    let mut emit = |line: &StoreLine| -> Result<()> {
        serde_json::to_writer(&mut out, line)?;
        out.write_all(b"\n").map_err(|e| Error::io("<store>", e))
    };
    emit(&StoreLine::Header {
        schema: STORE_SCHEMA.to_string(),
        genres: set.genres.clone(),
        config: set.config,
    })?;
    emit(&StoreLine::Population {
        p: set.population.clone(),
    })?;
    for user in &set.users {
        emit(&StoreLine::User(user.clone()))?;
    }
    out.flush().map_err(|e| Error::io("<store>", e))
}

pub fn read_store<R: BufRead>(source: R) -> Result<UserProfileSet> {
    let mut header = None;
    let mut population = None;
    let mut users = Vec::new();
    for (k, line) in source.lines().enumerate() {
        let line_no = k + 1;
        let line = line.map_err(|e| Error::io("<store>", e))?;
        if line.trim().is_empty() {
            continue;
        }
        let parsed: StoreLine = serde_json::from_str(&line).map_err(|e| Error::MalformedLine {
            line: line_no,
            reason: e.to_string(),
        })?;
        match parsed {
            StoreLine::Header {
                schema,
                genres,
                config,
            } => {
                if schema != STORE_SCHEMA {
                    return Err(Error::MalformedLine {
                        line: line_no,
                        reason: format!("unsupported schema {schema:?}"),
                    });
                }
                header = Some((genres, config));
            }
            StoreLine::Population { p } => population = Some(p),
            StoreLine::User(u) => users.push(u),
        }
    }
    let missing = |what: &str| Error::MalformedLine {
        line: 0,
        reason: format!("profile store has no {what} line"),
    };
    let (genres, config) = header.ok_or_else(|| missing("header"))?;
    let population = population.ok_or_else(|| missing("population"))?;
    let n = genres.len();
    if population.len() != n {
        return Err(Error::DimensionMismatch {
            left: population.len(),
            right: n,
        });
    }
    if let Some(u) = users.iter().find(|u| u.q.len() != n || u.counts.len() != n) {
        return Err(Error::DimensionMismatch {
            left: u.q.len(),
            right: n,
        });
    }
    users.sort_by_key(|u| u.user_id);
    Ok(UserProfileSet {
        genres,
        config,
        population,
        users,
    })
}

pub fn save_store(set: &UserProfileSet, path: &Path) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    write_store(set, BufWriter::new(file)).map_err(|e| match e {
        Error::Io { source, .. } => Error::io(path, source),
        other => other,
    })
}

pub fn load_store(path: &Path) -> Result<UserProfileSet> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_store(BufReader::new(file))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::movielens::profiles::GenreWeight;

    fn sample() -> UserProfileSet {
        let q1 = Pmf::from_weights(&[1.0, 2.0, 4.0]).unwrap();
        let q2 = Pmf::from_weights(&[3.0, 3.0, 1.0]).unwrap();
        let p = crate::movielens::population_mean([&q1, &q2]).unwrap();
        UserProfileSet {
            genres: GenreVocabulary::new(["A", "B", "C"]).unwrap(),
            config: ProfileConfig {
                min_ratings: 3,
                smoothing: 0.1,
                genre_weight: GenreWeight::Fractional,
                skip_unknown_movies: false,
            },
            population: p,
            users: vec![
                UserProfile {
                    user_id: 4,
                    n_ratings: 7,
                    counts: vec![1.0, 2.0, 4.0],
                    q: q1,
                },
                UserProfile {
                    user_id: 9,
                    n_ratings: 5,
                    counts: vec![3.0, 3.0, 1.0],
                    q: q2,
                },
            ],
        }
    }

    #[test]
    fn roundtrip_is_exact() {
        let set = sample();
        let mut buf = Vec::new();
        write_store(&set, &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("{\"kind\":\"header\",\"schema\":\"profile-store/v1\""));
        assert_eq!(text.lines().count(), 4);
        let back = read_store(buf.as_slice()).unwrap();
        assert_eq!(back, set);
    }

    #[test]
    fn rejects_bad_stores() {
        let err = read_store("{\"kind\":\"population\",\"p\":[0.5,0.5]}\n".as_bytes());
        assert!(matches!(err, Err(Error::MalformedLine { .. })));
        let err = read_store("not json\n".as_bytes());
        assert!(matches!(err, Err(Error::MalformedLine { line: 1, .. })));
        let mut buf = Vec::new();
        write_store(&sample(), &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap().replace("profile-store/v1", "v0");
        assert!(read_store(text.as_bytes()).is_err());
    }
}
