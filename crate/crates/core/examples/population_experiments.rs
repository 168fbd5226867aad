//! Percentiles of the relative risk reduction and population statistics of
//! the decrement factors, over the eligible users of a profile store.
//!
//! cargo run --example population_experiments -- [STORE]
//! Without a store the bundled fixture is ingested first.

use std::path::PathBuf;

use fsprivacy::experiment::{percentile_surfaces, population_stats, GridSpec};
use fsprivacy::movielens::{ingest_files, load_store, GenreVocabulary, ProfileConfig, UnknownGenrePolicy};
use fsprivacy::InteriorPolicy;

fn main() -> fsprivacy::Result<()> {
    let set = match std::env::args().nth(1) {
        Some(path) => load_store(&PathBuf::from(path))?,
        None => {
            let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/movielens");
            ingest_files(
                &dir.join("movies.dat"),
                &dir.join("ratings.dat"),
                &GenreVocabulary::movielens(),
                UnknownGenrePolicy::Reject,
                &ProfileConfig::default(),
            )?
        }
    };
    let users = set.eligible()?;

    let spec: GridSpec = "rho:0:0.15:4,sigma:0:0.15:4".parse()?;
    let grids = percentile_surfaces(&users, &set.population, &spec, &[10.0, 50.0, 90.0], InteriorPolicy::ExactBudget)?;
    for g in &grids {
        println!("{}", g.meta);
        for (rho, row) in g.rho_axis.iter().zip(&g.values) {
            let cells: Vec<String> = row.iter().map(|v| format!("{v:6.1}")).collect();
            println!("  rho {rho:.2}: {}", cells.join(" "));
        }
    }

    let stats = population_stats(&users, &set.population)?;
    println!("\n{} eligible users, {} degenerate", stats.eligible_users, stats.degenerate_users);
    if let Some(a) = stats.aggregates {
        println!("mean rho_n {:.3}, mean sigma_1 {:.3}", a.rho_n.mean, a.sigma_1.mean);
        println!("delta_rho in [{:.2}, {:.2}], delta_sigma in [{:.2}, {:.2}]", a.delta_rho.min, a.delta_rho.max, a.delta_sigma.min, a.delta_sigma.max);
        println!("suppression reaches zero risk sooner for {:.1}% of users", 100.0 * a.frac_prefer_suppression);
    }
    Ok(())
}
