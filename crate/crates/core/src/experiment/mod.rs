//! Reproduction harness: the worked example, risk and percentile surfaces,
//! population statistics, and per-solve / per-user reports.

mod example;
mod io;
mod population;
mod report;
mod surface;

pub use example::{
    example_view, run_example, Check, ExampleReport, Panel, EXAMPLE_P, EXAMPLE_Q,
    FACTOR_TOLERANCE, INTERIOR_CAPTION_R, INTERIOR_CAPTION_S, REFERENCE_TOLERANCE,
};
pub use io::{parse_pmf, read_pmf};
pub use population::{
    histogram, population_stats, Aggregates, read_histogram_csv, write_histogram_csv, HistogramBin,
    PopulationStats, Summary, UserFactors, LARGE_FACTOR,
};
pub use report::{
    parse_rates, solve_report, user_report, CertificateSummary, SolveReport, UserRateEntry,
    UserReport,
};
pub use surface::{
    percentile, percentile_surfaces, relative_reduction, risk_surface, user_reductions, Axis,
    GridSpec, SurfaceGrid,
};

use crate::error::{Error, Result};

/// Runs `f` on a dedicated pool of `jobs` threads, or the global pool.
pub fn with_jobs<T: Send>(jobs: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    match jobs {
        None => Ok(f()),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| Error::InvalidArgument(format!("thread pool: {e}")))?;
            Ok(pool.install(f))
        }
    }
}
