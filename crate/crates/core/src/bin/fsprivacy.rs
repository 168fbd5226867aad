use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use fsprivacy::experiment::{
    histogram, parse_rates, percentile_surfaces, population_stats, read_pmf, risk_surface,
    run_example, solve_report, user_report, with_jobs, write_histogram_csv, GridSpec,
    SurfaceGrid,
};
use fsprivacy::movielens::{
    ingest_files, load_store, save_store, GenreVocabulary, GenreWeight, ProfileConfig,
    UnknownGenrePolicy,
};
use fsprivacy::{canonicalize, Error, InteriorPolicy, Result, Solver};

#[derive(Parser)]
#[command(name = "fsprivacy", version, about = "Optimal forgery and suppression of ratings against profile-based privacy attacks")]
struct Cli {
    /// Worker threads for per-user computations (default: all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Args)]
struct PolicyArg {
    /// What to do with forgery budget beyond the critical line.
    #[arg(long, default_value = "exact")]
    interior_policy: InteriorPolicy,
}

#[derive(Subcommand)]
enum Command {
    /// Run the three-category worked example and check it against the reference values.
    Example,
    /// Solve one instance given q and p files (JSON array or one CSV column).
    Solve {
        q: PathBuf,
        p: PathBuf,
        #[arg(long)]
        rho: f64,
        #[arg(long)]
        sigma: f64,
        #[command(flatten)]
        policy: PolicyArg,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
    },
    /// Risk over a (rho, sigma) grid as CSV.
    Surface {
        q: PathBuf,
        p: PathBuf,
        /// rho:LO:HI:N,sigma:LO:HI:N
        #[arg(long)]
        grid: GridSpec,
        #[command(flatten)]
        policy: PolicyArg,
        #[arg(long, value_enum, default_value = "csv")]
        format: Format,
    },
    /// Percentile surfaces of the relative risk reduction over a profile store.
    Percentiles {
        store: PathBuf,
        /// Defaults to rho:0:0.3:31,sigma:0:0.3:31.
        #[arg(long)]
        grid: Option<GridSpec>,
        #[arg(long, value_delimiter = ',', default_value = "10,50,90")]
        percentiles: Vec<f64>,
        #[command(flatten)]
        policy: PolicyArg,
        #[arg(long, value_enum, default_value = "csv")]
        format: Format,
        /// Write one `percentile_<P>.csv` per percentile here instead of stdout.
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
    /// Decrement factors and pure-strategy critical rates over a profile store.
    PopulationStats {
        store: PathBuf,
        /// Write histogram CSVs for the factors and critical rates here.
        #[arg(long)]
        hist_dir: Option<PathBuf>,
        #[arg(long, default_value_t = 0.1)]
        bin_width: f64,
    },
    /// Solutions for one user at a list of rates.
    UserReport {
        store: PathBuf,
        user: u32,
        /// RHO:SIGMA,RHO:SIGMA,...
        #[arg(long, default_value = "0.03:0.04,0.06:0.08,0.11:0.12,0.18:0.15")]
        rates: String,
        #[command(flatten)]
        policy: PolicyArg,
    },
    /// Build a profile store from MovieLens movies.dat and ratings.dat.
    Ingest {
        movies: PathBuf,
        ratings: PathBuf,
        /// Output profile store (JSON lines).
        #[arg(long, short)]
        output: PathBuf,
        #[arg(long, default_value = "full")]
        genre_weight: GenreWeight,
        #[arg(long, default_value_t = 0.0)]
        smoothing: f64,
        #[arg(long, default_value_t = 20)]
        min_ratings: usize,
        #[arg(long)]
        ignore_unknown_genres: bool,
        #[arg(long)]
        ignore_unknown_movies: bool,
    },
}

fn stdout() -> BufWriter<io::StdoutLock<'static>> {
    BufWriter::new(io::stdout().lock())
}

fn print_json<T: serde::Serialize>(value: &T) -> Result<()> {
    let mut out = stdout();
    serde_json::to_writer_pretty(&mut out, value)?;
    writeln!(out).and_then(|_| out.flush()).map_err(|e| Error::Io { path: "<stdout>".into(), source: e })
}

fn print_surfaces(grids: &[SurfaceGrid], format: Format) -> Result<()> {
    match format {
        Format::Json if grids.len() == 1 => print_json(&grids[0]),
        Format::Json => print_json(&grids),
        Format::Csv => {
            let mut out = stdout();
            for g in grids {
                g.write_csv(&mut out)?;
            }
            out.flush().map_err(|e| Error::Io { path: "<stdout>".into(), source: e })
        }
    }
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| Error::Io { path: path.into(), source: e })
}

fn run(cli: Cli) -> Result<()> {
    let jobs = cli.jobs;
    match cli.command {
        Command::Example => {
            let report = run_example()?;
            print!("{}", report.render());
            report.verify()
        }
        Command::Solve { q, p, rho, sigma, policy, format } => {
            let rep = solve_report(&read_pmf(&q)?, &read_pmf(&p)?, rho, sigma, policy.interior_policy)?;
            match format {
                Format::Json => print_json(&rep),
                Format::Csv => rep.write_csv(stdout()),
            }
        }
        Command::Surface { q, p, grid, policy, format } => {
            let solver = Solver::new(canonicalize(&read_pmf(&q)?, &read_pmf(&p)?)?);
            let mut surface = risk_surface(&solver, &grid, policy.interior_policy)?;
            surface.meta = format!("risk [bits] q={} p={}", q.display(), p.display());
            print_surfaces(&[surface], format)
        }
        Command::Percentiles { store, grid, percentiles, policy, format, out_dir } => {
            let set = load_store(&store)?;
            let users = set.eligible()?;
            let grid = grid.unwrap_or_else(GridSpec::percentile_default);
            let grids = with_jobs(jobs, || {
                percentile_surfaces(&users, &set.population, &grid, &percentiles, policy.interior_policy)
            })??;
            match out_dir {
                None => print_surfaces(&grids, format),
                Some(dir) => {
                    fs::create_dir_all(&dir).map_err(|e| Error::Io { path: dir.clone(), source: e })?;
                    for (g, pct) in grids.iter().zip(&percentiles) {
                        g.write_csv(create(&dir.join(format!("percentile_{pct}.csv")))?)?;
                    }
                    Ok(())
                }
            }
        }
        Command::PopulationStats { store, hist_dir, bin_width } => {
            let set = load_store(&store)?;
            let users = set.eligible()?;
            let stats = with_jobs(jobs, || population_stats(&users, &set.population))??;
            if let Some(dir) = hist_dir {
                fs::create_dir_all(&dir).map_err(|e| Error::Io { path: dir.clone(), source: e })?;
                let columns: [(&str, fn(&fsprivacy::experiment::UserFactors) -> f64); 4] = [
                    ("delta_rho", |u| u.delta_rho),
                    ("delta_sigma", |u| u.delta_sigma),
                    ("rho_n", |u| u.rho_n),
                    ("sigma_1", |u| u.sigma_1),
                ];
                for (name, get) in columns {
                    let values: Vec<f64> = stats.users.iter().map(get).collect();
                    write_histogram_csv(&histogram(&values, bin_width)?, create(&dir.join(format!("{name}.csv")))?)?;
                }
            }
            print_json(&stats)
        }
        Command::UserReport { store, user, rates, policy } => {
            let set = load_store(&store)?;
            print_json(&user_report(&set, user, &parse_rates(&rates)?, policy.interior_policy)?)
        }
        Command::Ingest {
            movies,
            ratings,
            output,
            genre_weight,
            smoothing,
            min_ratings,
            ignore_unknown_genres,
            ignore_unknown_movies,
        } => {
            let config = ProfileConfig {
                min_ratings,
                smoothing,
                genre_weight,
                skip_unknown_movies: ignore_unknown_movies,
            };
            let policy = if ignore_unknown_genres {
                UnknownGenrePolicy::Skip
            } else {
                UnknownGenrePolicy::Reject
            };
            let set = ingest_files(&movies, &ratings, &GenreVocabulary::movielens(), policy, &config)?;
            save_store(&set, &output)?;
            eprintln!(
                "{} users with at least {} ratings, {} positivity-eligible",
                set.total_users(),
                min_ratings,
                set.eligible().map(|u| u.len()).unwrap_or(0)
            );
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
