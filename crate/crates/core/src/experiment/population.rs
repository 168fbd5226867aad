//! Per-user decrement factors and pure-strategy rates across a population.

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analysis::{low_rate_report, pure_strategy_report};
use crate::error::{Error, Result};
use crate::movielens::UserProfile;
use crate::profile::{canonicalize, Pmf};

/// Factor threshold used for the "large factor" fractions.
pub const LARGE_FACTOR: f64 = 30.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UserFactors {
    pub user_id: u32,
    pub initial_risk: f64,
    pub delta_rho: f64,
    pub delta_sigma: f64,
    pub rho_n: f64,
    pub sigma_1: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub min: f64,
    pub max: f64,
    pub mean: f64,
}

impl Summary {
    fn of(values: impl Iterator<Item = f64> + Clone) -> Summary {
        let n = values.clone().count();
        let min = values.clone().fold(f64::INFINITY, f64::min);
        let max = values.clone().fold(f64::NEG_INFINITY, f64::max);
        let mean = values.sum::<f64>() / n as f64;
        Summary { min, max, mean }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PopulationStats {
    pub users: Vec<UserFactors>,
    /// Users considered (positivity-eligible).
    pub eligible_users: usize,
    /// Users with `q = p`, left out of `users` and the aggregates.
    pub degenerate_users: usize,
    /// `None` when every eligible user is degenerate.
    pub aggregates: Option<Aggregates>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Aggregates {
    pub initial_risk: Summary,
    pub delta_rho: Summary,
    pub delta_sigma: Summary,
    pub rho_n: Summary,
    pub sigma_1: Summary,
    pub frac_delta_rho_gt_delta_sigma: f64,
    pub frac_delta_rho_large: f64,
    pub frac_delta_sigma_large: f64,
    /// Fraction with `sigma_1 < rho_n`: suppression reaches zero risk sooner.
    pub frac_prefer_suppression: f64,
}

impl Aggregates {
    fn of(stats: &[UserFactors]) -> Option<Aggregates> {
        if stats.is_empty() {
            return None;
        }
        let n = stats.len() as f64;
        let frac = |pred: &dyn Fn(&UserFactors) -> bool| stats.iter().filter(|u| pred(u)).count() as f64 / n;
        Some(Aggregates {
            initial_risk: Summary::of(stats.iter().map(|u| u.initial_risk)),
            delta_rho: Summary::of(stats.iter().map(|u| u.delta_rho)),
            delta_sigma: Summary::of(stats.iter().map(|u| u.delta_sigma)),
            rho_n: Summary::of(stats.iter().map(|u| u.rho_n)),
            sigma_1: Summary::of(stats.iter().map(|u| u.sigma_1)),
            frac_delta_rho_gt_delta_sigma: frac(&|u| u.delta_rho > u.delta_sigma),
            frac_delta_rho_large: frac(&|u| u.delta_rho >= LARGE_FACTOR),
            frac_delta_sigma_large: frac(&|u| u.delta_sigma >= LARGE_FACTOR),
            frac_prefer_suppression: frac(&|u| u.sigma_1 < u.rho_n),
        })
    }
}

pub fn population_stats(users: &[&UserProfile], population: &Pmf) -> Result<PopulationStats> {
    if users.is_empty() {
        return Err(Error::EmptyPopulation);
    }
    let per_user: Vec<Option<UserFactors>> = users
        .par_iter()
        .map(|u| {
            let view = canonicalize(&u.q, population)?;
            let low = match low_rate_report(&view) {
                Ok(l) => l,
                Err(Error::DegenerateInput(_)) => return Ok(None),
                Err(e) => return Err(e),
            };
            let pure = pure_strategy_report(&view)?;
            Ok(Some(UserFactors {
                user_id: u.user_id,
                initial_risk: low.initial_risk,
                delta_rho: low.delta_rho,
                delta_sigma: low.delta_sigma,
                rho_n: pure.rho_crit_pure,
                sigma_1: pure.sigma_crit_pure,
            }))
        })
        .collect::<Result<_>>()?;
    let degenerate_users = per_user.iter().filter(|u| u.is_none()).count();
    let stats: Vec<UserFactors> = per_user.into_iter().flatten().collect();
    Ok(PopulationStats {
        eligible_users: users.len(),
        degenerate_users,
        aggregates: Aggregates::of(&stats),
        users: stats,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HistogramBin {
    pub bin_lo: f64,
    pub bin_hi: f64,
    pub count: usize,
    pub fraction: f64,
}

/// Fixed-width histogram with bins aligned to multiples of `width`.
pub fn histogram(values: &[f64], width: f64) -> Result<Vec<HistogramBin>> {
    if !(width > 0.0 && width.is_finite()) {
        return Err(Error::InvalidArgument(format!("bin width {width} must be positive")));
    }
    if values.is_empty() {
        return Ok(Vec::new());
    }
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let first = (min / width).floor() as i64;
    let last = (max / width).floor() as i64;
    let mut counts = vec![0usize; (last - first + 1) as usize];
    let top = counts.len() - 1;
    for &v in values {
        let b = ((v / width).floor() as i64 - first) as usize;
        counts[b.min(top)] += 1;
    }
    let total = values.len() as f64;
    Ok(counts
        .into_iter()
        .enumerate()
        .map(|(k, count)| {
            let lo = (first + k as i64) as f64 * width;
            HistogramBin {
                bin_lo: lo,
                bin_hi: lo + width,
                count,
                fraction: count as f64 / total,
            }
        })
        .collect())
}

pub fn write_histogram_csv<W: Write>(bins: &[HistogramBin], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for b in bins {
        w.serialize(b)?;
    }
    w.flush().map_err(|e| Error::io("<csv>", e))
}

pub fn read_histogram_csv<R: std::io::Read>(source: R) -> Result<Vec<HistogramBin>> {
    let mut r = csv::Reader::from_reader(source);
    r.deserialize().map(|row| Ok(row?)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn user(id: u32, q: &[f64]) -> UserProfile {
        UserProfile {
            user_id: id,
            n_ratings: 20,
            counts: q.to_vec(),
            q: Pmf::new(q.to_vec()).unwrap(),
        }
    }

    #[test]
    fn degenerate_user_is_counted_separately() {
        let p = Pmf::new(vec![0.4, 0.6]).unwrap();
        let users = [user(1, &[0.4, 0.6]), user(2, &[0.2, 0.8])];
        let refs: Vec<&UserProfile> = users.iter().collect();
        let stats = population_stats(&refs, &p).unwrap();
        assert_eq!(stats.degenerate_users, 1);
        assert_eq!(stats.users.len(), 1);
        assert_eq!(stats.users[0].user_id, 2);
        let agg = stats.aggregates.unwrap();
        assert!((agg.rho_n.mean - 1.0 / 3.0).abs() < 1e-12);
        assert!((agg.sigma_1.mean - 0.5).abs() < 1e-12);
        assert_eq!(agg.frac_prefer_suppression, 0.0);

        let only = [user(1, &[0.4, 0.6])];
        let refs: Vec<&UserProfile> = only.iter().collect();
        let stats = population_stats(&refs, &p).unwrap();
        assert_eq!((stats.eligible_users, stats.degenerate_users), (1, 1));
        assert!(stats.users.is_empty() && stats.aggregates.is_none());
        assert!(matches!(population_stats(&[], &p), Err(Error::EmptyPopulation)));
    }

    #[test]
    fn summaries_are_ordered() {
        let p = Pmf::new(vec![0.3, 0.3, 0.4]).unwrap();
        let users = [
            user(1, &[0.2, 0.3, 0.5]),
            user(2, &[0.4, 0.4, 0.2]),
            user(3, &[0.1, 0.6, 0.3]),
        ];
        let refs: Vec<&UserProfile> = users.iter().collect();
        let s = population_stats(&refs, &p).unwrap().aggregates.unwrap();
        for sum in [s.delta_rho, s.delta_sigma, s.rho_n, s.sigma_1, s.initial_risk] {
            assert!(sum.min <= sum.mean && sum.mean <= sum.max);
        }
        assert!(s.delta_rho.min > 1.0 && s.delta_sigma.min > 0.0);
        for f in [s.frac_delta_rho_gt_delta_sigma, s.frac_prefer_suppression] {
            assert!((0.0..=1.0).contains(&f));
        }
    }

    #[test]
    fn histogram_bins() {
        let bins = histogram(&[0.05, 0.15, 0.15, 0.35], 0.1).unwrap();
        assert_eq!(bins.len(), 4);
        assert_eq!(bins.iter().map(|b| b.count).collect::<Vec<_>>(), vec![1, 2, 0, 1]);
        assert!((bins.iter().map(|b| b.fraction).sum::<f64>() - 1.0).abs() < 1e-12);
        let mut buf = Vec::new();
        write_histogram_csv(&bins, &mut buf).unwrap();
        assert!(String::from_utf8(buf.clone()).unwrap().starts_with("bin_lo,bin_hi,count,fraction\n"));
        assert_eq!(read_histogram_csv(buf.as_slice()).unwrap(), bins);
        assert!(histogram(&[1.0], 0.0).is_err());
    }
}
