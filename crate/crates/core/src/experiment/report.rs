//! JSON/CSV reports for single solves and single users.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::movielens::UserProfileSet;
use crate::profile::{canonicalize, CanonicalView, Pmf};
use crate::solver::{kkt_certificate, InteriorPolicy, RegionKind, Solution, Solver};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertificateSummary {
    pub valid: bool,
    pub max_violation: f64,
    pub psi: f64,
    pub omega: f64,
}

/// A solution with every vector in the caller's category order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub rho: f64,
    pub sigma: f64,
    pub policy: InteriorPolicy,
    pub region: RegionKind,
    /// Number of forgery-receiving categories in canonical order.
    pub i: usize,
    /// First suppressed canonical category (1-based).
    pub j: usize,
    pub rho_crit: f64,
    pub critical_fraction: f64,
    pub initial_risk: f64,
    pub risk: f64,
    pub phi: f64,
    pub chi: f64,
    pub unused_forgery: f64,
    pub already_critical: bool,
    /// `canonical_order[k]` is the original index of canonical category `k + 1`.
    pub canonical_order: Vec<usize>,
    pub q: Vec<f64>,
    pub p: Vec<f64>,
    pub r: Vec<f64>,
    pub s: Vec<f64>,
    pub t: Vec<f64>,
    pub certificate: CertificateSummary,
}

pub fn solve_report(q: &Pmf, p: &Pmf, rho: f64, sigma: f64, policy: InteriorPolicy) -> Result<SolveReport> {
    let view = canonicalize(q, p)?;
    let solver = Solver::new(view);
    let sol = solver.solve(rho, sigma, policy)?;
    let view = solver.view();
    let cert = kkt_certificate(view, &sol.strategy, 1e-8)?;
    Ok(SolveReport {
        rho,
        sigma,
        policy,
        region: sol.region.kind,
        i: sol.region.i,
        j: sol.region.j,
        rho_crit: sol.region.rho_crit,
        critical_fraction: sol.critical_fraction(),
        initial_risk: solver.solve(0.0, 0.0, policy)?.risk,
        risk: sol.risk,
        phi: sol.phi,
        chi: sol.chi,
        unused_forgery: sol.unused_forgery,
        already_critical: sol.already_critical,
        canonical_order: view.permutation().to_vec(),
        q: q.as_slice().to_vec(),
        p: p.as_slice().to_vec(),
        r: view.to_original(sol.strategy.r()),
        s: view.to_original(sol.strategy.s()),
        t: view.to_original(sol.t.as_slice()),
        certificate: CertificateSummary {
            valid: cert.valid,
            max_violation: cert.max_violation,
            psi: cert.psi,
            omega: cert.omega,
        },
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct CategoryRow {
    category: usize,
    q: f64,
    p: f64,
    r: f64,
    s: f64,
    t: f64,
}

impl SolveReport {
    /// One row per category: `category,q,p,r,s,t`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        for k in 0..self.q.len() {
            w.serialize(CategoryRow {
                category: k,
                q: self.q[k],
                p: self.p[k],
                r: self.r[k],
                s: self.s[k],
                t: self.t[k],
            })?;
        }
        w.flush().map_err(|e| Error::io("<csv>", e))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UserRateEntry {
    pub rho: f64,
    pub sigma: f64,
    pub region: RegionKind,
    pub critical_fraction: f64,
    pub risk: f64,
    /// `risk / initial_risk`.
    pub relative_risk: f64,
    pub phi: f64,
    pub chi: f64,
    pub r: Vec<f64>,
    pub s: Vec<f64>,
    pub t: Vec<f64>,
    /// `t_k / p_k`.
    pub t_over_p: Vec<f64>,
}

/// Solutions for one user; vectors are in canonical order, labeled by `genres`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UserReport {
    pub user_id: u32,
    pub n_ratings: usize,
    pub initial_risk: f64,
    pub genres: Vec<String>,
    pub q: Vec<f64>,
    pub p: Vec<f64>,
    pub entries: Vec<UserRateEntry>,
}

fn entry(view: &CanonicalView, sol: &Solution, initial: f64) -> UserRateEntry {
    UserRateEntry {
        rho: sol.rho,
        sigma: sol.sigma,
        region: sol.region.kind,
        critical_fraction: sol.critical_fraction(),
        risk: sol.risk,
        relative_risk: if initial > 0.0 { sol.risk / initial } else { 0.0 },
        phi: sol.phi,
        chi: sol.chi,
        r: sol.strategy.r().to_vec(),
        s: sol.strategy.s().to_vec(),
        t: sol.t.as_slice().to_vec(),
        t_over_p: sol.ratio_to_population(view),
    }
}

pub fn user_report(
    set: &UserProfileSet,
    user_id: u32,
    rates: &[(f64, f64)],
    policy: InteriorPolicy,
) -> Result<UserReport> {
    let user = set.user(user_id)?;
    let view = canonicalize(&user.q, &set.population)?;
    let solver = Solver::new(view);
    let view = solver.view();
    let initial = solver.solve(0.0, 0.0, policy)?.risk;
    let entries = rates
        .iter()
        .map(|&(rho, sigma)| Ok(entry(view, &solver.solve(rho, sigma, policy)?, initial)))
        .collect::<Result<Vec<_>>>()?;
    Ok(UserReport {
        user_id,
        n_ratings: user.n_ratings,
        initial_risk: initial,
        genres: view
            .permutation()
            .iter()
            .map(|&k| set.genres.names()[k].clone())
            .collect(),
        q: view.q().as_slice().to_vec(),
        p: view.p().as_slice().to_vec(),
        entries,
    })
}

/// Parses `RHO:SIGMA,RHO:SIGMA,...`.
pub fn parse_rates(text: &str) -> Result<Vec<(f64, f64)>> {
    text.split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|pair| {
            let bad = || Error::InvalidArgument(format!("rate pair {pair:?} should be RHO:SIGMA"));
            let (a, b) = pair.trim().split_once(':').ok_or_else(bad)?;
            Ok((a.parse().map_err(|_| bad())?, b.parse().map_err(|_| bad())?))
        })
        .collect()
}
