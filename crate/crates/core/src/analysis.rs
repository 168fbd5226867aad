//! Behaviour near the origin and the pure-strategy comparison.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::profile::{kl_divergence, CanonicalView};
use crate::solver::{InteriorPolicy, Solver};

/// Divergences at or below this are treated as `q = p`.
pub const DEGENERATE_DIVERGENCE: f64 = 1e-12;

/// Gradient of the minimal risk at the origin and the relative decrement
/// factors derived from it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LowRateReport {
    pub initial_risk: f64,
    pub grad_rho: f64,
    pub grad_sigma: f64,
    pub delta_rho: f64,
    pub delta_sigma: f64,
}

fn initial_risk(view: &CanonicalView) -> Result<f64> {
    let d = kl_divergence(view.q(), view.p())?;
    if d <= DEGENERATE_DIVERGENCE {
        return Err(Error::DegenerateInput(format!(
            "D(q||p) = {d:e}, profile already matches the population"
        )));
    }
    Ok(d)
}

pub fn low_rate_report(view: &CanonicalView) -> Result<LowRateReport> {
    let d = initial_risk(view)?;
    let low = view.ratios()[0].log2();
    let high = view.ratios()[view.n() - 1].log2();
    Ok(LowRateReport {
        initial_risk: d,
        grad_rho: low - d,
        grad_sigma: d - high,
        delta_rho: 1.0 - low / d,
        delta_sigma: high / d - 1.0,
    })
}

/// First-order model `D (1 - delta_rho rho - delta_sigma sigma)`, floored at 0.
pub fn taylor_risk(view: &CanonicalView, rho: f64, sigma: f64) -> Result<f64> {
    let rep = low_rate_report(view)?;
    Ok((rep.initial_risk * (1.0 - rep.delta_rho * rho - rep.delta_sigma * sigma)).max(0.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PureStrategyReport {
    /// Forgery alone reaches zero risk at `q_n / p_n - 1`.
    pub rho_crit_pure: f64,
    /// Suppression alone reaches zero risk at `1 - q_1 / p_1`.
    pub sigma_crit_pure: f64,
    pub prefer_forgery_for_critical: bool,
    pub prefer_forgery_low_rate: bool,
    pub arith_mean: f64,
    pub geom_mean: f64,
    /// `2^D(q||p)`, compared against `geom_mean`.
    pub exp_divergence: f64,
}

pub fn pure_strategy_report(view: &CanonicalView) -> Result<PureStrategyReport> {
    let rep = low_rate_report(view)?;
    let low = view.ratios()[0];
    let high = view.ratios()[view.n() - 1];
    let rho_crit_pure = high - 1.0;
    let sigma_crit_pure = 1.0 - low;
    Ok(PureStrategyReport {
        rho_crit_pure,
        sigma_crit_pure,
        prefer_forgery_for_critical: rho_crit_pure < sigma_crit_pure,
        prefer_forgery_low_rate: rep.delta_rho > rep.delta_sigma,
        arith_mean: 0.5 * (low + high),
        geom_mean: (low * high).sqrt(),
        exp_divergence: rep.initial_risk.exp2(),
    })
}

/// One-sided second-order differences of the closed-form risk at the origin,
/// `(-3 R(0) + 4 R(h) - R(2h)) / 2h` along each axis. The origin is a corner
/// of the domain, so central differences are not available.
pub fn numerical_gradient(solver: &Solver, h: f64) -> Result<(f64, f64)> {
    let risk = |rho: f64, sigma: f64| -> Result<f64> {
        Ok(solver.solve(rho, sigma, InteriorPolicy::ExactBudget)?.risk)
    };
    let r0 = risk(0.0, 0.0)?;
    let d_rho = (-3.0 * r0 + 4.0 * risk(h, 0.0)? - risk(2.0 * h, 0.0)?) / (2.0 * h);
    let d_sigma = (-3.0 * r0 + 4.0 * risk(0.0, h)? - risk(0.0, 2.0 * h)?) / (2.0 * h);
    Ok((d_rho, d_sigma))
}
