//! Optimality certificate for a candidate strategy.
//!
//! With `g_k = log2(t_k / p_k)`, a feasible strategy is optimal when every
//! forgery-receiving category shares one level `psi`, every suppressed
//! category shares one level `omega`, untouched categories sit in
//! `[psi, omega]` and `psi <= omega`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::profile::{CanonicalView, Strategy};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KktCertificate {
    pub psi: f64,
    pub omega: f64,
    pub g: Vec<f64>,
    pub max_violation: f64,
    pub valid: bool,
}

pub fn kkt_certificate(view: &CanonicalView, strat: &Strategy, tol: f64) -> Result<KktCertificate> {
    let u = strat
        .apparent_mass(view)
        .map_err(|e| Error::FeasibilityViolation(e.to_string()))?;
    let m = 1.0 + strat.rho() - strat.sigma();
    let p = view.p().as_slice();
    let g: Vec<f64> = u.iter().zip(p).map(|(uk, pk)| (uk / m / pk).log2()).collect();

    let forged: Vec<usize> = (0..g.len()).filter(|&k| strat.r()[k] > tol).collect();
    let suppressed: Vec<usize> = (0..g.len()).filter(|&k| strat.s()[k] > tol).collect();

    let max_of = |ks: &[usize]| ks.iter().map(|&k| g[k]).fold(f64::NEG_INFINITY, f64::max);
    let min_of = |ks: &[usize]| ks.iter().map(|&k| g[k]).fold(f64::INFINITY, f64::min);
    let all: Vec<usize> = (0..g.len()).collect();

    let psi = if forged.is_empty() { min_of(&all) } else { max_of(&forged) };
    let omega = if suppressed.is_empty() { max_of(&all) } else { min_of(&suppressed) };

    let mut worst: f64 = 0.0;
    let mut note = |v: f64| {
        let v = if v.is_nan() { f64::INFINITY } else { v };
        worst = worst.max(v);
    };
    if !forged.is_empty() {
        note(max_of(&forged) - min_of(&forged));
    }
    if !suppressed.is_empty() {
        note(max_of(&suppressed) - min_of(&suppressed));
    }
    for k in 0..g.len() {
        if strat.r()[k] <= tol && strat.s()[k] <= tol {
            note(psi - g[k]);
            note(g[k] - omega);
        }
    }
    note(psi - omega);

    Ok(KktCertificate {
        psi,
        omega,
        g,
        max_violation: worst,
        valid: worst <= tol,
    })
}
