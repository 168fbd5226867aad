//! Forgery and suppression thresholds, the critical line, and region
//! classification for a few rate pairs.
//!
//! cargo run --example thresholds_and_regions

use fsprivacy::solver::{critical_fraction, critical_rho, thresholds};
use fsprivacy::{canonicalize, Pmf};

fn main() -> fsprivacy::Result<()> {
    let q = Pmf::new(vec![0.10, 0.15, 0.20, 0.25, 0.30])?;
    let p = Pmf::new(vec![0.25, 0.20, 0.20, 0.20, 0.15])?;
    let view = canonicalize(&q, &p)?;
    let table = thresholds(&view);

    println!("ratios q/p (canonical): {:?}", view.ratios());
    println!("rho_i:   {:?}", table.rho_thresholds());
    println!("sigma_j: {:?}", table.sigma_thresholds());
    for (k, line) in table.lines().iter().enumerate() {
        println!("critical segment {}: rho = {:.4} sigma + {:.4}", k + 2, line.slope, line.intercept);
    }

    println!("\n sigma  rho_crit");
    for k in 0..=8 {
        let sigma = 0.1 * k as f64;
        println!("{sigma:6.2}  {:.4}", critical_rho(&table, sigma)?);
    }

    println!("\n   rho  sigma  region             rho/rho_crit");
    for (rho, sigma) in [(0.0, 0.0), (0.1, 0.1), (0.3, 0.2), (0.9, 0.1), (0.0, 0.7)] {
        let class = fsprivacy::classify(&table, rho, sigma)?;
        let frac = critical_fraction(&table, rho, sigma)?;
        println!("{rho:6.2} {sigma:6.2}  {:<18} {frac:.3}", class.kind.to_string());
    }
    Ok(())
}
