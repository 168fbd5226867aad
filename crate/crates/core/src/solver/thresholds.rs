//! Forgery/suppression thresholds, the critical line and region classification.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::profile::CanonicalView;

/// Distance from the critical line below which a point counts as on it.
pub const BOUNDARY_TOLERANCE: f64 = 1e-9;

/// One affine piece `rho = slope * sigma + intercept` of the critical line.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CriticalLine {
    pub slope: f64,
    pub intercept: f64,
}

impl CriticalLine {
    pub fn at(&self, sigma: f64) -> f64 {
        self.slope * sigma + self.intercept
    }
}

/// Thresholds of a canonical view. All indices are 1-based, as in the
/// closed-form expressions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdTable {
    n: usize,
    // rho[i - 1] = rho_i
    rho: Vec<f64>,
    // sigma[j] = sigma_j for j = 0..=n, sigma[0] = 1
    sigma: Vec<f64>,
    // lines[j - 2] for j = 2..=n
    lines: Vec<CriticalLine>,
}

impl ThresholdTable {
    pub fn n(&self) -> usize {
        self.n
    }

    /// `rho_i` for `i` in `1..=n`; `rho_{n+1}` is `+inf`.
    pub fn rho(&self, i: usize) -> f64 {
        assert!(i >= 1, "forgery thresholds start at 1");
        if i > self.n {
            f64::INFINITY
        } else {
            self.rho[i - 1]
        }
    }

    /// `sigma_j` for `j` in `0..=n`, with `sigma_0 = 1`.
    pub fn sigma(&self, j: usize) -> f64 {
        self.sigma[j]
    }

    /// Forgery thresholds `rho_1..rho_n`.
    pub fn rho_thresholds(&self) -> &[f64] {
        &self.rho
    }

    /// Suppression thresholds `sigma_1..sigma_n` (sentinel excluded).
    pub fn sigma_thresholds(&self) -> &[f64] {
        &self.sigma[1..]
    }

    /// The critical-line piece used on the suppression cell `j` (`2..=n`).
    pub fn line(&self, j: usize) -> Option<CriticalLine> {
        if (2..=self.n).contains(&j) {
            Some(self.lines[j - 2])
        } else {
            None
        }
    }

    pub fn lines(&self) -> &[CriticalLine] {
        &self.lines
    }

    /// Suppression index for a rate: the cell `(sigma_j, sigma_{j-1}]`.
    /// At `sigma = 0` the cell absorbs every category tied with the largest ratio.
    pub fn suppression_index(&self, sigma: f64) -> usize {
        if sigma <= 0.0 {
            (1..=self.n).find(|&j| self.sigma[j] <= 0.0).unwrap_or(self.n)
        } else {
            (1..=self.n).find(|&j| self.sigma[j] < sigma).unwrap_or(self.n)
        }
    }

    /// Forgery index capped at `j - 1`: the cell `(rho_i, rho_{i+1}]`.
    /// At `rho = 0` ties with the smallest ratio are absorbed.
    pub fn forgery_index(&self, rho: f64, j: usize) -> usize {
        let cap = j.saturating_sub(1).min(self.n);
        if rho <= 0.0 {
            (1..=cap).rev().find(|&i| self.rho[i - 1] <= 0.0).unwrap_or(0)
        } else {
            (1..=cap).rev().find(|&i| self.rho[i - 1] < rho).unwrap_or(0)
        }
    }
}

/// Builds the threshold table. Thresholds are accumulated from the
/// differences of consecutive ratios, so tied ratios give exactly tied
/// thresholds.
pub fn thresholds(view: &CanonicalView) -> ThresholdTable {
    let n = view.n();
    let ratio = view.ratios();

    let mut rho = vec![0.0; n];
    for i in 1..n {
        // rho_{i+1} = rho_i + P_i (ratio_{i+1} - ratio_i)
        rho[i] = rho[i - 1] + view.head_p(i) * (ratio[i] - ratio[i - 1]);
    }

    let mut sigma = vec![0.0; n + 1];
    sigma[0] = 1.0;
    for j in (2..=n).rev() {
        // sigma_{j-1} = sigma_j + Pbar_j (ratio_j - ratio_{j-1})
        sigma[j - 1] = sigma[j] + view.tail_p(j) * (ratio[j - 1] - ratio[j - 2]);
    }

    let lines = (2..=n)
        .map(|j| {
            let pbar = view.tail_p(j);
            CriticalLine {
                slope: -view.head_p(j - 1) / pbar,
                intercept: (view.head_p(j - 1) - view.head_q(j - 1)) / pbar,
            }
        })
        .collect();

    ThresholdTable {
        n,
        rho,
        sigma,
        lines,
    }
}

pub(crate) fn check_rates(rho: f64, sigma: f64) -> Result<()> {
    if !(rho.is_finite() && rho >= 0.0) {
        return Err(Error::RateOutOfRange {
            name: "rho",
            value: rho,
            domain: "[0, inf)",
        });
    }
    check_sigma(sigma)
}

pub(crate) fn check_sigma(sigma: f64) -> Result<()> {
    if !(sigma.is_finite() && (0.0..1.0).contains(&sigma)) {
        return Err(Error::RateOutOfRange {
            name: "sigma",
            value: sigma,
            domain: "[0, 1)",
        });
    }
    Ok(())
}

/// Smallest forgery rate reaching zero risk at suppression rate `sigma`.
pub fn critical_rho(table: &ThresholdTable, sigma: f64) -> Result<f64> {
    check_sigma(sigma)?;
    Ok(critical_rho_unchecked(table, sigma))
}

fn critical_rho_unchecked(table: &ThresholdTable, sigma: f64) -> f64 {
    let j = table.suppression_index(sigma);
    table.line(j).map_or(0.0, |l| l.at(sigma).max(0.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RegionKind {
    Noncritical,
    Boundary,
    CriticalInterior,
}

impl RegionKind {
    pub fn is_critical(self) -> bool {
        self != RegionKind::Noncritical
    }
}

impl std::fmt::Display for RegionKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            RegionKind::Noncritical => "NONCRITICAL",
            RegionKind::Boundary => "BOUNDARY",
            RegionKind::CriticalInterior => "CRITICAL_INTERIOR",
        })
    }
}

/// Region of a rate pair together with the active index pair `(i, j)`:
/// forgery touches canonical categories `1..=i`, suppression `j..=n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegionClass {
    pub kind: RegionKind,
    pub i: usize,
    pub j: usize,
    pub rho_crit: f64,
}

pub fn classify(table: &ThresholdTable, rho: f64, sigma: f64) -> Result<RegionClass> {
    check_rates(rho, sigma)?;
    let j = table.suppression_index(sigma);
    let i = table.forgery_index(rho, j);
    let rho_crit = critical_rho_unchecked(table, sigma);
    let kind = if (rho - rho_crit).abs() <= BOUNDARY_TOLERANCE {
        RegionKind::Boundary
    } else if rho > rho_crit {
        RegionKind::CriticalInterior
    } else {
        RegionKind::Noncritical
    };
    Ok(RegionClass {
        kind,
        i,
        j,
        rho_crit,
    })
}

/// `sigma_1`, the suppression rate that alone reaches zero risk.
pub fn critical_sigma(table: &ThresholdTable) -> f64 {
    table.sigma(1)
}

/// Ratio `rho / rho_crit(sigma)`; infinite when the critical rate is zero
/// and `rho > 0`.
pub fn critical_fraction(table: &ThresholdTable, rho: f64, sigma: f64) -> Result<f64> {
    let crit = critical_rho(table, sigma)?;
    Ok(if crit > 0.0 {
        rho / crit
    } else if rho > 0.0 {
        f64::INFINITY
    } else {
        1.0
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::profile::{canonicalize, Pmf};

    fn view(q: &[f64], p: &[f64]) -> CanonicalView {
        canonicalize(&Pmf::new(q.to_vec()).unwrap(), &Pmf::new(p.to_vec()).unwrap()).unwrap()
    }

    fn example() -> ThresholdTable {
        thresholds(&view(&[0.130, 0.440, 0.430], &[0.380, 0.390, 0.230]))
    }

    #[test]
    fn numerical_example_thresholds() {
        let t = example();
        assert_eq!(t.rho(1), 0.0);
        assert_eq!(t.sigma(3), 0.0);
        assert_eq!(t.sigma(0), 1.0);
        assert!((t.rho(2) - 0.299).abs() < 1e-3, "{}", t.rho(2));
        assert!((t.rho(3) - 0.870).abs() < 1e-3, "{}", t.rho(3));
        assert!((t.sigma(2) - 0.171).abs() < 1e-3, "{}", t.sigma(2));
        assert!((t.sigma(1) - 0.658).abs() < 1e-3, "{}", t.sigma(1));
        assert_eq!(t.rho(4), f64::INFINITY);
    }

    #[test]
    fn thresholds_match_direct_formula() {
        let v = view(&[0.2, 0.3, 0.5], &[1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0]);
        let t = thresholds(&v);
        assert!((t.rho(2) - 0.1).abs() < 1e-12);
        assert!((t.sigma(2) - 0.2).abs() < 1e-12);
        for i in 1..=3 {
            let direct = v.head_p(i) * v.ratios()[i - 1] - v.head_q(i);
            assert!((t.rho(i) - direct).abs() < 1e-12);
            let direct = v.tail_q(i) - v.tail_p(i) * v.ratios()[i - 1];
            assert!((t.sigma(i) - direct).abs() < 1e-12);
        }
    }

    #[test]
    fn critical_rho_examples() {
        let t = example();
        let at = critical_rho(&t, 0.3).unwrap();
        assert!((at - 0.219).abs() < 1e-3, "{at}");
        assert!((critical_rho(&t, 0.0).unwrap() - t.rho(3)).abs() < 1e-12);
        assert!(critical_rho(&t, t.sigma(1)).unwrap().abs() < 1e-12);
        assert_eq!(critical_rho(&t, 0.9).unwrap(), 0.0);
        assert!(matches!(
            critical_rho(&t, 1.0),
            Err(Error::RateOutOfRange { name: "sigma", .. })
        ));
    }

    #[test]
    fn critical_line_is_continuous_at_suppression_thresholds() {
        let t = example();
        for j in 2..=3 {
            let s = t.sigma(j - 1);
            let here = t.line(j).unwrap().at(s);
            let next = if j > 2 { t.line(j - 1).unwrap().at(s) } else { 0.0 };
            assert!((here - next).abs() < 1e-12, "j={j}: {here} vs {next}");
        }
        let slopes: Vec<f64> = t.lines().iter().map(|l| l.slope).collect();
        assert!(slopes.iter().all(|&m| m < 0.0));
        assert!(slopes[1] < slopes[0]);
    }

    #[test]
    fn classify_examples() {
        let t = example();
        let c = classify(&t, 0.1, 0.2).unwrap();
        assert_eq!((c.kind, c.i, c.j), (RegionKind::Noncritical, 1, 2));
        let c = classify(&t, 0.05, 0.1).unwrap();
        assert_eq!((c.kind, c.i, c.j), (RegionKind::Noncritical, 1, 3));
        let c = classify(&t, 0.0, 0.0).unwrap();
        assert_eq!((c.kind, c.i, c.j), (RegionKind::Noncritical, 1, 3));
        let c = classify(&t, 0.3, 0.3).unwrap();
        assert_eq!(c.kind, RegionKind::CriticalInterior);
        let crit = critical_rho(&t, 0.3).unwrap();
        assert_eq!(classify(&t, crit, 0.3).unwrap().kind, RegionKind::Boundary);
        let c = classify(&t, 0.0, 0.7).unwrap();
        assert_eq!((c.kind, c.i, c.j), (RegionKind::Boundary, 0, 1));
        assert!(classify(&t, -0.1, 0.0).is_err());
        assert!(classify(&t, f64::NAN, 0.0).is_err());
    }

    #[test]
    fn tied_ratios_collapse_cells() {
        // ratios (0.5, 0.5, 1.5, 1.5)
        let v = view(&[0.125, 0.125, 0.375, 0.375], &[0.25; 4]);
        let t = thresholds(&v);
        assert_eq!(t.rho(1), t.rho(2));
        assert_eq!(t.sigma(3), t.sigma(4));
        let c = classify(&t, 0.0, 0.0).unwrap();
        assert_eq!((c.i, c.j), (2, 3));
        let c = classify(&t, 0.01, 0.01).unwrap();
        assert_eq!((c.i, c.j), (2, 3));
    }

    #[test]
    fn degenerate_pair_has_zero_critical_rate() {
        let v = view(&[0.3, 0.7], &[0.3, 0.7]);
        let t = thresholds(&v);
        assert_eq!(critical_rho(&t, 0.0).unwrap(), 0.0);
        assert_eq!(classify(&t, 0.0, 0.0).unwrap().kind, RegionKind::Boundary);
        assert_eq!(
            classify(&t, 0.2, 0.0).unwrap().kind,
            RegionKind::CriticalInterior
        );
    }
}
