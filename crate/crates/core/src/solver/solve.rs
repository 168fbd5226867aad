//! Closed-form optimal forgery and suppression.

use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::thresholds::{classify, thresholds, RegionClass, RegionKind, ThresholdTable};
use crate::error::{Error, Result};
use crate::profile::{apparent_profile, kl_bits, CanonicalView, Pmf, Strategy, NONNEG_SLACK};

/// What to do with forgery budget beyond the critical line.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InteriorPolicy {
    /// Spend the whole budget, padding both sides in proportion to `p`.
    #[default]
    ExactBudget,
    /// Stop at the critical line and report what is left over.
    Economical,
}

impl FromStr for InteriorPolicy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exact" | "exact-budget" | "exact_budget" => Ok(Self::ExactBudget),
            "economical" => Ok(Self::Economical),
            other => Err(Error::InvalidArgument(format!(
                "unknown interior policy {other:?} (expected exact or economical)"
            ))),
        }
    }
}

/// Optimal strategy for one `(rho, sigma)` pair, in canonical order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Solution {
    pub rho: f64,
    pub sigma: f64,
    pub strategy: Strategy,
    pub t: Pmf,
    pub risk: f64,
    pub region: RegionClass,
    pub phi: f64,
    pub chi: f64,
    /// Aggregated profile `(Q_i, q_{i+1}, ..., q_{j-1}, Qbar_j)`.
    pub reduced_q: Vec<f64>,
    pub reduced_p: Vec<f64>,
    pub policy: InteriorPolicy,
    /// Forgery left unspent: the excess over the critical line under
    /// [`InteriorPolicy::Economical`], or a sub-tolerance `rho` on the
    /// suppression-only part of the boundary.
    pub unused_forgery: f64,
    /// Set when `q = p`; the strategy is then zero whatever the budgets.
    pub already_critical: bool,
}

impl Solution {
    /// Risk evaluated on the aggregated distributions. Equals `risk` for
    /// noncritical solutions.
    pub fn reduced_risk(&self) -> f64 {
        let m = 1.0 + self.rho - self.sigma;
        let (i, j) = (self.region.i, self.region.j);
        let last = self.reduced_q.len() - 1;
        let t: Vec<f64> = self
            .reduced_q
            .iter()
            .enumerate()
            .map(|(k, &qk)| {
                let mut x = qk;
                if i >= 1 && k == 0 {
                    x += self.rho;
                }
                if j <= self.t.len() && k == last {
                    x -= self.sigma;
                }
                x.max(0.0) / m
            })
            .collect();
        kl_bits(&t, &self.reduced_p)
    }

    /// `rho / rho_crit(sigma)`.
    pub fn critical_fraction(&self) -> f64 {
        if self.region.rho_crit > 0.0 {
            self.rho / self.region.rho_crit
        } else if self.rho > 0.0 {
            f64::INFINITY
        } else {
            1.0
        }
    }

    /// `t_k / p_k` for every canonical category.
    pub fn ratio_to_population(&self, view: &CanonicalView) -> Vec<f64> {
        (0..view.n()).map(|k| self.t[k] / view.p()[k]).collect()
    }
}

/// A canonical view with its thresholds, for repeated solves.
#[derive(Debug, Clone)]
pub struct Solver {
    view: CanonicalView,
    table: ThresholdTable,
}

impl Solver {
    pub fn new(view: CanonicalView) -> Self {
        let table = thresholds(&view);
        Self { view, table }
    }

    pub fn view(&self) -> &CanonicalView {
        &self.view
    }

    pub fn table(&self) -> &ThresholdTable {
        &self.table
    }

    pub fn classify(&self, rho: f64, sigma: f64) -> Result<RegionClass> {
        classify(&self.table, rho, sigma)
    }

    pub fn solve(&self, rho: f64, sigma: f64, policy: InteriorPolicy) -> Result<Solution> {
        let view = &self.view;
        let mut region = classify(&self.table, rho, sigma)?;
        let already_critical = view.is_degenerate();
        if already_critical {
            region = RegionClass {
                kind: RegionKind::Boundary,
                i: 0,
                j: 1,
                rho_crit: 0.0,
            };
        }

        let mut unused_forgery = 0.0;
        let strategy = match region.kind {
            _ if already_critical => Strategy::zero(view.n()),
            RegionKind::Noncritical => closed_form(view, region, rho, sigma)?,
            RegionKind::Boundary if region.j >= 2 => closed_form(view, region, rho, sigma)?,
            // rho is within the boundary tolerance of 0: suppression alone
            RegionKind::Boundary => {
                unused_forgery = rho;
                padded_to_population(view, 0.0, sigma)?
            }
            RegionKind::CriticalInterior if policy == InteriorPolicy::Economical => {
                unused_forgery = rho - region.rho_crit;
                if region.j >= 2 {
                    let on_line = RegionClass {
                        i: self.table.forgery_index(region.rho_crit, region.j),
                        ..region
                    };
                    closed_form(view, on_line, region.rho_crit, sigma)?
                } else {
                    padded_to_population(view, region.rho_crit, sigma)?
                }
            }
            _ => padded_to_population(view, rho, sigma)?,
        };

        let t = apparent_profile(view, &strategy)?;
        let risk = match region.kind {
            RegionKind::Noncritical => kl_bits(t.as_slice(), view.p().as_slice()),
            _ => 0.0,
        };
        let (phi, chi) = match region.kind {
            RegionKind::Noncritical => phi_chi(view, region, rho, sigma),
            _ => (1.0, 1.0),
        };
        let (reduced_q, reduced_p) = reduced(view, region);

        Ok(Solution {
            rho,
            sigma,
            strategy,
            t,
            risk,
            region,
            phi,
            chi,
            reduced_q,
            reduced_p,
            policy,
            unused_forgery,
            already_critical,
        })
    }
}

/// Solves the trade-off problem at `(rho, sigma)`.
pub fn solve(
    view: &CanonicalView,
    rho: f64,
    sigma: f64,
    policy: InteriorPolicy,
) -> Result<Solution> {
    Solver::new(view.clone()).solve(rho, sigma, policy)
}

/// Common ratios `t_k / p_k` on the forgery-active and suppression-active
/// categories.
pub fn proportionality(
    view: &CanonicalView,
    region: &RegionClass,
    rho: f64,
    sigma: f64,
) -> Result<(f64, f64)> {
    match region.kind {
        RegionKind::CriticalInterior => Err(Error::RegionError),
        RegionKind::Boundary => Ok((1.0, 1.0)),
        RegionKind::Noncritical => Ok(phi_chi(view, *region, rho, sigma)),
    }
}

fn phi_chi(view: &CanonicalView, region: RegionClass, rho: f64, sigma: f64) -> (f64, f64) {
    let m = 1.0 + rho - sigma;
    let phi = (view.head_q(region.i) + rho) / (m * view.head_p(region.i));
    let chi = (view.tail_q(region.j) - sigma) / (m * view.tail_p(region.j));
    (phi, chi)
}

fn closed_form(
    view: &CanonicalView,
    region: RegionClass,
    rho: f64,
    sigma: f64,
) -> Result<Strategy> {
    let n = view.n();
    let (i, j) = (region.i, region.j);
    let q = view.q();
    let p = view.p();
    let clamp = |x: f64| if (-NONNEG_SLACK..0.0).contains(&x) { 0.0 } else { x };

    let mut r = vec![0.0; n];
    let mut s = vec![0.0; n];
    let lift = (view.head_q(i) + rho) / view.head_p(i);
    for k in 0..i {
        r[k] = clamp(p[k] * lift - q[k]);
    }
    let keep = (view.tail_q(j) - sigma) / view.tail_p(j);
    for k in (j - 1)..n {
        s[k] = clamp(q[k] - p[k] * keep);
    }
    Strategy::new(r, s)
}

/// A strategy with apparent profile exactly `p`.
fn padded_to_population(view: &CanonicalView, rho: f64, sigma: f64) -> Result<Strategy> {
    let m = 1.0 + rho - sigma;
    let u: Vec<f64> = view.p().as_slice().iter().map(|pk| m * pk).collect();
    Strategy::from_apparent_mass(view, &u, rho)
}

fn reduced(view: &CanonicalView, region: RegionClass) -> (Vec<f64>, Vec<f64>) {
    let n = view.n();
    let (i, j) = (region.i, region.j);
    let mut rq = Vec::with_capacity(j.saturating_sub(i) + 1);
    let mut rp = Vec::with_capacity(rq.capacity());
    if i >= 1 {
        rq.push(view.head_q(i));
        rp.push(view.head_p(i));
    }
    for k in i..j.saturating_sub(1) {
        rq.push(view.q()[k]);
        rp.push(view.p()[k]);
    }
    if j <= n {
        rq.push(view.tail_q(j));
        rp.push(view.tail_p(j));
    }
    (rq, rp)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::profile::canonicalize;
    use crate::solver::thresholds::critical_rho;
    use proptest::prelude::{prop_assert, prop_assert_eq, proptest};
    use proptest::strategy::Strategy as _;

    fn view(q: &[f64], p: &[f64]) -> CanonicalView {
        canonicalize(&Pmf::new(q.to_vec()).unwrap(), &Pmf::new(p.to_vec()).unwrap()).unwrap()
    }

    fn example() -> CanonicalView {
        view(&[0.130, 0.440, 0.430], &[0.380, 0.390, 0.230])
    }

    fn close(got: &[f64], want: &[f64], tol: f64) {
        for (k, (g, w)) in got.iter().zip(want).enumerate() {
            assert!((g - w).abs() <= tol, "component {k}: {g} vs {w}");
        }
    }

    #[test]
    fn low_budget_panel() {
        let sol = solve(&example(), 0.05, 0.10, InteriorPolicy::ExactBudget).unwrap();
        assert_eq!(sol.region.kind, RegionKind::Noncritical);
        close(sol.strategy.r(), &[0.05, 0.0, 0.0], 1e-12);
        close(sol.strategy.s(), &[0.0, 0.0, 0.10], 1e-12);
        close(sol.t.as_slice(), &[0.189, 0.463, 0.347], 1e-3);
        assert!((sol.risk - 0.131).abs() < 1e-3, "{}", sol.risk);
        assert!((sol.phi - 0.498).abs() < 1e-3, "{}", sol.phi);
        assert!((sol.chi - 1.510).abs() < 1e-3, "{}", sol.chi);
        assert!((sol.phi - sol.t[0] / 0.380).abs() < 1e-12);
        assert!((sol.chi - sol.t[2] / 0.230).abs() < 1e-12);
    }

    #[test]
    fn second_panel_spreads_suppression() {
        let sol = solve(&example(), 0.10, 0.20, InteriorPolicy::ExactBudget).unwrap();
        assert_eq!((sol.region.i, sol.region.j), (1, 2));
        let s2 = 0.44 - 0.39 * (0.67 / 0.62);
        close(sol.strategy.s(), &[0.0, s2, 0.2 - s2], 1e-12);
        assert!((sol.strategy.s()[1] - 0.019).abs() < 1e-3);
        assert!((sol.strategy.s()[2] - 0.181).abs() < 1e-3);
        close(sol.t.as_slice(), &[0.256, 0.468, 0.276], 1e-3);
        assert!((sol.risk - 0.050).abs() < 1e-3, "{}", sol.risk);
    }

    #[test]
    fn boundary_panel_hits_population() {
        let v = example();
        let crit = critical_rho(&thresholds(&v), 0.3).unwrap();
        let sol = solve(&v, crit, 0.3, InteriorPolicy::ExactBudget).unwrap();
        assert_eq!(sol.region.kind, RegionKind::Boundary);
        assert_eq!(sol.risk, 0.0);
        close(sol.t.as_slice(), v.p().as_slice(), 1e-12);
        close(sol.strategy.r(), &[0.219, 0.0, 0.0], 1e-3);
        close(sol.strategy.s(), &[0.0, 0.081, 0.219], 1e-3);
        assert_eq!((sol.phi, sol.chi), (1.0, 1.0));

        // the rounded caption value sits just below the line
        let sol = solve(&v, 0.219, 0.3, InteriorPolicy::ExactBudget).unwrap();
        assert!(sol.risk < 1e-6);
    }

    #[test]
    fn interior_policies() {
        let v = example();
        let exact = solve(&v, 0.3, 0.3, InteriorPolicy::ExactBudget).unwrap();
        assert_eq!(exact.region.kind, RegionKind::CriticalInterior);
        assert!((exact.strategy.rho() - 0.3).abs() < 1e-12);
        assert!((exact.strategy.sigma() - 0.3).abs() < 1e-12);
        close(exact.t.as_slice(), v.p().as_slice(), 1e-12);
        assert!((exact.critical_fraction() - 1.368).abs() < 1e-3);
        assert_eq!(exact.unused_forgery, 0.0);

        let econ = solve(&v, 0.3, 0.3, InteriorPolicy::Economical).unwrap();
        assert!((econ.strategy.rho() - exact.region.rho_crit).abs() < 1e-12);
        assert!((econ.unused_forgery - (0.3 - exact.region.rho_crit)).abs() < 1e-12);
        close(econ.t.as_slice(), v.p().as_slice(), 1e-12);
        assert!(econ.strategy.r().iter().zip(econ.strategy.s()).all(|(r, s)| r * s == 0.0));
    }

    #[test]
    fn origin_leaves_profile_alone() {
        let sol = solve(&example(), 0.0, 0.0, InteriorPolicy::ExactBudget).unwrap();
        assert!(sol.strategy.r().iter().chain(sol.strategy.s()).all(|&x| x == 0.0));
        assert!((sol.risk - 0.263).abs() < 1e-3);
        assert!((sol.risk - sol.reduced_risk()).abs() < 1e-12);
    }

    #[test]
    fn degenerate_pair_is_already_critical() {
        let v = view(&[0.3, 0.7], &[0.3, 0.7]);
        let sol = solve(&v, 0.1, 0.2, InteriorPolicy::ExactBudget).unwrap();
        assert!(sol.already_critical);
        assert_eq!(sol.region.kind, RegionKind::Boundary);
        assert_eq!(sol.risk, 0.0);
        assert_eq!(sol.strategy, Strategy::zero(2));
        assert_eq!(sol.t.as_slice(), &[0.3, 0.7]);
        let zero = solve(&v, 0.0, 0.0, InteriorPolicy::ExactBudget).unwrap();
        assert!(zero.strategy.r().iter().all(|&x| x == 0.0));
    }

    #[test]
    fn proportionality_rejects_interior() {
        let v = example();
        let table = thresholds(&v);
        let region = classify(&table, 0.3, 0.3).unwrap();
        assert!(matches!(
            proportionality(&v, &region, 0.3, 0.3),
            Err(Error::RegionError)
        ));
        let region = classify(&table, 0.05, 0.1).unwrap();
        let (phi, chi) = proportionality(&v, &region, 0.05, 0.1).unwrap();
        assert!(phi < 1.0 && chi > 1.0);
    }

    #[test]
    fn rejects_bad_rates() {
        let v = example();
        assert!(matches!(
            solve(&v, 0.1, 1.0, InteriorPolicy::ExactBudget),
            Err(Error::RateOutOfRange { name: "sigma", .. })
        ));
        assert!(solve(&v, -0.1, 0.0, InteriorPolicy::ExactBudget).is_err());
    }

    #[test]
    fn policy_parsing() {
        assert_eq!("exact".parse::<InteriorPolicy>().unwrap(), InteriorPolicy::ExactBudget);
        assert_eq!(
            "economical".parse::<InteriorPolicy>().unwrap(),
            InteriorPolicy::Economical
        );
        assert!("other".parse::<InteriorPolicy>().is_err());
    }

    fn arb_instance() -> impl proptest::strategy::Strategy<Value = (CanonicalView, f64, f64)> {
        (2usize..10)
            .prop_flat_map(|n| {
                (
                    proptest::collection::vec(0.05f64..1.0, n),
                    proptest::collection::vec(0.05f64..1.0, n),
                    0.0f64..1.5,
                    0.0f64..1.0,
                )
            })
            .prop_map(|(wq, wp, a, b)| {
                let v = canonicalize(
                    &Pmf::from_weights(&wq).unwrap(),
                    &Pmf::from_weights(&wp).unwrap(),
                )
                .unwrap();
                let t = thresholds(&v);
                let rho = a * t.rho(v.n());
                let sigma = b * t.sigma(1);
                (v, rho, sigma)
            })
    }

    proptest! {
        #[test]
        fn closed_form_invariants((v, rho, sigma) in arb_instance()) {
            let sol = solve(&v, rho, sigma, InteriorPolicy::ExactBudget).unwrap();
            prop_assert!((sol.strategy.rho() - rho).abs() <= 1e-9);
            prop_assert!((sol.strategy.sigma() - sigma).abs() <= 1e-9);
            prop_assert!((sol.t.as_slice().iter().sum::<f64>() - 1.0).abs() <= 1e-9);
            prop_assert!(sol.risk >= 0.0);
            if sol.region.kind != RegionKind::CriticalInterior {
                for k in 0..v.n() {
                    prop_assert_eq!(sol.strategy.r()[k] * sol.strategy.s()[k], 0.0);
                }
            }
            if sol.region.kind == RegionKind::Noncritical {
                prop_assert!(sol.risk > 0.0);
                prop_assert!((sol.risk - sol.reduced_risk()).abs() <= 1e-9);
                prop_assert!(sol.phi <= 1.0 && sol.chi >= 1.0);
                let g = sol.ratio_to_population(&v);
                let (i, j) = (sol.region.i, sol.region.j);
                for (k, &gk) in g.iter().enumerate() {
                    if k < i {
                        prop_assert!((gk - sol.phi).abs() <= 1e-9);
                    } else if k + 1 >= j {
                        prop_assert!((gk - sol.chi).abs() <= 1e-9);
                    } else {
                        prop_assert!(gk >= sol.phi - 1e-9 && gk <= sol.chi + 1e-9);
                    }
                }
                prop_assert!(g.windows(2).all(|w| w[0] <= w[1] + 1e-9));
            } else {
                prop_assert!(sol.risk <= 1e-12);
                prop_assert!(sol.t.max_abs_diff(v.p()) <= 1e-9);
            }
        }
    }
}
