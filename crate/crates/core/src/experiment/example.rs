//! The three-category worked example with its reference values.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::analysis::{low_rate_report, pure_strategy_report, LowRateReport, PureStrategyReport};
use crate::error::{Error, Result};
use crate::profile::{apparent_profile, canonicalize, kl_divergence, CanonicalView, Pmf, Strategy};
use crate::solver::{critical_rho, InteriorPolicy, RegionKind, Solver};

pub const EXAMPLE_Q: [f64; 3] = [0.130, 0.440, 0.430];
pub const EXAMPLE_P: [f64; 3] = [0.380, 0.390, 0.230];

/// Tolerance for the three-decimal reference values.
pub const REFERENCE_TOLERANCE: f64 = 0.002;
/// The decrement factors are quoted to three significant figures.
pub const FACTOR_TOLERANCE: f64 = 0.01;

pub fn example_view() -> CanonicalView {
    canonicalize(
        &Pmf::new(EXAMPLE_Q.to_vec()).expect("valid"),
        &Pmf::new(EXAMPLE_P.to_vec()).expect("valid"),
    )
    .expect("positive")
}

/// Reference strategy quoted for the interior panel. Any strategy with the
/// right budgets that makes `t = p` is optimal there; this one is a member of
/// that family, not the one the solver picks.
pub const INTERIOR_CAPTION_R: [f64; 3] = [0.260, 0.021, 0.019];
pub const INTERIOR_CAPTION_S: [f64; 3] = [0.010, 0.071, 0.219];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub expected: f64,
    pub actual: f64,
    pub tolerance: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Panel {
    pub label: String,
    pub rho: f64,
    pub sigma: f64,
    pub region: RegionKind,
    pub critical_fraction: f64,
    pub r: Vec<f64>,
    pub s: Vec<f64>,
    pub t: Vec<f64>,
    pub risk: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExampleReport {
    pub q: Vec<f64>,
    pub p: Vec<f64>,
    pub rho_thresholds: Vec<f64>,
    pub sigma_thresholds: Vec<f64>,
    pub initial_risk: f64,
    pub low_rate: LowRateReport,
    pub pure: PureStrategyReport,
    pub panels: Vec<Panel>,
    pub checks: Vec<Check>,
}

impl ExampleReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn failures(&self) -> Vec<&Check> {
        self.checks.iter().filter(|c| !c.pass).collect()
    }

    /// Fails with [`Error::SelfCheckFailed`] naming every failing check.
    pub fn verify(&self) -> Result<()> {
        let failed: Vec<String> = self
            .failures()
            .iter()
            .map(|c| format!("{} = {} (expected {})", c.name, c.actual, c.expected))
            .collect();
        if failed.is_empty() {
            Ok(())
        } else {
            Err(Error::SelfCheckFailed(failed.join("; ")))
        }
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        let v = |xs: &[f64]| {
            xs.iter()
                .map(|x| format!("{x:.4}"))
                .collect::<Vec<_>>()
                .join(", ")
        };
        let _ = writeln!(out, "q = ({})", v(&self.q));
        let _ = writeln!(out, "p = ({})", v(&self.p));
        let _ = writeln!(out, "forgery thresholds     rho_i   = ({})", v(&self.rho_thresholds));
        let _ = writeln!(out, "suppression thresholds sigma_j = ({})", v(&self.sigma_thresholds));
        let _ = writeln!(out, "initial risk R(0,0) = {:.4} bits", self.initial_risk);
        let _ = writeln!(
            out,
            "gradient at origin = ({:.4}, {:.4})",
            self.low_rate.grad_rho, self.low_rate.grad_sigma
        );
        let _ = writeln!(
            out,
            "decrement factors delta_rho = {:.4}, delta_sigma = {:.4}",
            self.low_rate.delta_rho, self.low_rate.delta_sigma
        );
        let _ = writeln!(
            out,
            "pure strategies: rho_n = {:.4}, sigma_1 = {:.4}, {} reaches zero risk with less",
            self.pure.rho_crit_pure,
            self.pure.sigma_crit_pure,
            if self.pure.prefer_forgery_for_critical { "forgery" } else { "suppression" }
        );
        let _ = writeln!(
            out,
            "low rates: geometric mean {:.4} vs 2^D {:.4}, {} preferred",
            self.pure.geom_mean,
            self.pure.exp_divergence,
            if self.pure.prefer_forgery_low_rate { "forgery" } else { "suppression" }
        );
        for panel in &self.panels {
            let _ = writeln!(
                out,
                "panel {}: (rho, sigma) = ({:.4}, {:.4}) {} rho/rho_crit = {:.4}",
                panel.label, panel.rho, panel.sigma, panel.region, panel.critical_fraction
            );
            let _ = writeln!(out, "  r* = ({})", v(&panel.r));
            let _ = writeln!(out, "  s* = ({})", v(&panel.s));
            let _ = writeln!(out, "  t* = ({})", v(&panel.t));
            let _ = writeln!(out, "  R  = {:.4}", panel.risk);
        }
        let passed = self.checks.iter().filter(|c| c.pass).count();
        let _ = writeln!(out, "self-check: {passed}/{} passed", self.checks.len());
        for c in self.failures() {
            let _ = writeln!(
                out,
                "  FAIL {}: got {:.6}, expected {} +/- {}",
                c.name, c.actual, c.expected, c.tolerance
            );
        }
        out
    }
}

struct Checker(Vec<Check>);

impl Checker {
    fn check(&mut self, name: impl Into<String>, expected: f64, actual: f64, tolerance: f64) {
        self.0.push(Check {
            name: name.into(),
            expected,
            actual,
            tolerance,
            pass: (actual - expected).abs() <= tolerance,
        });
    }

    fn vector(&mut self, name: &str, expected: &[f64], actual: &[f64]) {
        for (k, (e, a)) in expected.iter().zip(actual).enumerate() {
            self.check(format!("{name}[{}]", k + 1), *e, *a, REFERENCE_TOLERANCE);
        }
    }
}

/// Runs the worked example and compares against the reference values.
pub fn run_example() -> Result<ExampleReport> {
    let view = example_view();
    let solver = Solver::new(view.clone());
    let table = solver.table();
    let low_rate = low_rate_report(&view)?;
    let pure = pure_strategy_report(&view)?;
    let initial_risk = kl_divergence(view.q(), view.p())?;
    let tol = REFERENCE_TOLERANCE;

    let mut c = Checker(Vec::new());
    c.check("R(0,0)", 0.263, initial_risk, tol);
    c.check("rho_2", 0.299, table.rho(2), tol);
    c.check("rho_3", 0.870, table.rho(3), tol);
    c.check("sigma_2", 0.171, table.sigma(2), tol);
    c.check("sigma_1", 0.658, table.sigma(1), tol);
    c.check("grad_rho", -1.81, low_rate.grad_rho, tol);
    c.check("grad_sigma", -0.639, low_rate.grad_sigma, tol);
    c.check("delta_rho", 6.87, low_rate.delta_rho, FACTOR_TOLERANCE);
    c.check("delta_sigma", 2.42, low_rate.delta_sigma, FACTOR_TOLERANCE);
    c.check("geometric mean", 0.799, pure.geom_mean, tol);
    c.check("2^D", 1.20, pure.exp_divergence, tol);

    let boundary_rho = critical_rho(table, 0.3)?;
    let cases: [(&str, f64, f64); 4] = [
        ("a", 0.050, 0.100),
        ("b", 0.100, 0.200),
        ("c", boundary_rho, 0.300),
        ("d", 0.300, 0.300),
    ];
    let mut panels = Vec::new();
    for (label, rho, sigma) in cases {
        let sol = solver.solve(rho, sigma, InteriorPolicy::ExactBudget)?;
        panels.push(Panel {
            label: label.to_string(),
            rho,
            sigma,
            region: sol.region.kind,
            critical_fraction: sol.critical_fraction(),
            r: sol.strategy.r().to_vec(),
            s: sol.strategy.s().to_vec(),
            t: sol.t.as_slice().to_vec(),
            risk: sol.risk,
        });
    }

    let p = view.p().as_slice();
    let (a, b, cc, d) = (&panels[0], &panels[1], &panels[2], &panels[3]);
    c.vector("a.r", &[0.050, 0.0, 0.0], &a.r);
    c.vector("a.s", &[0.0, 0.0, 0.100], &a.s);
    c.vector("a.t", &[0.189, 0.463, 0.347], &a.t);
    c.check("a.R", 0.131, a.risk, tol);
    c.check("a.rho/rho_crit", 0.093, a.critical_fraction, tol);

    c.vector("b.r", &[0.100, 0.0, 0.0], &b.r);
    c.vector("b.s", &[0.0, 0.019, 0.181], &b.s);
    c.vector("b.t", &[0.256, 0.468, 0.276], &b.t);
    c.check("b.R", 0.050, b.risk, tol);
    c.check("b.rho/rho_crit", 0.356, b.critical_fraction, tol);

    c.check("c.rho", 0.219, cc.rho, tol);
    c.vector("c.r", &[0.219, 0.0, 0.0], &cc.r);
    c.vector("c.s", &[0.0, 0.081, 0.219], &cc.s);
    c.vector("c.t", p, &cc.t);
    c.check("c.R", 0.0, cc.risk, tol);
    c.check("c.rho/rho_crit", 1.0, cc.critical_fraction, tol);

    c.vector("d.t", p, &d.t);
    c.check("d.R", 0.0, d.risk, tol);
    c.check("d.rho/rho_crit", 1.368, d.critical_fraction, tol);
    c.check("d.sum(r)", 0.300, d.r.iter().sum(), tol);
    c.check("d.sum(s)", 0.300, d.s.iter().sum(), tol);
    // the quoted interior strategy must be one of the optimal ones
    let quoted = Strategy::new(INTERIOR_CAPTION_R.to_vec(), INTERIOR_CAPTION_S.to_vec())?;
    let t_quoted = apparent_profile(&view, &quoted)?;
    c.vector("d.quoted.t", p, t_quoted.as_slice());
    c.check("d.quoted.sum(r)", 0.300, quoted.rho(), tol);
    c.check("d.quoted.sum(s)", 0.300, quoted.sigma(), tol);

    Ok(ExampleReport {
        q: view.q().as_slice().to_vec(),
        p: p.to_vec(),
        rho_thresholds: table.rho_thresholds().to_vec(),
        sigma_thresholds: table.sigma_thresholds().to_vec(),
        initial_risk,
        low_rate,
        pure,
        panels,
        checks: c.0,
    })
}
