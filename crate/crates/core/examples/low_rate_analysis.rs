//! Gradient at the origin, decrement factors, first-order model against the
//! exact risk, and the pure-strategy comparison.
//!
//! cargo run --example low_rate_analysis

use fsprivacy::analysis::{low_rate_report, numerical_gradient, pure_strategy_report, taylor_risk};
use fsprivacy::experiment::example_view;
use fsprivacy::{InteriorPolicy, Solver};

fn main() -> fsprivacy::Result<()> {
    let view = example_view();
    let solver = Solver::new(view.clone());
    let low = low_rate_report(&view)?;
    let (gr, gs) = numerical_gradient(&solver, 1e-5)?;
    println!("R(0,0) = {:.4}", low.initial_risk);
    println!("gradient {:.4} {:.4} (finite differences {gr:.4} {gs:.4})", low.grad_rho, low.grad_sigma);
    println!("delta_rho = {:.3}, delta_sigma = {:.3}", low.delta_rho, low.delta_sigma);

    println!("\n  rate   exact    first-order");
    for k in 0..=5 {
        let x = 0.004 * k as f64;
        let exact = solver.solve(x, x, InteriorPolicy::ExactBudget)?.risk;
        println!("{x:6.3}  {exact:.5}  {:.5}", taylor_risk(&view, x, x)?);
    }

    let pure = pure_strategy_report(&view)?;
    println!("\nforgery alone reaches zero risk at rho = {:.4}", pure.rho_crit_pure);
    println!("suppression alone reaches zero risk at sigma = {:.4}", pure.sigma_crit_pure);
    println!(
        "to reach zero risk prefer {}; at low rates prefer {}",
        if pure.prefer_forgery_for_critical { "forgery" } else { "suppression" },
        if pure.prefer_forgery_low_rate { "forgery" } else { "suppression" }
    );
    Ok(())
}
