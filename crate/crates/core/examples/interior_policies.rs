//! Inside the critical region many strategies reach zero risk. Compare the
//! exact-budget strategy with the economical one that stops on the critical
//! line.
//!
//! cargo run --example interior_policies

use fsprivacy::experiment::example_view;
use fsprivacy::{InteriorPolicy, Solver};

fn main() -> fsprivacy::Result<()> {
    let solver = Solver::new(example_view());
    for policy in [InteriorPolicy::ExactBudget, InteriorPolicy::Economical] {
        let sol = solver.solve(0.3, 0.3, policy)?;
        println!("{policy:?}: {}", sol.region.kind);
        println!("  r = {:.4?}  (sum {:.4})", sol.strategy.r(), sol.strategy.rho());
        println!("  s = {:.4?}  (sum {:.4})", sol.strategy.s(), sol.strategy.sigma());
        println!("  t = {:.4?}, risk {}", sol.t.as_slice(), sol.risk);
        println!("  unused forgery {:.4}", sol.unused_forgery);
    }
    Ok(())
}
