//! Check optimality conditions for the solver's strategy and for a
//! deliberately bad one.
//!
//! cargo run --example kkt_certificate

use fsprivacy::experiment::example_view;
use fsprivacy::solver::kkt_certificate;
use fsprivacy::{InteriorPolicy, Solver, Strategy};

fn main() -> fsprivacy::Result<()> {
    let view = example_view();
    let sol = Solver::new(view.clone()).solve(0.05, 0.10, InteriorPolicy::ExactBudget)?;
    let good = kkt_certificate(&view, &sol.strategy, 1e-9)?;
    println!("solver strategy: valid {} (psi {:.4}, omega {:.4}, g {:.4?})", good.valid, good.psi, good.omega, good.g);

    let swapped = Strategy::new(vec![0.0, 0.0, 0.05], vec![0.10, 0.0, 0.0])?;
    let bad = kkt_certificate(&view, &swapped, 1e-9)?;
    println!("swapped strategy: valid {} (max violation {:.4})", bad.valid, bad.max_violation);
    Ok(())
}
