//! Risk over a (rho, sigma) grid as CSV, ready for a contour plot.
//!
//! cargo run --example risk_surface > surface.csv

use fsprivacy::experiment::{example_view, risk_surface, GridSpec};
use fsprivacy::{InteriorPolicy, Solver};

fn main() -> fsprivacy::Result<()> {
    let solver = Solver::new(example_view());
    let spec: GridSpec = "rho:0:1:21,sigma:0:0.7:15".parse()?;
    let surface = risk_surface(&solver, &spec, InteriorPolicy::ExactBudget)?;
    surface.write_csv(std::io::stdout().lock())
}
