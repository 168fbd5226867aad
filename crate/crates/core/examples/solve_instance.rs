//! Solve one instance given in arbitrary category order.
//!
//! cargo run --example solve_instance -- 0.08 0.12

use fsprivacy::{canonicalize, InteriorPolicy, Pmf, Solver};

fn main() -> fsprivacy::Result<()> {
    let mut args = std::env::args().skip(1).map(|a| a.parse::<f64>().expect("rate"));
    let rho = args.next().unwrap_or(0.08);
    let sigma = args.next().unwrap_or(0.12);

    let q = Pmf::new(vec![0.05, 0.30, 0.25, 0.10, 0.30])?;
    let p = Pmf::new(vec![0.20, 0.20, 0.20, 0.20, 0.20])?;
    let solver = Solver::new(canonicalize(&q, &p)?);
    let view = solver.view();
    let sol = solver.solve(rho, sigma, InteriorPolicy::ExactBudget)?;

    println!("rho = {rho}, sigma = {sigma}: {} (i = {}, j = {})", sol.region.kind, sol.region.i, sol.region.j);
    println!("risk {:.5} bits, down from {:.5}", sol.risk, solver.solve(0.0, 0.0, InteriorPolicy::ExactBudget)?.risk);
    let r = view.to_original(sol.strategy.r());
    let s = view.to_original(sol.strategy.s());
    let t = view.to_original(sol.t.as_slice());
    println!("{:>3} {:>7} {:>7} {:>7} {:>7} {:>7}", "k", "q", "p", "r", "s", "t");
    for k in 0..q.len() {
        println!("{k:>3} {:7.4} {:7.4} {:7.4} {:7.4} {:7.4}", q[k], p[k], r[k], s[k], t[k]);
    }
    if sol.region.kind == fsprivacy::RegionKind::Noncritical {
        println!("phi = {:.4}, chi = {:.4}", sol.phi, sol.chi);
    }
    Ok(())
}
