//! Cross-check the closed form against brute-force grid search and a
//! descent minimizer on random instances.
//!
//! cargo run --release --example oracle_cross_check

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use fsprivacy::oracle::{oracle_descent, oracle_grid, random_pair, random_rates};
use fsprivacy::{canonicalize, InteriorPolicy, Solver};

fn main() -> fsprivacy::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    println!(" n    rho   sigma  closed    grid      descent");
    for k in 0..8 {
        let n = 2 + k % 3;
        let (q, p) = random_pair(&mut rng, n);
        let view = canonicalize(&q, &p)?;
        let (rho, sigma) = random_rates(&mut rng, &view);
        let exact = Solver::new(view.clone()).solve(rho, sigma, InteriorPolicy::ExactBudget)?.risk;
        let grid = oracle_grid(&view, rho, sigma, 0.01)?;
        let descent = oracle_descent(&view, rho, sigma, 100_000, 1e-10)?;
        println!(
            "{n:2} {rho:6.3} {sigma:6.3}  {exact:.6}  {:.6}  {:.6}  ({} grid points)",
            grid.risk, descent.risk, grid.iterations
        );
    }
    Ok(())
}
