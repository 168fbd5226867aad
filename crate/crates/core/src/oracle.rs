//! Brute-force and iterative minimizers used to check the closed form.
//!
//! Both work with the apparent mass `u = q + r - s`. A vector `u` is
//! reachable with budgets `(rho, sigma)` exactly when `u >= 0`,
//! `sum(u) = 1 + rho - sigma` and `sum((u - q)+) <= rho`; the strategy is
//! recovered with [`reconstruct_strategy`].

use rand::Rng;
use rand_distr::{Distribution, Exp1};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::profile::{kl_bits, CanonicalView, Pmf, Strategy, NONNEG_SLACK, SUM_TOLERANCE};
use crate::solver::{check_rates, kkt_certificate, thresholds};

/// Largest dimension accepted by [`oracle_grid`].
pub const GRID_MAX_DIM: usize = 4;

/// Smallest probability produced by the random instance generators.
pub const INSTANCE_FLOOR: f64 = 0.01;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleResult {
    pub risk: f64,
    pub u: Vec<f64>,
    pub t: Pmf,
    pub reconstructed: Strategy,
    /// Descent iterations, or feasible lattice points for the grid.
    pub iterations: usize,
    pub kkt_residual: f64,
}

/// Splits a feasible apparent mass vector back into `(r, s)` with the
/// requested budgets. Padding common to both sides is proportional to `p`.
pub fn reconstruct_strategy(
    view: &CanonicalView,
    u: &[f64],
    rho: f64,
    sigma: f64,
) -> Result<Strategy> {
    check_rates(rho, sigma)?;
    if u.len() != view.n() {
        return Err(Error::DimensionMismatch {
            left: u.len(),
            right: view.n(),
        });
    }
    if let Some(k) = u.iter().position(|&x| !(x >= -NONNEG_SLACK)) {
        return Err(Error::InfeasibleU(format!("u[{k}] = {} is negative", u[k])));
    }
    let total: f64 = u.iter().sum();
    let m = 1.0 + rho - sigma;
    if (total - m).abs() > SUM_TOLERANCE {
        return Err(Error::InfeasibleU(format!(
            "sum(u) = {total}, expected 1 + rho - sigma = {m}"
        )));
    }
    let u: Vec<f64> = u.iter().map(|x| x.max(0.0)).collect();
    let excess: f64 = u
        .iter()
        .zip(view.q().as_slice())
        .map(|(uk, qk)| (uk - qk).max(0.0))
        .sum();
    if excess > rho + SUM_TOLERANCE {
        return Err(Error::InfeasibleU(format!(
            "u needs forgery {excess} above the budget {rho}"
        )));
    }
    Strategy::from_apparent_mass(view, &u, rho)
}

fn finish(
    view: &CanonicalView,
    u: Vec<f64>,
    rho: f64,
    sigma: f64,
    iterations: usize,
    kkt_residual: Option<f64>,
) -> Result<OracleResult> {
    let m = 1.0 + rho - sigma;
    let t = Pmf::new(u.iter().map(|x| x / m).collect())?;
    let risk = kl_bits(t.as_slice(), view.p().as_slice());
    let reconstructed = reconstruct_strategy(view, &u, rho, sigma)?;
    let kkt_residual = match kkt_residual {
        Some(r) => r,
        None => kkt_certificate(view, &reconstructed, 1e-9)?.max_violation,
    };
    Ok(OracleResult {
        risk,
        u,
        t,
        reconstructed,
        iterations,
        kkt_residual,
    })
}

/// Exhaustive search over the lattice `t = q + h m` (integer `m`,
/// `sum(m) = 0`) restricted to the feasible set. The lattice contains `q`,
/// so zero budgets return `D(q || p)` exactly.
pub fn oracle_grid(
    view: &CanonicalView,
    rho: f64,
    sigma: f64,
    resolution: f64,
) -> Result<OracleResult> {
    let n = view.n();
    if n > GRID_MAX_DIM {
        return Err(Error::DimensionTooLarge {
            got: n,
            max: GRID_MAX_DIM,
        });
    }
    check_rates(rho, sigma)?;
    if !(resolution > 0.0 && resolution <= 0.1) {
        return Err(Error::RateOutOfRange {
            name: "resolution",
            value: resolution,
            domain: "(0, 0.1]",
        });
    }

    let h = resolution;
    let q = view.q().as_slice();
    let p = view.p().as_slice();
    let m = 1.0 + rho - sigma;
    // m_k ranges keeping t_k inside [0, 1]
    let lo: Vec<i64> = q.iter().map(|&qk| (-qk / h).ceil() as i64).collect();
    let hi: Vec<i64> = q.iter().map(|&qk| ((1.0 - qk) / h).floor() as i64).collect();

    let search = |first: i64| -> (usize, Option<(f64, Vec<f64>)>) {
        let mut steps = vec![0i64; n];
        steps[0] = first;
        let mut t = vec![0.0; n];
        let mut count = 0usize;
        let mut best: Option<(f64, Vec<f64>)> = None;
        enumerate(1, first, &mut steps, &lo, &hi, &mut |steps: &[i64]| {
            for k in 0..n {
                t[k] = q[k] + h * steps[k] as f64;
            }
            if t[n - 1] < -NONNEG_SLACK {
                return;
            }
            t.iter_mut().for_each(|x| *x = x.max(0.0));
            let excess: f64 = (0..n).map(|k| (m * t[k] - q[k]).max(0.0)).sum();
            if excess > rho + 1e-12 {
                return;
            }
            count += 1;
            let risk = kl_bits(&t, p);
            if better(risk, &t, best.as_ref()) {
                best = Some((risk, t.clone()));
            }
        });
        (count, best)
    };

    let (count, best) = (lo[0]..=hi[0])
        .into_par_iter()
        .map(search)
        .reduce(
            || (0, None),
            |(ca, ba), (cb, bb)| {
                let best = match (ba, bb) {
                    (Some(a), Some(b)) => Some(if better(b.0, &b.1, Some(&a)) { b } else { a }),
                    (a, b) => a.or(b),
                };
                (ca + cb, best)
            },
        );

    let (_, t) = best.ok_or_else(|| {
        Error::InvariantViolation("grid oracle found no feasible lattice point".into())
    })?;
    let u: Vec<f64> = t.iter().map(|tk| m * tk).collect();
    finish(view, u, rho, sigma, count, None)
}

fn better(risk: f64, t: &[f64], incumbent: Option<&(f64, Vec<f64>)>) -> bool {
    match incumbent {
        None => true,
        Some((best, bt)) => {
            risk < *best
                || (risk == *best
                    && t.iter()
                        .zip(bt)
                        .find(|(a, b)| a != b)
                        .is_some_and(|(a, b)| a < b))
        }
    }
}

// Fills steps[depth..n-1] and sets the last entry so the steps sum to zero.
fn enumerate(
    depth: usize,
    partial: i64,
    steps: &mut [i64],
    lo: &[i64],
    hi: &[i64],
    visit: &mut dyn FnMut(&[i64]),
) {
    let n = steps.len();
    if depth == n - 1 {
        let last = -partial;
        if last >= lo[n - 1] && last <= hi[n - 1] {
            steps[n - 1] = last;
            visit(steps);
        }
        return;
    }
    for step in lo[depth]..=hi[depth] {
        steps[depth] = step;
        enumerate(depth + 1, partial + step, steps, lo, hi, visit);
    }
}

/// Pairwise feasible-direction descent over `(r, s)`.
///
/// Each iteration moves forgery from the forged category with the largest
/// `g_k = log2(t_k / p_k)` to the category with the smallest, or suppression
/// from the suppressed category with the smallest `g_k` to the visible one
/// with the largest, whichever gap is wider. The step equalizes the two
/// `g` values unless a bound is hit first.
pub fn oracle_descent(
    view: &CanonicalView,
    rho: f64,
    sigma: f64,
    max_iter: usize,
    tol: f64,
) -> Result<OracleResult> {
    descent(view, rho, sigma, max_iter, tol, None)
}

/// Like [`oracle_descent`], also returning the objective after every iteration
/// (the first entry is the starting point).
pub fn oracle_descent_trace(
    view: &CanonicalView,
    rho: f64,
    sigma: f64,
    max_iter: usize,
    tol: f64,
) -> Result<(OracleResult, Vec<f64>)> {
    let mut trace = Vec::new();
    let res = descent(view, rho, sigma, max_iter, tol, Some(&mut trace))?;
    Ok((res, trace))
}

fn descent(
    view: &CanonicalView,
    rho: f64,
    sigma: f64,
    max_iter: usize,
    tol: f64,
    mut trace: Option<&mut Vec<f64>>,
) -> Result<OracleResult> {
    check_rates(rho, sigma)?;
    let n = view.n();
    let q = view.q().as_slice();
    let p = view.p().as_slice();
    let m = 1.0 + rho - sigma;

    let mut r: Vec<f64> = p.iter().map(|pk| rho * pk).collect();
    let mut s: Vec<f64> = q.iter().map(|qk| sigma * qk).collect();
    let mut u: Vec<f64> = (0..n).map(|k| q[k] + r[k] - s[k]).collect();
    let objective = |u: &[f64]| {
        let t: Vec<f64> = u.iter().map(|x| x / m).collect();
        kl_bits(&t, p)
    };
    let mut f = objective(&u);
    if let Some(tr) = trace.as_deref_mut() {
        tr.push(f);
    }

    let mut iterations = 0;
    let mut residual;
    loop {
        let g: Vec<f64> = (0..n).map(|k| (u[k] / (m * p[k])).log2()).collect();
        let argmin = |pred: &dyn Fn(usize) -> bool| {
            (0..n).filter(|&k| pred(k)).min_by(|&a, &b| g[a].total_cmp(&g[b]))
        };
        let argmax = |pred: &dyn Fn(usize) -> bool| {
            (0..n).filter(|&k| pred(k)).max_by(|&a, &b| g[a].total_cmp(&g[b]))
        };

        let r_move = argmax(&|k| r[k] > 0.0)
            .zip(argmin(&|_| true))
            .map(|(a, b)| (a, b, g[a] - g[b]));
        let s_move = argmin(&|k| s[k] > 0.0)
            .zip(argmax(&|k| u[k] > 0.0))
            .map(|(a, b)| (a, b, g[b] - g[a]));
        let v_r = r_move.map_or(0.0, |x| x.2.max(0.0));
        let v_s = s_move.map_or(0.0, |x| x.2.max(0.0));
        residual = v_r.max(v_s);
        if residual <= tol || iterations >= max_iter {
            break;
        }
        iterations += 1;

        let forgery = v_r >= v_s;
        let (a, b, _) = if forgery { r_move.unwrap() } else { s_move.unwrap() };
        let (exact, cap) = if forgery {
            ((u[a] * p[b] - u[b] * p[a]) / (p[a] + p[b]), r[a])
        } else {
            ((u[b] * p[a] - u[a] * p[b]) / (p[a] + p[b]), s[a].min(u[b]))
        };
        let mut step = exact.min(cap).max(0.0);
        let mut moved = false;
        for _ in 0..60 {
            let (ua, ub) = if forgery {
                (u[a] - step, u[b] + step)
            } else {
                (u[a] + step, u[b] - step)
            };
            let mut trial = u.clone();
            trial[a] = ua.max(0.0);
            trial[b] = ub.max(0.0);
            let f_new = objective(&trial);
            // rounding noise near the optimum is tolerated; a real increase is not
            if f_new <= f + 1e-15 {
                let hit_cap = step == cap;
                if forgery {
                    r[a] = if hit_cap { 0.0 } else { r[a] - step };
                    r[b] += step;
                } else {
                    s[a] = if hit_cap { 0.0 } else { s[a] - step };
                    s[b] += step;
                }
                u = trial;
                f = f_new.min(f);
                moved = true;
                break;
            }
            step *= 0.5;
        }
        if let Some(tr) = trace.as_deref_mut() {
            tr.push(f);
        }
        if !moved {
            break;
        }
    }

    let result = finish(view, u, rho, sigma, iterations, Some(residual))?;
    if residual > tol {
        return Err(Error::NonConvergence {
            residual,
            iterations,
            best: Box::new(result),
        });
    }
    Ok(result)
}

/// A uniformly drawn PMF with every component at least [`INSTANCE_FLOOR`].
pub fn random_pmf<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Pmf {
    let w: Vec<f64> = (0..n).map(|_| Exp1.sample(rng)).collect();
    let total: f64 = w.iter().sum();
    let scale = 1.0 - INSTANCE_FLOOR * n as f64;
    Pmf::new(w.iter().map(|x| INSTANCE_FLOOR + scale * x / total).collect())
        .expect("floored Dirichlet draw is a valid PMF")
}

/// Random `(q, p)` pair for property tests and oracle runs (`n <= 99`).
pub fn random_pair<R: Rng + ?Sized>(rng: &mut R, n: usize) -> (Pmf, Pmf) {
    (random_pmf(rng, n), random_pmf(rng, n))
}

/// A pair whose ratios `q_k / p_k` take only a few distinct values, so
/// thresholds tie.
pub fn random_tied_pair<R: Rng + ?Sized>(rng: &mut R, n: usize) -> (Pmf, Pmf) {
    loop {
        let p = random_pmf(rng, n);
        let levels = rng.random_range(1..=n.div_ceil(2).max(2));
        let w: Vec<f64> = (0..n)
            .map(|_| (rng.random_range(0..levels) + 1) as f64)
            .collect();
        let z: f64 = (0..n).map(|k| w[k] * p[k]).sum();
        let q: Vec<f64> = (0..n).map(|k| w[k] * p[k] / z).collect();
        if q.iter().all(|&x| x >= INSTANCE_FLOOR) {
            return (Pmf::new(q).expect("normalized"), p);
        }
    }
}

/// Rates drawn from `[0, 1.5 rho_n] x [0, sigma_1]`.
pub fn random_rates<R: Rng + ?Sized>(rng: &mut R, view: &CanonicalView) -> (f64, f64) {
    let table = thresholds(view);
    let rho = rng.random::<f64>() * 1.5 * table.rho(view.n());
    let sigma = rng.random::<f64>() * table.sigma(1);
    (rho, sigma)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::profile::{canonicalize, kl_divergence};
    use crate::solver::{critical_rho, solve, InteriorPolicy};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn example() -> CanonicalView {
        canonicalize(
            &Pmf::new(vec![0.130, 0.440, 0.430]).unwrap(),
            &Pmf::new(vec![0.380, 0.390, 0.230]).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn grid_origin_is_exact() {
        let v = example();
        let res = oracle_grid(&v, 0.0, 0.0, 0.01).unwrap();
        assert_eq!(res.risk, kl_divergence(v.q(), v.p()).unwrap());
        assert_eq!(res.iterations, 1);
    }

    #[test]
    fn grid_low_budget_panel() {
        let res = oracle_grid(&example(), 0.05, 0.10, 0.002).unwrap();
        assert!((res.risk - 0.131).abs() < 0.01, "{}", res.risk);
        assert!((res.reconstructed.rho() - 0.05).abs() < 1e-9);
        assert!((res.reconstructed.sigma() - 0.10).abs() < 1e-9);
    }

    #[test]
    fn grid_reaches_boundary() {
        let res = oracle_grid(&example(), 0.219, 0.3, 0.002).unwrap();
        assert!(res.risk <= 0.001, "{}", res.risk);
    }

    #[test]
    fn grid_rejects_large_dimension_and_bad_resolution() {
        let v = canonicalize(&Pmf::uniform(5).unwrap(), &Pmf::uniform(5).unwrap()).unwrap();
        assert!(matches!(
            oracle_grid(&v, 0.1, 0.1, 0.01),
            Err(Error::DimensionTooLarge { got: 5, max: 4 })
        ));
        assert!(oracle_grid(&example(), 0.1, 0.1, 0.2).is_err());
        assert!(oracle_grid(&example(), 0.1, 0.1, 0.0).is_err());
    }

    #[test]
    fn descent_second_panel() {
        let v = example();
        let res = oracle_descent(&v, 0.10, 0.20, 1_000_000, 1e-10).unwrap();
        assert!((res.risk - 0.050).abs() < 1e-3);
        let sol = solve(&v, 0.10, 0.20, InteriorPolicy::ExactBudget).unwrap();
        assert!((res.risk - sol.risk).abs() < 1e-8);
    }

    #[test]
    fn descent_origin_does_nothing() {
        let v = example();
        let res = oracle_descent(&v, 0.0, 0.0, 100, 1e-10).unwrap();
        assert_eq!(res.iterations, 0);
        assert_eq!(res.u, v.q().as_slice().to_vec());
    }

    #[test]
    fn descent_objective_is_nonincreasing() {
        let v = example();
        let (_, trace) = oracle_descent_trace(&v, 0.1, 0.2, 100_000, 1e-10).unwrap();
        assert!(trace.len() > 1);
        assert!(trace.windows(2).all(|w| w[1] <= w[0] + 1e-15));
    }

    #[test]
    fn descent_reports_nonconvergence() {
        let v = example();
        match oracle_descent(&v, 0.1, 0.2, 2, 1e-14) {
            Err(Error::NonConvergence {
                iterations, best, ..
            }) => {
                assert_eq!(iterations, 2);
                assert!(best.risk.is_finite());
            }
            other => panic!("expected non-convergence, got {other:?}"),
        }
    }

    #[test]
    fn descent_matches_closed_form_on_larger_instance() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let (q, p) = random_pair(&mut rng, 8);
        let v = canonicalize(&q, &p).unwrap();
        let (rho, sigma) = random_rates(&mut rng, &v);
        let res = oracle_descent(&v, rho, sigma, 5_000_000, 1e-10).unwrap();
        let sol = solve(&v, rho, sigma, InteriorPolicy::ExactBudget).unwrap();
        assert!((res.risk - sol.risk).abs() <= 1e-7, "{} vs {}", res.risk, sol.risk);
    }

    #[test]
    fn reconstruct_examples() {
        let v = example();
        let q = v.q().as_slice().to_vec();
        let s = reconstruct_strategy(&v, &q, 0.1, 0.1).unwrap();
        for k in 0..3 {
            assert!((s.r()[k] - 0.1 * v.p()[k]).abs() < 1e-15);
            assert!((s.s()[k] - 0.1 * v.p()[k]).abs() < 1e-15);
        }

        let u = vec![q[0] + 0.05, q[1], q[2] - 0.05];
        let s = reconstruct_strategy(&v, &u, 0.05, 0.05).unwrap();
        for (got, want) in s.r().iter().zip([0.05, 0.0, 0.0]) {
            assert!((got - want).abs() < 1e-15);
        }
        for (got, want) in s.s().iter().zip([0.0, 0.0, 0.05]) {
            assert!((got - want).abs() < 1e-15);
        }

        let u = v.p().as_slice().to_vec();
        let s = reconstruct_strategy(&v, &u, 0.3, 0.3).unwrap();
        assert!((s.rho() - 0.3).abs() < 1e-12 && (s.sigma() - 0.3).abs() < 1e-12);
        let t = crate::profile::apparent_profile(&v, &s).unwrap();
        assert!(t.max_abs_diff(v.p()) < 1e-12);
    }

    #[test]
    fn reconstruct_rejects_infeasible() {
        let v = example();
        assert!(matches!(
            reconstruct_strategy(&v, &[0.5, 0.5, -0.1], 0.0, 0.1),
            Err(Error::InfeasibleU(_))
        ));
        assert!(matches!(
            reconstruct_strategy(&v, &[0.13, 0.44, 0.43], 0.0, 0.1),
            Err(Error::InfeasibleU(_))
        ));
        // needs 0.2 of forgery but only 0.1 is available
        assert!(matches!(
            reconstruct_strategy(&v, &[0.33, 0.44, 0.23], 0.1, 0.1),
            Err(Error::InfeasibleU(_))
        ));
    }

    #[test]
    fn generators_respect_floor() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for n in 2..12 {
            let (q, p) = random_pair(&mut rng, n);
            assert!(q.as_slice().iter().chain(p.as_slice()).all(|&x| x >= INSTANCE_FLOOR));
            let (q, p) = random_tied_pair(&mut rng, n);
            assert!(q.as_slice().iter().all(|&x| x >= INSTANCE_FLOOR));
            let v = canonicalize(&q, &p).unwrap();
            let (rho, sigma) = random_rates(&mut rng, &v);
            assert!(sigma < 1.0 && rho >= 0.0);
            let _ = critical_rho(&thresholds(&v), sigma).unwrap();
        }
    }
}
