//! Probability profiles, KL divergence, canonical ordering and the
//! apparent profile an observer sees after forgery and suppression.
//!
//! A user profile `q` and the population profile `p` are probability mass
//! functions over the same `n` categories. The closed-form solver works on a
//! [`CanonicalView`] of the pair, where categories are relabeled so that the
//! ratios `q_k / p_k` are nondecreasing. Cumulative sums used throughout the
//! solver are precomputed there.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Absolute tolerance for invariant checks (sums, equalities).
pub const SUM_TOLERANCE: f64 = 1e-9;

/// Input vectors whose sum is within this distance of 1 are renormalized;
/// anything further off is rejected.
pub const RENORMALIZE_TOLERANCE: f64 = 1e-6;

/// Slack allowed below zero after floating-point arithmetic.
pub const NONNEG_SLACK: f64 = 1e-12;

/// A probability mass function over `n >= 2` categories.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct Pmf {
    mass: Vec<f64>,
}

impl Pmf {
    /// Validates and wraps a probability vector. Sums within
    /// [`RENORMALIZE_TOLERANCE`] of 1 are renormalized.
    pub fn new(mass: Vec<f64>) -> Result<Self> {
        if mass.len() < 2 {
            return Err(Error::TooFewCategories(mass.len()));
        }
        for (index, &value) in mass.iter().enumerate() {
            if !value.is_finite() {
                return Err(Error::NonFinite { index, value });
            }
            if value < 0.0 {
                return Err(Error::NegativeMass { index, value });
            }
        }
        let sum: f64 = mass.iter().sum();
        if (sum - 1.0).abs() > RENORMALIZE_TOLERANCE {
            return Err(Error::NotNormalized { sum });
        }
        let mut mass = mass;
        // leave rounding-level error alone so stored vectors reload bit-for-bit
        if (sum - 1.0).abs() > 1e-12 {
            mass.iter_mut().for_each(|m| *m /= sum);
        }
        Ok(Self { mass })
    }

    /// Normalizes nonnegative weights (e.g. histogram counts) into a PMF.
    pub fn from_weights(weights: &[f64]) -> Result<Self> {
        if weights.len() < 2 {
            return Err(Error::TooFewCategories(weights.len()));
        }
        for (index, &value) in weights.iter().enumerate() {
            if !value.is_finite() {
                return Err(Error::NonFinite { index, value });
            }
            if value < 0.0 {
                return Err(Error::NegativeMass { index, value });
            }
        }
        let total: f64 = weights.iter().sum();
        if total <= 0.0 {
            return Err(Error::NotNormalized { sum: total });
        }
        Self::new(weights.iter().map(|w| w / total).collect())
    }

    pub fn uniform(n: usize) -> Result<Self> {
        Self::new(vec![1.0 / n as f64; n])
    }

    pub fn len(&self) -> usize {
        self.mass.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mass.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.mass
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.mass
    }

    /// Indexes (0-based) of categories with zero mass.
    pub fn zero_categories(&self) -> Vec<usize> {
        self.mass
            .iter()
            .enumerate()
            .filter(|(_, &m)| m <= 0.0)
            .map(|(k, _)| k)
            .collect()
    }

    pub fn is_strictly_positive(&self) -> bool {
        self.mass.iter().all(|&m| m > 0.0)
    }

    /// Largest componentwise absolute difference.
    pub fn max_abs_diff(&self, other: &Pmf) -> f64 {
        self.mass
            .iter()
            .zip(&other.mass)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

impl std::ops::Index<usize> for Pmf {
    type Output = f64;

    fn index(&self, k: usize) -> &f64 {
        &self.mass[k]
    }
}

impl TryFrom<Vec<f64>> for Pmf {
    type Error = Error;

    fn try_from(mass: Vec<f64>) -> Result<Self> {
        Pmf::new(mass)
    }
}

impl From<Pmf> for Vec<f64> {
    fn from(p: Pmf) -> Vec<f64> {
        p.mass
    }
}

/// KL divergence `D(a || b)` in bits, with `0 log 0 = 0`.
pub fn kl_divergence(a: &Pmf, b: &Pmf) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch {
            left: a.len(),
            right: b.len(),
        });
    }
    if let Some(index) = (0..a.len()).find(|&k| a[k] > 0.0 && b[k] <= 0.0) {
        return Err(Error::SupportViolation { index });
    }
    Ok(kl_bits(a.as_slice(), b.as_slice()))
}

/// Unchecked base-2 divergence sum over raw slices. Callers guarantee
/// `b_k > 0` wherever `a_k > 0`. Clamped at zero.
pub(crate) fn kl_bits(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .filter(|(&ak, _)| ak > 0.0)
        .map(|(&ak, &bk)| ak * (ak / bk).log2())
        .sum::<f64>()
        .max(0.0)
}

/// A `(q, p)` pair relabeled so that `q_k / p_k` is nondecreasing.
///
/// Indexing conventions: canonical categories are stored 0-based, but the
/// cumulative accessors take the 1-based counts used by the threshold
/// formulas, so `head_q(i) = q_1 + ... + q_i` and
/// `tail_q(j) = q_j + ... + q_n`.
#[derive(Debug, Clone, PartialEq)]
pub struct CanonicalView {
    permutation: Vec<usize>,
    q: Pmf,
    p: Pmf,
    ratios: Vec<f64>,
    cum_q: Vec<f64>,
    cum_p: Vec<f64>,
    tail_q: Vec<f64>,
    tail_p: Vec<f64>,
}

/// Relabels `(q, p)` into canonical order. Ties in `q_k / p_k` are broken by
/// original index so the permutation is deterministic.
pub fn canonicalize(q: &Pmf, p: &Pmf) -> Result<CanonicalView> {
    if q.len() != p.len() {
        return Err(Error::DimensionMismatch {
            left: q.len(),
            right: p.len(),
        });
    }
    let n = q.len();
    let offending: Vec<usize> = (0..n).filter(|&k| q[k] <= 0.0 || p[k] <= 0.0).collect();
    if !offending.is_empty() {
        return Err(Error::PositivityViolation {
            categories: offending,
        });
    }

    let raw: Vec<f64> = (0..n).map(|k| q[k] / p[k]).collect();
    let mut permutation: Vec<usize> = (0..n).collect();
    permutation.sort_by(|&a, &b| raw[a].total_cmp(&raw[b]).then(a.cmp(&b)));

    let qc: Vec<f64> = permutation.iter().map(|&k| q[k]).collect();
    let pc: Vec<f64> = permutation.iter().map(|&k| p[k]).collect();
    let ratios: Vec<f64> = permutation.iter().map(|&k| raw[k]).collect();

    let mut cum_q = vec![0.0; n + 1];
    let mut cum_p = vec![0.0; n + 1];
    for k in 0..n {
        cum_q[k + 1] = cum_q[k] + qc[k];
        cum_p[k + 1] = cum_p[k] + pc[k];
    }
    // tail[j] for 1-based j; tail[n + 1] = 0, tail[0] is unused.
    let mut tail_q = vec![0.0; n + 2];
    let mut tail_p = vec![0.0; n + 2];
    for j in (1..=n).rev() {
        tail_q[j] = tail_q[j + 1] + qc[j - 1];
        tail_p[j] = tail_p[j + 1] + pc[j - 1];
    }
    tail_q[0] = tail_q[1];
    tail_p[0] = tail_p[1];

    Ok(CanonicalView {
        permutation,
        q: Pmf { mass: qc },
        p: Pmf { mass: pc },
        ratios,
        cum_q,
        cum_p,
        tail_q,
        tail_p,
    })
}

impl CanonicalView {
    pub fn n(&self) -> usize {
        self.q.len()
    }

    pub fn q(&self) -> &Pmf {
        &self.q
    }

    pub fn p(&self) -> &Pmf {
        &self.p
    }

    /// `q_k / p_k` in canonical order (nondecreasing).
    pub fn ratios(&self) -> &[f64] {
        &self.ratios
    }

    /// Maps canonical index to original category index.
    pub fn permutation(&self) -> &[usize] {
        &self.permutation
    }

    /// `Q_i`, the mass of the first `i` canonical categories.
    pub fn head_q(&self, i: usize) -> f64 {
        self.cum_q[i]
    }

    /// `P_i`, the mass of the first `i` canonical categories.
    pub fn head_p(&self, i: usize) -> f64 {
        self.cum_p[i]
    }

    /// `Q̄_j = q_j + ... + q_n` (1-based `j`, `tail_q(n + 1) = 0`).
    pub fn tail_q(&self, j: usize) -> f64 {
        self.tail_q[j]
    }

    /// `P̄_j = p_j + ... + p_n` (1-based `j`, `tail_p(n + 1) = 0`).
    pub fn tail_p(&self, j: usize) -> f64 {
        self.tail_p[j]
    }

    /// True when `q` and `p` agree within [`SUM_TOLERANCE`].
    pub fn is_degenerate(&self) -> bool {
        self.q.max_abs_diff(&self.p) <= SUM_TOLERANCE
    }

    /// Scatters a canonical-order vector back into original category order.
    pub fn to_original(&self, canonical: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; canonical.len()];
        for (k, &orig) in self.permutation.iter().enumerate() {
            out[orig] = canonical[k];
        }
        out
    }

    /// Gathers an original-order vector into canonical order.
    pub fn to_canonical(&self, original: &[f64]) -> Vec<f64> {
        self.permutation.iter().map(|&orig| original[orig]).collect()
    }
}

/// Forgery (`r`) and suppression (`s`) allocations per canonical category.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Strategy {
    r: Vec<f64>,
    s: Vec<f64>,
    rho: f64,
    sigma: f64,
}

impl Strategy {
    /// Builds a strategy; components within [`NONNEG_SLACK`] below zero are
    /// clamped, anything more negative is rejected. Requires `sum(s) < 1`.
    pub fn new(r: Vec<f64>, s: Vec<f64>) -> Result<Self> {
        if r.len() != s.len() {
            return Err(Error::DimensionMismatch {
                left: r.len(),
                right: s.len(),
            });
        }
        let clamp = |v: Vec<f64>, what: &str| -> Result<Vec<f64>> {
            v.into_iter()
                .enumerate()
                .map(|(k, x)| {
                    if !x.is_finite() || x < -NONNEG_SLACK {
                        Err(Error::FeasibilityViolation(format!(
                            "{what}[{k}] = {x} is negative or non-finite"
                        )))
                    } else {
                        Ok(x.max(0.0))
                    }
                })
                .collect()
        };
        let r = clamp(r, "r")?;
        let s = clamp(s, "s")?;
        let rho = r.iter().sum();
        let sigma: f64 = s.iter().sum();
        if sigma >= 1.0 {
            return Err(Error::FeasibilityViolation(format!(
                "suppression total {sigma} must be below 1"
            )));
        }
        Ok(Self { r, s, rho, sigma })
    }

    pub fn zero(n: usize) -> Self {
        Self {
            r: vec![0.0; n],
            s: vec![0.0; n],
            rho: 0.0,
            sigma: 0.0,
        }
    }

    pub fn r(&self) -> &[f64] {
        &self.r
    }

    pub fn s(&self) -> &[f64] {
        &self.s
    }

    /// Forgery rate, the sum of `r`.
    pub fn rho(&self) -> f64 {
        self.rho
    }

    /// Suppression rate, the sum of `s`.
    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn len(&self) -> usize {
        self.r.len()
    }

    pub fn is_empty(&self) -> bool {
        self.r.is_empty()
    }

    /// Unnormalized apparent mass `q + r - s`.
    pub fn apparent_mass(&self, view: &CanonicalView) -> Result<Vec<f64>> {
        if self.len() != view.n() {
            return Err(Error::DimensionMismatch {
                left: self.len(),
                right: view.n(),
            });
        }
        (0..view.n())
            .map(|k| {
                let u = view.q()[k] + self.r[k] - self.s[k];
                if u < -NONNEG_SLACK {
                    Err(Error::InvariantViolation(format!(
                        "q + r - s = {u} < 0 at canonical category {k}"
                    )))
                } else {
                    Ok(u.max(0.0))
                }
            })
            .collect()
    }

    /// Splits an apparent mass vector `u` into forgery and suppression,
    /// padding both sides with the same `alpha_k` proportional to `p_k` so
    /// that `sum(r) = rho` and `sum(s) = sigma`. Callers validate `u`.
    pub(crate) fn from_apparent_mass(view: &CanonicalView, u: &[f64], rho: f64) -> Result<Self> {
        let q = view.q().as_slice();
        let p = view.p().as_slice();
        let excess: f64 = u.iter().zip(q).map(|(uk, qk)| (uk - qk).max(0.0)).sum();
        let mut pad = rho - excess;
        if pad < 0.0 && pad >= -SUM_TOLERANCE {
            pad = 0.0;
        }
        let r = (0..q.len())
            .map(|k| (u[k] - q[k]).max(0.0) + pad * p[k])
            .collect();
        let s = (0..q.len())
            .map(|k| (q[k] - u[k]).max(0.0) + pad * p[k])
            .collect();
        Strategy::new(r, s)
    }

    /// Same allocations in original category order.
    pub fn to_original(&self, view: &CanonicalView) -> Strategy {
        Strategy {
            r: view.to_original(&self.r),
            s: view.to_original(&self.s),
            rho: self.rho,
            sigma: self.sigma,
        }
    }
}

/// The profile seen from outside, `t = (q + r - s) / (1 + rho - sigma)`,
/// in canonical order.
pub fn apparent_profile(view: &CanonicalView, strategy: &Strategy) -> Result<Pmf> {
    let u = strategy.apparent_mass(view)?;
    let scale = 1.0 + strategy.rho() - strategy.sigma();
    if scale <= 0.0 {
        return Err(Error::InvariantViolation(format!(
            "1 + rho - sigma = {scale} must be positive"
        )));
    }
    Pmf::new(u.into_iter().map(|x| x / scale).collect())
}
