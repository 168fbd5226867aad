//! Optimal forgery and suppression of ratings in a user profile.
//!
//! A user's ratings induce a histogram `q` over item categories; an observer
//! compares it with the population histogram `p`. The user may add fake
//! ratings (forgery, total rate `rho`) and withhold genuine ones
//! (suppression, total rate `sigma`). This crate finds the allocations that
//! minimize `D(t || p)` for the apparent profile `t`, in closed form, and
//! ships the tooling to check and explore the result:
//!
//! - [`profile`]: PMFs, KL divergence, canonical ordering.
//! - [`solver`]: thresholds, regions, the closed form and its certificate.
//! - [`oracle`]: brute-force and descent minimizers for cross-checking.
//! - [`analysis`]: gradient at the origin, decrement factors, pure strategies.
//! - [`movielens`]: MovieLens parsing, genre profiles and the profile store.
//! - [`experiment`]: reports, surfaces and population statistics.

pub mod analysis;
pub mod error;
pub mod experiment;
pub mod movielens;
pub mod oracle;
pub mod profile;
pub mod solver;

pub use error::{Error, Result};
pub use profile::{apparent_profile, canonicalize, kl_divergence, CanonicalView, Pmf, Strategy};
pub use solver::{classify, solve, InteriorPolicy, RegionKind, Solution, Solver};
