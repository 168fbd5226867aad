//! Thresholds, region classification, the closed-form optimum and its
//! optimality certificate.

mod certificate;
mod solve;
mod thresholds;

pub use certificate::{kkt_certificate, KktCertificate};
pub use solve::{proportionality, solve, InteriorPolicy, Solution, Solver};
pub use thresholds::{
    classify, critical_fraction, critical_rho, critical_sigma, thresholds, CriticalLine,
    RegionClass, RegionKind, ThresholdTable, BOUNDARY_TOLERANCE,
};

pub(crate) use thresholds::check_rates;
