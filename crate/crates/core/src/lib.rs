//! Deadline-constrained offload scheduling for mobile-edge computing.
//!
//! The crate models a discrete-time MEC system (uplink/downlink virtual
//! access points with ring rate tables, fractionally-allocatable servers, a
//! wired backhaul) and schedules offload jobs to maximize total device energy
//! saved. It provides:
//!
//! * an offline approximation pipeline ([`offline::lhjs`]): schedule-instance
//!   enumeration, LP relaxations solved by a built-in revised simplex,
//!   randomized rounding for light instances and a partial-elimination-order /
//!   fractional local-ratio pass for heavy ones;
//! * an online heuristic ([`online::lbs`]) with three policy variants;
//! * a brute-force oracle and slot-by-slot validator ([`oracle`]) used as the
//!   trust anchor in tests;
//! * a seeded synthetic workload generator ([`workload`]) with utilization
//!   targeting, and CSV / SVG reporting ([`report`]).

#[cfg(test)]
pub(crate) mod fixtures;
pub mod instance;
pub mod lp;
pub mod model;
pub mod offline;
pub mod online;
pub mod oracle;
pub mod report;
pub mod simplex;
pub mod workload;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{0}")]
    Invalid(String),

    #[error("job `{job}`: window on `{vap}` is not {expected}")]
    InvalidWindow {
        job: String,
        vap: String,
        expected: &'static str,
    },

    #[error("no backhaul entry for machine pair ({a}, {b})")]
    MissingBackhaul { a: String, b: String },

    #[error("instance enumeration for job `{job}` exceeded the cap of {cap}")]
    EnumerationOverflow { job: String, cap: usize },

    #[error("kappa must be >= 1, got {0}")]
    BadKappa(f64),

    #[error("oracle refused: {0}")]
    OracleRefused(String),

    #[error("workload generation failed after {attempts} attempts; closest utilizations (u_b, u_c) = ({closest_ub:.3}, {closest_uc:.3})")]
    GenerationFailure {
        attempts: usize,
        closest_ub: f64,
        closest_uc: f64,
    },

    #[error("internal: {0}")]
    Internal(String),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),

    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::Invalid(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
