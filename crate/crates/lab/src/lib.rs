//! File formats, verification suites and the command-line driver around
//! `epstein-core`.

pub mod error;
pub mod fixtures;
pub mod grid_csv;
pub mod obj;
pub mod problem;
pub mod report;
pub mod suites;

pub use error::{LabError, Result};
pub use report::{Check, SuiteReport};
pub use suites::{run_suite, SuiteConfig};

/// Environment variable overriding the default seed.
pub const SEED_ENV: &str = "EPSTEIN_LAB_SEED";

/// Seed precedence: explicit flag, then the environment, then the default.
pub fn resolve_seed(flag: Option<u64>) -> Result<u64> {
    if let Some(s) = flag {
        return Ok(s);
    }
    match std::env::var(SEED_ENV) {
        Ok(v) => v.trim().parse().map_err(|_| LabError::Config(format!("{SEED_ENV}={v:?} is not an unsigned integer"))),
        Err(_) => Ok(suites::DEFAULT_SEED),
    }
}
