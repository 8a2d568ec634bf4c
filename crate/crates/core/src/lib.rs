pub mod config;
pub mod domain;
pub mod error;
pub mod harness;
pub mod hfr;
pub mod line_search;
pub mod linalg;
pub mod nelder_mead;
pub mod objective;
pub mod pattern_search;
pub mod powell;
pub mod rbf;
pub mod special;
pub mod sto;
pub mod test_functions;

pub use domain::{clip_to_bounds, reflect_into_bounds, Domain};
pub use error::{DfoError, Result};
pub use objective::{cache_key, CacheKey, ObjectiveHandle, OptResult, Termination, TraceEntry};
pub use config::{ConfigError, MethodKind, RunConfig};
pub use harness::{execute, run_suite, solve, suite, HarnessError, RunReport, Suite, SUITE_NAMES};
