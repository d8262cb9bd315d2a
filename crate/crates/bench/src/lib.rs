//! Benchmark harness around the `qubo-dem` solvers: instance generation,
//! single runs, seeded tables, rank sweeps and rounding distributions.

pub mod bench;
pub mod config;
pub mod distribution;
pub mod error;
pub mod method;
pub mod report;
pub mod source;
pub mod sweep;

pub use bench::{compute, run_bench, BenchResults, BenchRow, RowKind};
pub use config::BenchConfig;
pub use error::{BenchError, Result};
pub use method::{run, Method, MethodParams, RunOutcome};
pub use report::SolverReport;
pub use source::InstanceSource;
