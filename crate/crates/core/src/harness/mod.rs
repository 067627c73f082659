//! Benchmark problems, convergence studies, configuration files and the
//! coefficient property audit.

mod audit;
mod cases;
mod config;
mod study;

pub use audit::{property_audit, AuditReport, AuditSweep, Skipped, Violation};
pub use cases::{builtin_case, ex1_exponent, ex2_exponent, ex3_exponent, CaseParams, ManufacturedCase, CASE_NAMES};
pub use config::{parse_config, serialize, ProblemChoice, RunSpec};
pub use study::{
    converge_space, converge_time, csv_string, emit_csv, format_sci, run_case, ConvergenceReport, ReportRow,
    RunOutcome, CSV_HEADER,
};
