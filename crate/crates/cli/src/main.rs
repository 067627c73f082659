use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use subdiff::harness::{
    converge_space, converge_time, csv_string, emit_csv, parse_config, property_audit, run_case, AuditSweep,
    ConvergenceReport, ReportRow, RunSpec,
};
use subdiff::Error;

/// Variable-exponent subdiffusion solver and convergence studies.
#[derive(Parser)]
#[command(name = "subdiff", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve once with the first N and first M of the config.
    Run(StudyArgs),
    /// Temporal refinement over the N list at the first M.
    ConvergeTime(StudyArgs),
    /// Spatial refinement over the M list at the first N.
    ConvergeSpace(StudyArgs),
    /// Check the coefficient and kernel inequalities over the default sweep.
    Audit(AuditArgs),
}

#[derive(Args)]
struct StudyArgs {
    #[arg(long)]
    config: PathBuf,
    /// Output CSV; overrides `out` in the config. Printed to stdout when neither is set.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads for independent runs.
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Args)]
struct AuditArgs {
    /// Seed for sweep shuffling and random test sequences.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    threads: Option<usize>,
}

fn load(path: &Path) -> Result<RunSpec, Error> {
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_config(&text)
}

fn set_threads(threads: Option<usize>) -> Result<(), Error> {
    if let Some(k) = threads {
        if k == 0 {
            return Err(Error::InvalidParameter("--threads must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(k)
            .build_global()
            .map_err(|e| Error::InvalidParameter(format!("thread pool: {e}")))?;
    }
    Ok(())
}

fn summarize(report: &ConvergenceReport) {
    for (row, out) in report.rows.iter().zip(&report.outcomes) {
        let cert = if !out.stability.applicable {
            "n/a".to_string()
        } else if out.stability.holds {
            format!("holds (max ratio {:.3e})", out.stability.worst_ratio)
        } else {
            "VIOLATED".to_string()
        };
        eprintln!(
            "M={} N={}: error {:.4e}, CG iterations {}, worst residual {:.2e}, stability {}, {:.1?}",
            row.m, row.n, row.error, out.cg_iterations, out.worst_residual, cert, out.elapsed
        );
    }
}

fn study(kind: &str, args: &StudyArgs) -> Result<(), Error> {
    set_threads(args.threads)?;
    let spec = load(&args.config)?;
    let case = spec.case()?;
    let base = spec.scheme();
    let report = match kind {
        "time" => converge_time(&case, &base, &spec.steps)?,
        "space" => converge_space(&case, &base, &spec.cells)?,
        _ => {
            let (_, outcome) = run_case(&case, &base)?;
            ConvergenceReport {
                case: case.name.clone(),
                rows: vec![ReportRow {
                    case: case.name.clone(),
                    policy: base.policy.to_string(),
                    p: base.degree,
                    r: base.grading,
                    delta: case.delta,
                    m: base.cells,
                    n: base.steps,
                    error: outcome.error,
                    order: None,
                }],
                outcomes: vec![outcome],
            }
        }
    };
    summarize(&report);
    match args.out.as_ref().or(spec.out.as_ref()) {
        Some(path) => emit_csv(&report, path),
        None => {
            print!("{}", csv_string(&report));
            Ok(())
        }
    }
}

fn audit(args: &AuditArgs) -> Result<bool, Error> {
    set_threads(args.threads)?;
    let report = property_audit(&AuditSweep::default_sweep(args.seed)?)?;
    println!(
        "configurations {}, skipped {}, tuples {}, checks {}, violations {}",
        report.configurations,
        report.skipped.len(),
        report.tuples,
        report.checks,
        report.violations.len()
    );
    println!(
        "negative kernel entries {}, max kernel identity residual {:.3e}, kernel-sum failures with min exponent {}",
        report.negative_kernels, report.max_identity_residual, report.kernel_sum_min_exponent_failures
    );
    for v in &report.violations {
        println!(
            "VIOLATION {}: family {} r={} N={} policy '{}' n={} k={}: {:e} < {:e}",
            v.check, v.family, v.grading, v.steps, v.policy, v.n, v.k, v.lhs, v.rhs
        );
    }
    Ok(report.passed())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match &cli.command {
        Command::Run(a) => study("run", a).map(|_| true),
        Command::ConvergeTime(a) => study("time", a).map(|_| true),
        Command::ConvergeSpace(a) => study("space", a).map(|_| true),
        Command::Audit(a) => audit(a),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
