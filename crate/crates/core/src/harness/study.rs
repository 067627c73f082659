//! Convergence studies and their CSV form.

use std::path::Path;
use std::time::{Duration, Instant};

use rayon::prelude::*;

use super::ManufacturedCase;
use crate::fem2d::TriangleRule;
use crate::solver::{run, stability_certificate, SchemeConfig, SolutionHistory, StabilityReport};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct ReportRow {
    pub case: String,
    pub policy: String,
    pub p: usize,
    pub r: f64,
    pub delta: f64,
    pub m: usize,
    pub n: usize,
    pub error: f64,
    /// Blank for the first row of a refinement sequence.
    pub order: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunOutcome {
    pub error: f64,
    pub stability: StabilityReport,
    /// Largest relative residual over all CG solves of the run.
    pub worst_residual: f64,
    pub cg_iterations: usize,
    pub elapsed: Duration,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ConvergenceReport {
    pub case: String,
    pub rows: Vec<ReportRow>,
    /// One entry per row, same order.
    pub outcomes: Vec<RunOutcome>,
}

impl ConvergenceReport {
    pub fn errors(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.error).collect()
    }

    pub fn orders(&self) -> Vec<Option<f64>> {
        self.rows.iter().map(|r| r.order).collect()
    }
}

/// Runs one configuration and measures `max_{1≤n≤N} ‖u(t_n) - u_h^n‖`.
pub fn run_case(case: &ManufacturedCase, config: &SchemeConfig) -> Result<(SolutionHistory, RunOutcome)> {
    let start = Instant::now();
    let history = run(&case.problem, config)?;
    let rule = TriangleRule::with_degree(config.quad_degree);
    let exact = &case.exact;
    let error = history.max_error(&|x, y, t| exact(x, y, t), &rule);
    let stability = stability_certificate(&history, &case.problem, &rule);
    let reports = history.cg_reports.iter().chain(history.initial_report.iter());
    let worst_residual = reports.clone().fold(0.0f64, |m, r| m.max(r.relative_residual));
    let cg_iterations = reports.map(|r| r.iterations).sum();
    let outcome = RunOutcome {
        error,
        stability,
        worst_residual,
        cg_iterations,
        elapsed: start.elapsed(),
    };
    Ok((history, outcome))
}

fn study(
    case: &ManufacturedCase,
    configs: Vec<SchemeConfig>,
    label: impl Fn(&SchemeConfig) -> String + Sync,
    size: impl Fn(&SchemeConfig) -> f64,
) -> Result<ConvergenceReport> {
    if configs.is_empty() {
        return Err(Error::invalid("refinement list is empty"));
    }
    let outcomes: Vec<RunOutcome> = configs
        .par_iter()
        .map(|cfg| {
            run_case(case, cfg).map(|(_, o)| o).map_err(|e| Error::Study {
                what: label(cfg),
                source: Box::new(e),
            })
        })
        .collect::<Result<_>>()?;
    let mut rows = Vec::with_capacity(configs.len());
    for (i, (cfg, out)) in configs.iter().zip(&outcomes).enumerate() {
        let order = (i > 0).then(|| {
            let prev = &outcomes[i - 1];
            (prev.error / out.error).ln() / (size(cfg) / size(&configs[i - 1])).ln()
        });
        rows.push(ReportRow {
            case: case.name.clone(),
            policy: cfg.policy.to_string(),
            p: cfg.degree,
            r: cfg.grading,
            delta: case.delta,
            m: cfg.cells,
            n: cfg.steps,
            error: out.error,
            order,
        });
    }
    Ok(ConvergenceReport {
        case: case.name.clone(),
        rows,
        outcomes,
    })
}

fn check_increasing(list: &[usize], what: &str) -> Result<()> {
    if list.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::invalid(format!("{what} list must be strictly increasing: {list:?}")));
    }
    Ok(())
}

/// Temporal refinement at fixed `(M, p)`; orders are `log(e_{i-1}/e_i)/log(N_i/N_{i-1})`,
/// i.e. log2 ratios for doubling `N`.
pub fn converge_time(case: &ManufacturedCase, base: &SchemeConfig, steps: &[usize]) -> Result<ConvergenceReport> {
    check_increasing(steps, "N")?;
    let configs = steps
        .iter()
        .map(|&n| SchemeConfig { steps: n, ..base.clone() })
        .collect();
    study(case, configs, |c| format!("N = {}", c.steps), |c| c.steps as f64)
}

/// Spatial refinement at fixed `N`.
pub fn converge_space(case: &ManufacturedCase, base: &SchemeConfig, cells: &[usize]) -> Result<ConvergenceReport> {
    check_increasing(cells, "M")?;
    let configs = cells
        .iter()
        .map(|&m| SchemeConfig { cells: m, ..base.clone() })
        .collect();
    study(case, configs, |c| format!("M = {}", c.cells), |c| c.cells as f64)
}

/// Scientific notation with five significant digits and at least two
/// exponent digits, e.g. `9.2667e-04`.
pub fn format_sci(x: f64) -> String {
    let s = format!("{x:.4e}");
    match s.split_once('e') {
        Some((mantissa, exp)) => {
            let (sign, digits) = match exp.strip_prefix('-') {
                Some(d) => ('-', d),
                None => ('+', exp),
            };
            format!("{mantissa}e{sign}{digits:0>2}")
        }
        None => s,
    }
}

pub const CSV_HEADER: &str = "case,policy,p,r,delta,M,N,error,order";

pub fn csv_string(report: &ConvergenceReport) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in &report.rows {
        let order = r.order.map(format_sci).unwrap_or_default();
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{}\n",
            r.case,
            r.policy,
            r.p,
            r.r,
            r.delta,
            r.m,
            r.n,
            format_sci(r.error),
            order
        ));
    }
    out
}

/// Writes the report as CSV. An empty report is rejected before any file is
/// touched.
pub fn emit_csv(report: &ConvergenceReport, path: &Path) -> Result<()> {
    if report.rows.is_empty() {
        return Err(Error::invalid("refusing to write an empty report"));
    }
    std::fs::write(path, csv_string(report)).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(n: usize, error: f64, order: Option<f64>) -> ReportRow {
        ReportRow {
            case: "ex1".into(),
            policy: "offset 0.6".into(),
            p: 2,
            r: 2.0,
            delta: 0.6,
            m: 128,
            n,
            error,
            order,
        }
    }

    #[test]
    fn sci_format() {
        assert_eq!(format_sci(9.2667e-4), "9.2667e-04");
        assert_eq!(format_sci(1.2013), "1.2013e+00");
        assert_eq!(format_sci(3.2719e-2), "3.2719e-02");
        assert_eq!(format_sci(1.5e-120), "1.5000e-120");
        assert_eq!(format_sci(0.0), "0.0000e+00");
    }

    #[test]
    fn csv_layout() {
        let report = ConvergenceReport {
            case: "ex1".into(),
            rows: vec![row(16, 9.2667e-4, None), row(32, 2.5979e-4, Some(1.8347))],
            outcomes: Vec::new(),
        };
        let text = csv_string(&report);
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], CSV_HEADER);
        assert_eq!(lines[1], "ex1,offset 0.6,2,2,0.6,128,16,9.2667e-04,");
        assert_eq!(lines[2], "ex1,offset 0.6,2,2,0.6,128,32,2.5979e-04,1.8347e+00");
    }

    #[test]
    fn single_row_and_empty_reports() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("one.csv");
        let report = ConvergenceReport {
            case: "ex1".into(),
            rows: vec![row(16, 1e-3, None)],
            outcomes: Vec::new(),
        };
        emit_csv(&report, &path).unwrap();
        assert_eq!(std::fs::read_to_string(&path).unwrap().lines().count(), 2);

        let empty_path = dir.path().join("empty.csv");
        assert!(emit_csv(&ConvergenceReport::default(), &empty_path).is_err());
        assert!(!empty_path.exists());

        let bad = dir.path().join("missing").join("x.csv");
        assert_eq!(emit_csv(&report, &bad).unwrap_err().exit_code(), 3);
    }
}
