use std::f64::consts::PI;
use std::sync::Arc;

use subdiff::fem2d::DiffusionTensor;
use subdiff::harness::{
    builtin_case, converge_time, csv_string, emit_csv, parse_config, CaseParams, ConvergenceReport, ManufacturedCase,
};
use subdiff::solver::{InitialData, ProblemKind, ProblemSpec, SchemeConfig};
use subdiff::temporal::{SuperconvPolicy, VariableExponent};

/// `α ≡ 0` with `u = (1 + t) sin(πx) sin(πy)`, so `f = (t + 2π²(1 + t)) sin sin`.
fn linear_case() -> ManufacturedCase {
    let s = |x: f64, y: f64| (PI * x).sin() * (PI * y).sin();
    let exact: Arc<dyn Fn(f64, f64, f64) -> f64 + Send + Sync> = Arc::new(move |x, y, t| (1.0 + t) * s(x, y));
    let problem = ProblemSpec {
        exponent: VariableExponent::constant(0.0, 1.0).unwrap(),
        tensor: DiffusionTensor::isotropic(1.0).unwrap(),
        source: Arc::new(move |x, y, t| (t + 2.0 * PI * PI * (1.0 + t)) * s(x, y)),
        initial: Some(InitialData {
            value: Arc::new(s),
            gradient: Arc::new(|x, y| [PI * (PI * x).cos() * (PI * y).sin(), PI * (PI * x).sin() * (PI * y).cos()]),
        }),
        final_time: 1.0,
        kind: ProblemKind::Subdiffusion,
        exact: Some(Arc::clone(&exact)),
    };
    ManufacturedCase {
        name: "linear".into(),
        params: CaseParams::default(),
        delta: 1.0,
        problem,
        exact,
    }
}

#[test]
fn linear_in_time_has_no_temporal_error() {
    let case = linear_case();
    for r in [1.0, 3.0] {
        let base = SchemeConfig {
            cells: 8,
            degree: 2,
            grading: r,
            policy: SuperconvPolicy::interval_min(),
            ..SchemeConfig::default()
        };
        let report = converge_time(&case, &base, &[2, 4, 8, 16]).unwrap();
        let errs = report.errors();
        let spatial = errs[0];
        assert!(spatial > 0.0 && spatial < 1e-2, "{errs:?}");
        for e in &errs {
            assert!((e - spatial).abs() <= 1e-9 * spatial, "{errs:?}");
        }
    }
}

#[test]
fn config_to_csv() {
    let spec = parse_config("case = ex1\ndelta = 0.8\nr = 2\nM = 4\np = 1\nN = 4, 8\npolicy = offset 0.6\n").unwrap();
    let case = spec.case().unwrap();
    let report = converge_time(&case, &spec.scheme(), &spec.steps).unwrap();
    let csv = csv_string(&report);
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines.len(), 3);
    assert_eq!(lines[0], "case,policy,p,r,delta,M,N,error,order");
    assert!(lines[1].starts_with("ex1,offset 0.6,1,2,0.8,4,4,") && lines[1].ends_with(','));
    assert!(!lines[2].ends_with(','));

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("out.csv");
    emit_csv(&report, &path).unwrap();
    assert_eq!(std::fs::read_to_string(&path).unwrap(), csv);

    let empty = dir.path().join("empty.csv");
    assert!(emit_csv(&ConvergenceReport::default(), &empty).is_err());
    assert!(!empty.exists());
}

#[test]
fn study_rows_follow_input_order() {
    let case = builtin_case("ex2", &CaseParams { delta: 0.8, ..Default::default() }).unwrap();
    let base = SchemeConfig {
        cells: 4,
        degree: 1,
        policy: SuperconvPolicy::offset_frac(0.5),
        ..SchemeConfig::default()
    };
    let report = converge_time(&case, &base, &[4, 8, 16]).unwrap();
    let ns: Vec<usize> = report.rows.iter().map(|r| r.n).collect();
    assert_eq!(ns, [4, 8, 16]);
    assert!(report.rows[0].order.is_none());
    assert!(report.rows[1..].iter().all(|r| r.order.is_some()));
}
