//! `key = value` run configuration.

use std::path::PathBuf;

use super::{builtin_case, CaseParams, ManufacturedCase};
use crate::solver::SchemeConfig;
use crate::sparse::CgOptions;
use crate::temporal::SuperconvPolicy;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProblemChoice {
    Subdiffusion,
    MobileImmobile,
}

impl ProblemChoice {
    pub fn as_str(&self) -> &'static str {
        match self {
            ProblemChoice::Subdiffusion => "subdiffusion",
            ProblemChoice::MobileImmobile => "mobile_immobile",
        }
    }

    fn for_case(case: &str) -> Self {
        if case == "ex3" {
            ProblemChoice::MobileImmobile
        } else {
            ProblemChoice::Subdiffusion
        }
    }
}

/// A validated run configuration.
///
/// Keys and defaults: `case` (required: ex1, ex2, ex3), `problem` (implied by
/// the case), `delta = 0.6`, `alpha0 = 0`, `alphaT = 0.7`,
/// `N = 16, 32, 64`, `M = 16`, `r = 1`, `p = 2`, `policy = interval_min`,
/// `cg_tol = 1e-11`, `quad_degree = 6`, `out` (unset).
#[derive(Debug, Clone, PartialEq)]
pub struct RunSpec {
    pub problem: ProblemChoice,
    pub case: String,
    pub params: CaseParams,
    pub steps: Vec<usize>,
    pub cells: Vec<usize>,
    pub grading: f64,
    pub degree: usize,
    pub policy: SuperconvPolicy,
    pub cg_tol: f64,
    pub quad_degree: usize,
    pub out: Option<PathBuf>,
}

impl RunSpec {
    pub fn case(&self) -> Result<ManufacturedCase> {
        builtin_case(&self.case, &self.params)
    }

    /// Scheme settings for the first `N` and first `M` of the lists.
    pub fn scheme(&self) -> SchemeConfig {
        SchemeConfig {
            steps: self.steps[0],
            grading: self.grading,
            policy: self.policy,
            cells: self.cells[0],
            degree: self.degree,
            cg: CgOptions {
                tol: self.cg_tol,
                max_iter: None,
            },
            quad_degree: self.quad_degree,
            ..SchemeConfig::default()
        }
    }
}

fn fail(line: usize, message: impl Into<String>) -> Error {
    Error::Config {
        line,
        message: message.into(),
    }
}

fn number<T: std::str::FromStr>(line: usize, key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| fail(line, format!("{key}: cannot parse '{value}'")))
}

fn list(line: usize, key: &str, value: &str) -> Result<Vec<usize>> {
    let items: Vec<usize> = value
        .split(',')
        .map(|s| number(line, key, s.trim()))
        .collect::<Result<_>>()?;
    if items.is_empty() || items.contains(&0) {
        return Err(fail(line, format!("{key} entries must be positive")));
    }
    if items.windows(2).any(|w| w[1] <= w[0]) {
        return Err(fail(line, format!("{key} must be strictly increasing")));
    }
    Ok(items)
}

pub fn parse_config(text: &str) -> Result<RunSpec> {
    let mut problem = None;
    let mut case: Option<(usize, String)> = None;
    let mut params = CaseParams::default();
    let mut steps = vec![16, 32, 64];
    let mut cells = vec![16];
    let mut grading = 1.0;
    let mut degree = 2;
    let mut policy = SuperconvPolicy::interval_min();
    let mut cg_tol = 1e-11;
    let mut quad_degree = 6;
    let mut out = None;
    let mut seen = std::collections::HashSet::new();

    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let (key, value) = content
            .split_once('=')
            .map(|(k, v)| (k.trim(), v.trim()))
            .ok_or_else(|| fail(line, format!("expected 'key = value', found '{content}'")))?;
        if value.is_empty() {
            return Err(fail(line, format!("{key}: missing value")));
        }
        if !seen.insert(key.to_string()) {
            return Err(fail(line, format!("duplicate key '{key}'")));
        }
        match key {
            "problem" => {
                problem = Some(match value {
                    "subdiffusion" => ProblemChoice::Subdiffusion,
                    "mobile_immobile" | "mobile-immobile" => ProblemChoice::MobileImmobile,
                    _ => return Err(fail(line, format!("problem: unknown kind '{value}'"))),
                })
            }
            "case" => {
                if !super::CASE_NAMES.contains(&value) {
                    return Err(fail(line, format!("case: unknown case '{value}'")));
                }
                case = Some((line, value.to_string()));
            }
            "delta" => params.delta = number(line, key, value)?,
            "alpha0" => params.alpha0 = number(line, key, value)?,
            "alphaT" => params.alpha_t = number(line, key, value)?,
            "N" => steps = list(line, key, value)?,
            "M" => cells = list(line, key, value)?,
            "r" => {
                grading = number(line, key, value)?;
                if !(grading >= 1.0 && f64::is_finite(grading)) {
                    return Err(fail(line, format!("r = {value} violates r >= 1")));
                }
            }
            "p" => {
                degree = number(line, key, value)?;
                if !(1..=2).contains(&degree) {
                    return Err(fail(line, format!("p = {value} must be 1 or 2")));
                }
            }
            "policy" => {
                policy = value.parse().map_err(|e: Error| fail(line, format!("policy: {e}")))?;
            }
            "cg_tol" => {
                cg_tol = number(line, key, value)?;
                if !(cg_tol > 0.0 && cg_tol < 1.0) {
                    return Err(fail(line, format!("cg_tol = {value} must lie in (0, 1)")));
                }
            }
            "quad_degree" => {
                quad_degree = number(line, key, value)?;
                if quad_degree < 2 {
                    return Err(fail(line, format!("quad_degree = {value} must be at least 2")));
                }
            }
            "out" => out = Some(PathBuf::from(value)),
            _ => return Err(fail(line, format!("unknown key '{key}'"))),
        }
    }

    let (case_line, case) = case.ok_or_else(|| fail(0, "missing required key 'case'"))?;
    let implied = ProblemChoice::for_case(&case);
    let problem = problem.unwrap_or(implied);
    if problem != implied {
        return Err(fail(
            case_line,
            format!("case {case} is a {} problem, not {}", implied.as_str(), problem.as_str()),
        ));
    }
    let spec = RunSpec {
        problem,
        case,
        params,
        steps,
        cells,
        grading,
        degree,
        policy,
        cg_tol,
        quad_degree,
        out,
    };
    spec.case().map_err(|e| fail(case_line, e.to_string()))?;
    if problem == ProblemChoice::MobileImmobile && spec.grading != 1.0 {
        return Err(fail(0, "mobile_immobile problems require r = 1"));
    }
    Ok(spec)
}

fn join(list: &[usize]) -> String {
    list.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(", ")
}

/// Writes every key, so `parse_config(&serialize(spec))` reproduces `spec`.
pub fn serialize(spec: &RunSpec) -> String {
    let mut s = String::new();
    s.push_str(&format!("problem = {}\n", spec.problem.as_str()));
    s.push_str(&format!("case = {}\n", spec.case));
    s.push_str(&format!("delta = {}\n", spec.params.delta));
    s.push_str(&format!("alpha0 = {}\n", spec.params.alpha0));
    s.push_str(&format!("alphaT = {}\n", spec.params.alpha_t));
    s.push_str(&format!("N = {}\n", join(&spec.steps)));
    s.push_str(&format!("M = {}\n", join(&spec.cells)));
    s.push_str(&format!("r = {}\n", spec.grading));
    s.push_str(&format!("p = {}\n", spec.degree));
    s.push_str(&format!("policy = {}\n", spec.policy));
    s.push_str(&format!("cg_tol = {:e}\n", spec.cg_tol));
    s.push_str(&format!("quad_degree = {}\n", spec.quad_degree));
    if let Some(out) = &spec.out {
        s.push_str(&format!("out = {}\n", out.display()));
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::temporal::PolicyKind;

    const MINIMAL: &str = "# table 1\ncase = ex1\ndelta = 0.6\nN = 16, 32, 64\nM = 128\nr = 2\npolicy = offset 0.6\n";

    #[test]
    fn minimal_round_trip() {
        let spec = parse_config(MINIMAL).unwrap();
        assert_eq!(spec.problem, ProblemChoice::Subdiffusion);
        assert_eq!(spec.steps, vec![16, 32, 64]);
        assert_eq!(spec.policy.kind, PolicyKind::Offset(0.6));
        let again = parse_config(&serialize(&spec)).unwrap();
        assert_eq!(again, spec);
    }

    #[test]
    fn policy_strings() {
        let spec = parse_config("case = ex2\npolicy = offset_frac 0.5\n").unwrap();
        assert_eq!(spec.policy.kind, PolicyKind::OffsetFrac(0.5));
        let spec = parse_config("case = ex1\npolicy = newton\n").unwrap();
        assert!(matches!(spec.policy.kind, PolicyKind::Newton { .. }));
        assert!(parse_config("case = ex1\npolicy = middle\n").is_err());
    }

    #[test]
    fn errors_name_the_line() {
        match parse_config("case = ex1\nr = 0.5\n") {
            Err(Error::Config { line, message }) => {
                assert_eq!(line, 2);
                assert!(message.contains("r") && message.contains("r >= 1"), "{message}");
            }
            other => panic!("{other:?}"),
        }
        assert!(matches!(parse_config("case = ex1\ncolour = red\n"), Err(Error::Config { line: 2, .. })));
        assert!(matches!(parse_config("case = ex1\nN = 16, x\n"), Err(Error::Config { line: 2, .. })));
        assert!(matches!(parse_config("delta = 0.3\n"), Err(Error::Config { .. })));
        assert!(parse_config("case = ex1\ncase = ex2\n").is_err());
        assert!(parse_config("case = ex3\nr = 2\n").is_err());
        assert!(parse_config("case = ex1\nproblem = mobile_immobile\n").is_err());
        assert!(parse_config("case = ex1\ndelta = 0.95\n").is_err());
        assert_eq!(parse_config("case = ex1\np = 3\n").unwrap_err().exit_code(), 1);
    }

    #[test]
    fn defaults() {
        let spec = parse_config("case = ex3\nalpha0 = 0.4\nalphaT = 0.6\n").unwrap();
        assert_eq!(spec.problem, ProblemChoice::MobileImmobile);
        assert_eq!(spec.cells, vec![16]);
        assert_eq!(spec.degree, 2);
        assert_eq!(spec.cg_tol, 1e-11);
        assert!(spec.out.is_none());
        let scheme = spec.scheme();
        assert_eq!(scheme.steps, 16);
        assert_eq!(scheme.quad_degree, 6);
    }
}
