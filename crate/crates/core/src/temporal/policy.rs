use std::fmt;
use std::str::FromStr;

use super::{GradedMesh, Monotonicity, VariableExponent};
use crate::{Error, Result};

/// How `α_n` (and hence `θ_n = α_n/2`) is chosen on `[t_{n-1}, t_n]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PolicyKind {
    /// `α_n = min α` over the step.
    IntervalMin,
    /// `α_n = α(t_{n-a})` with `t_{n-a} = a t_{n-1} + (1-a) t_n`.
    Offset(f64),
    /// `α_n = α(t_{n-a})` with `a = c · α(t_n)`.
    OffsetFrac(f64),
    /// Solve `κ = α(t_{n-κ/2})`.
    Newton { tol: f64, max_iter: usize },
    AtLeft,
    AtRight,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SuperconvPolicy {
    pub kind: PolicyKind,
    /// Roundoff allowance when checking `α(t_{n-α_n/2}) >= α_n`.
    pub condition_slack: f64,
}

impl SuperconvPolicy {
    pub const DEFAULT_SLACK: f64 = 1e-14;

    pub fn new(kind: PolicyKind) -> Self {
        Self {
            kind,
            condition_slack: Self::DEFAULT_SLACK,
        }
    }

    pub fn interval_min() -> Self {
        Self::new(PolicyKind::IntervalMin)
    }

    pub fn offset(a: f64) -> Self {
        Self::new(PolicyKind::Offset(a))
    }

    pub fn offset_frac(c: f64) -> Self {
        Self::new(PolicyKind::OffsetFrac(c))
    }

    pub fn newton() -> Self {
        Self::new(PolicyKind::Newton {
            tol: 1e-12,
            max_iter: 50,
        })
    }

    pub fn at_left() -> Self {
        Self::new(PolicyKind::AtLeft)
    }

    pub fn at_right() -> Self {
        Self::new(PolicyKind::AtRight)
    }

    pub fn validate(&self) -> Result<()> {
        match self.kind {
            PolicyKind::Offset(a) if !(0.0..=1.0).contains(&a) => {
                Err(Error::invalid(format!("offset a = {a} must lie in [0, 1]")))
            }
            PolicyKind::OffsetFrac(c) if !(0.0..=1.0).contains(&c) => {
                Err(Error::invalid(format!("offset fraction c = {c} must lie in [0, 1]")))
            }
            PolicyKind::Newton { tol, max_iter } if !(tol > 0.0) || max_iter == 0 => Err(
                Error::invalid("newton policy needs tol > 0 and max_iter > 0".to_string()),
            ),
            _ if !(self.condition_slack >= 0.0) => {
                Err(Error::invalid("condition slack must be non-negative"))
            }
            _ => Ok(()),
        }
    }
}

impl fmt::Display for SuperconvPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            PolicyKind::IntervalMin => write!(f, "interval_min"),
            PolicyKind::Offset(a) => write!(f, "offset {a}"),
            PolicyKind::OffsetFrac(c) => write!(f, "offset_frac {c}"),
            PolicyKind::Newton { .. } => write!(f, "newton"),
            PolicyKind::AtLeft => write!(f, "at_left"),
            PolicyKind::AtRight => write!(f, "at_right"),
        }
    }
}

impl FromStr for SuperconvPolicy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut parts = s.split_whitespace();
        let head = parts.next().unwrap_or("");
        let arg = parts.next();
        if parts.next().is_some() {
            return Err(Error::invalid(format!("policy `{s}` has trailing tokens")));
        }
        let number = |name: &str| -> Result<f64> {
            let raw = arg.ok_or_else(|| Error::invalid(format!("policy `{name}` needs a value")))?;
            raw.parse::<f64>()
                .map_err(|_| Error::invalid(format!("policy `{name}`: `{raw}` is not a number")))
        };
        let no_arg = |p: SuperconvPolicy| -> Result<SuperconvPolicy> {
            match arg {
                Some(_) => Err(Error::invalid(format!("policy `{head}` takes no value"))),
                None => Ok(p),
            }
        };
        let policy = match head {
            "interval_min" => no_arg(Self::interval_min())?,
            "offset" => Self::offset(number("offset")?),
            "offset_frac" => Self::offset_frac(number("offset_frac")?),
            "newton" => no_arg(Self::newton())?,
            "at_left" => no_arg(Self::at_left())?,
            "at_right" => no_arg(Self::at_right())?,
            other => return Err(Error::invalid(format!("unknown policy `{other}`"))),
        };
        policy.validate()?;
        Ok(policy)
    }
}

/// Per-step exponent data.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepParams {
    pub n: usize,
    /// The selected `α_n` (κ).
    pub alpha_n: f64,
    /// `θ_n = α_n / 2`
    pub theta: f64,
    /// `t_{n-θ_n} = θ_n t_{n-1} + (1-θ_n) t_n`
    pub t_super: f64,
    /// `α_n^* = α(t_{n-θ_n})`
    pub alpha_star: f64,
}

impl StepParams {
    fn at(exponent: &VariableExponent, mesh: &GradedMesh, n: usize, alpha_n: f64) -> Self {
        let theta = 0.5 * alpha_n;
        let t_super = mesh.offset_time(n, theta);
        Self {
            n,
            alpha_n,
            theta,
            t_super,
            alpha_star: exponent.value(t_super),
        }
    }
}

const SAMPLES: usize = 33;
const GOLDEN_ITERS: usize = 30;

/// Chooses `α_n` for step `n` and verifies `α(t_{n-α_n/2}) >= α_n - slack`.
pub fn select_step_params(
    exponent: &VariableExponent,
    mesh: &GradedMesh,
    n: usize,
    policy: &SuperconvPolicy,
) -> Result<StepParams> {
    if n == 0 || n > mesh.steps() {
        return Err(Error::invalid(format!(
            "step index {n} outside 1..={}",
            mesh.steps()
        )));
    }
    let left = mesh.node(n - 1);
    let right = mesh.node(n);
    let alpha_n = match policy.kind {
        PolicyKind::IntervalMin => match exponent.monotonicity() {
            Monotonicity::Increasing => exponent.value(left),
            Monotonicity::Decreasing => exponent.value(right),
            Monotonicity::None => sampled_minimum(exponent, left, right),
        },
        PolicyKind::Offset(a) => exponent.value(mesh.offset_time(n, a)),
        PolicyKind::OffsetFrac(c) => {
            let a = c * exponent.value(right);
            exponent.value(mesh.offset_time(n, a))
        }
        PolicyKind::Newton { tol, max_iter } => newton_fixed_point(
            exponent, mesh, n, tol, max_iter, policy.condition_slack,
        )?,
        PolicyKind::AtLeft => exponent.value(left),
        PolicyKind::AtRight => exponent.value(right),
    };

    if !(0.0..1.0).contains(&alpha_n) || alpha_n > exponent.sup_bound() + 1e-15 {
        return Err(Error::ExponentOutOfRange {
            t: right,
            value: alpha_n,
            bound: exponent.sup_bound(),
        });
    }

    let params = StepParams::at(exponent, mesh, n, alpha_n);
    check_in_range(exponent, left, right, alpha_n)?;
    if params.alpha_star < alpha_n - policy.condition_slack {
        return Err(Error::ConditionViolated {
            n,
            alpha_n,
            alpha_star: params.alpha_star,
        });
    }
    Ok(params)
}

fn sample(exponent: &VariableExponent, left: f64, right: f64) -> Vec<(f64, f64)> {
    (0..SAMPLES)
        .map(|i| {
            let t = left + (right - left) * i as f64 / (SAMPLES - 1) as f64;
            (t, exponent.value(t))
        })
        .collect()
}

fn sampled_minimum(exponent: &VariableExponent, left: f64, right: f64) -> f64 {
    let pts = sample(exponent, left, right);
    let (imin, &(_, vmin)) = pts
        .iter()
        .enumerate()
        .min_by(|a, b| a.1 .1.total_cmp(&b.1 .1))
        .expect("non-empty sample");
    let mut lo = pts[imin.saturating_sub(1)].0;
    let mut hi = pts[(imin + 1).min(SAMPLES - 1)].0;
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = hi - inv_phi * (hi - lo);
    let mut x2 = lo + inv_phi * (hi - lo);
    let mut f1 = exponent.value(x1);
    let mut f2 = exponent.value(x2);
    for _ in 0..GOLDEN_ITERS {
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - inv_phi * (hi - lo);
            f1 = exponent.value(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + inv_phi * (hi - lo);
            f2 = exponent.value(x2);
        }
    }
    vmin.min(f1).min(f2)
}

/// Newton on `g(κ) = κ - α(t_n - κ τ_n / 2)`, started from `α(t_n)`.
fn newton_fixed_point(
    exponent: &VariableExponent,
    mesh: &GradedMesh,
    n: usize,
    tol: f64,
    max_iter: usize,
    slack: f64,
) -> Result<f64> {
    let tau = mesh.tau(n);
    let mut kappa = exponent.value(mesh.node(n));
    let mut converged = false;
    for _ in 0..max_iter {
        let t = mesh.offset_time(n, 0.5 * kappa);
        let g = kappa - exponent.value(t);
        let dg = 1.0 + 0.5 * tau * exponent.derivative(t);
        // damp toward plain fixed-point when the derivative is unreliable
        let step = if dg.abs() > 0.1 { g / dg } else { g };
        kappa = (kappa - step).clamp(0.0, exponent.sup_bound());
        if step.abs() <= tol {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::NewtonDiverged {
            n,
            iterations: max_iter,
        });
    }
    // The root satisfies the condition with equality; step κ down by a few
    // ulps if roundoff left it on the wrong side.
    for _ in 0..64 {
        let star = exponent.value(mesh.offset_time(n, 0.5 * kappa));
        if star >= kappa - slack {
            break;
        }
        kappa = star.min(kappa - 4.0 * f64::EPSILON * kappa.max(f64::MIN_POSITIVE));
    }
    Ok(kappa)
}

fn check_in_range(exponent: &VariableExponent, left: f64, right: f64, alpha_n: f64) -> Result<()> {
    let pts = sample(exponent, left, right);
    let lo = pts.iter().map(|p| p.1).fold(f64::INFINITY, f64::min);
    let hi = pts.iter().map(|p| p.1).fold(f64::NEG_INFINITY, f64::max);
    // values between samples can exceed the sampled extremes by at most one
    // sample spacing times the local slope
    let slope = pts
        .windows(2)
        .map(|w| ((w[1].1 - w[0].1) / (w[1].0 - w[0].0)).abs())
        .fold(0.0, f64::max);
    let spacing = (right - left) / (SAMPLES - 1) as f64;
    let allowance = 1e-12 + 2.0 * slope * spacing;
    if alpha_n < lo - allowance || alpha_n > hi + allowance {
        return Err(Error::invalid(format!(
            "selected α_n = {alpha_n} outside [{lo}, {hi}] on [{left}, {right}]"
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ex1(delta: f64) -> VariableExponent {
        let two_pi = 2.0 * std::f64::consts::PI;
        VariableExponent::new(
            move |t| 0.9 + (delta - 0.9) * (1.0 - t - (two_pi * (1.0 - t)).sin() / two_pi),
            0.9,
            Monotonicity::Increasing,
            1.0,
        )
        .unwrap()
        .with_derivative(move |t| (delta - 0.9) * (-1.0 + (two_pi * (1.0 - t)).cos()))
    }

    fn ex2() -> VariableExponent {
        VariableExponent::new(|t| 0.9 * (-t).exp(), 0.9, Monotonicity::Decreasing, 1.0).unwrap()
    }

    fn all_policies() -> Vec<SuperconvPolicy> {
        vec![
            SuperconvPolicy::interval_min(),
            SuperconvPolicy::offset(0.6),
            SuperconvPolicy::offset_frac(0.5),
            SuperconvPolicy::newton(),
            SuperconvPolicy::at_left(),
            SuperconvPolicy::at_right(),
        ]
    }

    #[test]
    fn constant_exponent_equality_case() {
        let e = VariableExponent::constant(0.5, 1.0).unwrap();
        let mesh = GradedMesh::new(1.0, 8, 2.0).unwrap();
        for policy in all_policies() {
            for n in 1..=8 {
                let p = select_step_params(&e, &mesh, n, &policy).unwrap();
                assert_eq!(p.alpha_n, 0.5);
                assert_eq!(p.theta, 0.25);
                assert_eq!(p.alpha_star, 0.5);
            }
        }
    }

    #[test]
    fn decreasing_interval_min_uses_right_endpoint() {
        let e = ex2();
        let mesh = GradedMesh::new(1.0, 16, 2.0).unwrap();
        for n in 1..=16 {
            let p = select_step_params(&e, &mesh, n, &SuperconvPolicy::interval_min()).unwrap();
            assert_eq!(p.alpha_n, e.value(mesh.node(n)));
            assert!(p.alpha_star >= p.alpha_n);
        }
    }

    #[test]
    fn increasing_offset_above_half_satisfies_condition() {
        let e = ex1(0.4);
        let mesh = GradedMesh::new(1.0, 32, 3.0).unwrap();
        for &a in &[0.5, 0.6, 0.8, 1.0] {
            for n in 1..=32 {
                let p = select_step_params(&e, &mesh, n, &SuperconvPolicy::offset(a)).unwrap();
                assert_eq!(p.alpha_n, e.value(mesh.offset_time(n, a)));
                assert!(p.alpha_star >= p.alpha_n);
            }
        }
    }

    #[test]
    fn right_endpoint_fails_for_increasing_exponent() {
        let e = ex1(0.4);
        let mesh = GradedMesh::new(1.0, 8, 2.0).unwrap();
        let err = select_step_params(&e, &mesh, 3, &SuperconvPolicy::at_right()).unwrap_err();
        assert!(matches!(err, Error::ConditionViolated { n: 3, .. }));
    }

    #[test]
    fn newton_solves_fixed_point() {
        for e in [ex1(0.2), ex1(0.6), ex2()] {
            let mesh = GradedMesh::new(1.0, 16, 2.0).unwrap();
            for n in 1..=16 {
                let p = select_step_params(&e, &mesh, n, &SuperconvPolicy::newton()).unwrap();
                assert!((p.alpha_n - p.alpha_star).abs() < 1e-12);
                assert!(p.alpha_star >= p.alpha_n - 1e-14);
            }
        }
    }

    #[test]
    fn unhinted_minimum_finds_interior_minimum() {
        // minimum at t = 0.3 inside a single step
        let e = VariableExponent::new(
            |t| 0.3 + (t - 0.3) * (t - 0.3),
            0.9,
            Monotonicity::None,
            1.0,
        )
        .unwrap();
        let mesh = GradedMesh::uniform(1.0, 2).unwrap();
        let p = select_step_params(&e, &mesh, 1, &SuperconvPolicy::interval_min()).unwrap();
        assert!((p.alpha_n - 0.3).abs() < 1e-12, "{}", p.alpha_n);
        assert!(p.alpha_star >= p.alpha_n);
    }

    #[test]
    fn parse_and_display_round_trip() {
        for s in ["interval_min", "offset 0.6", "offset_frac 0.5", "newton", "at_left", "at_right"] {
            let p: SuperconvPolicy = s.parse().unwrap();
            assert_eq!(p.to_string(), s);
        }
        assert!("offset".parse::<SuperconvPolicy>().is_err());
        assert!("offset 1.5".parse::<SuperconvPolicy>().is_err());
        assert!("newton 3".parse::<SuperconvPolicy>().is_err());
        assert!("bisect".parse::<SuperconvPolicy>().is_err());
    }

    #[test]
    fn step_index_checked() {
        let e = ex2();
        let mesh = GradedMesh::uniform(1.0, 4).unwrap();
        assert!(select_step_params(&e, &mesh, 0, &SuperconvPolicy::at_left()).is_err());
        assert!(select_step_params(&e, &mesh, 5, &SuperconvPolicy::at_left()).is_err());
    }
}
