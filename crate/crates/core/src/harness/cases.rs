//! Manufactured solutions for the three benchmark problems.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use crate::fem2d::DiffusionTensor;
use crate::solver::{InitialData, ProblemKind, ProblemSpec, SpaceTimeFn};
use crate::special::{caputo_power_reference, gamma};
use crate::temporal::{Monotonicity, VariableExponent};
use crate::{Error, Result};

/// Parameters of a built-in case. `delta` applies to ex1/ex2, the exponent
/// endpoints to ex3.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CaseParams {
    pub delta: f64,
    pub alpha0: f64,
    pub alpha_t: f64,
}

impl Default for CaseParams {
    fn default() -> Self {
        Self {
            delta: 0.6,
            alpha0: 0.0,
            alpha_t: 0.7,
        }
    }
}

#[derive(Clone)]
pub struct ManufacturedCase {
    pub name: String,
    pub params: CaseParams,
    /// Regularity index: `u` behaves like `t^δ` near `t = 0`.
    pub delta: f64,
    pub problem: ProblemSpec,
    pub exact: SpaceTimeFn,
}

impl fmt::Debug for ManufacturedCase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ManufacturedCase")
            .field("name", &self.name)
            .field("params", &self.params)
            .field("delta", &self.delta)
            .field("problem", &self.problem)
            .finish()
    }
}

impl ManufacturedCase {
    pub fn exponent(&self) -> &VariableExponent {
        &self.problem.exponent
    }
}

/// `sin(mπx) sin(mπy)` with its gradient.
fn sine_mode(m: f64) -> (Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>, Arc<dyn Fn(f64, f64) -> [f64; 2] + Send + Sync>) {
    let w = m * PI;
    (
        Arc::new(move |x, y| (w * x).sin() * (w * y).sin()),
        Arc::new(move |x, y| [w * (w * x).cos() * (w * y).sin(), w * (w * x).sin() * (w * y).cos()]),
    )
}

/// `a + (b - a)(1 - t - sin(2π(1-t))/(2π))`: runs from `b` at `t = 0` to `a`
/// at `t = 1` with zero slope at both ends.
fn smooth_ramp(at_one: f64, at_zero: f64) -> (impl Fn(f64) -> f64 + Clone, impl Fn(f64) -> f64 + Clone) {
    let v = move |t: f64| at_one + (at_zero - at_one) * (1.0 - t - (2.0 * PI * (1.0 - t)).sin() / (2.0 * PI));
    let d = move |t: f64| (at_zero - at_one) * ((2.0 * PI * (1.0 - t)).cos() - 1.0);
    (v, d)
}

fn monotonicity(from: f64, to: f64) -> Monotonicity {
    if to > from {
        Monotonicity::Increasing
    } else if to < from {
        Monotonicity::Decreasing
    } else {
        Monotonicity::None
    }
}

/// Exponent families used by the cases, also reused by the audit.
pub fn ex1_exponent(delta: f64) -> Result<VariableExponent> {
    if !(delta > 0.0 && delta < 0.9) {
        return Err(Error::invalid(format!("ex1 needs delta in (0, 0.9), got {delta}")));
    }
    let (v, d) = smooth_ramp(0.9, delta);
    Ok(VariableExponent::new(v, 0.9, Monotonicity::Increasing, 1.0)?.with_derivative(d))
}

pub fn ex2_exponent() -> Result<VariableExponent> {
    Ok(
        VariableExponent::new(|t: f64| 0.9 * (-t).exp(), 0.9, Monotonicity::Decreasing, 1.0)?
            .with_derivative(|t: f64| -0.9 * (-t).exp()),
    )
}

pub fn ex3_exponent(alpha0: f64, alpha_t: f64) -> Result<VariableExponent> {
    for (name, a) in [("alpha0", alpha0), ("alphaT", alpha_t)] {
        if !(0.0..1.0).contains(&a) {
            return Err(Error::invalid(format!("ex3 needs {name} in [0, 1), got {a}")));
        }
    }
    let (v, d) = smooth_ramp(alpha_t, alpha0);
    let sup = alpha0.max(alpha_t);
    Ok(VariableExponent::new(v, sup, monotonicity(alpha0, alpha_t), 1.0)?.with_derivative(d))
}

pub const CASE_NAMES: [&str; 3] = ["ex1", "ex2", "ex3"];

pub fn builtin_case(name: &str, params: &CaseParams) -> Result<ManufacturedCase> {
    match name {
        "ex1" | "ex2" => {
            let delta = params.delta;
            let (exponent, mode, kappa) = if name == "ex1" {
                (ex1_exponent(delta)?, 1.0, 1.0)
            } else {
                if !(delta > 0.0 && delta <= 1.0) {
                    return Err(Error::invalid(format!("ex2 needs delta in (0, 1], got {delta}")));
                }
                (ex2_exponent()?, 2.0, 0.001)
            };
            let (s, grad) = sine_mode(mode);
            // L u = κ · 2(mπ)² u for the sine mode
            let lambda = kappa * 2.0 * (mode * PI).powi(2);
            let e = exponent.clone();
            let s_f = Arc::clone(&s);
            let source: SpaceTimeFn = Arc::new(move |x, y, t| {
                let time = 1.0 + t.powf(delta);
                (caputo_power_reference(delta, e.value(t), t) + lambda * time) * s_f(x, y)
            });
            let s_u = Arc::clone(&s);
            let exact: SpaceTimeFn = Arc::new(move |x, y, t| (1.0 + t.powf(delta)) * s_u(x, y));
            let problem = ProblemSpec {
                exponent,
                tensor: DiffusionTensor::isotropic(kappa)?,
                source,
                initial: Some(InitialData { value: s, gradient: grad }),
                final_time: 1.0,
                kind: ProblemKind::Subdiffusion,
                exact: Some(Arc::clone(&exact)),
            };
            Ok(ManufacturedCase {
                name: name.to_string(),
                params: *params,
                delta,
                problem,
                exact,
            })
        }
        "ex3" => {
            let (a0, at) = (params.alpha0, params.alpha_t);
            let exponent = ex3_exponent(a0, at)?;
            let (s, _) = sine_mode(2.0);
            let lambda = 0.001 * 8.0 * PI * PI;
            let p = 3.0 - a0;
            let g = gamma(4.0 - a0);
            let e = exponent.clone();
            let s_f = Arc::clone(&s);
            let source: SpaceTimeFn = Arc::new(move |x, y, t| {
                let a = e.value(t);
                let caputo = if t > 0.0 { g / gamma(4.0 - a0 - a) * t.powf(p - a) } else { 0.0 };
                (p * t.powf(p - 1.0) + lambda * t.powf(p) + caputo) * s_f(x, y)
            });
            let s_u = Arc::clone(&s);
            let exact: SpaceTimeFn = Arc::new(move |x, y, t| t.powf(p) * s_u(x, y));
            let problem = ProblemSpec {
                exponent,
                tensor: DiffusionTensor::isotropic(0.001)?,
                source,
                initial: None,
                final_time: 1.0,
                kind: ProblemKind::MobileImmobile {
                    k: Arc::new(|_| 1.0),
                    initial_rate: None,
                },
                exact: Some(Arc::clone(&exact)),
            };
            Ok(ManufacturedCase {
                name: name.to_string(),
                params: *params,
                delta: p,
                problem,
                exact,
            })
        }
        other => Err(Error::invalid(format!(
            "unknown case '{other}' (expected one of {})",
            CASE_NAMES.join(", ")
        ))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ex1_endpoints() {
        for delta in [0.2, 0.6] {
            let c = builtin_case("ex1", &CaseParams { delta, ..Default::default() }).unwrap();
            assert!((c.exponent().value(0.0) - delta).abs() < 1e-15);
            assert!((c.exponent().value(1.0) - 0.9).abs() < 1e-15);
        }
        assert!(builtin_case("ex1", &CaseParams { delta: 0.95, ..Default::default() }).is_err());
    }

    #[test]
    fn ex2_initial_state() {
        let c = builtin_case("ex2", &CaseParams { delta: 0.8, ..Default::default() }).unwrap();
        let u0 = &c.problem.initial.as_ref().unwrap().value;
        assert!((u0(0.25, 0.25) - 1.0).abs() < 1e-15);
        assert!(((c.exact)(0.3, 0.7, 0.0) - u0(0.3, 0.7)).abs() < 1e-15);
        assert!((c.exponent().value(0.0) - 0.9).abs() < 1e-15);
    }

    #[test]
    fn ex3_with_zero_start() {
        let c = builtin_case("ex3", &CaseParams { alpha0: 0.0, alpha_t: 0.7, ..Default::default() }).unwrap();
        let s = (2.0 * PI * 0.3).sin() * (2.0 * PI * 0.6).sin();
        assert!(((c.exact)(0.3, 0.6, 0.5) - 0.125 * s).abs() < 1e-15);
        assert_eq!((c.problem.source)(0.3, 0.6, 0.0), 0.0);
        assert!(c.problem.initial.is_none());
        assert!(c.exponent().value(0.0).abs() < 1e-15);
        assert!((c.exponent().value(1.0) - 0.7).abs() < 1e-15);
    }

    #[test]
    fn unknown_case() {
        assert!(builtin_case("ex4", &CaseParams::default()).is_err());
    }
}
