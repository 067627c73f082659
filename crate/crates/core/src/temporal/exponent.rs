use std::fmt;
use std::sync::Arc;

use crate::{Error, Result};

type TimeFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Declared monotonicity of α on `[0, T]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Monotonicity {
    Increasing,
    Decreasing,
    None,
}

/// A variable fractional exponent `α(t)` on `[0, T]` with `0 ≤ α ≤ α* < 1`.
#[derive(Clone)]
pub struct VariableExponent {
    value: TimeFn,
    derivative: Option<TimeFn>,
    sup_bound: f64,
    monotonicity: Monotonicity,
    horizon: f64,
}

const VALIDATION_SAMPLES: usize = 2048;

impl VariableExponent {
    /// Wraps `f`, validating range and declared monotonicity on a dense sample
    /// of `[0, horizon]`.
    pub fn new<F>(f: F, sup_bound: f64, monotonicity: Monotonicity, horizon: f64) -> Result<Self>
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        if !(0.0..1.0).contains(&sup_bound) {
            return Err(Error::invalid(format!(
                "exponent bound α* = {sup_bound} must lie in [0, 1)"
            )));
        }
        if !(horizon > 0.0) || !horizon.is_finite() {
            return Err(Error::invalid(format!("horizon T = {horizon} must be positive")));
        }
        let exponent = Self {
            value: Arc::new(f),
            derivative: None,
            sup_bound,
            monotonicity,
            horizon,
        };
        exponent.validate()?;
        Ok(exponent)
    }

    pub fn constant(alpha: f64, horizon: f64) -> Result<Self> {
        Self::new(move |_| alpha, alpha, Monotonicity::None, horizon)
            .map(|e| e.with_derivative(|_| 0.0))
    }

    /// Attaches an analytic derivative (used by the Newton policy and by test
    /// oracles; a central difference is used otherwise).
    pub fn with_derivative<F>(mut self, d: F) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        self.derivative = Some(Arc::new(d));
        self
    }

    fn validate(&self) -> Result<()> {
        let mut prev: Option<f64> = None;
        for i in 0..=VALIDATION_SAMPLES {
            let t = self.horizon * i as f64 / VALIDATION_SAMPLES as f64;
            let v = self.value(t);
            if !v.is_finite() || v < 0.0 || v > self.sup_bound {
                return Err(Error::ExponentOutOfRange {
                    t,
                    value: v,
                    bound: self.sup_bound,
                });
            }
            if let Some(p) = prev {
                let slack = 1e-14;
                let ok = match self.monotonicity {
                    Monotonicity::Increasing => v >= p - slack,
                    Monotonicity::Decreasing => v <= p + slack,
                    Monotonicity::None => true,
                };
                if !ok {
                    return Err(Error::invalid(format!(
                        "exponent declared {:?} but α({t}) = {v} after {p}",
                        self.monotonicity
                    )));
                }
            }
            prev = Some(v);
        }
        Ok(())
    }

    #[inline]
    pub fn value(&self, t: f64) -> f64 {
        (self.value)(t)
    }

    pub fn derivative(&self, t: f64) -> f64 {
        match &self.derivative {
            Some(d) => d(t),
            None => {
                let h = 1e-6 * self.horizon;
                let lo = (t - h).max(0.0);
                let hi = (t + h).min(self.horizon);
                (self.value(hi) - self.value(lo)) / (hi - lo)
            }
        }
    }

    pub fn has_derivative(&self) -> bool {
        self.derivative.is_some()
    }

    pub fn sup_bound(&self) -> f64 {
        self.sup_bound
    }

    pub fn monotonicity(&self) -> Monotonicity {
        self.monotonicity
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }
}

impl fmt::Debug for VariableExponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("VariableExponent")
            .field("sup_bound", &self.sup_bound)
            .field("monotonicity", &self.monotonicity)
            .field("horizon", &self.horizon)
            .field("alpha(0)", &self.value(0.0))
            .field("alpha(T)", &self.value(self.horizon))
            .finish()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_out_of_range() {
        assert!(VariableExponent::constant(1.0, 1.0).is_err());
        assert!(VariableExponent::constant(-0.1, 1.0).is_err());
        let err = VariableExponent::new(|t| 0.5 + t, 0.9, Monotonicity::Increasing, 1.0);
        assert!(matches!(err, Err(Error::ExponentOutOfRange { .. })));
    }

    #[test]
    fn rejects_wrong_monotonicity() {
        let e = VariableExponent::new(|t| 0.5 - 0.1 * t, 0.5, Monotonicity::Increasing, 1.0);
        assert!(e.is_err());
        let e = VariableExponent::new(|t| 0.5 - 0.1 * t, 0.5, Monotonicity::Decreasing, 1.0);
        assert!(e.is_ok());
    }

    #[test]
    fn numeric_derivative_without_analytic() {
        let e = VariableExponent::new(|t| 0.2 + 0.3 * t * t, 0.5, Monotonicity::Increasing, 1.0)
            .unwrap();
        assert!((e.derivative(0.5) - 0.3).abs() < 1e-8);
    }
}
