use crate::{Error, Result};
use std::fmt;
use std::sync::Arc;

type TensorFn = Arc<dyn Fn(f64, f64) -> [[f64; 2]; 2] + Send + Sync>;

/// Symmetric 2×2 diffusion tensor field with ellipticity bounds
/// `lower ≤ ξᵀK(x)ξ ≤ upper` for unit `ξ`.
#[derive(Clone)]
pub struct DiffusionTensor {
    field: TensorFn,
    constant: Option<[[f64; 2]; 2]>,
    lower: f64,
    upper: f64,
}

impl fmt::Debug for DiffusionTensor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("DiffusionTensor")
            .field("constant", &self.constant)
            .field("lower", &self.lower)
            .field("upper", &self.upper)
            .finish()
    }
}

impl DiffusionTensor {
    /// `K = c·I`.
    pub fn isotropic(c: f64) -> Result<Self> {
        if !(c > 0.0 && c.is_finite()) {
            return Err(Error::invalid(format!("diffusion coefficient must be positive, got {c}")));
        }
        let k = [[c, 0.0], [0.0, c]];
        Ok(Self {
            field: Arc::new(move |_, _| k),
            constant: Some(k),
            lower: c,
            upper: c,
        })
    }

    pub fn from_fn(
        field: impl Fn(f64, f64) -> [[f64; 2]; 2] + Send + Sync + 'static,
        lower: f64,
        upper: f64,
    ) -> Result<Self> {
        if !(lower > 0.0 && upper >= lower && upper.is_finite()) {
            return Err(Error::invalid(format!(
                "ellipticity bounds need 0 < lower <= upper, got [{lower}, {upper}]"
            )));
        }
        Ok(Self {
            field: Arc::new(field),
            constant: None,
            lower,
            upper,
        })
    }

    pub fn lower(&self) -> f64 {
        self.lower
    }

    pub fn upper(&self) -> f64 {
        self.upper
    }

    /// Returns the uniform value when the tensor is constant.
    pub fn constant_value(&self) -> Option<[[f64; 2]; 2]> {
        self.constant
    }

    pub fn eval(&self, x: f64, y: f64) -> [[f64; 2]; 2] {
        (self.field)(x, y)
    }

    /// Evaluates `K(x, y)` and checks symmetry and the ellipticity bounds.
    pub fn checked(&self, x: f64, y: f64) -> Result<[[f64; 2]; 2]> {
        let k = self.eval(x, y);
        let scale = k[0][0].abs().max(k[1][1].abs()).max(f64::MIN_POSITIVE);
        let asym = (k[0][1] - k[1][0]).abs();
        let m = 0.5 * (k[0][0] + k[1][1]);
        let off = 0.5 * (k[0][1] + k[1][0]);
        let r = (0.25 * (k[0][0] - k[1][1]).powi(2) + off * off).sqrt();
        let (lo, hi) = (m - r, m + r);
        let slack = 1e-12 * scale;
        if asym > slack || !(lo >= self.lower - slack && hi <= self.upper + slack) {
            return Err(Error::Ellipticity {
                x,
                y,
                lo,
                hi,
                lower: self.lower,
                upper: self.upper,
            });
        }
        Ok(k)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn isotropic_bounds() {
        let k = DiffusionTensor::isotropic(0.001).unwrap();
        assert_eq!(k.checked(0.3, 0.4).unwrap(), [[0.001, 0.0], [0.0, 0.001]]);
        assert!(DiffusionTensor::isotropic(0.0).is_err());
    }

    #[test]
    fn ellipticity_violation_detected() {
        let k = DiffusionTensor::from_fn(|x, _| [[1.0 + x, 0.5], [0.5, 1.0]], 0.4, 2.5).unwrap();
        assert!(k.checked(0.0, 0.0).is_ok());
        let tight = DiffusionTensor::from_fn(|_, _| [[1.0, 0.9], [0.9, 1.0]], 0.5, 2.0).unwrap();
        assert!(matches!(tight.checked(0.5, 0.5), Err(Error::Ellipticity { .. })));
        let asym = DiffusionTensor::from_fn(|_, _| [[1.0, 0.1], [0.0, 1.0]], 0.5, 2.0).unwrap();
        assert!(asym.checked(0.5, 0.5).is_err());
    }
}
