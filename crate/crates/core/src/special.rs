//! Special functions used by the coefficient formulas.

/// Gamma function, Lanczos approximation (relative error well below 1e-13 on
/// the ranges used here).
pub fn gamma(x: f64) -> f64 {
    statrs::function::gamma::gamma(x)
}

/// Exact constant-order Caputo derivative of `t^δ`:
/// `Γ(1+δ)/Γ(1+δ-α) · t^(δ-α)`.
pub fn caputo_power_reference(delta: f64, alpha: f64, t: f64) -> f64 {
    gamma(1.0 + delta) / gamma(1.0 + delta - alpha) * t.powf(delta - alpha)
}
