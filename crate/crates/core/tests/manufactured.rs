use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use statrs::function::gamma::gamma;

use subdiff::harness::{builtin_case, CaseParams, ManufacturedCase};

fn legendre_rule(m: usize) -> Vec<(f64, f64)> {
    (0..m)
        .map(|i| {
            let mut x = (PI * (i as f64 + 0.75) / (m as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (mut p0, mut p1) = (1.0, x);
                for k in 2..=m {
                    let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                    p0 = p1;
                    p1 = p2;
                }
                dp = m as f64 * (x * p1 - p0) / (x * x - 1.0);
                let dx = p1 / dp;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            (x, 2.0 / ((1.0 - x * x) * dp * dp))
        })
        .collect()
}

/// `∫₀¹ f` on panels that shrink geometrically towards 0.
fn integrate_graded(f: &dyn Fn(f64) -> f64, rule: &[(f64, f64)]) -> f64 {
    let mut total = 0.0;
    for j in 0..45 {
        let (lo, hi) = (0.5f64.powi(j + 1), 0.5f64.powi(j));
        let (mid, half) = (0.5 * (lo + hi), 0.5 * (hi - lo));
        total += half * rule.iter().map(|&(x, w)| w * f(mid + half * x)).sum::<f64>();
    }
    total
}

/// Caputo derivative of `t^β` of order `α`, by quadrature of the defining integral.
fn caputo_quadrature(beta: f64, alpha: f64, t: f64) -> f64 {
    let rule = legendre_rule(24);
    let c = 0.5 * t;
    // s = c u^{1/β} on [0, t/2]
    let left = c.powf(beta) * integrate_graded(&|u| (t - c * u.powf(1.0 / beta)).powf(-alpha), &rule);
    // t - s = c v^{1/(1-α)} on [t/2, t]
    let q = 1.0 / (1.0 - alpha);
    let right = c.powf(1.0 - alpha) * q
        * integrate_graded(&|v| beta * (t - c * v.powf(q)).powf(beta - 1.0), &rule);
    (left + right) / gamma(1.0 - alpha)
}

fn laplacian(u: &dyn Fn(f64, f64) -> f64, x: f64, y: f64) -> f64 {
    let h = 1e-3;
    let d2 = |g: &dyn Fn(f64) -> f64| (-g(2.0 * h) + 16.0 * g(h) - 30.0 * g(0.0) + 16.0 * g(-h) - g(-2.0 * h)) / (12.0 * h * h);
    d2(&|s| u(x + s, y)) + d2(&|s| u(x, y + s))
}

/// Reconstructs `f` from the exact solution `g(t)·S(x, y)`.
fn check_source(case: &ManufacturedCase, kappa: f64, beta: f64, shift: f64, mobile: bool, seed: u64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let exact = &case.exact;
    for _ in 0..20 {
        let (x, y, t): (f64, f64, f64) = (rng.gen_range(0.0..1.0), rng.gen_range(0.0..1.0), rng.gen_range(0.01..1.0));
        let profile = shift + t.powf(beta);
        let shape = exact(x, y, t) / profile;
        let alpha = case.exponent().value(t);
        let mut f = caputo_quadrature(beta, alpha, t) * shape - kappa * laplacian(&|a, b| exact(a, b, t), x, y);
        if mobile {
            f += beta * t.powf(beta - 1.0) * shape;
        }
        let got = (case.problem.source)(x, y, t);
        assert!(
            (got - f).abs() <= 1e-8 * f.abs().max(1.0),
            "{} at ({x}, {y}, {t}): {got} vs {f}",
            case.name
        );
    }
}

#[test]
fn quadrature_oracle_on_known_values() {
    // α = 0 returns t^β - 0, β = 1 gives t^{1-α}/Γ(2-α)
    assert!((caputo_quadrature(0.7, 0.0, 0.4) - 0.4f64.powf(0.7)).abs() < 1e-13);
    let v = caputo_quadrature(1.0, 0.3, 0.8f64);
    assert!((v - 0.8f64.powf(0.7) / gamma(1.7)).abs() < 1e-13);
}

#[test]
fn ex1_source_is_consistent() {
    for (i, delta) in [0.2, 0.4, 0.6, 0.8].into_iter().enumerate() {
        let case = builtin_case("ex1", &CaseParams { delta, ..Default::default() }).unwrap();
        check_source(&case, 1.0, delta, 1.0, false, i as u64);
    }
}

#[test]
fn ex2_source_is_consistent() {
    for (i, delta) in [0.4, 0.8].into_iter().enumerate() {
        let case = builtin_case("ex2", &CaseParams { delta, ..Default::default() }).unwrap();
        check_source(&case, 0.001, delta, 1.0, false, 10 + i as u64);
    }
}

#[test]
fn ex3_source_is_consistent() {
    for (i, (a0, at)) in [(0.0, 0.7), (0.4, 0.6)].into_iter().enumerate() {
        let params = CaseParams { alpha0: a0, alpha_t: at, ..Default::default() };
        let case = builtin_case("ex3", &params).unwrap();
        check_source(&case, 0.001, 3.0 - a0, 0.0, true, 20 + i as u64);
    }
}
