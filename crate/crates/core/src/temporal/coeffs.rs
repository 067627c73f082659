use super::{GradedMesh, StepParams};
use crate::special::gamma;
use crate::{Error, Result};

/// L2-1σ weights for one step `n`.
///
/// Indices follow the lag `j = n - k`: `a[j] = a_{n-k}`, `b[j] = b_{n-k}`
/// (`b[0]` is unused and zero), `c[j] = c_{n-k,n}`.
#[derive(Debug, Clone, PartialEq)]
pub struct CoeffRow {
    pub params: StepParams,
    a: Vec<f64>,
    b: Vec<f64>,
    c: Vec<f64>,
}

/// Below this ratio `τ_k / (t* - t_{k-1})` the history integrals are summed
/// as power series; the antiderivative differences cancel badly there.
const SERIES_CUTOFF: f64 = 0.5;

impl CoeffRow {
    pub fn new(mesh: &GradedMesh, params: &StepParams) -> Self {
        let n = params.n;
        let alpha = params.alpha_star;
        let t_star = params.t_super;
        let mut a = vec![0.0; n];
        let mut b = vec![0.0; n];

        if alpha == 0.0 {
            a.fill(1.0);
        } else {
            let g1 = gamma(1.0 - alpha);
            let g2 = gamma(2.0 - alpha);
            let tau_n = mesh.tau(n);
            a[0] = ((1.0 - params.theta) * tau_n).powf(1.0 - alpha) / (tau_n * g2);
            for k in 1..n {
                let j = n - k;
                let h = mesh.tau(k);
                let h_next = mesh.tau(k + 1);
                let d = t_star - mesh.node(k - 1);
                let eps = h / d;
                let scale = d.powf(-alpha);
                a[j] = scale * mean_kernel(eps, alpha) / g1;
                b[j] = if eps <= SERIES_CUTOFF {
                    2.0 * h / ((h + h_next) * g1) * scale * centered_moment_series(eps, alpha)
                } else {
                    let u1 = d;
                    let u0 = d - h;
                    let m = d - 0.5 * h;
                    let first = m * (u1.powf(1.0 - alpha) - u0.powf(1.0 - alpha)) / (1.0 - alpha);
                    let second = (u1.powf(2.0 - alpha) - u0.powf(2.0 - alpha)) / (2.0 - alpha);
                    2.0 / (h * (h + h_next) * g1) * (first - second)
                };
            }
        }

        let mut c = vec![0.0; n];
        if n == 1 {
            c[0] = a[0];
        } else {
            c[0] = a[0] + mesh.rho(n - 1) * b[1];
            for k in 2..n {
                let j = n - k;
                c[j] = a[j] + mesh.rho(k - 1) * b[j + 1] - b[j];
            }
            c[n - 1] = a[n - 1] - b[n - 1];
        }

        Self {
            params: *params,
            a,
            b,
            c,
        }
    }

    pub fn n(&self) -> usize {
        self.params.n
    }

    /// `a_j`, `0 <= j < n`.
    pub fn a(&self, j: usize) -> f64 {
        self.a[j]
    }

    /// `b_j`, `1 <= j < n`.
    pub fn b(&self, j: usize) -> f64 {
        self.b[j]
    }

    /// `c_{j,n}`, `0 <= j < n`.
    pub fn c(&self, j: usize) -> f64 {
        self.c[j]
    }

    pub fn weights(&self) -> &[f64] {
        &self.c
    }

    /// `Σ_{k=1}^{n} c_{n-k,n} (v^k - v^{k-1})` for scalar history `v^0..v^n`.
    pub fn apply(&self, history: &[f64]) -> Result<f64> {
        let n = self.n();
        if history.len() != n + 1 {
            return Err(Error::LengthMismatch {
                expected: n + 1,
                found: history.len(),
            });
        }
        let mut acc = 0.0;
        for k in 1..=n {
            acc += self.c[n - k] * (history[k] - history[k - 1]);
        }
        Ok(acc)
    }

    /// Componentwise version of [`CoeffRow::apply`] over equal-length vectors.
    pub fn apply_vectors(&self, history: &[&[f64]], out: &mut [f64]) -> Result<()> {
        let n = self.n();
        if history.len() != n + 1 {
            return Err(Error::LengthMismatch {
                expected: n + 1,
                found: history.len(),
            });
        }
        for v in history {
            if v.len() != out.len() {
                return Err(Error::LengthMismatch {
                    expected: out.len(),
                    found: v.len(),
                });
            }
        }
        out.fill(0.0);
        for k in 1..=n {
            let w = self.c[n - k];
            for ((o, hi), lo) in out.iter_mut().zip(history[k]).zip(history[k - 1]) {
                *o += w * (hi - lo);
            }
        }
        Ok(())
    }
}

/// `∫_0^1 (1 - εξ)^{-α} dξ`
fn mean_kernel(eps: f64, alpha: f64) -> f64 {
    let p = 1.0 - alpha;
    -(p * (-eps).ln_1p()).exp_m1() / (p * eps)
}

/// Sums `Σ_{j>=0} (β)_j / j! · ε^j · w(j)`.
fn binomial_series(eps: f64, beta: f64, weight: impl Fn(f64) -> f64) -> f64 {
    let mut coeff = 1.0;
    let mut power = 1.0;
    let mut sum = 0.0;
    for j in 0..2000 {
        let jf = j as f64;
        if j > 0 {
            coeff *= (beta + jf - 1.0) / jf;
            power *= eps;
        }
        let term = coeff * power * weight(jf);
        sum += term;
        if j > 2 && term.abs() <= 1e-17 * sum.abs() {
            break;
        }
    }
    sum
}

/// `∫_0^1 (ξ - 1/2)(1 - εξ)^{-α} dξ`
fn centered_moment_series(eps: f64, alpha: f64) -> f64 {
    binomial_series(eps, alpha, |j| j / (2.0 * (j + 1.0) * (j + 2.0)))
}

/// `(∫_0^1 (1-ξ)(1-εξ)^{-α-1} dξ, ∫_0^1 ξ(1-εξ)^{-α-1} dξ)`
fn hat_moments(eps: f64, alpha: f64) -> (f64, f64) {
    if eps <= SERIES_CUTOFF {
        hat_moments_series(eps, alpha)
    } else {
        hat_moments_closed(eps, alpha)
    }
}

fn hat_moments_series(eps: f64, alpha: f64) -> (f64, f64) {
    (
        binomial_series(eps, alpha + 1.0, |j| 1.0 / ((j + 1.0) * (j + 2.0))),
        binomial_series(eps, alpha + 1.0, |j| 1.0 / (j + 2.0)),
    )
}

fn hat_moments_closed(eps: f64, alpha: f64) -> (f64, f64) {
    let q = 1.0 - eps;
    let low = (1.0 - q.powf(1.0 - alpha)) / (1.0 - alpha);
    let high = (q.powf(-alpha) - 1.0) / alpha;
    let e2 = eps * eps;
    ((low - q * high) / e2, (high - low) / e2)
}

/// The auxiliary integrals
///
/// ```text
/// I_{n-k} = α*/Γ(1-α*) ∫_{t_{k-1}}^{t_k} (t_k - s)/τ_k (t* - s)^{-α*-1} ds
/// J_{n-k} = α*/Γ(1-α*) ∫_{t_{k-1}}^{t_k} (s - t_{k-1})/τ_k (t* - s)^{-α*-1} ds
/// ```
///
/// for `1 <= k <= n-1`, with `t* = t_{n-θ_n}`.
pub fn ij_quantities(mesh: &GradedMesh, params: &StepParams, k: usize) -> Result<(f64, f64)> {
    let n = params.n;
    if k == 0 || k >= n {
        return Err(Error::invalid(format!("ij_quantities needs 1 <= k <= n-1 (k = {k}, n = {n})")));
    }
    let alpha = params.alpha_star;
    if alpha == 0.0 {
        return Ok((0.0, 0.0));
    }
    let h = mesh.tau(k);
    let d = params.t_super - mesh.node(k - 1);
    let eps = h / d;
    let factor = alpha / gamma(1.0 - alpha) * d.powf(-alpha - 1.0) * h;
    let (gi, gj) = hat_moments(eps, alpha);
    Ok((factor * gi, factor * gj))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::temporal::{select_step_params, SuperconvPolicy, VariableExponent};

    /// Adaptive Gauss–Legendre (two-panel comparison) on a smooth integrand.
    fn adaptive(f: &dyn Fn(f64) -> f64, lo: f64, hi: f64, tol: f64, depth: u32) -> f64 {
        let whole = gl10(f, lo, hi);
        let mid = 0.5 * (lo + hi);
        let halves = gl10(f, lo, mid) + gl10(f, mid, hi);
        if depth == 0 || (whole - halves).abs() <= tol * halves.abs().max(1e-300) {
            halves
        } else {
            adaptive(f, lo, mid, tol, depth - 1) + adaptive(f, mid, hi, tol, depth - 1)
        }
    }

    fn gl10(f: &dyn Fn(f64) -> f64, lo: f64, hi: f64) -> f64 {
        const X: [f64; 5] = [
            0.148_874_338_981_631_2,
            0.433_395_394_129_247_2,
            0.679_409_568_299_024_4,
            0.865_063_366_688_984_5,
            0.973_906_528_517_171_7,
        ];
        const W: [f64; 5] = [
            0.295_524_224_714_752_9,
            0.269_266_719_309_996_4,
            0.219_086_362_515_982_0,
            0.149_451_349_150_580_6,
            0.066_671_344_308_688_1,
        ];
        let c = 0.5 * (lo + hi);
        let r = 0.5 * (hi - lo);
        let mut s = 0.0;
        for i in 0..5 {
            s += W[i] * (f(c + r * X[i]) + f(c - r * X[i]));
        }
        s * r
    }

    fn params_const(mesh: &GradedMesh, n: usize, alpha: f64) -> StepParams {
        let e = VariableExponent::constant(alpha, mesh.final_time()).unwrap();
        select_step_params(&e, mesh, n, &SuperconvPolicy::interval_min()).unwrap()
    }

    #[test]
    fn zero_exponent_gives_unit_weights() {
        let mesh = GradedMesh::new(1.0, 9, 2.5).unwrap();
        for n in 1..=9 {
            let row = CoeffRow::new(&mesh, &params_const(&mesh, n, 0.0));
            for j in 0..n {
                assert_eq!(row.a(j), 1.0);
                assert_eq!(row.c(j), 1.0);
            }
            for j in 1..n {
                assert_eq!(row.b(j), 0.0);
            }
        }
    }

    #[test]
    fn first_step_closed_form() {
        // α* = 0.5, θ = 0.25, τ_1 = 0.1
        let mesh = GradedMesh::uniform(1.0, 10).unwrap();
        let row = CoeffRow::new(&mesh, &params_const(&mesh, 1, 0.5));
        let expected = 0.75f64.sqrt() / (gamma(1.5) * 0.1f64.sqrt());
        assert!((row.c(0) - expected).abs() < 1e-14 * expected);
        assert!((row.c(0) - 3.0902).abs() < 1e-4, "{}", row.c(0));
        // independent route: a_0 = (1/τ) ∫_{t_0}^{t*} (t*-s)^{-α}/Γ(1-α) ds after
        // substituting w = (t*-s)^{1/2}, which removes the endpoint singularity
        let t_star = row.params.t_super;
        let quad = adaptive(
            &|_w: f64| 2.0 / gamma(0.5),
            0.0,
            t_star.sqrt(),
            1e-15,
            30,
        ) / 0.1;
        assert!((row.c(0) - quad).abs() < 1e-12 * quad);
    }

    #[test]
    fn history_weights_match_quadrature_oracle() {
        // uniform mesh, α ≡ 0.4, n = 2 (a_1, b_1), plus a graded case
        for (mesh, n) in [
            (GradedMesh::uniform(1.0, 4).unwrap(), 2usize),
            (GradedMesh::new(1.0, 32, 3.0).unwrap(), 20),
            (GradedMesh::new(1.0, 64, 4.0).unwrap(), 64),
        ] {
            let p = params_const(&mesh, n, 0.4);
            let row = CoeffRow::new(&mesh, &p);
            let g1 = gamma(1.0 - p.alpha_star);
            for k in 1..n {
                let (lo, hi) = (mesh.node(k - 1), mesh.node(k));
                let h = mesh.tau(k);
                let kern = |s: f64| (p.t_super - s).powf(-p.alpha_star) / g1;
                let a_quad = adaptive(&kern, lo, hi, 1e-15, 30) / h;
                let mid = 0.5 * (lo + hi);
                let b_quad = 2.0 / (h * (h + mesh.tau(k + 1)))
                    * adaptive(&|s| (s - mid) * kern(s), lo, hi, 1e-15, 30);
                let j = n - k;
                assert!(
                    (row.a(j) - a_quad).abs() <= 1e-10 * a_quad,
                    "a n={n} k={k}: {} vs {a_quad}",
                    row.a(j)
                );
                assert!(
                    (row.b(j) - b_quad).abs() <= 1e-10 * b_quad.abs() + 1e-14 * a_quad,
                    "b n={n} k={k}: {} vs {b_quad}",
                    row.b(j)
                );
            }
        }
    }

    #[test]
    fn ij_match_quadrature_oracle() {
        let mesh = GradedMesh::uniform(1.0, 3).unwrap();
        let p = params_const(&mesh, 3, 0.4);
        let g1 = gamma(0.6);
        for k in 1..3 {
            let (lo, hi) = (mesh.node(k - 1), mesh.node(k));
            let h = mesh.tau(k);
            let kern = |s: f64| 0.4 / g1 * (p.t_super - s).powf(-1.4);
            let i_q = adaptive(&|s| (hi - s) / h * kern(s), lo, hi, 1e-15, 30);
            let j_q = adaptive(&|s| (s - lo) / h * kern(s), lo, hi, 1e-15, 30);
            let (i, j) = ij_quantities(&mesh, &p, k).unwrap();
            assert!((i - i_q).abs() < 1e-10 * i_q, "I k={k}: {i} vs {i_q}");
            assert!((j - j_q).abs() < 1e-10 * j_q, "J k={k}: {j} vs {j_q}");
            assert!(j >= i);
        }
        // both branches of the moment evaluation agree near the cutoff
        for &alpha in &[0.1, 0.5, 0.9] {
            let lo = hat_moments_series(SERIES_CUTOFF, alpha);
            let hi = hat_moments_closed(SERIES_CUTOFF, alpha);
            assert!((lo.0 - hi.0).abs() < 1e-12 * lo.0);
            assert!((lo.1 - hi.1).abs() < 1e-12 * lo.1);
        }
        let p0 = params_const(&mesh, 3, 0.0);
        assert_eq!(ij_quantities(&mesh, &p0, 1).unwrap(), (0.0, 0.0));
        assert!(ij_quantities(&mesh, &p, 3).is_err());
    }

    #[test]
    fn apply_length_checked() {
        let mesh = GradedMesh::uniform(1.0, 4).unwrap();
        let row = CoeffRow::new(&mesh, &params_const(&mesh, 3, 0.3));
        assert!(matches!(
            row.apply(&[0.0; 3]),
            Err(Error::LengthMismatch { expected: 4, found: 3 })
        ));
        assert_eq!(row.apply(&[2.5; 4]).unwrap(), 0.0);
    }

    #[test]
    fn vector_apply_matches_scalar() {
        let mesh = GradedMesh::new(1.0, 6, 2.0).unwrap();
        let row = CoeffRow::new(&mesh, &params_const(&mesh, 6, 0.7));
        let hist: Vec<Vec<f64>> = (0..7).map(|k| vec![k as f64, (k * k) as f64]).collect();
        let refs: Vec<&[f64]> = hist.iter().map(|v| v.as_slice()).collect();
        let mut out = vec![0.0; 2];
        row.apply_vectors(&refs, &mut out).unwrap();
        let s0: Vec<f64> = hist.iter().map(|v| v[0]).collect();
        let s1: Vec<f64> = hist.iter().map(|v| v[1]).collect();
        assert_eq!(out[0], row.apply(&s0).unwrap());
        assert_eq!(out[1], row.apply(&s1).unwrap());
    }
}
