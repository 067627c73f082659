//! Sweep that checks the coefficient and kernel inequalities on many meshes.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::cases::{ex1_exponent, ex2_exponent};
use crate::special::gamma;
use crate::temporal::{
    all_kernel_rows, coefficient_rows, ij_quantities, CoeffRow, GradedMesh, SuperconvPolicy, VariableExponent,
};
use crate::{Error, Result};

#[derive(Debug, Clone)]
pub struct AuditSweep {
    pub families: Vec<(String, VariableExponent)>,
    pub gradings: Vec<f64>,
    pub steps: Vec<usize>,
    pub policies: Vec<SuperconvPolicy>,
    /// Random sequences per coefficient row for the quadratic-form check.
    pub sequences_per_row: usize,
    pub seed: u64,
}

impl AuditSweep {
    /// ex1 with δ ∈ {0.2, 0.4, 0.6, 0.8}, ex2, constant α ∈ {0, 0.3, 0.7};
    /// r ∈ {1, 2, 3, 4}; N ∈ {8, 16, 32, 64}; every policy kind.
    pub fn default_sweep(seed: u64) -> Result<Self> {
        let mut families = Vec::new();
        for delta in [0.2, 0.4, 0.6, 0.8] {
            families.push((format!("ex1(delta={delta})"), ex1_exponent(delta)?));
        }
        families.push(("ex2".to_string(), ex2_exponent()?));
        for alpha in [0.0, 0.3, 0.7] {
            families.push((format!("const({alpha})"), VariableExponent::constant(alpha, 1.0)?));
        }
        Ok(Self {
            families,
            gradings: vec![1.0, 2.0, 3.0, 4.0],
            steps: vec![8, 16, 32, 64],
            policies: vec![
                SuperconvPolicy::interval_min(),
                SuperconvPolicy::offset(0.5),
                SuperconvPolicy::offset(0.6),
                SuperconvPolicy::offset(0.8),
                SuperconvPolicy::offset_frac(0.25),
                SuperconvPolicy::offset_frac(0.5),
                SuperconvPolicy::newton(),
                SuperconvPolicy::at_left(),
                SuperconvPolicy::at_right(),
            ],
            sequences_per_row: 4,
            seed,
        })
    }
}

/// One failed inequality, with everything needed to reproduce it.
#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub check: &'static str,
    pub family: String,
    pub grading: f64,
    pub steps: usize,
    pub policy: String,
    pub n: usize,
    pub k: usize,
    /// The inequality reads `lhs >= rhs`.
    pub lhs: f64,
    pub rhs: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Skipped {
    pub family: String,
    pub grading: f64,
    pub steps: usize,
    pub policy: String,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct AuditReport {
    pub configurations: usize,
    /// `(configuration, n, k)` tuples visited.
    pub tuples: usize,
    /// Individual inequalities evaluated.
    pub checks: usize,
    pub violations: Vec<Violation>,
    pub skipped: Vec<Skipped>,
    /// Negative complementary kernel entries seen (observed only).
    pub negative_kernels: usize,
    /// Equal neighbours in the `c` chain for `α_n* > 0`.
    pub c_ties: usize,
    pub max_identity_residual: f64,
    /// Failures of the plain kernel-sum bound when `t_n^{α*}` is taken with
    /// `α* = min_{j≤n} α_j*` instead of the global bound (diagnostic only).
    pub kernel_sum_min_exponent_failures: usize,
}

impl AuditReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

const REL_SLACK: f64 = 1e-13;
const IDENTITY_TOL: f64 = 1e-10;

struct Ctx<'a> {
    family: &'a str,
    grading: f64,
    steps: usize,
    policy: String,
    report: &'a mut AuditReport,
}

impl Ctx<'_> {
    /// Records `lhs >= rhs` up to `REL_SLACK · scale`.
    fn ge(&mut self, check: &'static str, n: usize, k: usize, lhs: f64, rhs: f64, scale: f64) {
        self.report.checks += 1;
        let ok = lhs.is_finite() && rhs.is_finite() && lhs >= rhs - REL_SLACK * scale;
        if !ok {
            self.report.violations.push(Violation {
                check,
                family: self.family.to_string(),
                grading: self.grading,
                steps: self.steps,
                policy: self.policy.clone(),
                n,
                k,
                lhs,
                rhs,
            });
        }
    }

    /// Records `lhs > rhs` (strict up to roundoff: `lhs - rhs` must exceed the slack).
    fn gt(&mut self, check: &'static str, n: usize, k: usize, lhs: f64, rhs: f64, scale: f64) {
        self.ge(check, n, k, lhs - REL_SLACK * scale, rhs, 0.0);
    }
}

fn check_row(ctx: &mut Ctx<'_>, mesh: &GradedMesh, row: &CoeffRow, alpha_sup: f64, rng: &mut ChaCha8Rng, sequences: usize) -> Result<()> {
    let p = &row.params;
    let n = row.n();
    let alpha = p.alpha_star;
    let theta = p.theta;
    let g1 = gamma(1.0 - alpha);
    let g2 = gamma(2.0 - alpha);

    // Gamma bounds
    ctx.ge("gamma lower bound", n, 0, g1, 0.6, g1);
    ctx.ge("gamma upper bound", n, 0, 2.0 / (1.0 - alpha_sup), g1, g1);

    // I/J for every k < n, indexed by k
    let mut ij = vec![(0.0, 0.0); n];
    for (k, slot) in ij.iter_mut().enumerate().skip(1) {
        *slot = ij_quantities(mesh, p, k)?;
    }
    let i_of = |k: usize| ij[k].0;
    let j_of = |k: usize| ij[k].1;
    let a = |k: usize| row.a(n - k);
    let b = |k: usize| row.b(n - k);

    for k in 1..n {
        ctx.report.tuples += 1;
        let (ak, bk) = (a(k), b(k));
        if alpha > 0.0 {
            ctx.gt("b positive", n, k, bk, 0.0, 0.0);
        } else {
            ctx.ge("b nonnegative", n, k, bk, 0.0, 0.0);
        }
        ctx.ge("b <= a/4", n, k, 0.25 * ak, bk, ak);
        let lower = (mesh.node(n) - mesh.node(k - 1)).powf(-alpha) / g1;
        ctx.ge("a lower bound", n, k, ak, lower, ak + lower);

        let rho = mesh.rho(k);
        let (ik, jk) = (i_of(k), j_of(k));
        ctx.ge("I >= (rho+1)/rho b", n, k, ik, (rho + 1.0) / rho * bk, ik + bk);
        if k + 1 < n {
            ctx.ge("rho_k I(k+1) >= I(k)", n, k, rho * i_of(k + 1), ik, ik);
        }
        ctx.ge("J >= I", n, k, jk, ik, jk + ik);

        // a_{n-k-1} - a_{n-k}
        if k + 1 < n {
            let diff = a(k + 1) - ak;
            let rhs = if k == 1 {
                row.b(n - 2) + 1.5 * i_of(1)
            } else {
                row.b(n - k - 1) + mesh.rho(k - 1) * row.b(n - k + 1) + ik
            };
            ctx.ge("a difference bound", n, k, diff, rhs, a(k + 1) + ak + rhs);
        }
    }
    if n >= 2 && alpha >= theta {
        // k = n - 1: a_0 - a_1
        let diff = row.a(0) - row.a(1);
        let rhs = if n == 2 {
            i_of(1)
        } else {
            mesh.rho(n - 2) * row.b(2) + 0.5 * i_of(n - 1)
        };
        ctx.ge("a0 - a1 bound", n, n - 1, diff, rhs, row.a(0) + row.a(1) + rhs);
    }

    // c bounds
    let tau_n = mesh.tau(n);
    let c0_cap = 9.0 / 8.0 * tau_n.powf(-alpha) / g2;
    ctx.ge("c0 upper bound", n, n, c0_cap, row.c(0), c0_cap);
    let r = mesh.grading();
    for k in 1..=n {
        let tn = mesh.node(n);
        let lo = ((tn - mesh.node(k - 1)).powf(1.0 - alpha) - (tn - mesh.node(k)).powf(1.0 - alpha))
            / ((1.0 + 3f64.powf(r)) * mesh.tau(k) * g2);
        ctx.ge("c lower bound", n, k, row.c(n - k), lo, row.c(n - k) + lo);
    }
    if alpha >= 0.5 * p.alpha_n {
        for j in 1..n {
            let (hi, lo) = (row.c(j - 1), row.c(j));
            ctx.ge("c monotone", n, n - j, hi, lo, hi + lo);
            if alpha > 0.0 && hi == lo {
                ctx.report.c_ties += 1;
            }
        }
    }
    if n >= 2 && alpha >= p.alpha_n {
        let lhs = (1.0 - 2.0 * theta) / (1.0 - theta) * row.c(0);
        let scale = lhs + row.c(1);
        if alpha > 0.0 {
            ctx.gt("c0 dominance", n, n - 1, lhs, row.c(1), scale);
        } else {
            ctx.ge("c0 dominance", n, n - 1, lhs, row.c(1), scale);
        }
    }

    // quadratic form: v^{n-θ} Σ c (v^k - v^{k-1}) >= ½ Σ c ((v^k)² - (v^{k-1})²)
    for _ in 0..sequences {
        let v: Vec<f64> = (0..=n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let mid = theta * v[n - 1] + (1.0 - theta) * v[n];
        let mut lhs = 0.0;
        let mut rhs = 0.0;
        let mut scale = 0.0;
        for k in 1..=n {
            let c = row.c(n - k);
            lhs += mid * c * (v[k] - v[k - 1]);
            rhs += 0.5 * c * (v[k] * v[k] - v[k - 1] * v[k - 1]);
            scale += c * (v[k].abs() + v[k - 1].abs()).powi(2);
        }
        ctx.ge("quadratic form", n, 0, lhs, rhs, scale);
    }
    Ok(())
}

fn audit_configuration(
    ctx: &mut Ctx<'_>,
    exponent: &VariableExponent,
    mesh: &GradedMesh,
    policy: &SuperconvPolicy,
    rng: &mut ChaCha8Rng,
    sequences: usize,
) -> Result<()> {
    let rows = match coefficient_rows(exponent, mesh, policy) {
        Ok(rows) => rows,
        Err(e @ (Error::ConditionViolated { .. } | Error::NewtonDiverged { .. })) => {
            ctx.report.skipped.push(Skipped {
                family: ctx.family.to_string(),
                grading: ctx.grading,
                steps: ctx.steps,
                policy: ctx.policy.clone(),
                reason: e.to_string(),
            });
            return Ok(());
        }
        Err(e) => return Err(e),
    };
    ctx.report.configurations += 1;
    for row in &rows {
        check_row(ctx, mesh, row, exponent.sup_bound(), rng, sequences)?;
    }

    let kernels = all_kernel_rows(&rows)?;
    let big_n = mesh.steps();
    let l_n = if big_n >= 2 { Some(1.0 / (big_n as f64).ln()) } else { None };
    let r = mesh.grading();
    let alpha_sup = exponent.sup_bound();
    let mut gamma_max = 0.0f64;
    let mut alpha_min = f64::INFINITY;
    for (idx, kernel) in kernels.iter().enumerate() {
        let n = idx + 1;
        let (_, residual) = kernel.identity_residual(&rows[..n]);
        ctx.report.max_identity_residual = ctx.report.max_identity_residual.max(residual);
        ctx.ge("kernel identity", n, 0, IDENTITY_TOL, residual, 0.0);
        ctx.report.negative_kernels += kernel.values().iter().filter(|v| **v < 0.0).count();
        if let Some(l) = l_n {
            gamma_max = gamma_max.max(gamma(1.0 + l - rows[idx].params.alpha_star) / gamma(1.0 + l));
            let cap = (1.0 + 2f64.powf(r)) * r.exp() * gamma_max;
            let weighted: f64 = (1..=n)
                .map(|j| kernel.p(n - j) * mesh.node(j).powf(-rows[j - 1].params.alpha_star))
                .sum();
            ctx.ge("weighted kernel sum", n, 0, cap, weighted, cap);
            let plain = kernel.sum();
            let cap_t = cap * mesh.node(n).powf(alpha_sup);
            ctx.ge("kernel sum", n, 0, cap_t, plain, cap_t);
            alpha_min = alpha_min.min(rows[idx].params.alpha_star);
            let cap_min = cap * mesh.node(n).powf(alpha_min);
            if plain > cap_min * (1.0 + REL_SLACK) {
                ctx.report.kernel_sum_min_exponent_failures += 1;
            }
        }
    }
    Ok(())
}

/// Evaluates every inequality across the sweep. Configurations whose policy
/// cannot satisfy the step condition are skipped and listed.
pub fn property_audit(sweep: &AuditSweep) -> Result<AuditReport> {
    let mut report = AuditReport::default();
    let mut rng = ChaCha8Rng::seed_from_u64(sweep.seed);
    let mut plan = Vec::new();
    for (fi, _) in sweep.families.iter().enumerate() {
        for &r in &sweep.gradings {
            for &n in &sweep.steps {
                for (pi, _) in sweep.policies.iter().enumerate() {
                    plan.push((fi, r, n, pi));
                }
            }
        }
    }
    plan.shuffle(&mut rng);
    for (fi, r, steps, pi) in plan {
        let (name, exponent) = &sweep.families[fi];
        let policy = &sweep.policies[pi];
        let mesh = GradedMesh::new(exponent.horizon(), steps, r)?;
        let mut ctx = Ctx {
            family: name,
            grading: r,
            steps,
            policy: policy.to_string(),
            report: &mut report,
        };
        audit_configuration(&mut ctx, exponent, &mesh, policy, &mut rng, sweep.sequences_per_row)?;
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(families: Vec<(String, VariableExponent)>) -> AuditSweep {
        AuditSweep {
            families,
            gradings: vec![1.0, 3.0],
            steps: vec![8, 16],
            policies: vec![SuperconvPolicy::interval_min(), SuperconvPolicy::newton()],
            sequences_per_row: 2,
            seed: 7,
        }
    }

    #[test]
    fn constant_exponent_strict_chain() {
        let sweep = small(vec![("const".into(), VariableExponent::constant(0.3, 1.0).unwrap())]);
        let rep = property_audit(&sweep).unwrap();
        assert!(rep.passed(), "{:?}", rep.violations);
        assert_eq!(rep.c_ties, 0);
        assert!(rep.tuples > 0);
    }

    #[test]
    fn zero_exponent_rows() {
        let sweep = small(vec![("zero".into(), VariableExponent::constant(0.0, 1.0).unwrap())]);
        let rep = property_audit(&sweep).unwrap();
        assert!(rep.passed(), "{:?}", rep.violations);
        assert_eq!(rep.negative_kernels, 0);
    }

    #[test]
    fn inapplicable_policy_is_skipped() {
        let mut sweep = small(vec![("ex1".into(), ex1_exponent(0.4).unwrap())]);
        sweep.policies = vec![SuperconvPolicy::at_right()];
        let rep = property_audit(&sweep).unwrap();
        assert_eq!(rep.configurations, 0);
        assert_eq!(rep.skipped.len(), 4);
    }

    #[test]
    fn shuffled_order_gives_same_verdict() {
        let fam = vec![("ex2".to_string(), ex2_exponent().unwrap())];
        let mut a = small(fam.clone());
        let mut b = small(fam);
        a.seed = 1;
        b.seed = 2;
        let (ra, rb) = (property_audit(&a).unwrap(), property_audit(&b).unwrap());
        assert_eq!(ra.passed(), rb.passed());
        assert_eq!(ra.checks, rb.checks);
    }
}
