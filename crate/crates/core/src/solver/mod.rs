//! Fully discrete time stepping: L2-1σ in time, Lagrange elements in space.

use std::fmt;
use std::sync::Arc;

use crate::fem2d::{
    assemble_functional, assemble_mass, assemble_stiffness, elliptic_projection, l2_error, l2_norm,
    DiffusionTensor, FeSpace, TriMesh, TriangleRule,
};
use crate::sparse::{cg_solve, dot, CgOptions, CgReport, CsrMatrix};
use crate::special::gamma;
use crate::temporal::{select_step_params, CoeffRow, GradedMesh, StepParams, SuperconvPolicy, VariableExponent};
use crate::{Error, Result};

pub type SpaceTimeFn = Arc<dyn Fn(f64, f64, f64) -> f64 + Send + Sync>;
pub type SpaceFn = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;
pub type GradientFn = Arc<dyn Fn(f64, f64) -> [f64; 2] + Send + Sync>;
pub type TimeFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Initial data `u₀` with its gradient (needed for the elliptic projection).
#[derive(Clone)]
pub struct InitialData {
    pub value: SpaceFn,
    pub gradient: GradientFn,
}

#[derive(Clone)]
pub enum ProblemKind {
    /// `D_t^{α(t)} u + L u = f`
    Subdiffusion,
    /// `u_t + k(t) D_t^{α(t)} u + L u = f`. `initial_rate` is `u_t(·, 0)`,
    /// zero when absent.
    MobileImmobile {
        k: TimeFn,
        initial_rate: Option<SpaceFn>,
    },
}

#[derive(Clone)]
pub struct ProblemSpec {
    pub exponent: VariableExponent,
    pub tensor: DiffusionTensor,
    /// `f(x, y, t)`
    pub source: SpaceTimeFn,
    /// `None` means `u₀ = 0`.
    pub initial: Option<InitialData>,
    pub final_time: f64,
    pub kind: ProblemKind,
    pub exact: Option<SpaceTimeFn>,
}

impl fmt::Debug for ProblemSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let kind = match self.kind {
            ProblemKind::Subdiffusion => "subdiffusion",
            ProblemKind::MobileImmobile { .. } => "mobile-immobile",
        };
        f.debug_struct("ProblemSpec")
            .field("kind", &kind)
            .field("exponent", &self.exponent)
            .field("tensor", &self.tensor)
            .field("final_time", &self.final_time)
            .field("has_initial", &self.initial.is_some())
            .field("has_exact", &self.exact.is_some())
            .finish()
    }
}

impl ProblemSpec {
    /// Zero source and zero initial data.
    pub fn homogeneous(exponent: VariableExponent, tensor: DiffusionTensor, final_time: f64) -> Self {
        Self {
            exponent,
            tensor,
            source: Arc::new(|_, _, _| 0.0),
            initial: None,
            final_time,
            kind: ProblemKind::Subdiffusion,
            exact: None,
        }
    }

    pub fn is_mobile_immobile(&self) -> bool {
        matches!(self.kind, ProblemKind::MobileImmobile { .. })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SchemeConfig {
    /// Number of time steps `N`.
    pub steps: usize,
    /// Mesh grading `r`.
    pub grading: f64,
    pub policy: SuperconvPolicy,
    /// Cells per direction `M`.
    pub cells: usize,
    /// Element degree `p`.
    pub degree: usize,
    pub cg: CgOptions,
    /// Rule for load vectors and error norms.
    pub quad_degree: usize,
    /// Rule for mass and stiffness matrices.
    pub matrix_quad_degree: usize,
}

impl Default for SchemeConfig {
    fn default() -> Self {
        Self {
            steps: 16,
            grading: 1.0,
            policy: SuperconvPolicy::interval_min(),
            cells: 16,
            degree: 2,
            cg: CgOptions::default(),
            quad_degree: 6,
            matrix_quad_degree: 4,
        }
    }
}

impl SchemeConfig {
    pub fn validate(&self, problem: &ProblemSpec) -> Result<()> {
        if self.steps == 0 {
            return Err(Error::invalid("N must be at least 1"));
        }
        if self.cells == 0 {
            return Err(Error::invalid("M must be at least 1"));
        }
        if !(self.grading >= 1.0 && self.grading.is_finite()) {
            return Err(Error::invalid(format!("r must satisfy r >= 1, got {}", self.grading)));
        }
        if !(self.cg.tol > 0.0) {
            return Err(Error::invalid(format!("cg_tol must be positive, got {}", self.cg.tol)));
        }
        if self.matrix_quad_degree < 2 * self.degree {
            return Err(Error::invalid(format!(
                "matrix quadrature degree {} is below 2p = {}",
                self.matrix_quad_degree,
                2 * self.degree
            )));
        }
        self.policy.validate()?;
        if problem.is_mobile_immobile() && self.grading != 1.0 {
            return Err(Error::Unsupported(format!(
                "mobile-immobile scheme requires a uniform temporal mesh (r = 1), got r = {}",
                self.grading
            )));
        }
        if !(problem.final_time > 0.0) || (problem.exponent.horizon() - problem.final_time).abs() > 1e-12 * problem.final_time {
            return Err(Error::invalid(format!(
                "final time {} does not match the exponent horizon {}",
                problem.final_time,
                problem.exponent.horizon()
            )));
        }
        Ok(())
    }
}

/// Everything a run keeps per step. Solution vectors hold interior dofs only;
/// [`SolutionHistory::full_solution`] restores the boundary zeros.
#[derive(Debug, Clone)]
pub struct SolutionHistory {
    pub space: Arc<FeSpace>,
    pub mesh: GradedMesh,
    pub times: Vec<f64>,
    /// `U⁰..U^n` on interior dofs.
    pub solutions: Vec<Vec<f64>>,
    /// `M(U^k - U^{k-1})`, `k = 1..=n` (index `k - 1`).
    pub mass_increments: Vec<Vec<f64>>,
    /// `‖U^k‖_M²`, `k = 0..=n`.
    pub mass_norms_sq: Vec<f64>,
    pub params: Vec<StepParams>,
    pub coeffs: Vec<CoeffRow>,
    pub cg_reports: Vec<CgReport>,
    /// Report of the initial projection, `None` when no solve was needed.
    pub initial_report: Option<CgReport>,
    /// Multiply-adds spent on history sums.
    pub history_ops: u64,
}

impl SolutionHistory {
    pub fn steps_done(&self) -> usize {
        self.solutions.len() - 1
    }

    pub fn full_solution(&self, n: usize) -> Vec<f64> {
        self.space.extend(&self.solutions[n])
    }

    /// `‖u(·, t_n) - u_h^n‖_{L2}` for `n = 0..=steps`.
    pub fn l2_errors(&self, exact: &(dyn Fn(f64, f64, f64) -> f64 + Sync), rule: &TriangleRule) -> Vec<f64> {
        (0..self.solutions.len())
            .map(|n| {
                let t = self.times[n];
                l2_error(&self.space, &self.full_solution(n), |x, y| exact(x, y, t), rule)
            })
            .collect()
    }

    /// `max_{1≤n≤N} ‖u(·, t_n) - u_h^n‖_{L2}`
    pub fn max_error(&self, exact: &(dyn Fn(f64, f64, f64) -> f64 + Sync), rule: &TriangleRule) -> f64 {
        self.l2_errors(exact, rule)[1..].iter().fold(0.0, |m, e| m.max(*e))
    }

    /// Checks the mass-weighted energy inequality
    /// `2(D_τ U^{n-θ}, U^{n-θ})_M ≥ Σ_k c_{n-k,n}(‖U^k‖_M² - ‖U^{k-1}‖_M²)`
    /// and returns `(lhs, rhs)` for step `n`.
    pub fn energy_terms(&self, n: usize) -> (f64, f64) {
        let row = &self.coeffs[n - 1];
        let theta = self.params[n - 1].theta;
        let mid: Vec<f64> = self.solutions[n - 1]
            .iter()
            .zip(&self.solutions[n])
            .map(|(a, b)| theta * a + (1.0 - theta) * b)
            .collect();
        let mut lhs = 0.0;
        let mut rhs = 0.0;
        for k in 1..=n {
            let c = row.c(n - k);
            lhs += 2.0 * c * dot(&self.mass_increments[k - 1], &mid);
            rhs += c * (self.mass_norms_sq[k] - self.mass_norms_sq[k - 1]);
        }
        (lhs, rhs)
    }
}

/// An in-progress run: assembled operators plus the history so far.
pub struct SolverState {
    problem: ProblemSpec,
    config: SchemeConfig,
    mass: CsrMatrix,
    stiffness: CsrMatrix,
    load_rule: TriangleRule,
    /// `M U^{n-1}` on interior dofs.
    mass_times_last: Vec<f64>,
    history: SolutionHistory,
}

impl SolverState {
    /// Builds meshes, space and operators and sets `U⁰ = Π_h u₀`.
    pub fn initialize(problem: &ProblemSpec, config: &SchemeConfig) -> Result<Self> {
        config.validate(problem)?;
        let mesh = GradedMesh::new(problem.final_time, config.steps, config.grading)?;
        let space = Arc::new(FeSpace::new(TriMesh::unit_square(config.cells)?, config.degree)?);
        let matrix_rule = TriangleRule::with_degree(config.matrix_quad_degree);
        let load_rule = TriangleRule::with_degree(config.quad_degree);
        let interior = space.interior();
        let mass = assemble_mass(&space, &matrix_rule)?.principal_submatrix(interior);
        let stiffness = assemble_stiffness(&space, &problem.tensor, &matrix_rule)?.principal_submatrix(interior);

        let (u0, initial_report) = match &problem.initial {
            None => (vec![0.0; interior.len()], None),
            Some(init) => {
                let g = Arc::clone(&init.gradient);
                let (pi, rep) = elliptic_projection(
                    &space,
                    &problem.tensor,
                    &stiffness,
                    move |x, y| g(x, y),
                    &load_rule,
                    &config.cg,
                )?;
                (space.restrict(pi.coeffs()), Some(rep))
            }
        };
        let mu0 = mass.spmv(&u0)?;
        let norm0 = dot(&mu0, &u0);
        let history = SolutionHistory {
            space,
            times: vec![0.0],
            solutions: vec![u0],
            mass_increments: Vec::with_capacity(config.steps),
            mass_norms_sq: vec![norm0],
            params: Vec::with_capacity(config.steps),
            coeffs: Vec::with_capacity(config.steps),
            cg_reports: Vec::with_capacity(config.steps),
            initial_report,
            history_ops: 0,
            mesh,
        };
        Ok(Self {
            problem: problem.clone(),
            config: config.clone(),
            mass,
            stiffness,
            load_rule,
            mass_times_last: mu0,
            history,
        })
    }

    pub fn history(&self) -> &SolutionHistory {
        &self.history
    }

    pub fn into_history(self) -> SolutionHistory {
        self.history
    }

    pub fn mass(&self) -> &CsrMatrix {
        &self.mass
    }

    pub fn stiffness(&self) -> &CsrMatrix {
        &self.stiffness
    }

    /// Advances one step with the scheme matching the problem kind.
    pub fn step(&mut self) -> Result<()> {
        let n = self.history.steps_done() + 1;
        if n > self.config.steps {
            return Err(Error::invalid(format!("all {} steps already taken", self.config.steps)));
        }
        let result = match self.problem.kind.clone() {
            ProblemKind::Subdiffusion => self.step_subdiffusion(n),
            ProblemKind::MobileImmobile { k, initial_rate } => self.step_mobile_immobile(n, &k, initial_rate.as_ref()),
        };
        result.map_err(|e| Error::Step {
            step: n,
            policy: self.config.policy.to_string(),
            source: Box::new(e),
        })
    }

    fn load(&self, t: f64) -> Vec<f64> {
        let f = &self.problem.source;
        let space = &self.history.space;
        space.restrict(&assemble_functional(space, |x, y| f(x, y, t), &self.load_rule))
    }

    fn coefficient_row(&self, n: usize) -> Result<CoeffRow> {
        let params = select_step_params(&self.problem.exponent, &self.history.mesh, n, &self.config.policy)?;
        Ok(CoeffRow::new(&self.history.mesh, &params))
    }

    /// `rhs -= Σ_{k=1}^{n-1} c_{n-k,n} M ΔU^k`, scaled by `scale`.
    fn subtract_history(&mut self, row: &CoeffRow, scale: f64, rhs: &mut [f64]) {
        let n = row.n();
        for k in 1..n {
            let w = scale * row.c(n - k);
            for (r, m) in rhs.iter_mut().zip(&self.history.mass_increments[k - 1]) {
                *r -= w * m;
            }
        }
        self.history.history_ops += ((n - 1) * rhs.len()) as u64;
    }

    fn solve_and_record(&mut self, row: CoeffRow, lhs: CsrMatrix, rhs: Vec<f64>) -> Result<()> {
        let n = row.n();
        let prev = &self.history.solutions[n - 1];
        let (u, report) = cg_solve(&lhs, &rhs, Some(prev), &self.config.cg)?;
        if u.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite { step: n });
        }
        let diff: Vec<f64> = u.iter().zip(prev).map(|(a, b)| a - b).collect();
        let m_diff = self.mass.spmv(&diff)?;
        for (acc, d) in self.mass_times_last.iter_mut().zip(&m_diff) {
            *acc += d;
        }
        self.history.mass_norms_sq.push(dot(&self.mass_times_last, &u));
        self.history.mass_increments.push(m_diff);
        self.history.solutions.push(u);
        self.history.times.push(self.history.mesh.node(n));
        self.history.params.push(row.params);
        self.history.coeffs.push(row);
        self.history.cg_reports.push(report);
        Ok(())
    }

    /// `[c₀M + (1-θ)A] U^n = F(t_{n-θ}) + c₀MU^{n-1} - Σ_{k<n} c_{n-k}MΔU^k - θAU^{n-1}`
    fn step_subdiffusion(&mut self, n: usize) -> Result<()> {
        let row = self.coefficient_row(n)?;
        let theta = row.params.theta;
        let c0 = row.c(0);
        let prev = &self.history.solutions[n - 1];
        let a_prev = self.stiffness.spmv(prev)?;
        let mut rhs = self.load(row.params.t_super);
        for ((r, mu), au) in rhs.iter_mut().zip(&self.mass_times_last).zip(&a_prev) {
            *r += c0 * mu - theta * au;
        }
        self.subtract_history(&row, 1.0, &mut rhs);
        let lhs = self.mass.linear_combination(c0, &self.stiffness, 1.0 - theta)?;
        self.solve_and_record(row, lhs, rhs)
    }

    /// Mobile–immobile step on a uniform mesh; `D_τ` is the derivative of the
    /// quadratic interpolant at `t_{n-θ}` (first step: linear plus `u_t(0)`).
    fn step_mobile_immobile(&mut self, n: usize, k: &TimeFn, initial_rate: Option<&SpaceFn>) -> Result<()> {
        if self.config.grading != 1.0 {
            return Err(Error::Unsupported("mobile-immobile scheme on a graded mesh".into()));
        }
        let row = self.coefficient_row(n)?;
        let theta = row.params.theta;
        let alpha = row.params.alpha_n;
        let c0 = row.c(0);
        let tau = self.history.mesh.tau(n);
        let kn = k(row.params.t_super);
        if !(kn >= 0.0) {
            return Err(Error::invalid(format!("k(t) must be nonnegative, got {kn}")));
        }
        let prev = &self.history.solutions[n - 1];
        let a_prev = self.stiffness.spmv(prev)?;
        let mut rhs = self.load(row.params.t_super);
        let diag;
        if n == 1 {
            diag = (2.0 - alpha) / tau;
            if let Some(rate) = initial_rate {
                let space = &self.history.space;
                let l = space.restrict(&assemble_functional(space, |x, y| rate(x, y), &self.load_rule));
                for (r, v) in rhs.iter_mut().zip(&l) {
                    *r += (1.0 - alpha) * v;
                }
            }
            for ((r, mu), au) in rhs.iter_mut().zip(&self.mass_times_last).zip(&a_prev) {
                *r += (diag + kn * c0) * mu - theta * au;
            }
        } else {
            diag = (3.0 - alpha) / (2.0 * tau);
            // M U^{n-2} = M U^{n-1} - M ΔU^{n-1}
            let last_inc = &self.history.mass_increments[n - 2];
            for (((r, mu), inc), au) in rhs.iter_mut().zip(&self.mass_times_last).zip(last_inc).zip(&a_prev) {
                let mu2 = mu - inc;
                *r += ((4.0 - 2.0 * alpha) * mu - (1.0 - alpha) * mu2) / (2.0 * tau) + kn * c0 * mu - theta * au;
            }
            self.subtract_history(&row, kn, &mut rhs);
        }
        let lhs = self.mass.linear_combination(diag + kn * c0, &self.stiffness, 1.0 - theta)?;
        self.solve_and_record(row, lhs, rhs)
    }

    /// Runs all remaining steps.
    pub fn run_to_end(&mut self) -> Result<()> {
        while self.history.steps_done() < self.config.steps {
            self.step()?;
        }
        Ok(())
    }
}

/// Initializes and runs every step.
pub fn run(problem: &ProblemSpec, config: &SchemeConfig) -> Result<SolutionHistory> {
    let mut state = SolverState::initialize(problem, config)?;
    state.run_to_end()?;
    Ok(state.into_history())
}

/// Outcome of checking the a priori stability bound at every step.
#[derive(Debug, Clone, PartialEq)]
pub struct StabilityReport {
    /// `false` for `N = 1`, where `1/ln N` is undefined.
    pub applicable: bool,
    /// `‖u_h^n‖`, `n = 0..=N`.
    pub norms: Vec<f64>,
    /// `B_n`, `n = 1..=N` (index `n - 1`).
    pub bounds: Vec<f64>,
    pub holds: bool,
    /// `max_n ‖u_h^n‖ / B_n`
    pub worst_ratio: f64,
}

/// Evaluates
///
/// ```text
/// B_n = ‖u_h⁰‖ + 2(1+2^r)e^r t_n^{α*} max_j Γ(1+1/ln N-α_j*)/Γ(1+1/ln N) · max_j ‖f(·,t_{j-θ_j})‖
/// ```
///
/// with `α*` the upper bound of the exponent, maxima over `j ≤ n`, and
/// compares it with `‖u_h^n‖`.
pub fn stability_certificate(history: &SolutionHistory, problem: &ProblemSpec, rule: &TriangleRule) -> StabilityReport {
    let space = &history.space;
    let norms: Vec<f64> = (0..history.solutions.len())
        .map(|n| l2_norm(space, &history.full_solution(n), rule))
        .collect();
    let steps = history.mesh.steps();
    if steps < 2 || history.params.is_empty() {
        return StabilityReport {
            applicable: false,
            norms,
            bounds: Vec::new(),
            holds: true,
            worst_ratio: 0.0,
        };
    }
    let l_n = 1.0 / (steps as f64).ln();
    let r = history.mesh.grading();
    let alpha_sup = problem.exponent.sup_bound();
    let constant = 2.0 * (1.0 + 2f64.powf(r)) * r.exp();
    let f = &problem.source;
    let mut gamma_max = 0.0f64;
    let mut f_max = 0.0f64;
    let mut bounds = Vec::with_capacity(history.params.len());
    let mut holds = true;
    let mut worst_ratio = 0.0f64;
    for (j, p) in history.params.iter().enumerate() {
        gamma_max = gamma_max.max(gamma(1.0 + l_n - p.alpha_star) / gamma(1.0 + l_n));
        let t = p.t_super;
        f_max = f_max.max(l2_error(space, &vec![0.0; space.ndofs()], |x, y| f(x, y, t), rule));
        let tn = history.times[j + 1];
        let b = norms[0] + constant * tn.powf(alpha_sup) * gamma_max * f_max;
        let u = norms[j + 1];
        if u > b * (1.0 + 1e-12) {
            holds = false;
        }
        if b > 0.0 {
            worst_ratio = worst_ratio.max(u / b);
        }
        bounds.push(b);
    }
    StabilityReport {
        applicable: true,
        norms,
        bounds,
        holds,
        worst_ratio,
    }
}
