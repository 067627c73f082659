use super::quadrature::check_degree;
use super::space::shape;
use super::{DiffusionTensor, FeFunction, FeSpace, TriangleRule};
use crate::sparse::{cg_solve, CgOptions, CgReport, CsrMatrix};
use crate::{Error, Result};
use std::sync::Arc;

/// Shape functions tabulated at the points of one rule.
struct Tabulated {
    values: Vec<Vec<f64>>,
    grads: Vec<Vec<[f64; 2]>>,
}

impl Tabulated {
    fn new(degree: usize, rule: &TriangleRule) -> Self {
        let (values, grads) = rule.points().iter().map(|p| shape(degree, p[0], p[1])).unzip();
        Self { values, grads }
    }
}

/// Affine map of one triangle: origin, Jacobian columns and `|det J|`.
struct Geometry {
    origin: [f64; 2],
    jac: [[f64; 2]; 2],
    det: f64,
}

impl Geometry {
    fn new(space: &FeSpace, t: usize) -> Self {
        let [p0, p1, p2] = space.mesh().corners(t);
        let jac = [[p1[0] - p0[0], p2[0] - p0[0]], [p1[1] - p0[1], p2[1] - p0[1]]];
        let det = jac[0][0] * jac[1][1] - jac[0][1] * jac[1][0];
        Self {
            origin: p0,
            jac,
            det,
        }
    }

    fn map(&self, p: [f64; 2]) -> (f64, f64) {
        (
            self.origin[0] + self.jac[0][0] * p[0] + self.jac[0][1] * p[1],
            self.origin[1] + self.jac[1][0] * p[0] + self.jac[1][1] * p[1],
        )
    }

    /// `J^{-T} g`
    fn push_gradient(&self, g: [f64; 2]) -> [f64; 2] {
        let j = &self.jac;
        [
            (j[1][1] * g[0] - j[1][0] * g[1]) / self.det,
            (-j[0][1] * g[0] + j[0][0] * g[1]) / self.det,
        ]
    }
}

fn to_matrix(space: &FeSpace, mut locals: impl FnMut(usize, &mut [f64])) -> Result<CsrMatrix> {
    let nloc = space.local_dofs();
    let ntri = space.mesh().triangles().len();
    let mut triplets = Vec::with_capacity(ntri * nloc * nloc);
    let mut local = vec![0.0; nloc * nloc];
    for t in 0..ntri {
        local.fill(0.0);
        locals(t, &mut local);
        let dofs = space.cell_dofs(t);
        for i in 0..nloc {
            for j in 0..nloc {
                triplets.push((dofs[i], dofs[j], local[i * nloc + j]));
            }
        }
    }
    CsrMatrix::from_triplets(&triplets, space.ndofs(), space.ndofs())
}

/// `M_ij = ∫ φ_i φ_j` over all dofs.
pub fn assemble_mass(space: &FeSpace, rule: &TriangleRule) -> Result<CsrMatrix> {
    check_degree(rule.degree(), 2 * space.degree(), "mass assembly")?;
    let tab = Tabulated::new(space.degree(), rule);
    let nloc = space.local_dofs();
    to_matrix(space, |t, local| {
        let det = Geometry::new(space, t).det.abs();
        for (q, w) in rule.weights().iter().enumerate() {
            let v = &tab.values[q];
            for i in 0..nloc {
                for j in 0..nloc {
                    local[i * nloc + j] += w * det * v[i] * v[j];
                }
            }
        }
    })
}

/// `A_ij = ∫ K∇φ_j·∇φ_i` over all dofs. Fails if the tensor leaves its
/// ellipticity bounds at a quadrature point.
pub fn assemble_stiffness(space: &FeSpace, tensor: &DiffusionTensor, rule: &TriangleRule) -> Result<CsrMatrix> {
    check_degree(rule.degree(), 2 * (space.degree() - 1), "stiffness assembly")?;
    let tab = Tabulated::new(space.degree(), rule);
    let nloc = space.local_dofs();
    let constant = match tensor.constant_value() {
        Some(_) => Some(tensor.checked(0.5, 0.5)?),
        None => None,
    };
    let mut failure = None;
    let m = to_matrix(space, |t, local| {
        let geo = Geometry::new(space, t);
        let mut g = vec![[0.0; 2]; nloc];
        for (q, (p, w)) in rule.points().iter().zip(rule.weights()).enumerate() {
            let k = match constant {
                Some(k) => k,
                None => {
                    let (x, y) = geo.map(*p);
                    match tensor.checked(x, y) {
                        Ok(k) => k,
                        Err(e) => {
                            failure.get_or_insert(e);
                            return;
                        }
                    }
                }
            };
            for (gi, r) in g.iter_mut().zip(&tab.grads[q]) {
                *gi = geo.push_gradient(*r);
            }
            let wd = w * geo.det.abs();
            for i in 0..nloc {
                let kg = [
                    k[0][0] * g[i][0] + k[0][1] * g[i][1],
                    k[1][0] * g[i][0] + k[1][1] * g[i][1],
                ];
                for j in 0..nloc {
                    local[j * nloc + i] += wd * (kg[0] * g[j][0] + kg[1] * g[j][1]);
                }
            }
        }
    });
    if let Some(e) = failure {
        return Err(e);
    }
    m
}

/// `F_i = ∫ g φ_i` over all dofs.
pub fn assemble_functional(space: &FeSpace, g: impl Fn(f64, f64) -> f64, rule: &TriangleRule) -> Vec<f64> {
    let tab = Tabulated::new(space.degree(), rule);
    let mut out = vec![0.0; space.ndofs()];
    for t in 0..space.mesh().triangles().len() {
        let geo = Geometry::new(space, t);
        let dofs = space.cell_dofs(t);
        for (q, (p, w)) in rule.points().iter().zip(rule.weights()).enumerate() {
            let (x, y) = geo.map(*p);
            let gw = g(x, y) * w * geo.det.abs();
            for (d, v) in dofs.iter().zip(&tab.values[q]) {
                out[*d] += gw * v;
            }
        }
    }
    out
}

/// `F_i = ∫ K∇v·∇φ_i` for an analytic gradient `∇v`.
pub fn assemble_gradient_functional(
    space: &FeSpace,
    tensor: &DiffusionTensor,
    grad: impl Fn(f64, f64) -> [f64; 2],
    rule: &TriangleRule,
) -> Result<Vec<f64>> {
    let tab = Tabulated::new(space.degree(), rule);
    let mut out = vec![0.0; space.ndofs()];
    for t in 0..space.mesh().triangles().len() {
        let geo = Geometry::new(space, t);
        let dofs = space.cell_dofs(t);
        for (q, (p, w)) in rule.points().iter().zip(rule.weights()).enumerate() {
            let (x, y) = geo.map(*p);
            let k = tensor.checked(x, y)?;
            let gv = grad(x, y);
            let kg = [k[0][0] * gv[0] + k[0][1] * gv[1], k[1][0] * gv[0] + k[1][1] * gv[1]];
            let wd = w * geo.det.abs();
            for (d, r) in dofs.iter().zip(&tab.grads[q]) {
                let gp = geo.push_gradient(*r);
                out[*d] += wd * (kg[0] * gp[0] + kg[1] * gp[1]);
            }
        }
    }
    Ok(out)
}

/// Elliptic projection `Π_h v`: solves `(K∇Π_h v, ∇w) = (K∇v, ∇w)` for all
/// interior test functions. `stiffness_interior` is the stiffness matrix
/// restricted to interior dofs.
pub fn elliptic_projection(
    space: &Arc<FeSpace>,
    tensor: &DiffusionTensor,
    stiffness_interior: &CsrMatrix,
    grad: impl Fn(f64, f64) -> [f64; 2],
    rule: &TriangleRule,
    cg: &CgOptions,
) -> Result<(FeFunction, CgReport)> {
    let rhs = space.restrict(&assemble_gradient_functional(space, tensor, grad, rule)?);
    if stiffness_interior.nrows() != rhs.len() {
        return Err(Error::LengthMismatch {
            expected: rhs.len(),
            found: stiffness_interior.nrows(),
        });
    }
    let (x, report) = cg_solve(stiffness_interior, &rhs, None, cg)?;
    Ok((FeFunction::new(Arc::clone(space), space.extend(&x))?, report))
}

/// `‖u_h - exact‖_{L2}` by elementwise quadrature.
pub fn l2_error(space: &FeSpace, coeffs: &[f64], exact: impl Fn(f64, f64) -> f64, rule: &TriangleRule) -> f64 {
    let tab = Tabulated::new(space.degree(), rule);
    let mut acc = 0.0;
    for t in 0..space.mesh().triangles().len() {
        let geo = Geometry::new(space, t);
        let dofs = space.cell_dofs(t);
        for (q, (p, w)) in rule.points().iter().zip(rule.weights()).enumerate() {
            let (x, y) = geo.map(*p);
            let uh: f64 = dofs.iter().zip(&tab.values[q]).map(|(d, v)| coeffs[*d] * v).sum();
            let e = uh - exact(x, y);
            acc += w * geo.det.abs() * e * e;
        }
    }
    acc.sqrt()
}

/// `‖u_h‖_{L2}`
pub fn l2_norm(space: &FeSpace, coeffs: &[f64], rule: &TriangleRule) -> f64 {
    l2_error(space, coeffs, |_, _| 0.0, rule)
}

impl FeFunction {
    pub fn l2_error(&self, exact: impl Fn(f64, f64) -> f64, rule: &TriangleRule) -> f64 {
        l2_error(self.space(), self.coeffs(), exact, rule)
    }
}
