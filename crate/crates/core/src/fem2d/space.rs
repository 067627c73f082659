use super::TriMesh;
use crate::{Error, Result};
use std::sync::Arc;

/// Continuous P1 or P2 Lagrange space on a [`TriMesh`] with homogeneous
/// Dirichlet data.
///
/// Dofs sit on the `(pM+1)²` lattice of spacing `1/(pM)`; dof `(I, J)` has
/// index `I + J(pM+1)`. Local order per triangle: the three vertices, then
/// the midpoints of edges 0-1, 1-2 and 2-0.
#[derive(Debug, Clone, PartialEq)]
pub struct FeSpace {
    mesh: TriMesh,
    degree: usize,
    coords: Vec<[f64; 2]>,
    cell_dofs: Vec<Vec<usize>>,
    boundary: Vec<bool>,
    interior: Vec<usize>,
    interior_index: Vec<Option<usize>>,
}

impl FeSpace {
    pub fn new(mesh: TriMesh, degree: usize) -> Result<Self> {
        if !(1..=2).contains(&degree) {
            return Err(Error::Unsupported(format!(
                "finite element degree {degree} (supported: 1, 2)"
            )));
        }
        let m = mesh.cells();
        let side = degree * m;
        let n1 = side + 1;
        let spacing = 1.0 / side as f64;
        let mut coords = Vec::with_capacity(n1 * n1);
        let mut boundary = Vec::with_capacity(n1 * n1);
        for jj in 0..n1 {
            for ii in 0..n1 {
                coords.push([ii as f64 * spacing, jj as f64 * spacing]);
                boundary.push(ii == 0 || jj == 0 || ii == side || jj == side);
            }
        }
        let lattice = |v: usize| -> (usize, usize) { (degree * (v % (m + 1)), degree * (v / (m + 1))) };
        let index = |(ii, jj): (usize, usize)| ii + jj * n1;
        let mut cell_dofs = Vec::with_capacity(mesh.triangles().len());
        for tri in mesh.triangles() {
            let l: Vec<(usize, usize)> = tri.iter().map(|&v| lattice(v)).collect();
            let mut dofs: Vec<usize> = l.iter().map(|&p| index(p)).collect();
            if degree == 2 {
                for (a, b) in [(0, 1), (1, 2), (2, 0)] {
                    dofs.push(index(((l[a].0 + l[b].0) / 2, (l[a].1 + l[b].1) / 2)));
                }
            }
            cell_dofs.push(dofs);
        }
        let mut interior = Vec::new();
        let mut interior_index = vec![None; coords.len()];
        for (i, &b) in boundary.iter().enumerate() {
            if !b {
                interior_index[i] = Some(interior.len());
                interior.push(i);
            }
        }
        Ok(Self {
            mesh,
            degree,
            coords,
            cell_dofs,
            boundary,
            interior,
            interior_index,
        })
    }

    pub fn mesh(&self) -> &TriMesh {
        &self.mesh
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn ndofs(&self) -> usize {
        self.coords.len()
    }

    pub fn local_dofs(&self) -> usize {
        if self.degree == 1 {
            3
        } else {
            6
        }
    }

    pub fn dof_coords(&self) -> &[[f64; 2]] {
        &self.coords
    }

    pub fn cell_dofs(&self, t: usize) -> &[usize] {
        &self.cell_dofs[t]
    }

    pub fn is_boundary(&self, dof: usize) -> bool {
        self.boundary[dof]
    }

    pub fn boundary_mask(&self) -> &[bool] {
        &self.boundary
    }

    pub fn boundary_count(&self) -> usize {
        self.boundary.iter().filter(|b| **b).count()
    }

    /// Interior dof indices in increasing order.
    pub fn interior(&self) -> &[usize] {
        &self.interior
    }

    pub fn interior_index(&self, dof: usize) -> Option<usize> {
        self.interior_index[dof]
    }

    /// Restricts a full coefficient vector to interior dofs.
    pub fn restrict(&self, full: &[f64]) -> Vec<f64> {
        self.interior.iter().map(|&i| full[i]).collect()
    }

    /// Extends interior values by zero on the boundary.
    pub fn extend(&self, interior: &[f64]) -> Vec<f64> {
        let mut full = vec![0.0; self.ndofs()];
        for (&i, v) in self.interior.iter().zip(interior) {
            full[i] = *v;
        }
        full
    }

    /// Nodal interpolant of `f` with boundary values forced to zero.
    pub fn interpolate(self: &Arc<Self>, f: impl Fn(f64, f64) -> f64) -> FeFunction {
        let coeffs = self
            .coords
            .iter()
            .zip(&self.boundary)
            .map(|(p, &b)| if b { 0.0 } else { f(p[0], p[1]) })
            .collect();
        FeFunction {
            space: Arc::clone(self),
            coeffs,
        }
    }
}

/// Reference-element shape functions at `(ξ, η)`: values and reference
/// gradients, local dof order as in [`FeSpace`].
pub(crate) fn shape(degree: usize, xi: f64, eta: f64) -> (Vec<f64>, Vec<[f64; 2]>) {
    let l = [1.0 - xi - eta, xi, eta];
    let g = [[-1.0, -1.0], [1.0, 0.0], [0.0, 1.0]];
    if degree == 1 {
        return (l.to_vec(), g.to_vec());
    }
    let mut val = Vec::with_capacity(6);
    let mut grad = Vec::with_capacity(6);
    for i in 0..3 {
        val.push(l[i] * (2.0 * l[i] - 1.0));
        let s = 4.0 * l[i] - 1.0;
        grad.push([s * g[i][0], s * g[i][1]]);
    }
    for (a, b) in [(0, 1), (1, 2), (2, 0)] {
        val.push(4.0 * l[a] * l[b]);
        grad.push([
            4.0 * (l[a] * g[b][0] + l[b] * g[a][0]),
            4.0 * (l[a] * g[b][1] + l[b] * g[a][1]),
        ]);
    }
    (val, grad)
}

/// A coefficient vector over all dofs of a shared space, zero on the boundary.
#[derive(Debug, Clone, PartialEq)]
pub struct FeFunction {
    space: Arc<FeSpace>,
    coeffs: Vec<f64>,
}

impl FeFunction {
    pub fn new(space: Arc<FeSpace>, coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.len() != space.ndofs() {
            return Err(Error::LengthMismatch {
                expected: space.ndofs(),
                found: coeffs.len(),
            });
        }
        if let Some(i) = (0..coeffs.len()).find(|&i| space.is_boundary(i) && coeffs[i] != 0.0) {
            return Err(Error::invalid(format!("boundary dof {i} is not zero")));
        }
        Ok(Self { space, coeffs })
    }

    pub fn zero(space: Arc<FeSpace>) -> Self {
        let n = space.ndofs();
        Self {
            space,
            coeffs: vec![0.0; n],
        }
    }

    pub fn space(&self) -> &Arc<FeSpace> {
        &self.space
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<f64> {
        self.coeffs
    }
}
