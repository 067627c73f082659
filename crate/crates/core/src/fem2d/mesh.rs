use crate::{Error, Result};

/// Uniform triangulation of the unit square with `M` cells per direction.
/// Every cell is split along its lower-left to upper-right diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct TriMesh {
    cells: usize,
    vertices: Vec<[f64; 2]>,
    triangles: Vec<[usize; 3]>,
}

impl TriMesh {
    pub fn unit_square(cells: usize) -> Result<Self> {
        if cells == 0 {
            return Err(Error::invalid("mesh needs M >= 1 cells per direction"));
        }
        let n1 = cells + 1;
        let h = 1.0 / cells as f64;
        let mut vertices = Vec::with_capacity(n1 * n1);
        for j in 0..n1 {
            for i in 0..n1 {
                vertices.push([i as f64 * h, j as f64 * h]);
            }
        }
        let mut triangles = Vec::with_capacity(2 * cells * cells);
        for j in 0..cells {
            for i in 0..cells {
                let v00 = i + j * n1;
                let v10 = v00 + 1;
                let v01 = v00 + n1;
                let v11 = v01 + 1;
                triangles.push([v00, v10, v11]);
                triangles.push([v00, v11, v01]);
            }
        }
        Ok(Self {
            cells,
            vertices,
            triangles,
        })
    }

    /// Cells per direction.
    pub fn cells(&self) -> usize {
        self.cells
    }

    pub fn h(&self) -> f64 {
        1.0 / self.cells as f64
    }

    pub fn vertices(&self) -> &[[f64; 2]] {
        &self.vertices
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    pub fn corners(&self, t: usize) -> [[f64; 2]; 3] {
        let [a, b, c] = self.triangles[t];
        [self.vertices[a], self.vertices[b], self.vertices[c]]
    }

    pub fn signed_area(&self, t: usize) -> f64 {
        let [p0, p1, p2] = self.corners(t);
        0.5 * ((p1[0] - p0[0]) * (p2[1] - p0[1]) - (p2[0] - p0[0]) * (p1[1] - p0[1]))
    }
}
