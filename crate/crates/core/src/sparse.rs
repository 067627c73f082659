//! Compressed sparse row matrices and a Jacobi-preconditioned conjugate
//! gradient solver.

use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    nrows: usize,
    ncols: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
}

impl CsrMatrix {
    /// Builds a CSR matrix, summing duplicates and sorting columns per row.
    /// Explicit zeros are kept so matrices assembled on one connectivity
    /// share a sparsity pattern.
    pub fn from_triplets(triplets: &[(usize, usize, f64)], nrows: usize, ncols: usize) -> Result<Self> {
        let mut counts = vec![0usize; nrows + 1];
        for &(r, c, _) in triplets {
            if r >= nrows || c >= ncols {
                return Err(Error::IndexOutOfRange {
                    row: r,
                    col: c,
                    nrows,
                    ncols,
                });
            }
            counts[r + 1] += 1;
        }
        for i in 0..nrows {
            counts[i + 1] += counts[i];
        }
        // bucket by row
        let mut next = counts.clone();
        let mut bucket = vec![(0usize, 0.0f64); triplets.len()];
        for &(r, c, v) in triplets {
            bucket[next[r]] = (c, v);
            next[r] += 1;
        }
        let mut row_ptr = Vec::with_capacity(nrows + 1);
        let mut col_idx = Vec::with_capacity(triplets.len());
        let mut values = Vec::with_capacity(triplets.len());
        row_ptr.push(0);
        for r in 0..nrows {
            let row = &mut bucket[counts[r]..counts[r + 1]];
            row.sort_by_key(|e| e.0);
            let mut last: Option<usize> = None;
            for &(c, v) in row.iter() {
                if last == Some(c) {
                    *values.last_mut().unwrap() += v;
                } else {
                    col_idx.push(c);
                    values.push(v);
                    last = Some(c);
                }
            }
            row_ptr.push(col_idx.len());
        }
        Ok(Self {
            nrows,
            ncols,
            row_ptr,
            col_idx,
            values,
        })
    }

    pub fn identity(n: usize) -> Self {
        Self {
            nrows: n,
            ncols: n,
            row_ptr: (0..=n).collect(),
            col_idx: (0..n).collect(),
            values: vec![1.0; n],
        }
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row_offsets(&self) -> &[usize] {
        &self.row_ptr
    }

    pub fn col_indices(&self) -> &[usize] {
        &self.col_idx
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        let cols = &self.col_idx[self.row_ptr[row]..self.row_ptr[row + 1]];
        match cols.binary_search(&col) {
            Ok(p) => self.values[self.row_ptr[row] + p],
            Err(_) => 0.0,
        }
    }

    /// Iterates the stored entries of one row as `(col, value)`.
    pub fn row(&self, row: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let span = self.row_ptr[row]..self.row_ptr[row + 1];
        self.col_idx[span.clone()]
            .iter()
            .copied()
            .zip(self.values[span].iter().copied())
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.nrows.min(self.ncols)).map(|i| self.get(i, i)).collect()
    }

    pub fn spmv(&self, x: &[f64]) -> Result<Vec<f64>> {
        let mut y = vec![0.0; self.nrows];
        self.spmv_into(x, &mut y)?;
        Ok(y)
    }

    /// `y = A x`, rows accumulated in column order.
    pub fn spmv_into(&self, x: &[f64], y: &mut [f64]) -> Result<()> {
        if x.len() != self.ncols {
            return Err(Error::LengthMismatch {
                expected: self.ncols,
                found: x.len(),
            });
        }
        if y.len() != self.nrows {
            return Err(Error::LengthMismatch {
                expected: self.nrows,
                found: y.len(),
            });
        }
        for (r, out) in y.iter_mut().enumerate() {
            let span = self.row_ptr[r]..self.row_ptr[r + 1];
            let mut acc = 0.0;
            for (c, v) in self.col_idx[span.clone()].iter().zip(&self.values[span]) {
                acc += v * x[*c];
            }
            *out = acc;
        }
        Ok(())
    }

    /// `alpha·self + beta·other`.
    pub fn linear_combination(&self, alpha: f64, other: &CsrMatrix, beta: f64) -> Result<CsrMatrix> {
        if self.nrows != other.nrows || self.ncols != other.ncols {
            return Err(Error::LengthMismatch {
                expected: self.nrows * self.ncols,
                found: other.nrows * other.ncols,
            });
        }
        if self.row_ptr == other.row_ptr && self.col_idx == other.col_idx {
            let values = self
                .values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| alpha * a + beta * b)
                .collect();
            return Ok(CsrMatrix {
                values,
                ..self.clone()
            });
        }
        let mut triplets = Vec::with_capacity(self.nnz() + other.nnz());
        for r in 0..self.nrows {
            triplets.extend(self.row(r).map(|(c, v)| (r, c, alpha * v)));
            triplets.extend(other.row(r).map(|(c, v)| (r, c, beta * v)));
        }
        CsrMatrix::from_triplets(&triplets, self.nrows, self.ncols)
    }

    /// Principal submatrix on `keep` (sorted, unique indices).
    pub fn principal_submatrix(&self, keep: &[usize]) -> CsrMatrix {
        let mut map = vec![usize::MAX; self.ncols];
        for (new, &old) in keep.iter().enumerate() {
            map[old] = new;
        }
        let mut row_ptr = Vec::with_capacity(keep.len() + 1);
        let mut col_idx = Vec::new();
        let mut values = Vec::new();
        row_ptr.push(0);
        for &old in keep {
            for (c, v) in self.row(old) {
                if map[c] != usize::MAX {
                    col_idx.push(map[c]);
                    values.push(v);
                }
            }
            row_ptr.push(col_idx.len());
        }
        CsrMatrix {
            nrows: keep.len(),
            ncols: keep.len(),
            row_ptr,
            col_idx,
            values,
        }
    }

    /// Largest `|A_ij - A_ji|`.
    pub fn asymmetry(&self) -> f64 {
        let mut worst = 0.0f64;
        for r in 0..self.nrows {
            for (c, v) in self.row(r) {
                worst = worst.max((v - self.get(c, r)).abs());
            }
        }
        worst
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CgOptions {
    /// Relative residual target `‖b - Ax‖ <= tol ‖b‖`.
    pub tol: f64,
    /// `None` means `10 · n`.
    pub max_iter: Option<usize>,
}

impl Default for CgOptions {
    fn default() -> Self {
        Self {
            tol: 1e-11,
            max_iter: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CgReport {
    pub iterations: usize,
    pub relative_residual: f64,
    pub converged: bool,
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Jacobi-preconditioned conjugate gradients for SPD `a`, optionally warm
/// started. The final residual is recomputed with an explicit product before
/// the solve is accepted.
pub fn cg_solve(
    a: &CsrMatrix,
    b: &[f64],
    x0: Option<&[f64]>,
    opts: &CgOptions,
) -> Result<(Vec<f64>, CgReport)> {
    let n = a.nrows();
    if a.ncols() != n {
        return Err(Error::invalid("cg_solve needs a square matrix"));
    }
    if b.len() != n {
        return Err(Error::LengthMismatch {
            expected: n,
            found: b.len(),
        });
    }
    let diag = a.diagonal();
    if let Some((row, &value)) = diag.iter().enumerate().find(|(_, d)| !(**d > 0.0)) {
        return Err(Error::InvalidPreconditioner { row, value });
    }
    let inv_diag: Vec<f64> = diag.iter().map(|d| 1.0 / d).collect();
    let max_iter = opts.max_iter.unwrap_or(10 * n.max(1));

    let b_norm = norm(b);
    let mut x = match x0 {
        Some(x0) if x0.len() == n => x0.to_vec(),
        Some(x0) => {
            return Err(Error::LengthMismatch {
                expected: n,
                found: x0.len(),
            })
        }
        None => vec![0.0; n],
    };
    if b_norm == 0.0 {
        x.fill(0.0);
        return Ok((
            x,
            CgReport {
                iterations: 0,
                relative_residual: 0.0,
                converged: true,
            },
        ));
    }

    let mut r = a.spmv(&x)?;
    for (ri, bi) in r.iter_mut().zip(b) {
        *ri = bi - *ri;
    }
    let mut z: Vec<f64> = r.iter().zip(&inv_diag).map(|(ri, di)| ri * di).collect();
    let mut p = z.clone();
    let mut ap = vec![0.0; n];
    let mut rz = dot(&r, &z);
    let mut iterations = 0;
    let mut rel = norm(&r) / b_norm;

    while rel > opts.tol && iterations < max_iter {
        a.spmv_into(&p, &mut ap)?;
        let pap = dot(&p, &ap);
        if !(pap > 0.0) {
            break;
        }
        let step = rz / pap;
        for i in 0..n {
            x[i] += step * p[i];
            r[i] -= step * ap[i];
        }
        iterations += 1;
        rel = norm(&r) / b_norm;
        if rel <= opts.tol {
            let ax = a.spmv(&x)?;
            let true_rel = norm(&b.iter().zip(&ax).map(|(bi, yi)| bi - yi).collect::<Vec<_>>()) / b_norm;
            if true_rel <= opts.tol {
                break;
            }
            for i in 0..n {
                r[i] = b[i] - ax[i];
            }
            rel = true_rel;
        }
        for i in 0..n {
            z[i] = r[i] * inv_diag[i];
        }
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }

    // independent re-verification of the accepted solution
    let ax = a.spmv(&x)?;
    let final_rel = norm(&b.iter().zip(&ax).map(|(bi, yi)| bi - yi).collect::<Vec<_>>()) / b_norm;
    let report = CgReport {
        iterations,
        relative_residual: final_rel,
        converged: final_rel <= opts.tol,
    };
    if !report.converged {
        return Err(Error::NonConvergence(report));
    }
    Ok((x, report))
}
