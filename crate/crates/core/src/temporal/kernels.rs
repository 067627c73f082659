use super::CoeffRow;
use crate::{Error, Result};

/// Complementary discrete kernels `P_j^{(n)}`, `0 <= j < n`, defined by
///
/// ```text
/// Σ_{k=m}^{n} P_{n-k}^{(n)} c_{k-m,k} = 1,   1 <= m <= n.
/// ```
#[derive(Debug, Clone, PartialEq)]
pub struct KernelRow {
    pub n: usize,
    values: Vec<f64>,
}

/// Residual above which the identity is treated as corrupted input.
const IDENTITY_FAILURE: f64 = 1e-8;

impl KernelRow {
    /// Forward substitution over `m = n, n-1, ..., 1`. `rows[i]` must be the
    /// coefficient row of step `i + 1`, and `rows.len()` is `n`.
    pub fn compute(rows: &[CoeffRow]) -> Result<Self> {
        let n = rows.len();
        if n == 0 {
            return Err(Error::invalid("complementary kernels need at least one step"));
        }
        for (i, row) in rows.iter().enumerate() {
            if row.n() != i + 1 {
                return Err(Error::invalid(format!(
                    "coefficient row {} holds step {}",
                    i + 1,
                    row.n()
                )));
            }
        }
        // m = n - j:  Σ_{i=0}^{j} P_i c_{j-i, n-i} = 1
        let mut p = Vec::with_capacity(n);
        for j in 0..n {
            let mut acc = 0.0;
            for (i, pi) in p.iter().enumerate() {
                acc += pi * rows[n - i - 1].c(j - i);
            }
            p.push((1.0 - acc) / rows[n - j - 1].c(0));
        }
        let kernel = Self { n, values: p };
        let (m, residual) = kernel.identity_residual(rows);
        if residual > IDENTITY_FAILURE {
            return Err(Error::KernelIdentity { n, m, residual });
        }
        Ok(kernel)
    }

    /// `P_j^{(n)}`
    pub fn p(&self, j: usize) -> f64 {
        self.values[j]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn sum(&self) -> f64 {
        self.values.iter().sum()
    }

    /// Worst `(m, |Σ_k P_{n-k} c_{k-m,k} - 1|)` over `1 <= m <= n`.
    pub fn identity_residual(&self, rows: &[CoeffRow]) -> (usize, f64) {
        let n = self.n;
        let mut worst = (1, 0.0);
        for m in 1..=n {
            let mut s = 0.0;
            for k in m..=n {
                s += self.values[n - k] * rows[k - 1].c(k - m);
            }
            let r = (s - 1.0).abs();
            if r > worst.1 {
                worst = (m, r);
            }
        }
        worst
    }
}

/// Kernel rows for every `n = 1..=rows.len()`.
pub fn all_kernel_rows(rows: &[CoeffRow]) -> Result<Vec<KernelRow>> {
    (1..=rows.len()).map(|n| KernelRow::compute(&rows[..n])).collect()
}
