use crate::{Error, Result};

/// Graded temporal mesh `t_n = T (n/N)^r`.
#[derive(Debug, Clone, PartialEq)]
pub struct GradedMesh {
    final_time: f64,
    grading: f64,
    nodes: Vec<f64>,
    /// `steps[n-1] = τ_n`
    steps: Vec<f64>,
}

impl GradedMesh {
    pub fn new(final_time: f64, n_steps: usize, grading: f64) -> Result<Self> {
        if !(final_time > 0.0) || !final_time.is_finite() {
            return Err(Error::invalid(format!("final time T = {final_time} must be positive")));
        }
        if n_steps == 0 {
            return Err(Error::invalid("step count N must be at least 1"));
        }
        if !(grading >= 1.0) || !grading.is_finite() {
            return Err(Error::invalid(format!("grading exponent r = {grading} must satisfy r >= 1")));
        }
        let big_n = n_steps as f64;
        let nodes: Vec<f64> = (0..=n_steps)
            .map(|n| final_time * (n as f64 / big_n).powf(grading))
            .collect();
        let steps = nodes.windows(2).map(|w| w[1] - w[0]).collect();
        Ok(Self {
            final_time,
            grading,
            nodes,
            steps,
        })
    }

    pub fn uniform(final_time: f64, n_steps: usize) -> Result<Self> {
        Self::new(final_time, n_steps, 1.0)
    }

    /// `N`
    pub fn steps(&self) -> usize {
        self.steps.len()
    }

    pub fn final_time(&self) -> f64 {
        self.final_time
    }

    pub fn grading(&self) -> f64 {
        self.grading
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    /// `t_n`, `0 <= n <= N`.
    #[inline]
    pub fn node(&self, n: usize) -> f64 {
        self.nodes[n]
    }

    /// `τ_n = t_n - t_{n-1}`, `1 <= n <= N`.
    #[inline]
    pub fn tau(&self, n: usize) -> f64 {
        self.steps[n - 1]
    }

    /// `ρ_k = τ_k / τ_{k+1}`, `1 <= k <= N-1`.
    #[inline]
    pub fn rho(&self, k: usize) -> f64 {
        self.steps[k - 1] / self.steps[k]
    }

    pub fn ratios(&self) -> Vec<f64> {
        (1..self.steps()).map(|k| self.rho(k)).collect()
    }

    /// `t_{n-a} = a t_{n-1} + (1-a) t_n`.
    #[inline]
    pub fn offset_time(&self, n: usize, a: f64) -> f64 {
        a * self.nodes[n - 1] + (1.0 - a) * self.nodes[n]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uniform_nodes() {
        let m = GradedMesh::new(1.0, 4, 1.0).unwrap();
        assert_eq!(m.nodes(), &[0.0, 0.25, 0.5, 0.75, 1.0]);
    }

    #[test]
    fn quadratic_grading() {
        let m = GradedMesh::new(1.0, 4, 2.0).unwrap();
        assert_eq!(m.nodes(), &[0.0, 0.0625, 0.25, 0.5625, 1.0]);
        let expected = [1.0 / 3.0, 3.0 / 5.0, 5.0 / 7.0];
        for (r, e) in m.ratios().iter().zip(expected) {
            assert!((r - e).abs() < 1e-15);
        }
    }

    #[test]
    fn cubic_grading_longer_horizon() {
        let m = GradedMesh::new(2.0, 2, 3.0).unwrap();
        assert_eq!(m.nodes(), &[0.0, 0.25, 2.0]);
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(GradedMesh::new(1.0, 4, 0.5).is_err());
        assert!(GradedMesh::new(1.0, 0, 2.0).is_err());
        assert!(GradedMesh::new(0.0, 4, 2.0).is_err());
    }

    #[test]
    fn invariants_hold_for_many_gradings() {
        for &r in &[1.0, 1.5, 2.0, 3.0, 4.0, 7.5] {
            for &n in &[1usize, 2, 7, 64, 513] {
                let m = GradedMesh::new(1.3, n, r).unwrap();
                assert_eq!(m.node(0), 0.0);
                assert_eq!(m.node(n), 1.3);
                for i in 1..=n {
                    assert!(m.tau(i) > 0.0);
                }
                for k in 1..n {
                    assert!(m.rho(k) <= 1.0 + 1e-12, "r={r} n={n} k={k} rho={}", m.rho(k));
                }
            }
        }
    }
}
