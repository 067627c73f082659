//! Quadrature on the reference triangle `(0,0), (1,0), (0,1)` and on `[-1, 1]`.

use crate::{Error, Result};

/// Points and weights on the reference triangle; weights sum to its area 1/2.
#[derive(Debug, Clone, PartialEq)]
pub struct TriangleRule {
    degree: usize,
    points: Vec<[f64; 2]>,
    weights: Vec<f64>,
}

const D4_A: f64 = 0.44594849091596488632;
const D4_WA: f64 = 0.22338158967801146570;
const D4_B: f64 = 0.09157621350977074346;
const D4_WB: f64 = 0.10995174365532186764;

const D6_A: f64 = 0.24928674517091042129;
const D6_WA: f64 = 0.11678627572637936603;
const D6_B: f64 = 0.06308901449150222834;
const D6_WB: f64 = 0.05084490637020681692;
const D6_C1: f64 = 0.31035245103378440542;
const D6_C2: f64 = 0.05314504984481694735;
const D6_WC: f64 = 0.08285107561837357519;

impl TriangleRule {
    /// Smallest built-in rule exact for polynomials of total degree `degree`:
    /// symmetric Dunavant rules up to degree 6, collapsed Gauss-Legendre
    /// products above.
    pub fn with_degree(degree: usize) -> Self {
        let mut rule = Self {
            degree,
            points: Vec::new(),
            weights: Vec::new(),
        };
        match degree {
            0 | 1 => rule.push_orbit3(1.0 / 3.0, 1.0),
            2 => rule.push_orbit3(1.0 / 6.0, 1.0 / 3.0),
            3 | 4 => {
                rule.push_orbit3(D4_A, D4_WA);
                rule.push_orbit3(D4_B, D4_WB);
            }
            5 | 6 => {
                rule.push_orbit3(D6_A, D6_WA);
                rule.push_orbit3(D6_B, D6_WB);
                let c3 = 1.0 - D6_C1 - D6_C2;
                for &(l1, l2) in &[
                    (D6_C1, D6_C2),
                    (D6_C2, D6_C1),
                    (D6_C1, c3),
                    (c3, D6_C1),
                    (D6_C2, c3),
                    (c3, D6_C2),
                ] {
                    rule.points.push([l1, l2]);
                    rule.weights.push(0.5 * D6_WC);
                }
            }
            _ => {
                // Duffy collapse of the square: ξ = u, η = v(1 - u)
                let m = degree / 2 + 1;
                let (x, w) = gauss_legendre(m + 1);
                let (y, wy) = gauss_legendre(m);
                for (xi, wi) in x.iter().zip(&w) {
                    let u = 0.5 * (xi + 1.0);
                    for (yj, wj) in y.iter().zip(&wy) {
                        let v = 0.5 * (yj + 1.0);
                        rule.points.push([u, v * (1.0 - u)]);
                        rule.weights.push(0.25 * wi * wj * (1.0 - u));
                    }
                }
            }
        }
        rule.degree = rule.degree.max(1);
        rule
    }

    /// Pushes a symmetric orbit; `w` is normalized to unit area. The centroid
    /// (`a = 1/3`) is a single point.
    fn push_orbit3(&mut self, a: f64, w: f64) {
        if a == 1.0 / 3.0 {
            self.points.push([a, a]);
            self.weights.push(0.5 * w);
            return;
        }
        let b = 1.0 - 2.0 * a;
        for p in [[a, a], [b, a], [a, b]] {
            self.points.push(p);
            self.weights.push(0.5 * w);
        }
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn points(&self) -> &[[f64; 2]] {
        &self.points
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn integrate(&self, f: impl Fn(f64, f64) -> f64) -> f64 {
        self.points
            .iter()
            .zip(&self.weights)
            .map(|(p, w)| w * f(p[0], p[1]))
            .sum()
    }
}

/// Gauss-Legendre nodes and weights on `[-1, 1]` by Newton iteration on `P_m`.
pub fn gauss_legendre(m: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; m];
    let mut w = vec![0.0; m];
    let mf = m as f64;
    for i in 0..(m + 1) / 2 {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (mf + 0.5)).cos();
        for _ in 0..100 {
            let (p, d) = legendre(m, z);
            let dz = p / d;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        let dp = legendre(m, z).1;
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        x[i] = -z;
        x[m - 1 - i] = z;
        w[i] = wi;
        w[m - 1 - i] = wi;
    }
    (x, w)
}

/// `(P_m(z), P_m'(z))`
fn legendre(m: usize, z: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = z;
    if m == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=m {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * z * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = m as f64 * (z * p1 - p0) / (z * z - 1.0);
    (p1, d)
}

/// Gauss-Legendre on `[a, b]` with `m` points.
pub fn integrate_interval(f: impl Fn(f64) -> f64, a: f64, b: f64, m: usize) -> f64 {
    let (x, w) = gauss_legendre(m);
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    x.iter().zip(&w).map(|(xi, wi)| wi * f(mid + half * xi)).sum::<f64>() * half
}

pub(crate) fn check_degree(degree: usize, needed: usize, what: &str) -> Result<()> {
    if degree < needed {
        return Err(Error::InvalidParameter(format!(
            "{what} needs a quadrature of degree >= {needed}, got {degree}"
        )));
    }
    Ok(())
}
