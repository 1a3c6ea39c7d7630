//! Gauss-Legendre rules on [-1, 1] and the product rules on the unit
//! sphere built from them (Gauss in the polar cosine, uniform in azimuth).

use std::f64::consts::PI;

/// Nodes and weights of the `n`-point Gauss-Legendre rule on [-1, 1].
///
/// Newton iteration on the Legendre polynomial from the Chebyshev-like
/// initial guess; exact for polynomials of degree <= 2n - 1.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (p, dp) = legendre_with_derivative(n, x);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        let (_, dp) = legendre_with_derivative(n, x);
        nodes[n - 1 - i] = x;
        weights[n - 1 - i] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
    (nodes, weights)
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

/// Product quadrature on the unit sphere: `n_polar` Gauss nodes in
/// cos(theta) times `n_polar` uniform nodes in phi. Weights sum to 4 pi.
pub struct SphereRule {
    pub cos_theta: Vec<f64>,
    pub phi: Vec<f64>,
    /// Unit-sphere surface weights, one per (polar, azimuth) pair in
    /// row-major polar-outer order.
    pub weights: Vec<f64>,
}

impl SphereRule {
    pub fn new(n_polar: usize) -> Self {
        let (gl_nodes, gl_weights) = gauss_legendre(n_polar);
        let n_az = n_polar;
        let mut cos_theta = Vec::with_capacity(n_polar * n_az);
        let mut phi = Vec::with_capacity(n_polar * n_az);
        let mut weights = Vec::with_capacity(n_polar * n_az);
        let az_weight = 2.0 * PI / n_az as f64;
        for i in 0..n_polar {
            for j in 0..n_az {
                cos_theta.push(gl_nodes[i]);
                phi.push(2.0 * PI * j as f64 / n_az as f64);
                weights.push(gl_weights[i] * az_weight);
            }
        }
        SphereRule {
            cos_theta,
            phi,
            weights,
        }
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    /// Cartesian point on the sphere of radius `r` centered at `c`,
    /// for quadrature node `k`.
    pub fn point(&self, k: usize, c: [f64; 3], r: f64) -> [f64; 3] {
        let ct = self.cos_theta[k];
        let st = (1.0 - ct * ct).max(0.0).sqrt();
        let (sp, cp) = self.phi[k].sin_cos();
        [c[0] + r * st * cp, c[1] + r * st * sp, c[2] + r * ct]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn gauss_rule_integrates_monomials_exactly() {
        for n in [1usize, 2, 5, 10, 18] {
            let (x, w) = gauss_legendre(n);
            assert_relative_eq!(w.iter().sum::<f64>(), 2.0, max_relative = 1e-14);
            for k in (0..2 * n).step_by(2) {
                let quad: f64 = x.iter().zip(&w).map(|(xi, wi)| wi * xi.powi(k as i32)).sum();
                let exact = 2.0 / (k as f64 + 1.0);
                assert_relative_eq!(quad, exact, max_relative = 1e-12);
            }
        }
    }

    #[test]
    fn sphere_rule_is_orthonormal_for_the_harmonic_basis() {
        use crate::harmonics;
        let l_max = 8;
        let rule = SphereRule::new(2 * (l_max + 1));
        let nb = harmonics::basis_len(l_max);
        let mut gram = vec![0.0f64; nb * nb];
        let mut y = vec![0.0f64; nb];
        for k in 0..rule.len() {
            harmonics::eval_basis(l_max, rule.cos_theta[k], rule.phi[k], &mut y);
            let wk = rule.weights[k];
            for a in 0..nb {
                for b in a..nb {
                    gram[a * nb + b] += wk * y[a] * y[b];
                }
            }
        }
        for a in 0..nb {
            for b in a..nb {
                let expect = if a == b { 1.0 } else { 0.0 };
                assert!(
                    (gram[a * nb + b] - expect).abs() < 1e-12,
                    "gram[{a},{b}] = {}",
                    gram[a * nb + b]
                );
            }
        }
    }
}
