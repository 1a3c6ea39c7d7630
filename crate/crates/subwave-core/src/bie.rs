//! Galerkin discretization of the Laplace single-layer operator on a
//! union of disjoint spheres, in the per-body real spherical-harmonic
//! basis b_nm(x) = Y_nm((x - c)/r) / r.
//!
//! Same-sphere blocks are exactly diagonal with entries r / (2n + 1);
//! cross-sphere blocks are smooth and integrate accurately with a
//! product Gauss rule on each sphere.

use crate::geometry::distance;
use crate::harmonics;
use crate::quadrature::SphereRule;
use nalgebra::{Cholesky, DMatrix, Dyn};
use thiserror::Error;

/// Resolution of the discretization: maximum harmonic degree and the
/// number of polar quadrature nodes per sphere (azimuthal count equal).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Resolution {
    pub l_max: usize,
    pub n_polar: usize,
}

impl Resolution {
    /// Default rule: twice (l_max + 1) polar nodes, enough to make the
    /// per-sphere mass matrix exactly the identity and the cross blocks
    /// accurate to discretization error.
    pub fn new(l_max: usize) -> Self {
        Resolution {
            l_max,
            n_polar: 2 * (l_max + 1),
        }
    }

    pub fn basis_len(&self) -> usize {
        harmonics::basis_len(self.l_max)
    }
}

#[derive(Debug, Error)]
pub enum AssemblyError {
    #[error("single-layer matrix is not positive definite (bodies too close to touching?)")]
    NotPositiveDefinite,
}

/// Quadrature trace of one sphere: node positions and the matrix taking
/// nodal values to weighted-basis coefficients.
pub(crate) struct BodyNodes {
    pub points: Vec<[f64; 3]>,
    /// nb x n_nodes; entry (b, k) = Y_b(node k) / r * w_k * r^2, so that
    /// `phi_w * f(nodes)` integrates basis-against-f over the sphere.
    pub phi_w: DMatrix<f64>,
}

pub(crate) fn body_nodes(center: [f64; 3], radius: f64, res: Resolution) -> BodyNodes {
    let rule = SphereRule::new(res.n_polar);
    let nb = res.basis_len();
    let n = rule.len();
    let mut points = Vec::with_capacity(n);
    let mut phi_w = DMatrix::zeros(nb, n);
    let mut y = vec![0.0; nb];
    for k in 0..n {
        points.push(rule.point(k, center, radius));
        harmonics::eval_basis(res.l_max, rule.cos_theta[k], rule.phi[k], &mut y);
        let scale = rule.weights[k] * radius; // r^2 surface Jacobian over the 1/r basis scale
        for b in 0..nb {
            phi_w[(b, k)] = y[b] * scale;
        }
    }
    BodyNodes { points, phi_w }
}

/// Weighted double-sum of the free-space kernel 1 / (4 pi |x - y|)
/// between the node sets of two distinct spheres: the (nb x nb)
/// cross block of the single-layer matrix.
pub(crate) fn cross_block(a: &BodyNodes, b: &BodyNodes) -> DMatrix<f64> {
    let kernel = DMatrix::from_fn(a.points.len(), b.points.len(), |i, j| {
        1.0 / (4.0 * std::f64::consts::PI * distance(a.points[i], b.points[j]))
    });
    &a.phi_w * kernel * b.phi_w.transpose()
}

/// Exact same-sphere block: diagonal r / (2n + 1).
pub(crate) fn self_block_diagonal(radius: f64, res: Resolution) -> Vec<f64> {
    (0..res.basis_len())
        .map(|idx| radius / (2 * harmonics::degree_of(idx) + 1) as f64)
        .collect()
}

/// Assemble the full Galerkin single-layer matrix for the given spheres.
pub fn assemble(bodies: &[([f64; 3], f64)], res: Resolution) -> DMatrix<f64> {
    let nb = res.basis_len();
    let n = bodies.len() * nb;
    let nodes: Vec<BodyNodes> = bodies
        .iter()
        .map(|&(c, r)| body_nodes(c, r, res))
        .collect();
    let mut s = DMatrix::zeros(n, n);
    for p in 0..bodies.len() {
        for (idx, v) in self_block_diagonal(bodies[p].1, res).into_iter().enumerate() {
            s[(p * nb + idx, p * nb + idx)] = v;
        }
        for o in (p + 1)..bodies.len() {
            let block = cross_block(&nodes[p], &nodes[o]);
            s.view_mut((p * nb, o * nb), (nb, nb)).copy_from(&block);
            s.view_mut((o * nb, p * nb), (nb, nb))
                .copy_from(&block.transpose());
        }
    }
    s
}

/// Columns of constant unit density against the basis: sqrt(4 pi) r in
/// each body's monopole row, one column per body.
pub fn loads(bodies: &[([f64; 3], f64)], res: Resolution) -> DMatrix<f64> {
    let nb = res.basis_len();
    let mut x = DMatrix::zeros(bodies.len() * nb, bodies.len());
    for (p, &(_, r)) in bodies.iter().enumerate() {
        x[(p * nb, p)] = (4.0 * std::f64::consts::PI).sqrt() * r;
    }
    x
}

/// Factored single-layer operator of a fixed body collection, with the
/// node tables retained so couplings to later-added spheres reuse the
/// factorization.
pub struct BoundaryOperator {
    pub res: Resolution,
    bodies: Vec<([f64; 3], f64)>,
    pub matrix: DMatrix<f64>,
    cholesky: Cholesky<f64, Dyn>,
    nodes: Vec<BodyNodes>,
    pub loads: DMatrix<f64>,
}

impl BoundaryOperator {
    pub fn new(bodies: &[([f64; 3], f64)], res: Resolution) -> Result<Self, AssemblyError> {
        let matrix = assemble(bodies, res);
        let cholesky =
            Cholesky::new(matrix.clone()).ok_or(AssemblyError::NotPositiveDefinite)?;
        let nodes = bodies
            .iter()
            .map(|&(c, r)| body_nodes(c, r, res))
            .collect();
        let loads = loads(bodies, res);
        Ok(BoundaryOperator {
            res,
            bodies: bodies.to_vec(),
            matrix,
            cholesky,
            nodes,
            loads,
        })
    }

    pub fn n_bodies(&self) -> usize {
        self.bodies.len()
    }

    pub fn bodies(&self) -> &[([f64; 3], f64)] {
        &self.bodies
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn solve(&self, rhs: &DMatrix<f64>) -> DMatrix<f64> {
        self.cholesky.solve(rhs)
    }

    /// Coupling block S[bodies, extra] against a sphere not in the
    /// collection, stacked over the collection's rows.
    pub fn coupling_to(&self, center: [f64; 3], radius: f64) -> DMatrix<f64> {
        let nb = self.res.basis_len();
        let extra = body_nodes(center, radius, self.res);
        let mut s = DMatrix::zeros(self.dim(), nb);
        for p in 0..self.bodies.len() {
            let block = cross_block(&self.nodes[p], &extra);
            s.view_mut((p * nb, 0), (nb, nb)).copy_from(&block);
        }
        s
    }
}
