//! Capacitance matrices of sphere collections, the material-weighted
//! eigenvalue problem whose square-root eigenvalues are the subwavelength
//! resonances, and a cached Schur-complement path that re-solves a fixed
//! chain against many candidate defect spheres.

use crate::bie::{self, AssemblyError, BoundaryOperator, Resolution};
use crate::geometry::Scene;
use crate::spectral;
use nalgebra::{Cholesky, DMatrix};
use num_complex::Complex64;
use std::f64::consts::PI;

/// Capacitance matrix C[p, o] = loads^T S^{-1} loads of the given spheres:
/// symmetric, positive definite, diagonally dominant with negative
/// off-diagonal entries.
pub fn capacitance(bodies: &[([f64; 3], f64)], res: Resolution) -> Result<DMatrix<f64>, AssemblyError> {
    let op = BoundaryOperator::new(bodies, res)?;
    Ok(capacitance_of(&op))
}

pub fn capacitance_of(op: &BoundaryOperator) -> DMatrix<f64> {
    op.loads.transpose() * op.solve(&op.loads)
}

/// Bodies of a scene as (center, radius) pairs, defect included when present.
pub fn scene_bodies(scene: &Scene) -> Vec<([f64; 3], f64)> {
    scene.bodies().iter().map(|b| (b.center, b.radius)).collect()
}

/// Material weights delta v^2 / |volume| for every body of the scene,
/// defect last when present.
pub fn material_weights(scene: &Scene) -> Vec<Complex64> {
    scene.bodies().iter().map(|b| b.weight()).collect()
}

/// Row-weighted matrix diag(w) C driving the resonance problem.
pub fn weighted(c: &DMatrix<f64>, weights: &[Complex64]) -> DMatrix<Complex64> {
    assert_eq!(c.nrows(), weights.len());
    DMatrix::from_fn(c.nrows(), c.ncols(), |i, j| weights[i] * c[(i, j)])
}

/// Subwavelength resonances: principal square roots of the eigenvalues of
/// the weighted capacitance matrix, sorted by real part.
pub fn resonances(weighted: &DMatrix<Complex64>) -> Vec<Complex64> {
    let mut omegas: Vec<Complex64> = spectral::eigenvalues(weighted)
        .into_iter()
        .map(|l| l.sqrt())
        .collect();
    omegas.sort_by(|a, b| {
        a.re.partial_cmp(&b.re)
            .unwrap()
            .then(a.im.partial_cmp(&b.im).unwrap())
    });
    omegas
}

/// Fixed chain with its single-layer factorization retained, answering
/// perturbed-capacitance queries for defect spheres by a Schur complement
/// on the defect block instead of refactoring the union.
pub struct DefectSolver {
    pub op: BoundaryOperator,
    /// S^{-1} X for the chain, reused by every query.
    u: DMatrix<f64>,
    pub base_capacitance: DMatrix<f64>,
}

impl DefectSolver {
    pub fn new(op: BoundaryOperator) -> Self {
        let u = op.solve(&op.loads);
        let base_capacitance = op.loads.transpose() * &u;
        DefectSolver {
            op,
            u,
            base_capacitance,
        }
    }

    pub fn from_bodies(bodies: &[([f64; 3], f64)], res: Resolution) -> Result<Self, AssemblyError> {
        Ok(DefectSolver::new(BoundaryOperator::new(bodies, res)?))
    }

    /// Capacitance matrix of chain plus one defect sphere, chain rows
    /// first. Equal to assembling the union directly, up to rounding.
    pub fn perturbed_capacitance(
        &self,
        center: [f64; 3],
        radius: f64,
    ) -> Result<DMatrix<f64>, AssemblyError> {
        let n = self.op.n_bodies();
        let nb = self.op.res.basis_len();
        let b = self.op.coupling_to(center, radius);
        let v0 = self.op.solve(&b);
        let mut schur = DMatrix::from_fn(nb, nb, |i, j| -(b.column(i).dot(&v0.column(j))));
        for (idx, d) in bie::self_block_diagonal(radius, self.op.res)
            .into_iter()
            .enumerate()
        {
            schur[(idx, idx)] += d;
        }
        let schur = Cholesky::new(schur).ok_or(AssemblyError::NotPositiveDefinite)?;

        let g = b.transpose() * &self.u; // nb x n
        let v = schur.solve(&g);
        let mut z = DMatrix::zeros(nb, 1);
        z[(0, 0)] = (4.0 * PI).sqrt() * radius;
        let v3 = schur.solve(&z);

        let mut ct = DMatrix::zeros(n + 1, n + 1);
        ct.view_mut((0, 0), (n, n))
            .copy_from(&(&self.base_capacitance + g.transpose() * &v));
        for p in 0..n {
            let coupling = -z.column(0).dot(&v.column(p));
            ct[(n, p)] = coupling;
            ct[(p, n)] = coupling;
        }
        ct[(n, n)] = z.column(0).dot(&v3.column(0));
        Ok(ct)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn isolated_sphere_capacitance_is_four_pi_r() {
        for r in [1.0 / 3.0, 1.0, 2.0] {
            for l_max in [0, 2, 5] {
                let c = capacitance(&[([0.3, -0.2, 0.9], r)], Resolution::new(l_max)).unwrap();
                assert_relative_eq!(c[(0, 0)], 4.0 * PI * r, max_relative = 1e-13);
            }
        }
    }

    #[test]
    fn capacitance_scales_linearly_under_dilation() {
        let res = Resolution::new(4);
        let bodies = [
            ([0.0, 0.0, 0.0], 1.0 / 3.0),
            ([1.0, 0.0, 0.0], 1.0 / 3.0),
            ([2.0, 0.0, 0.0], 1.0 / 3.0),
        ];
        let scaled: Vec<_> = bodies
            .iter()
            .map(|&(c, r)| ([2.0 * c[0], 2.0 * c[1], 2.0 * c[2]], 2.0 * r))
            .collect();
        let c1 = capacitance(&bodies, res).unwrap();
        let c2 = capacitance(&scaled, res).unwrap();
        assert_relative_eq!((&c2 - 2.0 * &c1).norm(), 0.0, epsilon = 1e-10 * c1.norm());
    }

    #[test]
    fn schur_path_matches_direct_union_assembly() {
        let res = Resolution::new(4);
        let chain = [
            ([0.0, 0.0, 0.0], 1.0 / 3.0),
            ([1.0, 0.0, 0.0], 1.0 / 3.0),
            ([2.0, 0.0, 0.0], 1.0 / 3.0),
        ];
        let defect = ([2.8, 0.4, 0.1], 0.05);
        let solver = DefectSolver::from_bodies(&chain, res).unwrap();
        let fast = solver.perturbed_capacitance(defect.0, defect.1).unwrap();
        let direct = capacitance(&[chain[0], chain[1], chain[2], defect], res).unwrap();
        assert_relative_eq!((&fast - &direct).norm(), 0.0, epsilon = 1e-11 * direct.norm());
    }

    #[test]
    fn chain_capacitance_is_symmetric_and_reflection_invariant() {
        let res = Resolution::new(4);
        let scene = Scene::chain(1.0 / 3.0, 1e-3);
        let c = capacitance(&scene_bodies(&scene), res).unwrap();
        assert_relative_eq!((&c - c.transpose()).norm(), 0.0, epsilon = 1e-12);
        // end bodies are exchangeable under the x -> 2 - x reflection
        assert_relative_eq!(c[(0, 0)], c[(2, 2)], max_relative = 1e-12);
        assert_relative_eq!(c[(0, 1)], c[(1, 2)], max_relative = 1e-12);
        assert!(c[(0, 1)] < 0.0 && c[(0, 2)] < 0.0);
    }
}
