//! Block Neumann expansion of the single-layer inverse for a chain plus
//! one small defect sphere: the back-and-forth scattering operators, the
//! even-truncated partial inverses, the per-order families of the
//! perturbed capacitance matrix, and a truncation-error report.
//!
//! With S the two-block single-layer matrix [[S_D, B], [B^T, S_O]], the
//! inverse expands in the operators T_D = S_D^-1 B S_O^-1 B^T (chain
//! side) and T_O = S_O^-1 B^T S_D^-1 B (defect side); each extra summand
//! damps the error by roughly the sphere-to-gap ratio, so the series
//! converges fast for a small, well-separated defect.

use crate::bie::{self, AssemblyError, BoundaryOperator};
use nalgebra::{DMatrix, DVector};
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ExpansionError {
    #[error("scattering expansion diverges: spectral radius {rho:.6}")]
    Diverges { rho: f64 },
    #[error(transparent)]
    Assembly(#[from] AssemblyError),
}

/// Scattering data of one chain-plus-defect configuration, with the
/// chain factorization shared from its [`BoundaryOperator`].
pub struct Expansion {
    /// Chain-side round trip S_D^-1 B S_O^-1 B^T.
    t_d: DMatrix<f64>,
    /// Defect-side round trip S_O^-1 B^T S_D^-1 B.
    t_o: DMatrix<f64>,
    /// S_D^-1 B.
    v0: DMatrix<f64>,
    /// S_D^-1 X_D.
    u: DMatrix<f64>,
    coupling: DMatrix<f64>,
    so_diag: Vec<f64>,
    /// Defect load: sqrt(4 pi) r in the monopole slot.
    chi: DVector<f64>,
    x_d: DMatrix<f64>,
    chain_matrix: DMatrix<f64>,
    n_chain: usize,
    defect_gap: f64,
    defect_radius: f64,
}

impl Expansion {
    pub fn new(
        op: &BoundaryOperator,
        center: [f64; 3],
        radius: f64,
    ) -> Result<Self, ExpansionError> {
        let nb = op.res.basis_len();
        let coupling = op.coupling_to(center, radius);
        let v0 = op.solve(&coupling);
        let so_diag = bie::self_block_diagonal(radius, op.res);
        let so_inv_bt_v = |m: &DMatrix<f64>| -> DMatrix<f64> {
            let mut out = coupling.transpose() * m;
            for (i, d) in so_diag.iter().enumerate() {
                for j in 0..out.ncols() {
                    out[(i, j)] /= d;
                }
            }
            out
        };
        // B S_O^-1 B^T, then one chain solve
        let mut b_so_bt = DMatrix::zeros(op.dim(), op.dim());
        for (i, d) in so_diag.iter().enumerate() {
            let col = coupling.column(i);
            let scaled = col / *d;
            b_so_bt += scaled * col.transpose();
        }
        let t_d = op.solve(&b_so_bt);
        let t_o = so_inv_bt_v(&v0);
        let u = op.solve(&op.loads);
        let mut chi = DVector::zeros(nb);
        chi[0] = (4.0 * std::f64::consts::PI).sqrt() * radius;
        let defect_gap = op
            .bodies()
            .iter()
            .map(|&(c, r)| crate::geometry::distance(c, center) - r - radius)
            .fold(f64::INFINITY, f64::min);
        Ok(Expansion {
            t_d,
            t_o,
            v0,
            u,
            coupling,
            so_diag,
            chi,
            x_d: op.loads.clone(),
            chain_matrix: op.matrix.clone(),
            n_chain: op.n_bodies(),
            defect_gap,
            defect_radius: radius,
        })
    }

    /// Largest eigenvalue magnitude of the chain-side round trip by power
    /// iteration (the defect side shares its nonzero spectrum).
    pub fn spectral_radius(&self) -> f64 {
        let n = self.t_d.nrows();
        let mut v = DVector::from_element(n, 1.0 / (n as f64).sqrt());
        let mut rho = 0.0;
        for _ in 0..50 {
            let w = &self.t_d * &v;
            let next = w.norm();
            if next == 0.0 {
                return 0.0;
            }
            v = w / next;
            if (next - rho).abs() <= 1e-6 * next {
                return next;
            }
            rho = next;
        }
        rho
    }

    /// Guard used by every series consumer: the round trip must be a
    /// contraction for the expansion to mean anything.
    pub fn check_convergent(&self) -> Result<f64, ExpansionError> {
        let rho = self.spectral_radius();
        if rho >= 1.0 {
            return Err(ExpansionError::Diverges { rho });
        }
        Ok(rho)
    }

    fn so_inv(&self, v: &DVector<f64>) -> DVector<f64> {
        DVector::from_fn(v.len(), |i, _| v[i] / self.so_diag[i])
    }

    /// Chain-chain series term X_D^T T_D^k S_D^-1 X_D; k = 0 is the
    /// unperturbed chain capacitance, and the term carries total
    /// scattering order 2k.
    pub fn chain_term(&self, k: usize) -> DMatrix<f64> {
        let mut w = self.u.clone();
        for _ in 0..k {
            w = &self.t_d * w;
        }
        self.x_d.transpose() * w
    }

    /// Mixed series term -X_D^T T_D^k S_D^-1 B S_O^-1 chi, a chain-sized
    /// column at total scattering order 2k + 1.
    pub fn mixed_term(&self, k: usize) -> DVector<f64> {
        let mut w = &self.v0 * self.so_inv(&self.chi);
        for _ in 0..k {
            w = &self.t_d * w;
        }
        -(self.x_d.transpose() * w)
    }

    /// Defect-defect series term chi^T T_O^k S_O^-1 chi at total
    /// scattering order 2k; k = 0 gives the isolated-defect capacitance
    /// 4 pi r.
    pub fn defect_term(&self, k: usize) -> f64 {
        let mut w = self.so_inv(&self.chi);
        for _ in 0..k {
            w = &self.t_o * w;
        }
        self.chi.dot(&w)
    }

    /// Perturbed capacitance accumulated through total scattering order
    /// `n_max`, chain rows first, defect row last.
    pub fn cumulative(&self, n_max: usize) -> DMatrix<f64> {
        let n = self.n_chain;
        let mut ct = DMatrix::zeros(n + 1, n + 1);
        for k in 0..=(n_max / 2) {
            let mut chain_block = ct.view_mut((0, 0), (n, n));
            chain_block += self.chain_term(k);
            ct[(n, n)] += self.defect_term(k);
        }
        for k in 0..(n_max + 1) / 2 {
            let m = self.mixed_term(k);
            for p in 0..n {
                ct[(p, n)] += m[p];
                ct[(n, p)] += m[p];
            }
        }
        ct
    }

    /// The three leading correction blocks beyond blockdiag(C, 4 pi r):
    /// chain-chain and mixed corrections linear in the defect radius, and
    /// the quadratic defect-defect correction, arranged as one
    /// (n+1) x (n+1) matrix.
    pub fn leading_corrections(&self) -> DMatrix<f64> {
        let n = self.n_chain;
        let mut e = DMatrix::zeros(n + 1, n + 1);
        e.view_mut((0, 0), (n, n)).copy_from(&self.chain_term(1));
        let m = self.mixed_term(0);
        for p in 0..n {
            e[(p, n)] = m[p];
            e[(n, p)] = m[p];
        }
        e[(n, n)] = self.defect_term(1);
        e
    }

    fn full_matrix(&self) -> DMatrix<f64> {
        let nd = self.t_d.nrows();
        let nb = self.so_diag.len();
        let mut s = DMatrix::zeros(nd + nb, nd + nb);
        s.view_mut((0, 0), (nd, nd)).copy_from(&self.chain_matrix);
        s.view_mut((0, nd), (nd, nb)).copy_from(&self.coupling);
        s.view_mut((nd, 0), (nb, nd))
            .copy_from(&self.coupling.transpose());
        for (i, d) in self.so_diag.iter().enumerate() {
            s[(nd + i, nd + i)] = *d;
        }
        s
    }

    /// Dense inverse of the joint single-layer matrix, the reference the
    /// partial sums converge to.
    pub fn full_inverse(&self) -> Result<DMatrix<f64>, ExpansionError> {
        let s = self.full_matrix();
        let n = s.nrows();
        nalgebra::Cholesky::new(s)
            .map(|ch| ch.solve(&DMatrix::identity(n, n)))
            .ok_or(ExpansionError::Assembly(AssemblyError::NotPositiveDefinite))
    }

    /// Even-truncated partial inverse with 2K summands, in closed block
    /// form: geometric partial sums of the round trips wrap the
    /// block-diagonal inverse and the one-hop couplings.
    pub fn partial_inverse(&self, big_k: usize) -> DMatrix<f64> {
        let nd = self.t_d.nrows();
        let nb = self.so_diag.len();
        // A_K = sum_{k<K} T_D^k and the same on the defect side
        let mut a_sum = DMatrix::identity(nd, nd);
        let mut power = DMatrix::identity(nd, nd);
        for _ in 1..big_k {
            power = &self.t_d * &power;
            a_sum += &power;
        }
        let mut b_sum = DMatrix::identity(nb, nb);
        let mut power_o = DMatrix::identity(nb, nb);
        for _ in 1..big_k {
            power_o = &self.t_o * &power_o;
            b_sum += &power_o;
        }
        if big_k == 0 {
            a_sum.fill(0.0);
            b_sum.fill(0.0);
        }

        // S_D^-1 applied through the chain solve; S_O^-1 is diagonal
        let chain_inv = {
            let s = &self.chain_matrix;
            nalgebra::Cholesky::new(s.clone())
                .expect("chain factorization already succeeded")
                .solve(&DMatrix::identity(nd, nd))
        };
        let so_inv_mat =
            DMatrix::from_fn(nb, nb, |i, j| if i == j { 1.0 / self.so_diag[i] } else { 0.0 });

        let top_left = &a_sum * &chain_inv;
        let top_right = -(&a_sum * &self.v0 * &so_inv_mat);
        let bottom_right = &b_sum * &so_inv_mat;
        let bottom_left = -(&b_sum * so_inv_mat * self.coupling.transpose() * &chain_inv);

        let mut p = DMatrix::zeros(nd + nb, nd + nb);
        p.view_mut((0, 0), (nd, nd)).copy_from(&top_left);
        p.view_mut((0, nd), (nd, nb)).copy_from(&top_right);
        p.view_mut((nd, 0), (nb, nd)).copy_from(&bottom_left);
        p.view_mut((nd, nd), (nb, nb)).copy_from(&bottom_right);
        p
    }

    /// Truncation study: spectral-norm errors of the partial inverses
    /// against the dense inverse, their per-step ratios, the fitted
    /// per-summand damping (square root of the per-step ratio, since one
    /// step adds two summands), and the geometric size-over-gap ratio it
    /// should track.
    pub fn truncation_report(&self, ks: &[usize]) -> Result<TruncationReport, ExpansionError> {
        let rho = self.check_convergent()?;
        let reference = self.full_inverse()?;
        let errors: Vec<f64> = ks
            .iter()
            .map(|&k| {
                let diff = &reference - self.partial_inverse(k);
                diff.svd(false, false).singular_values[0]
            })
            .collect();
        let mut ratios = Vec::new();
        for w in errors.windows(2) {
            ratios.push(w[1] / w[0]);
        }
        let per_summand = if ratios.is_empty() {
            f64::NAN
        } else {
            let log_mean =
                ratios.iter().map(|r| r.ln()).sum::<f64>() / ratios.len() as f64;
            (log_mean.exp()).sqrt()
        };
        let geometric_ratio =
            (4.0 * std::f64::consts::PI).sqrt() * self.defect_radius / self.defect_gap;
        Ok(TruncationReport {
            orders: ks.to_vec(),
            errors,
            ratios,
            per_summand_ratio: per_summand,
            geometric_ratio,
            spectral_radius: rho,
        })
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct TruncationReport {
    /// Truncation levels K (the partial inverse holds 2K summands).
    pub orders: Vec<usize>,
    /// Spectral-norm distances to the dense inverse.
    pub errors: Vec<f64>,
    /// Successive error ratios.
    pub ratios: Vec<f64>,
    /// Fitted damping per summand.
    pub per_summand_ratio: f64,
    /// sqrt(4 pi) r over the smallest chain-defect surface gap.
    pub geometric_ratio: f64,
    pub spectral_radius: f64,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bie::Resolution;
    use crate::capacitance::{self, DefectSolver};
    use approx::assert_relative_eq;

    fn chain_op(l_max: usize) -> BoundaryOperator {
        BoundaryOperator::new(
            &[
                ([0.0, 0.0, 0.0], 1.0 / 3.0),
                ([1.0, 0.0, 0.0], 1.0 / 3.0),
                ([2.0, 0.0, 0.0], 1.0 / 3.0),
            ],
            Resolution::new(l_max),
        )
        .unwrap()
    }

    #[test]
    fn zeroth_terms_are_the_uncoupled_capacitances() {
        let op = chain_op(3);
        let exp = Expansion::new(&op, [3.0, 0.0, 0.0], 1e-2).unwrap();
        let c = capacitance::capacitance_of(&op);
        assert_relative_eq!((exp.chain_term(0) - c).norm(), 0.0, epsilon = 1e-13);
        assert_relative_eq!(
            exp.defect_term(0),
            4.0 * std::f64::consts::PI * 1e-2,
            max_relative = 1e-13
        );
    }

    #[test]
    fn round_trip_is_a_tight_contraction_for_a_small_defect() {
        let op = chain_op(4);
        let exp = Expansion::new(&op, [3.0, 0.0, 0.0], 1e-2).unwrap();
        let rho = exp.check_convergent().unwrap();
        assert!(rho < 0.01, "rho = {rho}");
    }

    #[test]
    fn cumulative_series_recovers_the_direct_capacitance() {
        let op = chain_op(4);
        let exp = Expansion::new(&op, [3.0, 0.0, 0.0], 1e-2).unwrap();
        let solver = DefectSolver::new(chain_op(4));
        let direct = solver.perturbed_capacitance([3.0, 0.0, 0.0], 1e-2).unwrap();
        let series = exp.cumulative(12);
        assert_relative_eq!((series - &direct).norm(), 0.0, epsilon = 1e-12 * direct.norm());
    }

    #[test]
    fn partial_inverses_converge_geometrically() {
        let op = chain_op(3);
        let exp = Expansion::new(&op, [3.0, 0.0, 0.0], 1e-2).unwrap();
        let report = exp.truncation_report(&[1, 2, 3, 4]).unwrap();
        for w in report.errors.windows(2) {
            assert!(w[1] < w[0] * 0.05, "errors not decreasing fast: {:?}", report.errors);
        }
        // damping per summand should track the size-over-gap scale
        let ratio = report.per_summand_ratio / report.geometric_ratio;
        assert!(ratio > 0.3 && ratio < 3.0, "per-summand {} vs geometric {}",
            report.per_summand_ratio, report.geometric_ratio);
    }

    #[test]
    fn leading_corrections_match_their_series_terms() {
        let op = chain_op(3);
        let exp = Expansion::new(&op, [2.9, 0.2, 0.0], 5e-3).unwrap();
        let e = exp.leading_corrections();
        let dd1 = exp.chain_term(1);
        let m0 = exp.mixed_term(0);
        assert_relative_eq!((e.view((0, 0), (3, 3)) - dd1).norm(), 0.0, epsilon = 1e-15);
        for p in 0..3 {
            assert_relative_eq!(e[(p, 3)], m0[p], epsilon = 1e-15);
        }
        assert_relative_eq!(e[(3, 3)], exp.defect_term(1), epsilon = 1e-15);
    }
}
