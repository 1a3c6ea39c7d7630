//! Eigenstructure of the (complex, non-symmetric) weighted capacitance
//! matrices: balanced dense eigensolves, first-order perturbation of
//! simple eigenvalues, Jordan chains at defective eigenvalues, the
//! square-root branch expansion at an exceptional point, and a search
//! for gain/loss profiles that close an eigenvalue gap.

use faer::complex_native::c64;
use faer::Mat;
use nalgebra::{DMatrix, DVector, RowDVector};
use num_complex::Complex64;
use thiserror::Error;

/// Below this left-right eigenvector alignment a simple-eigenvalue
/// expansion is refused: the eigenvalue is effectively defective and the
/// square-root branch expansion applies instead.
pub const CONDITION_FLOOR: f64 = 1e-6;

/// Alignment threshold under which a clustered eigenvalue pair counts as
/// defective rather than semisimple.
pub const DEFECTIVE_ALIGNMENT: f64 = 1e-4;

#[derive(Debug, Error)]
pub enum SpectralError {
    #[error("eigenvector matrix is numerically singular")]
    DegenerateEigenbasis,
    #[error(
        "eigenvalue {index} has left-right alignment {alignment:.3e} below {CONDITION_FLOOR:.0e}; \
         use the defective-eigenvalue expansion"
    )]
    IllConditioned { index: usize, alignment: f64 },
    #[error("eigenvalue is not defective of order {order}: {reason}")]
    NotDefective { order: usize, reason: String },
    #[error("chain normalization is singular (left/right chains decouple)")]
    NormalizationSingular,
    #[error("gap search did not reach a defective pair: best gap {gap:.3e} at parameter {t}")]
    NoCoalescence { t: f64, gap: f64 },
}

fn to_faer(a: &DMatrix<Complex64>) -> Mat<c64> {
    Mat::<c64>::from_fn(a.nrows(), a.ncols(), |i, j| {
        let z = a[(i, j)];
        c64::new(z.re, z.im)
    })
}

/// Osborne balancing with power-of-two scales: returns d such that
/// diag(d)^-1 A diag(d) has nearly equal row and column norms. Exact in
/// floating point, so it never perturbs the spectrum.
fn balance_scales(a: &DMatrix<Complex64>) -> Vec<f64> {
    let n = a.nrows();
    let mut d = vec![1.0f64; n];
    for _ in 0..8 {
        let mut converged = true;
        for i in 0..n {
            let mut c = 0.0f64;
            let mut r = 0.0f64;
            for j in 0..n {
                if j != i {
                    c += (a[(j, i)] * d[i] / d[j]).norm();
                    r += (a[(i, j)] * d[j] / d[i]).norm();
                }
            }
            if c == 0.0 || r == 0.0 {
                continue;
            }
            let f = 2.0f64.powi(((r / c).sqrt().log2()).round() as i32);
            if f != 1.0 && f.is_finite() {
                d[i] *= f;
                converged = false;
            }
        }
        if converged {
            break;
        }
    }
    d
}

/// Eigenvalues of a complex matrix, sorted by real part then imaginary
/// part.
pub fn eigenvalues(a: &DMatrix<Complex64>) -> Vec<Complex64> {
    let d = balance_scales(a);
    let n = a.nrows();
    let balanced = DMatrix::from_fn(n, n, |i, j| a[(i, j)] * d[j] / d[i]);
    let evd = to_faer(&balanced).eigendecomposition::<c64>();
    let s = evd.s();
    let col = s.column_vector();
    let mut values: Vec<Complex64> = (0..n)
        .map(|k| {
            let z = col.read(k);
            Complex64::new(z.re, z.im)
        })
        .collect();
    values.sort_by(|a, b| {
        a.re.partial_cmp(&b.re)
            .unwrap()
            .then(a.im.partial_cmp(&b.im).unwrap())
    });
    values
}

/// Full eigensystem: values sorted by real then imaginary part, right
/// eigenvectors as unit columns, and dual left rows satisfying
/// `left * right = I` so that `left.row(i)` is the functional paired
/// with eigenvalue `i`.
pub struct Eigensystem {
    pub values: Vec<Complex64>,
    pub right: DMatrix<Complex64>,
    pub left: DMatrix<Complex64>,
}

impl Eigensystem {
    /// Alignment |y* x| of the unit left and right eigenvectors: 1 for a
    /// normal matrix, tending to 0 as the eigenvalue becomes defective.
    pub fn alignment(&self, i: usize) -> f64 {
        1.0 / self.left.row(i).norm()
    }
}

pub fn eigen(a: &DMatrix<Complex64>) -> Result<Eigensystem, SpectralError> {
    let n = a.nrows();
    let d = balance_scales(a);
    let balanced = DMatrix::from_fn(n, n, |i, j| a[(i, j)] * d[j] / d[i]);
    let evd = to_faer(&balanced).eigendecomposition::<c64>();
    let s = evd.s();
    let col = s.column_vector();
    let u = evd.u();
    let mut order: Vec<usize> = (0..n).collect();
    let raw: Vec<Complex64> = (0..n)
        .map(|k| {
            let z = col.read(k);
            Complex64::new(z.re, z.im)
        })
        .collect();
    order.sort_by(|&i, &j| {
        raw[i]
            .re
            .partial_cmp(&raw[j].re)
            .unwrap()
            .then(raw[i].im.partial_cmp(&raw[j].im).unwrap())
    });
    let values: Vec<Complex64> = order.iter().map(|&k| raw[k]).collect();
    let mut right = DMatrix::zeros(n, n);
    for (pos, &k) in order.iter().enumerate() {
        // undo balancing, then normalize the column
        let mut column = DVector::from_fn(n, |i, _| {
            let z = u.read(i, k);
            Complex64::new(z.re, z.im) * d[i]
        });
        let norm = column.norm();
        if norm == 0.0 {
            return Err(SpectralError::DegenerateEigenbasis);
        }
        column /= Complex64::new(norm, 0.0);
        right.set_column(pos, &column);
    }
    let left = right
        .clone()
        .try_inverse()
        .ok_or(SpectralError::DegenerateEigenbasis)?;
    Ok(Eigensystem {
        values,
        right,
        left,
    })
}

fn pad_to(v: &DVector<Complex64>, n: usize) -> DVector<Complex64> {
    let mut out = DVector::zeros(n);
    out.rows_mut(0, v.len()).copy_from(v);
    out
}

fn pad_row_to(v: &RowDVector<Complex64>, n: usize) -> RowDVector<Complex64> {
    let mut out = RowDVector::zeros(n);
    out.columns_mut(0, v.len()).copy_from(v);
    out
}

/// First-order resonance update at a simple eigenvalue: for a weighted
/// perturbation E of the weighted capacitance matrix, the squared
/// frequency moves by y* E x, so the predicted resonance is
/// sqrt(lambda + y* E x). E may be larger than the base system (a defect
/// appends rows); eigenvectors are zero-padded into the larger space.
pub fn simple_perturbation(
    sys: &Eigensystem,
    index: usize,
    e: &DMatrix<Complex64>,
) -> Result<Complex64, SpectralError> {
    let alignment = sys.alignment(index);
    if alignment < CONDITION_FLOOR {
        return Err(SpectralError::IllConditioned { index, alignment });
    }
    let n = e.nrows();
    let x = pad_to(&DVector::from(sys.right.column(index)), n);
    let y = pad_row_to(&RowDVector::from(sys.left.row(index)), n);
    let shift = (&y * e * x)[(0, 0)];
    Ok((sys.values[index] + shift).sqrt())
}

/// Left/right eigenvector alignment |y* x| for each given eigenvalue,
/// computed from the singular pair of A - lambda I. Robust even when
/// other eigenvalues are defective, unlike a full eigenbasis inverse.
pub fn alignments(a: &DMatrix<Complex64>, values: &[Complex64]) -> Vec<f64> {
    let n = a.nrows();
    values
        .iter()
        .map(|&l| {
            let m = a - DMatrix::from_diagonal_element(n, n, l);
            let svd = m.svd(true, true);
            let u = svd.u.as_ref().unwrap();
            let vt = svd.v_t.as_ref().unwrap();
            let x = DVector::from_fn(n, |i, _| vt[(n - 1, i)].conj());
            let y = DVector::from_fn(n, |i, _| u[(i, n - 1)]);
            y.dotc(&x).norm()
        })
        .collect()
}

/// First-order resonance update of one isolated simple eigenvalue,
/// through its own singular-vector pair instead of a full eigenbasis:
/// usable when a different part of the spectrum is defective (an
/// exceptional-point pair elsewhere would poison the eigenbasis
/// inverse). E may be padded as in [`simple_perturbation`].
pub fn isolated_mode_perturbation(
    a: &DMatrix<Complex64>,
    value: Complex64,
    e: &DMatrix<Complex64>,
) -> Result<Complex64, SpectralError> {
    let n = a.nrows();
    let m = a - DMatrix::from_diagonal_element(n, n, value);
    let svd = m.svd(true, true);
    let u = svd.u.as_ref().unwrap();
    let vt = svd.v_t.as_ref().unwrap();
    let x = DVector::from_fn(n, |i, _| vt[(n - 1, i)].conj());
    let y = DVector::from_fn(n, |i, _| u[(i, n - 1)]);
    let pairing = y.dotc(&x);
    if pairing.norm() < CONDITION_FLOOR {
        return Err(SpectralError::IllConditioned {
            index: 0,
            alignment: pairing.norm(),
        });
    }
    let ne = e.nrows();
    let xp = pad_to(&x, ne);
    let yp = pad_to(&y, ne);
    let shift = yp.dotc(&(e * xp)) / pairing;
    Ok((value + shift).sqrt())
}

/// Jordan chain of length `order` at a defective eigenvalue: right
/// vectors x_1 (eigenvector) through x_order, and left rows l_1 through
/// l_order with l_1 the left-eigenvector functional, normalized so that
/// l_1 x_order = 1.
pub struct JordanChain {
    pub value: Complex64,
    pub order: usize,
    pub right: Vec<DVector<Complex64>>,
    pub left: Vec<RowDVector<Complex64>>,
}

pub fn jordan_chain(
    a: &DMatrix<Complex64>,
    value: Complex64,
    order: usize,
) -> Result<JordanChain, SpectralError> {
    assert!(order >= 2, "a chain of length 1 is an ordinary eigenvector");
    let n = a.nrows();
    let scale = a.norm().max(value.norm()).max(f64::MIN_POSITIVE);
    let clustered = eigenvalues(a)
        .into_iter()
        .filter(|l| (l - value).norm() <= 1e-4 * scale)
        .count();
    if clustered < order {
        return Err(SpectralError::NotDefective {
            order,
            reason: format!("only {clustered} eigenvalues cluster at the requested value"),
        });
    }

    let m = a - DMatrix::from_diagonal_element(n, n, value);
    let svd = m.clone().svd(true, true);
    let u = svd.u.as_ref().unwrap();
    let vt = svd.v_t.as_ref().unwrap();
    let sigma = &svd.singular_values;
    // nalgebra orders singular values descending; the defect direction is last
    let smin = sigma[n - 1];
    if smin > 1e-5 * scale {
        return Err(SpectralError::NotDefective {
            order,
            reason: format!("smallest singular value {smin:.3e} is not negligible"),
        });
    }
    let x1 = DVector::from_fn(n, |i, _| vt[(n - 1, i)].conj());
    let y1 = RowDVector::from_fn(n, |_, i| u[(i, n - 1)].conj());
    let align = (&y1 * &x1)[(0, 0)].norm();
    if align > DEFECTIVE_ALIGNMENT {
        return Err(SpectralError::NotDefective {
            order,
            reason: format!(
                "left/right eigenvectors align at {align:.3e}; the cluster is semisimple"
            ),
        });
    }

    // Min-norm solves of M x_{k+1} = x_k through the truncated pseudoinverse,
    // dropping the defect direction.
    let pinv_apply = |rhs: &DVector<Complex64>| -> DVector<Complex64> {
        let mut out = DVector::zeros(n);
        for k in 0..(n - 1) {
            let uk = DVector::from_fn(n, |i, _| u[(i, k)]);
            let coeff = uk.dotc(rhs) / Complex64::new(sigma[k], 0.0);
            let vk = DVector::from_fn(n, |i, _| vt[(k, i)].conj());
            out += vk * coeff;
        }
        out
    };
    let pinv_apply_row = |rhs: &RowDVector<Complex64>| -> RowDVector<Complex64> {
        let mut out = RowDVector::zeros(n);
        for k in 0..(n - 1) {
            let vk = RowDVector::from_fn(n, |_, i| vt[(k, i)]);
            let coeff = (rhs * vk.transpose().conjugate())[(0, 0)] / Complex64::new(sigma[k], 0.0);
            let uk = RowDVector::from_fn(n, |_, i| u[(i, k)].conj());
            out += uk * coeff;
        }
        out
    };

    let mut right = vec![x1];
    let mut left = vec![y1];
    for k in 1..order {
        let xk = pinv_apply(&right[k - 1]);
        let residual = (&m * &xk - &right[k - 1]).norm();
        let denom = scale * xk.norm() + right[k - 1].norm();
        if residual > 1e-8 * denom {
            return Err(SpectralError::NotDefective {
                order,
                reason: format!("chain relation {k} fails with residual {residual:.3e}"),
            });
        }
        let yk = pinv_apply_row(&left[k - 1]);
        right.push(xk);
        left.push(yk);
    }

    // Normalize: the left rows are scaled so l_1 x_order = 1, making the
    // leading mixed pairing the unit it is divided by in branch formulas.
    let g = (&left[0] * &right[order - 1])[(0, 0)];
    if g.norm() < 1e-10 * right[order - 1].norm() {
        return Err(SpectralError::NormalizationSingular);
    }
    for l in &mut left {
        *l /= g;
    }
    Ok(JordanChain {
        value,
        order,
        right,
        left,
    })
}

/// Square-root branch expansion at a defective eigenvalue: for a weighted
/// perturbation E, the cluster of `order` eigenvalues splits along the
/// branches lambda + xi^(1/order) e^(2 pi i m / order), with
/// xi = l_1 E x_1 under the chain normalization. Returns the predicted
/// resonances (square roots), one per branch.
pub fn ep_perturbation(chain: &JordanChain, e: &DMatrix<Complex64>) -> Vec<Complex64> {
    let n = e.nrows();
    let x = pad_to(&chain.right[0], n);
    let y = pad_row_to(&chain.left[0], n);
    let xi = (&y * e * x)[(0, 0)];
    let r = chain.order as f64;
    let root = xi.powf(1.0 / r);
    (0..chain.order)
        .map(|m| {
            let phase = Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * m as f64 / r);
            (chain.value + root * phase).sqrt()
        })
        .collect()
}

/// Result of the gain/loss gap search: the detuning parameter, the
/// residual eigenvalue gap, the coalesced value, and the left/right
/// alignment certifying defectiveness.
#[derive(Debug, Clone)]
pub struct CoalescencePoint {
    pub t: f64,
    pub gap: f64,
    pub value: Complex64,
    pub alignment: f64,
}

/// Smallest pairwise eigenvalue distance of diag(1 + i tau) C for the
/// antisymmetric profile tau = (t, 0, -t), together with the pair mean.
fn pair_gap(c: &DMatrix<f64>, t: f64) -> (f64, Complex64) {
    let n = c.nrows();
    let taus: Vec<f64> = match n {
        3 => vec![t, 0.0, -t],
        _ => (0..n)
            .map(|j| {
                if 2 * j + 1 == n {
                    0.0
                } else if 2 * j + 1 < n {
                    t
                } else {
                    -t
                }
            })
            .collect(),
    };
    let weighted = DMatrix::from_fn(n, n, |i, j| Complex64::new(1.0, taus[i]) * c[(i, j)]);
    let values = eigenvalues(&weighted);
    let mut best = f64::INFINITY;
    let mut mean = Complex64::default();
    for i in 0..n {
        for j in (i + 1)..n {
            let gap = (values[i] - values[j]).norm();
            if gap < best {
                best = gap;
                mean = (values[i] + values[j]) / 2.0;
            }
        }
    }
    (best, mean)
}

/// Find the detuning strength at which two eigenvalues of
/// diag(1 + i tau_j) C coalesce, for the antisymmetric profile
/// tau = (t, 0, -t). Coarse scan, then ternary refinement, then a
/// final scan over floating-point neighbors: the gap has a square-root
/// cusp at the coalescence, so the last digits are only reachable by
/// stepping ulps.
///
/// The returned parameter multiplies the scale-free matrix C; scaling
/// every material weight by a common factor leaves it unchanged.
pub fn find_exceptional_point(
    c: &DMatrix<f64>,
    t_range: (f64, f64),
    n_coarse: usize,
) -> Result<CoalescencePoint, SpectralError> {
    assert!(n_coarse >= 8);
    let (t_lo, t_hi) = t_range;
    let mut best = (f64::INFINITY, 0.0f64);
    for k in 0..=n_coarse {
        let t = t_lo + (t_hi - t_lo) * k as f64 / n_coarse as f64;
        let (gap, _) = pair_gap(c, t);
        if gap < best.0 {
            best = (gap, t);
        }
    }
    let step = (t_hi - t_lo) / n_coarse as f64;
    let mut lo = (best.1 - step).max(t_lo);
    let mut hi = (best.1 + step).min(t_hi);
    for _ in 0..200 {
        if hi - lo < 4.0 * f64::EPSILON * hi.abs().max(1.0) {
            break;
        }
        let m1 = lo + (hi - lo) / 3.0;
        let m2 = hi - (hi - lo) / 3.0;
        if pair_gap(c, m1).0 < pair_gap(c, m2).0 {
            hi = m2;
        } else {
            lo = m1;
        }
    }
    let center = 0.5 * (lo + hi);
    let mut t_best = center;
    let mut gap_best = pair_gap(c, center).0;
    for direction in [1.0f64, -1.0] {
        let mut t = center;
        for _ in 0..400 {
            t = if direction > 0.0 {
                f64::from_bits(t.to_bits() + 1)
            } else {
                f64::from_bits(t.to_bits() - 1)
            };
            let (gap, _) = pair_gap(c, t);
            if gap < gap_best {
                gap_best = gap;
                t_best = t;
            }
        }
    }

    let (gap, mean) = pair_gap(c, t_best);
    let n = c.nrows();
    let taus: Vec<f64> = vec![t_best, 0.0, -t_best];
    let weighted = DMatrix::from_fn(n, n, |i, j| Complex64::new(1.0, taus[i]) * c[(i, j)]);
    let spectral_norm = weighted
        .clone()
        .svd(false, false)
        .singular_values[0];
    if gap > 1e-8 * spectral_norm {
        return Err(SpectralError::NoCoalescence { t: t_best, gap });
    }
    let m = &weighted - DMatrix::from_diagonal_element(n, n, mean);
    let svd = m.svd(true, true);
    let u = svd.u.as_ref().unwrap();
    let vt = svd.v_t.as_ref().unwrap();
    let x1 = DVector::from_fn(n, |i, _| vt[(n - 1, i)].conj());
    let y1 = DVector::from_fn(n, |i, _| u[(i, n - 1)]);
    let alignment = y1.dotc(&x1).norm();
    if alignment > DEFECTIVE_ALIGNMENT {
        return Err(SpectralError::NoCoalescence { t: t_best, gap });
    }
    Ok(CoalescencePoint {
        t: t_best,
        gap,
        value: mean,
        alignment,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn cplx(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn eigenvalues_of_a_diagonal_matrix_come_back_sorted() {
        let a = DMatrix::from_diagonal(&DVector::from_vec(vec![
            cplx(3.0, 1.0),
            cplx(-1.0, 0.5),
            cplx(2.0, -2.0),
        ]));
        let vals = eigenvalues(&a);
        assert_relative_eq!(vals[0].re, -1.0, epsilon = 1e-12);
        assert_relative_eq!(vals[1].re, 2.0, epsilon = 1e-12);
        assert_relative_eq!(vals[2].re, 3.0, epsilon = 1e-12);
    }

    #[test]
    fn eigensystem_diagonalizes_its_matrix() {
        // deterministic full complex matrix with well-separated spectrum
        let n = 5;
        let a = DMatrix::from_fn(n, n, |i, j| {
            if i == j {
                cplx(i as f64 + 1.0, 0.3 * i as f64)
            } else {
                cplx(0.1 / (1.0 + (i as f64 - j as f64).abs()), 0.05 * (i + j) as f64 / 10.0)
            }
        });
        let sys = eigen(&a).unwrap();
        let recon = &sys.left * &a * &sys.right;
        for i in 0..n {
            for j in 0..n {
                let expect = if i == j { sys.values[i] } else { Complex64::default() };
                assert!((recon[(i, j)] - expect).norm() < 1e-10, "entry {i},{j}");
            }
        }
    }

    #[test]
    fn badly_scaled_matrices_still_diagonalize_after_balancing() {
        let scales = [1e-6, 1e-2, 1.0, 1e4];
        let a = DMatrix::from_fn(4, 4, |i, j| {
            cplx(scales[i] / scales[j] * (0.2 + i as f64 + 2.0 * j as f64), 0.0)
        });
        let sys = eigen(&a).unwrap();
        let sum: Complex64 = sys.values.iter().sum();
        let trace: Complex64 = (0..4).map(|i| a[(i, i)]).sum();
        assert!((sum - trace).norm() < 1e-9 * trace.norm());
    }

    #[test]
    fn diagonal_perturbation_of_a_diagonal_matrix_is_exact() {
        let a = DMatrix::from_diagonal(&DVector::from_vec(vec![
            cplx(0.04, 0.001),
            cplx(0.09, -0.002),
            cplx(0.16, 0.0),
        ]));
        let e = DMatrix::from_diagonal(&DVector::from_vec(vec![
            cplx(1e-3, 2e-4),
            cplx(-2e-3, 0.0),
            cplx(5e-4, -1e-4),
        ]));
        let sys = eigen(&a).unwrap();
        for i in 0..3 {
            let omega = simple_perturbation(&sys, i, &e).unwrap();
            let exact = (a[(i, i)] + e[(i, i)]).sqrt();
            assert!((omega - exact).norm() < 1e-14);
        }
    }

    #[test]
    fn zero_perturbation_returns_the_unperturbed_resonance() {
        let a = DMatrix::from_fn(3, 3, |i, j| cplx(if i == j { 0.1 + 0.03 * i as f64 } else { 0.01 }, 0.0));
        let sys = eigen(&a).unwrap();
        let e = DMatrix::zeros(4, 4);
        for i in 0..3 {
            let omega = simple_perturbation(&sys, i, &e).unwrap();
            assert!((omega - sys.values[i].sqrt()).norm() < 1e-13);
        }
    }

    #[test]
    fn canonical_jordan_block_yields_the_canonical_chain() {
        let a = 0.3;
        let m = DMatrix::from_row_slice(2, 2, &[cplx(a, 0.0), cplx(1.0, 0.0), cplx(0.0, 0.0), cplx(a, 0.0)]);
        let chain = jordan_chain(&m, cplx(a, 0.0), 2).unwrap();
        // x1 along e1, l1 along e2^T, pairing l1 x2 = 1
        assert!(chain.right[0][1].norm() < 1e-12);
        assert!(chain.left[0][0].norm() < 1e-12);
        let pairing = (&chain.left[0] * &chain.right[1])[(0, 0)];
        assert!((pairing - cplx(1.0, 0.0)).norm() < 1e-12);

        // rank-one perturbation epsilon e2 e1^T splits as a +/- sqrt(epsilon)
        let eps = 1e-6;
        let e = DMatrix::from_row_slice(2, 2, &[
            cplx(0.0, 0.0), cplx(0.0, 0.0),
            cplx(eps, 0.0), cplx(0.0, 0.0),
        ]);
        let branches = ep_perturbation(&chain, &e);
        let predicted_sq: Vec<f64> = branches.iter().map(|w| (w * w).re).collect();
        let lo = predicted_sq.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = predicted_sq.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        assert_relative_eq!(lo, a - eps.sqrt(), max_relative = 1e-10);
        assert_relative_eq!(hi, a + eps.sqrt(), max_relative = 1e-10);
    }

    #[test]
    fn distinct_eigenvalues_are_not_defective() {
        let m = DMatrix::from_diagonal(&DVector::from_vec(vec![cplx(1.0, 0.0), cplx(2.0, 0.0)]));
        assert!(matches!(
            jordan_chain(&m, cplx(1.0, 0.0), 2),
            Err(SpectralError::NotDefective { .. })
        ));
    }

    #[test]
    fn semisimple_double_eigenvalues_are_rejected() {
        let m = DMatrix::from_diagonal(&DVector::from_vec(vec![cplx(1.0, 0.0), cplx(1.0, 0.0)]));
        assert!(matches!(
            jordan_chain(&m, cplx(1.0, 0.0), 2),
            Err(SpectralError::NotDefective { .. })
        ));
    }

    #[test]
    fn isolated_mode_survives_a_defective_neighbor() {
        // 2x2 Jordan block next to an isolated simple eigenvalue: the
        // eigenbasis inverse is singular, the single-mode route is not.
        let a = DMatrix::from_row_slice(3, 3, &[
            cplx(0.2, 0.0), cplx(1.0, 0.0), cplx(0.0, 0.0),
            cplx(0.0, 0.0), cplx(0.2, 0.0), cplx(0.0, 0.0),
            cplx(0.0, 0.0), cplx(0.0, 0.0), cplx(0.5, 0.0),
        ]);
        let e = DMatrix::from_diagonal(&DVector::from_vec(vec![
            cplx(0.0, 0.0),
            cplx(0.0, 0.0),
            cplx(1e-3, 0.0),
        ]));
        let omega = isolated_mode_perturbation(&a, cplx(0.5, 0.0), &e).unwrap();
        assert!((omega - cplx(0.5 + 1e-3, 0.0).sqrt()).norm() < 1e-12);
    }

    #[test]
    fn zero_coupling_collapses_all_branches() {
        let a = 0.3;
        let m = DMatrix::from_row_slice(2, 2, &[cplx(a, 0.0), cplx(1.0, 0.0), cplx(0.0, 0.0), cplx(a, 0.0)]);
        let chain = jordan_chain(&m, cplx(a, 0.0), 2).unwrap();
        let e = DMatrix::zeros(2, 2);
        let branches = ep_perturbation(&chain, &e);
        assert!((branches[0] - branches[1]).norm() < 1e-14);
        assert!((branches[0] - cplx(a, 0.0).sqrt()).norm() < 1e-14);
    }
}
