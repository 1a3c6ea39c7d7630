//! Real orthonormal spherical harmonics up to a fixed maximum degree,
//! evaluated through stable normalized associated-Legendre recurrences.

/// Number of real harmonics of degree <= `l_max`.
pub fn basis_len(l_max: usize) -> usize {
    (l_max + 1) * (l_max + 1)
}

/// Flat index of the harmonic of degree `n` and order `m` (-n <= m <= n).
///
/// Degrees are stored contiguously, orders in increasing `m`, so the
/// monopole sits at index 0.
pub fn flat_index(n: usize, m: i64) -> usize {
    n * n + (m + n as i64) as usize
}

/// Degree of the harmonic at flat index `idx`.
pub fn degree_of(idx: usize) -> usize {
    (idx as f64).sqrt() as usize
}

/// Evaluate every real harmonic of degree <= `l_max` at the direction with
/// polar cosine `cos_theta` and azimuth `phi`, writing into `out` in flat
/// index order. `out` must have length `basis_len(l_max)`.
///
/// The basis is orthonormal for the surface measure on the unit sphere:
/// the degree-0 entry is 1/sqrt(4 pi), and positive/negative orders carry
/// sqrt(2) cos(m phi) / sqrt(2) sin(m phi) factors.
pub fn eval_basis(l_max: usize, cos_theta: f64, phi: f64, out: &mut [f64]) {
    assert_eq!(out.len(), basis_len(l_max));
    let x = cos_theta;
    let s = (1.0 - x * x).max(0.0).sqrt();

    // p[m][n] would be wasteful; keep two rolling columns per order instead.
    // norm[m*(l_max+1)+n] = K_nm * P_n^m(x), fully normalized, no phase.
    let stride = l_max + 1;
    let mut norm = vec![0.0f64; stride * stride];
    norm[0] = 1.0 / (4.0 * std::f64::consts::PI).sqrt();
    for m in 1..=l_max {
        let prev = norm[(m - 1) * stride + (m - 1)];
        norm[m * stride + m] = (1.0 + 0.5 / m as f64).sqrt() * s * prev;
    }
    for m in 0..l_max {
        norm[m * stride + m + 1] = ((2 * m + 3) as f64).sqrt() * x * norm[m * stride + m];
    }
    for m in 0..=l_max {
        for n in (m + 2)..=l_max {
            let nf = n as f64;
            let mf = m as f64;
            let a = ((4.0 * nf * nf - 1.0) / (nf * nf - mf * mf)).sqrt();
            let b = ((2.0 * nf + 1.0) / (2.0 * nf - 3.0) * ((nf - 1.0) * (nf - 1.0) - mf * mf)
                / (nf * nf - mf * mf))
                .sqrt();
            norm[m * stride + n] =
                a * x * norm[m * stride + n - 1] - b * norm[m * stride + n - 2];
        }
    }

    let sqrt2 = std::f64::consts::SQRT_2;
    for n in 0..=l_max {
        out[flat_index(n, 0)] = norm[n];
        for m in 1..=n {
            let base = sqrt2 * norm[m * stride + n];
            let mf = m as f64;
            out[flat_index(n, m as i64)] = base * (mf * phi).cos();
            out[flat_index(n, -(m as i64))] = base * (mf * phi).sin();
        }
    }
}

/// Convenience wrapper around [`eval_basis`] that allocates its output.
pub fn basis_at(l_max: usize, cos_theta: f64, phi: f64) -> Vec<f64> {
    let mut out = vec![0.0; basis_len(l_max)];
    eval_basis(l_max, cos_theta, phi, &mut out);
    out
}
