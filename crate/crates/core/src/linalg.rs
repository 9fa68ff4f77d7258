//! Small dense linear-algebra helpers shared by the geometric modules.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::SeedableRng;
use std::f64::consts::PI;

/// Orthonormal basis of the column span of `b` by column-pivoted modified
/// Gram-Schmidt with one re-orthogonalization pass.
///
/// Columns whose residual norm drops below `rel_tol` times the largest input
/// column norm are treated as dependent. Returns the basis and its rank.
pub fn orthonormalize(b: &DMatrix<f64>, rel_tol: f64) -> (DMatrix<f64>, usize) {
    let (rows, cols) = b.shape();
    let scale = (0..cols).map(|j| b.column(j).norm()).fold(0.0, f64::max);
    if scale == 0.0 {
        return (DMatrix::zeros(rows, 0), 0);
    }
    let mut work: Vec<DVector<f64>> = (0..cols).map(|j| b.column(j).into_owned()).collect();
    let mut basis: Vec<DVector<f64>> = Vec::with_capacity(cols.min(rows));

    while !work.is_empty() && basis.len() < rows {
        let (pivot, norm) = work
            .iter()
            .enumerate()
            .map(|(i, v)| (i, v.norm()))
            .fold((0, -1.0), |acc, x| if x.1 > acc.1 { x } else { acc });
        if norm <= rel_tol * scale {
            break;
        }
        let mut v = work.remove(pivot);
        for _ in 0..2 {
            for q in &basis {
                let c = q.dot(&v);
                v.axpy(-c, q, 1.0);
            }
        }
        let nv = v.norm();
        if nv <= rel_tol * scale {
            continue;
        }
        v /= nv;
        for w in work.iter_mut() {
            let c = v.dot(w);
            w.axpy(-c, &v, 1.0);
        }
        basis.push(v);
    }

    let rank = basis.len();
    let mut q = DMatrix::zeros(rows, rank);
    for (j, v) in basis.iter().enumerate() {
        q.set_column(j, v);
    }
    (q, rank)
}

pub fn singular_values(m: &DMatrix<f64>) -> Vec<f64> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return Vec::new();
    }
    let mut s: Vec<f64> = m.clone().svd(false, false).singular_values.iter().copied().collect();
    s.sort_by(|a, b| b.total_cmp(a));
    s
}

/// Operator 2-norm (largest singular value).
pub fn spectral_norm(m: &DMatrix<f64>) -> f64 {
    singular_values(m).first().copied().unwrap_or(0.0)
}

/// Number of singular values above `rel_tol * sigma_max`.
pub fn numerical_rank(m: &DMatrix<f64>, rel_tol: f64) -> usize {
    let s = singular_values(m);
    match s.first() {
        None => 0,
        Some(&smax) if smax == 0.0 => 0,
        Some(&smax) => s.iter().filter(|&&x| x > rel_tol * smax).count(),
    }
}

pub fn max_abs(m: &DMatrix<f64>) -> f64 {
    m.iter().fold(0.0, |acc, x| acc.max(x.abs()))
}

pub fn symmetry_residual(m: &DMatrix<f64>) -> f64 {
    max_abs(&(m - m.transpose()))
}

/// Eigenvalues of a square complex matrix, via the complex Schur form.
pub fn complex_eigenvalues(m: &DMatrix<Complex64>) -> Vec<Complex64> {
    if m.nrows() == 0 {
        return Vec::new();
    }
    let n = m.nrows();
    let max_niter = 100 * n.max(4);
    if let Some(s) = m.clone().try_schur(f64::EPSILON, max_niter) {
        return diagonal(&s.unpack().1);
    }
    // The shifted QR iteration can cycle on exactly degenerate input. Retry on
    // e^{i phi} Q^* M Q for fixed unitaries Q, which has the same spectrum up to
    // the phase.
    for attempt in 1..=8u64 {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(attempt);
        let q = crate::random::unitary(&mut rng, n);
        let phase = Complex64::from_polar(1.0, 0.37 * attempt as f64);
        let conj = q.adjoint() * m * &q * phase;
        if let Some(s) = conj.try_schur(f64::EPSILON, max_niter) {
            return diagonal(&s.unpack().1).into_iter().map(|z| z / phase).collect();
        }
    }
    panic!("complex Schur decomposition did not converge")
}

fn diagonal(t: &DMatrix<Complex64>) -> Vec<Complex64> {
    (0..t.nrows()).map(|i| t[(i, i)]).collect()
}

/// Eigenphases in `(-pi, pi]` of a (numerically) unitary matrix.
pub fn eigenphases(m: &DMatrix<Complex64>) -> Vec<f64> {
    let mut p: Vec<f64> = complex_eigenvalues(m).iter().map(|z| principal_angle(z.arg())).collect();
    p.sort_by(f64::total_cmp);
    p
}

/// Maps an angle into `(-pi, pi]`.
pub fn principal_angle(x: f64) -> f64 {
    let mut y = x % (2.0 * PI);
    if y <= -PI {
        y += 2.0 * PI;
    } else if y > PI {
        y -= 2.0 * PI;
    }
    y
}

/// Maps an angle into `[0, 2 pi)`.
pub fn positive_angle(x: f64) -> f64 {
    let y = x.rem_euclid(2.0 * PI);
    if y >= 2.0 * PI {
        0.0
    } else {
        y
    }
}

/// Complex determinant by LU.
pub fn complex_det(m: &DMatrix<Complex64>) -> Complex64 {
    if m.nrows() == 0 {
        return Complex64::new(1.0, 0.0);
    }
    m.clone().lu().determinant()
}

/// Real `2n x n` frame `[X; Y]` to the complex `n x n` matrix `X + iY`.
pub fn frame_to_complex(f: &DMatrix<f64>) -> DMatrix<Complex64> {
    let n = f.ncols();
    DMatrix::from_fn(n, n, |i, j| Complex64::new(f[(i, j)], f[(i + n, j)]))
}

/// Complex `n x n` matrix `X + iY` to the real `2n x n` frame `[X; Y]`.
pub fn complex_to_frame(u: &DMatrix<Complex64>) -> DMatrix<f64> {
    let n = u.nrows();
    DMatrix::from_fn(2 * n, u.ncols(), |i, j| {
        if i < n {
            u[(i, j)].re
        } else {
            u[(i - n, j)].im
        }
    })
}
