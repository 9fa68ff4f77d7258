//! Finite-dimensional symplectic linear algebra on `R^{2n}`.
//!
//! Coordinates are ordered `(x_1..x_n, y_1..y_n)`; the standard complex
//! structure is `J = [[0, -I], [I, 0]]` and `R^{2n}` is identified with `C^n`
//! by `(x, y) -> x + iy`, under which `J` acts as multiplication by `i`.

use crate::error::{Error, Result};
use crate::linalg;
use nalgebra::DMatrix;
use num_complex::Complex64;

/// Tolerance for the frame invariants `F^T F = I` and `F^T J F = 0`.
pub const FRAME_TOL: f64 = 1e-10;
/// Tolerance for `A^T J A = J`.
pub const SYMPLECTIC_TOL: f64 = 1e-8;
/// Default relative singular-value threshold for intersections.
pub const DEFAULT_RANK_TOL: f64 = 1e-8;

/// The standard complex structure `[[0, -I_n], [I_n, 0]]`.
pub fn standard_j(n: usize) -> Result<DMatrix<f64>> {
    if n == 0 {
        return Err(Error::ZeroDimension);
    }
    Ok(j_matrix(n))
}

pub(crate) fn j_matrix(n: usize) -> DMatrix<f64> {
    let mut j = DMatrix::zeros(2 * n, 2 * n);
    for i in 0..n {
        j[(i, n + i)] = -1.0;
        j[(n + i, i)] = 1.0;
    }
    j
}

/// `J F` without forming `J`: `[X; Y] -> [-Y; X]`.
fn apply_j(f: &DMatrix<f64>) -> DMatrix<f64> {
    let n = f.nrows() / 2;
    DMatrix::from_fn(f.nrows(), f.ncols(), |i, j| if i < n { -f[(i + n, j)] } else { f[(i - n, j)] })
}

/// Anything that carries an orthonormal frame of a subspace.
pub trait AsFrame {
    fn frame(&self) -> &DMatrix<f64>;
}

impl AsFrame for DMatrix<f64> {
    fn frame(&self) -> &DMatrix<f64> {
        self
    }
}

/// An orthonormal `2n x n` frame spanning a Lagrangian subspace.
#[derive(Debug, Clone, PartialEq)]
pub struct LagrangianFrame {
    n: usize,
    frame: DMatrix<f64>,
}

impl AsFrame for LagrangianFrame {
    fn frame(&self) -> &DMatrix<f64> {
        &self.frame
    }
}

impl LagrangianFrame {
    /// Validates an already orthonormal frame.
    pub fn from_orthonormal(frame: DMatrix<f64>) -> Result<Self> {
        let n = check_shape(&frame)?;
        let gram = frame.transpose() * &frame;
        let ortho = linalg::max_abs(&(gram - DMatrix::identity(n, n)));
        if ortho > FRAME_TOL {
            return Err(Error::InvariantViolated { invariant: "orthonormal columns", residual: ortho });
        }
        let iso = isotropy_residual(&frame);
        if iso > FRAME_TOL {
            return Err(Error::InvariantViolated { invariant: "isotropy", residual: iso });
        }
        Ok(Self { n, frame })
    }

    /// Orthonormalizes a basis of a Lagrangian subspace.
    pub fn from_basis(basis: &DMatrix<f64>) -> Result<Self> {
        let n = check_shape(basis)?;
        let (q, rank) = linalg::orthonormalize(basis, 1e-12);
        if rank < n {
            return Err(Error::RankDeficient { rank, expected: n });
        }
        Self::from_orthonormal(q)
    }

    /// Like [`from_basis`](Self::from_basis) but accepts a span that is only
    /// isotropic within `tol`, then snaps it onto the nearest Lagrangian
    /// subspace through the polar factor of its unitary representative.
    pub fn from_basis_lenient(basis: &DMatrix<f64>, tol: f64) -> Result<Self> {
        let n = check_shape(basis)?;
        let (q, rank) = linalg::orthonormalize(basis, 1e-12);
        if rank < n {
            return Err(Error::RankDeficient { rank, expected: n });
        }
        let iso = isotropy_residual(&q);
        if iso > tol {
            return Err(Error::InvariantViolated { invariant: "isotropy", residual: iso });
        }
        let u = linalg::frame_to_complex(&q);
        let svd = u.svd(true, true);
        let polar = svd.u.expect("requested") * svd.v_t.expect("requested");
        Ok(Self { n, frame: linalg::complex_to_frame(&polar) })
    }

    /// `R^n x {0}`.
    pub fn horizontal(n: usize) -> Self {
        let mut f = DMatrix::zeros(2 * n, n);
        for i in 0..n {
            f[(i, i)] = 1.0;
        }
        Self { n, frame: f }
    }

    /// `{0} x R^n`.
    pub fn vertical(n: usize) -> Self {
        let mut f = DMatrix::zeros(2 * n, n);
        for i in 0..n {
            f[(n + i, i)] = 1.0;
        }
        Self { n, frame: f }
    }

    /// The subspace `U (R^n x {0})` for a unitary `U`.
    pub fn from_unitary(u: &DMatrix<Complex64>) -> Result<Self> {
        Self::from_orthonormal(linalg::complex_to_frame(u))
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.frame
    }

    pub fn projector(&self) -> DMatrix<f64> {
        &self.frame * self.frame.transpose()
    }

    pub fn unitary_representative(&self) -> DMatrix<Complex64> {
        linalg::frame_to_complex(&self.frame)
    }

    pub fn souriau(&self) -> SouriauMatrix {
        let u = self.unitary_representative();
        SouriauMatrix { n: self.n, w: &u * u.transpose() }
    }

    /// `e^{theta J} L`, with `e^{theta J} = cos(theta) I + sin(theta) J`.
    pub fn rotate(&self, theta: f64) -> Self {
        let (s, c) = theta.sin_cos();
        Self { n: self.n, frame: &self.frame * c + apply_j(&self.frame) * s }
    }

    pub fn apply(&self, a: &SymplecticMatrix) -> Result<Self> {
        apply_symplectic(a, self)
    }

    pub fn is_lagrangian(&self) -> bool {
        Self::from_orthonormal(self.frame.clone()).is_ok()
    }
}

fn check_shape(m: &DMatrix<f64>) -> Result<usize> {
    let (rows, cols) = m.shape();
    if cols == 0 {
        return Err(Error::ZeroDimension);
    }
    if rows != 2 * cols {
        return Err(Error::DimensionMismatch { expected: 2 * cols, found: rows });
    }
    Ok(cols)
}

fn isotropy_residual(f: &DMatrix<f64>) -> f64 {
    linalg::max_abs(&(f.transpose() * apply_j(f)))
}

/// Orthonormalized frame of a Lagrangian span.
pub fn frame_from_basis(b: &DMatrix<f64>) -> Result<LagrangianFrame> {
    LagrangianFrame::from_basis(b)
}

/// `X + iY` for the frame `[X; Y]`; unitary by the frame invariants.
pub fn unitary_representative(l: &LagrangianFrame) -> DMatrix<Complex64> {
    l.unitary_representative()
}

pub fn souriau(l: &LagrangianFrame) -> SouriauMatrix {
    l.souriau()
}

pub fn rotate(l: &LagrangianFrame, theta: f64) -> LagrangianFrame {
    l.rotate(theta)
}

/// A real `2n x 2n` matrix with `A^T J A = J`.
#[derive(Debug, Clone, PartialEq)]
pub struct SymplecticMatrix {
    n: usize,
    a: DMatrix<f64>,
}

impl SymplecticMatrix {
    pub fn new(a: DMatrix<f64>) -> Result<Self> {
        Self::with_tolerance(a, SYMPLECTIC_TOL)
    }

    pub fn with_tolerance(a: DMatrix<f64>, tol: f64) -> Result<Self> {
        let (r, c) = a.shape();
        if r != c || r % 2 != 0 {
            return Err(Error::DimensionMismatch { expected: c, found: r });
        }
        if r == 0 {
            return Err(Error::ZeroDimension);
        }
        let residual = symplectic_residual(&a);
        if residual > tol {
            return Err(Error::NotSymplectic { residual });
        }
        Ok(Self { n: r / 2, a })
    }

    pub fn identity(n: usize) -> Self {
        Self { n, a: DMatrix::identity(2 * n, 2 * n) }
    }

    /// `exp(J H)` for a symmetric `H`.
    pub fn exp_hamiltonian(h: &DMatrix<f64>) -> Result<Self> {
        let n = h.nrows() / 2;
        if h.nrows() != h.ncols() || h.nrows() % 2 != 0 || n == 0 {
            return Err(Error::DimensionMismatch { expected: 2 * n.max(1), found: h.nrows() });
        }
        let residual = linalg::symmetry_residual(h);
        if residual > 1e-12 {
            return Err(Error::NotSymmetric { residual });
        }
        Self::new((j_matrix(n) * h).exp())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.a
    }

    pub fn inverse(&self) -> Self {
        // A^{-1} = -J A^T J
        let j = j_matrix(self.n);
        Self { n: self.n, a: -(&j * self.a.transpose() * &j) }
    }

    pub fn compose(&self, other: &Self) -> Self {
        Self { n: self.n, a: &self.a * &other.a }
    }
}

pub fn symplectic_residual(a: &DMatrix<f64>) -> f64 {
    let j = j_matrix(a.nrows() / 2);
    linalg::max_abs(&(a.transpose() * &j * a - j))
}

/// `A L`, re-orthonormalized.
pub fn apply_symplectic(a: &SymplecticMatrix, l: &LagrangianFrame) -> Result<LagrangianFrame> {
    if a.n != l.n {
        return Err(Error::DimensionMismatch { expected: l.n, found: a.n });
    }
    LagrangianFrame::from_basis_lenient(&(&a.a * &l.frame), 1e-6)
}

/// Complex symmetric unitary `W = U U^T`, independent of the frame chosen.
#[derive(Debug, Clone, PartialEq)]
pub struct SouriauMatrix {
    n: usize,
    w: DMatrix<Complex64>,
}

impl SouriauMatrix {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.w
    }

    pub fn eigenphases(&self) -> Vec<f64> {
        linalg::eigenphases(&self.w)
    }

    pub fn det(&self) -> Complex64 {
        linalg::complex_det(&self.w)
    }

    /// `W_1 conj(W_2)`; its eigenvalue 1 has multiplicity `dim(L_1 ∩ L_2)`.
    pub fn relative(&self, other: &SouriauMatrix) -> DMatrix<Complex64> {
        &self.w * other.w.map(|z| z.conj())
    }

    pub fn unitarity_residual(&self) -> f64 {
        let id = DMatrix::<Complex64>::identity(self.n, self.n);
        (self.w.adjoint() * &self.w - id).iter().fold(0.0, |a, z| a.max(z.norm()))
    }

    pub fn symmetry_residual(&self) -> f64 {
        (&self.w - self.w.transpose()).iter().fold(0.0, |a, z| a.max(z.norm()))
    }
}

/// `dim(L_1 ∩ L_2) = 2n - rank([F_1 | F_2])`, singular values below
/// `tol * sigma_max` counting as zero.
pub fn intersection_dimension(l1: &LagrangianFrame, l2: &LagrangianFrame, tol: f64) -> Result<usize> {
    if l1.n != l2.n {
        return Err(Error::DimensionMismatch { expected: l1.n, found: l2.n });
    }
    let mut m = DMatrix::zeros(2 * l1.n, 2 * l1.n);
    m.view_mut((0, 0), (2 * l1.n, l1.n)).copy_from(&l1.frame);
    m.view_mut((0, l1.n), (2 * l1.n, l1.n)).copy_from(&l2.frame);
    Ok(2 * l1.n - linalg::numerical_rank(&m, tol))
}

fn orthonormal_frame(f: &DMatrix<f64>) -> DMatrix<f64> {
    linalg::orthonormalize(f, 1e-12).0
}

fn projector_of(f: &DMatrix<f64>) -> DMatrix<f64> {
    let q = orthonormal_frame(f);
    &q * q.transpose()
}

/// Gap `‖P_1 - P_2‖` between the column spans of two frames of equal
/// ambient dimension (ranks may differ).
pub fn gap_distance<A: AsFrame + ?Sized, B: AsFrame + ?Sized>(l1: &A, l2: &B) -> Result<f64> {
    let (f1, f2) = (l1.frame(), l2.frame());
    if f1.nrows() != f2.nrows() {
        return Err(Error::DimensionMismatch { expected: f1.nrows(), found: f2.nrows() });
    }
    let d = projector_of(f1) - projector_of(f2);
    if d.nrows() == 0 {
        return Ok(0.0);
    }
    // symmetric: the 2-norm is the largest |eigenvalue|
    let eig = d.symmetric_eigenvalues();
    Ok(eig.iter().fold(0.0, |a, x| a.max(x.abs())))
}

/// `sup_{u in S_U} dist(u, V) = ‖(I - P_V) P_U‖`.
pub fn directed_gap<A: AsFrame + ?Sized, B: AsFrame + ?Sized>(u: &A, v: &B) -> Result<f64> {
    let (fu, fv) = (u.frame(), v.frame());
    if fu.nrows() != fv.nrows() {
        return Err(Error::DimensionMismatch { expected: fu.nrows(), found: fv.nrows() });
    }
    let qu = orthonormal_frame(fu);
    if qu.ncols() == 0 {
        return Err(Error::TrivialSubspace);
    }
    let qv = orthonormal_frame(fv);
    let residual = &qu - &qv * (qv.transpose() * &qu);
    Ok(linalg::spectral_norm(&residual))
}

/// Outcome of comparing `‖(I-P)Q‖`, `‖(I-Q)P‖` and `‖P-Q‖`.
#[derive(Debug, Clone, PartialEq)]
pub struct KatoReport {
    pub norm_complement_p_q: f64,
    pub norm_complement_q_p: f64,
    pub norm_difference: f64,
    /// Both one-sided norms are below 1.
    pub hypothesis_met: bool,
    /// Only meaningful when the hypothesis is met.
    pub identity_holds: bool,
}

pub const KATO_TOL: f64 = 1e-10;

pub fn kato_projection_identity_check(p: &DMatrix<f64>, q: &DMatrix<f64>) -> Result<KatoReport> {
    if p.shape() != q.shape() || p.nrows() != p.ncols() {
        return Err(Error::DimensionMismatch { expected: p.nrows(), found: q.nrows() });
    }
    for m in [p, q] {
        let residual = linalg::max_abs(&(m * m - m)).max(linalg::symmetry_residual(m));
        if residual > 1e-10 {
            return Err(Error::NotProjector { residual });
        }
    }
    let id = DMatrix::identity(p.nrows(), p.ncols());
    let a = linalg::spectral_norm(&((&id - p) * q));
    let b = linalg::spectral_norm(&((&id - q) * p));
    let c = linalg::spectral_norm(&(p - q));
    let hypothesis_met = a < 1.0 && b < 1.0;
    let identity_holds = hypothesis_met && (a - c).abs() <= KATO_TOL && (b - c).abs() <= KATO_TOL;
    Ok(KatoReport {
        norm_complement_p_q: a,
        norm_complement_q_p: b,
        norm_difference: c,
        hypothesis_met,
        identity_holds,
    })
}
