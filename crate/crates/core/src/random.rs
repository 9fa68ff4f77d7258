//! Seeded generators for randomized test suites.

use crate::hamiltonian::{SymmetricFamily, SymmetricTerm};
use crate::path::{PathDescriptor, PiecewiseLinear};
use crate::symplectic::{LagrangianFrame, SymplecticMatrix};
use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use std::f64::consts::PI;

pub fn gaussian<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    rng.sample(StandardNormal)
}

pub fn orthogonal<R: Rng + ?Sized>(rng: &mut R, n: usize) -> DMatrix<f64> {
    let g = DMatrix::from_fn(n, n, |_, _| gaussian(rng));
    let qr = g.qr();
    let (q, r) = (qr.q(), qr.r());
    let signs = DMatrix::from_fn(n, n, |i, j| if i == j && r[(i, i)] < 0.0 { -1.0 } else if i == j { 1.0 } else { 0.0 });
    q * signs
}

/// Haar-distributed unitary matrix.
pub fn unitary<R: Rng + ?Sized>(rng: &mut R, n: usize) -> DMatrix<Complex64> {
    let g = DMatrix::from_fn(n, n, |_, _| Complex64::new(gaussian(rng), gaussian(rng)));
    let qr = g.qr();
    let (q, r) = (qr.q(), qr.r());
    let phases = DMatrix::from_fn(n, n, |i, j| {
        if i == j {
            let d = r[(i, i)];
            if d.norm() > 0.0 {
                d / d.norm()
            } else {
                Complex64::new(1.0, 0.0)
            }
        } else {
            Complex64::new(0.0, 0.0)
        }
    });
    q * phases
}

pub fn lagrangian_frame<R: Rng + ?Sized>(rng: &mut R, n: usize) -> LagrangianFrame {
    LagrangianFrame::from_unitary(&unitary(rng, n)).expect("unitary columns give a Lagrangian frame")
}

/// A Lagrangian subspace meeting `base` in exactly `k` dimensions, with the
/// remaining relative eigenphases kept away from zero.
pub fn lagrangian_with_intersection<R: Rng + ?Sized>(rng: &mut R, base: &LagrangianFrame, k: usize) -> LagrangianFrame {
    let n = base.n();
    let o = orthogonal(rng, n).map(|x| Complex64::new(x, 0.0));
    let d = DMatrix::from_fn(n, n, |i, j| {
        if i != j {
            Complex64::new(0.0, 0.0)
        } else if i < k {
            Complex64::new(1.0, 0.0)
        } else {
            Complex64::from_polar(1.0, rng.random_range(0.3..PI - 0.3))
        }
    });
    let u = base.unitary_representative() * o * d;
    LagrangianFrame::from_unitary(&u).expect("unitary")
}

pub fn symmetric<R: Rng + ?Sized>(rng: &mut R, dim: usize, scale: f64) -> DMatrix<f64> {
    let g = DMatrix::from_fn(dim, dim, |_, _| gaussian(rng) * scale);
    (&g + g.transpose()) * 0.5
}

/// `exp(J H)` for a random symmetric `H` of the given scale.
pub fn symplectic<R: Rng + ?Sized>(rng: &mut R, n: usize, scale: f64) -> SymplecticMatrix {
    SymplecticMatrix::exp_hamiltonian(&symmetric(rng, 2 * n, scale)).expect("exp of a Hamiltonian matrix")
}

/// Continuous piecewise-linear function with `interior` random knots and
/// values uniform in `[-amplitude, amplitude]`.
pub fn piecewise_linear<R: Rng + ?Sized>(rng: &mut R, interior: usize, amplitude: f64) -> PiecewiseLinear {
    let mut xs: Vec<f64> = (0..interior).map(|_| rng.random_range(0.05..0.95)).collect();
    xs.sort_by(f64::total_cmp);
    xs.dedup_by(|a, b| (*a - *b).abs() < 1e-3);
    let mut knots = vec![[0.0, rng.random_range(-amplitude..=amplitude)]];
    knots.extend(xs.into_iter().map(|x| [x, rng.random_range(-amplitude..=amplitude)]));
    knots.push([1.0, rng.random_range(-amplitude..=amplitude)]);
    PiecewiseLinear::new(knots).expect("sorted knots")
}

/// Monotone piecewise-linear bijection of `[0, 1]`.
pub fn monotone_map<R: Rng + ?Sized>(rng: &mut R, interior: usize) -> PiecewiseLinear {
    let mut xs: Vec<f64> = (0..interior).map(|_| rng.random_range(0.05..0.95)).collect();
    let mut ys: Vec<f64> = (0..interior).map(|_| rng.random_range(0.05..0.95)).collect();
    xs.sort_by(f64::total_cmp);
    ys.sort_by(f64::total_cmp);
    let mut knots = vec![[0.0, 0.0]];
    for (x, y) in xs.into_iter().zip(ys) {
        if x - knots[knots.len() - 1][0] > 1e-3 && y - knots[knots.len() - 1][1] > 1e-3 {
            knots.push([x, y]);
        }
    }
    knots.push([1.0, 1.0]);
    PiecewiseLinear::new(knots).expect("monotone knots")
}

pub fn rotation_path<R: Rng + ?Sized>(rng: &mut R, n: usize) -> PathDescriptor {
    PathDescriptor::Rotation {
        base: lagrangian_frame(rng, n).matrix().clone(),
        theta: piecewise_linear(rng, 2, 2.0),
    }
}

pub fn unitary_diagonal_path<R: Rng + ?Sized>(rng: &mut R, n: usize) -> PathDescriptor {
    PathDescriptor::UnitaryDiagonal { phases: (0..n).map(|_| piecewise_linear(rng, 2, 3.0)).collect() }
}

/// Polynomial generator `sum_k lambda^k G_k` of degree at most 2.
pub fn generator<R: Rng + ?Sized>(rng: &mut R, n: usize, scale: f64) -> Vec<DMatrix<f64>> {
    let degree = rng.random_range(1..=2);
    (0..=degree).map(|_| symmetric(rng, 2 * n, scale)).collect()
}

pub fn symplectic_action_path<R: Rng + ?Sized>(rng: &mut R, n: usize) -> PathDescriptor {
    let base = PathDescriptor::Constant { basis: lagrangian_frame(rng, n).matrix().clone() };
    PathDescriptor::SymplecticAction { generator: generator(rng, n, 0.7), base: Box::new(base) }
}

/// One of the rotation, unitary-diagonal and symplectic-action families.
pub fn path<R: Rng + ?Sized>(rng: &mut R, n: usize) -> PathDescriptor {
    match rng.random_range(0..3) {
        0 => rotation_path(rng, n),
        1 => unitary_diagonal_path(rng, n),
        _ => symplectic_action_path(rng, n),
    }
}

/// A path starting at a subspace that meets `start_partner` in exactly `k`
/// dimensions.
pub fn path_meeting<R: Rng + ?Sized>(rng: &mut R, start_partner: &LagrangianFrame, k: usize) -> PathDescriptor {
    let n = start_partner.n();
    let start = lagrangian_with_intersection(rng, start_partner, k);
    let mut g = generator(rng, n, 0.7);
    g[0].fill(0.0);
    PathDescriptor::SymplecticAction { generator: g, base: Box::new(PathDescriptor::Constant { basis: start.matrix().clone() }) }
}

/// A closed path: rotation or unitary-diagonal phases whose total change is a
/// multiple of `pi` (so the subspace returns to its start).
pub fn loop_path<R: Rng + ?Sized>(rng: &mut R, n: usize) -> PathDescriptor {
    let closed = |rng: &mut R| {
        let p = piecewise_linear(rng, 2, 2.0);
        let mut knots = p.knots().to_vec();
        let last = knots.len() - 1;
        knots[last][1] = knots[0][1] + PI * f64::from(rng.random_range(-1i32..=1));
        PiecewiseLinear::new(knots).expect("same abscissae")
    };
    if rng.random_bool(0.5) {
        PathDescriptor::Rotation { base: lagrangian_frame(rng, n).matrix().clone(), theta: closed(rng) }
    } else {
        PathDescriptor::UnitaryDiagonal { phases: (0..n).map(|_| closed(rng)).collect() }
    }
}

/// Piecewise-linear `alpha, beta` with `beta = alpha + lambda`, both into
/// `[0, 1]`: knots of `alpha` are drawn in the triangle `0 <= alpha <= 1 - lambda`,
/// which is convex, so the interpolants stay inside.
pub fn alpha_beta<R: Rng + ?Sized>(rng: &mut R, interior: usize) -> (PiecewiseLinear, PiecewiseLinear) {
    let mut xs: Vec<f64> = (0..interior).map(|_| rng.random_range(0.05..0.95)).collect();
    xs.sort_by(f64::total_cmp);
    xs.dedup_by(|a, b| (*a - *b).abs() < 1e-3);
    let mut alpha = vec![[0.0, rng.random_range(0.0..=1.0)]];
    alpha.extend(xs.into_iter().map(|x| [x, rng.random_range(0.0..=1.0 - x)]));
    alpha.push([1.0, 0.0]);
    let beta = alpha.iter().map(|&[x, a]| [x, a + x]).collect();
    (PiecewiseLinear::new(alpha).expect("sorted knots"), PiecewiseLinear::new(beta).expect("sorted knots"))
}

/// Polynomial family with monomials `lambda^a t^b`, `a + b <= degree`, whose
/// term norms add up to at most `sup_bound`.
pub fn symmetric_family<R: Rng + ?Sized>(rng: &mut R, n: usize, degree: u32, sup_bound: f64) -> SymmetricFamily {
    let mut terms = Vec::new();
    for a in 0..=degree {
        for b in 0..=degree - a {
            terms.push(SymmetricTerm { lambda_power: a, t_power: b, matrix: symmetric(rng, 2 * n, 1.0) });
        }
    }
    let total: f64 = terms.iter().map(|t| t.matrix.norm()).sum();
    let scale = sup_bound * rng.random_range(0.3..1.0) / total.max(1e-300);
    for t in &mut terms {
        t.matrix *= scale;
    }
    SymmetricFamily::new(n, terms).expect("symmetric terms")
}
