use super::family::{SymmetricFamily, TimeProfile};
use crate::error::{Error, Result};
use crate::symplectic::{symplectic_residual, SymplecticMatrix};
use nalgebra::DMatrix;

pub const DEFAULT_STEPS: usize = 256;
pub const MIN_FUNDAMENTAL_STEPS: usize = 64;
/// Drift of `Psi^T J Psi - J` beyond which integration is rejected.
pub const DRIFT_LIMIT: f64 = 1e-6;

/// `J M`: rows `[-M_bottom; M_top]`.
fn j_times(m: &DMatrix<f64>) -> DMatrix<f64> {
    let n = m.nrows() / 2;
    DMatrix::from_fn(m.nrows(), m.ncols(), |i, j| if i < n { -m[(i + n, j)] } else { m[(i - n, j)] })
}

/// `cos(phi) I + sin(phi) J`.
pub fn rotation_matrix(n: usize, phi: f64) -> DMatrix<f64> {
    let (s, c) = phi.sin_cos();
    let mut r = DMatrix::identity(2 * n, 2 * n) * c;
    for i in 0..n {
        r[(i, n + i)] = -s;
        r[(n + i, i)] = s;
    }
    r
}

/// Coefficient `J (S(t) - mu I)` of the linear system `u' = J (S - mu) u`,
/// which is `J u' + S u = mu u` solved for `u'` using `J^{-1} = -J`.
fn coefficient(profile: &TimeProfile, mu: f64, t: f64) -> DMatrix<f64> {
    let mut s = profile.eval(t);
    for i in 0..s.nrows() {
        s[(i, i)] -= mu;
    }
    j_times(&s)
}

fn rk4_step(profile: &TimeProfile, mu: f64, t: f64, h: f64, phi: &DMatrix<f64>) -> DMatrix<f64> {
    let a0 = coefficient(profile, mu, t);
    let am = coefficient(profile, mu, t + 0.5 * h);
    let a1 = coefficient(profile, mu, t + h);
    let k1 = &a0 * phi;
    let k2 = &am * (phi + &k1 * (0.5 * h));
    let k3 = &am * (phi + &k2 * (0.5 * h));
    let k4 = &a1 * (phi + &k3 * h);
    phi + (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0)
}

/// `Phi(t_end)` for `Phi' = J (S(t) - mu I) Phi`, `Phi(0) = I`, by classical
/// RK4 with step `1/steps` (plus one partial step to land on `t_end`).
///
/// For `S = 0` the exact value `exp(-mu t J) = cos(mu t) I - sin(mu t) J` is
/// returned.
pub fn propagate(profile: &TimeProfile, mu: f64, t_end: f64, steps: usize) -> DMatrix<f64> {
    let n = profile.n();
    if profile.is_zero() {
        return rotation_matrix(n, -mu * t_end);
    }
    let h = 1.0 / steps as f64;
    let full = ((t_end / h).floor() as usize).min(steps);
    let mut phi = DMatrix::identity(2 * n, 2 * n);
    for k in 0..full {
        phi = rk4_step(profile, mu, k as f64 * h, h, &phi);
    }
    let rest = t_end - full as f64 * h;
    if rest > 1e-15 {
        phi = rk4_step(profile, mu, full as f64 * h, rest, &phi);
    }
    phi
}

/// `y += a x`
fn axpy(y: &mut DMatrix<f64>, a: f64, x: &DMatrix<f64>) {
    y.iter_mut().zip(x.iter()).for_each(|(y, x)| *y += a * x);
}

/// `Phi_mu(1)` for many `mu` at a frozen `lambda`: caches `J S(t)` at the RK4
/// nodes and reuses the stage buffers. Same scheme as [`propagate`].
#[derive(Debug, Clone)]
pub struct Propagator {
    n: usize,
    steps: usize,
    /// `J S(k h / 2)` for `k = 0..=2 steps`; empty when `S = 0`.
    nodes: Vec<DMatrix<f64>>,
}

impl Propagator {
    pub fn new(profile: &TimeProfile, steps: usize) -> Self {
        let h = 1.0 / steps as f64;
        let nodes = if profile.is_zero() {
            Vec::new()
        } else {
            (0..=2 * steps).map(|k| j_times(&profile.eval(0.5 * h * k as f64))).collect()
        };
        Self { n: profile.n(), steps, nodes }
    }

    pub fn transfer(&self, mu: f64) -> DMatrix<f64> {
        let n = self.n;
        if self.nodes.is_empty() {
            return rotation_matrix(n, -mu);
        }
        let d = 2 * n;
        let h = 1.0 / self.steps as f64;
        let mut phi = DMatrix::identity(d, d);
        let mut coef = [DMatrix::zeros(d, d), DMatrix::zeros(d, d), DMatrix::zeros(d, d)];
        let (mut k1, mut k2, mut k3, mut k4) = (DMatrix::zeros(d, d), DMatrix::zeros(d, d), DMatrix::zeros(d, d), DMatrix::zeros(d, d));
        let mut tmp = DMatrix::zeros(d, d);
        for k in 0..self.steps {
            for (c, node) in coef.iter_mut().zip(&self.nodes[2 * k..=2 * k + 2]) {
                c.copy_from(node);
                // - mu J
                for i in 0..n {
                    c[(i, n + i)] += mu;
                    c[(n + i, i)] -= mu;
                }
            }
            k1.gemm(1.0, &coef[0], &phi, 0.0);
            tmp.copy_from(&phi);
            axpy(&mut tmp, 0.5 * h, &k1);
            k2.gemm(1.0, &coef[1], &tmp, 0.0);
            tmp.copy_from(&phi);
            axpy(&mut tmp, 0.5 * h, &k2);
            k3.gemm(1.0, &coef[1], &tmp, 0.0);
            tmp.copy_from(&phi);
            axpy(&mut tmp, h, &k3);
            k4.gemm(1.0, &coef[2], &tmp, 0.0);
            axpy(&mut k2, 1.0, &k3);
            axpy(&mut k1, 2.0, &k2);
            k1 += &k4;
            axpy(&mut phi, h / 6.0, &k1);
        }
        phi
    }
}

/// `Psi_lambda(t)` solving `J Psi' + S_lambda Psi = 0`, `Psi(0) = I`.
pub fn psi(family: &SymmetricFamily, lambda: f64, t: f64, steps: usize) -> DMatrix<f64> {
    propagate(&family.at_lambda(lambda), 0.0, t, steps)
}

/// Samples of `Psi_lambda` on the uniform grid `t_k = k / steps`.
#[derive(Debug, Clone)]
pub struct FundamentalSolution {
    pub lambda: f64,
    pub steps: usize,
    pub samples: Vec<(f64, SymplecticMatrix)>,
}

impl FundamentalSolution {
    pub fn at_end(&self) -> &SymplecticMatrix {
        &self.samples.last().expect("nonempty").1
    }

    pub fn max_drift(&self) -> f64 {
        self.samples.iter().map(|(_, m)| symplectic_residual(m.matrix())).fold(0.0, f64::max)
    }
}

pub fn fundamental_solution(family: &SymmetricFamily, lambda: f64, steps: usize) -> Result<FundamentalSolution> {
    if steps < MIN_FUNDAMENTAL_STEPS {
        return Err(Error::TooFewSteps { steps, min: MIN_FUNDAMENTAL_STEPS });
    }
    let profile = family.at_lambda(lambda);
    let n = family.n();
    let h = 1.0 / steps as f64;
    let mut phi = DMatrix::identity(2 * n, 2 * n);
    let mut samples = Vec::with_capacity(steps + 1);
    samples.push((0.0, SymplecticMatrix::identity(n)));
    for k in 0..steps {
        phi = if profile.is_zero() { phi } else { rk4_step(&profile, 0.0, k as f64 * h, h, &phi) };
        let drift = symplectic_residual(&phi);
        if drift > DRIFT_LIMIT {
            return Err(Error::IntegrationDrift { drift });
        }
        let t = (k + 1) as f64 * h;
        samples.push((t, SymplecticMatrix::with_tolerance(phi.clone(), DRIFT_LIMIT)?));
    }
    Ok(FundamentalSolution { lambda, steps, samples })
}
