//! Analytic descriptions of paths `lambda -> L(lambda)` in the Lagrangian
//! Grassmannian, with an adaptively refined sample grid.

use crate::error::{Error, Result};
use crate::hamiltonian::{self, SymmetricFamily, DEFAULT_STEPS};
use crate::linalg;
use crate::serde_matrix;
use crate::symplectic::{gap_distance, j_matrix, LagrangianFrame};
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Largest gap allowed between consecutive grid samples.
pub const MAX_SAMPLE_GAP: f64 = 0.1;
pub const MAX_REFINEMENT_DEPTH: usize = 40;
const INITIAL_SAMPLES: usize = 16;
/// Finite-difference step for the local speed estimate.
const SPEED_STEP: f64 = 1e-6;
/// Isotropy slack for frames produced by numerically integrated matrices.
const LENIENT_ISOTROPY: f64 = 1e-6;

/// Continuous piecewise-linear function on `[0, 1]` given by `(x, value)`
/// knots with `x` strictly increasing from 0 to 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<[f64; 2]>", into = "Vec<[f64; 2]>")]
pub struct PiecewiseLinear {
    knots: Vec<[f64; 2]>,
}

impl TryFrom<Vec<[f64; 2]>> for PiecewiseLinear {
    type Error = Error;

    fn try_from(knots: Vec<[f64; 2]>) -> Result<Self> {
        Self::new(knots)
    }
}

impl From<PiecewiseLinear> for Vec<[f64; 2]> {
    fn from(p: PiecewiseLinear) -> Self {
        p.knots
    }
}

impl PiecewiseLinear {
    pub fn new(knots: Vec<[f64; 2]>) -> Result<Self> {
        if knots.len() < 2 {
            return Err(Error::InvalidPath("piecewise-linear function needs at least two knots".into()));
        }
        if knots.iter().flatten().any(|x| !x.is_finite()) {
            return Err(Error::InvalidPath("non-finite knot".into()));
        }
        if knots[0][0] != 0.0 || knots[knots.len() - 1][0] != 1.0 {
            return Err(Error::InvalidPath("knots must start at 0 and end at 1".into()));
        }
        if knots.windows(2).any(|w| w[1][0] <= w[0][0]) {
            return Err(Error::InvalidPath("knot abscissae must be strictly increasing".into()));
        }
        Ok(Self { knots })
    }

    pub fn constant(value: f64) -> Self {
        Self { knots: vec![[0.0, value], [1.0, value]] }
    }

    /// `a` at 0 to `b` at 1.
    pub fn linear(a: f64, b: f64) -> Self {
        Self { knots: vec![[0.0, a], [1.0, b]] }
    }

    pub fn knots(&self) -> &[[f64; 2]] {
        &self.knots
    }

    pub fn eval(&self, x: f64) -> f64 {
        let x = x.clamp(0.0, 1.0);
        let i = self.knots.partition_point(|k| k[0] <= x).clamp(1, self.knots.len() - 1);
        let ([x0, y0], [x1, y1]) = (self.knots[i - 1], self.knots[i]);
        if x1 == x0 {
            return y1;
        }
        let s = (x - x0) / (x1 - x0);
        y0 + s * (y1 - y0)
    }

    pub fn breakpoints(&self) -> Vec<f64> {
        self.knots.iter().map(|k| k[0]).collect()
    }

    pub fn values(&self) -> impl Iterator<Item = f64> + '_ {
        self.knots.iter().map(|k| k[1])
    }
}

fn default_steps() -> usize {
    DEFAULT_STEPS
}

/// How a path is generated. Serialized with a `kind` tag.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PathDescriptor {
    /// Constant subspace spanned by the columns of `basis` (`2n x n`).
    Constant {
        #[serde(with = "serde_matrix")]
        basis: DMatrix<f64>,
    },
    /// `diag(e^{i pi lambda}, 1, ..., 1) (R^n x {0})`.
    GammaNor { n: usize },
    /// `diag(-i e^{i pi lambda}, i, ..., i) (R^n x {0})`.
    GammaNorPrime { n: usize },
    /// `e^{theta(lambda) J} span(base)`.
    Rotation {
        #[serde(with = "serde_matrix")]
        base: DMatrix<f64>,
        theta: PiecewiseLinear,
    },
    /// `diag(e^{i theta_1(lambda)}, ..., e^{i theta_n(lambda)}) (R^n x {0})`.
    UnitaryDiagonal { phases: Vec<PiecewiseLinear> },
    /// `exp(J G(lambda)) base(lambda)` with `G(lambda) = sum_k lambda^k G_k`
    /// and every `G_k` symmetric.
    SymplecticAction {
        #[serde(with = "serde_matrix::vec")]
        generator: Vec<DMatrix<f64>>,
        base: Box<PathDescriptor>,
    },
    /// `Psi_lambda(1) base(lambda)` for the fundamental solution of `family`.
    HamiltonianEndpoint {
        family: SymmetricFamily,
        base: Box<PathDescriptor>,
        #[serde(default = "default_steps")]
        steps: usize,
    },
    /// `t -> Psi_lambda(t) span(base)` at a frozen `lambda`.
    HamiltonianTime {
        family: SymmetricFamily,
        lambda: f64,
        #[serde(with = "serde_matrix")]
        base: DMatrix<f64>,
        #[serde(default = "default_steps")]
        steps: usize,
    },
    /// Pieces traversed in order, each on an interval of length `1/m`.
    Concat { pieces: Vec<PathDescriptor> },
    /// `(first ⊕ second)(lambda)` in `R^{2(n1+n2)}`, positions before momenta.
    DirectSum { first: Box<PathDescriptor>, second: Box<PathDescriptor> },
    /// Image under `(x, y) -> (x, -y)`; conjugates the unitary representative.
    Conjugated { path: Box<PathDescriptor> },
    /// `lambda -> path(1 - lambda)`.
    Reversed { path: Box<PathDescriptor> },
    /// `lambda -> path(map(lambda))`; `map` must take values in `[0, 1]`.
    Reparametrized { path: Box<PathDescriptor>, map: PiecewiseLinear },
}

fn basis_dim(basis: &DMatrix<f64>) -> Result<usize> {
    Ok(LagrangianFrame::from_basis(basis)?.n())
}

impl PathDescriptor {
    pub fn constant(frame: &LagrangianFrame) -> Self {
        Self::Constant { basis: frame.matrix().clone() }
    }

    /// Checks the descriptor and returns its half-dimension `n`.
    pub fn validate(&self) -> Result<usize> {
        match self {
            Self::Constant { basis } => basis_dim(basis),
            Self::GammaNor { n } | Self::GammaNorPrime { n } => {
                if *n == 0 {
                    Err(Error::ZeroDimension)
                } else {
                    Ok(*n)
                }
            }
            Self::Rotation { base, .. } => basis_dim(base),
            Self::UnitaryDiagonal { phases } => {
                if phases.is_empty() {
                    Err(Error::ZeroDimension)
                } else {
                    Ok(phases.len())
                }
            }
            Self::SymplecticAction { generator, base } => {
                let n = base.validate()?;
                for g in generator {
                    if g.shape() != (2 * n, 2 * n) {
                        return Err(Error::DimensionMismatch { expected: 2 * n, found: g.nrows() });
                    }
                    let residual = linalg::symmetry_residual(g);
                    if residual > 1e-12 {
                        return Err(Error::NotSymmetric { residual });
                    }
                }
                Ok(n)
            }
            Self::HamiltonianEndpoint { family, base, steps } => {
                let n = base.validate()?;
                check_family(family, n, *steps)?;
                Ok(n)
            }
            Self::HamiltonianTime { family, lambda, base, steps } => {
                let n = basis_dim(base)?;
                check_family(family, n, *steps)?;
                if !(0.0..=1.0).contains(lambda) {
                    return Err(Error::InvalidPath(format!("frozen lambda {lambda} outside [0, 1]")));
                }
                Ok(n)
            }
            Self::Concat { pieces } => {
                let first = pieces.first().ok_or_else(|| Error::InvalidPath("empty concatenation".into()))?;
                let n = first.validate()?;
                for w in pieces.windows(2) {
                    let m = w[1].validate()?;
                    if m != n {
                        return Err(Error::DimensionMismatch { expected: n, found: m });
                    }
                    let gap = gap_distance(&w[0].eval(1.0)?, &w[1].eval(0.0)?)?;
                    if gap > 1e-8 {
                        return Err(Error::InvalidPath(format!("concatenation pieces do not meet (gap {gap:.3e})")));
                    }
                }
                Ok(n)
            }
            Self::DirectSum { first, second } => Ok(first.validate()? + second.validate()?),
            Self::Conjugated { path } | Self::Reversed { path } => path.validate(),
            Self::Reparametrized { path, map } => {
                if map.values().any(|v| !(0.0..=1.0).contains(&v)) {
                    return Err(Error::InvalidPath("reparametrization leaves [0, 1]".into()));
                }
                path.validate()
            }
        }
    }

    /// The subspace at `lambda` (clamped to `[0, 1]`).
    pub fn eval(&self, lambda: f64) -> Result<LagrangianFrame> {
        let lambda = lambda.clamp(0.0, 1.0);
        match self {
            Self::Constant { basis } => LagrangianFrame::from_basis(basis),
            Self::GammaNor { n } => {
                let mut phases = vec![0.0; *n];
                phases[0] = PI * lambda;
                Ok(diagonal_frame(&phases))
            }
            Self::GammaNorPrime { n } => {
                let mut phases = vec![PI / 2.0; *n];
                phases[0] = PI * lambda - PI / 2.0;
                Ok(diagonal_frame(&phases))
            }
            Self::Rotation { base, theta } => Ok(LagrangianFrame::from_basis(base)?.rotate(theta.eval(lambda))),
            Self::UnitaryDiagonal { phases } => {
                Ok(diagonal_frame(&phases.iter().map(|p| p.eval(lambda)).collect::<Vec<_>>()))
            }
            Self::SymplecticAction { generator, base } => {
                let l = base.eval(lambda)?;
                let n = l.n();
                let mut g = DMatrix::zeros(2 * n, 2 * n);
                for (k, gk) in generator.iter().enumerate() {
                    g += gk * lambda.powi(k as i32);
                }
                let a = (j_matrix(n) * g).exp();
                LagrangianFrame::from_basis_lenient(&(a * l.matrix()), LENIENT_ISOTROPY)
            }
            Self::HamiltonianEndpoint { family, base, steps } => {
                let l = base.eval(lambda)?;
                let psi = hamiltonian::psi(family, lambda, 1.0, *steps);
                LagrangianFrame::from_basis_lenient(&(psi * l.matrix()), LENIENT_ISOTROPY)
            }
            Self::HamiltonianTime { family, lambda: frozen, base, steps } => {
                let psi = hamiltonian::psi(family, *frozen, lambda, *steps);
                LagrangianFrame::from_basis_lenient(&(psi * base), LENIENT_ISOTROPY)
            }
            Self::Concat { pieces } => {
                let m = pieces.len();
                let k = ((lambda * m as f64).floor() as usize).min(m - 1);
                pieces[k].eval(lambda * m as f64 - k as f64)
            }
            Self::DirectSum { first, second } => {
                let (a, b) = (first.eval(lambda)?, second.eval(lambda)?);
                let (n1, n2) = (a.n(), b.n());
                let n = n1 + n2;
                let mut f = DMatrix::zeros(2 * n, n);
                f.view_mut((0, 0), (n1, n1)).copy_from(&a.matrix().rows(0, n1));
                f.view_mut((n, 0), (n1, n1)).copy_from(&a.matrix().rows(n1, n1));
                f.view_mut((n1, n1), (n2, n2)).copy_from(&b.matrix().rows(0, n2));
                f.view_mut((n + n1, n1), (n2, n2)).copy_from(&b.matrix().rows(n2, n2));
                LagrangianFrame::from_orthonormal(f)
            }
            Self::Conjugated { path } => {
                let l = path.eval(lambda)?;
                let n = l.n();
                let mut f = l.matrix().clone();
                f.rows_mut(n, n).neg_mut();
                LagrangianFrame::from_orthonormal(f)
            }
            Self::Reversed { path } => path.eval(1.0 - lambda),
            Self::Reparametrized { path, map } => path.eval(map.eval(lambda)),
        }
    }

    /// Parameter values where the description changes regime.
    pub fn breakpoints(&self) -> Vec<f64> {
        let mut pts = match self {
            Self::Rotation { theta, .. } => theta.breakpoints(),
            Self::UnitaryDiagonal { phases } => phases.iter().flat_map(|p| p.breakpoints()).collect(),
            Self::SymplecticAction { base, .. } | Self::HamiltonianEndpoint { base, .. } => base.breakpoints(),
            Self::DirectSum { first, second } => {
                let mut b = first.breakpoints();
                b.extend(second.breakpoints());
                b
            }
            Self::Conjugated { path } => path.breakpoints(),
            Self::Concat { pieces } => {
                let m = pieces.len() as f64;
                pieces
                    .iter()
                    .enumerate()
                    .flat_map(|(k, p)| p.breakpoints().into_iter().map(move |x| (k as f64 + x) / m))
                    .collect()
            }
            Self::Reversed { path } => path.breakpoints().into_iter().map(|x| 1.0 - x).collect(),
            Self::Reparametrized { map, .. } => map.breakpoints(),
            _ => Vec::new(),
        };
        pts.push(0.0);
        pts.push(1.0);
        pts.retain(|x| (0.0..=1.0).contains(x));
        pts.sort_by(f64::total_cmp);
        pts.dedup_by(|a, b| (*a - *b).abs() < 1e-15);
        pts
    }
}

fn check_family(family: &SymmetricFamily, n: usize, steps: usize) -> Result<()> {
    if family.n() != n {
        return Err(Error::DimensionMismatch { expected: n, found: family.n() });
    }
    if steps < hamiltonian::MIN_FUNDAMENTAL_STEPS {
        return Err(Error::TooFewSteps { steps, min: hamiltonian::MIN_FUNDAMENTAL_STEPS });
    }
    Ok(())
}

fn diagonal_frame(phases: &[f64]) -> LagrangianFrame {
    let n = phases.len();
    let mut f = DMatrix::zeros(2 * n, n);
    for (j, &p) in phases.iter().enumerate() {
        let (s, c) = p.sin_cos();
        f[(j, j)] = c;
        f[(n + j, j)] = s;
    }
    LagrangianFrame::from_orthonormal(f).expect("diagonal unitary frame")
}

/// A path in the Lagrangian Grassmannian together with a sample grid on
/// which consecutive subspaces are at most [`MAX_SAMPLE_GAP`] apart.
#[derive(Debug, Clone, PartialEq)]
pub struct LagrangianPath {
    n: usize,
    descriptor: PathDescriptor,
    grid: Vec<f64>,
}

impl LagrangianPath {
    pub fn new(descriptor: PathDescriptor) -> Result<Self> {
        let n = descriptor.validate()?;
        let grid = refine_grid(&descriptor)?;
        Ok(Self { n, descriptor, grid })
    }

    pub fn constant(frame: &LagrangianFrame) -> Self {
        Self { n: frame.n(), descriptor: PathDescriptor::constant(frame), grid: vec![0.0, 1.0] }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn descriptor(&self) -> &PathDescriptor {
        &self.descriptor
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn at(&self, lambda: f64) -> Result<LagrangianFrame> {
        self.descriptor.eval(lambda)
    }

    pub fn start(&self) -> Result<LagrangianFrame> {
        self.at(0.0)
    }

    pub fn end(&self) -> Result<LagrangianFrame> {
        self.at(1.0)
    }

    pub fn is_constant(&self) -> bool {
        matches!(self.descriptor, PathDescriptor::Constant { .. })
    }

    pub fn direct_sum(&self, other: &Self) -> Result<Self> {
        Self::new(PathDescriptor::DirectSum {
            first: Box::new(self.descriptor.clone()),
            second: Box::new(other.descriptor.clone()),
        })
    }

    pub fn conjugated(&self) -> Result<Self> {
        Self::new(PathDescriptor::Conjugated { path: Box::new(self.descriptor.clone()) })
    }

    pub fn reversed(&self) -> Result<Self> {
        Self::new(PathDescriptor::Reversed { path: Box::new(self.descriptor.clone()) })
    }

    /// `self * other`; `self(1)` must equal `other(0)`.
    pub fn concat(&self, other: &Self) -> Result<Self> {
        Self::new(PathDescriptor::Concat { pieces: vec![self.descriptor.clone(), other.descriptor.clone()] })
    }

    pub fn reparametrized(&self, map: PiecewiseLinear) -> Result<Self> {
        Self::new(PathDescriptor::Reparametrized { path: Box::new(self.descriptor.clone()), map })
    }

    /// `lambda -> exp(J G(lambda)) self(lambda)`.
    pub fn acted_on(&self, generator: Vec<DMatrix<f64>>) -> Result<Self> {
        Self::new(PathDescriptor::SymplecticAction { generator, base: Box::new(self.descriptor.clone()) })
    }
}

/// Gap travelled per unit parameter just inside `[a, b]`, measured at `a`
/// (forward) and `b` (backward).
fn edge_speeds(d: &PathDescriptor, a: (f64, &LagrangianFrame), b: (f64, &LagrangianFrame)) -> Result<f64> {
    let h = SPEED_STEP.min(0.25 * (b.0 - a.0));
    let fwd = gap_distance(a.1, &d.eval(a.0 + h)?)?;
    let bwd = gap_distance(&d.eval(b.0 - h)?, b.1)?;
    Ok(fwd.max(bwd) / h)
}

/// Accepts `[a, b]` when the endpoint gap, the two half gaps, and the local
/// speed extrapolated over the interval all stay below [`MAX_SAMPLE_GAP`].
/// The gap alone cannot see a half turn of a line between the samples.
fn interval_resolved(d: &PathDescriptor, a: (f64, &LagrangianFrame), b: (f64, &LagrangianFrame)) -> Result<bool> {
    if gap_distance(a.1, b.1)? > MAX_SAMPLE_GAP {
        return Ok(false);
    }
    if (b.0 - a.0) * edge_speeds(d, a, b)? > MAX_SAMPLE_GAP {
        return Ok(false);
    }
    let m = d.eval(0.5 * (a.0 + b.0))?;
    Ok(gap_distance(a.1, &m)? <= MAX_SAMPLE_GAP && gap_distance(&m, b.1)? <= MAX_SAMPLE_GAP)
}

fn refine_grid(descriptor: &PathDescriptor) -> Result<Vec<f64>> {
    let mut seeds = descriptor.breakpoints();
    seeds.extend((0..=INITIAL_SAMPLES).map(|k| k as f64 / INITIAL_SAMPLES as f64));
    seeds.sort_by(f64::total_cmp);
    seeds.dedup_by(|a, b| (*a - *b).abs() < 1e-12);

    let mut grid = vec![seeds[0]];
    let mut prev = descriptor.eval(seeds[0])?;
    for &next_seed in &seeds[1..] {
        // depth-first bisection of [grid.last, next_seed]
        let mut stack = vec![(next_seed, 0usize)];
        while let Some(&(b, depth)) = stack.last() {
            let a = *grid.last().expect("nonempty");
            let fb = descriptor.eval(b)?;
            if interval_resolved(descriptor, (a, &prev), (b, &fb))? {
                grid.push(b);
                prev = fb;
                stack.pop();
            } else if depth >= MAX_REFINEMENT_DEPTH {
                return Err(Error::RefinementFailed { lambda: a, depth });
            } else {
                stack.push((0.5 * (a + b), depth + 1));
            }
        }
    }
    Ok(grid)
}
