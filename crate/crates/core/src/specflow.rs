//! Spectra and spectral flow of `A_lambda u = J u' + S_lambda(t) u` on
//! `[0, 1]` with `u(0) ∈ gamma_1(lambda)`, `u(1) ∈ gamma_2(lambda)`.
//!
//! `mu` is an eigenvalue exactly when the shooting image `Phi_mu(1) gamma_1`
//! meets `gamma_2`, where `Phi_mu` solves `u' = J (S - mu) u`. Roots are
//! bracketed by counting eigenphases of `C(mu) = W(Phi_mu(1) gamma_1)
//! conj(W(gamma_2))` through 1; these crossings all run in the same
//! (decreasing) direction, so the count is the number of eigenvalues with
//! multiplicity.

use crate::crossing::{self, PhaseFamily, PhaseSample};
use crate::error::{Error, Result};
use crate::hamiltonian::{propagate, Propagator, SymmetricFamily, TimeProfile, DEFAULT_STEPS};
use crate::linalg;
use crate::path::LagrangianPath;
use crate::symplectic::{gap_distance, j_matrix, LagrangianFrame};
use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

pub const MIN_TRANSFER_STEPS: usize = 16;
pub const DEFAULT_TOL: f64 = 1e-8;
/// Bisection width for eigenvalues.
pub const ROOT_WIDTH: f64 = 1e-10;
/// Eigenvalues this close to 0 are reported as exactly 0.
pub const ZERO_SNAP: f64 = 1e-9;
/// Relative singular-value threshold for the detector multiplicity.
pub const MULTIPLICITY_TOL: f64 = 1e-6;
const LENIENT_ISOTROPY: f64 = 1e-6;

/// Operator family `A_lambda = J d/dt + S_lambda(t)` with Lagrangian
/// boundary conditions.
#[derive(Debug, Clone)]
pub struct BoundaryValueFamily {
    gamma1: LagrangianPath,
    gamma2: LagrangianPath,
    potential: SymmetricFamily,
    steps: usize,
}

impl BoundaryValueFamily {
    pub fn new(gamma1: LagrangianPath, gamma2: LagrangianPath, potential: SymmetricFamily) -> Result<Self> {
        let n = gamma1.n();
        for m in [gamma2.n(), potential.n()] {
            if m != n {
                return Err(Error::DimensionMismatch { expected: n, found: m });
            }
        }
        Ok(Self { gamma1, gamma2, potential, steps: DEFAULT_STEPS })
    }

    /// `S = 0`: the operators `J d/dt`.
    pub fn unperturbed(gamma1: LagrangianPath, gamma2: LagrangianPath) -> Result<Self> {
        let n = gamma1.n();
        Self::new(gamma1, gamma2, SymmetricFamily::zero(n))
    }

    pub fn with_steps(mut self, steps: usize) -> Result<Self> {
        if steps < MIN_TRANSFER_STEPS {
            return Err(Error::TooFewSteps { steps, min: MIN_TRANSFER_STEPS });
        }
        self.steps = steps;
        Ok(self)
    }

    pub fn n(&self) -> usize {
        self.gamma1.n()
    }

    pub fn gamma1(&self) -> &LagrangianPath {
        &self.gamma1
    }

    pub fn gamma2(&self) -> &LagrangianPath {
        &self.gamma2
    }

    pub fn potential(&self) -> &SymmetricFamily {
        &self.potential
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    /// `A + delta I`.
    pub fn shifted(&self, delta: f64) -> Self {
        Self { potential: self.potential.shifted(delta), ..self.clone() }
    }

    /// Union of the two path grids and 17 uniform points.
    pub fn default_grid(&self) -> Vec<f64> {
        let mut g: Vec<f64> = self.gamma1.grid().iter().chain(self.gamma2.grid()).copied().collect();
        g.extend((0..=16).map(|k| k as f64 / 16.0));
        sort_unique(g)
    }

    /// Scan step for roots in `mu`: `pi/8` shrunk by the size of `S`.
    fn scan_step(&self) -> f64 {
        PI / 8.0 / (1.0 + self.potential.sup_norm_bound())
    }
}

fn sort_unique(mut g: Vec<f64>) -> Vec<f64> {
    g.retain(|x| (0.0..=1.0).contains(x));
    g.push(0.0);
    g.push(1.0);
    g.sort_by(f64::total_cmp);
    g.dedup_by(|a, b| (*a - *b).abs() < 1e-14);
    g
}

/// `Phi_mu(1)` for `u' = J (S(t) - mu) u`, `Phi(0) = I`.
pub fn transfer_matrix(profile: &TimeProfile, mu: f64, steps: usize) -> Result<DMatrix<f64>> {
    if steps < MIN_TRANSFER_STEPS {
        return Err(Error::TooFewSteps { steps, min: MIN_TRANSFER_STEPS });
    }
    Ok(propagate(profile, mu, 1.0, steps))
}

/// The family frozen at one `lambda`, as a function of `mu`.
struct Slice {
    l1: LagrangianFrame,
    l2: LagrangianFrame,
    w2_conj: DMatrix<Complex64>,
    propagator: Propagator,
}

impl Slice {
    fn new(fam: &BoundaryValueFamily, lambda: f64) -> Result<Self> {
        let l1 = fam.gamma1.at(lambda)?;
        let l2 = fam.gamma2.at(lambda)?;
        let w2_conj = l2.souriau().matrix().map(|z| z.conj());
        Ok(Self { l1, l2, w2_conj, propagator: Propagator::new(&fam.potential.at_lambda(lambda), fam.steps) })
    }

    fn shot(&self, mu: f64) -> Result<LagrangianFrame> {
        let phi = self.propagator.transfer(mu);
        LagrangianFrame::from_basis_lenient(&(phi * self.l1.matrix()), LENIENT_ISOTROPY)
    }

    fn detector_singular_values(&self, mu: f64) -> Result<Vec<f64>> {
        let shot = self.shot(mu)?;
        let n = self.l1.n();
        let mut m = DMatrix::zeros(2 * n, 2 * n);
        m.columns_mut(0, n).copy_from(shot.matrix());
        m.columns_mut(n, n).copy_from(self.l2.matrix());
        Ok(linalg::singular_values(&m))
    }

    fn detector(&self, mu: f64) -> Result<f64> {
        Ok(*self.detector_singular_values(mu)?.last().expect("nonempty"))
    }
}

impl PhaseFamily for Slice {
    fn sample(&self, mu: f64) -> Result<PhaseSample> {
        let w1 = self.shot(mu)?.souriau();
        Ok(PhaseSample::new(mu, w1.matrix() * &self.w2_conj))
    }
}

/// Smallest singular value of `[frame(Phi_mu(1) gamma_1(lambda)) | frame(gamma_2(lambda))]`;
/// zero exactly at eigenvalues.
pub fn eigen_detector(fam: &BoundaryValueFamily, lambda: f64, mu: f64) -> Result<f64> {
    Slice::new(fam, lambda)?.detector(mu)
}

/// Number of detector singular values below `MULTIPLICITY_TOL * sigma_max`.
pub fn detector_multiplicity(fam: &BoundaryValueFamily, lambda: f64, mu: f64) -> Result<usize> {
    let sv = Slice::new(fam, lambda)?.detector_singular_values(mu)?;
    Ok(sv.iter().filter(|&&s| s < MULTIPLICITY_TOL * sv[0]).count())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Eigenvalue {
    pub mu: f64,
    pub multiplicity: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumWindow {
    pub lambda: f64,
    pub mu_min: f64,
    pub mu_max: f64,
    pub eigenvalues: Vec<Eigenvalue>,
}

impl SpectrumWindow {
    /// Eigenvalues in `[lo, hi]` counted with multiplicity.
    pub fn count_in(&self, lo: f64, hi: f64) -> usize {
        self.eigenvalues.iter().filter(|e| (lo..=hi).contains(&e.mu)).map(|e| e.multiplicity).sum()
    }

    pub fn total(&self) -> usize {
        self.eigenvalues.iter().map(|e| e.multiplicity).sum()
    }
}

/// All eigenvalues of `A_lambda` in `(mu_min, mu_max)` with multiplicities.
/// Fails if either endpoint is (numerically) an eigenvalue.
pub fn spectrum_window(fam: &BoundaryValueFamily, lambda: f64, mu_min: f64, mu_max: f64, tol: f64) -> Result<SpectrumWindow> {
    if !(mu_min < mu_max) || !mu_min.is_finite() || !mu_max.is_finite() {
        return Err(Error::InvalidWindow { mu_min, mu_max });
    }
    let slice = Slice::new(fam, lambda)?;
    for mu in [mu_min, mu_max] {
        let detector = slice.detector(mu)?;
        if detector <= 10.0 * tol {
            return Err(Error::WindowEndpointIsEigenvalue { mu, detector });
        }
    }
    let cells = ((mu_max - mu_min) / fam.scan_step()).ceil().max(1.0) as usize;
    let grid: Vec<f64> = (0..=cells).map(|k| mu_min + (mu_max - mu_min) * k as f64 / cells as f64).collect();
    let mut roots = Vec::new();
    for (a, b, net) in crossing::count_grid(&slice, &grid)? {
        if net > 0 {
            return Err(Error::InvariantViolated { invariant: "eigenphases pass 1 in decreasing direction", residual: net as f64 });
        }
        if net < 0 {
            crossing::localize(&slice, &slice.sample(a)?, &slice.sample(b)?, net, ROOT_WIDTH, &mut roots)?;
        }
    }
    let mut eigenvalues: Vec<Eigenvalue> = roots
        .into_iter()
        .map(|(mu, net)| Eigenvalue { mu: if mu.abs() <= ZERO_SNAP { 0.0 } else { mu }, multiplicity: (-net) as usize })
        .collect();
    eigenvalues.sort_by(|x, y| x.mu.total_cmp(&y.mu));
    Ok(SpectrumWindow { lambda, mu_min, mu_max, eigenvalues })
}

/// Retries `spectrum_window` with slightly moved endpoints when an endpoint
/// collides with an eigenvalue.
pub fn spectrum_window_shifting(fam: &BoundaryValueFamily, lambda: f64, mu_min: f64, mu_max: f64, tol: f64) -> Result<SpectrumWindow> {
    let mut last = None;
    for k in 0..8 {
        let shift = 0.01 * f64::from(k / 2 + 1) * if k % 2 == 0 { 1.0 } else { -1.0 };
        let (a, b) = if k == 0 { (mu_min, mu_max) } else { (mu_min + shift, mu_max - shift) };
        match spectrum_window(fam, lambda, a, b, tol) {
            Err(e @ Error::WindowEndpointIsEigenvalue { .. }) => last = Some(e),
            other => return other,
        }
    }
    Err(last.expect("at least one attempt"))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectralFlowOptions {
    /// Half-width of the spectral window computed at each `lambda`.
    pub window: f64,
    /// Only eigenvalues with `|mu| <= tracked` enter the movement estimate.
    pub tracked: f64,
    /// Largest accepted eigenvalue movement between partition points.
    pub max_movement: f64,
    /// Position of `epsilon` inside its gap, 1 = midpoint.
    pub epsilon_scale: f64,
    pub tol: f64,
}

impl Default for SpectralFlowOptions {
    fn default() -> Self {
        Self { window: 1.2, tracked: 1.0, max_movement: PI / 8.0, epsilon_scale: 1.0, tol: DEFAULT_TOL }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralFlowResult {
    pub value: i64,
    pub partition: Vec<f64>,
    pub epsilons: Vec<f64>,
    pub branch_data: Vec<SpectrumWindow>,
}

/// Distance the tracked eigenvalues may have moved between two windows.
fn movement(a: &SpectrumWindow, b: &SpectrumWindow, tracked: f64) -> f64 {
    let one_way = |x: &SpectrumWindow, y: &SpectrumWindow| {
        x.eigenvalues
            .iter()
            .filter(|e| e.mu.abs() <= tracked)
            .map(|e| y.eigenvalues.iter().map(|f| (e.mu - f.mu).abs()).fold(f64::INFINITY, f64::min))
            .fold(0.0, f64::max)
    };
    let multiplicity_shift = a.count_in(-tracked, tracked).abs_diff(b.count_in(-tracked, tracked));
    let m = one_way(a, b).max(one_way(b, a));
    if multiplicity_shift > 0 && m == 0.0 {
        f64::INFINITY
    } else {
        m
    }
}

/// `epsilon` in the widest eigenvalue-free gap of `(0, pi/4]` (in `|mu|`),
/// clear of both gap edges by more than `movement`.
fn choose_epsilon(a: &SpectrumWindow, b: &SpectrumWindow, movement: f64, scale: f64) -> Option<f64> {
    let cap = PI / 4.0;
    let mut v: Vec<f64> = a.eigenvalues.iter().chain(&b.eigenvalues).map(|e| e.mu.abs()).filter(|&m| m > 0.0 && m < cap).collect();
    v.push(0.0);
    v.push(cap);
    v.sort_by(f64::total_cmp);
    let (gap, lo) = v.windows(2).map(|w| (w[1] - w[0], w[0])).max_by(|x, y| x.0.total_cmp(&y.0))?;
    let eps = lo + 0.5 * scale * gap;
    ((eps - lo).min(lo + gap - eps) > movement).then_some(eps)
}

pub fn spectral_flow(fam: &BoundaryValueFamily, base_grid: &[f64]) -> Result<SpectralFlowResult> {
    spectral_flow_with(fam, base_grid, &SpectralFlowOptions::default())
}

/// Spectral flow by its definition: on a partition fine enough that the
/// small eigenvalues are tracked unambiguously, add up the changes of
/// `dim im chi_[0, eps_i](A_lambda)` across each interval.
pub fn spectral_flow_with(fam: &BoundaryValueFamily, base_grid: &[f64], opts: &SpectralFlowOptions) -> Result<SpectralFlowResult> {
    let window = |lambda: f64| spectrum_window_shifting(fam, lambda, -opts.window, opts.window, opts.tol);
    let grid = sort_unique(base_grid.to_vec());
    let mut partition = vec![grid[0]];
    let mut branch_data = vec![window(grid[0])?];
    let mut epsilons = Vec::new();
    let mut value = 0i64;
    for &next in &grid[1..] {
        let mut stack = vec![(window(next)?, 0usize)];
        while let Some((sb, depth)) = stack.pop() {
            let sa = branch_data.last().expect("nonempty");
            let moved = movement(sa, &sb, opts.tracked);
            let eps = (moved < opts.max_movement).then(|| choose_epsilon(sa, &sb, moved, opts.epsilon_scale)).flatten();
            match eps {
                Some(eps) => {
                    value += sb.count_in(0.0, eps) as i64 - sa.count_in(0.0, eps) as i64;
                    epsilons.push(eps);
                    partition.push(sb.lambda);
                    branch_data.push(sb);
                }
                None if depth >= crate::path::MAX_REFINEMENT_DEPTH => {
                    return Err(Error::RefinementFailed { lambda: sa.lambda, depth });
                }
                None => {
                    let mid = window(0.5 * (sa.lambda + sb.lambda))?;
                    stack.push((sb, depth + 1));
                    stack.push((mid, depth + 1));
                }
            }
        }
    }
    Ok(SpectralFlowResult { value, partition, epsilons, branch_data })
}

/// Spectral flow of `A + delta I`. Requires that no eigenvalue of `A_0` or
/// `A_1` is pushed across 0 by the shift.
pub fn spectral_flow_shifted(fam: &BoundaryValueFamily, delta: f64, base_grid: &[f64]) -> Result<i64> {
    if delta == 0.0 {
        return Ok(spectral_flow(fam, base_grid)?.value);
    }
    let reach = delta.abs() + 0.3;
    for lambda in [0.0, 1.0] {
        let w = spectrum_window_shifting(fam, lambda, -reach, reach, DEFAULT_TOL)?;
        let offending = w.eigenvalues.iter().find(|e| if delta > 0.0 { e.mu >= -delta && e.mu < 0.0 } else { e.mu >= 0.0 && e.mu < -delta });
        if let Some(e) = offending {
            return Err(Error::ShiftTooLarge { delta, lambda, eigenvalue: e.mu });
        }
    }
    Ok(spectral_flow(&fam.shifted(delta), base_grid)?.value)
}

/// Both sides of the conjugation `u = exp(delta_0 J t) v`, which turns
/// `J u' + delta_0 u` with conditions `(gamma_1, gamma_2)` into `J v'` with
/// conditions `(gamma_1, e^{-delta_0 J} gamma_2)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConjugationReport {
    pub delta0: f64,
    pub shifted_potential: Vec<SpectrumWindow>,
    pub rotated_conditions: Vec<SpectrumWindow>,
    pub max_difference: f64,
    pub windows_match: bool,
    pub sfl_shifted_potential: i64,
    pub sfl_rotated_conditions: i64,
    pub passed: bool,
}

pub const CONJUGATION_TOL: f64 = 1e-7;

pub fn conjugation_spectrum_check(gamma1: &LagrangianPath, gamma2: &LagrangianPath, delta0: f64) -> Result<ConjugationReport> {
    let n = gamma1.n();
    let lhs = BoundaryValueFamily::new(gamma1.clone(), gamma2.clone(), SymmetricFamily::scalar(n, delta0))?;
    let rotated = gamma2.acted_on(vec![DMatrix::identity(2 * n, 2 * n) * -delta0])?;
    let rhs = BoundaryValueFamily::unperturbed(gamma1.clone(), rotated)?;
    let (mut left, mut right) = (Vec::new(), Vec::new());
    let mut max_difference: f64 = 0.0;
    let mut windows_match = true;
    for k in 0..=4 {
        let lambda = k as f64 / 4.0;
        let a = spectrum_window_shifting(&lhs, lambda, -PI + 0.1, PI - 0.1, DEFAULT_TOL)?;
        let b = spectrum_window(&rhs, lambda, a.mu_min, a.mu_max, DEFAULT_TOL)?;
        if a.eigenvalues.len() != b.eigenvalues.len() {
            windows_match = false;
            max_difference = f64::INFINITY;
        } else {
            for (x, y) in a.eigenvalues.iter().zip(&b.eigenvalues) {
                max_difference = max_difference.max((x.mu - y.mu).abs());
                windows_match &= x.multiplicity == y.multiplicity;
            }
        }
        left.push(a);
        right.push(b);
    }
    windows_match &= max_difference <= CONJUGATION_TOL;
    let sfl_l = spectral_flow(&lhs, &lhs.default_grid())?.value;
    let sfl_r = spectral_flow(&rhs, &rhs.default_grid())?.value;
    Ok(ConjugationReport {
        delta0,
        shifted_potential: left,
        rotated_conditions: right,
        max_difference,
        windows_match,
        sfl_shifted_potential: sfl_l,
        sfl_rotated_conditions: sfl_r,
        passed: windows_match && sfl_l == sfl_r,
    })
}

pub const MIN_GAP_NODES: usize = 32;
pub const GAP_RATIO_BOUND: f64 = 100.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapEntry {
    pub lambda: f64,
    pub graph_gap: f64,
    /// `‖P̂_lambda - P̂_lambda0‖ + ‖P̃_lambda - P̃_lambda0‖`.
    pub boundary_distance: f64,
    pub ratio: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapDiagnosticReport {
    pub lambda0: f64,
    pub nodes: usize,
    pub entries: Vec<GapEntry>,
    pub max_ratio: Option<f64>,
    pub ratio_bounded: bool,
    /// Gaps strictly decrease as `lambda` approaches `lambda0`.
    pub monotone: bool,
    pub passed: bool,
}

/// Orthonormal basis of the graph `{(u, D u)}` of the forward-difference
/// discretization on `nodes` points, with `u_0 ∈ gamma_1`, `u_last ∈ gamma_2`.
fn discrete_graph(fam: &BoundaryValueFamily, lambda: f64, nodes: usize) -> Result<DMatrix<f64>> {
    let n = fam.n();
    let d = 2 * n;
    let f1 = fam.gamma1.at(lambda)?;
    let f2 = fam.gamma2.at(lambda)?;
    let profile = fam.potential.at_lambda(lambda);
    let h = 1.0 / (nodes - 1) as f64;
    let rows = d * nodes;
    let cols = d * (nodes - 1);

    let mut basis = DMatrix::zeros(rows, cols);
    basis.view_mut((0, 0), (d, n)).copy_from(f1.matrix());
    for k in 0..d * (nodes - 2) {
        basis[(d + k, n + k)] = 1.0;
    }
    basis.view_mut((rows - d, cols - n), (d, n)).copy_from(f2.matrix());

    let j = j_matrix(n);
    let jh = &j / h;
    let mut op = DMatrix::zeros(rows, rows);
    for k in 0..nodes {
        let (from, to) = if k + 1 < nodes { (k, k + 1) } else { (k - 1, k) };
        let s = profile.eval(k as f64 * h);
        let mut block = op.view_mut((d * k, d * from), (d, d));
        block -= &jh;
        let mut block = op.view_mut((d * k, d * to), (d, d));
        block += &jh;
        let mut block = op.view_mut((d * k, d * k), (d, d));
        block += &s;
    }

    let mut graph = DMatrix::zeros(2 * rows, cols);
    graph.rows_mut(0, rows).copy_from(&basis);
    graph.rows_mut(rows, rows).copy_from(&(op * &basis));
    let (q, rank) = linalg::orthonormalize(&graph, 1e-12);
    if rank < cols {
        return Err(Error::SingularDiscretization(format!("graph rank {rank} < {cols} at lambda = {lambda}")));
    }
    Ok(q)
}

/// Graph-gap continuity of the discretized operators at `lambda0`, compared
/// with the distance of the boundary projections.
pub fn discretized_gap_diagnostic(fam: &BoundaryValueFamily, lambda0: f64, lambdas: &[f64], nodes: usize) -> Result<GapDiagnosticReport> {
    if nodes < MIN_GAP_NODES {
        return Err(Error::InvalidArgument(format!("need at least {MIN_GAP_NODES} nodes, got {nodes}")));
    }
    let g0 = discrete_graph(fam, lambda0, nodes)?;
    let (p0, q0) = (fam.gamma1.at(lambda0)?, fam.gamma2.at(lambda0)?);
    let mut entries = Vec::new();
    for &lambda in lambdas {
        let graph_gap = gap_distance(&discrete_graph(fam, lambda, nodes)?, &g0)?;
        let boundary_distance = gap_distance(&fam.gamma1.at(lambda)?, &p0)? + gap_distance(&fam.gamma2.at(lambda)?, &q0)?;
        let ratio = (boundary_distance > 1e-14).then(|| graph_gap / boundary_distance);
        entries.push(GapEntry { lambda, graph_gap, boundary_distance, ratio });
    }
    let max_ratio = entries.iter().filter_map(|e| e.ratio).reduce(f64::max);
    let ratio_bounded = max_ratio.is_none_or(|r| r <= GAP_RATIO_BOUND);
    let mut by_distance: Vec<&GapEntry> = entries.iter().collect();
    by_distance.sort_by(|a, b| (b.lambda - lambda0).abs().total_cmp(&(a.lambda - lambda0).abs()));
    let monotone = by_distance.windows(2).all(|w| w[1].graph_gap < w[0].graph_gap || (w[1].lambda - w[0].lambda).abs() < 1e-15);
    Ok(GapDiagnosticReport { lambda0, nodes, entries, max_ratio, ratio_bounded, monotone, passed: ratio_bounded && monotone })
}
