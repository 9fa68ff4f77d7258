use super::family::SymmetricFamily;
use super::flow::{psi, DEFAULT_STEPS, DRIFT_LIMIT};
use crate::error::{Error, Result};
use crate::maslov::maslov_pair;
use crate::path::{LagrangianPath, PathDescriptor, PiecewiseLinear};
use crate::specflow::{spectral_flow_with, BoundaryValueFamily, SpectralFlowOptions, DEFAULT_TOL};
use crate::symplectic::{gap_distance, LagrangianFrame, SymplecticMatrix};
use serde::{Deserialize, Serialize};

/// Tolerance for `beta = alpha + lambda` at breakpoints.
pub const REPARAMETRIZATION_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverSettings {
    /// RK4 steps on `[0, 1]` for every fundamental solution.
    pub steps: usize,
    /// Eigenvalue detector tolerance of the spectrum scans.
    pub tol: f64,
}

impl Default for SolverSettings {
    fn default() -> Self {
        Self { steps: DEFAULT_STEPS, tol: DEFAULT_TOL }
    }
}

impl SolverSettings {
    fn flow_options(&self) -> SpectralFlowOptions {
        SpectralFlowOptions { tol: self.tol, ..SpectralFlowOptions::default() }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Term {
    pub label: String,
    pub value: i64,
}

fn term(label: &str, value: i64) -> Term {
    Term { label: label.to_string(), value }
}

/// Both sides of an index identity. `terms` lists the summands of the right
/// side with their signs already applied.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub identity: String,
    pub lhs: i64,
    pub rhs: i64,
    pub terms: Vec<Term>,
    /// Partition on which the spectral flow was accumulated.
    pub partition: Vec<f64>,
    pub settings: SolverSettings,
    pub notes: Vec<String>,
    pub passed: bool,
}

impl VerificationReport {
    fn new(identity: &str, lhs: i64, terms: Vec<Term>, partition: Vec<f64>, settings: SolverSettings) -> Self {
        let rhs = terms.iter().map(|t| t.value).sum();
        Self { identity: identity.into(), lhs, rhs, terms, partition, settings, notes: Vec::new(), passed: lhs == rhs }
    }
}

/// Spectral flow of `J u' + S_lambda u` on `u(0) in g1(lambda)`, `u(1) in g2(lambda)`.
fn hamiltonian_flow(s: &SymmetricFamily, g1: &LagrangianPath, g2: &LagrangianPath, settings: &SolverSettings) -> Result<(i64, Vec<f64>)> {
    let fam = BoundaryValueFamily::new(g1.clone(), g2.clone(), s.clone())?.with_steps(settings.steps)?;
    let res = spectral_flow_with(&fam, &fam.default_grid(), &settings.flow_options())?;
    Ok((res.value, res.partition))
}

/// `lambda -> Psi_lambda(1) g(lambda)`.
pub fn endpoint_path(s: &SymmetricFamily, g: &LagrangianPath, steps: usize) -> Result<LagrangianPath> {
    LagrangianPath::new(PathDescriptor::HamiltonianEndpoint {
        family: s.clone(),
        base: Box::new(g.descriptor().clone()),
        steps,
    })
}

/// `t -> Psi_lambda(t) l` at a frozen `lambda`.
pub fn time_path(s: &SymmetricFamily, lambda: f64, l: &LagrangianFrame, steps: usize) -> Result<LagrangianPath> {
    LagrangianPath::new(PathDescriptor::HamiltonianTime {
        family: s.clone(),
        lambda,
        base: l.matrix().clone(),
        steps,
    })
}

/// `sfl(A) = mu(Psi g1, g2)`.
pub fn clm_hamiltonian(s: &SymmetricFamily, g1: &LagrangianPath, g2: &LagrangianPath, settings: &SolverSettings) -> Result<VerificationReport> {
    let (lhs, partition) = hamiltonian_flow(s, g1, g2, settings)?;
    let rhs = maslov_pair(&endpoint_path(s, g1, settings.steps)?, g2)?;
    Ok(VerificationReport::new("clm_hamiltonian", lhs, vec![term("maslov(Psi g1, g2)", rhs)], partition, *settings))
}

/// `sfl(A) = mu(Psi_1(.) g1(1), g2(1)) + mu(g1, g2) - mu(Psi_0(.) g1(0), g2(0))`.
pub fn three_term_identity(s: &SymmetricFamily, g1: &LagrangianPath, g2: &LagrangianPath, settings: &SolverSettings) -> Result<VerificationReport> {
    let (lhs, partition) = hamiltonian_flow(s, g1, g2, settings)?;
    let frozen = |lambda: f64| -> Result<i64> {
        let path = time_path(s, lambda, &g1.at(lambda)?, settings.steps)?;
        maslov_pair(&path, &LagrangianPath::constant(&g2.at(lambda)?))
    };
    let terms = vec![
        term("maslov(Psi_1(.) g1(1), g2(1))", frozen(1.0)?),
        term("maslov(g1, g2)", maslov_pair(g1, g2)?),
        term("-maslov(Psi_0(.) g1(0), g2(0))", -frozen(0.0)?),
    ];
    let mut report = VerificationReport::new("three_term", lhs, terms, partition, *settings);
    let closed = |g: &LagrangianPath| -> Result<bool> { Ok(gap_distance(&g.start()?, &g.end()?)? < 1e-12) };
    if s.same_at_endpoints() && closed(g1)? && closed(g2)? {
        report.notes.push("S_0 = S_1 and both paths closed: the frozen terms cancel".into());
    }
    Ok(report)
}

/// Checks `beta = alpha + lambda` and the forced values `alpha(1) = 0`,
/// `beta(1) = 1` at the union of both breakpoint sets.
pub fn check_reparametrizations(alpha: &PiecewiseLinear, beta: &PiecewiseLinear) -> Result<()> {
    let mut pts = alpha.breakpoints();
    pts.extend(beta.breakpoints());
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    for &x in &pts {
        let (a, b) = (alpha.eval(x), beta.eval(x));
        let bad = |detail: String| Err(Error::Reparametrization { lambda: x, detail });
        if !(0.0..=1.0).contains(&a) || !(0.0..=1.0).contains(&b) {
            return bad(format!("alpha = {a}, beta = {b} must lie in [0, 1]"));
        }
        if (b - a - x).abs() > REPARAMETRIZATION_TOL {
            return bad(format!("beta - alpha = {} differs from lambda", b - a));
        }
    }
    if alpha.eval(1.0).abs() > REPARAMETRIZATION_TOL || (beta.eval(1.0) - 1.0).abs() > REPARAMETRIZATION_TOL {
        return Err(Error::Reparametrization { lambda: 1.0, detail: "alpha(1) = 0 and beta(1) = 1 are required".into() });
    }
    Ok(())
}

/// The reparametrized three-term formula with `beta = alpha + lambda`:
/// `sfl(A) = mu(Psi_0(alpha) g1(0), Psi_0(beta) Psi_0(1)^{-1} g2(0)) + mu(g1, g2)
///   - mu(Psi_1(alpha) g1(1), Psi_1(beta) Psi_1(1)^{-1} g2(1))`.
pub fn alpha_beta_identity(
    s: &SymmetricFamily,
    g1: &LagrangianPath,
    g2: &LagrangianPath,
    alpha: &PiecewiseLinear,
    beta: &PiecewiseLinear,
    settings: &SolverSettings,
) -> Result<VerificationReport> {
    check_reparametrizations(alpha, beta)?;
    let (lhs, partition) = hamiltonian_flow(s, g1, g2, settings)?;
    let side = |lambda: f64| -> Result<i64> {
        let end = SymplecticMatrix::with_tolerance(psi(s, lambda, 1.0, settings.steps), DRIFT_LIMIT)?;
        let pulled = g2.at(lambda)?.apply(&end.inverse())?;
        let first = time_path(s, lambda, &g1.at(lambda)?, settings.steps)?.reparametrized(alpha.clone())?;
        let second = time_path(s, lambda, &pulled, settings.steps)?.reparametrized(beta.clone())?;
        maslov_pair(&first, &second)
    };
    let terms = vec![
        term("maslov(Psi_0(alpha) g1(0), Psi_0(beta) Psi_0(1)^-1 g2(0))", side(0.0)?),
        term("maslov(g1, g2)", maslov_pair(g1, g2)?),
        term("-maslov(Psi_1(alpha) g1(1), Psi_1(beta) Psi_1(1)^-1 g2(1))", -side(1.0)?),
    ];
    let mut report = VerificationReport::new("alpha_beta", lhs, terms, partition, *settings);
    report.notes.push("alpha(1) = 0 and beta(1) = 1 (forced by beta = alpha + lambda in [0, 1])".into());
    Ok(report)
}

/// Both sides for the boundary condition `u(0), u(1) in {0} x R^n`:
/// `sfl(A) = mu(Psi V, V)` with `V` the vertical subspace.
pub fn morse_index_formula(s: &SymmetricFamily, settings: &SolverSettings) -> Result<VerificationReport> {
    let v = LagrangianPath::constant(&LagrangianFrame::vertical(s.n()));
    let (lhs, partition) = hamiltonian_flow(s, &v, &v, settings)?;
    let rhs = maslov_pair(&endpoint_path(s, &v, settings.steps)?, &v)?;
    Ok(VerificationReport::new("morse_index", lhs, vec![term("maslov(Psi V, V)", rhs)], partition, *settings))
}
