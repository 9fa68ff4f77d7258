//! Seeded randomized suites. Each suite draws all of its instances from one
//! `ChaCha8Rng` seed, so a report is reproducible from `(suite, seed, count)`.

use crate::error::Result;
use crate::hamiltonian::{
    alpha_beta_identity, clm_hamiltonian, morse_index_formula, three_term_identity, SolverSettings, SymmetricFamily,
    SymmetricTerm, VerificationReport,
};
use crate::maslov::{gamma_nor, gamma_nor_prime, is_admissible, maslov_pair, maslov_pair_rotated, perturbation_theta};
use crate::path::LagrangianPath;
use crate::random;
use crate::specflow::{
    conjugation_spectrum_check, discretized_gap_diagnostic, spectral_flow_with, spectrum_window, BoundaryValueFamily,
    SpectralFlowOptions, DEFAULT_TOL,
};
use crate::symplectic::{directed_gap, gap_distance, kato_projection_identity_check, intersection_dimension, LagrangianFrame};
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub const MAX_FORMULA_TOL: f64 = 1e-12;
pub const SHIFT_TOL: f64 = 1e-7;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Instance {
    pub index: usize,
    /// Integers compared by the check, in the order named by the check.
    pub values: Vec<i64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub residual: Option<f64>,
    pub passed: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    /// What `values` holds for each instance.
    pub columns: Vec<String>,
    pub instances: Vec<Instance>,
    pub passed: bool,
}

impl Check {
    fn new(name: &str, columns: &[&str]) -> Self {
        Self { name: name.into(), columns: columns.iter().map(|c| c.to_string()).collect(), instances: Vec::new(), passed: true }
    }

    fn push(&mut self, values: Vec<i64>, residual: Option<f64>, passed: bool, note: Option<String>) {
        self.passed &= passed;
        self.instances.push(Instance { index: self.instances.len(), values, residual, passed, note });
    }

    /// Records an integer equality check; errors count as failures.
    fn record(&mut self, outcome: Result<(Vec<i64>, bool)>) {
        match outcome {
            Ok((values, ok)) => self.push(values, None, ok, None),
            Err(e) => self.push(Vec::new(), None, false, Some(e.to_string())),
        }
    }

    fn record_report(&mut self, outcome: Result<VerificationReport>) {
        self.record(outcome.map(|r| {
            let mut values = vec![r.lhs];
            values.extend(r.terms.iter().map(|t| t.value));
            (values, r.passed)
        }));
    }

    fn failures(&self) -> usize {
        self.instances.iter().filter(|i| !i.passed).count()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub suite: String,
    pub seed: u64,
    pub checks: Vec<Check>,
    pub passed: bool,
}

impl SuiteReport {
    fn new(suite: &str, seed: u64, checks: Vec<Check>) -> Self {
        let passed = checks.iter().all(|c| c.passed && !c.instances.is_empty());
        Self { suite: suite.into(), seed, checks, passed }
    }

    /// One line per check: name, instance count, failures.
    pub fn summary(&self) -> Vec<String> {
        self.checks
            .iter()
            .map(|c| format!("{}: {} instances, {} failed", c.name, c.instances.len(), c.failures()))
            .collect()
    }
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn random_path(r: &mut ChaCha8Rng, n: usize) -> Result<LagrangianPath> {
    LagrangianPath::new(random::path(r, n))
}

fn unperturbed_flow(g1: &LagrangianPath, g2: &LagrangianPath, settings: &SolverSettings) -> Result<i64> {
    let fam = BoundaryValueFamily::unperturbed(g1.clone(), g2.clone())?;
    let opts = SpectralFlowOptions { tol: settings.tol, ..SpectralFlowOptions::default() };
    Ok(spectral_flow_with(&fam, &fam.default_grid(), &opts)?.value)
}

/// `sfl = maslov_pair` for `S = 0` on random pairs, `n <= 2`. Every third
/// pair starts with a nontrivial intersection, so both admissible and
/// non-admissible endpoints occur.
pub fn unperturbed_suite(seed: u64, count: usize, settings: &SolverSettings) -> Result<SuiteReport> {
    let mut r = rng(seed);
    let mut check = Check::new("sfl_equals_maslov", &["sfl", "maslov"]);
    for i in 0..count {
        let n = r.random_range(1..=2);
        let g1 = random_path(&mut r, n)?;
        let g2 = if i % 3 == 2 {
            let k = r.random_range(1..=n);
            LagrangianPath::new(random::path_meeting(&mut r, &g1.start()?, k))?
        } else {
            random_path(&mut r, n)?
        };
        check.record((|| {
            let (s, m) = (unperturbed_flow(&g1, &g2, settings)?, maslov_pair(&g1, &g2)?);
            Ok((vec![s, m], s == m))
        })());
    }
    Ok(SuiteReport::new("unperturbed", seed, vec![check]))
}

fn hamiltonian_instance(r: &mut ChaCha8Rng) -> Result<(SymmetricFamily, LagrangianPath, LagrangianPath)> {
    let n = r.random_range(1..=2);
    let s = random::symmetric_family(r, n, 2, 3.0);
    Ok((s, random_path(r, n)?, random_path(r, n)?))
}

/// `sfl(A) = maslov(Psi g1, g2)` with random polynomial `S` of degree <= 2
/// and `sup |S| <= 3`.
pub fn clm_suite(seed: u64, count: usize, settings: &SolverSettings) -> Result<SuiteReport> {
    let mut r = rng(seed);
    let mut check = Check::new("clm_hamiltonian", &["sfl", "maslov(Psi g1, g2)"]);
    for _ in 0..count {
        let (s, g1, g2) = hamiltonian_instance(&mut r)?;
        check.record_report(clm_hamiltonian(&s, &g1, &g2, settings));
    }
    Ok(SuiteReport::new("clm", seed, vec![check]))
}

/// Three-term identity on random instances, plus the closed-endpoint case:
/// `S` independent of `lambda` and both paths loops, where the identity
/// collapses to `sfl = maslov(g1, g2)`.
pub fn three_term_suite(seed: u64, count: usize, closed: usize, settings: &SolverSettings) -> Result<SuiteReport> {
    let mut r = rng(seed);
    let columns = ["sfl", "frozen at 1", "maslov(g1, g2)", "-frozen at 0"];
    let mut check = Check::new("three_term", &columns);
    for _ in 0..count {
        let (s, g1, g2) = hamiltonian_instance(&mut r)?;
        check.record_report(three_term_identity(&s, &g1, &g2, settings));
    }
    let mut collapse = Check::new("closed_endpoints", &columns);
    for _ in 0..closed {
        let n = r.random_range(1..=2);
        let terms: Vec<SymmetricTerm> =
            random::symmetric_family(&mut r, n, 2, 3.0).terms().iter().filter(|t| t.lambda_power == 0).cloned().collect();
        let s = SymmetricFamily::new(n, terms)?;
        let g1 = LagrangianPath::new(random::loop_path(&mut r, n))?;
        let g2 = LagrangianPath::new(random::loop_path(&mut r, n))?;
        collapse.record(three_term_identity(&s, &g1, &g2, settings).map(|rep| {
            let mut values = vec![rep.lhs];
            values.extend(rep.terms.iter().map(|t| t.value));
            // sfl equals the middle term alone
            let ok = rep.passed && rep.lhs == rep.terms[1].value && rep.terms[0].value + rep.terms[2].value == 0;
            (values, ok)
        }));
    }
    Ok(SuiteReport::new("three_term", seed, vec![check, collapse]))
}

/// The `alpha`/`beta` formula with random piecewise-linear `alpha`,
/// `beta = alpha + lambda`.
pub fn alpha_beta_suite(seed: u64, count: usize, settings: &SolverSettings) -> Result<SuiteReport> {
    let mut r = rng(seed);
    let mut check = Check::new("alpha_beta", &["sfl", "term at 0", "maslov(g1, g2)", "-term at 1"]);
    for _ in 0..count {
        let (s, g1, g2) = hamiltonian_instance(&mut r)?;
        let (alpha, beta) = random::alpha_beta(&mut r, 2);
        check.record_report(alpha_beta_identity(&s, &g1, &g2, &alpha, &beta, settings));
    }
    Ok(SuiteReport::new("alpha_beta", seed, vec![check]))
}

/// `S_lambda = lambda c I` for `n = 1`.
pub fn scalar_morse_family(c: f64) -> SymmetricFamily {
    SymmetricFamily::new(1, vec![SymmetricTerm { lambda_power: 1, t_power: 0, matrix: DMatrix::identity(2, 2) * c }])
        .expect("scalar matrices are symmetric")
}

/// Morse index formula on `S_lambda = lambda c I` for the given `c` (values
/// must be non-decreasing in `c` and jump at least once), plus `count`
/// random degree-1 families.
pub fn morse_suite(seed: u64, cs: &[f64], count: usize, settings: &SolverSettings) -> Result<SuiteReport> {
    let mut scalar = Check::new("scalar_family", &["sfl", "maslov(Psi V, V)"]);
    for &c in cs {
        scalar.record_report(morse_index_formula(&scalar_morse_family(c), settings));
    }
    let mut monotone = Check::new("non_decreasing_with_jump", &["values in order of c"]);
    let values: Vec<i64> = scalar.instances.iter().filter_map(|i| i.values.first().copied()).collect();
    let ok = values.len() == cs.len()
        && values.windows(2).all(|w| w[0] <= w[1])
        && values.windows(2).any(|w| w[1] > w[0]);
    monotone.push(values, None, ok, None);
    let mut r = rng(seed);
    let mut random_check = Check::new("random_degree_one", &["sfl", "maslov(Psi V, V)"]);
    for _ in 0..count {
        let n = r.random_range(1..=2);
        random_check.record_report(morse_index_formula(&random::symmetric_family(&mut r, n, 1, 3.0), settings));
    }
    let mut checks = vec![scalar, monotone];
    if count > 0 {
        checks.push(random_check);
    }
    Ok(SuiteReport::new("morse", seed, checks))
}

fn admissible_pair(r: &mut ChaCha8Rng) -> Result<(LagrangianPath, LagrangianPath)> {
    loop {
        let n = r.random_range(1..=2);
        let (a, b) = (random_path(r, n)?, random_path(r, n)?);
        if is_admissible(&a, &b)? {
            return Ok((a, b));
        }
    }
}

/// A path starting where `p` ends.
fn continuation(r: &mut ChaCha8Rng, p: &LagrangianPath) -> Result<LagrangianPath> {
    let mut g = random::generator(r, p.n(), 0.7);
    g[0].fill(0.0);
    LagrangianPath::constant(&p.end()?).acted_on(g)
}

/// Transversal vanishing, concatenation, antisymmetry, symplectic
/// invariance, reversal, reparametrization invariance and regularization
/// consistency, `count` random instances each.
pub fn axiom_suite(seed: u64, count: usize) -> Result<SuiteReport> {
    let mut r = rng(seed);

    let mut transversal = Check::new("transversal_vanishing", &["maslov"]);
    while transversal.instances.len() < count {
        let n = r.random_range(1..=2);
        let (l0, l1) = (random::lagrangian_frame(&mut r, n), random::lagrangian_frame(&mut r, n));
        if intersection_dimension(&l0, &l1, 1e-6)? > 0 {
            continue;
        }
        // a common symplectic path keeps the pair transversal
        let g = random::generator(&mut r, n, 0.7);
        let a = LagrangianPath::constant(&l0).acted_on(g.clone())?;
        let b = LagrangianPath::constant(&l1).acted_on(g)?;
        transversal.record(maslov_pair(&a, &b).map(|m| (vec![m], m == 0)));
    }

    let mut concatenation = Check::new("concatenation", &["joined", "first", "second"]);
    let mut attempts = 0;
    while concatenation.instances.len() < count && attempts < 20 * count {
        attempts += 1;
        let (g1, g2) = admissible_pair(&mut r)?;
        let (g3, g4) = (continuation(&mut r, &g1)?, continuation(&mut r, &g2)?);
        if !is_admissible(&g3, &g4)? {
            continue;
        }
        concatenation.record((|| {
            let joined = maslov_pair(&g1.concat(&g3)?, &g2.concat(&g4)?)?;
            let (a, b) = (maslov_pair(&g1, &g2)?, maslov_pair(&g3, &g4)?);
            Ok((vec![joined, a, b], joined == a + b))
        })());
    }

    let mut antisymmetry = Check::new("antisymmetry", &["maslov(g1, g2)", "maslov(g2, g1)"]);
    for _ in 0..count {
        let (g1, g2) = admissible_pair(&mut r)?;
        antisymmetry.record((|| {
            let (a, b) = (maslov_pair(&g1, &g2)?, maslov_pair(&g2, &g1)?);
            Ok((vec![a, b], a == -b))
        })());
    }

    let mut invariance = Check::new("symplectic_invariance", &["maslov", "maslov after Psi"]);
    for _ in 0..count {
        let (g1, g2) = admissible_pair(&mut r)?;
        let g = random::generator(&mut r, g1.n(), 0.7);
        invariance.record((|| {
            let a = maslov_pair(&g1, &g2)?;
            let b = maslov_pair(&g1.acted_on(g.clone())?, &g2.acted_on(g)?)?;
            Ok((vec![a, b], a == b))
        })());
    }

    let mut reversal = Check::new("reversal", &["maslov", "maslov reversed"]);
    for _ in 0..count {
        let (g1, g2) = admissible_pair(&mut r)?;
        reversal.record((|| {
            let a = maslov_pair(&g1, &g2)?;
            let b = maslov_pair(&g1.reversed()?, &g2.reversed()?)?;
            Ok((vec![a, b], a == -b))
        })());
    }

    let mut reparam = Check::new("reparametrization", &["maslov", "maslov reparametrized"]);
    for _ in 0..count {
        let (g1, g2) = admissible_pair(&mut r)?;
        let map = random::monotone_map(&mut r, 3);
        reparam.record((|| {
            let a = maslov_pair(&g1, &g2)?;
            let b = maslov_pair(&g1.reparametrized(map.clone())?, &g2.reparametrized(map)?)?;
            Ok((vec![a, b], a == b))
        })());
    }

    // admissible pairs: rotating by the chosen angle or half of it changes
    // nothing; non-admissible pairs: a quarter of the angle gives the same value
    let mut regularization = Check::new("regularization", &["maslov", "at theta", "at theta/2 or theta/4"]);
    for i in 0..count {
        let (g1, g2) = if i % 2 == 0 {
            admissible_pair(&mut r)?
        } else {
            let n = r.random_range(1..=2);
            let g1 = random_path(&mut r, n)?;
            let k = r.random_range(1..=n);
            let g2 = LagrangianPath::new(random::path_meeting(&mut r, &g1.start()?, k))?;
            (g1, g2)
        };
        regularization.record((|| {
            let m = maslov_pair(&g1, &g2)?;
            let theta = perturbation_theta(&g1, &g2)?;
            let a = maslov_pair_rotated(&g1, &g2, theta)?;
            let b = maslov_pair_rotated(&g1, &g2, if i % 2 == 0 { 0.5 * theta } else { 0.25 * theta })?;
            Ok((vec![m, a, b], m == a && a == b))
        })());
    }

    let mut normalization = Check::new("normalization", &["maslov(gamma_nor, L1)", "maslov(L0, gamma_nor')"]);
    for n in 1..=3 {
        normalization.record((|| {
            let l0 = LagrangianPath::constant(&LagrangianFrame::horizontal(n));
            let l1 = LagrangianPath::constant(&LagrangianFrame::vertical(n));
            let a = maslov_pair(&gamma_nor(n)?, &l1)?;
            let b = maslov_pair(&l0, &gamma_nor_prime(n)?)?;
            Ok((vec![a, b], a == 1 && b == -1))
        })());
    }

    let checks = vec![transversal, concatenation, antisymmetry, invariance, reversal, reparam, regularization, normalization];
    Ok(SuiteReport::new("axioms", seed, checks))
}

/// Gap metric checks: max of directed gaps, Kato's identity, the spectrum
/// shift under `S -> S + delta I`, the conjugation check at each `delta0`, and
/// the discretized continuity ladder for `(gamma_nor, L1)` at `lambda = 0`.
pub fn gap_suite(seed: u64, count: usize, deltas0: &[f64]) -> Result<SuiteReport> {
    let mut r = rng(seed);

    let mut max_formula = Check::new("max_of_directed_gaps", &[]);
    for _ in 0..count {
        let n = r.random_range(1..=3);
        let (a, b) = (random::lagrangian_frame(&mut r, n), random::lagrangian_frame(&mut r, n));
        let res = (|| {
            let g = gap_distance(&a, &b)?;
            Ok::<_, crate::Error>((g - directed_gap(&a, &b)?.max(directed_gap(&b, &a)?)).abs())
        })();
        match res {
            Ok(d) => max_formula.push(Vec::new(), Some(d), d <= MAX_FORMULA_TOL, None),
            Err(e) => max_formula.push(Vec::new(), None, false, Some(e.to_string())),
        }
    }

    let mut kato = Check::new("kato_identity", &[]);
    while kato.instances.len() < count {
        let n = r.random_range(1..=3);
        let a = random::lagrangian_frame(&mut r, n);
        let b = random::lagrangian_frame(&mut r, n);
        match kato_projection_identity_check(&a.projector(), &b.projector()) {
            Ok(rep) if !rep.hypothesis_met => continue,
            Ok(rep) => {
                let d = (rep.norm_complement_p_q - rep.norm_difference)
                    .abs()
                    .max((rep.norm_complement_q_p - rep.norm_difference).abs());
                kato.push(Vec::new(), Some(d), rep.identity_holds, None);
            }
            Err(e) => kato.push(Vec::new(), None, false, Some(e.to_string())),
        }
    }

    let mut shift = Check::new("spectrum_shift", &["eigenvalues", "shifted eigenvalues"]);
    let delta = 0.1;
    for n in 1..=2 {
        let fam = BoundaryValueFamily::unperturbed(gamma_nor(n)?, LagrangianPath::constant(&LagrangianFrame::vertical(n)))?;
        for lambda in [0.0, 0.3, 0.5, 0.8] {
            let res = (|| {
                let a = spectrum_window(&fam, lambda, -2.5, 2.5, DEFAULT_TOL)?;
                let b = spectrum_window(&fam.shifted(delta), lambda, -2.5 + delta, 2.5 + delta, DEFAULT_TOL)?;
                let same = a.eigenvalues.len() == b.eigenvalues.len()
                    && a.eigenvalues.iter().zip(&b.eigenvalues).all(|(x, y)| x.multiplicity == y.multiplicity);
                let d = a.eigenvalues.iter().zip(&b.eigenvalues).map(|(x, y)| (x.mu + delta - y.mu).abs()).fold(0.0, f64::max);
                Ok::<_, crate::Error>((a.total() as i64, b.total() as i64, same, d))
            })();
            match res {
                Ok((x, y, same, d)) => shift.push(vec![x, y], Some(d), same && d <= SHIFT_TOL, None),
                Err(e) => shift.push(Vec::new(), None, false, Some(e.to_string())),
            }
        }
    }

    let mut conjugation = Check::new("conjugation", &["sfl shifted potential", "sfl rotated conditions"]);
    let l1 = LagrangianPath::constant(&LagrangianFrame::vertical(1));
    for &d0 in deltas0 {
        match conjugation_spectrum_check(&gamma_nor(1)?, &l1, d0) {
            Ok(rep) => conjugation.push(
                vec![rep.sfl_shifted_potential, rep.sfl_rotated_conditions],
                Some(rep.max_difference),
                rep.passed,
                None,
            ),
            Err(e) => conjugation.push(Vec::new(), None, false, Some(e.to_string())),
        }
    }

    let mut ladder = Check::new("discretized_continuity", &[]);
    let fam = BoundaryValueFamily::unperturbed(gamma_nor(1)?, l1)?;
    match discretized_gap_diagnostic(&fam, 0.0, &[0.02, 0.01, 0.005], 64) {
        Ok(rep) => ladder.push(Vec::new(), rep.max_ratio, rep.passed, None),
        Err(e) => ladder.push(Vec::new(), None, false, Some(e.to_string())),
    }

    Ok(SuiteReport::new("gap", seed, vec![max_formula, kato, shift, conjugation, ladder]))
}
