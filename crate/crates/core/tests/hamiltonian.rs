use maslovflow::hamiltonian::{
    alpha_beta_identity, clm_hamiltonian, morse_index_formula, psi, three_term_identity, SolverSettings, SymmetricFamily,
    SymmetricTerm,
};
use maslovflow::linalg::max_abs;
use maslovflow::maslov::{gamma_nor, maslov_pair};
use maslovflow::path::{LagrangianPath, PathDescriptor, PiecewiseLinear};
use maslovflow::random;
use maslovflow::specflow::{spectrum_window, BoundaryValueFamily, DEFAULT_TOL};
use maslovflow::symplectic::LagrangianFrame;
use maslovflow::Error;
use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;

fn settings() -> SolverSettings {
    SolverSettings::default()
}

fn l1(n: usize) -> LagrangianPath {
    LagrangianPath::constant(&LagrangianFrame::vertical(n))
}

fn random_instance(rng: &mut ChaCha8Rng, n: usize) -> (SymmetricFamily, LagrangianPath, LagrangianPath) {
    let s = random::symmetric_family(rng, n, 2, 3.0);
    let g1 = LagrangianPath::new(random::path(rng, n)).unwrap();
    let g2 = LagrangianPath::new(random::path(rng, n)).unwrap();
    (s, g1, g2)
}

#[test]
fn zero_potential_reduces_to_the_unperturbed_equality() {
    let g = gamma_nor(2).unwrap();
    let r = clm_hamiltonian(&SymmetricFamily::zero(2), &g, &l1(2), &settings()).unwrap();
    assert_eq!((r.lhs, r.rhs), (1, 1));
    assert!(r.passed);
}

#[test]
fn scalar_potential_against_rotated_path() {
    for &delta in &[0.3, 1.1, -0.7] {
        let g = gamma_nor(1).unwrap();
        let s = SymmetricFamily::scalar(1, delta);
        let r = clm_hamiltonian(&s, &g, &l1(1), &settings()).unwrap();
        // exp(delta J) applied through the matrix exponential, not the integrator
        let rotated = g.acted_on(vec![DMatrix::identity(2, 2) * delta]).unwrap();
        let expected = maslov_pair(&rotated, &l1(1)).unwrap();
        assert_eq!(r.rhs, expected, "delta={delta}");
        assert_eq!(r.lhs, expected, "delta={delta}");
    }
}

#[test]
fn randomized_clm_instances() {
    let mut rng = ChaCha8Rng::seed_from_u64(41);
    for i in 0..6 {
        let (s, g1, g2) = random_instance(&mut rng, 1 + i % 2);
        let r = clm_hamiltonian(&s, &g1, &g2, &settings()).unwrap();
        assert!(r.passed, "instance {i}: {} vs {}", r.lhs, r.rhs);
    }
}

#[test]
fn randomized_three_term_instances() {
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    for i in 0..4 {
        let (s, g1, g2) = random_instance(&mut rng, 1 + i % 2);
        let r = three_term_identity(&s, &g1, &g2, &settings()).unwrap();
        let clm = clm_hamiltonian(&s, &g1, &g2, &settings()).unwrap();
        assert_eq!(r.lhs, clm.lhs);
        assert!(r.passed, "instance {i}: {} vs {:?}", r.lhs, r.terms);
    }
}

#[test]
fn closed_endpoints_collapse_to_the_pair_index() {
    let mut rng = ChaCha8Rng::seed_from_u64(43);
    // lambda-independent, t-dependent potential; gamma1 a loop winding once
    let terms = vec![
        SymmetricTerm { lambda_power: 0, t_power: 0, matrix: random::symmetric(&mut rng, 2, 1.0) },
        SymmetricTerm { lambda_power: 0, t_power: 1, matrix: random::symmetric(&mut rng, 2, 1.0) },
    ];
    let s = SymmetricFamily::new(1, terms).unwrap();
    let g1 = LagrangianPath::new(PathDescriptor::UnitaryDiagonal { phases: vec![PiecewiseLinear::linear(0.3, 0.3 + PI)] }).unwrap();
    let g2 = LagrangianPath::constant(&random::lagrangian_frame(&mut rng, 1));
    let r = three_term_identity(&s, &g1, &g2, &settings()).unwrap();
    assert!(r.passed);
    assert_eq!(r.terms[0].value + r.terms[2].value, 0);
    assert_eq!(r.lhs, maslov_pair(&g1, &g2).unwrap());
    assert_eq!(r.lhs.abs(), 1);
    assert_eq!(r.notes.len(), 1);
}

#[test]
fn alpha_beta_examples() {
    let mut rng = ChaCha8Rng::seed_from_u64(44);
    for i in 0..3 {
        let (s, g1, g2) = random_instance(&mut rng, 1 + i % 2);
        let three = three_term_identity(&s, &g1, &g2, &settings()).unwrap();
        let zero = alpha_beta_identity(&s, &g1, &g2, &PiecewiseLinear::constant(0.0), &PiecewiseLinear::linear(0.0, 1.0), &settings()).unwrap();
        assert!(zero.passed);
        assert_eq!(zero.lhs, three.lhs);
        let half = alpha_beta_identity(&s, &g1, &g2, &PiecewiseLinear::linear(0.5, 0.0), &PiecewiseLinear::linear(0.5, 1.0), &settings()).unwrap();
        assert!(half.passed, "instance {i}: {} vs {:?}", half.lhs, half.terms);
    }
}

#[test]
fn alpha_beta_rejects_bad_reparametrizations() {
    let g = gamma_nor(1).unwrap();
    let s = SymmetricFamily::zero(1);
    let alpha = PiecewiseLinear::new(vec![[0.0, 0.2], [0.5, 0.1], [1.0, 0.0]]).unwrap();
    let beta = PiecewiseLinear::new(vec![[0.0, 0.2], [0.5, 0.7], [1.0, 1.0]]).unwrap();
    match alpha_beta_identity(&s, &g, &l1(1), &alpha, &beta, &settings()) {
        Err(Error::Reparametrization { lambda, .. }) => assert_eq!(lambda, 0.5),
        other => panic!("expected a reparametrization error, got {other:?}"),
    }
}

/// Number of eigenvalues of the unperturbed vertical problem in `[-c, 0)`.
/// Adding `lambda c I` shifts the spectrum by `lambda c`, so this counts the
/// eigenvalues crossing zero along the family.
fn morse_oracle(c: f64) -> i64 {
    let v = LagrangianPath::constant(&LagrangianFrame::vertical(1));
    let fam = BoundaryValueFamily::unperturbed(v.clone(), v).unwrap();
    spectrum_window(&fam, 0.0, -c, -1e-3, DEFAULT_TOL).unwrap().total() as i64
}

#[test]
fn morse_index_scalar_families() {
    let mut values = Vec::new();
    for &c in &[5.0, 15.0, 30.0] {
        let s = SymmetricFamily::new(1, vec![SymmetricTerm { lambda_power: 1, t_power: 0, matrix: DMatrix::identity(2, 2) * c }]).unwrap();
        let r = morse_index_formula(&s, &settings()).unwrap();
        assert!(r.passed, "c={c}: {} vs {}", r.lhs, r.rhs);
        assert_eq!(r.lhs, morse_oracle(c), "c={c}");
        values.push(r.lhs);
    }
    assert_eq!(values, vec![1, 4, 9]);
}

#[test]
fn morse_index_randomized_degree_one() {
    let mut rng = ChaCha8Rng::seed_from_u64(45);
    for _ in 0..3 {
        let s = random::symmetric_family(&mut rng, 1, 1, 3.0);
        let r = morse_index_formula(&s, &settings()).unwrap();
        assert!(r.passed, "{} vs {}", r.lhs, r.rhs);
    }
}

#[test]
fn psi_endpoint_is_continuous_in_lambda() {
    let mut rng = ChaCha8Rng::seed_from_u64(46);
    let s = random::symmetric_family(&mut rng, 2, 2, 3.0);
    let base = psi(&s, 0.4, 1.0, 256);
    let increments: Vec<f64> = [0.02, 0.01, 0.005, 0.0025].iter().map(|h| max_abs(&(psi(&s, 0.4 + h, 1.0, 256) - &base))).collect();
    for w in increments.windows(2) {
        // first-order increments halve up to O(h) corrections
        assert!(w[0] / w[1] > 1.9, "{increments:?}");
    }
}
