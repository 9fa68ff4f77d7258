use maslovflow::hamiltonian::SolverSettings;
use maslovflow::suite::{alpha_beta_suite, axiom_suite, gap_suite, morse_suite, three_term_suite, unperturbed_suite};

#[test]
fn suites_pass_and_are_reproducible() {
    let s = SolverSettings::default();
    let a = unperturbed_suite(21, 6, &s).unwrap();
    assert!(a.passed, "{:?}", a.summary());
    assert_eq!(a, unperturbed_suite(21, 6, &s).unwrap());
    assert_ne!(a, unperturbed_suite(22, 6, &s).unwrap());
    let ax = axiom_suite(23, 5).unwrap();
    assert!(ax.passed, "{:?}", ax.summary());
    assert_eq!(ax.checks.len(), 8);
}

#[test]
fn closed_endpoint_case_is_nontrivial() {
    let rep = three_term_suite(5, 1, 6, &SolverSettings::default()).unwrap();
    assert!(rep.passed, "{:?}", rep.summary());
    let closed = &rep.checks[1];
    assert!(closed.instances.iter().any(|i| i.values[0] != 0), "{closed:?}");
}

#[test]
fn small_hamiltonian_suites() {
    let s = SolverSettings::default();
    let ab = alpha_beta_suite(6, 2, &s).unwrap();
    assert!(ab.passed, "{:?}", ab.summary());
    let morse = morse_suite(9, &[5.0, 15.0], 1, &s).unwrap();
    assert!(morse.passed, "{:?}", morse.summary());
    assert_eq!(morse.checks[1].instances[0].values, vec![1, 4]);
}

#[test]
fn gap_suite_small() {
    let rep = gap_suite(8, 10, &[0.05]).unwrap();
    assert!(rep.passed, "{:?}", rep.summary());
    let json = serde_json::to_string(&rep).unwrap();
    assert_eq!(serde_json::from_str::<maslovflow::suite::SuiteReport>(&json).unwrap(), rep);
}
