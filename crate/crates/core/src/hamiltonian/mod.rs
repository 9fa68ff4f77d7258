//! Linear Hamiltonian systems `J u' + S_lambda(t) u = 0` and the spectral-flow
//! formulas expressing their spectral flow through Maslov indices.

mod family;
mod flow;
mod identities;

pub use family::{SymmetricFamily, SymmetricTerm, TimeProfile, MAX_DEGREE};
pub use flow::{
    fundamental_solution, propagate, Propagator, psi, rotation_matrix, FundamentalSolution, DEFAULT_STEPS, DRIFT_LIMIT,
    MIN_FUNDAMENTAL_STEPS,
};
pub use identities::{
    alpha_beta_identity, check_reparametrizations, clm_hamiltonian, endpoint_path, morse_index_formula, three_term_identity,
    time_path, SolverSettings, Term, VerificationReport, REPARAMETRIZATION_TOL,
};
