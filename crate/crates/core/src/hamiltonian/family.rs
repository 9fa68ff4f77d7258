use crate::error::{Error, Result};
use crate::linalg;
use crate::serde_matrix;
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

pub const MAX_DEGREE: u32 = 4;

/// One monomial `lambda^p t^q M` of a [`SymmetricFamily`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SymmetricTerm {
    pub lambda_power: u32,
    pub t_power: u32,
    #[serde(with = "serde_matrix")]
    pub matrix: DMatrix<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct RawFamily {
    n: usize,
    #[serde(default)]
    terms: Vec<SymmetricTerm>,
}

/// Polynomial two-parameter family `(lambda, t) -> S_lambda(t)` of symmetric
/// `2n x 2n` matrices.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawFamily", into = "RawFamily")]
pub struct SymmetricFamily {
    n: usize,
    terms: Vec<SymmetricTerm>,
}

impl TryFrom<RawFamily> for SymmetricFamily {
    type Error = Error;

    fn try_from(raw: RawFamily) -> Result<Self> {
        Self::new(raw.n, raw.terms)
    }
}

impl From<SymmetricFamily> for RawFamily {
    fn from(f: SymmetricFamily) -> Self {
        RawFamily { n: f.n, terms: f.terms }
    }
}

impl SymmetricFamily {
    /// Validates shapes, degrees and symmetry (within 1e-12), then stores
    /// exactly symmetric coefficients.
    pub fn new(n: usize, terms: Vec<SymmetricTerm>) -> Result<Self> {
        if n == 0 {
            return Err(Error::ZeroDimension);
        }
        let mut clean = Vec::with_capacity(terms.len());
        for term in terms {
            if term.lambda_power > MAX_DEGREE || term.t_power > MAX_DEGREE {
                return Err(Error::InvalidArgument(format!(
                    "term lambda^{} t^{} exceeds degree {MAX_DEGREE}",
                    term.lambda_power, term.t_power
                )));
            }
            if term.matrix.shape() != (2 * n, 2 * n) {
                return Err(Error::DimensionMismatch { expected: 2 * n, found: term.matrix.nrows() });
            }
            let residual = linalg::symmetry_residual(&term.matrix);
            if residual > 1e-12 {
                return Err(Error::NotSymmetric { residual });
            }
            let matrix = (&term.matrix + term.matrix.transpose()) * 0.5;
            clean.push(SymmetricTerm { matrix, ..term });
        }
        Ok(Self { n, terms: clean })
    }

    pub fn zero(n: usize) -> Self {
        Self { n, terms: Vec::new() }
    }

    /// `S_lambda(t) = m` for all parameters.
    pub fn constant(m: DMatrix<f64>) -> Result<Self> {
        let n = m.nrows() / 2;
        Self::new(n, vec![SymmetricTerm { lambda_power: 0, t_power: 0, matrix: m }])
    }

    /// `S_lambda(t) = c I`.
    pub fn scalar(n: usize, c: f64) -> Self {
        Self::constant(DMatrix::identity(2 * n, 2 * n) * c).expect("identity is symmetric")
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn terms(&self) -> &[SymmetricTerm] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.iter().all(|t| t.matrix.iter().all(|&x| x == 0.0))
    }

    /// `S + delta I`.
    pub fn shifted(&self, delta: f64) -> Self {
        let mut terms = self.terms.clone();
        terms.push(SymmetricTerm {
            lambda_power: 0,
            t_power: 0,
            matrix: DMatrix::identity(2 * self.n, 2 * self.n) * delta,
        });
        Self { n: self.n, terms }
    }

    pub fn eval(&self, lambda: f64, t: f64) -> DMatrix<f64> {
        self.at_lambda(lambda).eval(t)
    }

    /// Collapses the `lambda` dependence.
    pub fn at_lambda(&self, lambda: f64) -> TimeProfile {
        let dim = 2 * self.n;
        let mut coeffs = vec![DMatrix::zeros(dim, dim); MAX_DEGREE as usize + 1];
        for term in &self.terms {
            coeffs[term.t_power as usize] += &term.matrix * lambda.powi(term.lambda_power as i32);
        }
        while coeffs.len() > 1 && coeffs.last().is_some_and(|c| c.iter().all(|&x| x == 0.0)) {
            coeffs.pop();
        }
        let zero = coeffs.len() == 1 && coeffs[0].iter().all(|&x| x == 0.0);
        TimeProfile { n: self.n, coeffs, zero }
    }

    /// Upper bound on `sup |S_lambda(t)|_2` over the unit square.
    pub fn sup_norm_bound(&self) -> f64 {
        self.terms.iter().map(|t| linalg::spectral_norm(&t.matrix)).sum()
    }

    /// Whether `S_0(t) = S_1(t)` for all `t`.
    pub fn same_at_endpoints(&self) -> bool {
        let (a, b) = (self.at_lambda(0.0), self.at_lambda(1.0));
        a.coeffs.len() == b.coeffs.len()
            && a.coeffs.iter().zip(&b.coeffs).all(|(x, y)| linalg::max_abs(&(x - y)) < 1e-14)
    }
}

/// `t -> S_lambda(t)` at a frozen `lambda`, as a polynomial in `t`.
#[derive(Debug, Clone)]
pub struct TimeProfile {
    n: usize,
    coeffs: Vec<DMatrix<f64>>,
    zero: bool,
}

impl TimeProfile {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn is_zero(&self) -> bool {
        self.zero
    }

    pub fn eval(&self, t: f64) -> DMatrix<f64> {
        // Horner
        let mut acc = self.coeffs.last().expect("at least one coefficient").clone();
        for c in self.coeffs.iter().rev().skip(1) {
            acc *= t;
            acc += c;
        }
        acc
    }
}
