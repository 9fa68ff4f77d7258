use crate::config::{ConfigError, ProblemConfig, Solver};
use maslovflow::hamiltonian::{alpha_beta_identity, clm_hamiltonian, morse_index_formula, three_term_identity, VerificationReport};
use maslovflow::maslov::{crossing_list, maslov_pair, maslov_pair_detailed, DEFAULT_CROSSING_TOL};
use maslovflow::path::PiecewiseLinear;
use maslovflow::specflow::{spectral_flow_with, spectrum_window, BoundaryValueFamily, SpectralFlowOptions, SpectrumWindow};
use maslovflow::suite::{
    alpha_beta_suite, axiom_suite, clm_suite, gap_suite, morse_suite, three_term_suite, unperturbed_suite, SuiteReport,
};
use maslovflow::Error;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use std::fmt;
use std::time::Instant;

pub const DEFAULT_SEED: u64 = 1;

#[derive(Debug)]
pub enum CommandError {
    Config(ConfigError),
    Numerical(Error),
}

impl CommandError {
    pub fn exit_code(&self) -> u8 {
        match self {
            Self::Config(_) => 2,
            Self::Numerical(_) => 1,
        }
    }
}

impl fmt::Display for CommandError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Config(e) => write!(f, "config error: {e}"),
            Self::Numerical(e) => write!(f, "error: {e}"),
        }
    }
}

impl std::error::Error for CommandError {}

impl From<ConfigError> for CommandError {
    fn from(e: ConfigError) -> Self {
        Self::Config(e)
    }
}

impl From<Error> for CommandError {
    fn from(e: Error) -> Self {
        match e {
            // a bad window is an input problem
            Error::WindowEndpointIsEigenvalue { .. } | Error::InvalidWindow { .. } => Self::Config(ConfigError(e.to_string())),
            e => Self::Numerical(e),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Identity {
    /// Spectral flow against the Maslov index with no potential.
    Clm,
    /// The same equality for a Hamiltonian potential.
    Hamiltonian,
    ThreeTerm,
    AlphaBeta,
    Morse,
    Axioms,
    Gap,
}

impl Identity {
    pub fn name(self) -> &'static str {
        match self {
            Self::Clm => "clm",
            Self::Hamiltonian => "hamiltonian",
            Self::ThreeTerm => "three-term",
            Self::AlphaBeta => "alpha-beta",
            Self::Morse => "morse",
            Self::Axioms => "axioms",
            Self::Gap => "gap",
        }
    }
}

/// Effective settings, after command-line overrides.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Effective {
    #[serde(flatten)]
    pub solver: Solver,
    pub seed: u64,
}

/// What every command writes. `timing_seconds` is the only field that may
/// differ between runs of the same config.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub command: String,
    pub inputs: ProblemConfig,
    pub effective: Effective,
    pub result: Value,
    pub passed: bool,
    pub timing_seconds: f64,
}

impl Report {
    fn new(command: &str, cfg: &ProblemConfig, result: Value, passed: bool, started: Instant) -> Self {
        Self {
            command: command.into(),
            inputs: cfg.clone(),
            effective: Effective { solver: cfg.solver.clone(), seed: seed(cfg) },
            result,
            passed,
            timing_seconds: started.elapsed().as_secs_f64(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// The report with the timing zeroed, for comparing runs.
    pub fn without_timing(&self) -> Self {
        Self { timing_seconds: 0.0, ..self.clone() }
    }
}

fn seed(cfg: &ProblemConfig) -> u64 {
    cfg.seed.unwrap_or(DEFAULT_SEED)
}

fn to_value<T: Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("serializable")
}

fn expectation(cfg: &ProblemConfig, value: i64) -> bool {
    cfg.expect.is_none_or(|e| e == value)
}

fn family(cfg: &ProblemConfig) -> Result<BoundaryValueFamily, CommandError> {
    let (g1, g2) = cfg.paths()?;
    Ok(BoundaryValueFamily::new(g1, g2, cfg.potential_or_zero()?)?.with_steps(cfg.solver.steps)?)
}

pub fn cmd_maslov(cfg: &ProblemConfig) -> Result<Report, CommandError> {
    let started = Instant::now();
    let (g1, g2) = cfg.paths()?;
    let outcome = maslov_pair_detailed(&g1, &g2)?;
    let crossings = crossing_list(&g1, &g2, DEFAULT_CROSSING_TOL)?;
    let result = json!({
        "value": outcome.value,
        "admissible": outcome.admissible,
        "theta": outcome.theta,
        "crossings": crossings,
    });
    Ok(Report::new("maslov", cfg, result, expectation(cfg, outcome.value), started))
}

pub fn cmd_sflow(cfg: &ProblemConfig) -> Result<Report, CommandError> {
    let started = Instant::now();
    let fam = family(cfg)?;
    let opts = SpectralFlowOptions { tol: cfg.solver.tol, ..SpectralFlowOptions::default() };
    let res = spectral_flow_with(&fam, &fam.default_grid(), &opts)?;
    let result = json!({
        "value": res.value,
        "partition": res.partition,
        "epsilons": res.epsilons,
        "window": opts.window,
    });
    Ok(Report::new("sflow", cfg, result, expectation(cfg, res.value), started))
}

/// `x` with 12 significant digits in positional notation.
pub fn significant(x: f64) -> String {
    // the exponent after rounding to 12 digits, so 9.99..96 becomes 10.0..
    let sci = format!("{x:.11e}");
    let exp: i32 = sci.split_once('e').and_then(|(_, e)| e.parse().ok()).unwrap_or(0);
    let decimals = (11 - exp).max(0) as usize;
    format!("{x:.decimals$}")
}

/// Rows `lambda, mu, multiplicity`, ordered by `lambda` then `mu`.
pub fn spectra_csv(windows: &[SpectrumWindow]) -> String {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
    w.write_record(["lambda", "mu", "multiplicity"]).expect("in-memory write");
    for win in windows {
        for e in &win.eigenvalues {
            w.write_record([significant(win.lambda), significant(e.mu), e.multiplicity.to_string()]).expect("in-memory write");
        }
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("ascii")
}

/// Spectra on `lambda_samples` uniform values of `lambda` within the
/// configured window. Returns the report and the CSV text.
pub fn cmd_spectra(cfg: &ProblemConfig) -> Result<(Report, String), CommandError> {
    let started = Instant::now();
    let fam = family(cfg)?;
    let [lo, hi] = cfg.solver.window;
    let m = cfg.solver.lambda_samples - 1;
    let windows = (0..=m)
        .map(|k| spectrum_window(&fam, k as f64 / m as f64, lo, hi, cfg.solver.tol))
        .collect::<Result<Vec<_>, _>>()?;
    let rows: usize = windows.iter().map(|w| w.eigenvalues.len()).sum();
    let result = json!({ "lambda_samples": windows.len(), "rows": rows });
    Ok((Report::new("spectra", cfg, result, true, started), spectra_csv(&windows)))
}

fn count(cfg: &ProblemConfig, default: usize) -> usize {
    cfg.suite.as_ref().and_then(|s| s.count).unwrap_or(default)
}

fn single(report: VerificationReport) -> (Value, bool) {
    let passed = report.passed;
    (to_value(&report), passed)
}

fn suite(report: SuiteReport) -> (Value, bool) {
    let passed = report.passed;
    (to_value(&report), passed)
}

/// Runs one identity checker on the configured instance, or its randomized
/// suite when the config has no paths.
pub fn cmd_verify(cfg: &ProblemConfig, which: Identity) -> Result<Report, CommandError> {
    let started = Instant::now();
    let settings = cfg.solver.settings();
    let seed = seed(cfg);
    let sizes = cfg.suite.clone().unwrap_or(crate::config::SuiteSize { count: None, closed: None, morse_c: None, delta0: None });
    let (result, passed) = match which {
        Identity::Clm if cfg.has_paths() => {
            let fam = family(cfg)?;
            let opts = SpectralFlowOptions { tol: settings.tol, ..SpectralFlowOptions::default() };
            let sfl = spectral_flow_with(&fam, &fam.default_grid(), &opts)?.value;
            let (g1, g2) = cfg.paths()?;
            let m = if fam.potential().is_zero() {
                maslov_pair(&g1, &g2)?
            } else {
                clm_hamiltonian(fam.potential(), &g1, &g2, &settings)?.rhs
            };
            (json!({ "sfl": sfl, "maslov": m }), sfl == m)
        }
        Identity::Clm => suite(unperturbed_suite(seed, count(cfg, 50), &settings)?),
        Identity::Hamiltonian if cfg.has_paths() => {
            let (g1, g2) = cfg.paths()?;
            single(clm_hamiltonian(&cfg.potential_or_zero()?, &g1, &g2, &settings)?)
        }
        Identity::Hamiltonian => suite(clm_suite(seed, count(cfg, 25), &settings)?),
        Identity::ThreeTerm if cfg.has_paths() => {
            let (g1, g2) = cfg.paths()?;
            single(three_term_identity(&cfg.potential_or_zero()?, &g1, &g2, &settings)?)
        }
        Identity::ThreeTerm => suite(three_term_suite(seed, count(cfg, 25), sizes.closed.unwrap_or(5), &settings)?),
        Identity::AlphaBeta if cfg.has_paths() => {
            let (g1, g2) = cfg.paths()?;
            let alpha = cfg.alpha.clone().unwrap_or_else(|| PiecewiseLinear::constant(0.0));
            let beta = cfg.beta.clone().unwrap_or_else(|| PiecewiseLinear::linear(0.0, 1.0));
            match alpha_beta_identity(&cfg.potential_or_zero()?, &g1, &g2, &alpha, &beta, &settings) {
                Err(e @ Error::Reparametrization { .. }) => return Err(CommandError::Config(ConfigError(e.to_string()))),
                other => single(other?),
            }
        }
        Identity::AlphaBeta => suite(alpha_beta_suite(seed, count(cfg, 25), &settings)?),
        Identity::Morse if cfg.potential.is_some() => single(morse_index_formula(&cfg.potential_or_zero()?, &settings)?),
        Identity::Morse => {
            let cs = sizes.morse_c.unwrap_or_else(|| vec![5.0, 15.0, 30.0]);
            suite(morse_suite(seed, &cs, count(cfg, 5), &settings)?)
        }
        Identity::Axioms => suite(axiom_suite(seed, count(cfg, 50))?),
        Identity::Gap => {
            let deltas = sizes.delta0.unwrap_or_else(|| vec![0.05, 0.1]);
            suite(gap_suite(seed, count(cfg, 100), &deltas)?)
        }
    };
    Ok(Report::new(&format!("verify {}", which.name()), cfg, result, passed, started))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn twelve_significant_digits() {
        assert_eq!(significant(0.0), "0.00000000000");
        assert_eq!(significant(1.0), "1.00000000000");
        assert_eq!(significant(-std::f64::consts::FRAC_PI_2), "-1.57079632679");
        assert_eq!(significant(0.01), "0.0100000000000");
        assert_eq!(significant(123.456), "123.456000000");
        assert_eq!(significant(9.9999999999996), "10.0000000000");
    }

    #[test]
    fn header_only_csv() {
        assert_eq!(spectra_csv(&[]), "lambda,mu,multiplicity\n");
    }
}
