use maslovflow::hamiltonian::{SolverSettings, SymmetricFamily, DEFAULT_STEPS};
use maslovflow::path::{LagrangianPath, PathDescriptor, PiecewiseLinear, MAX_REFINEMENT_DEPTH};
use maslovflow::specflow::DEFAULT_TOL;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::fmt;
use std::path::Path;

/// Anything wrong with the input rather than the mathematics. Maps to exit
/// status 2.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

fn default_window() -> [f64; 2] {
    [-PI + 0.1, PI - 0.1]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Solver {
    pub steps: usize,
    pub tol: f64,
    /// Refinement depth of grids and partitions. Fixed in this build; any
    /// other value is rejected.
    pub max_depth: usize,
    /// Open `mu` interval scanned by `spectra`.
    pub window: [f64; 2],
    /// Uniform `lambda` samples used by `spectra`.
    pub lambda_samples: usize,
}

impl Default for Solver {
    fn default() -> Self {
        Self {
            steps: DEFAULT_STEPS,
            tol: DEFAULT_TOL,
            max_depth: MAX_REFINEMENT_DEPTH,
            window: default_window(),
            lambda_samples: 101,
        }
    }
}

impl Solver {
    pub fn settings(&self) -> SolverSettings {
        SolverSettings { steps: self.steps, tol: self.tol }
    }
}

/// Sizes of the randomized suites run by `verify` when no explicit instance
/// is given.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SuiteSize {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub count: Option<usize>,
    /// Closed-endpoint instances of the three-term suite.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub closed: Option<usize>,
    /// Values of `c` for the scalar Morse family.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub morse_c: Option<Vec<f64>>,
    /// Conjugation shifts of the gap suite.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta0: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma1: Option<PathDescriptor>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma2: Option<PathDescriptor>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub potential: Option<SymmetricFamily>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<PiecewiseLinear>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<PiecewiseLinear>,
    #[serde(default)]
    pub solver: Solver,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub suite: Option<SuiteSize>,
    /// Expected integer for `maslov` and `sflow`; the report fails on mismatch.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expect: Option<i64>,
}

impl Default for ProblemConfig {
    fn default() -> Self {
        Self {
            n: None,
            gamma1: None,
            gamma2: None,
            potential: None,
            alpha: None,
            beta: None,
            solver: Solver::default(),
            seed: None,
            suite: None,
            expect: None,
        }
    }
}

/// Command-line values that take precedence over the file.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub steps: Option<usize>,
    pub tol: Option<f64>,
    pub window: Option<[f64; 2]>,
}

impl ProblemConfig {
    /// Parses JSON, reporting the offending field path and position.
    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let cfg: Self = serde_path_to_error::deserialize(de).map_err(|e| {
            let inner = e.inner();
            ConfigError(format!("field `{}`: {} (line {}, column {})", e.path(), inner, inner.line(), inner.column()))
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError(format!("{}: {e}", path.display())))?;
        Self::from_json(&text).map_err(|e| ConfigError(format!("{}: {e}", path.display())))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn apply(&mut self, o: &Overrides) -> Result<(), ConfigError> {
        if o.seed.is_some() {
            self.seed = o.seed;
        }
        if let Some(steps) = o.steps {
            self.solver.steps = steps;
        }
        if let Some(tol) = o.tol {
            self.solver.tol = tol;
        }
        if let Some(w) = o.window {
            self.solver.window = w;
        }
        self.validate()
    }

    /// Checks dimensions across all fields and the solver settings.
    pub fn validate(&self) -> Result<(), ConfigError> {
        let s = &self.solver;
        if s.steps < 64 {
            return Err(ConfigError(format!("solver.steps = {} is below the minimum 64", s.steps)));
        }
        if !(s.tol > 0.0 && s.tol.is_finite()) {
            return Err(ConfigError(format!("solver.tol = {} must be positive", s.tol)));
        }
        if s.max_depth != MAX_REFINEMENT_DEPTH {
            return Err(ConfigError(format!("solver.max_depth is fixed at {MAX_REFINEMENT_DEPTH} in this build")));
        }
        if !(s.window[0] < s.window[1]) || !s.window.iter().all(|w| w.is_finite()) {
            return Err(ConfigError(format!("solver.window {:?} is not an interval", s.window)));
        }
        if s.lambda_samples < 2 {
            return Err(ConfigError("solver.lambda_samples must be at least 2".into()));
        }
        let mut dims = Vec::new();
        for (name, d) in [("gamma1", &self.gamma1), ("gamma2", &self.gamma2)] {
            if let Some(d) = d {
                dims.push((name, d.validate().map_err(|e| ConfigError(format!("{name}: {e}")))?));
            }
        }
        if let Some(p) = &self.potential {
            dims.push(("potential", p.n()));
        }
        if let Some(n) = self.n {
            dims.push(("n", n));
        }
        if let Some(w) = dims.windows(2).find(|w| w[0].1 != w[1].1) {
            return Err(ConfigError(format!("{} has n = {} but {} has n = {}", w[0].0, w[0].1, w[1].0, w[1].1)));
        }
        if self.alpha.is_some() != self.beta.is_some() {
            return Err(ConfigError("alpha and beta must be given together".into()));
        }
        Ok(())
    }

    pub fn dimension(&self) -> Option<usize> {
        self.n.or_else(|| self.potential.as_ref().map(|p| p.n())).or_else(|| self.gamma1.as_ref().and_then(|d| d.validate().ok()))
    }

    /// Both boundary paths, or a config error naming the missing one.
    pub fn paths(&self) -> Result<(LagrangianPath, LagrangianPath), ConfigError> {
        let get = |name: &str, d: &Option<PathDescriptor>| {
            let d = d.clone().ok_or_else(|| ConfigError(format!("config needs `{name}`")))?;
            LagrangianPath::new(d).map_err(|e| ConfigError(format!("{name}: {e}")))
        };
        Ok((get("gamma1", &self.gamma1)?, get("gamma2", &self.gamma2)?))
    }

    pub fn has_paths(&self) -> bool {
        self.gamma1.is_some() && self.gamma2.is_some()
    }

    /// The potential, zero when absent.
    pub fn potential_or_zero(&self) -> Result<SymmetricFamily, ConfigError> {
        match (&self.potential, self.dimension()) {
            (Some(p), _) => Ok(p.clone()),
            (None, Some(n)) => Ok(SymmetricFamily::zero(n)),
            (None, None) => Err(ConfigError("cannot infer n: give `n`, `potential` or the paths".into())),
        }
    }
}

/// Parses `a,b` for `--window`.
pub fn parse_window(s: &str) -> Result<[f64; 2], String> {
    let (a, b) = s.split_once(',').ok_or("expected `min,max`")?;
    let parse = |x: &str| x.trim().parse::<f64>().map_err(|e| format!("{x}: {e}"));
    Ok([parse(a)?, parse(b)?])
}
