//! JSON run configuration with defaults and cross-field validation.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::family::{FamilyKind, MusielakFamily};
use crate::field::{Point, SymmetricField};
use crate::mesh::{build_mesh, pair_quadrature, DomainSpec, OmegaShape};
use crate::problem::ProblemSpec;
use crate::reaction::{ReactionFamily, ReactionKind};
use crate::solver::{SolverSettings, SweepSettings};
use std::sync::Arc;

fn default_collar_width() -> f64 {
    0.5
}
fn default_beta() -> SymmetricField {
    SymmetricField::Constant(1.0)
}
fn default_tol() -> f64 {
    1e-8
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DomainConfig {
    pub omega: OmegaShape,
    pub mesh_size: f64,
    #[serde(default = "default_collar_width")]
    pub collar_width: f64,
}

impl DomainConfig {
    pub fn spec(&self) -> DomainSpec {
        DomainSpec {
            omega: self.omega.clone(),
            collar_width: self.collar_width,
            mesh_size: self.mesh_size,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FamilyKindConfig {
    Power,
    PowerOverLog,
    PowerTimesLog { alpha: f64 },
}

impl From<FamilyKindConfig> for FamilyKind {
    fn from(k: FamilyKindConfig) -> Self {
        match k {
            FamilyKindConfig::Power => FamilyKind::Power,
            FamilyKindConfig::PowerOverLog => FamilyKind::PowerOverLog,
            FamilyKindConfig::PowerTimesLog { alpha } => FamilyKind::PowerTimesLog { alpha },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FamilyConfig {
    pub kind: FamilyKindConfig,
    pub exponent: SymmetricField,
    /// Declared growth indices; derived from the kind when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phi_minus: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phi_plus: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReactionConfig {
    pub kind: ReactionKind,
    pub exponent: SymmetricField,
    /// Defaults to q⁺ for the pure power, required otherwise.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c1: Option<f64>,
    /// Defaults to 1 for the pure power, required otherwise.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c2: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum ModeChoice {
    /// Ball below λ_*, Global otherwise.
    #[default]
    Auto,
    Ball,
    Global,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverConfig {
    pub rho: f64,
    pub tol_grad: f64,
    pub max_iter: usize,
    pub t0: f64,
    pub n_random_starts: usize,
    pub mode: ModeChoice,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            rho: 0.5,
            tol_grad: 1e-8,
            max_iter: 20_000,
            t0: 2.0,
            n_random_starts: 4,
            mode: ModeChoice::Auto,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SampleCounts {
    pub relations: usize,
    pub green: usize,
    pub gradcheck: usize,
    pub sphere: usize,
    pub constants: usize,
}

impl Default for SampleCounts {
    fn default() -> Self {
        Self {
            relations: 100,
            green: 50,
            gradcheck: 5,
            sphere: 200,
            constants: 50,
        }
    }
}

/// A λ value, either absolute or relative to one of the computed thresholds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum LambdaSpec {
    Absolute(f64),
    TimesLambdaStar { times_lambda_star: f64 },
    TimesLambdaStarUpper { times_lambda_star_upper: f64 },
}

impl LambdaSpec {
    pub fn resolve(&self, lambda_star: f64, lambda_star_upper: f64) -> f64 {
        match *self {
            LambdaSpec::Absolute(v) => v,
            LambdaSpec::TimesLambdaStar { times_lambda_star } => times_lambda_star * lambda_star,
            LambdaSpec::TimesLambdaStarUpper { times_lambda_star_upper } => times_lambda_star_upper * lambda_star_upper,
        }
    }

    fn is_relative(&self) -> bool {
        !matches!(self, LambdaSpec::Absolute(_))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
pub struct SweepConfig {
    pub lambda_grid: Vec<LambdaSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub domain: DomainConfig,
    pub family: FamilyConfig,
    pub reaction: ReactionConfig,
    pub s: f64,
    #[serde(default = "default_beta")]
    pub beta: SymmetricField,
    /// λ for `solve` and `gradcheck`.
    #[serde(default = "default_lambda")]
    pub lambda: LambdaSpec,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default)]
    pub solver: SolverConfig,
    #[serde(default)]
    pub samples: SampleCounts,
    #[serde(default)]
    pub sweep: SweepConfig,
}

fn default_lambda() -> LambdaSpec {
    LambdaSpec::Absolute(0.0)
}

/// Why a configuration could not be turned into a run.
#[derive(Debug)]
pub enum ConfigError {
    /// Missing or unreadable file.
    Io(String),
    /// Malformed JSON or wrong field types.
    Parse(String),
    /// Well formed but inconsistent.
    Validation(String),
}

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ConfigError::Io(m) => write!(f, "cannot read config: {m}"),
            ConfigError::Parse(m) => write!(f, "cannot parse config: {m}"),
            ConfigError::Validation(m) => write!(f, "invalid config: {m}"),
        }
    }
}

impl RunConfig {
    pub fn from_json(text: &str) -> std::result::Result<Self, ConfigError> {
        let cfg: RunConfig = serde_json::from_str(text)
            .map_err(|e| ConfigError::Parse(format!("line {} column {}: {e}", e.line(), e.column())))?;
        cfg.validate().map_err(|e| ConfigError::Validation(e.to_string()))?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> std::result::Result<(Self, Vec<u8>), ConfigError> {
        let bytes = std::fs::read(path).map_err(|e| ConfigError::Io(format!("{}: {e}", path.display())))?;
        let text = String::from_utf8(bytes.clone()).map_err(|e| ConfigError::Parse(e.to_string()))?;
        Ok((Self::from_json(&text)?, bytes))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    /// Builds everything once so that no computation starts on a bad config.
    pub fn validate(&self) -> Result<()> {
        if !(self.s > 0.0 && self.s < 1.0) {
            return Err(Error::Validation(format!("s in (0,1) required, got {}", self.s)));
        }
        if !(self.tol > 0.0) {
            return Err(Error::Validation("tol > 0 required".into()));
        }
        let sv = &self.solver;
        if !(sv.rho > 0.0 && sv.rho < 1.0) {
            return Err(Error::Validation(format!("solver.rho in (0,1) required, got {}", sv.rho)));
        }
        if !(sv.tol_grad > 0.0) {
            return Err(Error::Validation("solver.tol_grad > 0 required".into()));
        }
        if !(sv.t0 > 1.0) {
            return Err(Error::Validation(format!("solver.t0 > 1 required, got {}", sv.t0)));
        }
        if let LambdaSpec::Absolute(l) = self.lambda {
            if !(l >= 0.0) {
                return Err(Error::Validation(format!("lambda >= 0 required, got {l}")));
            }
        }
        self.problem_with_lambda(0.0).map(|_| ())
    }

    pub fn sample_points(&self, dom: &DomainSpec) -> Vec<Point> {
        match dom.omega {
            OmegaShape::Interval([a, b]) => (0..5).map(|k| [a + (b - a) * k as f64 / 4.0, 0.0]).collect(),
            OmegaShape::Rectangle([[x0, x1], [y0, y1]]) => {
                let mut v = Vec::new();
                for i in 0..3 {
                    for j in 0..3 {
                        v.push([x0 + (x1 - x0) * i as f64 / 2.0, y0 + (y1 - y0) * j as f64 / 2.0]);
                    }
                }
                v
            }
        }
    }

    pub fn family(&self) -> Result<MusielakFamily> {
        let dom = self.domain.spec();
        let pts = self.sample_points(&dom);
        let kind: FamilyKind = self.family.kind.into();
        let known = MusielakFamily::with_known_bounds(kind.clone(), self.family.exponent.clone(), &pts)?;
        MusielakFamily::new(
            kind,
            self.family.exponent.clone(),
            self.family.phi_minus.unwrap_or(known.phi_minus),
            self.family.phi_plus.unwrap_or(known.phi_plus),
        )
    }

    pub fn reaction(&self) -> Result<ReactionFamily> {
        let dom = self.domain.spec();
        let pts = self.sample_points(&dom);
        let r = &self.reaction;
        let (_, q_hi) = r.exponent.diagonal_range(&pts);
        let (c1, c2) = match (r.kind, r.c1, r.c2) {
            (_, Some(c1), Some(c2)) => (c1, c2),
            (ReactionKind::PurePower, c1, c2) => (c1.unwrap_or(q_hi), c2.unwrap_or(1.0)),
            _ => return Err(Error::Validation("reaction.c1 and reaction.c2 are required for this kind".into())),
        };
        ReactionFamily::new(r.kind, r.exponent.clone(), c1, c2, &pts)
    }

    pub fn problem_with_lambda(&self, lambda: f64) -> Result<ProblemSpec> {
        let dom = self.domain.spec();
        if !(self.s > 0.0 && self.s < 1.0) {
            return Err(Error::Validation(format!("s in (0,1) required, got {}", self.s)));
        }
        let mesh = Arc::new(build_mesh(&dom).map_err(as_validation)?);
        let quad = Arc::new(pair_quadrature(&mesh, self.s).map_err(as_validation)?);
        ProblemSpec::from_parts(mesh, quad, lambda, self.family()?, self.beta.clone(), self.reaction()?)
    }

    pub fn needs_constants(&self) -> bool {
        self.lambda.is_relative() || self.solver.mode == ModeChoice::Auto
    }

    pub fn solver_settings(&self) -> SolverSettings {
        SolverSettings {
            tol_grad: self.solver.tol_grad,
            max_iter: self.solver.max_iter,
            tol: self.tol,
            t0: self.solver.t0,
        }
    }

    pub fn sweep_settings(&self) -> SweepSettings {
        SweepSettings {
            rho: self.solver.rho,
            n_sphere: self.samples.sphere,
            n_random_starts: self.solver.n_random_starts,
            seed: self.seed,
            solver: self.solver_settings(),
        }
    }
}

fn as_validation(e: Error) -> Error {
    match e {
        Error::InvalidInput(m) => Error::Validation(m),
        other => other,
    }
}
