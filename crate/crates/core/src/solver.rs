//! Minimization of J_λ: steepest descent with Armijo backtracking, either
//! constrained to the ball ‖u‖ ≤ ρ (with Ekeland-type perturbations on
//! stagnation) or unconstrained from several starting points.

use std::io::Write;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::energy::{default_bump, energy_values, euclidean_norm, gradient_values, sphere_min, Constants};
use crate::error::{invalid, Result};
use crate::mesh::Region;
use crate::problem::ProblemSpec;
use crate::space::{modular_norm_values, rho_s_values, DiscreteFunction};

const ARMIJO_C: f64 = 1e-4;
const MAX_HALVINGS: usize = 60;
const EKELAND_DIRECTIONS: usize = 8;
/// Relative size of J changes treated as floating-point noise.
const ROUNDOFF: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum Mode {
    Ball { rho: f64 },
    Global,
}

impl Mode {
    pub fn name(&self) -> &'static str {
        match self {
            Mode::Ball { .. } => "ball",
            Mode::Global => "global",
        }
    }
}

#[derive(Debug, Clone)]
pub enum Init {
    Given(DiscreteFunction),
    /// The standard start set: t₀1_Ω, `n` small random fields, and tθ for
    /// t ∈ {0.01, 0.1}.
    MultiStart { n: usize, seed: u64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Classification {
    Trivial,
    Nontrivial,
}

impl Classification {
    pub fn name(&self) -> &'static str {
        match self {
            Classification::Trivial => "trivial",
            Classification::Nontrivial => "nontrivial",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverSettings {
    pub tol_grad: f64,
    pub max_iter: usize,
    /// Threshold for the trivial/nontrivial decision and the Ekeland step.
    pub tol: f64,
    /// Amplitude of the constant start t₀1_Ω.
    pub t0: f64,
}

impl Default for SolverSettings {
    fn default() -> Self {
        Self {
            tol_grad: 1e-8,
            max_iter: 20_000,
            tol: 1e-8,
            t0: 2.0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SolveResult {
    pub u: DiscreteFunction,
    pub j: f64,
    pub grad_norm: f64,
    pub norm_u: f64,
    pub mode: Mode,
    pub classification: Classification,
    pub iterations: usize,
    /// max over collar cells of |𝒩^s u + β φ̂(u)|.
    pub neumann_residual_max: f64,
    /// The line search failed and no perturbation helped.
    pub stagnated: bool,
    /// Ball mode was asked for λ ≥ λ_*.
    pub regime_warning: bool,
    /// Which start produced the result.
    pub start: String,
}

impl SolveResult {
    pub const CSV_HEADER: &'static str =
        "mode,start,J,norm_u,grad_norm,neumann_residual_max,classification,iterations,stagnated";

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{:e},{:e},{:e},{:e},{},{},{}",
            self.mode.name(),
            self.start,
            self.j,
            self.norm_u,
            self.grad_norm,
            self.neumann_residual_max,
            self.classification.name(),
            self.iterations,
            self.stagnated
        )
    }
}

/// max over collar cells of |g_k|/|c_k|, which equals the Neumann–Robin
/// residual there.
pub fn neumann_residual_max(prob: &ProblemSpec, u: &[f64]) -> f64 {
    let g = gradient_values(prob, u);
    prob.mesh
        .collar_cells()
        .map(|(k, c)| (g[k] / c.measure).abs())
        .fold(0.0, f64::max)
}

struct Run {
    u: Vec<f64>,
    j: f64,
    g: Vec<f64>,
    iterations: usize,
    stagnated: bool,
}

/// Radial rescaling onto the closed ball; identity inside it.
fn project(prob: &ProblemSpec, u: Vec<f64>, rho: f64) -> Result<Vec<f64>> {
    if rho_s_values(prob, &u, rho) <= 1.0 {
        return Ok(u);
    }
    let n = modular_norm_values(prob, &u, 1e-12)?;
    let a = rho / n * (1.0 - 1e-12);
    Ok(u.into_iter().map(|v| a * v).collect())
}

fn descend(prob: &ProblemSpec, mode: Mode, start: Vec<f64>, s: &SolverSettings, rng: &mut ChaCha8Rng) -> Result<Run> {
    let ball = match mode {
        Mode::Ball { rho } => Some(rho),
        Mode::Global => None,
    };
    let inv_mass: Vec<f64> = prob.mesh.cells.iter().map(|c| 1.0 / c.measure).collect();
    let mut u = match ball {
        Some(rho) => project(prob, start, rho)?,
        None => start,
    };
    let mut j = energy_values(prob, &u);
    let mut g = gradient_values(prob, &u);
    let mut step = 1.0;
    let mut iterations = 0;
    let mut stagnated = false;
    while iterations < s.max_iter && euclidean_norm(&g) > s.tol_grad {
        iterations += 1;
        // descent direction in the mass-weighted metric
        let d: Vec<f64> = g.iter().zip(&inv_mass).map(|(g, m)| -g * m).collect();
        let mut accepted = None;
        let mut alpha = 2.0 * step;
        for _ in 0..MAX_HALVINGS {
            let trial: Vec<f64> = u.iter().zip(&d).map(|(u, d)| u + alpha * d).collect();
            let trial = match ball {
                Some(rho) => project(prob, trial, rho)?,
                None => trial,
            };
            let decrease: f64 = g.iter().zip(u.iter().zip(&trial)).map(|(g, (a, b))| g * (a - b)).sum();
            let jt = energy_values(prob, &trial);
            if decrease > 0.0 && jt <= j - ARMIJO_C * decrease {
                accepted = Some((trial, jt));
                break;
            }
            // Once J differences drop to roundoff, estimate them by the
            // trapezoid rule on directional derivatives instead.
            if decrease > 0.0 && (jt - j).abs() <= ROUNDOFF * j.abs().max(f64::MIN_POSITIVE) {
                let gt = gradient_values(prob, &trial);
                let slope_sum: f64 = g
                    .iter()
                    .zip(&gt)
                    .zip(u.iter().zip(&trial))
                    .map(|((g0, g1), (a, b))| (g0 + g1) * (b - a))
                    .sum();
                if 0.5 * slope_sum <= -ARMIJO_C * decrease {
                    accepted = Some((trial, jt.min(j)));
                    break;
                }
            }
            alpha *= 0.5;
        }
        match accepted {
            Some((trial, jt)) => {
                step = alpha;
                u = trial;
                j = jt;
            }
            None => match ekeland(prob, ball, &u, j, s.tol, rng)? {
                Some((trial, jt)) => {
                    step = 1.0;
                    u = trial;
                    j = jt;
                }
                None => {
                    stagnated = true;
                    break;
                }
            },
        }
        g = gradient_values(prob, &u);
    }
    Ok(Run {
        u,
        j,
        g,
        iterations,
        stagnated,
    })
}

/// Best strict decrease among random directions of modular-norm size 10·tol.
fn ekeland(
    prob: &ProblemSpec,
    ball: Option<f64>,
    u: &[f64],
    j: f64,
    tol: f64,
    rng: &mut ChaCha8Rng,
) -> Result<Option<(Vec<f64>, f64)>> {
    let gamma = 10.0 * tol;
    let mut best: Option<(Vec<f64>, f64)> = None;
    for _ in 0..EKELAND_DIRECTIONS {
        let dir = DiscreteFunction::random(prob.mesh.clone(), rng);
        let n = modular_norm_values(prob, &dir.values, 1e-9)?;
        if n == 0.0 {
            continue;
        }
        let trial: Vec<f64> = u.iter().zip(&dir.values).map(|(u, d)| u + gamma / n * d).collect();
        let trial = match ball {
            Some(rho) => project(prob, trial, rho)?,
            None => trial,
        };
        let jt = energy_values(prob, &trial);
        if jt < j && best.as_ref().map_or(true, |b| jt < b.1) {
            best = Some((trial, jt));
        }
    }
    Ok(best)
}

fn starts(prob: &ProblemSpec, n: usize, seed: u64, t0: f64) -> Result<Vec<(String, Vec<f64>)>> {
    let mesh = prob.mesh.clone();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = vec![(
        "constant".to_string(),
        DiscreteFunction::omega_indicator(mesh.clone(), t0).values,
    )];
    for k in 0..n {
        out.push((format!("random{k}"), DiscreteFunction::random(mesh.clone(), &mut rng).scaled(0.1).values));
    }
    let theta = default_bump(mesh)?;
    for t in [0.01, 0.1] {
        out.push((format!("bump{t}"), theta.scaled(t).values));
    }
    Ok(out)
}

pub fn minimize(prob: &ProblemSpec, mode: Mode, init: Init, settings: &SolverSettings) -> Result<SolveResult> {
    minimize_checked(prob, mode, init, settings, None)
}

/// As [`minimize`]; `lambda_star` enables the regime warning for Ball mode.
pub fn minimize_checked(
    prob: &ProblemSpec,
    mode: Mode,
    init: Init,
    settings: &SolverSettings,
    lambda_star: Option<f64>,
) -> Result<SolveResult> {
    if !(settings.tol_grad > 0.0 && settings.tol > 0.0) {
        return Err(invalid("tolerances must be positive"));
    }
    if let Mode::Ball { rho } = mode {
        if !(rho > 0.0 && rho < 1.0) {
            return Err(invalid(format!("ball radius must lie in (0,1), got {rho}")));
        }
    }
    let (candidates, seed) = match init {
        Init::Given(u) => {
            prob.check(&u)?;
            (vec![("given".to_string(), u.values)], 0)
        }
        Init::MultiStart { n, seed } => (starts(prob, n, seed, settings.t0)?, seed),
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9_7f4a_7c15);
    let mut best: Option<(String, Run)> = None;
    for (name, start) in candidates {
        let run = descend(prob, mode, start, settings, &mut rng)?;
        if best.as_ref().map_or(true, |(_, b)| run.j < b.j) {
            best = Some((name, run));
        }
    }
    let (start, run) = best.expect("at least one start");
    let norm_u = modular_norm_values(prob, &run.u, 1e-12)?;
    let classification = if norm_u > 10.0 * settings.tol && run.j < 0.0 {
        Classification::Nontrivial
    } else {
        Classification::Trivial
    };
    let regime_warning = matches!(mode, Mode::Ball { .. }) && lambda_star.is_some_and(|ls| prob.lambda >= ls);
    let neumann = neumann_residual_max(prob, &run.u);
    Ok(SolveResult {
        u: DiscreteFunction::new(prob.mesh.clone(), run.u)?,
        j: run.j,
        grad_norm: euclidean_norm(&run.g),
        norm_u,
        mode,
        classification,
        iterations: run.iterations,
        neumann_residual_max: neumann,
        stagnated: run.stagnated,
        regime_warning,
        start,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SweepSettings {
    pub rho: f64,
    pub n_sphere: usize,
    pub n_random_starts: usize,
    pub seed: u64,
    pub solver: SolverSettings,
}

impl Default for SweepSettings {
    fn default() -> Self {
        Self {
            rho: 0.5,
            n_sphere: 200,
            n_random_starts: 4,
            seed: 0,
            solver: SolverSettings::default(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepRow {
    pub lambda: f64,
    pub mode: &'static str,
    pub j: f64,
    pub norm_u: f64,
    pub grad_norm: f64,
    pub sphere_min: f64,
    pub neumann_residual_max: f64,
    pub classification: &'static str,
    pub iterations: usize,
    pub seed: u64,
}

pub const SWEEP_HEADER: &str =
    "lambda,mode,J,norm_u,grad_norm,sphere_min,neumann_residual_max,classification,iterations,seed";

pub fn write_sweep_csv<W: Write>(rows: &[SweepRow], mut w: W) -> std::io::Result<()> {
    writeln!(w, "{SWEEP_HEADER}")?;
    for r in rows {
        writeln!(
            w,
            "{:e},{},{:e},{:e},{:e},{:e},{:e},{},{},{}",
            r.lambda, r.mode, r.j, r.norm_u, r.grad_norm, r.sphere_min, r.neumann_residual_max, r.classification, r.iterations, r.seed
        )?;
    }
    Ok(())
}

/// One solve per λ: Ball mode below λ_*, Global mode otherwise.
pub fn sweep_lambda(prob: &ProblemSpec, constants: &Constants, grid: &[f64], settings: &SweepSettings) -> Result<Vec<SweepRow>> {
    grid.iter()
        .map(|&lambda| {
            let p = prob.with_lambda(lambda)?;
            let mode = if lambda < constants.lambda_star {
                Mode::Ball { rho: settings.rho }
            } else {
                Mode::Global
            };
            let mut rng = ChaCha8Rng::seed_from_u64(settings.seed);
            let sphere = sphere_min(&p, settings.rho, settings.n_sphere, &mut rng)?;
            let init = Init::MultiStart {
                n: settings.n_random_starts,
                seed: settings.seed,
            };
            let r = minimize_checked(&p, mode, init, &settings.solver, Some(constants.lambda_star))?;
            Ok(SweepRow {
                lambda,
                mode: mode.name(),
                j: r.j,
                norm_u: r.norm_u,
                grad_norm: r.grad_norm,
                sphere_min: sphere,
                neumann_residual_max: r.neumann_residual_max,
                classification: r.classification.name(),
                iterations: r.iterations,
                seed: settings.seed,
            })
        })
        .collect()
}

/// Values of a solution on Ω only, handy for diagnostics.
pub fn omega_values(r: &SolveResult) -> Vec<f64> {
    r.u.mesh()
        .cells
        .iter()
        .zip(&r.u.values)
        .filter(|(c, _)| c.region == Region::Omega)
        .map(|(_, v)| *v)
        .collect()
}
