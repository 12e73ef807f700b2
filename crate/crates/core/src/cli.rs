//! Command dispatch for the `nlrobin` binary: one JSON config in, CSV files
//! plus a manifest out, outcome encoded in the exit code.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Parser, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

use crate::config::{ConfigError, ModeChoice, RunConfig};
use crate::energy::{estimate_constants, finite_difference_error, Constants};
use crate::error::{Error, Result};
use crate::family::{check_conditions, default_t_grid};
use crate::mesh::{build_mesh, pair_quadrature, DomainSpec};
use crate::operators::{apply_fractional_laplacian, apply_neumann, green_check, write_green_csv};
use crate::problem::ProblemSpec;
use crate::sobolev::sobolev_conjugate_diag;
use crate::solver::{minimize_checked, sweep_lambda, write_sweep_csv, Init, Mode, SolveResult};
use crate::space::{norms, relation_suite, DiscreteFunction, NormReport, RelationSettings};

pub const EXIT_PASS: i32 = 0;
pub const EXIT_PROPERTY: i32 = 1;
pub const EXIT_IO: i32 = 2;
pub const EXIT_VALIDATION: i32 = 3;
pub const EXIT_INTERNAL: i32 = 4;

/// Green identity residual bound, relative to the summed magnitudes.
pub const GREEN_TOL: f64 = 1e-12;
/// Relation suite tolerance and norm bisection tolerance.
pub const RELATION_TOL: f64 = 1e-7;
pub const NORM_TOL: f64 = 1e-9;
pub const GRADCHECK_TOL: f64 = 1e-5;
pub const GRADCHECK_STEP: f64 = 1e-6;

#[derive(Debug, Parser)]
#[command(name = "nlrobin", version, about = "Nonlocal Neumann-Robin problems in fractional Musielak-Sobolev spaces")]
pub struct Cli {
    #[arg(value_enum)]
    pub command: Command,
    /// JSON run configuration.
    #[arg(short = 'c', long = "config")]
    pub config: PathBuf,
    /// Output directory (created if missing).
    #[arg(short = 'o', long = "out")]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Command {
    VerifyFamily,
    VerifySpace,
    GreenCheck,
    Gradcheck,
    Solve,
    Sweep,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::VerifyFamily => "verify-family",
            Command::VerifySpace => "verify-space",
            Command::GreenCheck => "green-check",
            Command::Gradcheck => "gradcheck",
            Command::Solve => "solve",
            Command::Sweep => "sweep",
        }
    }
}

pub enum Outcome {
    Pass,
    /// Property failure with a human readable witness.
    Fail(String),
}

/// Collects the files a command writes.
pub struct OutDir {
    root: PathBuf,
    files: Vec<String>,
}

impl OutDir {
    pub fn create(root: &Path) -> Result<Self> {
        std::fs::create_dir_all(root)?;
        Ok(Self {
            root: root.to_path_buf(),
            files: Vec::new(),
        })
    }

    pub fn write(&mut self, name: &str, body: impl FnOnce(&mut dyn Write) -> std::io::Result<()>) -> Result<()> {
        let mut w = BufWriter::new(File::create(self.root.join(name))?);
        body(&mut w)?;
        w.flush()?;
        self.files.push(name.to_string());
        Ok(())
    }
}

fn exit_code_for(e: &Error) -> i32 {
    match e {
        Error::Io(_) => EXIT_IO,
        Error::InvalidInput(_) | Error::Validation(_) => EXIT_VALIDATION,
        Error::Consistency(_) | Error::MeshMismatch { .. } => EXIT_INTERNAL,
    }
}

/// Parses `args` (including the program name) and runs; returns the exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_IO } else { EXIT_PASS };
        }
    };
    run(cli.command, &cli.config, &cli.out)
}

pub fn run(command: Command, config: &Path, out: &Path) -> i32 {
    let (cfg, raw) = match RunConfig::load(config) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return match e {
                ConfigError::Io(_) | ConfigError::Parse(_) => EXIT_IO,
                ConfigError::Validation(_) => EXIT_VALIDATION,
            };
        }
    };
    let mut dir = match OutDir::create(out) {
        Ok(d) => d,
        Err(e) => {
            eprintln!("error: cannot create {}: {e}", out.display());
            return EXIT_IO;
        }
    };
    let outcome = run_command(command, &cfg, &mut dir);
    let (code, status) = match &outcome {
        Ok(Outcome::Pass) => (EXIT_PASS, "pass".to_string()),
        Ok(Outcome::Fail(w)) => {
            eprintln!("property failure: {w}");
            (EXIT_PROPERTY, "fail".to_string())
        }
        Err(e) => {
            eprintln!("error: {e}");
            (exit_code_for(e), "error".to_string())
        }
    };
    if let Err(e) = finish(&mut dir, command, &cfg, &raw, &status, outcome.as_ref().ok()) {
        eprintln!("error: cannot write results: {e}");
        return EXIT_IO;
    }
    code
}

fn finish(dir: &mut OutDir, command: Command, cfg: &RunConfig, raw: &[u8], status: &str, outcome: Option<&Outcome>) -> Result<()> {
    if let Some(Outcome::Fail(w)) = outcome {
        let w = w.clone();
        dir.write("witness.txt", move |f| writeln!(f, "{w}"))?;
    }
    let echo = cfg.to_json();
    dir.write("config.json", |f| writeln!(f, "{echo}"))?;
    dir.write("README.md", |f| f.write_all(SCHEMA_README.as_bytes()))?;
    let hash = Sha256::digest(raw);
    let hex: String = hash.iter().map(|b| format!("{b:02x}")).collect();
    let files = dir.files.join(",");
    let seed = cfg.seed;
    dir.write("manifest.txt", |f| {
        writeln!(f, "tool=nlrobin")?;
        writeln!(f, "version={}", env!("CARGO_PKG_VERSION"))?;
        writeln!(f, "command={}", command.name())?;
        writeln!(f, "config_sha256={hex}")?;
        writeln!(f, "seed={seed}")?;
        writeln!(f, "status={status}")?;
        writeln!(f, "files={files}")
    })
}

pub fn run_command(command: Command, cfg: &RunConfig, dir: &mut OutDir) -> Result<Outcome> {
    match command {
        Command::VerifyFamily => verify_family(cfg, dir),
        Command::VerifySpace => verify_space(cfg, dir),
        Command::GreenCheck => run_green(cfg, dir),
        Command::Gradcheck => gradcheck(cfg, dir),
        Command::Solve => solve(cfg, dir),
        Command::Sweep => sweep(cfg, dir),
    }
}

fn verify_family(cfg: &RunConfig, dir: &mut OutDir) -> Result<Outcome> {
    let fam = cfg.family()?;
    let dom = cfg.domain.spec();
    let pts = cfg.sample_points(&dom);
    let rep = check_conditions(&fam, &pts, &default_t_grid(), 1e-8)?;
    dir.write("conditions.csv", |f| {
        writeln!(f, "condition,ok,value_lo,value_hi")?;
        let (lo, hi) = rep.sampled_ratio_range;
        writeln!(f, "growth_ratio,{},{lo:e},{hi:e}", rep.phi1_ok)?;
        writeln!(f, "sqrt_convexity,{},,", rep.phi2_ok)?;
        writeln!(f, "bounded_at_one,{},,{:e}", rep.phi3_ok, rep.phi3_sup)?;
        writeln!(f, "delta2,{},,{:e}", rep.delta2_ok, rep.delta2_constant)?;
        let (lo, hi) = rep.diagonal_ratio_range;
        writeln!(f, "diagonal_growth_ratio,{},{lo:e},{hi:e}", rep.diagonal_ok)
    })?;
    dir.write("violations.csv", |f| {
        writeln!(f, "x0,x1,y0,y1,t,quantity,value")?;
        for v in &rep.violations {
            writeln!(f, "{:e},{:e},{:e},{:e},{:e},{},{:e}", v.x[0], v.x[1], v.y[0], v.y[1], v.t, v.quantity, v.value)?;
        }
        Ok(())
    })?;
    let sob = sobolev_conjugate_diag(&fam, cfg.s, dom.dim(), &pts)?;
    dir.write("sobolev.csv", |f| sob.write_csv(f))?;
    Ok(if rep.all_ok() {
        Outcome::Pass
    } else {
        Outcome::Fail(format!("{} sampled condition violations, first: {:?}", rep.violations.len(), rep.violations.first()))
    })
}

fn verify_space(cfg: &RunConfig, dir: &mut OutDir) -> Result<Outcome> {
    let prob = cfg.problem_with_lambda(0.0)?;
    let settings = RelationSettings {
        tol: RELATION_TOL,
        norm_tol: NORM_TOL,
        include_psi: true,
    };
    let rep = relation_suite(&prob, cfg.samples.relations.max(1), cfg.seed, settings)?;
    dir.write("relations.csv", |f| rep.write_csv(f))?;

    // empirical equivalence of ‖·‖_X and the modular norm
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed.wrapping_add(1));
    let mut reports = Vec::new();
    for _ in 0..cfg.samples.relations.clamp(1, 20) {
        let u = DiscreteFunction::random(prob.mesh.clone(), &mut rng);
        reports.push(norms(&u, &prob, NORM_TOL)?);
    }
    dir.write("norms.csv", |f| {
        writeln!(f, "{},ratio", NormReport::CSV_HEADER)?;
        for r in &reports {
            writeln!(f, "{},{:e}", r.csv_row(), r.norm_x / r.modular_norm)?;
        }
        Ok(())
    })?;

    let trunc = truncation_table(cfg)?;
    dir.write("truncation.csv", |f| {
        writeln!(f, "collar_width,pair_modular")?;
        for (w, m) in &trunc {
            writeln!(f, "{w:e},{m:e}")?;
        }
        Ok(())
    })?;
    Ok(if rep.violations == 0 {
        Outcome::Pass
    } else {
        let w = rep.rows.iter().find(|r| !r.ok).expect("a violation");
        Outcome::Fail(format!("{} relation violations, first: {w:?}", rep.violations))
    })
}

/// Pair modular of the indicator of Ω as the collar widens.
fn truncation_table(cfg: &RunConfig) -> Result<Vec<(f64, f64)>> {
    let base = cfg.domain.spec();
    let mut out = Vec::new();
    for factor in [1.0, 2.0, 4.0] {
        let dom = DomainSpec {
            collar_width: base.collar_width * factor,
            ..base.clone()
        };
        let mesh = std::sync::Arc::new(build_mesh(&dom)?);
        let quad = std::sync::Arc::new(pair_quadrature(&mesh, cfg.s)?);
        let p = ProblemSpec::from_parts(mesh.clone(), quad, 0.0, cfg.family()?, cfg.beta.clone(), cfg.reaction()?)?;
        let u = DiscreteFunction::omega_indicator(mesh, 1.0);
        out.push((dom.collar_width, 2.0 * p.pair_modular(&u.values, 1.0)));
    }
    Ok(out)
}

fn run_green(cfg: &RunConfig, dir: &mut OutDir) -> Result<Outcome> {
    let prob = cfg.problem_with_lambda(0.0)?;
    let rows = green_check(&prob, cfg.samples.green, cfg.seed)?;
    dir.write("green.csv", |f| write_green_csv(&rows, f))?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let u = DiscreteFunction::random(prob.mesh.clone(), &mut rng);
    let lap = apply_fractional_laplacian(&u, &prob)?;
    let neu = apply_neumann(&u, &prob)?;
    dir.write("laplacian.csv", |f| lap.write_csv(&prob, f))?;
    dir.write("neumann.csv", |f| neu.write_csv(&prob, f))?;
    let bad = rows.iter().find(|r| !(r.r1_rel <= GREEN_TOL && r.r2_rel <= GREEN_TOL));
    Ok(match bad {
        None => Outcome::Pass,
        Some(r) => Outcome::Fail(format!("identity residual above {GREEN_TOL:e}: {r:?}")),
    })
}

fn constants(cfg: &RunConfig, prob: &ProblemSpec) -> Result<Constants> {
    estimate_constants(prob, cfg.solver.rho, cfg.samples.constants, cfg.solver.t0, cfg.seed)
}

fn write_constants(dir: &mut OutDir, c: &Constants) -> Result<()> {
    dir.write("constants.csv", |f| {
        writeln!(f, "c_emb,q_exp,lambda_star,lambda_star_upper,lambda_star_upper_mass,t0")?;
        writeln!(
            f,
            "{:e},{:e},{:e},{:e},{:e},{:e}",
            c.c_emb, c.q_exp, c.lambda_star, c.lambda_star_upper, c.lambda_star_upper_mass, c.t0
        )
    })
}

/// The configured problem at the configured λ, with the thresholds when
/// they were needed to resolve λ or the mode.
fn configured_problem(cfg: &RunConfig, dir: &mut OutDir, want_constants: bool) -> Result<(ProblemSpec, Option<Constants>)> {
    let base = cfg.problem_with_lambda(0.0)?;
    let c = if want_constants || cfg.needs_constants() {
        let c = constants(cfg, &base)?;
        write_constants(dir, &c)?;
        Some(c)
    } else {
        None
    };
    let lambda = match &c {
        Some(c) => cfg.lambda.resolve(c.lambda_star, c.lambda_star_upper),
        None => cfg.lambda.resolve(f64::NAN, f64::NAN),
    };
    if !(lambda >= 0.0 && lambda.is_finite()) {
        return Err(Error::Validation(format!("lambda >= 0 required, got {lambda}")));
    }
    Ok((base.with_lambda(lambda)?, c))
}

fn gradcheck(cfg: &RunConfig, dir: &mut OutDir) -> Result<Outcome> {
    let (prob, _) = configured_problem(cfg, dir, false)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut rows = Vec::new();
    for k in 0..cfg.samples.gradcheck {
        let u = DiscreteFunction::random(prob.mesh.clone(), &mut rng);
        rows.push((k, finite_difference_error(&prob, &u, GRADCHECK_STEP)?));
    }
    dir.write("gradcheck.csv", |f| {
        writeln!(f, "sample,lambda,max_rel_error")?;
        for (k, e) in &rows {
            writeln!(f, "{k},{:e},{e:e}", prob.lambda)?;
        }
        Ok(())
    })?;
    Ok(match rows.iter().find(|r| !(r.1 <= GRADCHECK_TOL)) {
        None => Outcome::Pass,
        Some((k, e)) => Outcome::Fail(format!("sample {k}: relative gradient error {e:e} > {GRADCHECK_TOL:e}")),
    })
}

fn solve(cfg: &RunConfig, dir: &mut OutDir) -> Result<Outcome> {
    let (prob, c) = configured_problem(cfg, dir, true)?;
    let c = c.expect("constants requested");
    let mode = match cfg.solver.mode {
        ModeChoice::Ball => Mode::Ball { rho: cfg.solver.rho },
        ModeChoice::Global => Mode::Global,
        ModeChoice::Auto if prob.lambda < c.lambda_star => Mode::Ball { rho: cfg.solver.rho },
        ModeChoice::Auto => Mode::Global,
    };
    let init = Init::MultiStart {
        n: cfg.solver.n_random_starts,
        seed: cfg.seed,
    };
    let r = minimize_checked(&prob, mode, init, &cfg.solver_settings(), Some(c.lambda_star))?;
    if r.regime_warning {
        eprintln!("warning: ball mode requested with lambda >= lambda_star");
    }
    dir.write("solution.csv", |f| r.u.write_csv(f))?;
    dir.write("result.csv", |f| {
        writeln!(f, "lambda,{},regime_warning", SolveResult::CSV_HEADER)?;
        writeln!(f, "{:e},{},{}", prob.lambda, r.csv_row(), r.regime_warning)
    })?;
    let tol_grad = cfg.solver.tol_grad;
    Ok(if r.grad_norm <= tol_grad {
        Outcome::Pass
    } else {
        Outcome::Fail(format!(
            "no stationary point: grad_norm {:e} > {tol_grad:e} after {} iterations (stagnated: {})",
            r.grad_norm, r.iterations, r.stagnated
        ))
    })
}

fn sweep(cfg: &RunConfig, dir: &mut OutDir) -> Result<Outcome> {
    let base = cfg.problem_with_lambda(0.0)?;
    let c = constants(cfg, &base)?;
    write_constants(dir, &c)?;
    let grid: Vec<f64> = cfg
        .sweep
        .lambda_grid
        .iter()
        .map(|l| l.resolve(c.lambda_star, c.lambda_star_upper))
        .collect();
    if let Some(l) = grid.iter().find(|l| !(**l >= 0.0 && l.is_finite())) {
        return Err(Error::Validation(format!("lambda >= 0 required, got {l}")));
    }
    let rows = sweep_lambda(&base, &c, &grid, &cfg.sweep_settings())?;
    dir.write("sweep.csv", |f| write_sweep_csv(&rows, f))?;
    for r in &rows {
        let expect_nontrivial = r.lambda > 0.0 && (r.lambda < c.lambda_star || r.lambda >= c.lambda_star_upper);
        if r.lambda == 0.0 && r.classification != "trivial" {
            return Ok(Outcome::Fail(format!("lambda = 0 gave a nontrivial solution: {r:?}")));
        }
        if expect_nontrivial && r.classification != "nontrivial" {
            return Ok(Outcome::Fail(format!("expected a nontrivial solution: {r:?}")));
        }
        if r.lambda < c.lambda_star && !(r.sphere_min > 0.0) {
            return Ok(Outcome::Fail(format!("sphere probe not positive below lambda_star: {r:?}")));
        }
    }
    Ok(Outcome::Pass)
}

const SCHEMA_README: &str = "\
# Output files

Every run writes `manifest.txt` (key=value: tool, version, command,
config_sha256, seed, status, files), `config.json` (the configuration with
defaults filled in) and this file. Floats use Rust's shortest round-trip
exponent notation. A failing property check also writes `witness.txt`.

| file | command | columns |
|---|---|---|
| conditions.csv | verify-family | condition, ok, value_lo, value_hi |
| violations.csv | verify-family | x0, x1, y0, y1, t, quantity, value |
| sobolev.csv | verify-family | x, y, s, N, exponent_zero, exponent_inf, integrable_at_zero, divergent_at_inf |
| relations.csv | verify-space | sample, check, norm, value, lower, upper, margin, ok |
| norms.csv | verify-space | seminorm, lux_omega, lux_collar, norm_x, modular_norm, modular, ratio |
| truncation.csv | verify-space | collar_width, pair_modular |
| green.csv | green-check | sample, r1, r1_rel, r2, r2_rel, r3_max |
| laplacian.csv, neumann.csv | green-check | cell_id, region, value |
| gradcheck.csv | gradcheck | sample, lambda, max_rel_error |
| constants.csv | gradcheck, solve, sweep | c_emb, q_exp, lambda_star, lambda_star_upper, lambda_star_upper_mass, t0 |
| solution.csv | solve | node_id, x, [y,] region, u |
| result.csv | solve | lambda, mode, start, J, norm_u, grad_norm, neumann_residual_max, classification, iterations, stagnated, regime_warning |
| sweep.csv | sweep | lambda, mode, J, norm_u, grad_norm, sphere_min, neumann_residual_max, classification, iterations, seed |

Exit codes: 0 pass, 1 property failure, 2 I/O or parse error, 3 validation
error, 4 internal error.
";
