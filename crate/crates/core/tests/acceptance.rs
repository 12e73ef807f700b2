//! Acceptance checks. Each test prints one PASS/FAIL line and then asserts.
//! Oracles are written here from scratch where the library result could
//! otherwise only be compared with itself.

use std::sync::Arc;
use std::time::{Duration, Instant};

use nonlocal_robin::energy::{energy_j, estimate_constants, gradient_j, landscape_probes, default_bump};
use nonlocal_robin::family::growth_ratio;
use nonlocal_robin::solver::{minimize, minimize_checked, Classification, Init, Mode, SolverSettings};
use nonlocal_robin::sobolev::sobolev_conjugate_diag;
use nonlocal_robin::space::{
    convexity_margin, holder_sides, modular_norm, modular_rho_s, relation_suite, RelationSettings,
};
use nonlocal_robin::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const IDENTITY_TOL: f64 = 1e-12;
const RELATION_TOL: f64 = 1e-7;
const NORM_TOL: f64 = 1e-9;
const PINCH_TOL: f64 = 1e-7;
const GRADIENT_TOL: f64 = 1e-5;
const FD_STEP: f64 = 1e-6;
const EXACT_RATIO_TOL: f64 = 1e-12;
const RANGE_TOL: f64 = 1e-9;
const SMALL_T_TOL: f64 = 1e-3;
const LARGE_T_TOL: f64 = 1e-2;
const SOLVE_GRAD_TOL: f64 = 1e-6;
const NEUMANN_REL_TOL: f64 = 1e-3;
const TRIVIAL_NORM_TOL: f64 = 1e-7;
const TRIVIAL_ENERGY_TOL: f64 = 1e-12;
const INEQUALITY_TOL: f64 = 1e-9;

fn report(name: &str, ok: bool, elapsed: Duration, limit: Duration, detail: String) {
    let pass = ok && elapsed < limit;
    println!(
        "{} {name}: {detail} ({:.2}s, limit {:.0}s)",
        if pass { "PASS" } else { "FAIL" },
        elapsed.as_secs_f64(),
        limit.as_secs_f64()
    );
    assert!(ok, "{name}: {detail}");
    assert!(elapsed < limit, "{name}: took {elapsed:?}, limit {limit:?}");
}

fn problem(h: f64, family: MusielakFamily, q: f64, lambda: f64) -> ProblemSpec {
    ProblemSpec::new(
        &DomainSpec::interval(0.0, 1.0, h, 0.5),
        0.3,
        lambda,
        family,
        SymmetricField::Constant(1.0),
        ReactionFamily::pure_power(q),
    )
    .unwrap()
}

/// Operators by brute force over ordered cell pairs: Laplacian on Ω cells,
/// Neumann operator on collar cells (partners in Ω only).
fn naive_operator(prob: &ProblemSpec, u: &[f64], p: f64) -> Vec<f64> {
    let cells = &prob.mesh.cells;
    let mut out = vec![0.0; cells.len()];
    for (i, ci) in cells.iter().enumerate() {
        for (j, cj) in cells.iter().enumerate() {
            if i == j || (ci.region == Region::Collar && cj.region == Region::Collar) {
                continue;
            }
            let d = (ci.center[0] - cj.center[0]).abs();
            let ds = d.powf(prob.s);
            let q = (u[i] - u[j]) / ds;
            out[i] += cj.measure / d * p * q.abs().powf(p - 1.0) * q.signum() / ds;
        }
    }
    out
}

#[test]
fn green_identity_is_exact() {
    let start = Instant::now();
    let prob = problem(1.0 / 64.0, MusielakFamily::power(3.0), 2.0, 0.0);
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst_lib: f64 = 0.0;
    let mut worst_naive: f64 = 0.0;
    for _ in 0..50 {
        let u = DiscreteFunction::random(prob.mesh.clone(), &mut rng);
        let v = DiscreteFunction::random(prob.mesh.clone(), &mut rng);
        let r = operators::identity_residuals(&u, &v, &prob).unwrap();
        worst_lib = worst_lib.max(r.r1_rel());
        let op = naive_operator(&prob, &u.values, 3.0);
        let terms: Vec<f64> = prob.mesh.cells.iter().zip(&op).map(|(c, o)| c.measure * o).collect();
        let scale: f64 = terms.iter().map(|t| t.abs()).sum();
        worst_naive = worst_naive.max(terms.iter().sum::<f64>().abs() / scale);
    }
    report(
        "green identity",
        worst_lib <= IDENTITY_TOL && worst_naive <= IDENTITY_TOL,
        start.elapsed(),
        Duration::from_secs(5),
        format!("max r1/scale library {worst_lib:e}, brute force {worst_naive:e}"),
    );
}

#[test]
fn form_operator_identity_is_exact() {
    let start = Instant::now();
    let prob = problem(1.0 / 64.0, MusielakFamily::power(3.0), 2.0, 0.0);
    let cells = &prob.mesh.cells;
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut worst_lib: f64 = 0.0;
    let mut worst_naive: f64 = 0.0;
    for _ in 0..50 {
        let u = DiscreteFunction::random(prob.mesh.clone(), &mut rng);
        let v = DiscreteFunction::random(prob.mesh.clone(), &mut rng);
        let r = operators::identity_residuals(&u, &v, &prob).unwrap();
        worst_lib = worst_lib.max(r.r2_rel());
        // half the ordered double sum of the pair integrand
        let mut pair = 0.0;
        let mut scale = 0.0;
        for (i, ci) in cells.iter().enumerate() {
            for (j, cj) in cells.iter().enumerate() {
                if i == j || (ci.region == Region::Collar && cj.region == Region::Collar) {
                    continue;
                }
                let d = (ci.center[0] - cj.center[0]).abs();
                let ds = d.powf(0.3);
                let du = (u.values[i] - u.values[j]) / ds;
                let dv = (v.values[i] - v.values[j]) / ds;
                let t = 0.5 * ci.measure * cj.measure / d * 3.0 * du.abs() * du * dv;
                pair += t;
                scale += t.abs();
            }
        }
        let op = naive_operator(&prob, &u.values, 3.0);
        let tested: f64 = cells.iter().zip(&op).zip(&v.values).map(|((c, o), v)| c.measure * o * v).sum();
        worst_naive = worst_naive.max((pair - tested).abs() / scale);
    }
    report(
        "form/operator identity",
        worst_lib <= IDENTITY_TOL && worst_naive <= IDENTITY_TOL,
        start.elapsed(),
        Duration::from_secs(10),
        format!("max r2/scale library {worst_lib:e}, brute force {worst_naive:e}"),
    );
}

/// ρ_s by an ordered double loop, used to certify the norm bisection.
fn naive_rho(prob: &ProblemSpec, u: &[f64], p: f64) -> f64 {
    let cells = &prob.mesh.cells;
    let mut total = 0.0;
    for (i, ci) in cells.iter().enumerate() {
        for (j, cj) in cells.iter().enumerate() {
            if i == j || (ci.region == Region::Collar && cj.region == Region::Collar) {
                continue;
            }
            let d = (ci.center[0] - cj.center[0]).abs();
            total += ci.measure * cj.measure / d * ((u[i] - u[j]).abs() / d.powf(prob.s)).powf(p);
        }
        total += ci.measure * u[i].abs().powf(p);
    }
    total
}

#[test]
fn modular_norm_relations_hold() {
    let start = Instant::now();
    let prob = problem(1.0 / 32.0, MusielakFamily::power(3.0), 2.0, 0.0);
    let settings = RelationSettings {
        tol: RELATION_TOL,
        norm_tol: NORM_TOL,
        include_psi: false,
    };
    let rep = relation_suite(&prob, 100, 42, settings).unwrap();
    let above = rep.count("modular_gt1");
    let below = rep.count("modular_lt1");
    let bad = rep.failures("modular_gt1") + rep.failures("modular_lt1");
    // pinch: rescale to unit norm and evaluate ρ_s independently
    let mut rng = ChaCha8Rng::seed_from_u64(43);
    let mut pinch: f64 = 0.0;
    for _ in 0..10 {
        let u = DiscreteFunction::random(prob.mesh.clone(), &mut rng);
        let n = modular_norm(&u, &prob, NORM_TOL).unwrap();
        let w = u.scaled(1.0 / n);
        pinch = pinch.max((naive_rho(&prob, &w.values, 3.0) - 1.0).abs());
        pinch = pinch.max((modular_rho_s(&w, &prob).unwrap() - 1.0).abs());
    }
    report(
        "modular/norm relations",
        above == 100 && below == 100 && bad == 0 && pinch <= PINCH_TOL,
        start.elapsed(),
        Duration::from_secs(60),
        format!("{above}+{below} samples, {bad} violations, pinch deviation {pinch:e}"),
    );
}

#[test]
fn gradient_matches_central_differences() {
    let start = Instant::now();
    let families = [
        (MusielakFamily::power(3.0), 0.125),
        (MusielakFamily::power_over_log(3.0), 0.25),
        (MusielakFamily::power_times_log(2.5, 0.5), 0.25),
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut worst: f64 = 0.0;
    for draw in 0..20 {
        let (fam, h) = families[draw % 3].clone();
        let lambda = 0.1 + 0.1 * draw as f64;
        let prob = problem(h, fam, 1.8, lambda);
        let u = DiscreteFunction::random(prob.mesh.clone(), &mut rng);
        let g = gradient_j(&u, &prob).unwrap();
        let gmax = g.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        for k in 0..g.len() {
            let step = FD_STEP * u.values[k].abs().max(1.0);
            let mut up = u.clone();
            up.values[k] += step;
            let mut dn = u.clone();
            dn.values[k] -= step;
            let fd = (energy_j(&up, &prob).unwrap() - energy_j(&dn, &prob).unwrap()) / (2.0 * step);
            worst = worst.max((fd - g[k]).abs() / g[k].abs().max(1e-3 * gmax));
        }
    }
    report(
        "gradient vs finite differences",
        worst <= GRADIENT_TOL,
        start.elapsed(),
        Duration::from_secs(60),
        format!("max relative component error {worst:e} over 20 draws"),
    );
}

const O: Point = [0.0, 0.0];

#[test]
fn family_growth_ratios_small_t_and_ranges() {
    let start = Instant::now();
    let grid = family::log_grid(1e-6, 1e6, 121);
    let mut power_dev: f64 = 0.0;
    for p in [1.5, 2.0, 3.0, 4.5] {
        let k = MusielakFamily::power(p).kernel(&O, &O);
        for &t in &grid {
            power_dev = power_dev.max((growth_ratio(&k, t) - p).abs());
        }
    }
    let mut outside: f64 = 0.0;
    for p in [2.5, 3.0, 4.0] {
        let k = MusielakFamily::power_over_log(p).kernel(&O, &O);
        for &t in &grid {
            let r = growth_ratio(&k, t);
            outside = outside.max((p - 1.0) - r).max(r - p);
        }
    }
    let mut small_dev: f64 = 0.0;
    for p in [2.0, 3.0] {
        let k = MusielakFamily::power_times_log(p, 0.0).kernel(&O, &O);
        small_dev = small_dev.max((growth_ratio(&k, 1e-6) - (p + 1.0)).abs());
    }
    report(
        "family growth ratios (exact, range, small t)",
        power_dev <= EXACT_RATIO_TOL && outside <= RANGE_TOL && small_dev <= SMALL_T_TOL,
        start.elapsed(),
        Duration::from_secs(5),
        format!("power deviation {power_dev:e}, log-quotient overshoot {outside:e}, small-t deviation {small_dev:e}"),
    );
}

#[test]
fn family_growth_ratio_large_t() {
    let start = Instant::now();
    let mut dev: f64 = 0.0;
    for p in [2.0, 3.0] {
        let k = MusielakFamily::power_times_log(p, 0.0).kernel(&O, &O);
        dev = dev.max((growth_ratio(&k, 1e6) - p).abs());
    }
    report(
        "family growth ratio at large t",
        dev <= LARGE_T_TOL,
        start.elapsed(),
        Duration::from_secs(5),
        format!("deviation from p at t=1e6: {dev:e}, tolerance {LARGE_T_TOL:e}"),
    );
}

#[test]
fn small_lambda_gives_local_nontrivial_solution() {
    let start = Instant::now();
    let base = problem(1.0 / 16.0, MusielakFamily::power(3.0), 2.0, 0.0);
    let rho = 0.5;
    let c = estimate_constants(&base, rho, 50, 2.0, 0).unwrap();
    let prob = base.with_lambda(0.5 * c.lambda_star).unwrap();
    let theta = default_bump(prob.mesh.clone()).unwrap();
    let probes = landscape_probes(&prob, rho, 200, &theta, &[1e-2], &[1.0], 6).unwrap();
    let settings = SolverSettings {
        tol_grad: 1e-9,
        ..Default::default()
    };
    let r = minimize_checked(&prob, Mode::Ball { rho }, Init::MultiStart { n: 4, seed: 6 }, &settings, Some(c.lambda_star))
        .unwrap();
    let scale = r.u.max_abs();
    let ok = probes.sphere_min > 0.0
        && r.j < 0.0
        && r.norm_u > 0.0
        && r.norm_u < rho
        && r.grad_norm <= SOLVE_GRAD_TOL
        && r.neumann_residual_max <= NEUMANN_REL_TOL * scale
        && r.classification == Classification::Nontrivial;
    report(
        "small-lambda local solution",
        ok,
        start.elapsed(),
        Duration::from_secs(300),
        format!(
            "lambda_star {:.6}, sphere min {:e}, J {:e}, norm {:e}, grad {:e}, collar residual {:e} (scale {:e})",
            c.lambda_star, probes.sphere_min, r.j, r.norm_u, r.grad_norm, r.neumann_residual_max, scale
        ),
    );
}

#[test]
fn large_lambda_gives_global_nontrivial_solution() {
    let start = Instant::now();
    let base = problem(1.0 / 16.0, MusielakFamily::power(3.0), 2.0, 0.0);
    let t0 = 2.0;
    let c = estimate_constants(&base, 0.5, 50, t0, 0).unwrap();
    let prob = base.with_lambda(2.0 * c.lambda_star_upper).unwrap();
    let u0 = DiscreteFunction::omega_indicator(prob.mesh.clone(), t0);
    let j0 = energy_j(&u0, &prob).unwrap();
    let settings = SolverSettings {
        tol_grad: 1e-9,
        t0,
        ..Default::default()
    };
    let r = minimize(&prob, Mode::Global, Init::MultiStart { n: 4, seed: 7 }, &settings).unwrap();
    report(
        "large-lambda global solution",
        r.j <= j0 && j0 < 0.0 && r.grad_norm <= SOLVE_GRAD_TOL && r.classification == Classification::Nontrivial,
        start.elapsed(),
        Duration::from_secs(300),
        format!("lambda {:.4}, J {:e} <= J(t0 1_Omega) {:e}, grad {:e}", prob.lambda, r.j, j0, r.grad_norm),
    );
}

#[test]
fn zero_lambda_is_trivial_from_random_starts() {
    let start = Instant::now();
    let prob = problem(1.0 / 16.0, MusielakFamily::power(3.0), 2.0, 0.0);
    let settings = SolverSettings {
        tol_grad: 1e-20,
        max_iter: 50_000,
        ..Default::default()
    };
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut worst_norm: f64 = 0.0;
    let mut worst_j: f64 = 0.0;
    let mut all_trivial = true;
    for _ in 0..5 {
        let u = DiscreteFunction::random(prob.mesh.clone(), &mut rng);
        let r = minimize(&prob, Mode::Global, Init::Given(u), &settings).unwrap();
        worst_norm = worst_norm.max(r.norm_u);
        worst_j = worst_j.max(r.j.abs());
        all_trivial &= r.classification == Classification::Trivial;
    }
    report(
        "zero-lambda triviality",
        worst_norm <= TRIVIAL_NORM_TOL && worst_j <= TRIVIAL_ENERGY_TOL && all_trivial,
        start.elapsed(),
        Duration::from_secs(60),
        format!("max norm {worst_norm:e}, max |J| {worst_j:e}"),
    );
}

#[test]
fn holder_and_convexity_inequalities_hold() {
    let start = Instant::now();
    let prob = problem(1.0 / 16.0, MusielakFamily::power(3.0), 2.0, 0.0);
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut holder_bad = 0;
    let mut convex_bad = 0;
    let mut holder_slack = f64::INFINITY;
    let mut convex_min = f64::INFINITY;
    for _ in 0..200 {
        let u = DiscreteFunction::random(prob.mesh.clone(), &mut rng);
        let v = DiscreteFunction::random(prob.mesh.clone(), &mut rng);
        let (lhs, rhs) = holder_sides(&u, &v, &prob, 1e-12).unwrap();
        holder_slack = holder_slack.min(rhs - lhs);
        if lhs > rhs + INEQUALITY_TOL {
            holder_bad += 1;
        }
        let m = convexity_margin(&u, &v, &prob).unwrap();
        convex_min = convex_min.min(m);
        if m < -INEQUALITY_TOL {
            convex_bad += 1;
        }
    }
    report(
        "Hoelder and midpoint convexity",
        holder_bad == 0 && convex_bad == 0,
        start.elapsed(),
        Duration::from_secs(30),
        format!("{holder_bad} + {convex_bad} violations, min Hoelder slack {holder_slack:e}, min convexity margin {convex_min:e}"),
    );
}

#[test]
fn sobolev_conjugate_verdicts_follow_sp_rule() {
    let start = Instant::now();
    let mut mismatches = Vec::new();
    for p in [2.0, 3.0] {
        for s in [0.3, 0.6, 0.9] {
            let rep = sobolev_conjugate_diag(&MusielakFamily::power(p), s, 1, &[[0.5, 0.0]]).unwrap();
            let expect = s * p < 1.0;
            if rep.all_hold() != expect {
                mismatches.push((p, s));
            }
        }
    }
    report(
        "Sobolev conjugate verdicts",
        mismatches.is_empty(),
        start.elapsed(),
        Duration::from_secs(10),
        format!("6 cases, mismatches {mismatches:?}"),
    );
}

const DETERMINISM_CONFIG: &str = r#"{
  "domain": {"omega": {"interval": [0.0, 1.0]}, "mesh_size": 0.125},
  "family": {"kind": "power", "exponent": {"constant": 3.0}},
  "reaction": {"kind": "pure_power", "exponent": {"constant": 2.0}},
  "s": 0.3,
  "seed": 11,
  "lambda": {"times_lambda_star": 0.5},
  "samples": {"relations": 10, "green": 5, "gradcheck": 2, "sphere": 20, "constants": 10},
  "sweep": {"lambda_grid": [0.0, {"times_lambda_star": 0.5}, {"times_lambda_star_upper": 2.0}]}
}"#;

fn read_dir_sorted(dir: &std::path::Path) -> Vec<(String, Vec<u8>)> {
    let mut out: Vec<(String, Vec<u8>)> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (e.file_name().to_string_lossy().into_owned(), std::fs::read(e.path()).unwrap())
        })
        .collect();
    out.sort();
    out
}

#[test]
fn commands_are_deterministic() {
    let start = Instant::now();
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("config.json");
    std::fs::write(&cfg, DETERMINISM_CONFIG).unwrap();
    let mut differing = Vec::new();
    let mut csv_count = 0;
    for cmd in ["verify-family", "verify-space", "green-check", "gradcheck", "solve", "sweep"] {
        let mut runs = Vec::new();
        for rep in 0..2 {
            let out = tmp.path().join(format!("{cmd}-{rep}"));
            let status = std::process::Command::new(env!("CARGO_BIN_EXE_nlrobin"))
                .args([cmd, "-c", cfg.to_str().unwrap(), "-o", out.to_str().unwrap()])
                .status()
                .unwrap();
            assert_eq!(status.code(), Some(0), "{cmd} failed");
            runs.push(read_dir_sorted(&out));
        }
        csv_count += runs[0].iter().filter(|(n, _)| n.ends_with(".csv")).count();
        if runs[0] != runs[1] {
            differing.push(cmd);
        }
    }
    report(
        "determinism",
        differing.is_empty() && csv_count > 0,
        start.elapsed(),
        Duration::from_secs(120),
        format!("{csv_count} CSV files compared byte for byte, differing commands {differing:?}"),
    );
}

#[test]
fn determinism_holds_in_process_too() {
    let prob = problem(0.125, MusielakFamily::power(3.0), 2.0, 0.1);
    let s = SolverSettings::default();
    let a = minimize(&prob, Mode::Global, Init::MultiStart { n: 2, seed: 5 }, &s).unwrap();
    let b = minimize(&prob, Mode::Global, Init::MultiStart { n: 2, seed: 5 }, &s).unwrap();
    assert_eq!(a.u.values, b.u.values);
    assert_eq!(a.j.to_bits(), b.j.to_bits());
    let _ = Arc::strong_count(&prob.mesh);
}
