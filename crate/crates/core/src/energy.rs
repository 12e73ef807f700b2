//! The energy J_λ = I₁ − λI₂, its gradient in nodal coordinates, the
//! threshold estimates for λ, and probes of the energy landscape.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{invalid, Result};
use crate::field::{distance, Point};
use crate::mesh::{Mesh, Region};
use crate::problem::ProblemSpec;
use crate::space::{i1_values, modular_norm_values, variable_exponent_norm, DiscreteFunction};
use std::sync::Arc;

/// I₂(u) = Σ_Ω |c| F(x, u)
pub fn i2(u: &DiscreteFunction, prob: &ProblemSpec) -> Result<f64> {
    prob.check(u)?;
    Ok(prob.reaction_integral(&u.values))
}

pub fn i1(u: &DiscreteFunction, prob: &ProblemSpec) -> Result<f64> {
    prob.check(u)?;
    Ok(i1_values(prob, &u.values))
}

pub fn energy_j(u: &DiscreteFunction, prob: &ProblemSpec) -> Result<f64> {
    prob.check(u)?;
    Ok(energy_values(prob, &u.values))
}

pub(crate) fn energy_values(prob: &ProblemSpec, u: &[f64]) -> f64 {
    let reaction = if prob.lambda == 0.0 { 0.0 } else { prob.lambda * prob.reaction_integral(u) };
    i1_values(prob, u) - reaction
}

/// ⟨J'_λ(u), e_k⟩ for every nodal basis function e_k.
pub fn gradient_j(u: &DiscreteFunction, prob: &ProblemSpec) -> Result<Vec<f64>> {
    prob.check(u)?;
    Ok(gradient_values(prob, &u.values))
}

pub(crate) fn gradient_values(prob: &ProblemSpec, u: &[f64]) -> Vec<f64> {
    let mut g = prob.nonlocal_flux(u);
    for (k, c) in prob.mesh.cells.iter().enumerate() {
        let mass = match c.region {
            Region::Omega => {
                let f = if prob.lambda == 0.0 {
                    0.0
                } else {
                    prob.lambda * prob.reaction.eval_with_q(prob.q_at(k), u[k]).0
                };
                prob.cell_kernel(k).phi(u[k]) - f
            }
            Region::Collar => prob.beta_at(k) * prob.cell_kernel(k).phi(u[k]),
        };
        g[k] = c.measure * (g[k] + mass);
    }
    g
}

pub fn euclidean_norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Largest relative discrepancy between the gradient and central differences
/// of J with step `step`·max(1, |u_k|). Components far below the largest one
/// are compared against 1e-3 of it, since their relative error is noise.
pub fn finite_difference_error(prob: &ProblemSpec, u: &DiscreteFunction, step: f64) -> Result<f64> {
    prob.check(u)?;
    let g = gradient_values(prob, &u.values);
    let gmax = g.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let mut work = u.values.clone();
    let mut worst: f64 = 0.0;
    for k in 0..work.len() {
        let h = step * work[k].abs().max(1.0);
        let orig = work[k];
        work[k] = orig + h;
        let up = energy_values(prob, &work);
        work[k] = orig - h;
        let dn = energy_values(prob, &work);
        work[k] = orig;
        let fd = (up - dn) / (2.0 * h);
        worst = worst.max((fd - g[k]).abs() / g[k].abs().max(1e-3 * gmax).max(f64::MIN_POSITIVE));
    }
    Ok(worst)
}

/// λ_* = ρ^{φ⁺−q}/(2c₂c^q)
pub fn lambda_star_formula(rho: f64, c_emb: f64, c2: f64, phi_plus: f64, q: f64) -> f64 {
    rho.powf(phi_plus - q) / (2.0 * c2 * c_emb.powf(q))
}

#[derive(Debug, Clone, Serialize)]
pub struct Constants {
    /// Largest sampled ‖u‖_{q(x)}/‖u‖.
    pub c_emb: f64,
    /// Exponent from {q⁻, q⁺} giving the smaller λ_*.
    pub q_exp: f64,
    pub lambda_star: f64,
    /// I₁(t₀1_Ω)/(c₂t₀^{q⁻}|Ω|): above this value J_λ(t₀1_Ω) < 0.
    pub lambda_star_upper: f64,
    /// The same bound with I₁(t₀1_Ω) replaced by the Ω mass term alone,
    /// which ignores the jump energy across ∂Ω.
    pub lambda_star_upper_mass: f64,
    pub t0: f64,
}

pub fn estimate_constants(prob: &ProblemSpec, rho: f64, n_samples: usize, t0: f64, seed: u64) -> Result<Constants> {
    if !(rho > 0.0 && rho < 1.0) {
        return Err(invalid(format!("rho must lie in (0,1), got {rho}")));
    }
    if !(t0 > 1.0) {
        return Err(invalid(format!("t0 must exceed 1, got {t0}")));
    }
    let tol = 1e-10;
    let mesh = prob.mesh.clone();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut c_emb: f64 = 0.0;
    let mut probe = |u: &DiscreteFunction| -> Result<()> {
        let n = modular_norm_values(prob, &u.values, tol)?;
        if n > 0.0 {
            c_emb = c_emb.max(variable_exponent_norm(u, prob, tol)? / n);
        }
        Ok(())
    };
    for _ in 0..n_samples {
        probe(&DiscreteFunction::random(mesh.clone(), &mut rng))?;
    }
    for (k, _) in mesh.omega_cells() {
        probe(&DiscreteFunction::basis(mesh.clone(), k))?;
    }
    for u in smooth_probes(mesh.clone())? {
        probe(&u)?;
    }
    let (q_lo, q_hi) = prob.q_range();
    let c2 = prob.reaction.c2;
    let phi_plus = prob.family.phi_plus;
    let (q_exp, lambda_star) = [q_lo, q_hi]
        .into_iter()
        .map(|q| (q, lambda_star_formula(rho, c_emb, c2, phi_plus, q)))
        .fold((f64::NAN, f64::INFINITY), |best, cur| if cur.1 < best.1 { cur } else { best });
    let u0 = DiscreteFunction::omega_indicator(mesh.clone(), t0);
    let denom = c2 * t0.powf(q_lo) * mesh.omega_measure;
    Ok(Constants {
        c_emb,
        q_exp,
        lambda_star,
        lambda_star_upper: i1_values(prob, &u0.values) / denom,
        lambda_star_upper_mass: prob.omega_modular(&u0.values, 1.0) / denom,
        t0,
    })
}

/// Slowly varying test functions: rough random fields alone badly
/// underestimate the embedding constant.
fn smooth_probes(mesh: Arc<Mesh>) -> Result<Vec<DiscreteFunction>> {
    let (lo, hi) = mesh.omega_box();
    let mut out = vec![
        DiscreteFunction::constant(mesh.clone(), 1.0),
        DiscreteFunction::omega_indicator(mesh.clone(), 1.0),
        default_bump(mesh.clone())?,
    ];
    // 1 on Ω decaying linearly to 0 over distance `w` outside it
    for w in [0.05, 0.1, 0.2, 0.4] {
        out.push(DiscreteFunction::from_fn(mesh.clone(), |x, _| {
            let mut d: f64 = 0.0;
            for k in 0..mesh.dim {
                d = d.max(lo[k] - x[k]).max(x[k] - hi[k]);
            }
            (1.0 - d / w).clamp(0.0, 1.0)
        }));
    }
    Ok(out)
}

/// θ ≡ 1 on B_R(x₀), 0 outside B_{2R}(x₀), with a C¹ cubic blend between.
pub fn bump(mesh: Arc<Mesh>, center: Point, radius: f64) -> Result<DiscreteFunction> {
    if !(radius > 0.0) {
        return Err(invalid("bump radius must be positive"));
    }
    let (lo, hi) = mesh.omega_box();
    for k in 0..mesh.dim {
        if center[k] - 2.0 * radius <= lo[k] || center[k] + 2.0 * radius >= hi[k] {
            return Err(invalid("bump support B_2R must lie inside the domain"));
        }
    }
    Ok(DiscreteFunction::from_fn(mesh, |x, _| {
        let r = distance(x, &center) / radius;
        if r <= 1.0 {
            1.0
        } else if r >= 2.0 {
            0.0
        } else {
            let s = r - 1.0;
            1.0 - s * s * (3.0 - 2.0 * s)
        }
    }))
}

/// Bump centered in Ω with R a fifth of the shortest side.
pub fn default_bump(mesh: Arc<Mesh>) -> Result<DiscreteFunction> {
    let (lo, hi) = mesh.omega_box();
    let mut center = [0.0; 2];
    let mut side = f64::INFINITY;
    for k in 0..mesh.dim {
        center[k] = 0.5 * (lo[k] + hi[k]);
        side = side.min(hi[k] - lo[k]);
    }
    bump(mesh, center, 0.2 * side)
}

fn validate_bump(theta: &DiscreteFunction, prob: &ProblemSpec) -> Result<()> {
    prob.check(theta)?;
    for (v, c) in theta.values.iter().zip(&prob.mesh.cells) {
        if !(0.0..=1.0).contains(v) {
            return Err(invalid(format!("theta must take values in [0,1], found {v}")));
        }
        if *v != 0.0 && c.region == Region::Collar {
            return Err(invalid("theta must vanish outside the domain"));
        }
    }
    if theta.max_abs() == 0.0 {
        return Err(invalid("theta must not vanish identically"));
    }
    Ok(())
}

#[derive(Debug, Clone, Serialize)]
pub struct LandscapeReport {
    /// min of J_λ over the random directions scaled to ‖u‖ = ρ.
    pub sphere_min: f64,
    /// (t, J_λ(tθ))
    pub small_t: Vec<(f64, f64)>,
    /// (k, J_λ(ku)) for one random u.
    pub coercivity: Vec<(f64, f64)>,
}

impl LandscapeReport {
    pub fn small_t_min(&self) -> f64 {
        self.small_t.iter().map(|p| p.1).fold(f64::INFINITY, f64::min)
    }

    /// J(k_last u)/J(k_prev u) at the two largest k.
    pub fn last_growth_ratio(&self) -> f64 {
        let n = self.coercivity.len();
        if n < 2 {
            return f64::NAN;
        }
        self.coercivity[n - 1].1 / self.coercivity[n - 2].1
    }
}

/// Sphere minimum over `n` random directions scaled to ‖u‖ = ρ.
pub fn sphere_min(prob: &ProblemSpec, rho: f64, n: usize, rng: &mut ChaCha8Rng) -> Result<f64> {
    let mut best = f64::INFINITY;
    for _ in 0..n {
        let u = DiscreteFunction::random(prob.mesh.clone(), rng);
        let norm = modular_norm_values(prob, &u.values, 1e-12)?;
        if norm > 0.0 {
            best = best.min(energy_values(prob, &u.scaled(rho / norm).values));
        }
    }
    Ok(best)
}

pub fn landscape_probes(
    prob: &ProblemSpec,
    rho: f64,
    n_sphere: usize,
    theta: &DiscreteFunction,
    t_grid: &[f64],
    k_grid: &[f64],
    seed: u64,
) -> Result<LandscapeReport> {
    if !(rho > 0.0 && rho < 1.0) {
        return Err(invalid(format!("rho must lie in (0,1), got {rho}")));
    }
    validate_bump(theta, prob)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let sphere_min = sphere_min(prob, rho, n_sphere, &mut rng)?;
    let small_t = t_grid
        .iter()
        .map(|&t| (t, energy_values(prob, &theta.scaled(t).values)))
        .collect();
    let u = DiscreteFunction::random(prob.mesh.clone(), &mut rng);
    let coercivity = k_grid
        .iter()
        .map(|&k| (k, energy_values(prob, &u.scaled(k).values)))
        .collect();
    Ok(LandscapeReport {
        sphere_min,
        small_t,
        coercivity,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::family::{log_grid, MusielakFamily};
    use crate::field::SymmetricField;
    use crate::mesh::DomainSpec;
    use crate::reaction::{ReactionFamily, ReactionKind};

    fn problem(family: MusielakFamily, lambda: f64, reaction: ReactionFamily, h: f64) -> ProblemSpec {
        ProblemSpec::new(
            &DomainSpec::interval(0.0, 1.0, h, 0.5),
            0.3,
            lambda,
            family,
            SymmetricField::Constant(1.0),
            reaction,
        )
        .unwrap()
    }

    #[test]
    fn energy_of_constants() {
        let prob = problem(MusielakFamily::power(2.5), 0.0, ReactionFamily::pure_power(2.0), 0.125);
        let m = prob.mesh.clone();
        assert_eq!(energy_j(&DiscreteFunction::zeros(m.clone()), &prob).unwrap(), 0.0);
        let c: f64 = 0.7;
        let j = energy_j(&DiscreteFunction::constant(m.clone(), c), &prob).unwrap();
        let expect = c.powf(2.5) * (m.omega_measure + m.collar_measure);
        assert!((j - expect).abs() < 1e-12 * expect);
        assert!(gradient_j(&DiscreteFunction::zeros(m), &prob).unwrap().iter().all(|g| *g == 0.0));
    }

    #[test]
    fn decomposition_matches_independent_sums() {
        let prob = problem(MusielakFamily::power(3.0), 0.7, ReactionFamily::pure_power(2.0), 0.125);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let u = DiscreteFunction::random(prob.mesh.clone(), &mut rng);
        // I₁ from an ordered double loop (halved), I₂ cell by cell
        let cells = &prob.mesh.cells;
        let mut pair = 0.0;
        for (i, ci) in cells.iter().enumerate() {
            for (j, cj) in cells.iter().enumerate() {
                if i == j || (ci.region == Region::Collar && cj.region == Region::Collar) {
                    continue;
                }
                let d = (ci.center[0] - cj.center[0]).abs();
                pair += 0.5 * ci.measure * cj.measure / d * ((u.values[i] - u.values[j]).abs() / d.powf(0.3)).powi(3);
            }
        }
        let mass: f64 = cells.iter().zip(&u.values).map(|(c, v)| c.measure * v.abs().powi(3)).sum();
        let reaction: f64 = cells
            .iter()
            .zip(&u.values)
            .filter(|(c, _)| c.region == Region::Omega)
            .map(|(c, v)| c.measure * v * v)
            .sum();
        let oracle = pair + mass - 0.7 * reaction;
        let j = energy_j(&u, &prob).unwrap();
        assert!((j - oracle).abs() <= 1e-12 * (pair + mass), "{j} {oracle}");
    }

    fn fd_check(prob: &ProblemSpec, seed: u64) -> f64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let u = DiscreteFunction::random(prob.mesh.clone(), &mut rng);
        let g = gradient_j(&u, prob).unwrap();
        let gmax = g.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        let mut worst: f64 = 0.0;
        for k in 0..u.values.len() {
            let h = 1e-6 * u.values[k].abs().max(1.0);
            let mut up = u.clone();
            up.values[k] += h;
            let mut dn = u.clone();
            dn.values[k] -= h;
            let fd = (energy_j(&up, prob).unwrap() - energy_j(&dn, prob).unwrap()) / (2.0 * h);
            worst = worst.max((fd - g[k]).abs() / g[k].abs().max(1e-3 * gmax));
        }
        worst
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let r = ReactionFamily::pure_power(1.8);
        for (fam, seed) in [
            (MusielakFamily::power(3.0), 1),
            (MusielakFamily::power_over_log(3.0), 2),
            (MusielakFamily::power_times_log(2.5, 0.5), 3),
        ] {
            let prob = problem(fam, 0.6, r.clone(), 0.25);
            let e = fd_check(&prob, seed);
            assert!(e <= 1e-5, "{e}");
        }
        let rl = ReactionFamily::new(ReactionKind::PowerPlusLog, SymmetricField::Constant(2.5), 20.0, 1.0, &[[0.5, 0.0]]).unwrap();
        assert!(fd_check(&problem(MusielakFamily::power(3.0), 0.4, rl, 0.25), 7) <= 1e-5);
    }

    #[test]
    fn lambda_star_formula_example() {
        assert!((lambda_star_formula(0.5, 1.0, 1.0, 3.0, 2.0) - 0.25).abs() < 1e-15);
    }

    #[test]
    fn constants_bound_single_probes() {
        let prob = problem(MusielakFamily::power(3.0), 0.0, ReactionFamily::pure_power(2.0), 0.125);
        let c = estimate_constants(&prob, 0.5, 10, 2.0, 0).unwrap();
        let u = DiscreteFunction::basis(prob.mesh.clone(), 10);
        let r = variable_exponent_norm(&u, &prob, 1e-10).unwrap() / modular_norm_values(&prob, &u.values, 1e-10).unwrap();
        assert!(r <= c.c_emb * (1.0 + 1e-9));
        // mass-only threshold: Φ̂(2)·|Ω|/(t₀^q|Ω|) = 8/4
        assert!((c.lambda_star_upper_mass - 2.0).abs() < 1e-12);
        assert!(c.lambda_star_upper > c.lambda_star_upper_mass);
        let above = prob.with_lambda(1.01 * c.lambda_star_upper).unwrap();
        let u0 = DiscreteFunction::omega_indicator(prob.mesh.clone(), 2.0);
        assert!(energy_j(&u0, &above).unwrap() < 0.0);
        let mass_only = prob.with_lambda(2.5).unwrap();
        assert!(energy_j(&u0, &mass_only).unwrap() > 0.0);
        assert!(estimate_constants(&prob, 1.5, 1, 2.0, 0).is_err());
    }

    #[test]
    fn probes_show_the_expected_shape() {
        let prob = problem(MusielakFamily::power(3.0), 0.0, ReactionFamily::pure_power(2.0), 0.125);
        let theta = default_bump(prob.mesh.clone()).unwrap();
        let t = log_grid(1e-4, 1.0, 9);
        let k: Vec<f64> = (0..=8).map(|i| 2f64.powi(i)).collect();
        let r = landscape_probes(&prob, 0.5, 20, &theta, &t, &k, 1).unwrap();
        assert!(r.sphere_min > 0.0);
        assert!(r.last_growth_ratio() >= 2f64.powf(3.0) / 2.0);
        let c = estimate_constants(&prob, 0.5, 20, 2.0, 0).unwrap();
        let small = prob.with_lambda(0.5 * c.lambda_star).unwrap();
        let r = landscape_probes(&small, 0.5, 20, &theta, &t, &k, 1).unwrap();
        assert!(r.small_t_min() < 0.0);
        assert!(r.sphere_min > 0.0);
        let mut bad = theta.clone();
        bad.values[0] = 0.5;
        assert!(landscape_probes(&prob, 0.5, 1, &bad, &t, &k, 1).is_err());
    }
}
