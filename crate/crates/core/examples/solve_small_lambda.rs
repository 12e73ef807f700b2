//! Below λ_*: the energy is positive on the sphere ‖u‖ = ρ but negative
//! somewhere inside, so a constrained minimizer is a nontrivial solution.

use nonlocal_robin::energy::{default_bump, estimate_constants, landscape_probes};
use nonlocal_robin::family::log_grid;
use nonlocal_robin::solver::{minimize_checked, Init, Mode, SolverSettings};
use nonlocal_robin::*;

fn main() -> Result<()> {
    let base = ProblemSpec::new(
        &DomainSpec::interval(0.0, 1.0, 1.0 / 16.0, 0.5),
        0.3,
        0.0,
        MusielakFamily::power(3.0),
        SymmetricField::Constant(1.0),
        ReactionFamily::pure_power(2.0),
    )?;
    let rho = 0.5;
    let c = estimate_constants(&base, rho, 50, 2.0, 0)?;
    println!("c_emb = {:.5}, lambda_* = {:.5}", c.c_emb, c.lambda_star);
    let prob = base.with_lambda(0.5 * c.lambda_star)?;

    let theta = default_bump(prob.mesh.clone())?;
    let k: Vec<f64> = (0..=8).map(|i| 2f64.powi(i)).collect();
    let probes = landscape_probes(&prob, rho, 200, &theta, &log_grid(1e-4, 1.0, 9), &k, 0)?;
    println!("sphere min J = {:.4e}, min J(t theta) = {:.4e}", probes.sphere_min, probes.small_t_min());

    let settings = SolverSettings { tol_grad: 1e-9, ..Default::default() };
    let r = minimize_checked(&prob, Mode::Ball { rho }, Init::MultiStart { n: 4, seed: 0 }, &settings, Some(c.lambda_star))?;
    println!(
        "{:?}: J = {:.4e}, ||u|| = {:.4}, grad = {:.2e}, collar residual = {:.2e}, {} iterations from {}",
        r.classification, r.j, r.norm_u, r.grad_norm, r.neumann_residual_max, r.iterations, r.start
    );
    r.u.write_csv(std::io::stdout().lock())?;
    Ok(())
}
