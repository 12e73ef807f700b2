//! Above λ^*: the constant t₀ on Ω already has negative energy and the
//! coercive energy has a global minimizer below it.

use nonlocal_robin::energy::{energy_j, estimate_constants};
use nonlocal_robin::solver::{minimize, Init, Mode, SolverSettings};
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
    let t0 = 2.0;
    let c = estimate_constants(&base, 0.5, 50, t0, 0)?;
    println!(
        "lambda^* = {:.4} (Ω mass only: {:.4})",
        c.lambda_star_upper, c.lambda_star_upper_mass
    );
    let u0 = DiscreteFunction::omega_indicator(base.mesh.clone(), t0);
    let at_mass = base.with_lambda(c.lambda_star_upper_mass * 1.25)?;
    println!("J(t0 1_Ω) at 1.25x the mass-only value: {:.4} (the jump across the boundary keeps it positive)", energy_j(&u0, &at_mass)?);

    let prob = base.with_lambda(2.0 * c.lambda_star_upper)?;
    let settings = SolverSettings { tol_grad: 1e-9, t0, ..Default::default() };
    let r = minimize(&prob, Mode::Global, Init::MultiStart { n: 4, seed: 0 }, &settings)?;
    println!(
        "{:?}: J = {:.4} <= J(t0 1_Ω) = {:.4}, grad = {:.2e}, best start {}",
        r.classification,
        r.j,
        energy_j(&u0, &prob)?,
        r.grad_norm,
        r.start
    );
    for (cell, v) in prob.mesh.cells.iter().zip(&r.u.values).step_by(4) {
        println!("  x = {:>8.4}  u = {:.5}", cell.center[0], v);
    }
    Ok(())
}
