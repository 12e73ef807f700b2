//! The discrete integration-by-parts identities hold to roundoff because the
//! operators and the form share one pair list.

use nonlocal_robin::operators::{apply_fractional_laplacian, apply_neumann, identity_residuals};
use nonlocal_robin::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> Result<()> {
    let prob = ProblemSpec::new(
        &DomainSpec::interval(0.0, 1.0, 1.0 / 64.0, 0.5),
        0.3,
        0.0,
        MusielakFamily::power(3.0),
        SymmetricField::Constant(1.0),
        ReactionFamily::pure_power(2.0),
    )?;
    println!("{} cells, {} pairs", prob.n(), prob.quad.len());
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    for _ in 0..5 {
        let u = DiscreteFunction::random(prob.mesh.clone(), &mut rng);
        let v = DiscreteFunction::random(prob.mesh.clone(), &mut rng);
        let r = identity_residuals(&u, &v, &prob)?;
        println!("r1/scale = {:.2e}   r2/scale = {:.2e}", r.r1_rel(), r.r2_rel());
    }

    let hat = DiscreteFunction::from_fn(prob.mesh.clone(), |x, _| (1.0 - (2.0 * x[0] - 1.0).abs()).max(0.0));
    let lap = apply_fractional_laplacian(&hat, &prob)?;
    let neu = apply_neumann(&hat, &prob)?;
    println!("hat: max |(-Δ)^s u| on Ω = {:.4}, max |N^s u| on the collar = {:.4}", lap.max_abs(), neu.max_abs());
    Ok(())
}
