//! Luxemburg norms, the modular norm and the modular/norm relations.

use nonlocal_robin::space::{norms, relation_suite, variable_exponent_norm, RelationSettings};
use nonlocal_robin::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> Result<()> {
    let prob = ProblemSpec::new(
        &DomainSpec::interval(0.0, 1.0, 1.0 / 16.0, 0.5),
        0.3,
        0.0,
        MusielakFamily::power(3.0),
        SymmetricField::Constant(0.5),
        ReactionFamily::pure_power(2.0),
    )?;
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    println!("seminorm    lux_omega   lux_collar  norm_x      ||u||       rho_s(u)    ||u||_q");
    for _ in 0..5 {
        let u = DiscreteFunction::random(prob.mesh.clone(), &mut rng);
        let r = norms(&u, &prob, 1e-10)?;
        let q = variable_exponent_norm(&u, &prob, 1e-10)?;
        println!(
            "{:<11.5} {:<11.5} {:<11.5} {:<11.5} {:<11.5} {:<11.5} {:.5}",
            r.seminorm, r.lux_omega, r.lux_collar, r.norm_x, r.modular_norm, r.modular, q
        );
    }
    let rep = relation_suite(&prob, 50, 42, RelationSettings::default())?;
    for check in ["modular_gt1", "modular_lt1", "psi_gt1", "psi_lt1", "holder", "convexity"] {
        println!("{check:<12} {} samples, {} failures", rep.count(check), rep.failures(check));
    }
    Ok(())
}
