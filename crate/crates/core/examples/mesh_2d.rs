//! A square domain with its collar ring, dumped as CSV, and the modular of a
//! bump on it.

use nonlocal_robin::energy::default_bump;
use nonlocal_robin::space::modular_rho_s;
use nonlocal_robin::*;

fn main() -> Result<()> {
    let prob = ProblemSpec::new(
        &DomainSpec::rectangle([0.0, 1.0], [0.0, 1.0], 0.125, 0.25),
        0.5,
        0.0,
        MusielakFamily::power(2.5),
        SymmetricField::Bump { base: 1.0, amplitude: 0.5, center: [0.5, 0.5], width: 0.5 },
        ReactionFamily::pure_power(2.0),
    )?;
    let m = &prob.mesh;
    eprintln!(
        "{} Ω cells, {} collar cells, {} pairs",
        m.count(Region::Omega),
        m.count(Region::Collar),
        prob.quad.len()
    );
    let theta = default_bump(prob.mesh.clone())?;
    eprintln!("rho_s(theta) = {:.6}", modular_rho_s(&theta, &prob)?);
    m.write_csv(std::io::stdout().lock())?;
    Ok(())
}
