//! λ sweep across both existence regimes, written as CSV to stdout.

use nonlocal_robin::energy::estimate_constants;
use nonlocal_robin::solver::{sweep_lambda, write_sweep_csv, SweepSettings};
use nonlocal_robin::*;

fn main() -> Result<()> {
    let prob = ProblemSpec::new(
        &DomainSpec::interval(0.0, 1.0, 1.0 / 16.0, 0.5),
        0.3,
        0.0,
        MusielakFamily::power(3.0),
        SymmetricField::Constant(1.0),
        ReactionFamily::pure_power(2.0),
    )?;
    let c = estimate_constants(&prob, 0.5, 50, 2.0, 0)?;
    let grid = [
        0.0,
        0.1 * c.lambda_star,
        0.5 * c.lambda_star,
        c.lambda_star,
        0.5 * c.lambda_star_upper,
        2.0 * c.lambda_star_upper,
    ];
    let rows = sweep_lambda(&prob, &c, &grid, &SweepSettings::default())?;
    write_sweep_csv(&rows, std::io::stdout().lock())?;
    Ok(())
}
