//! Growth ratios and sampled structural checks for the built-in families.

use nonlocal_robin::family::{check_conditions, default_t_grid, growth_ratio, log_grid};
use nonlocal_robin::{FamilyKind, MusielakFamily, SymmetricField};

fn main() -> nonlocal_robin::Result<()> {
    let o = [0.0, 0.0];
    let families = [
        ("power p=3", MusielakFamily::power(3.0)),
        ("power/log p=3", MusielakFamily::power_over_log(3.0)),
        ("power*log p=2 alpha=0", MusielakFamily::power_times_log(2.0, 0.0)),
        ("power*log p=2 alpha=1", MusielakFamily::power_times_log(2.0, 1.0)),
    ];
    println!("{:<24} {:>12} {:>12} {:>12}", "family", "t=1e-6", "t=1", "t=1e6");
    for (name, fam) in &families {
        let k = fam.kernel(&o, &o);
        let r: Vec<f64> = [1e-6, 1.0, 1e6].iter().map(|&t| growth_ratio(&k, t)).collect();
        println!("{name:<24} {:>12.6} {:>12.6} {:>12.6}", r[0], r[1], r[2]);
    }

    // a variable exponent p(x,y) = 2 + (x₁ + y₁)/2 on [0,1]
    let pts: Vec<[f64; 2]> = log_grid(1e-3, 1.0, 5).into_iter().map(|x| [x, 0.0]).collect();
    let fam = MusielakFamily::with_known_bounds(
        FamilyKind::Power,
        SymmetricField::Affine { base: 2.0, slope: 1.0 },
        &pts,
    )?;
    let rep = check_conditions(&fam, &pts, &default_t_grid(), 1e-8)?;
    println!(
        "\nvariable exponent: phi in [{:.3}, {:.3}], ratio range {:?}, delta2 constant {:.3}, all ok: {}",
        fam.phi_minus,
        fam.phi_plus,
        rep.sampled_ratio_range,
        rep.delta2_constant,
        rep.all_ok()
    );
    Ok(())
}
