//! Integrability verdicts for the Sobolev conjugate and a short table of its
//! inverse.

use nonlocal_robin::sobolev::sobolev_conjugate_diag;
use nonlocal_robin::MusielakFamily;

fn main() -> nonlocal_robin::Result<()> {
    println!("   p     s  N   sp<N  verdict  e(0)      e(inf)");
    for (p, s, n) in [(2.0, 0.3, 1), (2.0, 0.6, 1), (3.0, 0.3, 1), (3.0, 0.9, 1), (3.0, 0.5, 2), (2.0, 0.9, 2)] {
        let rep = sobolev_conjugate_diag(&MusielakFamily::power(p), s, n, &[[0.5, 0.5]])?;
        let smp = &rep.samples[0];
        println!(
            "{p:>4} {s:>5} {n:>2} {:>6} {:>8}  {:.6}  {:.6}",
            s * p < n as f64,
            rep.all_hold(),
            smp.exponent_zero,
            smp.exponent_inf
        );
    }
    let rep = sobolev_conjugate_diag(&MusielakFamily::power_times_log(3.0, 0.5), 0.2, 1, &[[0.0, 0.0]])?;
    println!("\npower*log p=3, s=0.2: inverse conjugate table");
    for (t, v) in &rep.samples[0].inverse_table {
        println!("  t = {t:<4} -> {v:.6}");
    }
    Ok(())
}
