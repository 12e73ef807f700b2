//! Integrability diagnostics for the Sobolev conjugate of Φ̂_x:
//! convergence of ∫₀¹ Φ̂⁻¹(τ)/τ^{(N+s)/N} dτ and divergence on [1, ∞),
//! plus a tabulation of (Φ̂*)⁻¹ and a sampled dominance check.

use std::io::Write;

use serde::Serialize;

use crate::error::{invalid, Result};
use crate::family::{Kernel, MusielakFamily};
use crate::field::Point;
use crate::quad;

/// Safety margin on the fitted exponent before a verdict is issued.
pub const EXPONENT_MARGIN: f64 = 1e-6;

const NEAR_ZERO: (f64, f64) = (1e-12, 1e-10);
const NEAR_INF: (f64, f64) = (1e10, 1e12);

#[derive(Debug, Clone, Serialize)]
pub struct SobolevSample {
    pub x: Point,
    /// Local exponent e of Φ̂⁻¹(τ) ≈ τ^e near τ = 0.
    pub exponent_zero: f64,
    /// Same, for τ → ∞.
    pub exponent_inf: f64,
    /// ∫₀¹ converges.
    pub integrable_at_zero: bool,
    /// ∫₁^∞ diverges.
    pub divergent_at_inf: bool,
    /// (t, (Φ̂*)⁻¹(t)); empty unless both conditions hold.
    pub inverse_table: Vec<(f64, f64)>,
}

impl SobolevSample {
    pub fn holds(&self) -> bool {
        self.integrable_at_zero && self.divergent_at_inf
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SobolevReport {
    pub s: f64,
    pub dim: usize,
    pub samples: Vec<SobolevSample>,
}

impl SobolevReport {
    pub fn all_hold(&self) -> bool {
        self.samples.iter().all(SobolevSample::holds)
    }

    pub fn none_hold(&self) -> bool {
        self.samples.iter().all(|s| !s.holds())
    }

    /// `x,y,s,N,exponent_zero,exponent_inf,integrable_at_zero,divergent_at_inf`
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "x,y,s,N,exponent_zero,exponent_inf,integrable_at_zero,divergent_at_inf")?;
        for r in &self.samples {
            writeln!(
                w,
                "{:e},{:e},{:e},{},{:e},{:e},{},{}",
                r.x[0], r.x[1], self.s, self.dim, r.exponent_zero, r.exponent_inf, r.integrable_at_zero, r.divergent_at_inf
            )?;
        }
        Ok(())
    }
}

fn local_exponent(k: &Kernel, (a, b): (f64, f64)) -> f64 {
    (k.big_phi_inverse(b) / k.big_phi_inverse(a)).ln() / (b / a).ln()
}

/// (Φ̂*)⁻¹(t) = ∫₀ᵗ Φ̂⁻¹(τ)/τ^{(N+s)/N} dτ.
pub fn conjugate_inverse(k: &Kernel, s: f64, dim: usize, t: f64) -> f64 {
    if t <= 0.0 {
        return 0.0;
    }
    let power = (dim as f64 + s) / dim as f64;
    quad::integrate_from_zero(|tau| k.big_phi_inverse(tau) / tau.powf(power), t, 1e-8, 60)
}

/// Φ̂*(y), the inverse of [`conjugate_inverse`].
pub fn conjugate_sobolev(k: &Kernel, s: f64, dim: usize, y: f64) -> f64 {
    quad::invert_increasing(|t| conjugate_inverse(k, s, dim, t), y, 1e-10)
}

pub fn sobolev_conjugate_diag(
    family: &MusielakFamily,
    s: f64,
    dim: usize,
    x_samples: &[Point],
) -> Result<SobolevReport> {
    if !(s > 0.0 && s < 1.0) {
        return Err(invalid(format!("s must lie in (0,1), got {s}")));
    }
    if dim == 0 {
        return Err(invalid("N must be >= 1"));
    }
    if x_samples.is_empty() {
        return Err(invalid("no x samples"));
    }
    let critical = s / dim as f64;
    let table_grid = [0.1, 0.5, 1.0, 2.0, 5.0];
    let samples = x_samples
        .iter()
        .map(|x| {
            let k = family.diagonal(x);
            let e0 = local_exponent(&k, NEAR_ZERO);
            let einf = local_exponent(&k, NEAR_INF);
            // integrand ~ τ^{e − 1 − s/N}
            let integrable_at_zero = e0 - critical > EXPONENT_MARGIN;
            let divergent_at_inf = einf - critical > -EXPONENT_MARGIN;
            let inverse_table = if integrable_at_zero && divergent_at_inf {
                table_grid.iter().map(|&t| (t, conjugate_inverse(&k, s, dim, t))).collect()
            } else {
                Vec::new()
            };
            SobolevSample {
                x: *x,
                exponent_zero: e0,
                exponent_inf: einf,
                integrable_at_zero,
                divergent_at_inf,
                inverse_table,
            }
        })
        .collect();
    Ok(SobolevReport { s, dim, samples })
}

/// Samples B(t) ≤ Φ̂*(a·t) at the large `t` values; returns the worst ratio
/// B(t)/Φ̂*(a·t) (≤ 1 means the sampled dominance holds).
pub fn dominance_ratio(
    b: impl Fn(f64) -> f64,
    k: &Kernel,
    s: f64,
    dim: usize,
    a: f64,
    t_large: &[f64],
) -> f64 {
    t_large
        .iter()
        .map(|&t| b(t) / conjugate_sobolev(k, s, dim, a * t))
        .fold(0.0, f64::max)
}
