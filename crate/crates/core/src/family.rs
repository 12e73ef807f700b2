//! Spatially dependent Musielak functions Φ_{x,y}, their derivatives φ_{x,y},
//! diagonal restrictions Φ̂_x, conjugates, and sampled checks of the
//! structural growth conditions.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::field::{Point, SymmetricField};
use crate::quad;

/// Relative tolerance for Φ when it has no closed form.
pub const PHI_REL_TOL: f64 = 1e-10;
/// Relative tolerance of the bisection inverse φ̄.
pub const INVERSE_TOL: f64 = 1e-13;

/// User supplied kernel `a(x, y, t)` for `t > 0`.
#[derive(Clone)]
pub struct CustomKernel(pub Arc<dyn Fn(&Point, &Point, f64) -> f64 + Send + Sync>);

impl fmt::Debug for CustomKernel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("CustomKernel(..)")
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FamilyKind {
    /// φ(t) = p|t|^{p-2}t, Φ(t) = |t|^p.
    Power,
    /// φ(t) = p|t|^{p-2}t / log(1+|t|).
    PowerOverLog,
    /// φ(t) = p log(1+α+|t|)|t|^{p-2}t.
    PowerTimesLog { alpha: f64 },
    #[serde(skip)]
    Custom(CustomKernel),
}

/// The one-variable Musielak function obtained by freezing (x, y).
#[derive(Debug, Clone)]
pub enum Kernel {
    Power { p: f64 },
    PowerOverLog { p: f64 },
    PowerTimesLog { p: f64, alpha: f64 },
    Custom { a: CustomKernel, x: Point, y: Point },
}

impl Kernel {
    /// `a(t)` for `t > 0`.
    pub fn a(&self, t: f64) -> f64 {
        match self {
            Kernel::Power { p } => p * t.powf(p - 2.0),
            Kernel::PowerOverLog { p } => p * t.powf(p - 2.0) / t.ln_1p(),
            Kernel::PowerTimesLog { p, alpha } => p * (1.0 + alpha + t).ln() * t.powf(p - 2.0),
            Kernel::Custom { a, x, y } => (a.0)(x, y, t),
        }
    }

    /// φ(t) = a(|t|)t, odd, φ(0) = 0.
    pub fn phi(&self, t: f64) -> f64 {
        if t == 0.0 {
            return 0.0;
        }
        let at = t.abs();
        let v = match self {
            Kernel::Power { p } => p * at.powf(p - 1.0),
            _ => self.a(at) * at,
        };
        v.copysign(t)
    }

    /// Φ(t) = ∫₀ᵗ φ for `t ≥ 0`.
    pub fn big_phi(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return 0.0;
        }
        match self {
            Kernel::Power { p } => t.powf(*p),
            _ => quad::integrate(|tau| self.phi(tau), 0.0, t, PHI_REL_TOL),
        }
    }

    /// φ̄(t) = sup{s : φ(s) ≤ t}, the inverse of φ on [0, ∞).
    pub fn phi_inverse(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return 0.0;
        }
        quad::invert_increasing(|s| self.phi(s), t, INVERSE_TOL)
    }

    /// Φ̄(t) = ∫₀ᵗ φ̄. For an increasing homeomorphism φ this integral equals
    /// t·φ̄(t) − Φ(φ̄(t)), which is what is evaluated.
    pub fn conjugate(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return 0.0;
        }
        let s = self.phi_inverse(t);
        (t * s - self.big_phi(s)).max(0.0)
    }

    /// Inverse of Φ on [0, ∞).
    pub fn big_phi_inverse(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return 0.0;
        }
        match self {
            Kernel::Power { p } => t.powf(1.0 / p),
            _ => quad::invert_increasing(|s| self.big_phi(s), t, INVERSE_TOL),
        }
    }
}

/// A family (x, y) ↦ Φ_{x,y} together with its declared growth indices.
#[derive(Debug, Clone)]
pub struct MusielakFamily {
    pub kind: FamilyKind,
    pub exponent: SymmetricField,
    pub phi_minus: f64,
    pub phi_plus: f64,
}

impl MusielakFamily {
    pub fn new(
        kind: FamilyKind,
        exponent: SymmetricField,
        phi_minus: f64,
        phi_plus: f64,
    ) -> Result<Self> {
        if !(phi_minus > 1.0 && phi_minus <= phi_plus && phi_plus.is_finite()) {
            return Err(Error::Validation(format!(
                "growth indices must satisfy 1 < phi_minus <= phi_plus < inf, got ({phi_minus}, {phi_plus})"
            )));
        }
        if let FamilyKind::PowerTimesLog { alpha } = kind {
            if !(alpha >= 0.0) {
                return Err(Error::Validation(format!("alpha must be >= 0, got {alpha}")));
            }
        }
        Ok(Self {
            kind,
            exponent,
            phi_minus,
            phi_plus,
        })
    }

    /// Builds a built-in family with the growth indices known for it,
    /// using the exponent range over `points`:
    /// Power → [p⁻, p⁺], PowerOverLog → [p⁻−1, p⁺], PowerTimesLog → [p⁻, p⁺+1].
    pub fn with_known_bounds(
        kind: FamilyKind,
        exponent: SymmetricField,
        points: &[Point],
    ) -> Result<Self> {
        let (lo, hi) = exponent.range_over(points);
        let (m, p) = match kind {
            FamilyKind::Power => (lo, hi),
            FamilyKind::PowerOverLog => (lo - 1.0, hi),
            FamilyKind::PowerTimesLog { .. } => (lo, hi + 1.0),
            FamilyKind::Custom(_) => {
                return Err(invalid("custom families need explicit growth indices"))
            }
        };
        Self::new(kind, exponent, m, p)
    }

    pub fn power(p: f64) -> Self {
        Self::new(FamilyKind::Power, SymmetricField::Constant(p), p, p)
            .expect("power exponent must exceed 1")
    }

    pub fn power_over_log(p: f64) -> Self {
        Self::new(FamilyKind::PowerOverLog, SymmetricField::Constant(p), p - 1.0, p)
            .expect("power-over-log exponent must exceed 2")
    }

    pub fn power_times_log(p: f64, alpha: f64) -> Self {
        Self::new(
            FamilyKind::PowerTimesLog { alpha },
            SymmetricField::Constant(p),
            p,
            p + 1.0,
        )
        .expect("power-times-log exponent must exceed 1")
    }

    pub fn kernel(&self, x: &Point, y: &Point) -> Kernel {
        match &self.kind {
            FamilyKind::Power => Kernel::Power {
                p: self.exponent.eval(x, y),
            },
            FamilyKind::PowerOverLog => Kernel::PowerOverLog {
                p: self.exponent.eval(x, y),
            },
            FamilyKind::PowerTimesLog { alpha } => Kernel::PowerTimesLog {
                p: self.exponent.eval(x, y),
                alpha: *alpha,
            },
            FamilyKind::Custom(a) => Kernel::Custom {
                a: a.clone(),
                x: *x,
                y: *y,
            },
        }
    }

    /// The diagonal kernel Φ̂_x = Φ_{x,x}.
    pub fn diagonal(&self, x: &Point) -> Kernel {
        self.kernel(x, x)
    }

    pub fn a(&self, x: &Point, y: &Point, t: f64) -> f64 {
        self.kernel(x, y).a(t)
    }
}

fn check_finite(t: f64) -> Result<()> {
    if t.is_finite() {
        Ok(())
    } else {
        Err(invalid(format!("argument must be finite, got {t}")))
    }
}

fn check_nonneg(t: f64) -> Result<()> {
    check_finite(t)?;
    if t < 0.0 {
        return Err(invalid(format!("argument must be >= 0, got {t}")));
    }
    Ok(())
}

pub fn eval_phi(family: &MusielakFamily, x: &Point, y: &Point, t: f64) -> Result<f64> {
    check_finite(t)?;
    Ok(family.kernel(x, y).phi(t))
}

pub fn eval_big_phi(family: &MusielakFamily, x: &Point, y: &Point, t: f64) -> Result<f64> {
    check_nonneg(t)?;
    Ok(family.kernel(x, y).big_phi(t))
}

pub fn conjugate_big_phi(family: &MusielakFamily, x: &Point, y: &Point, t: f64) -> Result<f64> {
    check_nonneg(t)?;
    Ok(family.kernel(x, y).conjugate(t))
}

/// `n` log-spaced values in `[lo, hi]`.
pub fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    let (a, b) = (lo.ln(), hi.ln());
    (0..n)
        .map(|k| (a + (b - a) * k as f64 / (n - 1) as f64).exp())
        .collect()
}

/// The growth ratio tφ(t)/Φ(t).
pub fn growth_ratio(kernel: &Kernel, t: f64) -> f64 {
    t * kernel.phi(t) / kernel.big_phi(t)
}

/// (min, max) of tφ_{x,y}(t)/Φ_{x,y}(t) over the grid and the sampled pairs.
pub fn estimate_phi_bounds(
    family: &MusielakFamily,
    t_grid: &[f64],
    xy_samples: &[(Point, Point)],
) -> Result<(f64, f64)> {
    if t_grid.is_empty() {
        return Err(invalid("t grid is empty"));
    }
    if xy_samples.is_empty() {
        return Err(invalid("no (x, y) samples"));
    }
    if let Some(t) = t_grid.iter().find(|t| !(**t > 0.0 && t.is_finite())) {
        return Err(invalid(format!("t grid must lie in (0, inf), found {t}")));
    }
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for (x, y) in xy_samples {
        let k = family.kernel(x, y);
        for &t in t_grid {
            let r = growth_ratio(&k, t);
            lo = lo.min(r);
            hi = hi.max(r);
        }
    }
    Ok((lo, hi))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Violation {
    pub x: Point,
    pub y: Point,
    pub t: f64,
    pub quantity: String,
    pub value: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ConditionReport {
    pub phi1_ok: bool,
    pub phi2_ok: bool,
    pub phi3_ok: bool,
    pub delta2_ok: bool,
    /// Growth ratio range on the diagonal family Φ̂_x.
    pub diagonal_ok: bool,
    pub sampled_ratio_range: (f64, f64),
    pub diagonal_ratio_range: (f64, f64),
    pub delta2_constant: f64,
    pub phi3_sup: f64,
    pub violations: Vec<Violation>,
}

impl ConditionReport {
    pub fn all_ok(&self) -> bool {
        self.phi1_ok && self.phi2_ok && self.phi3_ok && self.delta2_ok && self.diagonal_ok
    }
}

/// Default t grid for the sampled condition checks.
pub fn default_t_grid() -> Vec<f64> {
    log_grid(1e-6, 1e6, 61)
}

/// Sampled verification of the growth ratio bounds, convexity of t ↦ Φ(√t),
/// boundedness of Φ_{x,y}(1), the Δ₂ bound and the inherited diagonal bounds.
pub fn check_conditions(
    family: &MusielakFamily,
    points: &[Point],
    t_grid: &[f64],
    tol: f64,
) -> Result<ConditionReport> {
    if !(tol > 0.0) {
        return Err(invalid("tolerance must be positive"));
    }
    if points.is_empty() || t_grid.is_empty() {
        return Err(invalid("need at least one point and one t value"));
    }
    let mut violations = Vec::new();
    let mut ratio_range = (f64::INFINITY, f64::NEG_INFINITY);
    let mut diag_range = (f64::INFINITY, f64::NEG_INFINITY);
    let mut delta2: f64 = 0.0;
    let mut phi3_sup: f64 = 0.0;
    let mut phi2_ok = true;
    let delta2_bound = 2f64.powf(family.phi_plus) + tol;
    let (lo_b, hi_b) = (family.phi_minus - tol, family.phi_plus + tol);

    // Φ(√τ) on a grid in τ = t².
    let tau_grid: Vec<f64> = t_grid.iter().map(|t| t * t).collect();

    for x in points {
        for y in points {
            let k = family.kernel(x, y);
            let is_diag = x == y;
            let values: Vec<f64> = t_grid.iter().map(|&t| k.big_phi(t)).collect();
            for (&t, &big) in t_grid.iter().zip(&values) {
                let r = t * k.phi(t) / big;
                ratio_range.0 = ratio_range.0.min(r);
                ratio_range.1 = ratio_range.1.max(r);
                if is_diag {
                    diag_range.0 = diag_range.0.min(r);
                    diag_range.1 = diag_range.1.max(r);
                }
                if !(r >= lo_b && r <= hi_b) {
                    violations.push(Violation {
                        x: *x,
                        y: *y,
                        t,
                        quantity: "growth_ratio".into(),
                        value: r,
                    });
                }
                let d2 = k.big_phi(2.0 * t) / big;
                delta2 = delta2.max(d2);
                if d2 > delta2_bound {
                    violations.push(Violation {
                        x: *x,
                        y: *y,
                        t,
                        quantity: "delta2".into(),
                        value: d2,
                    });
                }
            }
            // slopes of τ ↦ Φ(√τ) must be nondecreasing
            for w in 0..tau_grid.len().saturating_sub(2) {
                let s1 = (values[w + 1] - values[w]) / (tau_grid[w + 1] - tau_grid[w]);
                let s2 = (values[w + 2] - values[w + 1]) / (tau_grid[w + 2] - tau_grid[w + 1]);
                let scale = s1.abs().max(s2.abs()).max(f64::MIN_POSITIVE);
                let rel = (s2 - s1) / scale;
                if rel < -tol {
                    phi2_ok = false;
                    violations.push(Violation {
                        x: *x,
                        y: *y,
                        t: t_grid[w + 1],
                        quantity: "sqrt_convexity".into(),
                        value: rel,
                    });
                }
            }
            let at_one = k.big_phi(1.0);
            phi3_sup = phi3_sup.max(at_one);
        }
    }
    let in_bounds = |r: (f64, f64)| r.0 >= lo_b && r.1 <= hi_b;
    let phi1_ok = in_bounds(ratio_range);
    Ok(ConditionReport {
        phi1_ok,
        phi2_ok,
        phi3_ok: phi3_sup.is_finite(),
        delta2_ok: delta2 <= delta2_bound,
        diagonal_ok: in_bounds(diag_range),
        sampled_ratio_range: ratio_range,
        diagonal_ratio_range: diag_range,
        delta2_constant: delta2,
        phi3_sup,
        violations,
    })
}
