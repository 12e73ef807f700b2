//! Discrete functions on Ω ∪ collar, the modular ρ_s, Luxemburg norms and
//! the sampled modular/norm inequality suites.

use std::io::Write;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::field::Point;
use crate::mesh::{Mesh, Region};
use crate::problem::ProblemSpec;

/// Nodal values, one per mesh cell (the node is the cell center).
#[derive(Debug, Clone)]
pub struct DiscreteFunction {
    pub values: Vec<f64>,
    mesh: Arc<Mesh>,
}

impl PartialEq for DiscreteFunction {
    fn eq(&self, other: &Self) -> bool {
        self.values == other.values
    }
}

impl DiscreteFunction {
    pub fn new(mesh: Arc<Mesh>, values: Vec<f64>) -> Result<Self> {
        if values.len() != mesh.len() {
            return Err(Error::MeshMismatch {
                expected: mesh.len(),
                got: values.len(),
            });
        }
        if let Some(v) = values.iter().find(|v| !v.is_finite()) {
            return Err(invalid(format!("nodal values must be finite, found {v}")));
        }
        Ok(Self { values, mesh })
    }

    pub fn zeros(mesh: Arc<Mesh>) -> Self {
        let n = mesh.len();
        Self {
            values: vec![0.0; n],
            mesh,
        }
    }

    pub fn constant(mesh: Arc<Mesh>, c: f64) -> Self {
        let n = mesh.len();
        Self {
            values: vec![c; n],
            mesh,
        }
    }

    pub fn from_fn(mesh: Arc<Mesh>, f: impl Fn(&Point, Region) -> f64) -> Self {
        let values = mesh.cells.iter().map(|c| f(&c.center, c.region)).collect();
        Self { values, mesh }
    }

    /// t on Ω, 0 on the collar.
    pub fn omega_indicator(mesh: Arc<Mesh>, t: f64) -> Self {
        Self::from_fn(mesh, |_, r| if r == Region::Omega { t } else { 0.0 })
    }

    /// The k-th nodal basis function.
    pub fn basis(mesh: Arc<Mesh>, k: usize) -> Self {
        let mut u = Self::zeros(mesh);
        u.values[k] = 1.0;
        u
    }

    /// I.i.d. uniform nodal values in [-1, 1].
    pub fn random(mesh: Arc<Mesh>, rng: &mut impl Rng) -> Self {
        let values = (0..mesh.len()).map(|_| rng.gen_range(-1.0..=1.0)).collect();
        Self { values, mesh }
    }

    pub fn mesh(&self) -> &Arc<Mesh> {
        &self.mesh
    }

    pub fn with_values(&self, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), self.values.len());
        Self {
            values,
            mesh: self.mesh.clone(),
        }
    }

    pub fn scaled(&self, a: f64) -> Self {
        self.with_values(self.values.iter().map(|v| a * v).collect())
    }

    /// a·self + b·other
    pub fn combine(&self, a: f64, other: &Self, b: f64) -> Self {
        self.with_values(
            self.values
                .iter()
                .zip(&other.values)
                .map(|(x, y)| a * x + b * y)
                .collect(),
        )
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Piecewise-(bi)linear interpolation of the nodal values at `x`;
    /// `None` outside the hull of the cell centers.
    pub fn interpolate(&self, x: &Point) -> Option<f64> {
        let m = &*self.mesh;
        let mut idx = [0usize; 2];
        let mut frac = [0.0; 2];
        for k in 0..m.dim {
            let r = (x[k] - m.origin[k]) / m.h;
            let last = (m.shape[k] - 1) as f64;
            if !(r >= -1e-12 && r <= last + 1e-12) {
                return None;
            }
            let r = r.clamp(0.0, last);
            let i = (r.floor() as usize).min(m.shape[k].saturating_sub(2));
            idx[k] = i;
            frac[k] = r - i as f64;
        }
        let at = |ix: usize, iy: usize| self.values[iy * m.shape[0] + ix];
        if m.dim == 1 {
            let (i, t) = (idx[0], frac[0]);
            if m.shape[0] == 1 {
                return Some(at(0, 0));
            }
            return Some((1.0 - t) * at(i, 0) + t * at(i + 1, 0));
        }
        let (i, j, tx, ty) = (idx[0], idx[1], frac[0], frac[1]);
        Some(
            (1.0 - tx) * (1.0 - ty) * at(i, j)
                + tx * (1.0 - ty) * at(i + 1, j)
                + (1.0 - tx) * ty * at(i, j + 1)
                + tx * ty * at(i + 1, j + 1),
        )
    }

    /// `node_id,x,[y,]region,u`
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        let two_d = self.mesh.dim == 2;
        writeln!(w, "{}", if two_d { "node_id,x,y,region,u" } else { "node_id,x,region,u" })?;
        for (i, (c, v)) in self.mesh.cells.iter().zip(&self.values).enumerate() {
            if two_d {
                writeln!(w, "{i},{:e},{:e},{},{:e}", c.center[0], c.center[1], c.region.as_str(), v)?;
            } else {
                writeln!(w, "{i},{:e},{},{:e}", c.center[0], c.region.as_str(), v)?;
            }
        }
        Ok(())
    }
}

/// ρ_s(u): the full pair integral over ℝ^{2N}∖(CΩ)² (each unordered pair
/// counted for both orders) plus the Ω and β-weighted collar terms.
pub fn modular_rho_s(u: &DiscreteFunction, prob: &ProblemSpec) -> Result<f64> {
    prob.check(u)?;
    Ok(rho_s_values(prob, &u.values, 1.0))
}

pub(crate) fn rho_s_values(prob: &ProblemSpec, u: &[f64], scale: f64) -> f64 {
    2.0 * prob.pair_modular(u, scale) + prob.omega_modular(u, scale) + prob.collar_modular(u, scale)
}

/// The modular Ψ restricted to Ω×Ω pairs plus the Ω term.
pub fn modular_psi(u: &DiscreteFunction, prob: &ProblemSpec) -> Result<f64> {
    prob.check(u)?;
    Ok(psi_values(prob, &u.values, 1.0))
}

fn psi_values(prob: &ProblemSpec, u: &[f64], scale: f64) -> f64 {
    let cells = &prob.mesh.cells;
    let both_omega = |i: usize, j: usize| cells[i].region == Region::Omega && cells[j].region == Region::Omega;
    2.0 * prob.pair_modular_filtered(u, scale, both_omega) + prob.omega_modular(u, scale)
}

/// inf{λ > 0 : modular_at(λ) ≤ 1}, where `modular_at(λ)` evaluates the
/// modular of u/λ. Bracketing starts at λ = 1 and doubles or halves; the
/// bracket is then bisected to relative width `tol / 4`.
pub fn luxemburg_norm<F: FnMut(f64) -> f64>(mut modular_at: F, tol: f64) -> Result<f64> {
    if !(tol > 0.0) {
        return Err(invalid("tolerance must be positive"));
    }
    let slack = |m: f64| 1e-12 * m.abs().max(1e-300);
    let mut hi = 1.0;
    let mut m_hi = modular_at(hi);
    let mut lo;
    if m_hi <= 1.0 {
        // shrink until the modular exceeds one
        lo = hi;
        loop {
            let cand = 0.5 * lo;
            if cand < 1e-300 {
                return Ok(0.0);
            }
            let m = modular_at(cand);
            if m < m_hi - slack(m_hi) {
                return Err(Error::Consistency(format!(
                    "modular increased with lambda: {m} at {cand} vs {m_hi} at {lo}"
                )));
            }
            if m > 1.0 {
                hi = lo;
                lo = cand;
                break;
            }
            lo = cand;
            m_hi = m;
        }
    } else {
        loop {
            let cand = 2.0 * hi;
            if cand > 1e300 {
                return Err(Error::Consistency("modular does not decay along the ray".into()));
            }
            let m = modular_at(cand);
            if m > m_hi + slack(m_hi) {
                return Err(Error::Consistency(format!(
                    "modular increased with lambda: {m} at {cand} vs {m_hi} at {hi}"
                )));
            }
            lo = hi;
            hi = cand;
            m_hi = m;
            if m <= 1.0 {
                break;
            }
        }
    }
    let width = 0.25 * tol;
    for _ in 0..300 {
        if hi - lo <= width * hi {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if modular_at(mid) <= 1.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

/// ‖u‖ = inf{λ : ρ_s(u/λ) ≤ 1}
pub fn modular_norm(u: &DiscreteFunction, prob: &ProblemSpec, tol: f64) -> Result<f64> {
    prob.check(u)?;
    modular_norm_values(prob, &u.values, tol)
}

pub(crate) fn modular_norm_values(prob: &ProblemSpec, u: &[f64], tol: f64) -> Result<f64> {
    luxemburg_norm(|l| rho_s_values(prob, u, l), tol)
}

/// Norm induced by the Ω-restricted modular Ψ.
pub fn psi_norm(u: &DiscreteFunction, prob: &ProblemSpec, tol: f64) -> Result<f64> {
    prob.check(u)?;
    luxemburg_norm(|l| psi_values(prob, &u.values, l), tol)
}

/// ‖u‖_{q(x)} over Ω.
pub fn variable_exponent_norm(u: &DiscreteFunction, prob: &ProblemSpec, tol: f64) -> Result<f64> {
    prob.check(u)?;
    let cells: Vec<(f64, f64, f64)> = prob
        .mesh
        .omega_cells()
        .map(|(k, c)| (c.measure, prob.q_at(k), u.values[k].abs()))
        .collect();
    luxemburg_norm(
        |l| cells.iter().map(|(m, q, v)| m * (v / l).powf(*q)).sum(),
        tol,
    )
}

/// ‖u‖_{Φ̂_x} over Ω.
pub fn omega_norm(u: &DiscreteFunction, prob: &ProblemSpec, tol: f64) -> Result<f64> {
    prob.check(u)?;
    luxemburg_norm(|l| prob.omega_modular(&u.values, l), tol)
}

/// Luxemburg norm over Ω for the conjugate diagonal family Φ̄̂_x.
pub fn conjugate_omega_norm(v: &DiscreteFunction, prob: &ProblemSpec, tol: f64) -> Result<f64> {
    prob.check(v)?;
    let cells: Vec<(usize, f64)> = prob.mesh.omega_cells().map(|(k, c)| (k, c.measure)).collect();
    luxemburg_norm(
        |l| {
            cells
                .iter()
                .map(|&(k, m)| m * prob.cell_kernel(k).conjugate(v.values[k].abs() / l))
                .sum()
        },
        tol,
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NormReport {
    pub seminorm: f64,
    pub lux_omega: f64,
    pub lux_collar: f64,
    pub norm_x: f64,
    pub modular_norm: f64,
    pub modular: f64,
}

impl NormReport {
    pub const CSV_HEADER: &'static str = "seminorm,lux_omega,lux_collar,norm_x,modular_norm,modular";

    pub fn csv_row(&self) -> String {
        format!(
            "{:e},{:e},{:e},{:e},{:e},{:e}",
            self.seminorm, self.lux_omega, self.lux_collar, self.norm_x, self.modular_norm, self.modular
        )
    }
}

pub fn norms(u: &DiscreteFunction, prob: &ProblemSpec, tol: f64) -> Result<NormReport> {
    prob.check(u)?;
    let v = &u.values;
    let seminorm = luxemburg_norm(|l| 2.0 * prob.pair_modular(v, l), tol)?;
    let lux_omega = luxemburg_norm(|l| prob.omega_modular(v, l), tol)?;
    let lux_collar = luxemburg_norm(|l| prob.collar_modular(v, l), tol)?;
    Ok(NormReport {
        seminorm,
        lux_omega,
        lux_collar,
        norm_x: seminorm + lux_omega + lux_collar,
        modular_norm: modular_norm_values(prob, v, tol)?,
        modular: rho_s_values(prob, v, 1.0),
    })
}

/// I₁(u) = ½·(pair integral) + Ω term + collar term, i.e. the energy without
/// the reaction part.
pub fn i1_values(prob: &ProblemSpec, u: &[f64]) -> f64 {
    prob.pair_modular(u, 1.0) + prob.omega_modular(u, 1.0) + prob.collar_modular(u, 1.0)
}

/// ½I₁(u) + ½I₁(v) − I₁((u+v)/2) − I₁((u−v)/2); nonnegative whenever
/// t ↦ Φ(√t) is convex.
pub fn convexity_margin(u: &DiscreteFunction, v: &DiscreteFunction, prob: &ProblemSpec) -> Result<f64> {
    prob.check(u)?;
    prob.check(v)?;
    let (a, b) = (i1_values(prob, &u.values), i1_values(prob, &v.values));
    let half_sum = u.combine(0.5, v, 0.5);
    let half_diff = u.combine(0.5, v, -0.5);
    Ok(0.5 * a + 0.5 * b - i1_values(prob, &half_sum.values) - i1_values(prob, &half_diff.values))
}

/// (|∫_Ω uv|, 2‖u‖_{Φ̂}‖v‖_{Φ̄̂}).
pub fn holder_sides(u: &DiscreteFunction, v: &DiscreteFunction, prob: &ProblemSpec, tol: f64) -> Result<(f64, f64)> {
    prob.check(u)?;
    prob.check(v)?;
    let lhs: f64 = prob
        .mesh
        .omega_cells()
        .map(|(k, c)| c.measure * u.values[k] * v.values[k])
        .sum::<f64>()
        .abs();
    let rhs = 2.0 * omega_norm(u, prob, tol)? * conjugate_omega_norm(v, prob, tol)?;
    Ok((lhs, rhs))
}

#[derive(Debug, Clone, Serialize)]
pub struct RelationRow {
    pub sample: usize,
    /// "modular_gt1", "modular_lt1", "psi_gt1", "psi_lt1", "holder" or "convexity".
    pub check: &'static str,
    pub norm: f64,
    pub value: f64,
    pub lower: f64,
    pub upper: f64,
    /// Smallest signed slack; negative beyond tolerance means violation.
    pub margin: f64,
    pub ok: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct RelationReport {
    pub rows: Vec<RelationRow>,
    pub violations: usize,
}

impl RelationReport {
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "sample,check,norm,value,lower,upper,margin,ok")?;
        for r in &self.rows {
            writeln!(
                w,
                "{},{},{:e},{:e},{:e},{:e},{:e},{}",
                r.sample, r.check, r.norm, r.value, r.lower, r.upper, r.margin, r.ok
            )?;
        }
        Ok(())
    }

    pub fn count(&self, check: &str) -> usize {
        self.rows.iter().filter(|r| r.check == check).count()
    }

    pub fn failures(&self, check: &str) -> usize {
        self.rows.iter().filter(|r| r.check == check && !r.ok).count()
    }
}

#[derive(Debug, Clone, Copy)]
pub struct RelationSettings {
    /// Violation threshold for every inequality (scaled by max(1, bound)).
    pub tol: f64,
    /// Relative tolerance of the Luxemburg bisections.
    pub norm_tol: f64,
    /// Include the Ω-only modular Ψ in the norm/modular checks.
    pub include_psi: bool,
}

impl Default for RelationSettings {
    fn default() -> Self {
        Self {
            tol: 1e-7,
            norm_tol: 1e-9,
            include_psi: true,
        }
    }
}

fn modular_row(sample: usize, check: &'static str, norm: f64, value: f64, pm: f64, pp: f64, tol: f64) -> RelationRow {
    let (lower, upper) = if norm > 1.0 {
        (norm.powf(pm), norm.powf(pp))
    } else {
        (norm.powf(pp), norm.powf(pm))
    };
    let margin = (value - lower).min(upper - value);
    let ok = value >= lower - tol * lower.max(1.0) && value <= upper + tol * upper.max(1.0);
    RelationRow {
        sample,
        check,
        norm,
        value,
        lower,
        upper,
        margin,
        ok,
    }
}

/// Random-sample verification of the modular/norm relations in both regimes
/// (‖u‖ = 2 and ‖u‖ = 0.5), the Hölder inequality over Ω, and the midpoint
/// convexity inequality for I₁.
pub fn relation_suite(
    prob: &ProblemSpec,
    n_samples: usize,
    seed: u64,
    settings: RelationSettings,
) -> Result<RelationReport> {
    if n_samples == 0 {
        return Err(invalid("n_samples must be >= 1"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (pm, pp) = (prob.family.phi_minus, prob.family.phi_plus);
    let tol = settings.tol;
    let mut rows = Vec::new();
    for sample in 0..n_samples {
        let u = DiscreteFunction::random(prob.mesh.clone(), &mut rng);
        let v = DiscreteFunction::random(prob.mesh.clone(), &mut rng);
        let base = modular_norm(&u, prob, settings.norm_tol)?;
        for (target, check) in [(2.0, "modular_gt1"), (0.5, "modular_lt1")] {
            let w = u.scaled(target / base);
            let norm = modular_norm(&w, prob, settings.norm_tol)?;
            let value = modular_rho_s(&w, prob)?;
            rows.push(modular_row(sample, check, norm, value, pm, pp, tol));
        }
        if settings.include_psi {
            let base = psi_norm(&u, prob, settings.norm_tol)?;
            for (target, check) in [(2.0, "psi_gt1"), (0.5, "psi_lt1")] {
                let w = u.scaled(target / base);
                let norm = psi_norm(&w, prob, settings.norm_tol)?;
                let value = modular_psi(&w, prob)?;
                rows.push(modular_row(sample, check, norm, value, pm, pp, tol));
            }
        }
        let (lhs, rhs) = holder_sides(&u, &v, prob, settings.norm_tol)?;
        rows.push(RelationRow {
            sample,
            check: "holder",
            norm: f64::NAN,
            value: lhs,
            lower: f64::NAN,
            upper: rhs,
            margin: rhs - lhs,
            ok: lhs <= rhs + tol * rhs.max(1.0),
        });
        let margin = convexity_margin(&u, &v, prob)?;
        let scale = 0.5 * (i1_values(prob, &u.values) + i1_values(prob, &v.values));
        rows.push(RelationRow {
            sample,
            check: "convexity",
            norm: f64::NAN,
            value: margin,
            lower: 0.0,
            upper: f64::NAN,
            margin,
            ok: margin >= -tol * scale.max(1.0),
        });
    }
    let violations = rows.iter().filter(|r| !r.ok).count();
    Ok(RelationReport { rows, violations })
}
