//! The fractional a(x,·)-Laplacian, the a(x,·)-Neumann operator and the
//! weak form 𝒜_s, all assembled from the problem's pair quadrature.

use std::io::Write;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::Result;
use crate::mesh::Region;
use crate::problem::ProblemSpec;
use crate::space::DiscreteFunction;

/// Operator values on the cells of one region; entries of the other region
/// are zero and never written out.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorField {
    pub region: Region,
    pub values: Vec<f64>,
}

impl OperatorField {
    pub fn iter<'a>(&'a self, prob: &'a ProblemSpec) -> impl Iterator<Item = (usize, f64)> + 'a {
        prob.mesh
            .cells
            .iter()
            .enumerate()
            .filter(move |(_, c)| c.region == self.region)
            .map(move |(k, _)| (k, self.values[k]))
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// `cell_id,region,value`
    pub fn write_csv<W: Write>(&self, prob: &ProblemSpec, mut w: W) -> std::io::Result<()> {
        writeln!(w, "cell_id,region,value")?;
        for (k, v) in self.iter(prob) {
            writeln!(w, "{k},{},{:e}", self.region.as_str(), v)?;
        }
        Ok(())
    }
}

fn restrict(prob: &ProblemSpec, mut flux: Vec<f64>, region: Region) -> OperatorField {
    for (v, c) in flux.iter_mut().zip(&prob.mesh.cells) {
        if c.region != region {
            *v = 0.0;
        }
    }
    OperatorField { region, values: flux }
}

/// (−Δ)^s u at every Ω cell: Σ_j w φ(D^s u)/d^s / |c_i| over all partner cells.
pub fn apply_fractional_laplacian(u: &DiscreteFunction, prob: &ProblemSpec) -> Result<OperatorField> {
    prob.check(u)?;
    Ok(restrict(prob, prob.nonlocal_flux(&u.values), Region::Omega))
}

/// 𝒩^s u at every collar cell; partners are Ω cells only.
pub fn apply_neumann(u: &DiscreteFunction, prob: &ProblemSpec) -> Result<OperatorField> {
    prob.check(u)?;
    Ok(restrict(prob, prob.nonlocal_flux(&u.values), Region::Collar))
}

/// Pair part of 𝒜_s: Σ_{unordered pairs} w φ(D^s u) D^s v.
pub fn form_pair_part(prob: &ProblemSpec, u: &[f64], v: &[f64]) -> f64 {
    prob.quad
        .pairs
        .iter()
        .enumerate()
        .map(|(k, p)| {
            let du = (u[p.i] - u[p.j]) / p.dist_s;
            let dv = (v[p.i] - v[p.j]) / p.dist_s;
            p.weight * prob.pair_kernel(k).phi(du) * dv
        })
        .sum()
}

/// Σ_Ω |c| φ̂(u) v + Σ_collar |c| β φ̂(u) v, with φ̂(u) = â(|u|)u.
pub fn form_mass_part(prob: &ProblemSpec, u: &[f64], v: &[f64]) -> f64 {
    prob.mesh
        .cells
        .iter()
        .enumerate()
        .map(|(k, c)| {
            let weight = match c.region {
                Region::Omega => 1.0,
                Region::Collar => prob.beta_at(k),
            };
            if weight == 0.0 {
                0.0
            } else {
                c.measure * weight * prob.cell_kernel(k).phi(u[k]) * v[k]
            }
        })
        .sum()
}

pub fn form_a_s(u: &DiscreteFunction, v: &DiscreteFunction, prob: &ProblemSpec) -> Result<f64> {
    prob.check(u)?;
    prob.check(v)?;
    Ok(form_pair_part(prob, &u.values, &v.values) + form_mass_part(prob, &u.values, &v.values))
}

#[derive(Debug, Clone, Serialize)]
pub struct IdentityResiduals {
    /// |Σ_Ω |c|(−Δ)^s u + Σ_collar |c| 𝒩^s u|
    pub r1: f64,
    /// Sum of the absolute pair fluxes entering r1.
    pub r1_scale: f64,
    /// |pair part of 𝒜_s(u,v) − Σ_Ω |c| v(−Δ)^s u − Σ_collar |c| v 𝒩^s u|
    pub r2: f64,
    pub r2_scale: f64,
    /// 𝒩^s u + β φ̂(u) on each collar cell (cell id, value).
    pub r3: Vec<(usize, f64)>,
}

impl IdentityResiduals {
    pub fn r1_rel(&self) -> f64 {
        rel(self.r1, self.r1_scale)
    }

    pub fn r2_rel(&self) -> f64 {
        rel(self.r2, self.r2_scale)
    }

    pub fn r3_max(&self) -> f64 {
        self.r3.iter().fold(0.0, |m, (_, v)| m.max(v.abs()))
    }
}

fn rel(r: f64, scale: f64) -> f64 {
    if scale == 0.0 {
        r
    } else {
        r / scale
    }
}

pub fn identity_residuals(
    u: &DiscreteFunction,
    v: &DiscreteFunction,
    prob: &ProblemSpec,
) -> Result<IdentityResiduals> {
    prob.check(u)?;
    prob.check(v)?;
    let (uv, vv) = (&u.values, &v.values);
    let flux = prob.nonlocal_flux(uv);
    let cells = &prob.mesh.cells;

    let total: f64 = flux.iter().zip(cells).map(|(f, c)| c.measure * f).sum();
    let mut r1_scale = 0.0;
    let mut r2_scale = 0.0;
    for (k, p) in prob.quad.pairs.iter().enumerate() {
        let t = p.weight * prob.pair_kernel(k).phi((uv[p.i] - uv[p.j]) / p.dist_s) / p.dist_s;
        r1_scale += 2.0 * t.abs();
        r2_scale += t.abs() * (vv[p.i].abs() + vv[p.j].abs());
    }
    let tested: f64 = flux
        .iter()
        .zip(cells)
        .zip(vv)
        .map(|((f, c), v)| c.measure * f * v)
        .sum();
    let r2 = (form_pair_part(prob, uv, vv) - tested).abs();
    let r3 = prob
        .mesh
        .collar_cells()
        .map(|(k, _)| (k, flux[k] + prob.beta_at(k) * prob.cell_kernel(k).phi(uv[k])))
        .collect();
    Ok(IdentityResiduals {
        r1: total.abs(),
        r1_scale,
        r2,
        r2_scale,
        r3,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct GreenRow {
    pub sample: usize,
    pub r1: f64,
    pub r1_rel: f64,
    pub r2: f64,
    pub r2_rel: f64,
    pub r3_max: f64,
}

/// Residuals over `n` random (u, v) pairs drawn from one seeded stream.
pub fn green_check(prob: &ProblemSpec, n: usize, seed: u64) -> Result<Vec<GreenRow>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|sample| {
            let u = DiscreteFunction::random(prob.mesh.clone(), &mut rng);
            let v = DiscreteFunction::random(prob.mesh.clone(), &mut rng);
            let r = identity_residuals(&u, &v, prob)?;
            Ok(GreenRow {
                sample,
                r1: r.r1,
                r1_rel: r.r1_rel(),
                r2: r.r2,
                r2_rel: r.r2_rel(),
                r3_max: r.r3_max(),
            })
        })
        .collect()
}

pub fn write_green_csv<W: Write>(rows: &[GreenRow], mut w: W) -> std::io::Result<()> {
    writeln!(w, "sample,r1,r1_rel,r2,r2_rel,r3_max")?;
    for r in rows {
        writeln!(w, "{},{:e},{:e},{:e},{:e},{:e}", r.sample, r.r1, r.r1_rel, r.r2, r.r2_rel, r.r3_max)?;
    }
    Ok(())
}
