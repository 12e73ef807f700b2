//! The discrete problem: mesh, pair quadrature, coefficients, and the
//! per-pair / per-cell kernel cache every nonlocal sum runs over.

use std::sync::Arc;

use crate::error::{invalid, Error, Result};
use crate::family::{Kernel, MusielakFamily};
use crate::field::{Point, SymmetricField};
use crate::mesh::{build_mesh, pair_quadrature, DomainSpec, Mesh, PairQuadrature, Region};
use crate::reaction::ReactionFamily;
use crate::space::DiscreteFunction;

#[derive(Debug, Clone)]
pub struct ProblemSpec {
    pub s: f64,
    pub lambda: f64,
    pub family: MusielakFamily,
    pub beta: SymmetricField,
    pub reaction: ReactionFamily,
    pub mesh: Arc<Mesh>,
    pub quad: Arc<PairQuadrature>,
    cache: Arc<Cache>,
}

#[derive(Debug)]
struct Cache {
    pair_kernels: Vec<Kernel>,
    cell_kernels: Vec<Kernel>,
    /// β on collar cells, 0 on Ω.
    beta: Vec<f64>,
    /// q on Ω cells, NaN on the collar.
    q: Vec<f64>,
}

impl ProblemSpec {
    pub fn new(
        domain: &DomainSpec,
        s: f64,
        lambda: f64,
        family: MusielakFamily,
        beta: SymmetricField,
        reaction: ReactionFamily,
    ) -> Result<Self> {
        if !(s > 0.0 && s < 1.0) {
            return Err(Error::Validation(format!("s in (0,1) required, got {s}")));
        }
        let mesh = Arc::new(build_mesh(domain)?);
        let quad = Arc::new(pair_quadrature(&mesh, s)?);
        Self::from_parts(mesh, quad, lambda, family, beta, reaction)
    }

    pub fn from_parts(
        mesh: Arc<Mesh>,
        quad: Arc<PairQuadrature>,
        lambda: f64,
        family: MusielakFamily,
        beta: SymmetricField,
        reaction: ReactionFamily,
    ) -> Result<Self> {
        let s = quad.s;
        if !(s > 0.0 && s < 1.0) {
            return Err(Error::Validation(format!("s in (0,1) required, got {s}")));
        }
        if !(lambda >= 0.0 && lambda.is_finite()) {
            return Err(Error::Validation(format!("lambda >= 0 required, got {lambda}")));
        }
        let omega_pts: Vec<Point> = mesh.omega_cells().map(|(_, c)| c.center).collect();
        let (q_lo, q_hi) = reaction.exponent.diagonal_range(&omega_pts);
        if !(q_lo > 1.0) {
            return Err(Error::Validation(format!("q- > 1 required, got {q_lo}")));
        }
        if !(q_hi < family.phi_minus) {
            return Err(Error::Validation(format!(
                "q+ < phi_minus required, got q+ = {q_hi}, phi_minus = {}",
                family.phi_minus
            )));
        }
        let mut beta_vals = vec![0.0; mesh.len()];
        for (k, c) in mesh.collar_cells() {
            let b = beta.at(&c.center);
            if !(b >= 0.0 && b.is_finite()) {
                return Err(Error::Validation(format!("beta >= 0 required, got {b} at {:?}", c.center)));
            }
            beta_vals[k] = b;
        }
        let q = mesh
            .cells
            .iter()
            .map(|c| match c.region {
                Region::Omega => reaction.q_at(&c.center),
                Region::Collar => f64::NAN,
            })
            .collect();
        let pair_kernels = quad
            .pairs
            .iter()
            .map(|p| family.kernel(&mesh.cells[p.i].center, &mesh.cells[p.j].center))
            .collect();
        let cell_kernels = mesh.cells.iter().map(|c| family.diagonal(&c.center)).collect();
        Ok(Self {
            s,
            lambda,
            family,
            beta,
            reaction,
            mesh,
            quad,
            cache: Arc::new(Cache {
                pair_kernels,
                cell_kernels,
                beta: beta_vals,
                q,
            }),
        })
    }

    /// Same data, different λ.
    pub fn with_lambda(&self, lambda: f64) -> Result<Self> {
        if !(lambda >= 0.0 && lambda.is_finite()) {
            return Err(Error::Validation(format!("lambda >= 0 required, got {lambda}")));
        }
        let mut p = self.clone();
        p.lambda = lambda;
        Ok(p)
    }

    pub fn n(&self) -> usize {
        self.mesh.len()
    }

    pub fn pair_kernel(&self, k: usize) -> &Kernel {
        &self.cache.pair_kernels[k]
    }

    pub fn cell_kernel(&self, k: usize) -> &Kernel {
        &self.cache.cell_kernels[k]
    }

    pub fn beta_at(&self, k: usize) -> f64 {
        self.cache.beta[k]
    }

    pub fn q_at(&self, k: usize) -> f64 {
        self.cache.q[k]
    }

    /// (q⁻, q⁺) over Ω cells.
    pub fn q_range(&self) -> (f64, f64) {
        self.mesh
            .omega_cells()
            .map(|(k, _)| self.cache.q[k])
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), q| (a.min(q), b.max(q)))
    }

    pub fn check(&self, u: &DiscreteFunction) -> Result<()> {
        self.check_values(&u.values)?;
        if !Arc::ptr_eq(u.mesh(), &self.mesh) && **u.mesh() != *self.mesh {
            return Err(invalid("function lives on a different mesh"));
        }
        Ok(())
    }

    pub fn check_values(&self, values: &[f64]) -> Result<()> {
        if values.len() != self.n() {
            return Err(Error::MeshMismatch {
                expected: self.n(),
                got: values.len(),
            });
        }
        Ok(())
    }

    // --- raw sums over nodal values -------------------------------------

    /// Σ over unordered pairs of w Φ_{ij}(|u_i − u_j| / (scale · d^s)).
    pub fn pair_modular(&self, u: &[f64], scale: f64) -> f64 {
        self.pair_modular_filtered(u, scale, |_, _| true)
    }

    pub(crate) fn pair_modular_filtered(
        &self,
        u: &[f64],
        scale: f64,
        keep: impl Fn(usize, usize) -> bool,
    ) -> f64 {
        let inv = 1.0 / scale;
        self.quad
            .pairs
            .iter()
            .zip(&self.cache.pair_kernels)
            .filter(|(p, _)| keep(p.i, p.j))
            .map(|(p, k)| {
                let d = (u[p.i] - u[p.j]).abs() * inv / p.dist_s;
                p.weight * k.big_phi(d)
            })
            .sum()
    }

    /// Σ_Ω |c| Φ̂_x(|u|/scale)
    pub fn omega_modular(&self, u: &[f64], scale: f64) -> f64 {
        self.mesh
            .omega_cells()
            .map(|(k, c)| c.measure * self.cache.cell_kernels[k].big_phi(u[k].abs() / scale))
            .sum()
    }

    /// Σ_collar |c| β Φ̂_x(|u|/scale)
    pub fn collar_modular(&self, u: &[f64], scale: f64) -> f64 {
        self.mesh
            .collar_cells()
            .map(|(k, c)| {
                let b = self.cache.beta[k];
                if b == 0.0 {
                    0.0
                } else {
                    c.measure * b * self.cache.cell_kernels[k].big_phi(u[k].abs() / scale)
                }
            })
            .sum()
    }

    /// Σ_Ω |c| F(x, u)
    pub fn reaction_integral(&self, u: &[f64]) -> f64 {
        self.mesh
            .omega_cells()
            .map(|(k, c)| c.measure * self.reaction.eval_with_q(self.cache.q[k], u[k]).1)
            .sum()
    }

    /// Per-cell nonlocal flux Σ_{j} w φ((u_k − u_j)/d^s)/d^s / |c_k| over the
    /// pairs touching k. On Ω cells this is the fractional a(x,·)-Laplacian, on
    /// collar cells the a(x,·)-Neumann operator.
    pub fn nonlocal_flux(&self, u: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.n()];
        for (p, k) in self.quad.pairs.iter().zip(&self.cache.pair_kernels) {
            let flux = p.weight * k.phi((u[p.i] - u[p.j]) / p.dist_s) / p.dist_s;
            out[p.i] += flux;
            out[p.j] -= flux;
        }
        for (v, c) in out.iter_mut().zip(&self.mesh.cells) {
            *v /= c.measure;
        }
        out
    }
}
