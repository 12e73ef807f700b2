//! Structured grids over Ω plus a truncated exterior collar, and the
//! symmetric pair quadrature for the measure |x − y|^{-N} dx dy on
//! ℝ^{2N} ∖ (ℝ^N∖Ω)².

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::field::{distance, Point};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Region {
    Omega,
    Collar,
}

impl Region {
    pub fn as_str(self) -> &'static str {
        match self {
            Region::Omega => "omega",
            Region::Collar => "collar",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OmegaShape {
    Interval([f64; 2]),
    /// `[[x0, x1], [y0, y1]]`
    Rectangle([[f64; 2]; 2]),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DomainSpec {
    pub omega: OmegaShape,
    pub collar_width: f64,
    pub mesh_size: f64,
}

impl DomainSpec {
    pub fn interval(a: f64, b: f64, mesh_size: f64, collar_width: f64) -> Self {
        Self {
            omega: OmegaShape::Interval([a, b]),
            collar_width,
            mesh_size,
        }
    }

    pub fn rectangle(xs: [f64; 2], ys: [f64; 2], mesh_size: f64, collar_width: f64) -> Self {
        Self {
            omega: OmegaShape::Rectangle([xs, ys]),
            collar_width,
            mesh_size,
        }
    }

    pub fn dim(&self) -> usize {
        match self.omega {
            OmegaShape::Interval(_) => 1,
            OmegaShape::Rectangle(_) => 2,
        }
    }

    fn sides(&self) -> Vec<[f64; 2]> {
        match self.omega {
            OmegaShape::Interval(s) => vec![s],
            OmegaShape::Rectangle([sx, sy]) => vec![sx, sy],
        }
    }

    /// Checks the invariants and returns the cell count per side of Ω and the
    /// collar thickness in cells.
    fn validate(&self) -> Result<(Vec<usize>, usize)> {
        let h = self.mesh_size;
        if !(h > 0.0 && h.is_finite()) {
            return Err(invalid(format!("mesh size must be positive, got {h}")));
        }
        let mut counts = Vec::new();
        for [a, b] in self.sides() {
            let len = b - a;
            if !(len > 0.0) {
                return Err(invalid(format!("empty side [{a}, {b}]")));
            }
            if !(h < len) {
                return Err(invalid(format!("mesh size {h} must be below side length {len}")));
            }
            let n = len / h;
            let rounded = n.round();
            if (n - rounded).abs() > 1e-9 * n.max(1.0) {
                return Err(invalid(format!(
                    "mesh size {h} is incommensurate with side length {len} (ratio {n})"
                )));
            }
            counts.push(rounded as usize);
        }
        let r = self.collar_width;
        if !(r >= h * (1.0 - 1e-12)) {
            return Err(invalid(format!("collar width {r} must be >= mesh size {h}")));
        }
        let layers = (r / h - 1e-9).ceil().max(1.0) as usize;
        Ok((counts, layers))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Cell {
    pub center: Point,
    pub measure: f64,
    pub region: Region,
}

/// Uniform grid of cells over the box Ω ⊕ collar. Each cell carries one
/// degree of freedom located at its center ("node").
#[derive(Debug, Clone, PartialEq)]
pub struct Mesh {
    pub dim: usize,
    pub h: f64,
    pub cells: Vec<Cell>,
    /// Cells per axis of the full box.
    pub shape: [usize; 2],
    /// Center of cell (0, 0).
    pub origin: Point,
    pub omega_measure: f64,
    pub collar_measure: f64,
}

impl Mesh {
    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn nodes(&self) -> impl Iterator<Item = &Point> {
        self.cells.iter().map(|c| &c.center)
    }

    pub fn omega_cells(&self) -> impl Iterator<Item = (usize, &Cell)> {
        self.cells.iter().enumerate().filter(|(_, c)| c.region == Region::Omega)
    }

    pub fn collar_cells(&self) -> impl Iterator<Item = (usize, &Cell)> {
        self.cells.iter().enumerate().filter(|(_, c)| c.region == Region::Collar)
    }

    pub fn count(&self, region: Region) -> usize {
        self.cells.iter().filter(|c| c.region == region).count()
    }

    /// Bounding box (lower corner, upper corner) of Ω.
    pub fn omega_box(&self) -> (Point, Point) {
        let mut lo = [f64::INFINITY; 2];
        let mut hi = [f64::NEG_INFINITY; 2];
        for (_, c) in self.omega_cells() {
            for k in 0..self.dim {
                lo[k] = lo[k].min(c.center[k] - 0.5 * self.h);
                hi[k] = hi[k].max(c.center[k] + 0.5 * self.h);
            }
        }
        if self.dim == 1 {
            lo[1] = 0.0;
            hi[1] = 0.0;
        }
        (lo, hi)
    }

    /// Writes `cell_id,x,[y,]measure,region` rows.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        if self.dim == 1 {
            writeln!(w, "cell_id,x,measure,region")?;
        } else {
            writeln!(w, "cell_id,x,y,measure,region")?;
        }
        for (i, c) in self.cells.iter().enumerate() {
            if self.dim == 1 {
                writeln!(w, "{i},{:e},{:e},{}", c.center[0], c.measure, c.region.as_str())?;
            } else {
                writeln!(
                    w,
                    "{i},{:e},{:e},{:e},{}",
                    c.center[0],
                    c.center[1],
                    c.measure,
                    c.region.as_str()
                )?;
            }
        }
        Ok(())
    }
}

pub fn build_mesh(spec: &DomainSpec) -> Result<Mesh> {
    let (counts, layers) = spec.validate()?;
    let h = spec.mesh_size;
    let dim = spec.dim();
    let sides = spec.sides();
    let measure = h.powi(dim as i32);

    let mut shape = [1usize; 2];
    let mut origin = [0.0; 2];
    for k in 0..dim {
        shape[k] = counts[k] + 2 * layers;
        origin[k] = sides[k][0] - (layers as f64 - 0.5) * h;
    }
    let inside = |idx: usize, k: usize| idx >= layers && idx < layers + counts[k];

    let mut cells = Vec::with_capacity(shape[0] * shape[1]);
    for iy in 0..shape[1] {
        for ix in 0..shape[0] {
            let mut center = [origin[0] + ix as f64 * h, 0.0];
            let mut in_omega = inside(ix, 0);
            if dim == 2 {
                center[1] = origin[1] + iy as f64 * h;
                in_omega &= inside(iy, 1);
            }
            cells.push(Cell {
                center,
                measure,
                region: if in_omega { Region::Omega } else { Region::Collar },
            });
        }
    }
    let n_omega: usize = counts.iter().product();
    let omega_measure = sides.iter().map(|[a, b]| b - a).product();
    let n_collar = cells.len() - n_omega;
    Ok(Mesh {
        dim,
        h,
        cells,
        shape,
        origin,
        omega_measure,
        collar_measure: n_collar as f64 * measure,
    })
}

/// One unordered pair of distinct cells.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pair {
    pub i: usize,
    pub j: usize,
    /// |c_i||c_j| / |x_i − x_j|^N: the mass of the ordered pair under dμ.
    pub weight: f64,
    /// |x_i − x_j|^s
    pub dist_s: f64,
}

/// Midpoint quadrature of ∫∫_{ℝ^{2N}∖(CΩ)²} G(x,y) dμ: every unordered pair
/// {i, j} with at least one Ω cell appears once, sorted by (i, j).
#[derive(Debug, Clone)]
pub struct PairQuadrature {
    pub s: f64,
    pub pairs: Vec<Pair>,
    /// `neighbors[k]` lists indices into `pairs` touching cell k.
    pub neighbors: Vec<Vec<usize>>,
}

impl PairQuadrature {
    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    /// Weight of the pair {i, j}, in either order.
    pub fn weight(&self, i: usize, j: usize) -> Option<f64> {
        let (a, b) = if i < j { (i, j) } else { (j, i) };
        self.neighbors
            .get(a)?
            .iter()
            .map(|&k| &self.pairs[k])
            .find(|p| p.i == a && p.j == b)
            .map(|p| p.weight)
    }
}

pub fn pair_quadrature(mesh: &Mesh, s: f64) -> Result<PairQuadrature> {
    if !(s > 0.0 && s < 1.0) {
        return Err(invalid(format!("s must lie in (0,1), got {s}")));
    }
    let n = mesh.len();
    let dim = mesh.dim as i32;
    let mut pairs = Vec::new();
    let mut neighbors = vec![Vec::new(); n];
    for i in 0..n {
        let ci = &mesh.cells[i];
        for j in (i + 1)..n {
            let cj = &mesh.cells[j];
            if ci.region == Region::Collar && cj.region == Region::Collar {
                continue;
            }
            let d = distance(&ci.center, &cj.center);
            let k = pairs.len();
            pairs.push(Pair {
                i,
                j,
                weight: ci.measure * cj.measure / d.powi(dim),
                dist_s: d.powf(s),
            });
            neighbors[i].push(k);
            neighbors[j].push(k);
        }
    }
    Ok(PairQuadrature { s, pairs, neighbors })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_dimensional_counts() {
        let m = build_mesh(&DomainSpec::interval(0.0, 1.0, 0.125, 0.5)).unwrap();
        assert_eq!(m.count(Region::Omega), 8);
        assert_eq!(m.count(Region::Collar), 8);
        assert_eq!(m.nodes().count(), 16);
        let omega: f64 = m.omega_cells().map(|(_, c)| c.measure).sum();
        assert_eq!(omega, 1.0);
        assert_eq!(m.omega_box(), ([0.0, 0.0], [1.0, 0.0]));
    }

    #[test]
    fn two_dimensional_ring() {
        let m = build_mesh(&DomainSpec::rectangle([0.0, 1.0], [0.0, 1.0], 0.25, 0.25)).unwrap();
        assert_eq!(m.count(Region::Omega), 16);
        assert_eq!(m.count(Region::Collar), 20);
        assert_eq!(m.omega_measure, 1.0);
    }

    #[test]
    fn incommensurate_and_bad_sizes() {
        assert!(build_mesh(&DomainSpec::interval(0.0, 1.0, 0.3, 0.5)).is_err());
        assert!(build_mesh(&DomainSpec::interval(0.0, 1.0, 1.0, 1.0)).is_err());
        assert!(build_mesh(&DomainSpec::interval(0.0, 1.0, 0.25, 0.1)).is_err());
    }

    #[test]
    fn pair_counts_and_symmetry() {
        let m = build_mesh(&DomainSpec::interval(0.0, 1.0, 0.125, 0.5)).unwrap();
        let q = pair_quadrature(&m, 0.3).unwrap();
        let (total, c) = (m.len(), m.count(Region::Collar));
        assert_eq!(q.len(), total * (total - 1) / 2 - c * (c - 1) / 2);
        for p in &q.pairs {
            assert!(p.weight > 0.0);
            assert_eq!(q.weight(p.j, p.i), Some(p.weight));
            assert!(!(m.cells[p.i].region == Region::Collar && m.cells[p.j].region == Region::Collar));
        }
        assert!(pair_quadrature(&m, 1.0).is_err());
        assert!(pair_quadrature(&m, 0.0).is_err());
    }

    #[test]
    fn two_cell_weight() {
        let m = build_mesh(&DomainSpec::interval(0.0, 1.0, 0.5, 0.5)).unwrap();
        let q = pair_quadrature(&m, 0.5).unwrap();
        // the two Ω cells are 1 and 2, centers 0.25 and 0.75
        assert_eq!(m.cells[1].center[0], 0.25);
        assert_eq!(q.weight(1, 2), Some(0.5));
    }

    #[test]
    fn csv_dump() {
        let m = build_mesh(&DomainSpec::interval(0.0, 1.0, 0.5, 0.5)).unwrap();
        let mut buf = Vec::new();
        m.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 5);
        assert!(text.starts_with("cell_id,x,measure,region\n0,-2.5e-1,5e-1,collar"));
    }
}
