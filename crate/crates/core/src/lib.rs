//! Discrete fractional Musielak–Sobolev spaces with nonlocal Neumann–Robin
//! boundary terms: modulars and Luxemburg norms, the fractional
//! a(x,·)-Laplacian and its Neumann operator, and variational solvers for
//! the associated energy.

pub mod cli;
pub mod config;
pub mod energy;
pub mod error;
pub mod family;
pub mod field;
pub mod mesh;
pub mod operators;
pub mod problem;
pub mod quad;
pub mod reaction;
pub mod sobolev;
pub mod solver;
pub mod space;

pub use error::{Error, Result};
pub use family::{FamilyKind, Kernel, MusielakFamily};
pub use field::{Point, SymmetricField};
pub use mesh::{build_mesh, pair_quadrature, DomainSpec, Mesh, PairQuadrature, Region};
pub use problem::ProblemSpec;
pub use reaction::{ReactionFamily, ReactionKind};
pub use space::DiscreteFunction;
