//! Landscape (torsion) functions of Schrödinger operators `-Δ + V` and the
//! eigenvalue bounds expressed through the effective potential `1/u_M - M`.
//!
//! The crate works on uniform, Dirichlet-truncated grids in one dimension and
//! on radial grids in three dimensions. Eigenvalues are counted exactly by
//! matrix inertia, landscapes are obtained by direct tridiagonal solves, and
//! every bound is checked against counts produced independently.

pub mod analytic;
pub mod bounds;
pub mod error;
pub mod grid;
pub mod groundstate;
pub mod landscape;
pub mod potentials;
pub mod radial3d;
pub mod report;
pub mod scenario;
pub mod spectral;

pub use error::{Error, Result};
pub use grid::{box_partition, build_grid, BoxPartition, Domain, Grid};
pub use landscape::{harnack_constants, solve_landscape, HarnackDiagnostics, LandscapeField};
pub use potentials::{sample_potential, PotentialField, PotentialSpec};
pub use radial3d::RadialGrid;
pub use spectral::{assemble, count_below, spectrum_below, CountingCurve, DiscreteOperator};
