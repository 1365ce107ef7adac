//! Finite-difference Green-function solvers on uniform grids.

pub mod banded;
pub mod cg;
pub mod energy;
pub mod grid;
pub mod operator;
pub mod richardson;
pub mod stress;

pub use banded::{BandInverse, BandedLdl};
pub use cg::{green_column, Solver};
pub use energy::{casimir_energy_1d, two_body_grid_1d, EnergyResult};
pub use grid::{Body, Boundary, BoundaryScheme, FdGrid, GridSpec, Shape, Stretch};
pub use operator::{build_operator, build_static_operator, SpdOperator};
pub use richardson::{richardson_extrapolate, Extrapolated};
pub use stress::{
    circle_pair_grid, pair_force_2d, richardson_force, stress_force_2d, stress_forces_2d, subtract_isolated,
    ForceResult, PairForce, StressSurface, VacuumCache,
};
