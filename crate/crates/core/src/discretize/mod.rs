//! Discrete domains, fields, quadrature and level-set machinery.

pub mod contour;
pub mod grid;
pub mod io;
pub mod levels;
pub mod operators;
pub mod radial;
pub mod spline;
pub mod topology;

pub use contour::Contour;
pub use grid::{Grid2D, ScalarField2D, Shape};
pub use levels::{
    build_profile, contour_integrals, level_topology, superlevel_mass, weighted_mass, LevelField,
    LevelProfile, LevelQuery, LevelRecord,
};
pub use operators::LaplacianSample;
pub use radial::{RadialField, RadialMesh, Tail};
pub use topology::Topology;
