//! Numerical laboratory for mean field and Liouville equations on discs and
//! annuli, with executable checks of Bol-type isoperimetric inequalities,
//! bubble rearrangements and the comparison argument behind uniqueness for
//! total mass up to 8π.

pub mod bol;
pub mod bubble;
pub mod discretize;
pub mod error;
pub mod harness;
pub mod rearrange;
pub mod solver;

pub use error::{Error, Result};
