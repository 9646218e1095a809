//! Principal angles, distances and equiangular families on real Grassmannians,
//! with executable certificates for the polynomial upper bound and exact
//! closed-form bound tables.

pub mod cli;
pub mod constructions;
pub mod distances;
pub mod error;
pub mod grassmann;
pub mod io;
pub mod linalg;
pub mod optimizer;
pub mod verification;

pub use constructions::{LineSet, SubspaceFamily};
pub use distances::Metric;
pub use error::{Error, Result};
pub use grassmann::{AngleSpectrum, Subspace};
pub use linalg::{Matrix, TolerancePolicy};
