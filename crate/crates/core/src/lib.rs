//! Borel-Laplace summation for quasilinear evolution PDEs in sectors.
//!
//! The pipeline: describe a problem ([`problem`], [`specfile`]), reduce it to
//! normal form ([`normalize`]), solve the Borel-plane convolution equation by
//! Picard iteration ([`solver`]) on ray grids ([`grid`]), and resum with a
//! directional Laplace transform ([`transforms`]). [`oracle`] is an independent
//! method-of-lines integrator used for cross-checks and [`harry_dym`] holds the
//! modified Harry-Dym case study.

pub mod cheb;
pub mod error;
pub mod formal;
pub mod grid;
pub mod harry_dym;
pub mod inequalities;
pub mod normalize;
pub mod oracle;
pub mod problem;
pub mod quad;
pub mod series;
pub mod solver;
pub mod special;
pub mod specfile;
pub mod transforms;

pub use error::{BorelError, Result};
pub use num_complex::Complex64;
pub use num_rational::Rational64;
