//! R-matrices with an extra deformation parameter `x` for a centrally extended
//! quantum affine superalgebra of type sl(2|2), together with checkers for
//! every identity they are expected to satisfy.

pub mod cartan;
pub mod dump;
pub mod dynamical;
pub mod error;
pub mod fusion;
pub mod hecke;
pub mod linalg;
pub mod params;
pub mod perm;
pub mod poly;
pub mod rbox;
pub mod rep;
pub mod report;
pub mod scalar;
pub mod suite;

pub use error::{Error, Result};
pub use linalg::{Operator, SubspaceBasis};
pub use params::{sample_params, ParamSet, Point};
pub use poly::{Poly, RatFunc, Var};
pub use scalar::{AnyScalar, Backend, QParam, Residual, Scalar};
