//! Exact computations with filtered local systems on punctured curves and the
//! quiver representations that model them.

pub mod betti;
pub mod canonical;
pub mod error;
pub mod experiment;
pub mod filtered;
pub mod flags;
pub mod git;
pub mod invariant;
pub mod iso;
pub mod json;
pub mod matrix;
pub mod poly;
pub mod quiver;
pub mod root_datum;
pub mod sample;
pub mod scalar;
pub mod subspace;
pub mod surface;

pub use error::{Error, Result};
pub use matrix::Matrix;
pub use poly::Poly;
pub use scalar::{Fp, Rational, Scalar};
pub use subspace::Subspace;

pub type F2 = Fp<2>;
pub type F3 = Fp<3>;
pub type F5 = Fp<5>;
pub type F7 = Fp<7>;
pub type MatrixQ = Matrix<Rational>;
