//! Discrete Malliavin–Stein calculus for functionals of Rademacher sequences.

pub mod chaos;
pub mod contraction;
pub mod engine;
pub mod gen;
pub mod io;
pub mod error;
pub mod kernel;
pub mod malliavin;
pub mod scalar;
pub mod sparse;
pub mod stein;
pub mod testfn;
pub mod verify;

pub use error::{Error, Result};
pub use kernel::{make_symmetric_kernel, GeneralKernel, IndexTuple, SymmetricKernel};
pub use scalar::{Rational, Scalar};
pub use testfn::TestFunction;
