pub mod boolean_core;
pub mod error;
pub mod extension;
pub mod fixtures;
pub mod horn_tarski;
pub mod lp;
pub mod polytope;
pub mod ppt;
pub mod quantum;
pub mod quotient;
pub mod scalar;

pub use error::{Error, Result};
pub use scalar::{Rational, Scalar};
