//! Closed-form transition density expansions for one-dimensional SDEs driven
//! by a Brownian motion and a gamma process.

mod accumulate;
pub mod benchmark;
pub mod conditioning;
pub mod density;
pub mod error;
pub mod expansion;
pub mod ito_algebra;
pub mod pathwise;
pub mod quadrature;
pub mod special;
pub mod validation;

pub use error::{Error, Result};
