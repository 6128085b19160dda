//! Reference quantities used to judge the expansion: built-in models,
//! characteristic functions, Fourier inversion and Monte Carlo paths.

pub mod charfn;
pub mod closed_form;
pub mod dilog;
pub mod error_metric;
pub mod inversion;
pub mod models;
pub mod pure_jump_series;
pub mod simulate;

pub use models::{BuiltinModel, ModelKind};
