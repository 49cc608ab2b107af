//! Rational homotopy computations for minimal Sullivan models.

pub mod cli;
pub mod cohomology;
pub mod dsl;
pub mod ellipticity;
pub mod error;
pub mod fibration;
pub mod gca;
pub mod linalg;
pub mod pipeline;

pub use error::{Error, Result};
