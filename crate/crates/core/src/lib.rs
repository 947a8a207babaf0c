pub mod cli;
pub mod cone;
pub mod error;
pub mod experiments;
pub mod lattice;
pub mod level_lines;
pub mod polymer;
pub mod sos;
pub mod walk;

pub use error::{Error, Result};
