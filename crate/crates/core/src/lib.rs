//! Thermodynamic objects for renewal-type potentials on the binary shift:
//! pressure, eigenfunction data of the transfer operator, Gibbs cylinder
//! measures, and their zero-temperature limits (maximizing constant,
//! calibrated subaction, measure selection, cylinder decay rates).

pub mod builtin;
pub mod cli;
mod dd;
pub mod eigen;
pub mod error;
pub mod gibbs;
pub mod numerics;
pub mod oracle;
pub mod potential;
pub mod pressure;
pub mod report;
pub mod zerotemp;

pub use error::{Error, Result};
