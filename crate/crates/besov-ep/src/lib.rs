//! Numerical harmonic analysis for the Euler-Poincare equations on periodic
//! boxes: Littlewood-Paley decompositions, Besov norms, oscillatory
//! wave-packet data, the nonlocal velocity-form right-hand side, and a suite
//! of quantitative experiments probing the failure of Hoelder continuity of
//! the data-to-solution map in Besov spaces.

pub mod config;
pub mod dynamics;
pub mod error;
pub mod estimates;
pub mod exec;
pub mod field;
pub mod grid;
pub mod harness;
pub mod io;
pub mod lp;
pub mod profile;
pub mod step;
pub mod synth;

pub use error::{Error, Result};
pub use field::{SpectralField, VectorField};
pub use grid::{make_grid, Grid};
