//! Numerics for two-dimensional Lorentz spaces on piecewise constant grid
//! functions: rearrangements, Hardy averages, Lorentz and mixed norms, weight
//! classes and embedding constants over decreasing sets.

pub mod anneal;
pub mod builtin;
pub mod classes;
pub mod embed;
mod error;
pub mod grid;
pub mod hardy;
pub mod norms;
pub mod rearrange;
pub mod staircase;
pub mod verify;
pub mod weight;

pub use error::{Error, Result};
pub use grid::{GridFunction1D, GridFunction2D};
pub use staircase::Staircase;
pub use weight::{Weight1D, Weight2D};
