//! Numerical toolkit for standard and multi-mode Holstein models and their
//! superconducting analog simulators.
//!
//! Energies are ordinary frequencies in GHz and times are in ns, so a state
//! evolves as `exp(-2πi H t)`. The pipeline runs
//! load → rescale → chain transform → compile → feasibility → simulate, with a
//! separate HEOM memory estimator for the classical feasibility frontier.

pub mod bath;
pub mod circuit;
pub mod dynamics;
pub mod error;
pub mod hamiltonian;
pub mod model;
pub mod operator;
pub mod resources;
pub mod spectral;
pub mod units;

#[doc(hidden)]
pub mod cli;

pub use error::{Error, Result};
pub use model::{GeneralizedHolsteinModel, HolsteinModel, Mode};
pub use operator::{BasisDescriptor, Sector, SparseOperator, TruncationSpec};
