//! Classical and quantum Malus laws for spin systems.
//!
//! The crate is organized bottom-up: [`sphere`] provides directions and
//! quadrature, [`spin_states`] the spin-s coherent states, [`quasi_dist`] the
//! diagonal quasi-distributions, [`malus`] the transmission experiments,
//! [`path_integral`] the sliced coherent-state amplitude and
//! [`classical_limit`] the large-spin behaviour. [`cli`] drives all of them.

pub mod error;
pub mod linalg;
pub mod sphere;
pub mod spin_states;

pub use error::{MalusError, Result};
pub use sphere::{antipode, build_grid, integrate, relative_angle, Direction, QuadratureGrid};
pub use spin_states::{DensityMatrix, SpinQuantumNumber, SpinState};
pub mod quasi_dist;
pub use quasi_dist::QuasiDistribution;
pub mod classical_limit;
pub mod cli;
pub mod malus;
pub mod path_integral;
pub mod report;
