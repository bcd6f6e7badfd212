//! Lagrangian-dual solvers for constrained binary quadratic programs.
//!
//! The library is organised bottom-up:
//!
//! * [`model`]: matrices, bit vectors, quadratic and polynomial functions,
//!   constrained problems and stable set instances.
//! * [`transform`]: symmetrization, constraint merging, degree reduction and
//!   the QUBO/Ising correspondence.
//! * [`oracle`]: exact, simulated annealing and simulated quantum annealing
//!   QUBO solvers behind one trait.
//! * [`penalty`]: penalty coefficients that make the penalized problem exact.
//! * [`dual`]: the subgradient method and the stable set multiplier schemes.
//! * [`bench`]: instance generation, reference optima, sweeps and tables.

pub mod bench;
pub mod dual;
pub mod error;
pub mod io;
pub mod model;
pub mod oracle;
pub mod penalty;
pub mod transform;

pub use error::{Error, Result};
