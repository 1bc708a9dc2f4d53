//! Numerical laboratory for the quantum potential and its heat-field
//! (diffusion-wave) reading.
//!
//! * [`fields`]: uniform-grid fields and finite-difference operators
//! * [`schrodinger`]: free Gaussian packets and Crank–Nicolson evolution
//! * [`qpotential`]: Madelung decomposition, quantum potential forms, heat field audits
//! * [`dwf`]: diffusion-wave parameters, heat kernel/solver, Green function, box modes, interfaces
//! * [`bohmian`]: guidance velocities, trajectory ensembles and their audits
//! * [`scenario`]: scenario configs, stripe detection, verification suite, exports

// `!(x > 0.0)` guards are meant to reject NaN as well.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bohmian;
pub mod dwf;
mod error;
pub mod exec;
pub mod fields;
pub mod qpotential;
pub mod scenario;
pub mod schrodinger;
mod tridiag;

pub use error::{Error, Result};
pub use exec::Execution;
pub use num_complex::Complex64;
