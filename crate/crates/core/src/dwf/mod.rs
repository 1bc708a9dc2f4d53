//! Diffusion-wave fields: parameters, Fickian currents, heat kernel and
//! solver, Green function, box modes and two-medium interfaces.

mod box_mode;
mod green;
mod heat_solver;
mod interface;
mod params;

pub use box_mode::*;
pub use green::*;
pub use heat_solver::*;
pub use interface::*;
pub use params::*;
