//! Guidance velocities, trajectory ensembles and their audits.

mod audit;
mod integrate;
pub mod io;
mod seeding;
mod velocity;

pub use audit::*;
pub use integrate::*;
pub use seeding::*;
pub use velocity::*;
