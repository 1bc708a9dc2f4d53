//! Wavefunctions: closed-form free Gaussian packets, superpositions and
//! Crank–Nicolson evolution in external potentials.

mod adi;
mod constants;
mod crank_nicolson;
mod packet;
mod potential;

pub use adi::AdiSolver;
pub use constants::PhysicalConstants;
pub use crank_nicolson::{crank_nicolson_evolve, CrankNicolson};
pub use packet::{gaussian_packet, superpose, PacketState, WavePacketSpec};
pub use potential::PotentialSpec;
