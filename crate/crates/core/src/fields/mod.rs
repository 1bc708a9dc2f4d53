//! Uniform-grid scalar fields and finite-difference operators.

mod field;
mod grid;
pub mod io;
mod ops;

pub use field::{ComplexField, Field, FieldMeta, FieldStack, RealField, Sample};
pub use grid::{Axis, Grid, MIN_POINTS};
pub use ops::{
    divergence, gradient, laplacian, partial, phase_gradient, phase_slips, second_partial, time_derivative,
    DEFAULT_BOUNDARY_MARGIN,
};
