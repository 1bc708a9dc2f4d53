//! Madelung decomposition, quantum potential forms and heat-field audits.

mod forms;
mod heat;
mod hj;
mod madelung;

pub use forms::*;
pub use heat::*;
pub use hj::*;
pub use madelung::*;
