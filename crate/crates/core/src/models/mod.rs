//! Concrete interaction models driven by the jump-process engine.

pub mod dense;
pub mod jc;
pub mod spin;
