//! Strictly balanced k-way graph partitioning with small maximum boundary cost.

pub mod check;
pub mod error;
pub mod graph;
pub mod grid;
pub mod instances;
pub mod io;
pub mod multi;
pub mod oracle;
pub mod par;
pub mod strict;

pub use error::{Error, Result};
