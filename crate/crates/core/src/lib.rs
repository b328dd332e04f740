//! Exact solvers for picker routing in rectangular warehouses.

pub mod bench;
pub mod dp;
pub mod graph;
pub mod instance_io;
pub mod milp;
pub mod oracle;
pub mod preprocess;
pub mod render;
pub mod tour;
pub mod warehouse;

#[doc(hidden)]
pub mod testing;
