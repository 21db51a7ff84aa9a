//! Phase analysis and exact oracles for hypergraph colouring through the
//! halved `(q+1)`-spin system.

pub mod error;
pub mod first_moment;
pub mod hypergraph;
pub mod io;
pub mod numerics;
pub mod phi;
pub mod reductions;
pub mod scalar;
pub mod spin;
pub mod stability;
pub mod tree;

pub use error::{Error, Result};
