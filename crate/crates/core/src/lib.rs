//! Exact counts and rigorous bounds for connective constants of restricted
//! lattice walks and growth constants of restricted lattice manifolds.

pub mod automata;
pub mod enumeration;
pub mod error;
pub mod lattice;
pub mod manifolds;
pub mod polyalg;
pub mod twig;
pub mod walk_rules;

pub use error::{Error, Result};
