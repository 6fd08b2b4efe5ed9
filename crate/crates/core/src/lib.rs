//! Symmetry-adapted Assur decompositions of pinned bar-joint frameworks.
//!
//! A framework is given as a quotient gain graph over a point group. The crate
//! builds the pinned orbit rigidity matrix, orients the gain graph, condenses it
//! into components, and analyses drivers, lifts, subgroups and extensions.

#![allow(clippy::needless_range_loop)]

pub mod decompose;
pub mod drivers;
pub mod error;
pub mod extend;
pub mod fixtures;
pub mod generate;
pub mod graphs;
pub mod group;
pub mod io;
pub mod linalg;
pub mod orbit;
pub mod orient;

pub use error::{Error, Result};
