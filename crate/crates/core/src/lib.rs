//! Periodicity-cell analysis of thin inhomogeneous elastic plates.
//!
//! A [`cell::CellSpec`] is meshed by [`mesh::generate_mesh`], the six unit
//! cell problems are solved with [`pcp::CellSystem`], and the results feed
//! [`homogenization`] (rigidities, local stress) and [`analysis`] (boundary
//! layers, representative plates, wrinkling). [`cli`] drives the same steps
//! from a JSON configuration.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod analysis;
pub mod cell;
pub mod cli;
pub mod error;
pub mod homogenization;
pub mod io;
pub mod material;
pub mod mesh;
pub mod mode;
pub mod pcp;

pub use error::{Error, Result};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/cells.md")]
    mod cells {}
    #[doc = include_str!("../../../book/src/cell-problems.md")]
    mod cell_problems {}
    #[doc = include_str!("../../../book/src/rigidities.md")]
    mod rigidities {}
    #[doc = include_str!("../../../book/src/boundary-layers.md")]
    mod boundary_layers {}
    #[doc = include_str!("../../../book/src/representatives.md")]
    mod representatives {}
    #[doc = include_str!("../../../book/src/wrinkling.md")]
    mod wrinkling {}
    #[doc = include_str!("../../../book/src/command-line.md")]
    mod command_line {}
    #[doc = include_str!("../../../docs/config.md")]
    mod config {}
    #[doc = include_str!("../../../README.md")]
    mod readme {}
}
