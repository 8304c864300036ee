//! Equilibria, degenerate-node classification and cusp unfolding for the
//! stocked Leslie-Gower predator-prey model with strong Allee effect and
//! hunting cooperation.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bifurcation;
pub mod classification;
pub mod cli;
pub mod equilibria;
pub mod error;
pub mod io;
pub mod model;
pub mod normal_form;
pub mod poly;
pub mod simulation;
pub mod verify;

pub use error::{Error, Result};
