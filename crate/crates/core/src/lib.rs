//! Shock formation near the blowup curve of two-dimensional scalar conservation laws.
//!
//! The pipeline runs from a [`problem_model::Problem`] through the first blowup point and
//! the blowup curve ([`blowup_analysis`]), the multivalued characteristic inversion inside
//! the cusp ([`multivalued_inversion`]), the Rankine–Hugoniot front ([`shock_front`]) and
//! the resulting entropy solution ([`field_eval`]). [`reference_fv`] is an independent
//! Godunov solver used for cross-validation; [`cli_io`] wires everything to the CLI.

pub mod blowup_analysis;
pub mod char_geometry;
pub mod cli_io;
pub mod error;
pub mod field_eval;
pub mod multivalued_inversion;
pub mod numerics;
pub mod problem_model;
pub mod reference_fv;
pub mod shock_front;

pub use error::{Error, Result};
