//! Estimation and validation tools for the Smets-Wouters medium-scale DSGE model.

pub mod error;
pub mod cli;
pub mod data_ingest;
pub mod estimation;
pub mod experiments;
pub mod lre_solver;
pub mod seed;
pub mod state_space;
pub mod sw_model;

pub use error::{Error, ErrorClass, Result};
