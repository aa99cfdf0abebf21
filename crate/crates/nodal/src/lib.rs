//! File formats, configuration and the command-line front end for
//! `nodal-core`.

pub mod cli;
pub mod config;
pub mod document;
pub mod error;
pub mod invariants;
pub mod io;
pub mod plot;
pub mod schema;
