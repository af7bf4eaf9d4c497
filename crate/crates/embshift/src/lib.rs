//! File formats, report rendering and the command-line front end for the
//! `embshift-core` audit engine.

pub mod cli;
pub mod error;
pub mod files;
pub mod manifest;
pub mod render;
pub mod synth;

pub use error::{Error, Result};
