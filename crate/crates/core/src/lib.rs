//! Semi-active suspension simulation lab.

pub mod cli;
pub mod config;
pub mod dynamics;
pub mod error;
pub mod fuzzy;
pub mod manifest;
pub mod optim;
pub mod pid;
pub mod plot;
pub mod road;
pub mod sim;

pub use error::{Error, Result};
