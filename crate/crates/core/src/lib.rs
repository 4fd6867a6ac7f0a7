//! Simulator for the two-party blocker game in which a single quantum
//! carrier, superposed over both paths, beats every classical strategy.

pub mod cli;
pub mod error;
pub mod fock;
pub mod game;
pub mod observable;
pub mod report;
pub mod scheme_one;
pub mod scheme_two;
pub mod sweep;
pub mod trials;

pub use error::{Error, Result};
