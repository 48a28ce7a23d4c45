//! Figure reproductions, config handling, and acceptance checks for the
//! `vguard` library.

pub mod config;
pub mod error;
pub mod experiment;
pub mod verify;
