pub mod coverage;
pub mod error;
pub mod density;
pub mod geometry;
pub mod numerics;
pub mod simulate;

pub use error::{Error, Result};
