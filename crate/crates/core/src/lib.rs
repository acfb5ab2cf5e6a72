//! Invariant matrices of the partition algebra acting on tensor space.

pub mod cli;
pub mod construct;
pub mod diagram;
pub mod error;
pub mod gibson;
pub mod invariant;
pub mod linalg;
pub mod multi_index;
pub mod pattern;
pub mod ring;
pub mod tensor;
pub mod verify;

pub use error::{Error, Result};
