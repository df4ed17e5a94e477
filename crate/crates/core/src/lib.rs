pub mod arith;
pub mod circle;
pub mod cli;
pub mod conv;
pub mod ecapp;
pub mod error;
pub mod expsum;
pub mod galois;
pub mod genfun;
pub mod instance;
pub mod phase;
pub mod sieve;
pub mod singular;

pub use error::{Error, Result};
