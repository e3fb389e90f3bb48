pub mod backend;
pub mod codes;
pub mod css;
pub mod error;
pub mod gf2;
pub mod harness;
pub mod ghz;
pub mod pauli;
pub mod protocols;

pub use error::{Error, Result};
