pub mod applications;
pub mod canonical;
pub mod ceremony;
pub mod cli;
pub mod coercion;
pub mod crypto;
pub mod error;
pub mod federation;
pub mod sybilsim;

pub use error::{Error, Result};
