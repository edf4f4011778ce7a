pub mod cf;
pub mod dynamics;
pub mod error;
pub mod io;
pub mod psi;
pub mod serde_util;
pub mod synth;
pub mod triangle;
pub mod verify;

pub use error::{Error, Result};

/// Name of one member of a tuple.
pub type Label = String;
