pub mod bench;
pub mod coincidence;
pub mod error;
pub mod polarization;
pub mod relay;
pub mod security;
pub mod source;
pub mod tomography;

pub use error::{Error, Result};
