pub mod channels;
pub mod circuit;
pub mod error;
pub mod games;
pub mod linalg;
pub mod protocols;
pub mod random;
pub mod reductions;
pub mod sampling;
pub mod seesaw;
pub mod strategies;
pub mod tomography;

pub use error::{Error, Result};
