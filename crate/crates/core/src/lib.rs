pub mod cli;
pub mod coding;
pub mod dht;
pub mod error;
pub mod legendre;
pub mod optimize;
pub mod prob;
pub mod regions;
pub mod simulate;

pub use error::{Error, Result};
