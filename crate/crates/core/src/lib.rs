pub mod cli;
pub mod error;
pub mod fock;
pub mod gates;
pub mod objectives;
pub mod optimize;
pub mod param;
pub mod permanent;
pub mod transfer;

pub use error::{Error, Result};
