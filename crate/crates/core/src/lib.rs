pub mod error;
pub mod gf2;
pub mod infoprofile;

pub use error::{Error, Result};
pub mod sources;
pub mod hashext;
pub mod reconcile;
pub mod rateregion;
pub mod channel;
pub mod harness;
pub mod protocols;
pub mod audit;
