pub mod error;
pub mod experiments;
pub mod lft;
pub mod linalg;
pub mod lmi;
pub mod multiplier;
pub mod analysis;
pub mod synthesis;

pub use error::{Error, Result};
