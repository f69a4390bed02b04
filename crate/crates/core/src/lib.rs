pub mod adaboost;
pub mod bench;
pub mod data;
pub mod error;
pub mod margins;
pub mod matrix;
pub mod pipeline;
pub mod svm;
mod rng;

pub use error::{Error, Result};
