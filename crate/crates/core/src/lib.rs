pub mod cli;
pub mod correspond;
pub mod error;
pub mod lm;
pub mod numeric;
pub mod poly;
pub mod reconstruct;
pub mod report;
pub mod sampling;
pub mod scene;
pub mod tensor;
pub mod twist;

pub use error::{Error, Result};
