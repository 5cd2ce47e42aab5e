//! Schema discovery for property graphs.

pub mod bench;
pub mod constraints;
pub mod dataio;
pub mod error;
pub mod featurize;
pub mod hashing;
pub mod lsh;
pub mod model;
pub mod pipeline;
pub mod schema;
pub mod serialize;

pub use error::{Error, Result};
