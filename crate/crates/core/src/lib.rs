//! Stance classification of perspective/question pairs with a recurrent
//! network whose inputs are contextual embeddings enriched with per-token
//! sentiment or emotion labels.

pub mod affect;
pub mod corpus;
pub mod embeddings;
pub mod error;
pub mod evaluation;
pub mod explain;
pub mod network;
pub mod pipeline;
pub mod tensor;
pub mod training;

pub use error::{Error, ErrorKind, Result};
