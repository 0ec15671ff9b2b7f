pub mod classify;
pub mod dist;
pub mod error;
pub mod harness;
pub mod linalg;
pub mod matrix_env;
pub mod processes;
pub mod rng;
mod serde_util;
