pub mod baselines;
pub mod cli;
pub mod error;
pub mod harness;
pub mod numeric;
pub mod ranker;
pub mod rankstats;
pub mod rng;
pub mod roc;
pub mod sample;
pub mod synthdata;
pub mod twostage;

pub use error::{Error, Result};
