//! Benchmark environments.

pub mod coinflip;
pub mod games;
pub mod grover;
pub mod qft;

use thiserror::Error;

use crate::framework::FrameworkError;
use crate::grad::GradError;
use crate::pqc::PqcError;
use crate::statevec::StateError;

pub use coinflip::{Cheater, CoinFlipTask};
pub use games::{Game, GameTask};
pub use grover::GroverTask;
pub use qft::QftTask;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TaskError {
    #[error("invalid task: {0}")]
    Invalid(String),
    #[error(transparent)]
    Framework(#[from] FrameworkError),
    #[error(transparent)]
    Grad(#[from] GradError),
    #[error(transparent)]
    Pqc(#[from] PqcError),
    #[error(transparent)]
    State(#[from] StateError),
}
