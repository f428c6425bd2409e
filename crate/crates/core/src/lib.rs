//! Parameterized-circuit agents trained by episodic policy search.

pub mod analysis;
pub mod dump;
pub mod framework;
pub mod grad;
pub mod pqc;
pub mod runner;
pub mod statevec;
pub mod tasks;
pub mod trainer;
