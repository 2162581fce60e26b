//! Writer-independent offline signature verification in dissimilarity space
//! with binary particle swarm wrapper feature selection and three strategies
//! for controlling overfitting of the selected subset.

pub mod bpso;
pub mod dichotomy;
pub mod domain;
pub mod error;
pub mod harness;
pub mod metrics;
pub mod prototype;
pub mod seeding;
pub mod svm;
pub mod synthetic;

pub use error::{Error, Result};
