//! Word meanings as positive semidefinite matrices, composed with completely
//! positive rules and compared with graded hyponymy measures.

pub mod cli;
pub mod compose;
pub mod error;
pub mod eval;
pub mod hyponymy;
pub mod lexicon;
pub mod linalg;
pub mod random;
pub mod synthetic;
pub mod verify;

pub use compose::{compose, CompositionRule};
pub use error::{Error, Result};
pub use hyponymy::Measure;
pub use linalg::{PsdMatrix, Tolerance};
