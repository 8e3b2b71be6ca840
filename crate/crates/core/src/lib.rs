pub mod catalog;
pub mod classifier;
pub mod ctsim;
pub mod dominance;
pub mod error;
pub mod growth;
pub mod matlib;
pub mod polynorm;
pub mod sublinear;
pub mod words;

pub use error::{Error, Result};
pub use growth::MatrixFamily;
pub use matlib::Matrix;
pub use words::Word;
