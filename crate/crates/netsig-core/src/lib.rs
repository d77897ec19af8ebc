//! Sparse, network-coherent feature selection for labeled expression data.
//!
//! The crate is `no_std` (with `alloc`): everything here is pure computation
//! over in-memory data. File formats, the command-line driver and the thread
//! pool live in the `netsig` crate.
#![no_std]

extern crate alloc;
#[cfg(any(test, feature = "std"))]
extern crate std;

pub mod error;
pub mod evaluation;
pub mod exec;
pub mod graph_lasso;
pub mod lasso;
pub mod logistic;
pub mod matrix;
pub mod model;
pub mod preprocess;
pub mod seed;
pub mod stability;
pub mod synthetic;

pub use error::{Error, Result};
pub use exec::{Executor, Sequential};
pub use matrix::Matrix;
