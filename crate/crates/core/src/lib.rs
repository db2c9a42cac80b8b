pub mod arisen;
pub mod cascade;
pub mod domains;
pub mod dosim;
pub mod equator;
pub mod error;
pub mod field;
pub mod graph;
pub mod greedy;
pub mod harness;
pub mod lp;
pub mod matroid;
pub mod multilinear;
pub mod objective;
pub mod rascal;
pub mod rng;
pub mod rounding;

pub use error::{Error, Result};
