pub mod bratteli;
pub mod collapse;
pub mod cuntz;
pub mod dimension;
pub mod error;
pub mod groupoid;
pub mod json;
pub mod linalg;
pub mod periodic;
pub mod perron;
pub mod perm;
pub mod poly;
pub mod quadratic;
pub mod rigidity;
pub mod thompson;
pub mod tree;
pub mod ultrametric;

pub use error::{Error, Result};
