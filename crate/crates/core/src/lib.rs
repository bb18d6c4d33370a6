pub mod cli;
pub mod error;
pub mod jlm;
pub mod newton;
pub mod output;
pub mod phase_plane;
pub mod poly;
pub mod quadrature;
pub mod roots;
pub mod series;
pub mod spe;
pub mod variational;

pub use error::{Error, Result};
