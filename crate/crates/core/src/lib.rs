//! Central values of quadratic twists of level-one modular L-functions,
//! the constants of their first-moment asymptotics, and the identity
//! checks behind them.

pub mod analysis;
pub mod cli;
pub mod config;
pub mod arith;
pub mod eigenform;
pub mod error;
pub mod euler;
pub mod gauss;
pub mod lfun;
pub mod moment;

pub use error::{Error, Result};
