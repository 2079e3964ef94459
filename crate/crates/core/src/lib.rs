//! A computational laboratory for the 3x+1 function and its relatives.
//!
//! The crate is organised by subject:
//!
//! - [`bigmath`]: exact arithmetic helpers and the continued fraction of `log2 3`
//! - [`maps`]: the map-specification language and the trajectory/cycle engine
//! - [`stats`]: stopping times, verification sweeps, densities and records
//! - [`kappa`]: coefficient stopping times and their verification
//! - [`cycles`]: cycle algebra and cycle-length lower bounds
//! - [`trees`]: inverse iteration trees
//! - [`twoadic`]: truncated 2-adic conjugacy
//! - [`fractran`]: FRACTRAN and periodically-linear machines
//! - [`markov`]: Markov-chain analysis of residue-affine maps
//! - [`stochastic`]: random-walk and branching-process models
//! - [`aux`]: satellite problems (spiral permutations, Z-numbers, ...)

pub mod aux;
pub mod bigmath;
pub mod cycles;
pub mod error;
pub mod fractran;
pub mod kappa;
pub mod maps;
pub mod markov;
pub mod parity;
pub mod report;
pub mod stats;
pub mod stochastic;
pub mod trees;
pub mod twoadic;

pub use error::{Error, Result};
pub use parity::ParityVector;
