//! Constructive bound calculus for feed-forward networks.
//!
//! The crate is organised around the parameter-to-function map of a fully
//! connected network with a Lipschitz activation:
//!
//! - [`network`]: architectures, canonical parameter layout, grid evaluation.
//! - [`activation`]: scalar activations with declared Lipschitz data.
//! - [`lipschitz`]: the certified Lipschitz constant of the parameter map and
//!   an empirical harness that tries to break it.
//! - [`entropy`]: entropy numbers of finite point clouds (exact and greedy).
//! - [`bounds`]: entropy-to-width transfer and approximation-error lower
//!   bounds as rate values (absolute constants fixed to 1).
//! - [`approx`]: derivative-free estimation of the best approximation error
//!   on a grid.
//!
//! Everything is deterministic given a seed; random draws go through
//! [`rng::stream`], so draw `i` depends only on `(seed, i)`.

pub mod activation;
pub mod approx;
pub mod bounds;
pub mod entropy;
mod error;
pub mod lipschitz;
pub mod network;
pub mod rng;

pub use activation::{Activation, Nonlinearity};
pub use error::{Error, Result};
pub use network::{param_count, Architecture, Grid, ParamVector};
