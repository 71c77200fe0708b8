//! Simulation and numerical verification toolkit for Markov additive
//! processes (MAPs), Markov-modulated generalized Ornstein-Uhlenbeck
//! processes, their exponential functionals and stationary laws, and a
//! regime-switching risk model with stochastic investment.
//!
//! The crate is organised around exact event-driven simulation: chain
//! transitions and compound-Poisson epochs are grid points, so every jump
//! identity of the underlying stochastic calculus holds to rounding
//! accuracy on simulated paths, and only integrals against Brownian
//! segments carry O(h) quadrature error in the micro step h.

pub mod calc;
pub mod chain;
pub mod dist;
pub mod error;
pub mod expfun;
pub mod gou;
pub mod map;
pub mod numeric;
pub mod path;
pub mod risk;
pub mod rng;
pub mod simulate;
pub mod sojourn;
pub mod stats;

pub use chain::{simulate_chain, stationary_law, ChainPath, ChainSpec, InitialLaw};
pub use dist::{BivariateSpec, DistributionSpec, JumpLaw, SupportTag};
pub use error::{Error, Result};
pub use map::{CovariationSpec, LevyComponentSpec, MapSpec, TransitionJumpSpec};
pub use path::{MarkKind, SamplePath};
pub use simulate::{simulate_map_path, simulate_map_path_indexed};
