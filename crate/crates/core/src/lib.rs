//! Collaborative fixed-budget best-arm identification for stochastic linear
//! bandits.
//!
//! Agents pull arms of a shared linear bandit and ship their least-squares
//! statistics to a coordinator, which allocates pulls with an approximate
//! G-optimal design and halves the active arm set every round. Star networks
//! use a single coordinator; arbitrary networks are split into star blocks by
//! a dominating-set partition, and the blocks' answers are combined by vote.
//!
//! The numeric core is generic over [`Scalar`] (`f32` or `f64`); the aliases
//! below fix it to `f64`, which is what the CLI and experiments use.

pub mod algorithms;
pub mod bandit;
pub mod design;
pub mod error;
pub mod experiments;
pub mod linalg;
pub mod scalar;
pub mod topology;

pub use error::{Error, Result};
pub use scalar::Scalar;

pub type Instance = bandit::LinearBanditInstance<f64>;
pub type Instance32 = bandit::LinearBanditInstance<f32>;
pub type Design = design::DesignWeights<f64>;
pub type Matrix = linalg::SymMatrix<f64>;
pub type Basis = linalg::ProjectionBasis<f64>;
pub type Outcome = algorithms::RunOutcome<f64>;
pub type Trace = algorithms::RoundTrace<f64>;
pub type Agent = algorithms::AgentState<f64>;
pub type Server = algorithms::ServerState<f64>;
