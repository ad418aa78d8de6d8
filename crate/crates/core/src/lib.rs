//! Monte Carlo treatment of composite quantum dynamics through pairs of
//! stochastic product states evolving under a piecewise deterministic jump
//! process, with built-in bosonic-decay and spin-bath models, ensemble
//! estimators, and dense reference integrators.

pub mod ensemble;
pub mod estimators;
pub mod linalg;
pub mod models;
pub mod oracles;
pub mod pdp;
pub mod rng;
pub mod state;

pub use linalg::C64;
pub use pdp::{
    evolve_branch, evolve_branch_constant_rate, evolve_pair, sample_waiting_time, select_channel,
    BranchRecord, BranchSample, EnvState, JumpEvent, PdpError, PdpModel, TrajectoryRecord,
    WaitingTime,
};
pub use rng::{RngStream, TrajectoryRngs};
pub use state::{
    decompose_density, inner_product, DecomposeOptions, ProductPair, StateError, StateVector,
    WeightedPair,
};
