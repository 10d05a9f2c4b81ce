//! Analytical estimation and discrete-event simulation of a block-based
//! random linear coding scheme running over a finite-buffer erasure line
//! network.
//!
//! The crate has five building blocks:
//!
//! * [`pmf`] — exact finite-support probability mass functions over integer
//!   epochs (geometric generators, convolution, mixtures, moments).
//! * [`chain`] — the per-node transmit-first / receive-first Markov chains
//!   and their stationary distributions.
//! * [`estimator`] — the iterative fixed-point decomposition that produces
//!   per-node arrival rates, blocking probabilities and the throughput
//!   estimate.
//! * [`delay`] — the hop-by-hop block-delay distribution calculus built on
//!   top of a converged estimate.
//! * [`sim`] — an epoch-driven simulator of the actual protocol
//!   (per-block feedback, innovativeness counters, finite buffers) used as
//!   ground truth.

pub mod chain;
pub mod delay;
mod error;
pub mod estimator;
pub mod pmf;
pub mod sim;

pub use chain::{
    build_rfmc, build_tfmc, enumerate_states, steady_state, BufferState, NodeParams, StateSpace,
    StationaryDist, StochasticMatrix,
};
pub use delay::{
    block_delay_dist, final_hop_dist, first_packet_state_dist, last_hop_conditional,
    marginal_occupancy, service_start_dist, v_dist, waiting_time_dist, DelayOptions, DelayProfile,
    FirstPacketDist, LastHopRates,
};
pub use error::{Error, Result};
pub use estimator::{
    solve_fixed_point, FixedPointOptions, NetworkConfig, Schedule, Solution,
};
pub use pmf::Pmf;
pub use sim::{
    occupancy_distribution, run_simulation, ReplicationReport, SampleInstant, SimConfig, SimReport,
};
