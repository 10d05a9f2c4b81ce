use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("degenerate geometric (infinite mean)")]
    DegenerateGeometric,

    #[error("mixture weights sum to {sum} (must be 1 within {tol})")]
    WeightSum { sum: f64, tol: f64 },

    #[error("mixture weights and components differ in length ({weights} vs {pmfs})")]
    MixLength { weights: usize, pmfs: usize },

    #[error("empty PMF has no moments")]
    EmptyPmf,

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("stationary solve failed: residual {residual:.3e} after {iterations} power iterations")]
    StationarySolve { residual: f64, iterations: usize },

    #[error(
        "fixed point did not converge: residual {residual:.3e} after {iterations} iterations"
    )]
    NonConvergence {
        iterations: usize,
        residual: f64,
        arrival_rates: Vec<f64>,
        blocking: Vec<f64>,
    },

    #[error("first-packet conditioning impossible (no mass on multiple-of-K occupancies)")]
    FirstPacketConditioning,

    #[error("occupancy {s} is not a multiple of the block size {block_size}")]
    NotBlockAligned { s: usize, block_size: usize },

    #[error("no progress possible (both arrival and departure rates are zero)")]
    NoProgress,

    #[error("pending arrivals {x} exceed pending departures {y}")]
    PendingExceedsTotal { x: usize, y: usize },

    #[error("unknown node index {node} (intermediate nodes are 1..={max})")]
    UnknownNode { node: usize, max: usize },
}
