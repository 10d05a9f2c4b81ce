//! Iterative fixed-point decomposition of the line network.
//!
//! Each intermediate node is modeled in isolation by the two chains of
//! [`crate::chain`]; the coupling between nodes is reduced to two vectors,
//! the innovative arrival rates `r_1..r_h` (flowing downstream) and the
//! blocking probabilities `p_b1..p_bh` (flowing upstream). Starting from
//! `r = (1-eps_1, .., 1-eps_h)` and `p_b = 0`, the procedure alternates
//! between solving every node's stationary distributions and recomputing
//! `(r, p_b)` from them until both vectors stop moving. The throughput
//! estimate is the converged arrival rate at the destination, `r_h`.

use serde::{Deserialize, Serialize};

use crate::chain::{build_rfmc, build_tfmc, steady_state, NodeParams, StationaryDist};
use crate::error::{Error, Result};

/// A line network of `h` hops: links `1..=h` with erasure probabilities
/// `erasures[i-1]`, intermediate nodes `v_1..v_{h-1}` with
/// `buffer_blocks[i-1]` blocks of `block_size` packets each.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkConfig {
    pub erasures: Vec<f64>,
    pub buffer_blocks: Vec<usize>,
    pub block_size: usize,
}

impl NetworkConfig {
    pub fn new(erasures: Vec<f64>, buffer_blocks: Vec<usize>, block_size: usize) -> Result<Self> {
        let cfg = NetworkConfig {
            erasures,
            buffer_blocks,
            block_size,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Build from buffer sizes given in packets; each must be a positive
    /// multiple of the block size.
    pub fn from_packets(
        erasures: Vec<f64>,
        buffer_packets: Vec<usize>,
        block_size: usize,
    ) -> Result<Self> {
        if block_size < 1 {
            return Err(Error::InvalidConfig("block_size must be >= 1".into()));
        }
        let blocks = buffer_packets
            .iter()
            .map(|&m| {
                if m == 0 || m % block_size != 0 {
                    Err(Error::InvalidConfig(format!(
                        "buffer size {m} packets is not a positive multiple of K={block_size}"
                    )))
                } else {
                    Ok(m / block_size)
                }
            })
            .collect::<Result<Vec<_>>>()?;
        NetworkConfig::new(erasures, blocks, block_size)
    }

    pub fn validate(&self) -> Result<()> {
        let h = self.erasures.len();
        if h < 2 {
            return Err(Error::InvalidConfig(format!(
                "need at least 2 hops, got {h}"
            )));
        }
        if self.buffer_blocks.len() != h - 1 {
            return Err(Error::InvalidConfig(format!(
                "expected h-1 = {} buffer entries, got {}",
                h - 1,
                self.buffer_blocks.len()
            )));
        }
        for (i, &e) in self.erasures.iter().enumerate() {
            if !(0.0..=1.0).contains(&e) || e.is_nan() {
                return Err(Error::InvalidConfig(format!(
                    "erasure probability {} of link {} outside [0, 1]",
                    e,
                    i + 1
                )));
            }
        }
        if self.buffer_blocks.iter().any(|&m| m < 1) {
            return Err(Error::InvalidConfig("buffer blocks must be >= 1".into()));
        }
        if self.block_size < 1 {
            return Err(Error::InvalidConfig("block_size must be >= 1".into()));
        }
        Ok(())
    }

    /// Number of links.
    pub fn hops(&self) -> usize {
        self.erasures.len()
    }

    /// Buffer size of intermediate node `i` (1-based) in packets.
    pub fn buffer_packets(&self, node: usize) -> usize {
        self.buffer_blocks[node - 1] * self.block_size
    }
}

/// Update schedule of the fixed-point sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum Schedule {
    /// Recompute every node from the previous iterate.
    #[default]
    Jacobi,
    /// Use already-updated upstream arrival rates within the sweep;
    /// converges to the same fixed point, usually in fewer iterations.
    GaussSeidel,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FixedPointOptions {
    /// Convergence threshold on the largest change of any component.
    pub tol: f64,
    pub max_iter: usize,
    pub schedule: Schedule,
    /// Tolerance of the per-node stationary solves.
    pub stationary_tol: f64,
}

impl Default for FixedPointOptions {
    fn default() -> Self {
        FixedPointOptions {
            tol: 1e-9,
            max_iter: 10_000,
            schedule: Schedule::Jacobi,
            stationary_tol: 1e-12,
        }
    }
}

/// Converged output of the fixed-point procedure.
#[derive(Debug, Clone)]
pub struct Solution {
    pub config: NetworkConfig,
    /// Innovative arrival rates `r_1..r_h` (index 0 is `r_1 = 1 - eps_1`).
    pub arrival_rates: Vec<f64>,
    /// Blocking probabilities `p_b1..p_bh` (the last entry is always 0:
    /// the destination has no buffer constraint).
    pub blocking: Vec<f64>,
    /// Receive-first stationary distribution of each intermediate node.
    pub rf: Vec<StationaryDist>,
    /// Transmit-first stationary distribution of each intermediate node.
    pub tf: Vec<StationaryDist>,
    pub iterations: usize,
    pub residual: f64,
}

impl Solution {
    /// Throughput estimate: the innovative arrival rate at the destination.
    pub fn throughput(&self) -> f64 {
        *self.arrival_rates.last().unwrap()
    }

    /// Effective erasure of link `i` (1-based): the link erasure inflated by
    /// the blocking of the receiving node, `eps_i + p_bi * (1 - eps_i)`;
    /// the destination never blocks, so the last link keeps `eps_h`.
    pub fn effective_erasure(&self, link: usize) -> f64 {
        let h = self.config.hops();
        assert!((1..=h).contains(&link), "link {link} outside 1..={h}");
        let eps = self.config.erasures[link - 1];
        if link == h {
            eps
        } else {
            eps + self.blocking[link - 1] * (1.0 - eps)
        }
    }

    /// Receive-first distribution of intermediate node `i` (1-based).
    pub fn rf_dist(&self, node: usize) -> &StationaryDist {
        &self.rf[node - 1]
    }

    /// Transmit-first distribution of intermediate node `i` (1-based).
    pub fn tf_dist(&self, node: usize) -> &StationaryDist {
        &self.tf[node - 1]
    }
}

/// Probability that the node is full at the instant an upstream packet is
/// delivered: the total receive-first mass on occupancy `M*K`.
pub fn blocking_probability(rf: &StationaryDist) -> f64 {
    let space = rf.space();
    let cap = space.capacity();
    (0..space.block_size())
        .map(|t| rf.prob(cap, t))
        .sum()
}

/// Innovative arrival rate at the next node: the probability this node has
/// something innovative to send at a transmit instant (it does not iff its
/// state is of the form `(t, t)`), thinned by the next link's erasure.
pub fn arrival_rate_next(tf: &StationaryDist, erasure_next: f64) -> f64 {
    let space = tf.space();
    let idle: f64 = (0..space.block_size())
        .map(|t| tf.prob(t, t))
        .sum();
    (1.0 - idle) * (1.0 - erasure_next)
}

/// Run the iterative estimation with the standard initialization
/// `r_i = 1 - eps_i`, `p_b = 0`.
pub fn solve_fixed_point(config: &NetworkConfig, opts: &FixedPointOptions) -> Result<Solution> {
    let init_r: Vec<f64> = config.erasures.iter().map(|e| 1.0 - e).collect();
    let init_pb = vec![0.0; config.hops()];
    solve_fixed_point_from(config, opts, init_r, init_pb)
}

/// Same as [`solve_fixed_point`] but with explicit starting vectors. The
/// fixed point is unique; alternate starts exist to let callers verify that.
pub fn solve_fixed_point_from(
    config: &NetworkConfig,
    opts: &FixedPointOptions,
    init_r: Vec<f64>,
    init_pb: Vec<f64>,
) -> Result<Solution> {
    config.validate()?;
    let h = config.hops();
    assert_eq!(init_r.len(), h);
    assert_eq!(init_pb.len(), h);
    let k = config.block_size;

    let mut r = init_r;
    let mut pb = init_pb;
    // The boundary components are pinned by definition.
    r[0] = 1.0 - config.erasures[0];
    pb[h - 1] = 0.0;

    let mut residual_history: Vec<f64> = Vec::new();
    let mut damped = false;

    for iter in 1..=opts.max_iter {
        let mut new_r = r.clone();
        let mut new_pb = pb.clone();
        let mut new_rf = Vec::with_capacity(h - 1);
        let mut new_tf = Vec::with_capacity(h - 1);

        for node in 1..h {
            let arrival = match opts.schedule {
                Schedule::Jacobi => r[node - 1],
                // Upstream rates for already-visited nodes come from this sweep.
                Schedule::GaussSeidel => new_r[node - 1],
            };
            let params = NodeParams {
                arrival_rate: arrival,
                erasure_out: config.erasures[node],
                blocking_next: pb[node],
                m_blocks: config.buffer_blocks[node - 1],
                block_size: k,
            };
            let rf_dist = steady_state(&build_rfmc(&params)?, opts.stationary_tol)?;
            let tf_dist = steady_state(&build_tfmc(&params)?, opts.stationary_tol)?;
            new_pb[node - 1] = blocking_probability(&rf_dist).clamp(0.0, 1.0);
            new_r[node] = arrival_rate_next(&tf_dist, config.erasures[node])
                .clamp(0.0, 1.0 - config.erasures[node]);
            new_rf.push(rf_dist);
            new_tf.push(tf_dist);
        }
        new_r[0] = 1.0 - config.erasures[0];
        new_pb[h - 1] = 0.0;

        if damped {
            for i in 0..h {
                new_r[i] = 0.5 * (new_r[i] + r[i]);
                new_pb[i] = 0.5 * (new_pb[i] + pb[i]);
            }
        }

        let residual = r
            .iter()
            .zip(&new_r)
            .chain(pb.iter().zip(&new_pb))
            .map(|(a, b)| (a - b).abs())
            .fold(0.0f64, f64::max);

        r = new_r;
        pb = new_pb;

        if residual < opts.tol {
            return Ok(Solution {
                config: config.clone(),
                arrival_rates: r,
                blocking: pb,
                rf: new_rf,
                tf: new_tf,
                iterations: iter,
                residual,
            });
        }

        residual_history.push(residual);
        // Oscillation guard: no decrease across the last 50 iterations.
        if !damped && residual_history.len() >= 51 {
            let back = residual_history[residual_history.len() - 51];
            if residual >= back {
                damped = true;
            }
        }
    }

    Err(Error::NonConvergence {
        iterations: opts.max_iter,
        residual: *residual_history.last().unwrap_or(&f64::INFINITY),
        arrival_rates: r,
        blocking: pb,
    })
}
