//! Epoch-driven simulation of the block-coded transfer protocol.
//!
//! Every node serves its oldest buffered block, transmitting a random
//! combination of that block's stored packets each epoch. Innovativeness is
//! tracked exactly through the counter pair carried by the protocol: each
//! packet carries CMB (how many innovative packets were combined into it)
//! and each receiver keeps INV per incoming block, incrementing it only
//! when CMB > INV. When INV reaches the block size the receiver
//! acknowledges and the sender frees the whole block. Under a large coding
//! field this bookkeeping is equivalent to actual random linear combining,
//! so no finite-field arithmetic is simulated.
//!
//! Within an epoch all transmissions are decided from start-of-epoch state
//! and the links are then resolved from the destination side back to the
//! source, so an acknowledgment frees buffer space before the same epoch's
//! upstream delivery is admitted. Each node's post-transmit and
//! post-receive states are both recorded, matching the two sampling
//! instants of the analytical chains.

use std::collections::{BTreeMap, VecDeque};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::chain::StateSpace;
use crate::error::{Error, Result};
use crate::estimator::NetworkConfig;

const RNG_ALGORITHM: &str = "chacha8-per-link-stream";

fn default_warmup() -> u64 {
    200
}
fn default_replications() -> usize {
    1
}
fn default_record_samples() -> bool {
    true
}

/// Simulation horizon and measurement settings.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SimConfig {
    /// Number of epochs per replication.
    pub epochs: u64,
    /// Blocks whose delay samples are discarded as warmup.
    #[serde(default = "default_warmup")]
    pub warmup_blocks: u64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_replications")]
    pub replications: usize,
    /// Keep per-block delay samples (needed for CSV export).
    #[serde(default = "default_record_samples")]
    pub record_samples: bool,
}

impl SimConfig {
    pub fn new(epochs: u64, seed: u64) -> SimConfig {
        SimConfig {
            epochs,
            warmup_blocks: default_warmup(),
            seed,
            replications: 1,
            record_samples: true,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.epochs == 0 {
            return Err(Error::InvalidConfig("epochs must be > 0".into()));
        }
        if self.replications == 0 {
            return Err(Error::InvalidConfig("replications must be >= 1".into()));
        }
        Ok(())
    }
}

/// One measured block: delay = end - start + 1 epochs, inclusive of the
/// first transmission epoch and the completing reception epoch.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DelaySample {
    pub block_id: u64,
    pub start_epoch: u64,
    pub end_epoch: u64,
}

impl DelaySample {
    pub fn delay(&self) -> u64 {
        self.end_epoch - self.start_epoch + 1
    }
}

/// Per intermediate node counters, accumulated over the steady-state window.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NodeReport {
    pub m_blocks: usize,
    /// Visit counts over the `(s, t)` space in lexicographic order, sampled
    /// right after the node's outgoing link resolved.
    pub post_transmit_counts: Vec<u64>,
    /// Same, sampled at the end of the epoch.
    pub post_receive_counts: Vec<u64>,
    /// Non-erased deliveries offered to this node.
    pub deliveries: u64,
    /// Deliveries dropped because the buffer was full.
    pub blocked: u64,
}

impl NodeReport {
    /// Fraction of successful upstream transmissions dropped for fullness.
    pub fn blocking_freq(&self) -> f64 {
        if self.deliveries == 0 {
            0.0
        } else {
            self.blocked as f64 / self.deliveries as f64
        }
    }
}

/// Per link loss diagnostics.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LinkReport {
    pub transmissions: u64,
    pub erased: u64,
}

/// Result of one seeded replication.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplicationReport {
    pub seed: u64,
    pub epochs: u64,
    /// Throughput/occupancy are measured for epochs strictly after this.
    pub window_start: u64,
    pub measured_epochs: u64,
    pub started_blocks: u64,
    pub total_completed_blocks: u64,
    /// Blocks completed inside the measurement window.
    pub window_completed_blocks: u64,
    /// `K * window_completed_blocks / measured_epochs`.
    pub throughput: f64,
    /// Delay histogram over post-warmup blocks.
    pub delay_hist: BTreeMap<u64, u64>,
    pub delay_samples: Vec<DelaySample>,
    pub nodes: Vec<NodeReport>,
    pub links: Vec<LinkReport>,
}

/// Merged output of all replications.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimReport {
    pub format_version: u32,
    pub rng_algorithm: String,
    pub base_seed: u64,
    pub epochs_per_replication: u64,
    pub warmup_blocks: u64,
    /// Mean per-replication throughput.
    pub throughput: f64,
    /// Standard error of the mean over replications (0 for one run).
    pub throughput_stderr: f64,
    pub delay_hist: BTreeMap<u64, u64>,
    pub nodes: Vec<NodeReport>,
    pub links: Vec<LinkReport>,
    pub replications: Vec<ReplicationReport>,
}

impl SimReport {
    /// Mean measured block delay over all replications.
    pub fn delay_mean(&self) -> Option<f64> {
        let total: u64 = self.delay_hist.values().sum();
        if total == 0 {
            return None;
        }
        let sum: f64 = self
            .delay_hist
            .iter()
            .map(|(&d, &c)| d as f64 * c as f64)
            .sum();
        Some(sum / total as f64)
    }

    /// Number of blocks contributing to the delay histogram.
    pub fn measured_delay_blocks(&self) -> u64 {
        self.delay_hist.values().sum()
    }
}

/// Sampling instant of an occupancy histogram.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SampleInstant {
    /// Right after the node's transmission resolved (receive-first chain).
    PostTransmit,
    /// End of epoch, after the node's reception resolved (transmit-first).
    PostReceive,
}

/// Normalized empirical `(s, t)` distribution of an intermediate node
/// (1-based), in the lexicographic state order of
/// [`crate::chain::enumerate_states`].
pub fn occupancy_distribution(
    report: &SimReport,
    node: usize,
    instant: SampleInstant,
) -> Result<Vec<f64>> {
    if node == 0 || node > report.nodes.len() {
        return Err(Error::UnknownNode {
            node,
            max: report.nodes.len(),
        });
    }
    let counts = match instant {
        SampleInstant::PostTransmit => &report.nodes[node - 1].post_transmit_counts,
        SampleInstant::PostReceive => &report.nodes[node - 1].post_receive_counts,
    };
    let total: u64 = counts.iter().sum();
    if total == 0 {
        return Err(Error::InvalidConfig(format!(
            "node {node} has no occupancy samples"
        )));
    }
    Ok(counts.iter().map(|&c| c as f64 / total as f64).collect())
}

pub(crate) trait ErasureSampler {
    /// Fill `out[j]` with the erasure outcome of link `j+1` this epoch.
    /// Called exactly once per epoch.
    fn sample_epoch(&mut self, out: &mut [bool]);
}

struct ChaChaSampler {
    rngs: Vec<ChaCha8Rng>,
    erasures: Vec<f64>,
}

impl ChaChaSampler {
    fn new(seed: u64, erasures: &[f64]) -> ChaChaSampler {
        let rngs = (0..erasures.len())
            .map(|link| {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream(link as u64 + 1);
                rng
            })
            .collect();
        ChaChaSampler {
            rngs,
            erasures: erasures.to_vec(),
        }
    }
}

impl ErasureSampler for ChaChaSampler {
    fn sample_epoch(&mut self, out: &mut [bool]) {
        // One draw per link per epoch, transmission or not, so streams stay
        // aligned with epoch indices.
        for (j, o) in out.iter_mut().enumerate() {
            *o = self.rngs[j].gen::<f64>() < self.erasures[j];
        }
    }
}

/// Fixed per-epoch erasure script, for hand-traced tests.
#[cfg(test)]
pub(crate) struct ScriptedSampler {
    /// `script[epoch][link]`; epochs beyond the script are loss-free.
    pub script: Vec<Vec<bool>>,
    pub epoch: usize,
}

#[cfg(test)]
impl ErasureSampler for ScriptedSampler {
    fn sample_epoch(&mut self, out: &mut [bool]) {
        for (j, o) in out.iter_mut().enumerate() {
            *o = self.script.get(self.epoch).is_some_and(|row| row[j]);
        }
        self.epoch += 1;
    }
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e3779b97f4a7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d049bb133111eb);
    x ^ (x >> 31)
}

fn replication_seed(base: u64, rep: u64) -> u64 {
    splitmix64(base ^ splitmix64(rep))
}

#[derive(Debug)]
struct BlockSlot {
    id: u64,
    stored: usize,
}

/// Run all replications and merge. Deterministic for a fixed seed.
pub fn run_simulation(net: &NetworkConfig, sim: &SimConfig) -> Result<SimReport> {
    net.validate()?;
    sim.validate()?;
    let mut reps = Vec::with_capacity(sim.replications);
    for rep in 0..sim.replications {
        let seed = if sim.replications == 1 {
            sim.seed
        } else {
            replication_seed(sim.seed, rep as u64)
        };
        let mut sampler = ChaChaSampler::new(seed, &net.erasures);
        reps.push(run_replication(net, sim, seed, &mut sampler));
    }
    Ok(merge_reports(sim, reps))
}

fn merge_reports(sim: &SimConfig, reps: Vec<ReplicationReport>) -> SimReport {
    let n = reps.len() as f64;
    let throughput = reps.iter().map(|r| r.throughput).sum::<f64>() / n;
    let throughput_stderr = if reps.len() > 1 {
        let var = reps
            .iter()
            .map(|r| (r.throughput - throughput).powi(2))
            .sum::<f64>()
            / (n - 1.0);
        (var / n).sqrt()
    } else {
        0.0
    };
    let mut delay_hist = BTreeMap::new();
    for rep in &reps {
        for (&d, &c) in &rep.delay_hist {
            *delay_hist.entry(d).or_insert(0) += c;
        }
    }
    let mut nodes = reps[0].nodes.clone();
    let mut links = reps[0].links.clone();
    for rep in &reps[1..] {
        for (acc, r) in nodes.iter_mut().zip(&rep.nodes) {
            for (a, b) in acc
                .post_transmit_counts
                .iter_mut()
                .zip(&r.post_transmit_counts)
            {
                *a += b;
            }
            for (a, b) in acc
                .post_receive_counts
                .iter_mut()
                .zip(&r.post_receive_counts)
            {
                *a += b;
            }
            acc.deliveries += r.deliveries;
            acc.blocked += r.blocked;
        }
        for (acc, r) in links.iter_mut().zip(&rep.links) {
            acc.transmissions += r.transmissions;
            acc.erased += r.erased;
        }
    }
    SimReport {
        format_version: 1,
        rng_algorithm: RNG_ALGORITHM.to_string(),
        base_seed: sim.seed,
        epochs_per_replication: sim.epochs,
        warmup_blocks: sim.warmup_blocks,
        throughput,
        throughput_stderr,
        delay_hist,
        nodes,
        links,
        replications: reps,
    }
}

pub(crate) fn run_replication(
    net: &NetworkConfig,
    sim: &SimConfig,
    seed: u64,
    sampler: &mut dyn ErasureSampler,
) -> ReplicationReport {
    let h = net.hops();
    let k = net.block_size;
    let caps: Vec<usize> = (1..h).map(|i| net.buffer_packets(i)).collect();
    let spaces: Vec<StateSpace> = net
        .buffer_blocks
        .iter()
        .map(|&m| StateSpace::new(m, k))
        .collect();

    // Node state: intermediate node i (1-based) lives at index i-1.
    let mut queues: Vec<VecDeque<BlockSlot>> = (1..h).map(|_| VecDeque::new()).collect();
    let mut stored: Vec<usize> = vec![0; h - 1];
    // inv[j-1]: the receiver of link j's innovative count of the sender's
    // current head block. Equals the sender's conveyed count `t`.
    let mut inv: Vec<usize> = vec![0; h];

    let mut src_head: u64 = 0;
    let mut next_start_record: u64 = 0;
    let mut in_flight: VecDeque<(u64, u64)> = VecDeque::new(); // (block, first tx epoch)

    let window_start = sim.epochs / 5;
    let measured_epochs = sim.epochs - window_start;

    let mut nodes: Vec<NodeReport> = spaces
        .iter()
        .zip(&net.buffer_blocks)
        .map(|(space, &m)| NodeReport {
            m_blocks: m,
            post_transmit_counts: vec![0; space.len()],
            post_receive_counts: vec![0; space.len()],
            deliveries: 0,
            blocked: 0,
        })
        .collect();
    let mut links: Vec<LinkReport> = (0..h)
        .map(|_| LinkReport {
            transmissions: 0,
            erased: 0,
        })
        .collect();
    let mut delay_hist: BTreeMap<u64, u64> = BTreeMap::new();
    let mut delay_samples = Vec::new();
    let mut total_completed: u64 = 0;
    let mut window_completed: u64 = 0;

    let mut tx = vec![false; h];
    let mut cmb = vec![0usize; h];
    let mut erased = vec![false; h];

    for epoch in 1..=sim.epochs {
        let in_window = epoch > window_start;

        // Decide all transmissions from start-of-epoch state.
        if src_head == next_start_record {
            in_flight.push_back((src_head, epoch));
            next_start_record += 1;
        }
        tx[0] = true;
        cmb[0] = k; // the source always has a full block to combine over
        for j in 2..=h {
            match queues[j - 2].front() {
                Some(head) => {
                    tx[j - 1] = true;
                    cmb[j - 1] = head.stored;
                }
                None => tx[j - 1] = false,
            }
        }
        sampler.sample_epoch(&mut erased);

        // Resolve links destination-first so a block acknowledgment frees
        // K slots before the same epoch's upstream delivery is admitted.
        for j in (1..=h).rev() {
            if tx[j - 1] {
                links[j - 1].transmissions += 1;
                if erased[j - 1] {
                    links[j - 1].erased += 1;
                } else if j == h {
                    // Destination: unconstrained buffer, acks on the K-th
                    // innovative reception.
                    if cmb[j - 1] > inv[j - 1] {
                        inv[j - 1] += 1;
                        if inv[j - 1] == k {
                            total_completed += 1;
                            if in_window {
                                window_completed += 1;
                            }
                            let (block, start) =
                                in_flight.pop_front().expect("completed an unstarted block");
                            debug_assert_eq!(queues[h - 2].front().map(|b| b.id), Some(block));
                            if block >= sim.warmup_blocks {
                                let sample = DelaySample {
                                    block_id: block,
                                    start_epoch: start,
                                    end_epoch: epoch,
                                };
                                *delay_hist.entry(sample.delay()).or_insert(0) += 1;
                                if sim.record_samples {
                                    delay_samples.push(sample);
                                }
                            }
                            // Ack: the sender drops the whole block.
                            stored[h - 2] -= k;
                            queues[h - 2].pop_front();
                            inv[j - 1] = 0;
                        }
                    }
                } else {
                    let idx = j - 1; // receiving intermediate node index
                    if in_window {
                        nodes[idx].deliveries += 1;
                    }
                    if stored[idx] == caps[idx] {
                        if in_window {
                            nodes[idx].blocked += 1;
                        }
                    } else if cmb[j - 1] > inv[j - 1] {
                        if inv[j - 1] == 0 {
                            let id = if j == 1 {
                                src_head
                            } else {
                                queues[j - 2].front().expect("sender transmitted").id
                            };
                            queues[idx].push_back(BlockSlot { id, stored: 0 });
                        }
                        queues[idx].back_mut().unwrap().stored += 1;
                        stored[idx] += 1;
                        inv[j - 1] += 1;
                        debug_assert!(stored[idx] <= caps[idx]);
                        if inv[j - 1] == k {
                            // Ack travels one hop back instantly.
                            if j == 1 {
                                src_head += 1;
                            } else {
                                stored[j - 2] -= k;
                                queues[j - 2].pop_front();
                            }
                            inv[j - 1] = 0;
                        }
                    }
                }
            }
            // Node j-1's transmission has now resolved; its reception has
            // not: the receive-first sampling instant.
            if j >= 2 && in_window {
                let idx = j - 2;
                let state = spaces[idx]
                    .index_of(stored[idx], inv[j - 1])
                    .expect("simulator state outside the chain state space");
                nodes[idx].post_transmit_counts[state] += 1;
            }
        }
        if in_window {
            for i in 0..h - 1 {
                let state = spaces[i]
                    .index_of(stored[i], inv[i + 1])
                    .expect("simulator state outside the chain state space");
                nodes[i].post_receive_counts[state] += 1;
            }
        }
    }

    let throughput = (k as u64 * window_completed) as f64 / measured_epochs as f64;
    ReplicationReport {
        seed,
        epochs: sim.epochs,
        window_start,
        measured_epochs,
        started_blocks: next_start_record,
        total_completed_blocks: total_completed,
        window_completed_blocks: window_completed,
        throughput,
        delay_hist,
        delay_samples,
        nodes,
        links,
    }
}
