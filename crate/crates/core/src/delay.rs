//! Block-delay distribution of a converged estimate.
//!
//! The delay of a block decomposes hop by hop: the time for its first
//! packet to enter the first intermediate node, a per-node waiting time at
//! every further intermediate node except the last, and the time for the
//! whole block to drain from the last intermediate node to the destination.
//! All pieces are finite-support PMFs and the total is their convolution.

use std::collections::HashMap;

use crate::chain::{StateSpace, StationaryDist};
use crate::error::{Error, Result};
use crate::estimator::Solution;
use crate::pmf::{Pmf, DEFAULT_TAIL_TOL};

/// Tail tolerance used inside the two-process completion-time recursion.
/// Tighter than the pipeline default because its values are checked
/// pointwise against an exact oracle at 1e-9.
const V_TAIL_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DelayOptions {
    /// Bound on the mass dropped per truncating operation in the pipeline.
    pub tail_tol: f64,
}

impl Default for DelayOptions {
    fn default() -> Self {
        DelayOptions {
            tail_tol: DEFAULT_TAIL_TOL,
        }
    }
}

/// Bernoulli rates seen by the last intermediate node: innovative arrivals
/// from upstream and departures over the final link.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LastHopRates {
    pub p_in: f64,
    pub p_out: f64,
}

/// The block-delay distribution together with its per-hop factors.
#[derive(Debug, Clone)]
pub struct DelayProfile {
    /// Total block delay `D`.
    pub block_delay: Pmf,
    /// Time for a packet to be conveyed from the source into node 1.
    pub first_hop: Pmf,
    /// Waiting time at intermediate nodes `1..=h-2` (empty when `h = 2`).
    pub waits: Vec<Pmf>,
    /// Drain time of the whole block from node `h-1` into the destination.
    pub final_hop: Pmf,
    pub mean: f64,
    pub std: f64,
}

/// Conditional state distribution seen by the first packet of a block:
/// supported only on occupancies that are multiples of `K` below capacity.
#[derive(Debug, Clone)]
pub struct FirstPacketDist {
    space: StateSpace,
    probs: Vec<f64>,
}

impl FirstPacketDist {
    pub fn space(&self) -> &StateSpace {
        &self.space
    }

    pub fn prob(&self, s: usize, t: usize) -> f64 {
        self.space.index_of(s, t).map_or(0.0, |i| self.probs[i])
    }

    pub fn total(&self) -> f64 {
        self.probs.iter().sum()
    }
}

/// Marginal receive-first probability of occupancy `s`:
/// the sum of `P(s, t)` over all valid `t`.
pub fn marginal_occupancy(rf: &StationaryDist, s: usize) -> f64 {
    let k = rf.space().block_size();
    (0..=s.min(k - 1)).map(|t| rf.prob(s, t)).sum()
}

/// Distribution of the state an arriving packet finds, conditioned on it
/// being the first packet of its block. Such a packet can only find whole
/// blocks in the buffer, so the conditional lives on `s ∈ {0, K, ..,
/// (M-1)K}` and renormalizes the receive-first mass there.
pub fn first_packet_state_dist(rf: &StationaryDist) -> Result<FirstPacketDist> {
    let space = rf.space().clone();
    let k = space.block_size();
    let m = space.m_blocks();
    let denom: f64 = (0..m).map(|d| marginal_occupancy(rf, d * k)).sum();
    if denom <= 0.0 || denom.is_nan() {
        return Err(Error::FirstPacketConditioning);
    }
    let mut probs = vec![0.0; space.len()];
    for d in 0..m {
        let s = d * k;
        for t in 0..=s.min(k - 1) {
            let i = space.index_of(s, t).unwrap();
            probs[i] = rf.prob(s, t) / denom;
        }
    }
    Ok(FirstPacketDist { space, probs })
}

/// Time from the arrival of a block's first packet at a node in state
/// `(s, t)` until that packet is conveyed downstream. With `s = nK` whole
/// blocks ahead of it, `(n-1)K + (K+1-t)` conveyances must succeed, each
/// taking a geometric number of epochs at the effective erasure of the
/// outgoing link; an empty buffer needs just one.
pub fn service_start_dist(
    s: usize,
    t: usize,
    eff_erasure: f64,
    block_size: usize,
    tail_tol: f64,
) -> Result<Pmf> {
    if !s.is_multiple_of(block_size) {
        return Err(Error::NotBlockAligned { s, block_size });
    }
    if t >= block_size || (s == 0 && t != 0) {
        return Err(Error::InvalidConfig(format!(
            "conveyed count {t} invalid for state ({s}, {t}) with K={block_size}"
        )));
    }
    let g = Pmf::geometric(eff_erasure, tail_tol)?;
    let n = s / block_size;
    if n == 0 {
        return Ok(g);
    }
    let folds = (n - 1) * block_size + (block_size + 1 - t);
    Ok(g.convolve_n(folds).truncate_tail(tail_tol))
}

/// Waiting time at intermediate node `i` (valid for `1 <= i <= h-2`): time
/// from storing the first innovative packet of a block until that packet is
/// conveyed to node `i+1`, averaged over the states the packet can find.
pub fn waiting_time_dist(solution: &Solution, node: usize, tail_tol: f64) -> Result<Pmf> {
    let h = solution.config.hops();
    assert!(
        (1..=h.saturating_sub(2)).contains(&node),
        "waiting time defined for nodes 1..={}, got {node}",
        h - 2
    );
    let eff = solution.effective_erasure(node + 1);
    waiting_time_from(solution.rf_dist(node), eff, tail_tol)
}

fn waiting_time_from(rf: &StationaryDist, eff_erasure: f64, tail_tol: f64) -> Result<Pmf> {
    let pi = first_packet_state_dist(rf)?;
    let space = rf.space();
    let k = space.block_size();
    let mut weights = Vec::new();
    let mut parts = Vec::new();
    for d in 0..space.m_blocks() {
        let s = d * k;
        for t in 0..=s.min(k - 1) {
            let w = pi.prob(s, t);
            if w > 0.0 {
                weights.push(w);
                parts.push(service_start_dist(s, t, eff_erasure, k, tail_tol)?);
            }
        }
    }
    Pmf::mix(&weights, &parts)
}

/// Completion-time distributions `V(x, y)` of a two-process race: `y`
/// departures must happen, `x <= y` of the packets have not arrived yet;
/// per epoch an arrival comes with probability `p_in` (while some are
/// pending) and a departure succeeds with probability `p_out` (while an
/// arrived packet is waiting). Memoized per instance.
pub(crate) struct CompletionTable {
    rates: LastHopRates,
    tail_tol: f64,
    memo: HashMap<(usize, usize), Pmf>,
}

impl CompletionTable {
    pub(crate) fn new(rates: LastHopRates, tail_tol: f64) -> Result<CompletionTable> {
        for (name, p) in [("p_in", rates.p_in), ("p_out", rates.p_out)] {
            if !(0.0..=1.0).contains(&p) || p.is_nan() {
                return Err(Error::InvalidConfig(format!("{name} {p} outside [0, 1]")));
            }
        }
        Ok(CompletionTable {
            rates,
            tail_tol,
            memo: HashMap::new(),
        })
    }

    pub(crate) fn get(&mut self, x: usize, y: usize) -> Result<Pmf> {
        if x > y {
            return Err(Error::PendingExceedsTotal { x, y });
        }
        if let Some(v) = self.memo.get(&(x, y)) {
            return Ok(v.clone());
        }
        let p_in = self.rates.p_in;
        let p_out = self.rates.p_out;
        let v = if y == 0 {
            Pmf::delta(0)
        } else if x == 0 {
            // y independent departures.
            let g = Pmf::geometric(1.0 - p_out, self.tail_tol)?;
            self.get(0, y - 1)?
                .convolve(&g)
                .truncate_tail(self.tail_tol)
        } else if x == y {
            // Nothing has arrived: wait for the first arrival.
            let g = Pmf::geometric(1.0 - p_in, self.tail_tol)?;
            self.get(x - 1, y)?
                .convolve(&g)
                .truncate_tail(self.tail_tol)
        } else {
            let p1 = p_out * (1.0 - p_in);
            let p2 = p_in * (1.0 - p_out);
            let p3 = p_in * p_out;
            let p4 = (1.0 - p_in) * (1.0 - p_out);
            let total = p1 + p2 + p3;
            if total == 0.0 {
                return Err(Error::NoProgress);
            }
            let parts = [
                self.get(x, y - 1)?,
                self.get(x - 1, y)?,
                self.get(x - 1, y - 1)?,
            ];
            let mixed = Pmf::mix(&[p1 / total, p2 / total, p3 / total], &parts)?;
            mixed
                .convolve(&Pmf::geometric(p4, self.tail_tol)?)
                .truncate_tail(self.tail_tol)
        };
        self.memo.insert((x, y), v.clone());
        Ok(v)
    }
}

/// Time to convey `y` innovative packets when `x <= y` of them have yet to
/// arrive, with per-epoch arrival probability `p_in` and departure
/// probability `p_out`.
pub fn v_dist(x: usize, y: usize, rates: &LastHopRates) -> Result<Pmf> {
    if rates.p_in == 0.0 && rates.p_out == 0.0 {
        return Err(Error::NoProgress);
    }
    CompletionTable::new(*rates, V_TAIL_TOL)?.get(x, y)
}

fn last_hop_rates(solution: &Solution) -> LastHopRates {
    let h = solution.config.hops();
    LastHopRates {
        // Innovative arrival rate at the last intermediate node.
        p_in: solution.arrival_rates[h - 2],
        p_out: 1.0 - solution.config.erasures[h - 1],
    }
}

fn last_hop_with_table(
    s: usize,
    t: usize,
    solution: &Solution,
    table: &mut CompletionTable,
    tail_tol: f64,
) -> Result<Pmf> {
    let k = solution.config.block_size;
    if !s.is_multiple_of(k) {
        return Err(Error::NotBlockAligned { s, block_size: k });
    }
    if s == 0 {
        // First packet of the block is already in; K-1 still to arrive.
        return table.get(k - 1, k);
    }
    let n = s / k;
    let rates = table.rates;
    // Packets of older blocks that must leave before this block is served.
    let alpha = (n - 1) * k + (k - t);
    // Expected number of this block's packets that arrive meanwhile.
    let ratio = alpha as f64 * rates.p_in / rates.p_out;
    let beta = if ratio.is_finite() {
        (ratio.floor() as usize).min(k - 1)
    } else {
        k - 1
    };
    let eps_last = solution.config.erasures[solution.config.hops() - 1];
    let drain = Pmf::geometric(eps_last, tail_tol)?
        .convolve_n(alpha)
        .truncate_tail(tail_tol);
    Ok(drain
        .convolve(&table.get(k - beta, k)?)
        .truncate_tail(tail_tol))
}

/// Time for a whole block to reach the destination given that its first
/// packet found the last intermediate node in state `(s, t)`.
pub fn last_hop_conditional(s: usize, t: usize, solution: &Solution) -> Result<Pmf> {
    let mut table = CompletionTable::new(last_hop_rates(solution), V_TAIL_TOL)?;
    last_hop_with_table(s, t, solution, &mut table, DEFAULT_TAIL_TOL)
}

/// Drain-time distribution of the last intermediate node: the conditional
/// distributions averaged over the states a block's first packet can find.
pub fn final_hop_dist(solution: &Solution, tail_tol: f64) -> Result<Pmf> {
    let h = solution.config.hops();
    let rf = solution.rf_dist(h - 1);
    let pi = first_packet_state_dist(rf)?;
    let space = rf.space();
    let k = space.block_size();
    let mut table = CompletionTable::new(last_hop_rates(solution), V_TAIL_TOL)?;
    let mut weights = Vec::new();
    let mut parts = Vec::new();
    for d in 0..space.m_blocks() {
        let s = d * k;
        for t in 0..=s.min(k - 1) {
            let w = pi.prob(s, t);
            if w > 0.0 {
                weights.push(w);
                parts.push(last_hop_with_table(s, t, solution, &mut table, tail_tol)?);
            }
        }
    }
    Pmf::mix(&weights, &parts)
}

/// Full block-delay distribution of a converged solution:
/// first-hop conveyance, per-node waits, final-hop drain, all convolved.
pub fn block_delay_dist(solution: &Solution, opts: &DelayOptions) -> Result<DelayProfile> {
    let h = solution.config.hops();
    let tol = opts.tail_tol;
    let first_hop = Pmf::geometric(solution.effective_erasure(1), tol)?;
    let mut waits = Vec::new();
    for node in 1..=h.saturating_sub(2) {
        waits.push(waiting_time_dist(solution, node, tol)?);
    }
    let final_hop = final_hop_dist(solution, tol)?;

    let mut block_delay = first_hop.clone();
    for w in &waits {
        block_delay = block_delay.convolve(w).truncate_tail(tol);
    }
    block_delay = block_delay.convolve(&final_hop).truncate_tail(tol);
    let (mean, std) = block_delay.stats()?;
    Ok(DelayProfile {
        block_delay,
        first_hop,
        waits,
        final_hop,
        mean,
        std,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chain::StateSpace;
    use crate::estimator::{solve_fixed_point, FixedPointOptions, NetworkConfig};

    fn dist(m: usize, k: usize, entries: &[(usize, usize, f64)]) -> StationaryDist {
        let space = StateSpace::new(m, k);
        let mut probs = vec![0.0; space.len()];
        for &(s, t, p) in entries {
            probs[space.index_of(s, t).unwrap()] = p;
        }
        StationaryDist::from_probs(space, probs).unwrap()
    }

    fn uniform(m: usize, k: usize) -> StationaryDist {
        let space = StateSpace::new(m, k);
        let n = space.len();
        StationaryDist::from_probs(space, vec![1.0 / n as f64; n]).unwrap()
    }

    #[test]
    fn marginal_occupancy_examples() {
        let rf = dist(1, 2, &[(0, 0, 1.0)]);
        assert_eq!(marginal_occupancy(&rf, 0), 1.0);

        let rf = uniform(1, 2);
        assert!((marginal_occupancy(&rf, 1) - 0.4).abs() < 1e-15);
        let total: f64 = (0..=2).map(|s| marginal_occupancy(&rf, s)).sum();
        assert!((total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn first_packet_examples() {
        let pi = first_packet_state_dist(&dist(2, 2, &[(0, 0, 1.0)])).unwrap();
        assert_eq!(pi.prob(0, 0), 1.0);

        // Uniform over the 9 states of (M=2, K=2): conditioning keeps
        // s in {0, 2} and renormalizes to thirds.
        let pi = first_packet_state_dist(&uniform(2, 2)).unwrap();
        assert!((pi.prob(0, 0) - 1.0 / 3.0).abs() < 1e-12);
        assert!((pi.prob(2, 0) - 1.0 / 3.0).abs() < 1e-12);
        assert!((pi.prob(2, 1) - 1.0 / 3.0).abs() < 1e-12);
        for (s, t) in [(1, 0), (1, 1), (3, 0), (3, 1), (4, 0), (4, 1)] {
            assert_eq!(pi.prob(s, t), 0.0, "({s},{t})");
        }
        assert!((pi.total() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn first_packet_conditioning_error() {
        // All mass on s = 1, which is not a multiple of K = 2.
        let rf = dist(2, 2, &[(1, 0, 1.0)]);
        assert!(matches!(
            first_packet_state_dist(&rf),
            Err(Error::FirstPacketConditioning)
        ));
    }

    #[test]
    fn service_start_cases() {
        let g = Pmf::geometric(0.3, DEFAULT_TAIL_TOL).unwrap();
        let s0 = service_start_dist(0, 0, 0.3, 2, DEFAULT_TAIL_TOL).unwrap();
        assert_eq!(s0, g);

        // s = K, t = 0: K+1 conveyances.
        let k = 3;
        let sk = service_start_dist(k, 0, 0.3, k, DEFAULT_TAIL_TOL).unwrap();
        let expect = g.convolve_n(k + 1).truncate_tail(DEFAULT_TAIL_TOL);
        assert_eq!(sk, expect);

        // s = 2K, t = K-1, lossless: (K) + 2 deterministic epochs.
        let k = 4;
        let d = service_start_dist(2 * k, k - 1, 0.0, k, DEFAULT_TAIL_TOL).unwrap();
        assert_eq!(d, Pmf::delta(k + 2));

        assert!(matches!(
            service_start_dist(3, 0, 0.3, 2, DEFAULT_TAIL_TOL),
            Err(Error::NotBlockAligned { .. })
        ));
    }

    #[test]
    fn waiting_time_single_term() {
        let rf = dist(2, 2, &[(0, 0, 1.0)]);
        let w = waiting_time_from(&rf, 0.4, DEFAULT_TAIL_TOL).unwrap();
        assert_eq!(w, Pmf::geometric(0.4, DEFAULT_TAIL_TOL).unwrap());
    }

    #[test]
    fn waiting_time_mean_lower_bound() {
        let eff = 0.35;
        let w = waiting_time_from(&uniform(2, 2), eff, DEFAULT_TAIL_TOL).unwrap();
        let (mean, _) = w.stats().unwrap();
        assert!(mean >= 1.0 / (1.0 - eff) - 1e-9);
    }

    #[test]
    fn waiting_time_uniform_mix() {
        let eff = 0.25;
        let tol = DEFAULT_TAIL_TOL;
        let w = waiting_time_from(&uniform(2, 2), eff, tol).unwrap();
        let parts = [
            service_start_dist(0, 0, eff, 2, tol).unwrap(),
            service_start_dist(2, 0, eff, 2, tol).unwrap(),
            service_start_dist(2, 1, eff, 2, tol).unwrap(),
        ];
        let expect = Pmf::mix(&[1.0 / 3.0; 3], &parts).unwrap();
        assert!(w.total_variation(&expect) < 1e-12);
    }

    #[test]
    fn v_boundary_departures_only() {
        let rates = LastHopRates {
            p_in: 0.5,
            p_out: 0.8,
        };
        let v = v_dist(0, 2, &rates).unwrap();
        let g = Pmf::geometric(0.2, V_TAIL_TOL).unwrap();
        let expect = g.convolve(&g);
        assert!(v.total_variation(&expect) < 1e-11);
    }

    #[test]
    fn v_boundary_all_pending() {
        let rates = LastHopRates {
            p_in: 0.6,
            p_out: 0.7,
        };
        let v11 = v_dist(1, 1, &rates).unwrap();
        let g_in = Pmf::geometric(1.0 - rates.p_in, V_TAIL_TOL).unwrap();
        let v01 = v_dist(0, 1, &rates).unwrap();
        let expect = g_in.convolve(&v01);
        assert!(v11.total_variation(&expect) < 1e-11);
    }

    #[test]
    fn v_rejects_bad_inputs() {
        let rates = LastHopRates {
            p_in: 0.0,
            p_out: 0.0,
        };
        assert!(matches!(v_dist(1, 2, &rates), Err(Error::NoProgress)));
        let rates = LastHopRates {
            p_in: 0.5,
            p_out: 0.5,
        };
        assert!(matches!(
            v_dist(3, 2, &rates),
            Err(Error::PendingExceedsTotal { .. })
        ));
    }

    /// Exact forward DP over the two Bernoulli processes: state = (pending
    /// arrivals, pending departures); a departure is possible only while an
    /// arrived packet is waiting. Independent of the recursion under test.
    fn v_oracle(x: usize, y: usize, p_in: f64, p_out: f64) -> Vec<f64> {
        let mut state = vec![vec![0.0f64; y + 1]; x + 1];
        state[x][y] = 1.0;
        let mut completed = vec![0.0];
        let mut remaining = if y == 0 { 0.0 } else { 1.0 };
        if y == 0 {
            completed[0] = 1.0;
        }
        while remaining > 1e-14 && completed.len() < 20_000 {
            let mut next = vec![vec![0.0f64; y + 1]; x + 1];
            let mut done = 0.0;
            for a in 0..=x {
                for d in 1..=y {
                    let w = state[a][d];
                    if w == 0.0 {
                        continue;
                    }
                    let arr = if a > 0 { p_in } else { 0.0 };
                    let dep = if d > a { p_out } else { 0.0 };
                    for (da, pa) in [(0, 1.0 - arr), (1, arr)] {
                        if pa == 0.0 {
                            continue;
                        }
                        for (dd, pd) in [(0, 1.0 - dep), (1, dep)] {
                            if pd == 0.0 {
                                continue;
                            }
                            let (na, nd) = (a - da, d - dd);
                            if nd == 0 {
                                done += w * pa * pd;
                            } else {
                                next[na][nd] += w * pa * pd;
                            }
                        }
                    }
                }
            }
            completed.push(done);
            remaining -= done;
            state = next;
        }
        completed
    }

    #[test]
    fn v_matches_exact_dp() {
        let rates = LastHopRates {
            p_in: 0.6,
            p_out: 0.7,
        };
        let v = v_dist(2, 3, &rates).unwrap();
        let oracle = v_oracle(2, 3, rates.p_in, rates.p_out);
        for n in 0..oracle.len().max(v.end()) {
            let o = oracle.get(n).copied().unwrap_or(0.0);
            assert!(
                (v.mass_at(n) - o).abs() < 1e-9,
                "n={n}: v={} oracle={o}",
                v.mass_at(n)
            );
        }
    }

    #[test]
    fn v_satisfies_own_recursion() {
        let rates = LastHopRates {
            p_in: 0.45,
            p_out: 0.85,
        };
        for (x, y) in [(1, 2), (2, 3), (1, 4), (3, 4)] {
            let v = v_dist(x, y, &rates).unwrap();
            let p1 = rates.p_out * (1.0 - rates.p_in);
            let p2 = rates.p_in * (1.0 - rates.p_out);
            let p3 = rates.p_in * rates.p_out;
            let p4 = (1.0 - rates.p_in) * (1.0 - rates.p_out);
            let total = p1 + p2 + p3;
            let mixed = Pmf::mix(
                &[p1 / total, p2 / total, p3 / total],
                &[
                    v_dist(x, y - 1, &rates).unwrap(),
                    v_dist(x - 1, y, &rates).unwrap(),
                    v_dist(x - 1, y - 1, &rates).unwrap(),
                ],
            )
            .unwrap();
            let rhs = mixed.convolve(&Pmf::geometric(p4, V_TAIL_TOL).unwrap());
            assert!(v.total_variation(&rhs) < 1e-12, "({x},{y})");
        }
    }

    #[test]
    fn v_mean_of_pure_departures() {
        let rates = LastHopRates {
            p_in: 0.3,
            p_out: 0.65,
        };
        for y in 1..=5 {
            let (mean, _) = v_dist(0, y, &rates).unwrap().stats().unwrap();
            assert!((mean - y as f64 / rates.p_out).abs() < 1e-6, "y={y}");
        }
    }

    #[test]
    fn v_cdf_dominance_in_pending_arrivals() {
        let rates = LastHopRates {
            p_in: 0.5,
            p_out: 0.6,
        };
        for y in 1..=4 {
            for x in 1..=y {
                let hi = v_dist(x, y, &rates).unwrap();
                let lo = v_dist(x - 1, y, &rates).unwrap();
                let end = hi.end().max(lo.end());
                let (mut chi, mut clo) = (0.0, 0.0);
                for n in 0..end {
                    chi += hi.mass_at(n);
                    clo += lo.mass_at(n);
                    assert!(chi <= clo + 1e-12, "x={x} y={y} n={n}");
                }
            }
        }
    }

    fn small_solution() -> Solution {
        let cfg = NetworkConfig::new(vec![0.1, 0.15, 0.2], vec![2, 2], 2).unwrap();
        solve_fixed_point(&cfg, &FixedPointOptions::default()).unwrap()
    }

    #[test]
    fn last_hop_empty_buffer_case() {
        let sol = small_solution();
        let k = sol.config.block_size;
        let l = last_hop_conditional(0, 0, &sol).unwrap();
        let v = v_dist(k - 1, k, &last_hop_rates(&sol)).unwrap();
        assert!(l.total_variation(&v) < 1e-12);
    }

    #[test]
    fn last_hop_alpha_beta_substitution() {
        // eps_h = 0, P_in = 1, s = K, t = 0, K = 2: alpha = 2, beta = 1,
        // L = delta(2) (x) V(1, 2). With P_out = 1 this is delta(4).
        let cfg = NetworkConfig::new(vec![0.0, 0.0], vec![2], 2).unwrap();
        let mut sol = solve_fixed_point(&cfg, &FixedPointOptions::default()).unwrap();
        sol.arrival_rates[0] = 1.0;
        let l = last_hop_conditional(2, 0, &sol).unwrap();
        assert_eq!(l, Pmf::delta(4));
    }

    #[test]
    fn last_hop_rejects_misaligned() {
        let sol = small_solution();
        assert!(matches!(
            last_hop_conditional(1, 0, &sol),
            Err(Error::NotBlockAligned { .. })
        ));
    }

    #[test]
    fn final_hop_single_term() {
        let mut sol = small_solution();
        let k = sol.config.block_size;
        let h = sol.config.hops();
        let m = sol.config.buffer_blocks[h - 2];
        sol.rf[h - 2] = dist(m, k, &[(0, 0, 1.0)]);
        let f = final_hop_dist(&sol, DEFAULT_TAIL_TOL).unwrap();
        let v = v_dist(k - 1, k, &last_hop_rates(&sol)).unwrap();
        assert!(f.total_variation(&v) < 1e-12);
    }

    #[test]
    fn final_hop_lossless_two_hop_support_floor() {
        // K certain receptions at the destination: the drain cannot finish
        // before epoch K.
        let cfg = NetworkConfig::new(vec![0.0, 0.0], vec![2], 2).unwrap();
        let sol = solve_fixed_point(&cfg, &FixedPointOptions::default()).unwrap();
        let f = final_hop_dist(&sol, DEFAULT_TAIL_TOL).unwrap();
        assert_eq!(f.offset(), cfg.block_size);
    }

    #[test]
    fn delay_two_hop_composition() {
        let cfg = NetworkConfig::new(vec![0.1, 0.2], vec![2], 2).unwrap();
        let sol = solve_fixed_point(&cfg, &FixedPointOptions::default()).unwrap();
        let profile = block_delay_dist(&sol, &DelayOptions::default()).unwrap();
        assert!(profile.waits.is_empty());
        let expect = profile.first_hop.convolve(&profile.final_hop);
        assert!(profile.block_delay.total_variation(&expect) < 1e-9);
        // At least K receptions at the sink.
        assert!(profile.block_delay.offset() >= cfg.block_size);
    }

    #[test]
    fn delay_lossless_pipeline_is_deterministic() {
        let cfg = NetworkConfig::new(vec![0.0; 4], vec![2, 2, 2], 1).unwrap();
        let sol = solve_fixed_point(&cfg, &FixedPointOptions::default()).unwrap();
        let profile = block_delay_dist(&sol, &DelayOptions::default()).unwrap();
        // One epoch per hop: the whole distribution sits at h.
        assert_eq!(profile.block_delay, Pmf::delta(4));
        assert_eq!(profile.mean, 4.0);
    }

    #[test]
    fn delay_mean_decomposes() {
        let sol = small_solution();
        let profile = block_delay_dist(&sol, &DelayOptions::default()).unwrap();
        let mut expect = profile.first_hop.stats().unwrap().0;
        for w in &profile.waits {
            expect += w.stats().unwrap().0;
        }
        expect += profile.final_hop.stats().unwrap().0;
        assert!((profile.mean - expect).abs() < 1e-6);
        assert!(profile.block_delay.total_mass() >= 1.0 - 1e-6);

        // The total is reconstructible by refolding its factors.
        let mut refold = profile.first_hop.clone();
        for w in &profile.waits {
            refold = refold.convolve(w);
        }
        refold = refold.convolve(&profile.final_hop);
        assert!(profile.block_delay.total_variation(&refold) < 1e-7);
    }
}
