//! Relay-selection strategies. Each maps one trellis realization to a
//! [`RelayPath`]; every argmax breaks ties toward the smallest relay index.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use crate::error::{Error, Result};
use crate::model::{bottleneck_unchecked, RelayPath, SnrTrellis};

/// Largest search space [`select_brute_force`] will enumerate.
pub const BRUTE_FORCE_LIMIT: u128 = 1_000_000;

/// A selection strategy together with its window or block size.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Strategy {
    Optimal,
    BruteForce,
    HopByHop,
    AdHoc,
    /// Non-overlapping blocks of `w` hops.
    Block(usize),
    /// Sliding window of `w` hops.
    Sliding(usize),
}

impl Strategy {
    /// Short name used on the command line and in output files.
    pub fn name(&self) -> &'static str {
        match self {
            Strategy::Optimal => "optimal",
            Strategy::BruteForce => "brute",
            Strategy::HopByHop => "hop",
            Strategy::AdHoc => "adhoc",
            Strategy::Block(_) => "block",
            Strategy::Sliding(_) => "sliding",
        }
    }

    pub fn window(&self) -> Option<usize> {
        match *self {
            Strategy::Block(w) | Strategy::Sliding(w) => Some(w),
            _ => None,
        }
    }

    /// Parses a strategy name, attaching `window` to block and sliding.
    pub fn parse(name: &str, window: usize) -> Result<Self> {
        let kind: Strategy = name.parse()?;
        Ok(match kind {
            Strategy::Block(_) => Strategy::Block(window),
            Strategy::Sliding(_) => Strategy::Sliding(window),
            other => other,
        })
    }

    /// Checks that the strategy is defined for an `hops`-hop network.
    pub fn validate(&self, hops: usize) -> Result<()> {
        match *self {
            Strategy::Block(w) => check_block(hops, w),
            Strategy::Sliding(w) => check_sliding(hops, w),
            _ => Ok(()),
        }
    }

    pub fn select(&self, trellis: &SnrTrellis) -> Result<RelayPath> {
        match *self {
            Strategy::Optimal => Ok(select_optimal(trellis)),
            Strategy::BruteForce => select_brute_force(trellis),
            Strategy::HopByHop => Ok(select_hop_by_hop(trellis)),
            Strategy::AdHoc => Ok(select_ad_hoc(trellis)),
            Strategy::Block(w) => select_block(trellis, w),
            Strategy::Sliding(w) => select_sliding(trellis, w),
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.window() {
            Some(w) => write!(f, "{}(w={w})", self.name()),
            None => f.write_str(self.name()),
        }
    }
}

/// Parses a bare name; block and sliding get `w = 2`.
impl FromStr for Strategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "optimal" | "opt" => Ok(Strategy::Optimal),
            "brute" | "brute-force" | "bruteforce" => Ok(Strategy::BruteForce),
            "hop" | "hop-by-hop" | "hopbyhop" => Ok(Strategy::HopByHop),
            "adhoc" | "ad-hoc" => Ok(Strategy::AdHoc),
            "block" | "block-by-block" => Ok(Strategy::Block(2)),
            "sliding" | "sliding-window" => Ok(Strategy::Sliding(2)),
            other => Err(Error::Parameter(format!("unknown strategy `{other}`"))),
        }
    }
}

/// Exhaustive search over all `M^{L−1}` paths; ties go to the
/// lexicographically smallest relay vector.
pub fn select_brute_force(trellis: &SnrTrellis) -> Result<RelayPath> {
    let m = trellis.relays();
    let stages = trellis.hops() - 1;
    let count = (m as u128).checked_pow(stages as u32).unwrap_or(u128::MAX);
    if count > BRUTE_FORCE_LIMIT {
        return Err(Error::SearchSpace {
            count,
            limit: BRUTE_FORCE_LIMIT,
        });
    }
    let mut current = vec![0usize; stages];
    let mut best = current.clone();
    let mut best_value = bottleneck_unchecked(trellis, &current);
    // odometer in lexicographic order, last stage fastest
    loop {
        let mut k = stages;
        loop {
            if k == 0 {
                return Ok(RelayPath::new(best));
            }
            k -= 1;
            current[k] += 1;
            if current[k] < m {
                break;
            }
            current[k] = 0;
        }
        let value = bottleneck_unchecked(trellis, &current);
        if value > best_value {
            best_value = value;
            best.copy_from_slice(&current);
        }
    }
}

/// Max-bottleneck route over hops `start..start + len` from node `entry` of
/// layer `start`.
///
/// Runs `V(j) = max_i min(V(i), γ_ij)` forward with backpointers. If the
/// window reaches the destination the exit is fixed, otherwise the best
/// node of the last layer is taken. Returns the chosen node of every layer
/// `start + 1 ..= start + len` and the route bottleneck.
fn best_route(trellis: &SnrTrellis, entry: usize, start: usize, len: usize) -> (Vec<usize>, f64) {
    let first = start + 1;
    let mut value: Vec<f64> = (0..trellis.layer_size(first))
        .map(|j| trellis.link(start, entry, j))
        .collect();
    let mut back: Vec<Vec<usize>> = Vec::with_capacity(len.saturating_sub(1));
    for hop in first..start + len {
        let size = trellis.layer_size(hop + 1);
        let mut next = vec![f64::NEG_INFINITY; size];
        let mut from = vec![0usize; size];
        for (j, (slot, pick)) in next.iter_mut().zip(from.iter_mut()).enumerate() {
            for (i, &v) in value.iter().enumerate() {
                let cand = v.min(trellis.link(hop, i, j));
                if cand > *slot {
                    *slot = cand;
                    *pick = i;
                }
            }
        }
        value = next;
        back.push(from);
    }
    let (mut node, best) = argmax(&value);
    let mut route = vec![0usize; len];
    route[len - 1] = node;
    for (k, from) in back.iter().enumerate().rev() {
        node = from[node];
        route[k] = node;
    }
    (route, best)
}

/// Index and value of the largest element; the first one on ties.
fn argmax(values: &[f64]) -> (usize, f64) {
    let mut best = 0;
    for (k, &v) in values.iter().enumerate().skip(1) {
        if v > values[best] {
            best = k;
        }
    }
    (best, values[best])
}

/// Globally optimal path by the max-bottleneck Bellman recursion.
pub fn select_optimal(trellis: &SnrTrellis) -> RelayPath {
    let (mut route, _) = best_route(trellis, 0, 0, trellis.hops());
    route.pop();
    RelayPath::new(route)
}

/// Greedy per-hop choice; the last hop offers no choice.
pub fn select_hop_by_hop(trellis: &SnrTrellis) -> RelayPath {
    let mut route = Vec::with_capacity(trellis.hops() - 1);
    let mut from = 0;
    for hop in 0..trellis.hops() - 1 {
        let (to, _) = greedy(trellis, hop, from);
        route.push(to);
        from = to;
    }
    RelayPath::new(route)
}

fn greedy(trellis: &SnrTrellis, hop: usize, from: usize) -> (usize, f64) {
    let m = trellis.layer_size(hop + 1);
    let mut best = (0, trellis.link(hop, from, 0));
    for to in 1..m {
        let v = trellis.link(hop, from, to);
        if v > best.1 {
            best = (to, v);
        }
    }
    best
}

/// Hop-by-hop for the first `L−2` relays, then the last relay maximizes the
/// bottleneck of the final two hops.
pub fn select_ad_hoc(trellis: &SnrTrellis) -> RelayPath {
    let hops = trellis.hops();
    let mut route = Vec::with_capacity(hops - 1);
    let mut from = 0;
    for hop in 0..hops - 2 {
        let (to, _) = greedy(trellis, hop, from);
        route.push(to);
        from = to;
    }
    let (tail, _) = best_route(trellis, from, hops - 2, 2);
    route.push(tail[0]);
    RelayPath::new(route)
}

fn check_block(hops: usize, w: usize) -> Result<()> {
    if w < 2 {
        return Err(Error::Parameter(format!(
            "block size must be at least 2, got {w}"
        )));
    }
    if w < hops && hops % w == 1 {
        return Err(Error::Parameter(format!(
            "{hops} hops leave a final block of one hop with block size {w}"
        )));
    }
    Ok(())
}

fn check_sliding(hops: usize, w: usize) -> Result<()> {
    if w < 2 || w > hops {
        return Err(Error::Parameter(format!(
            "window must be in 2..={hops}, got {w}"
        )));
    }
    Ok(())
}

/// Block-by-block selection with blocks of `w` hops.
///
/// Each non-final block runs the max-bottleneck DP from its entry node with
/// a free exit and fixes all of its relays; the final block ends at the
/// destination. A final block of a single hop is rejected, which for `w = 2`
/// means `L` must be even. `w ≥ L` is a single block, i.e. the optimal path.
pub fn select_block(trellis: &SnrTrellis, w: usize) -> Result<RelayPath> {
    let hops = trellis.hops();
    check_block(hops, w)?;
    let mut route = Vec::with_capacity(hops);
    let mut entry = 0;
    let mut start = 0;
    while start < hops {
        let len = w.min(hops - start);
        let (nodes, _) = best_route(trellis, entry, start, len);
        entry = nodes[len - 1];
        route.extend(nodes);
        start += len;
    }
    route.pop();
    Ok(RelayPath::new(route))
}

/// Sliding-window selection with windows of `w` hops, `2 ≤ w ≤ L`.
///
/// For each of the first `L−w` hops, a window DP with a free exit fixes only
/// the window's first relay; one final window over the last `w` hops, ending
/// at the destination, fixes all of its relays. With `w = L` this is the
/// optimal path.
pub fn select_sliding(trellis: &SnrTrellis, w: usize) -> Result<RelayPath> {
    check_sliding(trellis.hops(), w)?;
    Ok(sliding_unchecked(trellis, w))
}

/// [`select_sliding`] without the lower bound on `w`: `w = 1` degenerates
/// to hop-by-hop selection. `w` is clamped to `1..=L`.
pub fn sliding_unchecked(trellis: &SnrTrellis, w: usize) -> RelayPath {
    let hops = trellis.hops();
    let w = w.clamp(1, hops);
    let mut route = Vec::with_capacity(hops);
    let mut entry = 0;
    for start in 0..hops - w {
        let (nodes, _) = best_route(trellis, entry, start, w);
        entry = nodes[0];
        route.push(entry);
    }
    let (tail, _) = best_route(trellis, entry, hops - w, w);
    route.extend(tail);
    route.pop();
    RelayPath::new(route)
}
