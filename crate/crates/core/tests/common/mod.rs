//! Independent reference computations shared by the integration tests.

#![allow(dead_code)]

use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sstroute::dp::ArcCostFn;
use sstroute::sst::{SstVertex, VehicleSstNetwork};

/// Number of distinct source-to-sink paths, or `None` above `limit`.
pub fn count_paths(net: &VehicleSstNetwork, limit: u64) -> Option<u64> {
    fn go(
        net: &VehicleSstNetwork,
        v: SstVertex,
        sink: SstVertex,
        memo: &mut HashMap<SstVertex, u64>,
        limit: u64,
    ) -> u64 {
        if v == sink {
            return 1;
        }
        if let Some(&c) = memo.get(&v) {
            return c;
        }
        let mut total = 0u64;
        for arc in net.outgoing_arcs(v) {
            total = total
                .saturating_add(go(net, arc.to, sink, memo, limit))
                .min(limit + 1);
        }
        memo.insert(v, total);
        total
    }
    let n = go(net, net.source(), net.sink(), &mut HashMap::new(), limit);
    (n <= limit).then_some(n)
}

/// Cheapest source-to-sink cost by walking every path explicitly.
pub fn brute_force_min_cost(net: &VehicleSstNetwork, xi: &impl ArcCostFn) -> Option<f64> {
    fn go(
        net: &VehicleSstNetwork,
        v: SstVertex,
        sink: SstVertex,
        cost: f64,
        xi: &impl ArcCostFn,
        best: &mut Option<f64>,
    ) {
        if v == sink {
            if best.is_none_or(|b| cost < b) {
                *best = Some(cost);
            }
            return;
        }
        for arc in net.outgoing_arcs(v) {
            let c = xi.cost(&arc, net.arc_cost(&arc));
            go(net, arc.to, sink, cost + c, xi, best);
        }
    }
    let mut best = None;
    go(net, net.source(), net.sink(), 0.0, xi, &mut best);
    best
}

/// Fraction of sampled uniform pairs on `[0, h]` that lie within `tau`.
pub fn monte_carlo_overlap(h: f64, tau: f64, samples: u32, seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let hits = (0..samples)
        .filter(|_| {
            let a: f64 = rng.gen_range(0.0..h);
            let b: f64 = rng.gen_range(0.0..h);
            (a - b).abs() <= tau
        })
        .count();
    hits as f64 / samples as f64
}

/// Brute-force subset count of size at most `cap` out of `n`.
pub fn subsets_up_to(n: u32, cap: u32) -> usize {
    (0u32..1 << n).filter(|m| m.count_ones() <= cap).count()
}
