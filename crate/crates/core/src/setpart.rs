//! Exact set-partitioning oracle for small instances.
//!
//! Every vehicle gets the list of passenger subsets it can serve, each with
//! the cheapest route that serves exactly that subset. The oracle then picks
//! one pattern per vehicle so that every passenger is served exactly once at
//! minimum total cost.

use itertools::Itertools;
use serde::Serialize;

use crate::dp::{least_cost_path, VehiclePath, TIE_EPS};
use crate::error::{Error, Result};
use crate::io::instance::Instance;
use crate::lr::GeneralizedCost;
use crate::network::Time;
use crate::sst::{ArcKind, VehicleSstNetwork};

/// Largest number of subsets enumerated per vehicle.
pub const MAX_SUBSETS: u64 = 100_000;
/// Largest number of pattern combinations the search may visit.
pub const MAX_COMBINATIONS: u128 = 10_000_000;

#[derive(Clone, Debug, Serialize)]
pub struct ServicePattern {
    pub vehicle: usize,
    /// Served passengers, ascending.
    pub serves: Vec<usize>,
    pub cost: f64,
    pub path: VehiclePath,
}

/// Service status of a passenger: waiting, onboard, delivered.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Status {
    Waiting = 0,
    Onboard = 1,
    Delivered = 2,
}

impl ServicePattern {
    /// Status of every passenger at time `t` along the pattern's route.
    /// Pickups and dropoffs take effect once their service arc completes.
    pub fn status_at(&self, passengers: usize, t: Time) -> Vec<Status> {
        let mut status = vec![Status::Waiting; passengers];
        for arc in &self.path.arcs {
            if arc.to.time > t {
                break;
            }
            match arc.kind {
                ArcKind::Pickup(p) => status[p] = Status::Onboard,
                ArcKind::Dropoff(p) => status[p] = Status::Delivered,
                _ => {}
            }
        }
        status
    }
}

fn binomial(n: u64, k: u64) -> u64 {
    (0..k).fold(1u64, |acc, i| acc.saturating_mul(n - i) / (i + 1))
}

/// Patterns of vehicle `v` over subsets of at most `max_subset_size`
/// passengers, forcing the subset with `-M` and repelling the rest with
/// `+M`. A pattern is kept only when the route serves exactly the subset.
pub fn enumerate_patterns(
    instance: &Instance,
    v: usize,
    max_subset_size: usize,
    big_m: f64,
) -> Result<Vec<ServicePattern>> {
    let net = VehicleSstNetwork::new(
        &instance.network,
        &instance.passengers,
        &instance.vehicles,
        v,
        &instance.costs,
        None,
    )?;
    let candidates = net.candidates().to_vec();
    let n = candidates.len() as u64;
    let total: u64 = (0..=max_subset_size.min(candidates.len()) as u64)
        .map(|k| binomial(n, k))
        .fold(0u64, |a, b| a.saturating_add(b));
    if total > MAX_SUBSETS {
        return Err(Error::OracleScope(format!(
            "vehicle {} would need {total} subsets (limit {MAX_SUBSETS}); use the oracle on desk-scale instances",
            instance.vehicles[v].label()
        )));
    }
    let passengers = instance.passengers.len();
    let mut patterns = Vec::new();
    for k in 0..=max_subset_size.min(candidates.len()) {
        for subset in candidates.iter().copied().combinations(k) {
            let mut adjustments = vec![big_m; passengers];
            for &p in &subset {
                adjustments[p] = -big_m;
            }
            let (path, _) = least_cost_path(&net, &GeneralizedCost { adjustments });
            let Some(path) = path else { continue };
            if path.served != subset || subset.iter().any(|&p| path.pickups_of(p) != 1) {
                continue;
            }
            patterns.push(ServicePattern {
                vehicle: v,
                serves: subset,
                cost: path.base_cost,
                path,
            });
        }
    }
    Ok(patterns)
}

#[derive(Clone, Debug, Serialize)]
pub struct PartitionSolution {
    /// Index into each vehicle's pattern list.
    pub chosen: Vec<usize>,
    pub total_cost: f64,
}

/// Exhaustive search over one pattern per vehicle covering every passenger
/// exactly once. Ties keep the lexicographically first choice vector.
pub fn solve_partition(
    patterns: &[Vec<ServicePattern>],
    passengers: usize,
) -> Result<Option<PartitionSolution>> {
    let combos = patterns
        .iter()
        .fold(1u128, |acc, p| acc.saturating_mul(p.len().max(1) as u128));
    if combos > MAX_COMBINATIONS {
        return Err(Error::OracleScope(format!(
            "{combos} pattern combinations exceed the limit of {MAX_COMBINATIONS}"
        )));
    }
    if patterns.iter().any(|p| p.is_empty()) {
        return Ok(None);
    }
    let masks: Vec<Vec<u128>> = patterns
        .iter()
        .map(|list| {
            list.iter()
                .map(|pat| pat.serves.iter().fold(0u128, |m, &p| m | 1 << p))
                .collect()
        })
        .collect();
    let full: u128 = if passengers == 128 {
        u128::MAX
    } else {
        (1u128 << passengers) - 1
    };

    struct Search<'a> {
        patterns: &'a [Vec<ServicePattern>],
        masks: &'a [Vec<u128>],
        full: u128,
        current: Vec<usize>,
        best: Option<PartitionSolution>,
    }

    impl Search<'_> {
        fn go(&mut self, v: usize, covered: u128, cost: f64) {
            if v == self.patterns.len() {
                if covered == self.full && self.best.as_ref().is_none_or(|b| cost < b.total_cost - TIE_EPS) {
                    self.best = Some(PartitionSolution {
                        chosen: self.current.clone(),
                        total_cost: cost,
                    });
                }
                return;
            }
            for j in 0..self.patterns[v].len() {
                let m = self.masks[v][j];
                if m & covered != 0 {
                    continue;
                }
                self.current.push(j);
                self.go(v + 1, covered | m, cost + self.patterns[v][j].cost);
                self.current.pop();
            }
        }
    }

    let mut search = Search {
        patterns,
        masks: &masks,
        full,
        current: Vec::new(),
        best: None,
    };
    search.go(0, 0, 0.0);
    Ok(search.best)
}

#[derive(Clone, Debug, Serialize)]
pub struct OracleResult {
    pub patterns: Vec<Vec<ServicePattern>>,
    pub solution: Option<PartitionSolution>,
}

/// Enumerates patterns for every vehicle (virtual ones included) and solves
/// the partition problem.
pub fn solve_instance(instance: &Instance, big_m: f64) -> Result<OracleResult> {
    let n = instance.passengers.len();
    let patterns = (0..instance.vehicles.len())
        .map(|v| enumerate_patterns(instance, v, n, big_m))
        .collect::<Result<Vec<_>>>()?;
    let solution = solve_partition(&patterns, n)?;
    Ok(OracleResult { patterns, solution })
}
