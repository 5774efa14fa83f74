//! Search-region reduction: passenger pairs that can never share a ride,
//! nodes and passengers a vehicle can never reach within its horizon, and the
//! overlap-probability estimate used to judge how much sharing to expect.
//!
//! Travel-time bounds use each link's minimum duration over the horizon, so
//! every rule stays a valid (conservative) filter under time-dependent travel
//! times.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use serde::Serialize;

use crate::network::{AugmentedNetwork, Passenger, Time, Vehicle};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RuleId {
    /// Time windows never overlap.
    NoOverlap,
    /// Not enough time to travel between the two origins or destinations.
    InsufficientTravel,
    /// Round trip from the vehicle's depot exceeds its horizon.
    OutOfReach,
}

fn dijkstra<I>(count: usize, source: usize, neighbours: impl Fn(usize) -> I) -> Vec<Option<Time>>
where
    I: Iterator<Item = (usize, Time)>,
{
    let mut dist: Vec<Option<Time>> = vec![None; count];
    let mut heap = BinaryHeap::new();
    dist[source] = Some(0);
    heap.push(Reverse((0, source)));
    while let Some(Reverse((d, u))) = heap.pop() {
        if dist[u].is_some_and(|best| d > best) {
            continue;
        }
        for (v, w) in neighbours(u) {
            let nd = d + w;
            if dist[v].is_none_or(|old| nd < old) {
                dist[v] = Some(nd);
                heap.push(Reverse((nd, v)));
            }
        }
    }
    dist
}

/// Lower-bound travel times from `source` to every augmented node.
pub fn shortest_times_from(net: &AugmentedNetwork, source: usize) -> Vec<Option<Time>> {
    dijkstra(net.node_count(), source, |u| net.out_min_durations(u))
}

/// Lower-bound travel times from every augmented node to `target`.
pub fn shortest_times_to(net: &AugmentedNetwork, target: usize) -> Vec<Option<Time>> {
    dijkstra(net.node_count(), target, |u| net.in_min_durations(u))
}

/// Static shortest travel time between two augmented nodes; `None` when
/// `to` is unreachable.
pub fn shortest_travel_time(net: &AugmentedNetwork, from: usize, to: usize) -> Option<Time> {
    shortest_times_from(net, from)[to]
}

/// True when one passenger must be delivered before the other can even be
/// picked up.
pub fn rule1_no_overlap(p1: &Passenger, p2: &Passenger) -> bool {
    p1.dropoff_window.latest < p2.pickup_window.earliest
        || p2.dropoff_window.latest < p1.pickup_window.earliest
}

/// Shortest travel times between the dummies of two passengers.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PairTravelTimes {
    pub origin_forward: Option<Time>,
    pub origin_backward: Option<Time>,
    pub dest_forward: Option<Time>,
    pub dest_backward: Option<Time>,
}

fn slack_short(slack: i64, tt: Option<Time>) -> bool {
    match tt {
        Some(t) => slack < t as i64,
        None => true,
    }
}

/// True when neither pickup order fits between the origin windows, or
/// neither dropoff order fits between the destination windows.
pub fn rule2_insufficient_travel(p1: &Passenger, p2: &Passenger, tt: PairTravelTimes) -> bool {
    let (a1, b1) = (p1.pickup_window.earliest as i64, p1.pickup_window.latest as i64);
    let (a2, b2) = (p2.pickup_window.earliest as i64, p2.pickup_window.latest as i64);
    let origin = slack_short(b2 - a1, tt.origin_forward) && slack_short(b1 - a2, tt.origin_backward);
    let (c1, d1) = (p1.dropoff_window.earliest as i64, p1.dropoff_window.latest as i64);
    let (c2, d2) = (p2.dropoff_window.earliest as i64, p2.dropoff_window.latest as i64);
    let dest = slack_short(d2 - c1, tt.dest_forward) && slack_short(d1 - c2, tt.dest_backward);
    origin || dest
}

fn sum(parts: &[Option<Time>]) -> Option<u64> {
    parts.iter().try_fold(0u64, |acc, t| t.map(|t| acc + t as u64))
}

/// True when visiting a node costs more time than the vehicle's horizon
/// allows: `from_start` is the bound from the origin depot to the node,
/// `to_end` from the node to the destination depot.
pub fn rule3_inaccessible(vehicle: &Vehicle, from_start: Option<Time>, to_end: Option<Time>) -> bool {
    let span = (vehicle.horizon.latest - vehicle.horizon.earliest) as u64;
    sum(&[from_start, to_end]).is_none_or(|total| total > span)
}

/// Passenger variant of [`rule3_inaccessible`]: depot → pickup → delivery →
/// depot must fit into the horizon.
pub fn rule3_passenger_inaccessible(
    vehicle: &Vehicle,
    to_pickup: Option<Time>,
    ride: Option<Time>,
    to_end: Option<Time>,
) -> bool {
    let span = (vehicle.horizon.latest - vehicle.horizon.earliest) as u64;
    sum(&[to_pickup, ride, to_end]).is_none_or(|total| total > span)
}

/// Probability that two independent uniform midpoints on `[0, H]` lie within
/// `tau` of each other.
pub fn shared_ride_probability(horizon_length: f64, tau: f64) -> f64 {
    if tau >= horizon_length {
        return 1.0;
    }
    let rest = horizon_length - tau;
    1.0 - rest * rest / (horizon_length * horizon_length)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ForbiddenPair {
    pub first: usize,
    pub second: usize,
    pub rule: RuleId,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Justified {
    pub index: usize,
    pub rule: RuleId,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct VehicleReach {
    /// Physical nodes (dense index) the vehicle can never visit.
    pub inaccessible_nodes: Vec<Justified>,
    /// Passengers (dense index) the vehicle can never serve.
    pub inaccessible_passengers: Vec<Justified>,
}

impl VehicleReach {
    pub fn node_blocked(&self, x: usize) -> bool {
        self.inaccessible_nodes.iter().any(|j| j.index == x)
    }

    pub fn passenger_blocked(&self, p: usize) -> bool {
        self.inaccessible_passengers.iter().any(|j| j.index == p)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Rule4Estimate {
    pub horizon_length: f64,
    pub tau: f64,
    pub probability: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct ReductionReport {
    pub forbidden_pairs: Vec<ForbiddenPair>,
    pub per_vehicle: Vec<VehicleReach>,
    /// `origin_times[p][q]`: bound from `o_p` to `o_q`.
    #[serde(skip)]
    pub origin_times: Vec<Vec<Option<Time>>>,
    #[serde(skip)]
    pub dest_times: Vec<Vec<Option<Time>>>,
    /// Bound from `o_p` to `d_p` per passenger.
    #[serde(skip)]
    pub ride_times: Vec<Option<Time>>,
    pub advisory: Option<Rule4Estimate>,
    #[serde(skip)]
    forbidden: Vec<Vec<bool>>,
}

impl ReductionReport {
    pub fn is_forbidden(&self, a: usize, b: usize) -> bool {
        self.forbidden[a][b]
    }

    pub fn rule_for(&self, a: usize, b: usize) -> Option<RuleId> {
        let (a, b) = (a.min(b), a.max(b));
        self.forbidden_pairs
            .iter()
            .find(|f| f.first == a && f.second == b)
            .map(|f| f.rule)
    }

    pub fn passenger_accessible(&self, vehicle: usize, p: usize) -> bool {
        !self.per_vehicle[vehicle].passenger_blocked(p)
    }

    pub fn with_rule4(mut self, horizon_length: f64, tau: f64) -> Self {
        self.advisory = Some(Rule4Estimate {
            horizon_length,
            tau,
            probability: shared_ride_probability(horizon_length, tau),
        });
        self
    }
}

/// Applies the hard rules to every passenger pair and every vehicle.
pub fn build_reduction_report(
    net: &AugmentedNetwork,
    passengers: &[Passenger],
    vehicles: &[Vehicle],
) -> ReductionReport {
    let n = passengers.len();
    let from_origin: Vec<Vec<Option<Time>>> = (0..n)
        .map(|p| shortest_times_from(net, net.pickup_dummy(p)))
        .collect();
    let from_dest: Vec<Vec<Option<Time>>> = (0..n)
        .map(|p| shortest_times_from(net, net.delivery_dummy(p)))
        .collect();
    let origin_times: Vec<Vec<Option<Time>>> = (0..n)
        .map(|p| (0..n).map(|q| from_origin[p][net.pickup_dummy(q)]).collect())
        .collect();
    let dest_times: Vec<Vec<Option<Time>>> = (0..n)
        .map(|p| (0..n).map(|q| from_dest[p][net.delivery_dummy(q)]).collect())
        .collect();
    let ride_times: Vec<Option<Time>> = (0..n).map(|p| from_origin[p][net.delivery_dummy(p)]).collect();

    let mut forbidden = vec![vec![false; n]; n];
    let mut forbidden_pairs = Vec::new();
    for a in 0..n {
        for b in a + 1..n {
            let (pa, pb) = (&passengers[a], &passengers[b]);
            let rule = if rule1_no_overlap(pa, pb) {
                Some(RuleId::NoOverlap)
            } else {
                let tt = PairTravelTimes {
                    origin_forward: origin_times[a][b],
                    origin_backward: origin_times[b][a],
                    dest_forward: dest_times[a][b],
                    dest_backward: dest_times[b][a],
                };
                rule2_insufficient_travel(pa, pb, tt).then_some(RuleId::InsufficientTravel)
            };
            if let Some(rule) = rule {
                forbidden[a][b] = true;
                forbidden[b][a] = true;
                forbidden_pairs.push(ForbiddenPair {
                    first: a,
                    second: b,
                    rule,
                });
            }
        }
    }

    let per_vehicle = vehicles
        .iter()
        .enumerate()
        .map(|(v, veh)| {
            let start = shortest_times_from(net, net.origin_depot(v));
            let end = shortest_times_to(net, net.dest_depot(v));
            let out_of_reach = |index| Justified {
                index,
                rule: RuleId::OutOfReach,
            };
            let inaccessible_nodes = (0..net.physical_count())
                .filter(|&x| rule3_inaccessible(veh, start[x], end[x]))
                .map(out_of_reach)
                .collect();
            let inaccessible_passengers = (0..n)
                .filter(|&p| {
                    rule3_passenger_inaccessible(
                        veh,
                        start[net.pickup_dummy(p)],
                        ride_times[p],
                        end[net.delivery_dummy(p)],
                    )
                })
                .map(out_of_reach)
                .collect();
            VehicleReach {
                inaccessible_nodes,
                inaccessible_passengers,
            }
        })
        .collect();

    ReductionReport {
        forbidden_pairs,
        per_vehicle,
        origin_times,
        dest_times,
        ride_times,
        advisory: None,
        forbidden,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::{build_augmented_network, NodeId, PhysicalNetwork, TravelTimeProfile, VehicleKind};

    fn pax(id: u32, o: u32, d: u32, pick: (Time, Time), drop: (Time, Time)) -> Passenger {
        Passenger {
            id,
            origin: NodeId(o),
            destination: NodeId(d),
            pickup_window: pick.into(),
            dropoff_window: drop.into(),
            service_time: 1,
            base_profit: 10.0,
        }
    }

    fn vehicle(start: u32, end: u32, horizon: (Time, Time)) -> Vehicle {
        Vehicle {
            id: 1,
            kind: VehicleKind::Physical,
            start_depot: NodeId(start),
            end_depot: NodeId(end),
            horizon: horizon.into(),
            capacity: 2,
            preparation_time: 1,
            owner: None,
        }
    }

    fn line(n: u32) -> PhysicalNetwork {
        let links = (1..n)
            .flat_map(|i| {
                [
                    (NodeId(i), NodeId(i + 1), TravelTimeProfile::constant(1)),
                    (NodeId(i + 1), NodeId(i), TravelTimeProfile::constant(1)),
                ]
            })
            .collect();
        PhysicalNetwork::new((1..=n).map(NodeId), links, 100).unwrap()
    }

    #[test]
    fn line_graph_end_to_end() {
        let aug = build_augmented_network(line(3), &[], &[]).unwrap();
        assert_eq!(shortest_travel_time(&aug, 0, 2), Some(2));
        assert_eq!(shortest_travel_time(&aug, 1, 1), Some(0));
    }

    #[test]
    fn rule1_cases() {
        let p1 = pax(1, 1, 2, (1, 5), (9, 12));
        let p3 = pax(3, 1, 2, (20, 24), (30, 35));
        assert!(rule1_no_overlap(&p1, &p3));
        assert!(rule1_no_overlap(&p3, &p1));
        assert!(!rule1_no_overlap(&p1, &p1.clone()));
        let touching = pax(4, 1, 2, (12, 14), (20, 22));
        assert!(!rule1_no_overlap(&p1, &touching));
    }

    #[test]
    fn rule2_cases() {
        let p1 = pax(1, 1, 2, (4, 5), (10, 30));
        let p2 = pax(2, 3, 2, (4, 6), (10, 30));
        let far = PairTravelTimes {
            origin_forward: Some(5),
            origin_backward: Some(6),
            dest_forward: Some(0),
            dest_backward: Some(0),
        };
        assert!(rule2_insufficient_travel(&p1, &p2, far));
        let colocated = PairTravelTimes {
            origin_forward: Some(0),
            origin_backward: Some(0),
            ..far
        };
        assert!(!rule2_insufficient_travel(&p1, &p2, colocated));
        let exact = PairTravelTimes {
            origin_forward: Some(2),
            ..far
        };
        assert!(!rule2_insufficient_travel(&p1, &p2, exact));
    }

    #[test]
    fn rule3_cases() {
        let v = vehicle(1, 1, (1, 30));
        assert!(!rule3_inaccessible(&v, Some(2), Some(1)));
        assert!(rule3_inaccessible(&v, Some(20), Some(10)));
        assert!(!rule3_inaccessible(&v, Some(0), Some(29)));
        assert!(rule3_inaccessible(&v, None, Some(0)));
    }

    #[test]
    fn probability_closed_form() {
        assert_eq!(shared_ride_probability(240.0, 60.0), 7.0 / 16.0);
        assert_eq!(shared_ride_probability(240.0, 120.0), 0.75);
        assert_eq!(shared_ride_probability(10.0, 20.0), 1.0);
        let mut prev = 0.0;
        for tau in 0..=100 {
            let p = shared_ride_probability(100.0, tau as f64);
            assert!(p >= prev);
            prev = p;
        }
    }

    #[test]
    fn disjoint_windows_forbid_every_pair() {
        let ps: Vec<Passenger> = (0..4)
            .map(|k| pax(k + 1, 1, 3, (k * 10, k * 10 + 2), (k * 10 + 4, k * 10 + 6)))
            .collect();
        let aug = build_augmented_network(line(3), &ps, &[]).unwrap();
        let report = build_reduction_report(&aug, &ps, &[]);
        assert_eq!(report.forbidden_pairs.len(), 6);
        assert!(report.forbidden_pairs.iter().all(|f| f.rule == RuleId::NoOverlap));
        assert!(report.is_forbidden(3, 1) && report.is_forbidden(1, 3));
    }

    #[test]
    fn generous_complete_graph_has_empty_report() {
        let ids: Vec<NodeId> = (1..=4).map(NodeId).collect();
        let mut links = Vec::new();
        for &a in &ids {
            for &b in &ids {
                if a != b {
                    links.push((a, b, TravelTimeProfile::constant(1)));
                }
            }
        }
        let net = PhysicalNetwork::new(ids, links, 200).unwrap();
        let ps = vec![pax(1, 1, 2, (0, 100), (0, 150)), pax(2, 3, 4, (0, 100), (0, 150))];
        let vs = vec![vehicle(1, 1, (0, 200))];
        let aug = build_augmented_network(net, &ps, &vs).unwrap();
        let report = build_reduction_report(&aug, &ps, &vs);
        assert!(report.forbidden_pairs.is_empty());
        assert!(report.per_vehicle[0].inaccessible_nodes.is_empty());
        assert!(report.per_vehicle[0].inaccessible_passengers.is_empty());
    }

    #[test]
    fn short_horizon_blocks_far_nodes() {
        let vs = vec![vehicle(1, 1, (0, 4))];
        let aug = build_augmented_network(line(5), &[], &vs).unwrap();
        let report = build_reduction_report(&aug, &[], &vs);
        // Round trip via prep links: 1 + 2*d + 1 <= 4 keeps nodes 1 and 2.
        let blocked: Vec<usize> = report.per_vehicle[0]
            .inaccessible_nodes
            .iter()
            .map(|j| j.index)
            .collect();
        assert_eq!(blocked, vec![2, 3, 4]);
    }
}
