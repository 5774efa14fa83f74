//! Fixture and random instance generators.

use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::io::instance::Instance;
use crate::network::{
    CostParameters, NodeId, Passenger, PhysicalNetwork, Time, TravelTimeProfile, Vehicle, VehicleKind, Window,
};

/// Links of the six-node test network: `(from, to, steps)`.
pub const SIX_NODE_LINKS: [(u32, u32, Time); 12] = [
    (4, 2, 2),
    (2, 4, 2),
    (2, 5, 1),
    (5, 2, 1),
    (5, 6, 1),
    (6, 5, 1),
    (6, 3, 1),
    (3, 6, 1),
    (3, 1, 2),
    (1, 2, 1),
    (2, 1, 1),
    (4, 1, 2),
];

fn network(links: &[(u32, u32, Time)], nodes: u32, horizon_end: Time) -> PhysicalNetwork {
    let links = links
        .iter()
        .map(|&(a, b, d)| (NodeId(a), NodeId(b), TravelTimeProfile::constant(d)))
        .collect();
    PhysicalNetwork::new((1..=nodes).map(NodeId), links, horizon_end).expect("fixture network is valid")
}

/// The six-node network.
pub fn six_node_network(horizon_end: Time) -> PhysicalNetwork {
    network(&SIX_NODE_LINKS, 6, horizon_end)
}

/// Six-node network plus a one-step link from node 6 to node 1, used by the
/// scenario fixtures.
pub fn scenario_network(horizon_end: Time) -> PhysicalNetwork {
    let mut links = SIX_NODE_LINKS.to_vec();
    links.push((6, 1, 1));
    network(&links, 6, horizon_end)
}

pub fn passenger(
    id: u32,
    origin: u32,
    destination: u32,
    pickup: (Time, Time),
    dropoff: (Time, Time),
) -> Passenger {
    Passenger {
        id,
        origin: NodeId(origin),
        destination: NodeId(destination),
        pickup_window: pickup.into(),
        dropoff_window: dropoff.into(),
        service_time: 1,
        base_profit: 10.0,
    }
}

pub fn vehicle(id: u32, start: u32, end: u32, horizon: (Time, Time), capacity: u32) -> Vehicle {
    Vehicle {
        id,
        kind: VehicleKind::Physical,
        start_depot: NodeId(start),
        end_depot: NodeId(end),
        horizon: horizon.into(),
        capacity,
        preparation_time: 1,
        owner: None,
    }
}

/// One vehicle from node 4 to node 1 and two passengers from node 2 to
/// node 3, the shared-ride trip used to check the trajectory output.
pub fn shared_ride_instance() -> Instance {
    Instance::new(
        six_node_network(30),
        vec![
            passenger(1, 2, 3, (4, 5), (11, 14)),
            passenger(2, 2, 3, (8, 10), (13, 16)),
        ],
        vec![vehicle(1, 4, 1, (1, 20), 2)],
        CostParameters::default(),
    )
    .expect("fixture is valid")
}

/// Two passengers whose origins are too far apart, in both directions, for
/// any vehicle to hold both at once.
pub fn distant_origins_instance() -> Instance {
    let links = [(1, 2, 3), (2, 1, 4), (1, 3, 2), (2, 3, 2), (3, 1, 2), (3, 2, 2)];
    Instance::new(
        network(&links, 3, 30),
        vec![
            passenger(1, 1, 3, (4, 5), (10, 20)),
            passenger(2, 2, 3, (4, 6), (10, 20)),
        ],
        vec![vehicle(1, 3, 3, (0, 30), 2)],
        CostParameters::default(),
    )
    .expect("fixture is valid")
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Scenario {
    /// Two passengers sharing one vehicle.
    I,
    /// Two passengers served one after the other.
    II,
    /// Two passengers, one vehicle that can only take one of them.
    III,
    /// Two passengers, two vehicles, one each.
    IV,
    /// Three passengers sharing one vehicle.
    V,
    /// One passenger, two competing vehicles.
    VI,
}

impl Scenario {
    pub const ALL: [Scenario; 6] = [
        Scenario::I,
        Scenario::II,
        Scenario::III,
        Scenario::IV,
        Scenario::V,
        Scenario::VI,
    ];
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self:?}")
    }
}

impl FromStr for Scenario {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Scenario::ALL
            .into_iter()
            .find(|x| x.to_string().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::Config(format!("unknown scenario {s:?}; use I to VI")))
    }
}

/// Scenario-shaped instance on the scenario network with horizons `[1, 30]`.
pub fn scenario_instance(s: Scenario) -> Instance {
    let h = (1, 30);
    let (passengers, vehicles) = match s {
        Scenario::I => (
            vec![
                passenger(1, 2, 6, (5, 7), (9, 12)),
                passenger(2, 5, 3, (8, 10), (11, 14)),
            ],
            vec![vehicle(1, 4, 1, h, 2)],
        ),
        Scenario::II => (
            vec![
                passenger(1, 2, 6, (5, 7), (9, 12)),
                passenger(2, 5, 3, (16, 19), (21, 24)),
            ],
            vec![vehicle(1, 4, 1, h, 2)],
        ),
        Scenario::III => (
            vec![
                passenger(1, 2, 1, (4, 5), (8, 10)),
                passenger(2, 3, 6, (3, 5), (11, 14)),
            ],
            vec![vehicle(1, 4, 1, h, 2)],
        ),
        Scenario::IV => (
            vec![
                passenger(1, 2, 1, (4, 5), (8, 10)),
                passenger(2, 3, 6, (4, 6), (11, 14)),
            ],
            vec![vehicle(1, 2, 1, h, 2), vehicle(2, 3, 6, h, 2)],
        ),
        Scenario::V => (
            vec![
                passenger(1, 2, 3, (4, 7), (13, 16)),
                passenger(2, 5, 3, (7, 10), (14, 18)),
                passenger(3, 6, 1, (10, 13), (19, 23)),
            ],
            vec![vehicle(1, 4, 1, h, 3)],
        ),
        Scenario::VI => (
            vec![passenger(1, 2, 6, (4, 7), (9, 12))],
            vec![vehicle(1, 4, 1, h, 2), vehicle(2, 6, 1, h, 2)],
        ),
    };
    Instance::new(
        scenario_network(30),
        passengers,
        vehicles,
        CostParameters::default(),
    )
    .expect("scenario fixture is valid")
}

/// Parameters of small random instances.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RandomConfig {
    pub nodes: u32,
    pub passengers: usize,
    pub vehicles: usize,
    pub horizon: Time,
    pub max_capacity: u32,
    /// Probability of each extra directed link beyond the spanning cycle.
    pub link_density: f64,
    /// Probability that a link gets a two-piece time-dependent profile.
    pub time_dependent: f64,
    pub window_width: Time,
}

impl Default for RandomConfig {
    fn default() -> Self {
        RandomConfig {
            nodes: 5,
            passengers: 3,
            vehicles: 1,
            horizon: 40,
            max_capacity: 2,
            link_density: 0.4,
            time_dependent: 0.2,
            window_width: 4,
        }
    }
}

/// Strongly connected random network (a directed cycle plus random extra
/// links) with passengers whose dropoff window opens after the pickup window
/// closes, so nobody can be picked up twice.
pub fn random_instance(cfg: &RandomConfig, seed: u64) -> Instance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = cfg.nodes.max(2);
    let base_h = cfg.horizon.max(12);
    let mut pairs: Vec<(u32, u32)> = (1..=n).map(|i| (i, i % n + 1)).collect();
    for a in 1..=n {
        for b in 1..=n {
            if a != b && !pairs.contains(&(a, b)) && rng.gen_bool(cfg.link_density) {
                pairs.push((a, b));
            }
        }
    }
    let links: Vec<(NodeId, NodeId, TravelTimeProfile)> = pairs
        .into_iter()
        .map(|(a, b)| {
            let d = rng.gen_range(1..=3);
            let profile = if rng.gen_bool(cfg.time_dependent) {
                let cut = rng.gen_range(1..base_h);
                let other = rng.gen_range(1..=4);
                TravelTimeProfile::piecewise(vec![(0, d), (cut, other)]).expect("valid profile")
            } else {
                TravelTimeProfile::constant(d)
            };
            (NodeId(a), NodeId(b), profile)
        })
        .collect();

    // Worst-case travel times bound every window so that the passenger's own
    // virtual vehicle can always serve it and get back home.
    let slowest_links = links
        .iter()
        .map(|(a, b, p)| (*a, *b, TravelTimeProfile::constant(p.max_duration())))
        .collect();
    let slowest = PhysicalNetwork::new((1..=n).map(NodeId), slowest_links, Time::MAX / 4)
        .expect("random network is valid");
    let probe = Instance::new(slowest, vec![], vec![], CostParameters::default()).expect("probe is valid");
    let worst = |a: u32, b: u32| {
        let from = probe.network.base.node_index(NodeId(a)).expect("node exists");
        let to = probe.network.base.node_index(NodeId(b)).expect("node exists");
        crate::reduce::shortest_travel_time(&probe.network, from, to).expect("network is strongly connected")
    };
    // Stretch the horizon when even the quickest round trip does not fit.
    let quickest_round_trip = (2..=n).map(|b| worst(1, b) + worst(b, 1)).min().unwrap_or(0);
    let h = base_h.max(quickest_round_trip + 10);
    let network = PhysicalNetwork::new((1..=n).map(NodeId), links, h).expect("random network is valid");
    let mut passengers = Vec::with_capacity(cfg.passengers);
    for _ in 0..10_000 {
        if passengers.len() == cfg.passengers {
            break;
        }
        let o = rng.gen_range(1..=n);
        let d = rng.gen_range(1..=n);
        if d == o {
            continue;
        }
        let (ride, back) = (worst(o, d), worst(d, o));
        // start -> origin -> o_p, depart o_p, ride, d_p, dropoff, return, d*_p
        let width = rng.gen_range(0..=cfg.window_width);
        let gap = rng.gen_range(1..=4);
        let extra = rng.gen_range(0..=4);
        let dropoff_len = (ride + 2).max(width + gap) - width - gap + extra;
        let latest_a = h.checked_sub(width + gap + dropoff_len + back + 2);
        let Some(latest_a) = latest_a.filter(|&x| x >= 2) else {
            continue;
        };
        let a = rng.gen_range(2..=latest_a.min(h / 2).max(2));
        let b = a + width;
        let a2 = b + gap;
        passengers.push(Passenger {
            id: passengers.len() as u32 + 1,
            origin: NodeId(o),
            destination: NodeId(d),
            pickup_window: Window::new(a, b),
            dropoff_window: Window::new(a2, a2 + dropoff_len),
            service_time: 1,
            base_profit: 10.0,
        });
    }
    assert_eq!(
        passengers.len(),
        cfg.passengers,
        "horizon too short for the random network"
    );
    let vehicles = (0..cfg.vehicles)
        .map(|k| {
            let start = rng.gen_range(1..=n);
            let end = if rng.gen_bool(0.5) {
                start
            } else {
                rng.gen_range(1..=n)
            };
            let e = rng.gen_range(0..=2);
            let cap = rng.gen_range(1..=cfg.max_capacity.max(1));
            vehicle(k as u32 + 1, start, end, (e, h), cap)
        })
        .collect();
    Instance::new(network, passengers, vehicles, CostParameters::default()).expect("random instance is valid")
}

/// Parameters of the large synthetic instance.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LargeConfig {
    pub nodes: u32,
    /// Extra directed links beyond the bidirectional ring.
    pub chords: usize,
    pub passengers: usize,
    pub vehicles: usize,
    pub horizon: Time,
    pub capacity: u32,
    pub pickup_width: Time,
    pub ride_slack: Time,
    /// Each passenger departs at one fixed step and has no arrival window
    /// beyond the horizon end.
    pub fixed_departure: bool,
}

impl Default for LargeConfig {
    fn default() -> Self {
        LargeConfig {
            nodes: 1000,
            chords: 1000,
            passengers: 20,
            vehicles: 5,
            horizon: 120,
            capacity: 3,
            pickup_width: 10,
            ride_slack: 15,
            fixed_departure: false,
        }
    }
}

/// Ring of `nodes` nodes linked both ways plus random chords between nodes
/// at most 50 ring positions apart, with passengers whose windows are
/// reachable from at least one vehicle depot.
pub fn large_instance(cfg: &LargeConfig, seed: u64) -> Instance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = cfg.nodes.max(3);
    let mut pairs = std::collections::BTreeSet::new();
    for i in 1..=n {
        let j = i % n + 1;
        pairs.insert((i, j));
        pairs.insert((j, i));
    }
    let ring = pairs.len();
    while pairs.len() < ring + cfg.chords {
        let a = rng.gen_range(1..=n);
        let offset = rng.gen_range(2..=50.min(n - 1));
        let b = (a - 1 + offset) % n + 1;
        let (a, b) = if rng.gen_bool(0.5) { (a, b) } else { (b, a) };
        if a != b {
            pairs.insert((a, b));
        }
    }
    let links: Vec<(NodeId, NodeId, TravelTimeProfile)> = pairs
        .iter()
        .map(|&(a, b)| {
            (
                NodeId(a),
                NodeId(b),
                TravelTimeProfile::constant(rng.gen_range(1..=3)),
            )
        })
        .collect();
    let network =
        PhysicalNetwork::new((1..=n).map(NodeId), links, cfg.horizon).expect("large network is valid");

    let mut all: Vec<u32> = (1..=n).collect();
    all.shuffle(&mut rng);
    let depots: Vec<u32> = all[..cfg.vehicles].to_vec();
    let vehicles: Vec<Vehicle> = depots
        .iter()
        .enumerate()
        .map(|(k, &d)| vehicle(k as u32 + 1, d, d, (0, cfg.horizon), cfg.capacity))
        .collect();

    // Passengers start near a depot so that service is plausible.
    let dist = |from: u32| -> Vec<Option<Time>> {
        let probe = Instance::new(network.clone(), vec![], vec![], CostParameters::default())
            .expect("probe instance is valid");
        let idx = probe.network.base.node_index(NodeId(from)).expect("node exists");
        crate::reduce::shortest_times_from(&probe.network, idx)
    };
    let mut passengers = Vec::with_capacity(cfg.passengers);
    let depot_dist: Vec<Vec<Option<Time>>> = depots.iter().map(|&d| dist(d)).collect();
    while passengers.len() < cfg.passengers {
        let k = passengers.len();
        let depot = k % depots.len();
        let near: Vec<u32> = (1..=n)
            .filter(|&x| depot_dist[depot][(x - 1) as usize].is_some_and(|t| (2..=12).contains(&t)))
            .collect();
        let o = *near.choose(&mut rng).expect("depot has neighbours");
        let from_o = dist(o);
        let far: Vec<u32> = (1..=n)
            .filter(|&x| from_o[(x - 1) as usize].is_some_and(|t| (3..=15).contains(&t)))
            .collect();
        let d = *far.choose(&mut rng).expect("origin has reachable nodes");
        let reach = depot_dist[depot][(o - 1) as usize].unwrap() + 2;
        let ride = from_o[(d - 1) as usize].unwrap() + 2;
        let latest = cfg
            .horizon
            .saturating_sub(ride + cfg.ride_slack + cfg.pickup_width + 30);
        if latest <= reach {
            continue;
        }
        let a = rng.gen_range(reach..=latest);
        let (pickup_window, dropoff_window) = if cfg.fixed_departure {
            (Window::new(a, a), Window::new(a + 1, cfg.horizon))
        } else {
            let b = a + cfg.pickup_width;
            (Window::new(a, b), Window::new(b + 1, a + ride + cfg.ride_slack))
        };
        passengers.push(Passenger {
            id: k as u32 + 1,
            origin: NodeId(o),
            destination: NodeId(d),
            pickup_window,
            dropoff_window,
            service_time: 1,
            base_profit: 10.0,
        });
    }
    Instance::new(network, passengers, vehicles, CostParameters::default()).expect("large instance is valid")
}
