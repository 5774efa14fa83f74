//! Euclidean pickup-and-delivery instances and their conversion into
//! complete-digraph transportation networks.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::io::instance::Instance;
use crate::network::{
    CostParameters, NodeId, Passenger, PhysicalNetwork, Time, TravelTimeProfile, Vehicle, VehicleKind, Window,
};

pub const SQUARE_SIDE: f64 = 50.0;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub fn distance(self, other: Point) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Request {
    pub pickup: Point,
    pub delivery: Point,
    pub load: u32,
    pub pickup_window: Window,
    pub dropoff_window: Window,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EuclideanInstance {
    pub depot: Point,
    pub requests: Vec<Request>,
    /// Load capacity `Q` of every vehicle.
    pub vehicle_capacity: u32,
    pub vehicles: u32,
    pub horizon: Window,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LoadMode {
    /// Every request takes one seat; a vehicle seats `Q` requests.
    #[default]
    UnitSlots,
    /// A vehicle seats `floor(Q / max load)` requests, so any combination of
    /// seated requests respects the load limit.
    LoadAware,
}

impl EuclideanInstance {
    pub fn violations(&self) -> Vec<String> {
        let mut v = Vec::new();
        let inside = |p: Point| (0.0..=SQUARE_SIDE).contains(&p.x) && (0.0..=SQUARE_SIDE).contains(&p.y);
        if !inside(self.depot) {
            v.push("depot lies outside the square".to_string());
        }
        for (k, r) in self.requests.iter().enumerate() {
            if !inside(r.pickup) || !inside(r.delivery) {
                v.push(format!("request {}: point outside the square", k + 1));
            }
            if r.load < 5 || r.load > self.vehicle_capacity {
                v.push(format!(
                    "request {}: load {} outside [5, {}]",
                    k + 1,
                    r.load,
                    self.vehicle_capacity
                ));
            }
        }
        v
    }
}

/// Builds a complete digraph over the depot (node 1), the pickup points
/// (nodes `2..=n+1`) and the delivery points (nodes `n+2..=2n+1`). Link
/// durations are `ceil(distance / speed)` steps, at least one.
pub fn convert_euclidean(e: &EuclideanInstance, speed: f64, mode: LoadMode) -> Result<Instance> {
    if !(speed > 0.0 && speed.is_finite()) {
        return Err(Error::Config(format!("speed must be positive, got {speed}")));
    }
    let problems = e.violations();
    if !problems.is_empty() {
        return Err(Error::Validation(problems));
    }
    let n = e.requests.len() as u32;
    let mut points = vec![e.depot];
    points.extend(e.requests.iter().map(|r| r.pickup));
    points.extend(e.requests.iter().map(|r| r.delivery));
    let ids: Vec<NodeId> = (1..=points.len() as u32).map(NodeId).collect();
    let mut links = Vec::with_capacity(points.len() * (points.len() - 1));
    for (i, &a) in points.iter().enumerate() {
        for (j, &b) in points.iter().enumerate() {
            if i != j {
                let steps = (a.distance(b) / speed).ceil().max(1.0) as Time;
                links.push((ids[i], ids[j], TravelTimeProfile::constant(steps)));
            }
        }
    }
    let network = PhysicalNetwork::new(ids, links, e.horizon.latest)?;
    let passengers = e
        .requests
        .iter()
        .enumerate()
        .map(|(k, r)| Passenger {
            id: k as u32 + 1,
            origin: NodeId(k as u32 + 2),
            destination: NodeId(k as u32 + 2 + n),
            pickup_window: r.pickup_window,
            dropoff_window: r.dropoff_window,
            service_time: 1,
            base_profit: 10.0,
        })
        .collect();
    let capacity = match mode {
        LoadMode::UnitSlots => e.vehicle_capacity,
        LoadMode::LoadAware => {
            let heaviest = e.requests.iter().map(|r| r.load).max().unwrap_or(1).max(1);
            (e.vehicle_capacity / heaviest).max(1)
        }
    };
    let vehicles = (1..=e.vehicles)
        .map(|id| Vehicle {
            id,
            kind: VehicleKind::Physical,
            start_depot: NodeId(1),
            end_depot: NodeId(1),
            horizon: e.horizon,
            capacity,
            preparation_time: 1,
            owner: None,
        })
        .collect();
    Instance::new(network, passengers, vehicles, CostParameters::default())
}

/// Parameters of the random Euclidean generator.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EuclideanGenConfig {
    pub requests: usize,
    pub vehicles: u32,
    pub vehicle_capacity: u32,
    pub horizon: Window,
    /// Distance units covered per time step; used to place feasible windows.
    pub speed: f64,
    pub window_width: Time,
    /// Extra time allowed on top of the direct ride for the dropoff window.
    pub ride_slack: Time,
}

impl Default for EuclideanGenConfig {
    fn default() -> Self {
        EuclideanGenConfig {
            requests: 5,
            vehicles: 2,
            vehicle_capacity: 20,
            horizon: Window::new(0, 600),
            speed: 1.0,
            window_width: 30,
            ride_slack: 60,
        }
    }
}

/// Uniform points in the square, loads in `[5, Q]`, pickup windows placed so
/// that a direct trip from the depot and back fits the horizon.
pub fn random_euclidean(cfg: &EuclideanGenConfig, seed: u64) -> EuclideanInstance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let depot = Point {
        x: SQUARE_SIDE / 2.0,
        y: SQUARE_SIDE / 2.0,
    };
    let point = |rng: &mut ChaCha8Rng| Point {
        x: rng.gen_range(0.0..=SQUARE_SIDE),
        y: rng.gen_range(0.0..=SQUARE_SIDE),
    };
    let steps = |d: f64| (d / cfg.speed).ceil().max(1.0) as Time;
    let requests = (0..cfg.requests)
        .map(|_| {
            let pickup = point(&mut rng);
            let delivery = point(&mut rng);
            let to_pickup = steps(depot.distance(pickup)) + 2;
            let ride = steps(pickup.distance(delivery)) + 2;
            let back = steps(delivery.distance(depot)) + 2;
            let latest_start = cfg
                .horizon
                .latest
                .saturating_sub(ride + back + cfg.window_width + cfg.ride_slack)
                .max(cfg.horizon.earliest + to_pickup);
            let a = rng.gen_range(cfg.horizon.earliest + to_pickup..=latest_start);
            let b = a + cfg.window_width;
            let dropoff = Window::new(
                b + 1,
                (a + ride + cfg.ride_slack).max(b + 1).min(cfg.horizon.latest),
            );
            Request {
                pickup,
                delivery,
                load: rng.gen_range(5..=cfg.vehicle_capacity.max(5)),
                pickup_window: Window::new(a, b),
                dropoff_window: dropoff,
            }
        })
        .collect();
    EuclideanInstance {
        depot,
        requests,
        vehicle_capacity: cfg.vehicle_capacity.max(5),
        vehicles: cfg.vehicles,
        horizon: cfg.horizon,
    }
}
