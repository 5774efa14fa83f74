//! Instance documents: parsing, validation and the derived solver view.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::network::{
    build_augmented_network, AugmentedNetwork, CostParameters, NodeId, Passenger, PhysicalNetwork, Time,
    TravelTimeProfile, Vehicle, VehicleKind, Window,
};
use crate::reduce::{shortest_times_from, shortest_times_to};

pub const FORMAT_VERSION: u32 = 1;

fn default_service_time() -> Time {
    1
}

fn default_base_profit() -> f64 {
    10.0
}

fn default_preparation_time() -> Time {
    1
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProfilePiece {
    pub from_step: Time,
    pub duration: Time,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinkRecord {
    pub from: NodeId,
    pub to: NodeId,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub travel_time: Option<Time>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub profile: Option<Vec<ProfilePiece>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PassengerRecord {
    pub id: u32,
    pub origin: NodeId,
    pub destination: NodeId,
    pub pickup_window: Window,
    pub dropoff_window: Window,
    #[serde(default = "default_service_time")]
    pub service_time: Time,
    #[serde(default = "default_base_profit")]
    pub base_profit: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VehicleRecord {
    pub id: u32,
    pub start_depot: NodeId,
    pub end_depot: NodeId,
    pub horizon: Window,
    pub capacity: u32,
    #[serde(default = "default_preparation_time")]
    pub preparation_time: Time,
}

/// Serialized instance. Virtual vehicles are never stored; they are derived
/// on load.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceDocument {
    pub format_version: u32,
    pub horizon_end: Time,
    pub nodes: Vec<NodeId>,
    pub links: Vec<LinkRecord>,
    pub passengers: Vec<PassengerRecord>,
    pub vehicles: Vec<VehicleRecord>,
    #[serde(default)]
    pub costs: CostParameters,
}

/// Validated problem: physical vehicles first (as declared), then one
/// virtual vehicle per passenger in passenger order.
#[derive(Clone, Debug)]
pub struct Instance {
    pub network: AugmentedNetwork,
    pub passengers: Vec<Passenger>,
    pub vehicles: Vec<Vehicle>,
    pub physical_vehicles: usize,
    pub costs: CostParameters,
    /// Non-fatal findings, e.g. vehicles that cannot reach their end depot.
    pub warnings: Vec<String>,
}

impl Instance {
    /// Validates the parts, derives virtual vehicles and augments the network.
    /// Every invariant violation is reported at once.
    pub fn new(
        network: PhysicalNetwork,
        passengers: Vec<Passenger>,
        physical: Vec<Vehicle>,
        costs: CostParameters,
    ) -> Result<Self> {
        let mut problems = costs.violations();
        let horizon_end = network.horizon_end();
        let mut seen = std::collections::HashSet::new();
        for p in &passengers {
            problems.extend(p.violations());
            if !seen.insert(p.id) {
                problems.push(format!("passenger {}: id declared twice", p.id));
            }
            for (what, node) in [("origin", p.origin), ("destination", p.destination)] {
                if network.node_index(node).is_none() {
                    problems.push(format!("passenger {}: {what} node {node} does not exist", p.id));
                }
            }
            if p.dropoff_window.latest > horizon_end || p.pickup_window.latest > horizon_end {
                problems.push(format!(
                    "passenger {}: windows must end by the horizon end {horizon_end}",
                    p.id
                ));
            }
        }
        let mut seen = std::collections::HashSet::new();
        for v in &physical {
            if v.kind != VehicleKind::Physical {
                problems.push(format!(
                    "vehicle {}: only physical vehicles may be declared",
                    v.id
                ));
            }
            problems.extend(v.violations());
            if !seen.insert(v.id) {
                problems.push(format!("vehicle {}: id declared twice", v.id));
            }
            for (what, node) in [("start depot", v.start_depot), ("end depot", v.end_depot)] {
                if network.node_index(node).is_none() {
                    problems.push(format!("vehicle {}: {what} node {node} does not exist", v.id));
                }
            }
            if v.horizon.latest > horizon_end {
                problems.push(format!(
                    "vehicle {}: horizon {} ends after the horizon end {horizon_end}",
                    v.id, v.horizon
                ));
            }
        }
        if !problems.is_empty() {
            return Err(Error::Validation(problems));
        }

        let physical_vehicles = physical.len();
        let mut vehicles = physical;
        let planning = Window::new(0, horizon_end);
        for (k, p) in passengers.iter().enumerate() {
            vehicles.push(Vehicle::virtual_for(k, p, planning));
        }
        let network = build_augmented_network(network, &passengers, &vehicles)?;

        let mut warnings = Vec::new();
        for (v, veh) in vehicles.iter().enumerate().take(physical_vehicles) {
            let reach = shortest_times_from(&network, network.origin_depot(v))[network.dest_depot(v)];
            if !reach.is_some_and(|t| t <= veh.horizon.latest - veh.horizon.earliest) {
                warnings.push(format!(
                    "vehicle {}: no depot-to-depot path fits its horizon {}; it is unusable",
                    veh.id, veh.horizon
                ));
            }
        }
        for (k, p) in passengers.iter().enumerate() {
            let o = network.pickup_dummy(k);
            let back = shortest_times_to(&network, o)[network.delivery_dummy(k)];
            if let Some(back) = back {
                if p.dropoff_window.earliest + back <= p.pickup_window.latest {
                    warnings.push(format!(
                        "passenger {}: windows are wide enough for a vehicle to pick the passenger up twice",
                        p.id
                    ));
                }
            }
        }
        Ok(Instance {
            network,
            passengers,
            vehicles,
            physical_vehicles,
            costs,
            warnings,
        })
    }

    /// Index of passenger `p`'s virtual vehicle.
    pub fn virtual_vehicle(&self, p: usize) -> usize {
        self.physical_vehicles + p
    }

    pub fn is_virtual(&self, v: usize) -> bool {
        v >= self.physical_vehicles
    }

    pub fn physical(&self) -> &[Vehicle] {
        &self.vehicles[..self.physical_vehicles]
    }

    /// Same passengers and network with every physical vehicle removed.
    pub fn without_physical_vehicles(&self) -> Result<Instance> {
        Instance::new(
            self.network.base.clone(),
            self.passengers.clone(),
            Vec::new(),
            self.costs.clone(),
        )
    }

    pub fn with_base_profit(mut self, profit: f64) -> Self {
        for p in &mut self.passengers {
            p.base_profit = profit;
        }
        self
    }

    pub fn to_document(&self) -> InstanceDocument {
        let base = &self.network.base;
        let links = base
            .links()
            .iter()
            .map(|l| {
                let (travel_time, profile) = if l.profile.is_constant() {
                    (Some(l.profile.pieces()[0].1), None)
                } else {
                    let pieces = l
                        .profile
                        .pieces()
                        .iter()
                        .map(|&(from_step, duration)| ProfilePiece { from_step, duration })
                        .collect();
                    (None, Some(pieces))
                };
                LinkRecord {
                    from: base.node_id(l.from),
                    to: base.node_id(l.to),
                    travel_time,
                    profile,
                }
            })
            .collect();
        InstanceDocument {
            format_version: FORMAT_VERSION,
            horizon_end: base.horizon_end(),
            nodes: base.node_ids().to_vec(),
            links,
            passengers: self
                .passengers
                .iter()
                .map(|p| PassengerRecord {
                    id: p.id,
                    origin: p.origin,
                    destination: p.destination,
                    pickup_window: p.pickup_window,
                    dropoff_window: p.dropoff_window,
                    service_time: p.service_time,
                    base_profit: p.base_profit,
                })
                .collect(),
            vehicles: self
                .physical()
                .iter()
                .map(|v| VehicleRecord {
                    id: v.id,
                    start_depot: v.start_depot,
                    end_depot: v.end_depot,
                    horizon: v.horizon,
                    capacity: v.capacity,
                    preparation_time: v.preparation_time,
                })
                .collect(),
            costs: self.costs.clone(),
        }
    }
}

impl InstanceDocument {
    pub fn into_instance(self) -> Result<Instance> {
        if self.format_version != FORMAT_VERSION {
            return Err(Error::Validation(vec![format!(
                "unsupported format_version {} (expected {FORMAT_VERSION})",
                self.format_version
            )]));
        }
        let mut links = Vec::with_capacity(self.links.len());
        let mut problems = Vec::new();
        for l in self.links {
            let name = format!("link ({},{})", l.from, l.to);
            let profile = match (l.travel_time, l.profile) {
                (Some(t), None) if t >= 1 => TravelTimeProfile::constant(t),
                (Some(_), None) => {
                    problems.push(format!("{name}: travel_time must be at least 1"));
                    continue;
                }
                (None, Some(pieces)) => {
                    match TravelTimeProfile::piecewise(
                        pieces.iter().map(|p| (p.from_step, p.duration)).collect(),
                    ) {
                        Ok(p) => p,
                        Err(e) => {
                            problems.push(format!("{name}: {e}"));
                            continue;
                        }
                    }
                }
                _ => {
                    problems.push(format!("{name}: give exactly one of travel_time or profile"));
                    continue;
                }
            };
            links.push((l.from, l.to, profile));
        }
        if !problems.is_empty() {
            return Err(Error::Validation(problems));
        }
        let network = PhysicalNetwork::new(self.nodes, links, self.horizon_end)?;
        let passengers = self
            .passengers
            .into_iter()
            .map(|p| Passenger {
                id: p.id,
                origin: p.origin,
                destination: p.destination,
                pickup_window: p.pickup_window,
                dropoff_window: p.dropoff_window,
                service_time: p.service_time,
                base_profit: p.base_profit,
            })
            .collect();
        let vehicles = self
            .vehicles
            .into_iter()
            .map(|v| Vehicle {
                id: v.id,
                kind: VehicleKind::Physical,
                start_depot: v.start_depot,
                end_depot: v.end_depot,
                horizon: v.horizon,
                capacity: v.capacity,
                preparation_time: v.preparation_time,
                owner: None,
            })
            .collect();
        Instance::new(network, passengers, vehicles, self.costs)
    }
}

/// Parses and validates an instance document.
pub fn parse_instance(text: &str) -> Result<Instance> {
    let doc: InstanceDocument = serde_json::from_str(text).map_err(|e| Error::Parse {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    doc.into_instance()
}

pub fn load_instance(path: &Path) -> Result<Instance> {
    parse_instance(&std::fs::read_to_string(path)?)
}

pub fn instance_to_json(instance: &Instance) -> String {
    serde_json::to_string_pretty(&instance.to_document()).expect("instance documents always serialize")
}

pub fn save_instance(instance: &Instance, path: &Path) -> Result<()> {
    std::fs::write(path, instance_to_json(instance) + "\n")?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    const SMALL: &str = r#"{
      "format_version": 1,
      "horizon_end": 30,
      "nodes": [1, 2, 3],
      "links": [
        {"from": 1, "to": 2, "travel_time": 1},
        {"from": 2, "to": 3, "profile": [{"from_step": 0, "duration": 2}, {"from_step": 10, "duration": 3}]},
        {"from": 3, "to": 1, "travel_time": 1}
      ],
      "passengers": [
        {"id": 1, "origin": 2, "destination": 3, "pickup_window": [4, 7], "dropoff_window": [8, 14]}
      ],
      "vehicles": [
        {"id": 1, "start_depot": 1, "end_depot": 1, "horizon": [1, 20], "capacity": 2}
      ]
    }"#;

    #[test]
    fn loads_with_virtual_vehicles() {
        let inst = parse_instance(SMALL).unwrap();
        assert_eq!(inst.network.base.node_count(), 3);
        assert_eq!(inst.vehicles.len(), 2);
        assert!(inst.vehicles[1].is_virtual());
        assert_eq!(inst.passengers[0].service_time, 1);
        assert_eq!(inst.passengers[0].base_profit, 10.0);
        assert_eq!(inst.costs, CostParameters::default());
    }

    #[test]
    fn round_trip_is_semantic_identity() {
        let inst = parse_instance(SMALL).unwrap();
        let again = parse_instance(&instance_to_json(&inst)).unwrap();
        assert_eq!(inst.to_document(), again.to_document());
        let original: serde_json::Value = serde_json::from_str(SMALL).unwrap();
        let saved: serde_json::Value = serde_json::to_value(inst.to_document()).unwrap();
        assert_eq!(original["links"], saved["links"]);
        assert_eq!(original["nodes"], saved["nodes"]);
    }

    #[test]
    fn every_violation_is_listed() {
        let bad = SMALL
            .replace("\"pickup_window\": [4, 7]", "\"pickup_window\": [7, 4]")
            .replace("\"capacity\": 2", "\"capacity\": 0");
        match parse_instance(&bad).unwrap_err() {
            Error::Validation(list) => {
                assert!(list
                    .iter()
                    .any(|m| m.contains("passenger 1") && m.contains("b_p < a_p")));
                assert!(list.iter().any(|m| m.contains("capacity")));
            }
            e => panic!("unexpected {e}"),
        }
    }

    #[test]
    fn missing_endpoint_names_link() {
        let bad = SMALL.replace("{\"from\": 3, \"to\": 1", "{\"from\": 3, \"to\": 9");
        let err = parse_instance(&bad).unwrap_err();
        assert!(matches!(err, Error::Structural { .. }));
        assert!(err.to_string().contains("link (3,9)"), "{err}");
    }

    #[test]
    fn parse_errors_carry_location() {
        let err = parse_instance("{\n  \"format_version\": 1,\n  oops\n}").unwrap_err();
        match err {
            Error::Parse { line, .. } => assert_eq!(line, 3),
            e => panic!("unexpected {e}"),
        }
    }
}
