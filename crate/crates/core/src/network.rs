//! Physical transportation network, passengers, vehicles and the dummy-node
//! augmentation that turns every pickup, delivery and depot into its own node.
//!
//! Dense indices are used everywhere inside the solver. Physical nodes are
//! numbered by ascending external id; the augmented network appends two dummy
//! nodes per passenger (pickup, delivery) and two per vehicle (origin depot,
//! destination depot), in that order.

use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Discrete time index. One step is `CostParameters::time_step_minutes` long.
pub type Time = u32;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct NodeId(pub u32);

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Closed interval of time steps `[earliest, latest]`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(from = "(Time, Time)", into = "(Time, Time)")]
pub struct Window {
    pub earliest: Time,
    pub latest: Time,
}

impl Window {
    pub const fn new(earliest: Time, latest: Time) -> Self {
        Window { earliest, latest }
    }

    #[inline]
    pub fn contains(&self, t: Time) -> bool {
        self.earliest <= t && t <= self.latest
    }

    pub fn len(&self) -> Time {
        self.latest.saturating_sub(self.earliest)
    }

    pub fn is_empty(&self) -> bool {
        self.latest < self.earliest
    }
}

impl From<(Time, Time)> for Window {
    fn from((a, b): (Time, Time)) -> Self {
        Window::new(a, b)
    }
}

impl From<Window> for (Time, Time) {
    fn from(w: Window) -> Self {
        (w.earliest, w.latest)
    }
}

impl fmt::Display for Window {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", self.earliest, self.latest)
    }
}

/// Step function of link duration over departure time.
///
/// Each piece `(from_step, duration)` applies to departures in
/// `[from_step, next.from_step)`; the last piece extends to the horizon end.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TravelTimeProfile {
    pieces: Vec<(Time, Time)>,
}

impl TravelTimeProfile {
    pub fn constant(duration: Time) -> Self {
        TravelTimeProfile {
            pieces: vec![(0, duration)],
        }
    }

    /// Builds a piecewise-constant profile. The first piece must start at 0,
    /// starts must strictly increase and every duration must be at least 1.
    pub fn piecewise(pieces: Vec<(Time, Time)>) -> Result<Self> {
        if pieces.first().map(|p| p.0) != Some(0) {
            return Err(Error::Domain("travel-time profile must start at step 0".into()));
        }
        if pieces.windows(2).any(|w| w[0].0 >= w[1].0) {
            return Err(Error::Domain(
                "travel-time profile breakpoints must strictly increase".into(),
            ));
        }
        if pieces.iter().any(|p| p.1 == 0) {
            return Err(Error::Domain(
                "travel-time durations must be at least 1 step".into(),
            ));
        }
        Ok(TravelTimeProfile { pieces })
    }

    #[inline]
    pub fn duration_at(&self, depart: Time) -> Time {
        if self.pieces.len() == 1 {
            return self.pieces[0].1;
        }
        let k = self.pieces.partition_point(|p| p.0 <= depart);
        self.pieces[k - 1].1
    }

    pub fn min_duration(&self) -> Time {
        self.pieces.iter().map(|p| p.1).min().unwrap_or(1)
    }

    pub fn max_duration(&self) -> Time {
        self.pieces.iter().map(|p| p.1).max().unwrap_or(1)
    }

    pub fn pieces(&self) -> &[(Time, Time)] {
        &self.pieces
    }

    pub fn is_constant(&self) -> bool {
        self.pieces.len() == 1
    }
}

#[derive(Clone, Debug)]
pub struct Link {
    pub from: usize,
    pub to: usize,
    pub profile: TravelTimeProfile,
}

/// Directed transportation graph with time-dependent link travel times.
#[derive(Clone, Debug)]
pub struct PhysicalNetwork {
    node_ids: Vec<NodeId>,
    index: HashMap<NodeId, usize>,
    links: Vec<Link>,
    out: Vec<Vec<usize>>,
    incoming: Vec<Vec<usize>>,
    link_index: HashMap<(usize, usize), usize>,
    horizon_end: Time,
}

impl PhysicalNetwork {
    pub fn new(
        nodes: impl IntoIterator<Item = NodeId>,
        links: Vec<(NodeId, NodeId, TravelTimeProfile)>,
        horizon_end: Time,
    ) -> Result<Self> {
        let mut node_ids: Vec<NodeId> = nodes.into_iter().collect();
        node_ids.sort();
        if let Some(w) = node_ids.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::structural(format!("node {}", w[0]), "declared twice"));
        }
        let index: HashMap<NodeId, usize> = node_ids.iter().enumerate().map(|(i, n)| (*n, i)).collect();

        let mut dense = Vec::with_capacity(links.len());
        for (from, to, profile) in links {
            let name = format!("link ({from},{to})");
            let i = *index
                .get(&from)
                .ok_or_else(|| Error::structural(&name, format!("unknown endpoint node {from}")))?;
            let j = *index
                .get(&to)
                .ok_or_else(|| Error::structural(&name, format!("unknown endpoint node {to}")))?;
            if i == j {
                return Err(Error::structural(name, "self loops are not links"));
            }
            dense.push(Link {
                from: i,
                to: j,
                profile,
            });
        }
        dense.sort_by_key(|l| (l.from, l.to));
        if let Some(w) = dense
            .windows(2)
            .find(|w| (w[0].from, w[0].to) == (w[1].from, w[1].to))
        {
            return Err(Error::structural(
                format!("link ({},{})", node_ids[w[0].from], node_ids[w[0].to]),
                "declared twice",
            ));
        }

        let mut out = vec![Vec::new(); node_ids.len()];
        let mut incoming = vec![Vec::new(); node_ids.len()];
        let mut link_index = HashMap::with_capacity(dense.len());
        for (k, l) in dense.iter().enumerate() {
            out[l.from].push(k);
            incoming[l.to].push(k);
            link_index.insert((l.from, l.to), k);
        }
        Ok(PhysicalNetwork {
            node_ids,
            index,
            links: dense,
            out,
            incoming,
            link_index,
            horizon_end,
        })
    }

    pub fn node_count(&self) -> usize {
        self.node_ids.len()
    }

    pub fn link_count(&self) -> usize {
        self.links.len()
    }

    pub fn horizon_end(&self) -> Time {
        self.horizon_end
    }

    pub fn node_ids(&self) -> &[NodeId] {
        &self.node_ids
    }

    pub fn node_id(&self, idx: usize) -> NodeId {
        self.node_ids[idx]
    }

    pub fn node_index(&self, id: NodeId) -> Option<usize> {
        self.index.get(&id).copied()
    }

    pub fn links(&self) -> &[Link] {
        &self.links
    }

    pub fn link(&self, k: usize) -> &Link {
        &self.links[k]
    }

    /// Indices of links leaving dense node `i`, ordered by head node.
    pub fn out_links(&self, i: usize) -> &[usize] {
        &self.out[i]
    }

    pub fn in_links(&self, i: usize) -> &[usize] {
        &self.incoming[i]
    }

    pub fn find_link(&self, from: usize, to: usize) -> Option<usize> {
        self.link_index.get(&(from, to)).copied()
    }

    /// `TT(i, j, t)` looked up by external node ids.
    pub fn travel_time(&self, from: NodeId, to: NodeId, depart: Time) -> Result<Time> {
        let name = format!("({from},{to})");
        let (i, j) = match (self.node_index(from), self.node_index(to)) {
            (Some(i), Some(j)) => (i, j),
            _ => return Err(Error::structural(format!("link {name}"), "unknown node")),
        };
        let k = self
            .find_link(i, j)
            .ok_or_else(|| Error::structural(format!("link {name}"), "no such link"))?;
        if depart > self.horizon_end {
            return Err(Error::Horizon {
                link: name,
                depart,
                horizon_end: self.horizon_end,
            });
        }
        Ok(self.links[k].profile.duration_at(depart))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Passenger {
    pub id: u32,
    pub origin: NodeId,
    pub destination: NodeId,
    pub pickup_window: Window,
    pub dropoff_window: Window,
    pub service_time: Time,
    pub base_profit: f64,
}

impl Passenger {
    pub fn label(&self) -> String {
        format!("p{}", self.id)
    }

    /// Invariant violations, each phrased with the passenger's id.
    pub fn violations(&self) -> Vec<String> {
        let mut v = Vec::new();
        let (a, b) = (self.pickup_window.earliest, self.pickup_window.latest);
        let (a2, b2) = (self.dropoff_window.earliest, self.dropoff_window.latest);
        if a > b {
            v.push(format!(
                "passenger {}: pickup window [{a}, {b}] has b_p < a_p",
                self.id
            ));
        }
        if a2 > b2 {
            v.push(format!(
                "passenger {}: dropoff window [{a2}, {b2}] has b'_p < a'_p",
                self.id
            ));
        }
        if a >= b2 {
            v.push(format!(
                "passenger {}: earliest pickup {a} is not before latest dropoff {b2}",
                self.id
            ));
        }
        if self.service_time == 0 {
            v.push(format!(
                "passenger {}: service time must be at least 1 step",
                self.id
            ));
        }
        if !self.base_profit.is_finite() || self.base_profit < 0.0 {
            v.push(format!(
                "passenger {}: base profit must be finite and >= 0",
                self.id
            ));
        }
        v
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VehicleKind {
    Physical,
    Virtual,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Vehicle {
    pub id: u32,
    pub kind: VehicleKind,
    pub start_depot: NodeId,
    pub end_depot: NodeId,
    pub horizon: Window,
    pub capacity: u32,
    pub preparation_time: Time,
    /// Dense index of the passenger a virtual vehicle is dedicated to.
    pub owner: Option<usize>,
}

impl Vehicle {
    pub fn is_virtual(&self) -> bool {
        self.kind == VehicleKind::Virtual
    }

    /// Dedicated virtual vehicle `v*_p`: depots at the passenger's origin,
    /// capacity one.
    pub fn virtual_for(owner: usize, passenger: &Passenger, horizon: Window) -> Self {
        Vehicle {
            id: passenger.id,
            kind: VehicleKind::Virtual,
            start_depot: passenger.origin,
            end_depot: passenger.origin,
            horizon,
            capacity: 1,
            preparation_time: 1,
            owner: Some(owner),
        }
    }

    pub fn label(&self) -> String {
        match self.kind {
            VehicleKind::Physical => format!("v{}", self.id),
            VehicleKind::Virtual => format!("v*{}", self.id),
        }
    }

    pub fn violations(&self) -> Vec<String> {
        let mut v = Vec::new();
        let name = self.label();
        if self.horizon.earliest >= self.horizon.latest {
            v.push(format!(
                "vehicle {name}: horizon {} must have e_v < l_v",
                self.horizon
            ));
        }
        if self.capacity == 0 {
            v.push(format!("vehicle {name}: capacity must be at least 1"));
        }
        if self.preparation_time == 0 {
            v.push(format!(
                "vehicle {name}: preparation time must be at least 1 step"
            ));
        }
        v
    }
}

/// Hourly cost rates and the length of one time step.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CostParameters {
    pub physical_move_rate: f64,
    pub physical_wait_rate: f64,
    pub virtual_move_rate: f64,
    pub virtual_wait_rate: f64,
    pub depot_wait_rate: f64,
    pub time_step_minutes: f64,
}

impl Default for CostParameters {
    fn default() -> Self {
        CostParameters {
            physical_move_rate: 22.0,
            physical_wait_rate: 15.0,
            virtual_move_rate: 50.0,
            virtual_wait_rate: 0.0,
            depot_wait_rate: 0.0,
            time_step_minutes: 1.0,
        }
    }
}

impl CostParameters {
    pub fn violations(&self) -> Vec<String> {
        let mut v = Vec::new();
        let rates = [
            ("physical_move_rate", self.physical_move_rate),
            ("physical_wait_rate", self.physical_wait_rate),
            ("virtual_move_rate", self.virtual_move_rate),
            ("virtual_wait_rate", self.virtual_wait_rate),
            ("depot_wait_rate", self.depot_wait_rate),
        ];
        for (name, r) in rates {
            if !r.is_finite() || r < 0.0 {
                v.push(format!("costs: {name} must be finite and >= 0"));
            }
        }
        if self.physical_wait_rate >= self.physical_move_rate {
            v.push("costs: physical_wait_rate must be below physical_move_rate".into());
        }
        if self.virtual_wait_rate != 0.0 {
            v.push("costs: virtual_wait_rate must be 0 so idle virtual vehicles cost nothing".into());
        }
        if !(self.time_step_minutes > 0.0 && self.time_step_minutes.is_finite()) {
            v.push("costs: time_step_minutes must be positive".into());
        }
        v
    }

    /// Length of `steps` time steps in hours.
    #[inline]
    pub fn hours(&self, steps: Time) -> f64 {
        steps as f64 * self.time_step_minutes / 60.0
    }
}

/// Role of a node in the augmented network.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum AugNode {
    Physical(usize),
    /// `o_p`, pickup dummy of the passenger with this dense index.
    Pickup(usize),
    /// `d_p`, delivery dummy.
    Delivery(usize),
    /// `o'_v`, origin depot dummy of the vehicle with this dense index.
    OriginDepot(usize),
    /// `d'_v`, destination depot dummy.
    DestDepot(usize),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DummyLink {
    pub from: usize,
    pub to: usize,
    pub duration: Time,
}

#[derive(Clone, Copy, Debug)]
enum AugLink {
    Physical(usize),
    Dummy(Time),
}

/// Physical network plus one dummy node per pickup, delivery and depot.
#[derive(Clone, Debug)]
pub struct AugmentedNetwork {
    pub base: PhysicalNetwork,
    nodes: Vec<AugNode>,
    labels: Vec<String>,
    /// `(o_p, d_p)` augmented indices per passenger.
    pub passenger_dummies: Vec<(usize, usize)>,
    /// `(o'_v, d'_v)` augmented indices per vehicle.
    pub vehicle_dummies: Vec<(usize, usize)>,
    pub dummy_links: Vec<DummyLink>,
    attachment: Vec<usize>,
    pickups_at: Vec<Vec<usize>>,
    deliveries_at: Vec<Vec<usize>>,
    out: Vec<Vec<(usize, AugLink)>>,
    incoming: Vec<Vec<(usize, AugLink)>>,
}

/// Attaches pickup/delivery dummies for every passenger and depot dummies for
/// every vehicle (physical and virtual) to the base network.
pub fn build_augmented_network(
    base: PhysicalNetwork,
    passengers: &[Passenger],
    vehicles: &[Vehicle],
) -> Result<AugmentedNetwork> {
    let n = base.node_count();
    let resolve = |entity: String, node: NodeId| {
        base.node_index(node)
            .ok_or_else(|| Error::structural(entity, format!("unknown node {node}")))
    };

    let mut nodes: Vec<AugNode> = (0..n).map(AugNode::Physical).collect();
    let mut labels: Vec<String> = base.node_ids().iter().map(|id| id.to_string()).collect();
    let mut attachment: Vec<usize> = (0..n).collect();
    let mut dummy_links = Vec::new();
    let mut passenger_dummies = Vec::with_capacity(passengers.len());
    let mut pickups_at = vec![Vec::new(); n];
    let mut deliveries_at = vec![Vec::new(); n];

    for (p, pax) in passengers.iter().enumerate() {
        let o = resolve(format!("passenger {}", pax.id), pax.origin)?;
        let d = resolve(format!("passenger {}", pax.id), pax.destination)?;
        let (op, dp) = (nodes.len(), nodes.len() + 1);
        nodes.push(AugNode::Pickup(p));
        nodes.push(AugNode::Delivery(p));
        labels.push(format!("o_{}", pax.id));
        labels.push(format!("d_{}", pax.id));
        attachment.push(o);
        attachment.push(d);
        let st = pax.service_time;
        dummy_links.push(DummyLink {
            from: o,
            to: op,
            duration: st,
        });
        dummy_links.push(DummyLink {
            from: op,
            to: o,
            duration: st,
        });
        dummy_links.push(DummyLink {
            from: d,
            to: dp,
            duration: st,
        });
        dummy_links.push(DummyLink {
            from: dp,
            to: d,
            duration: st,
        });
        pickups_at[o].push(p);
        deliveries_at[d].push(p);
        passenger_dummies.push((op, dp));
    }

    let mut vehicle_dummies = Vec::with_capacity(vehicles.len());
    for (v, veh) in vehicles.iter().enumerate() {
        let name = format!("vehicle {}", veh.label());
        if veh.is_virtual() {
            let owner = veh
                .owner
                .ok_or_else(|| Error::structural(&name, "virtual vehicle has no owner passenger"))?;
            let pax = passengers
                .get(owner)
                .ok_or_else(|| Error::structural(&name, format!("owner index {owner} out of range")))?;
            if veh.start_depot != pax.origin || veh.end_depot != pax.origin {
                return Err(Error::structural(
                    name,
                    "virtual vehicle depots must sit at the owner's origin node",
                ));
            }
        }
        let s = resolve(name.clone(), veh.start_depot)?;
        let e = resolve(name, veh.end_depot)?;
        let (ov, dv) = (nodes.len(), nodes.len() + 1);
        nodes.push(AugNode::OriginDepot(v));
        nodes.push(AugNode::DestDepot(v));
        let (ol, dl) = if veh.is_virtual() {
            (format!("o*_{}", veh.id), format!("d*_{}", veh.id))
        } else {
            (format!("o'_{}", veh.id), format!("d'_{}", veh.id))
        };
        labels.push(ol);
        labels.push(dl);
        attachment.push(s);
        attachment.push(e);
        let pt = veh.preparation_time;
        dummy_links.push(DummyLink {
            from: ov,
            to: s,
            duration: pt,
        });
        dummy_links.push(DummyLink {
            from: e,
            to: dv,
            duration: pt,
        });
        vehicle_dummies.push((ov, dv));
    }

    let total = nodes.len();
    let mut out = vec![Vec::new(); total];
    let mut incoming = vec![Vec::new(); total];
    for (k, l) in base.links().iter().enumerate() {
        out[l.from].push((l.to, AugLink::Physical(k)));
        incoming[l.to].push((l.from, AugLink::Physical(k)));
    }
    for dl in &dummy_links {
        out[dl.from].push((dl.to, AugLink::Dummy(dl.duration)));
        incoming[dl.to].push((dl.from, AugLink::Dummy(dl.duration)));
    }

    Ok(AugmentedNetwork {
        base,
        nodes,
        labels,
        passenger_dummies,
        vehicle_dummies,
        dummy_links,
        attachment,
        pickups_at,
        deliveries_at,
        out,
        incoming,
    })
}

impl AugmentedNetwork {
    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn physical_count(&self) -> usize {
        self.base.node_count()
    }

    pub fn kind(&self, idx: usize) -> AugNode {
        self.nodes[idx]
    }

    pub fn label(&self, idx: usize) -> &str {
        &self.labels[idx]
    }

    /// Physical node a dummy hangs off; identity for physical nodes.
    pub fn attachment(&self, idx: usize) -> usize {
        self.attachment[idx]
    }

    pub fn pickup_dummy(&self, p: usize) -> usize {
        self.passenger_dummies[p].0
    }

    pub fn delivery_dummy(&self, p: usize) -> usize {
        self.passenger_dummies[p].1
    }

    pub fn origin_depot(&self, v: usize) -> usize {
        self.vehicle_dummies[v].0
    }

    pub fn dest_depot(&self, v: usize) -> usize {
        self.vehicle_dummies[v].1
    }

    /// Passengers whose origin is physical node `i`.
    pub fn pickups_at(&self, i: usize) -> &[usize] {
        &self.pickups_at[i]
    }

    pub fn deliveries_at(&self, i: usize) -> &[usize] {
        &self.deliveries_at[i]
    }

    pub fn total_link_count(&self) -> usize {
        self.base.link_count() + self.dummy_links.len()
    }

    /// Travel time between adjacent augmented nodes departing at `depart`.
    /// Dummy links return their fixed service or preparation time.
    pub fn travel_time(&self, from: usize, to: usize, depart: Time) -> Result<Time> {
        let name = || format!("({},{})", self.labels[from], self.labels[to]);
        let link = self
            .out
            .get(from)
            .and_then(|links| links.iter().find(|(j, _)| *j == to));
        let Some((_, link)) = link else {
            return Err(Error::structural(format!("link {}", name()), "no such link"));
        };
        if depart > self.base.horizon_end() {
            return Err(Error::Horizon {
                link: name(),
                depart,
                horizon_end: self.base.horizon_end(),
            });
        }
        Ok(match *link {
            AugLink::Physical(k) => self.base.link(k).profile.duration_at(depart),
            AugLink::Dummy(d) => d,
        })
    }

    /// Outgoing links with their minimum duration over the horizon.
    pub fn out_min_durations(&self, idx: usize) -> impl Iterator<Item = (usize, Time)> + '_ {
        self.out[idx]
            .iter()
            .map(move |(j, l)| (*j, self.min_duration(*l)))
    }

    pub fn in_min_durations(&self, idx: usize) -> impl Iterator<Item = (usize, Time)> + '_ {
        self.incoming[idx]
            .iter()
            .map(move |(i, l)| (*i, self.min_duration(*l)))
    }

    fn min_duration(&self, l: AugLink) -> Time {
        match l {
            AugLink::Physical(k) => self.base.link(k).profile.min_duration(),
            AugLink::Dummy(d) => d,
        }
    }
}
