//! State-space-time network of a single vehicle.
//!
//! Vertices are `(node, time, state)` triples over augmented nodes. Arcs are
//! produced on demand, so the network is never materialised. Every generated
//! arc can still reach the sink: arrivals past the horizon, arrivals that can
//! no longer make it back to the destination depot, and arrivals that can no
//! longer deliver an onboard passenger in time are all suppressed.
//!
//! Service semantics:
//! * the arc into a pickup dummy `o_p` is the pickup; it may arrive early and
//!   wait there, but must arrive no later than `b_p`;
//! * the vehicle leaves `o_p` within `[a_p, b_p]`;
//! * the arc out of a delivery dummy `d_p` is the dropoff and departs within
//!   `[a'_p, b'_p]`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::network::{AugNode, AugmentedNetwork, CostParameters, Passenger, Time, Vehicle};
use crate::reduce::{shortest_times_to, ReductionReport};
use crate::states::{enumerate_states, StateSpace};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct SstVertex {
    pub node: usize,
    pub time: Time,
    pub state: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(tag = "kind", content = "passenger", rename_all = "snake_case")]
pub enum ArcKind {
    /// Service arc into `o_p`; carries the global passenger index.
    Pickup(usize),
    /// Service arc out of `d_p`.
    Dropoff(usize),
    Transport,
    Wait,
    /// Waiting at one of the vehicle's own depot dummies.
    DepotWait,
    /// Staying home: origin depot straight to destination depot when both sit
    /// on the same physical node.
    DepotStay,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct SstArc {
    pub from: SstVertex,
    pub to: SstVertex,
    pub kind: ArcKind,
}

impl SstArc {
    pub fn duration(&self) -> Time {
        self.to.time - self.from.time
    }

    pub fn pickup_of(&self) -> Option<usize> {
        match self.kind {
            ArcKind::Pickup(p) => Some(p),
            _ => None,
        }
    }
}

/// Base routing cost of an arc.
pub fn arc_cost(params: &CostParameters, vehicle: &Vehicle, arc: &SstArc) -> f64 {
    let hours = params.hours(arc.duration());
    let virt = vehicle.is_virtual();
    let rate = match arc.kind {
        ArcKind::Wait if virt => params.virtual_wait_rate,
        ArcKind::Wait => params.physical_wait_rate,
        ArcKind::DepotWait | ArcKind::DepotStay if virt => params.virtual_wait_rate,
        ArcKind::DepotWait | ArcKind::DepotStay => params.depot_wait_rate,
        _ if virt => params.virtual_move_rate,
        _ => params.physical_move_rate,
    };
    hours * rate
}

/// Lazily generated state-space-time network for one vehicle.
pub struct VehicleSstNetwork<'a> {
    pub aug: &'a AugmentedNetwork,
    pub passengers: &'a [Passenger],
    pub vehicle: &'a Vehicle,
    pub vehicle_index: usize,
    pub params: &'a CostParameters,
    space: StateSpace,
    local_to_global: Vec<usize>,
    global_to_local: Vec<Option<usize>>,
    blocked: Vec<bool>,
    dist_to_sink: Vec<Option<Time>>,
    dist_to_delivery: Vec<Vec<Option<Time>>>,
    start_node: usize,
    end_node: usize,
}

impl<'a> VehicleSstNetwork<'a> {
    /// Builds the network of vehicle `vehicle_index`. With a reduction report,
    /// passengers and nodes out of the vehicle's reach are dropped and
    /// forbidden pairs never share a state.
    pub fn new(
        aug: &'a AugmentedNetwork,
        passengers: &'a [Passenger],
        vehicles: &'a [Vehicle],
        vehicle_index: usize,
        params: &'a CostParameters,
        reduction: Option<&ReductionReport>,
    ) -> Result<Self> {
        let vehicle = vehicles
            .get(vehicle_index)
            .ok_or_else(|| Error::Domain(format!("vehicle index {vehicle_index} out of range")))?;
        let reach = reduction.map(|r| &r.per_vehicle[vehicle_index]);
        let candidates: Vec<usize> = match vehicle.owner {
            Some(owner) => vec![owner],
            None => (0..passengers.len())
                .filter(|&p| reach.is_none_or(|r| !r.passenger_blocked(p)))
                .collect(),
        };
        let mut global_to_local = vec![None; passengers.len()];
        for (l, &g) in candidates.iter().enumerate() {
            global_to_local[g] = Some(l);
        }
        let pruned: Vec<(usize, usize)> = match reduction {
            Some(r) => r
                .forbidden_pairs
                .iter()
                .filter_map(|f| Some((global_to_local[f.first]?, global_to_local[f.second]?)))
                .collect(),
            None => Vec::new(),
        };
        let space = enumerate_states(candidates.len(), vehicle.capacity as usize, &pruned)?;

        let mut blocked = vec![false; aug.node_count()];
        if let Some(r) = reach {
            for j in &r.inaccessible_nodes {
                blocked[j.index] = true;
            }
        }
        let dist_to_sink = shortest_times_to(aug, aug.dest_depot(vehicle_index));
        let dist_to_delivery = candidates
            .iter()
            .map(|&g| shortest_times_to(aug, aug.delivery_dummy(g)))
            .collect();
        Ok(VehicleSstNetwork {
            aug,
            passengers,
            vehicle,
            vehicle_index,
            params,
            space,
            local_to_global: candidates,
            global_to_local,
            blocked,
            dist_to_sink,
            dist_to_delivery,
            start_node: aug.attachment(aug.origin_depot(vehicle_index)),
            end_node: aug.attachment(aug.dest_depot(vehicle_index)),
        })
    }

    pub fn space(&self) -> &StateSpace {
        &self.space
    }

    pub fn source(&self) -> SstVertex {
        SstVertex {
            node: self.aug.origin_depot(self.vehicle_index),
            time: self.vehicle.horizon.earliest,
            state: 0,
        }
    }

    pub fn sink(&self) -> SstVertex {
        SstVertex {
            node: self.aug.dest_depot(self.vehicle_index),
            time: self.vehicle.horizon.latest,
            state: 0,
        }
    }

    /// Global indices of the passengers this vehicle may carry.
    pub fn candidates(&self) -> &[usize] {
        &self.local_to_global
    }

    pub fn local_index(&self, global: usize) -> Option<usize> {
        self.global_to_local.get(global).copied().flatten()
    }

    /// Arc count of the vehicle's augmented graph: links, one waiting loop per
    /// node and the stay-home arc.
    pub fn link_count(&self) -> usize {
        self.aug.total_link_count() + self.aug.node_count() + 1
    }

    pub fn time_steps(&self) -> usize {
        (self.vehicle.horizon.latest - self.vehicle.horizon.earliest + 1) as usize
    }

    /// Worst-case number of label updates, `|T| * |A| * |W|`.
    pub fn complexity_bound(&self) -> u128 {
        self.time_steps() as u128 * self.link_count() as u128 * self.space.len() as u128
    }

    pub fn arc_cost(&self, arc: &SstArc) -> f64 {
        arc_cost(self.params, self.vehicle, arc)
    }

    /// Renders a state with passenger labels, one slot per candidate.
    pub fn state_label(&self, w: usize) -> String {
        let labels: Vec<String> = self
            .local_to_global
            .iter()
            .map(|&g| self.passengers[g].label())
            .collect();
        self.space.format_state_with(w, &labels)
    }

    /// Compact rendering listing only onboard passengers, e.g. `[p1 p2]`.
    pub fn onboard_label(&self, w: usize) -> String {
        let names: Vec<String> = self
            .space
            .state(w)
            .members()
            .map(|l| self.passengers[self.local_to_global[l]].label())
            .collect();
        if names.is_empty() {
            "w0".to_string()
        } else {
            format!("[{}]", names.join(" "))
        }
    }

    #[inline]
    fn admissible(&self, node: usize, s: Time, state: usize) -> bool {
        let latest = self.vehicle.horizon.latest;
        if s > latest || self.blocked[node] {
            return false;
        }
        match self.dist_to_sink[node] {
            Some(d) if s + d <= latest => {}
            _ => return false,
        }
        self.space.state(state).members().all(|l| {
            let deadline = self.passengers[self.local_to_global[l]].dropoff_window.latest;
            matches!(self.dist_to_delivery[l][node], Some(d) if s + d <= deadline)
        })
    }

    fn emit(
        &self,
        from: SstVertex,
        node: usize,
        dur: Time,
        state: usize,
        kind: ArcKind,
        f: &mut impl FnMut(SstArc),
    ) {
        let s = from.time + dur;
        if self.admissible(node, s, state) {
            f(SstArc {
                from,
                to: SstVertex { node, time: s, state },
                kind,
            });
        }
    }

    /// Waiting arcs out of `v` (at most one).
    pub fn for_each_wait(&self, v: SstVertex, mut f: impl FnMut(SstArc)) {
        let t = v.time;
        let kind = match self.aug.kind(v.node) {
            AugNode::Physical(_) => ArcKind::Wait,
            AugNode::Pickup(p) if t < self.passengers[p].pickup_window.latest => ArcKind::Wait,
            AugNode::Delivery(p) if t < self.passengers[p].dropoff_window.latest => ArcKind::Wait,
            AugNode::OriginDepot(u) | AugNode::DestDepot(u) if u == self.vehicle_index => ArcKind::DepotWait,
            _ => return,
        };
        self.emit(v, v.node, 1, v.state, kind, &mut f);
    }

    /// Movement and service arcs out of `v`, in a fixed order.
    pub fn for_each_move(&self, v: SstVertex, mut f: impl FnMut(SstArc)) {
        let (t, w) = (v.time, v.state);
        let aug = self.aug;
        match aug.kind(v.node) {
            AugNode::Physical(i) => {
                for &k in aug.base.out_links(i) {
                    let link = aug.base.link(k);
                    let dur = link.profile.duration_at(t);
                    self.emit(v, link.to, dur, w, ArcKind::Transport, &mut f);
                }
                for &p in aug.pickups_at(i) {
                    let Some(l) = self.local_index(p) else { continue };
                    let Some(next) = self.space.pickup(w, l) else {
                        continue;
                    };
                    let pax = &self.passengers[p];
                    if t + pax.service_time <= pax.pickup_window.latest {
                        self.emit(
                            v,
                            aug.pickup_dummy(p),
                            pax.service_time,
                            next,
                            ArcKind::Pickup(p),
                            &mut f,
                        );
                    }
                }
                for &p in aug.deliveries_at(i) {
                    let Some(l) = self.local_index(p) else { continue };
                    if !self.space.state(w).contains(l) {
                        continue;
                    }
                    let pax = &self.passengers[p];
                    if t + pax.service_time <= pax.dropoff_window.latest {
                        self.emit(
                            v,
                            aug.delivery_dummy(p),
                            pax.service_time,
                            w,
                            ArcKind::Transport,
                            &mut f,
                        );
                    }
                }
                if i == self.end_node && w == 0 {
                    let prep = self.vehicle.preparation_time;
                    self.emit(
                        v,
                        aug.dest_depot(self.vehicle_index),
                        prep,
                        w,
                        ArcKind::Transport,
                        &mut f,
                    );
                }
            }
            AugNode::Pickup(p) => {
                let pax = &self.passengers[p];
                if pax.pickup_window.contains(t) {
                    let o = aug.attachment(v.node);
                    self.emit(v, o, pax.service_time, w, ArcKind::Transport, &mut f);
                }
            }
            AugNode::Delivery(p) => {
                let pax = &self.passengers[p];
                let Some(l) = self.local_index(p) else { return };
                if pax.dropoff_window.contains(t) {
                    if let Some(next) = self.space.dropoff(w, l) {
                        let d = aug.attachment(v.node);
                        self.emit(v, d, pax.service_time, next, ArcKind::Dropoff(p), &mut f);
                    }
                }
            }
            AugNode::OriginDepot(u) if u == self.vehicle_index => {
                let prep = self.vehicle.preparation_time;
                self.emit(v, self.start_node, prep, w, ArcKind::Transport, &mut f);
                if self.start_node == self.end_node {
                    self.emit(v, aug.dest_depot(u), 1, w, ArcKind::DepotStay, &mut f);
                }
            }
            _ => {}
        }
    }

    /// All outgoing arcs of `v`: the waiting arc first, then moves.
    pub fn outgoing_arcs(&self, v: SstVertex) -> Vec<SstArc> {
        let mut arcs = Vec::new();
        if v.time < self.vehicle.horizon.earliest || v.time > self.vehicle.horizon.latest {
            return arcs;
        }
        self.for_each_wait(v, |a| arcs.push(a));
        self.for_each_move(v, |a| arcs.push(a));
        arcs
    }
}
