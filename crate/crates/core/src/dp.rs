//! Forward dynamic programming over a vehicle's state-space-time network.
//!
//! Time strictly increases along every arc, so sweeping time layers in order
//! finalises every label before it is expanded. Within a layer, vertices are
//! visited in `(node, state)` order; waiting arcs of the whole layer are
//! relaxed before movement arcs. A label is only replaced by a strictly
//! cheaper one (beyond `TIE_EPS`), so the first writer wins ties.

use rustc_hash::FxHashMap;
use serde::Serialize;

use crate::network::Time;
use crate::sst::{ArcKind, SstArc, SstVertex, VehicleSstNetwork};

/// Improvements smaller than this are treated as ties.
pub const TIE_EPS: f64 = 1e-9;

/// Cost assigned to an arc during the search, given its base cost.
pub trait ArcCostFn {
    fn cost(&self, arc: &SstArc, base: f64) -> f64;
}

impl<F: Fn(&SstArc, f64) -> f64> ArcCostFn for F {
    fn cost(&self, arc: &SstArc, base: f64) -> f64 {
        self(arc, base)
    }
}

/// Plain routing cost.
pub struct BaseCost;

impl ArcCostFn for BaseCost {
    fn cost(&self, _arc: &SstArc, base: f64) -> f64 {
        base
    }
}

/// Base cost plus a per-passenger adjustment on pickup arcs.
#[derive(Clone, Debug)]
pub struct PickupAdjusted<'a> {
    pub adjustments: &'a [f64],
}

impl ArcCostFn for PickupAdjusted<'_> {
    fn cost(&self, arc: &SstArc, base: f64) -> f64 {
        match arc.kind {
            ArcKind::Pickup(p) => base + self.adjustments[p],
            _ => base,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct VehiclePath {
    pub vehicle: usize,
    pub arcs: Vec<SstArc>,
    pub generalized_cost: f64,
    pub base_cost: f64,
    /// Global passenger indices picked up along the path, ascending.
    pub served: Vec<usize>,
}

impl VehiclePath {
    pub fn serves(&self, p: usize) -> bool {
        self.served.binary_search(&p).is_ok()
    }

    /// Number of pickup arcs for passenger `p`.
    pub fn pickups_of(&self, p: usize) -> usize {
        self.arcs.iter().filter(|a| a.kind == ArcKind::Pickup(p)).count()
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct DpStats {
    /// Label update attempts (arcs relaxed).
    pub relaxations: u64,
    pub labels: u64,
}

#[derive(Clone, Copy, Debug)]
struct Label {
    cost: f64,
    pred: Option<(usize, u32)>,
    kind: ArcKind,
    pred_time: Time,
}

type Layer = FxHashMap<(usize, u32), Label>;

/// Least-cost source-to-sink path under `xi`, or `None` when the sink is
/// unreachable.
pub fn least_cost_path(net: &VehicleSstNetwork, xi: &impl ArcCostFn) -> (Option<VehiclePath>, DpStats) {
    let source = net.source();
    let sink = net.sink();
    let e = source.time;
    let span = (sink.time - e) as usize + 1;
    let mut layers: Vec<Layer> = (0..span).map(|_| Layer::default()).collect();
    let mut stats = DpStats::default();
    layers[0].insert(
        (source.node, source.state as u32),
        Label {
            cost: 0.0,
            pred: None,
            kind: ArcKind::Wait,
            pred_time: e,
        },
    );

    let mut keys: Vec<(usize, u32)> = Vec::new();
    for k in 0..span {
        if layers[k].is_empty() {
            continue;
        }
        let t = e + k as Time;
        keys.clear();
        keys.extend(layers[k].keys().copied());
        keys.sort_unstable();
        stats.labels += keys.len() as u64;
        let (done, future) = layers.split_at_mut(k + 1);
        let current = &done[k];
        let mut relax = |arc: SstArc, from: f64| {
            stats.relaxations += 1;
            let c = from + xi.cost(&arc, net.arc_cost(&arc));
            let slot = &mut future[(arc.to.time - t - 1) as usize];
            let key = (arc.to.node, arc.to.state as u32);
            let label = Label {
                cost: c,
                pred: Some((arc.from.node, arc.from.state as u32)),
                kind: arc.kind,
                pred_time: t,
            };
            slot.entry(key)
                .and_modify(|old| {
                    if c < old.cost - TIE_EPS {
                        *old = label;
                    }
                })
                .or_insert(label);
        };
        for &(node, state) in &keys {
            let v = SstVertex {
                node,
                time: t,
                state: state as usize,
            };
            let from = current[&(node, state)].cost;
            net.for_each_wait(v, |a| relax(a, from));
        }
        for &(node, state) in &keys {
            let v = SstVertex {
                node,
                time: t,
                state: state as usize,
            };
            let from = current[&(node, state)].cost;
            net.for_each_move(v, |a| relax(a, from));
        }
    }

    let Some(end) = layers[span - 1].get(&(sink.node, sink.state as u32)).copied() else {
        return (None, stats);
    };
    let mut arcs = Vec::new();
    let mut cur = (sink.node, sink.state as u32, sink.time, end);
    while let Some((pn, ps)) = cur.3.pred {
        let pt = cur.3.pred_time;
        let from = SstVertex {
            node: pn,
            time: pt,
            state: ps as usize,
        };
        let to = SstVertex {
            node: cur.0,
            time: cur.2,
            state: cur.1 as usize,
        };
        arcs.push(SstArc {
            from,
            to,
            kind: cur.3.kind,
        });
        let label = layers[(pt - e) as usize][&(pn, ps)];
        cur = (pn, ps, pt, label);
    }
    arcs.reverse();
    let path = finish_path(net, arcs, xi);
    (Some(path), stats)
}

/// Assembles a path record from an arc sequence, recomputing both costs.
pub fn finish_path(net: &VehicleSstNetwork, arcs: Vec<SstArc>, xi: &impl ArcCostFn) -> VehiclePath {
    let mut base_cost = 0.0;
    let mut generalized_cost = 0.0;
    let mut served = Vec::new();
    for a in &arcs {
        let c = net.arc_cost(a);
        base_cost += c;
        generalized_cost += xi.cost(a, c);
        if let ArcKind::Pickup(p) = a.kind {
            served.push(p);
        }
    }
    served.sort_unstable();
    served.dedup();
    VehiclePath {
        vehicle: net.vehicle_index,
        arcs,
        generalized_cost,
        base_cost,
        served,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TrajectoryRow {
    pub time: Time,
    pub node: String,
    pub state: String,
    /// Cost of the arc that reached this row (0 on the first row).
    pub cost: f64,
    pub cumulative: f64,
    /// Running sum of per-arc costs rounded to two decimals.
    pub display_cumulative: f64,
}

fn round2(x: f64) -> f64 {
    (x * 100.0).round() / 100.0
}

/// One row per visited vertex, starting with the source.
pub fn extract_trajectory(net: &VehicleSstNetwork, path: &VehiclePath) -> Vec<TrajectoryRow> {
    let Some(first) = path.arcs.first() else {
        return Vec::new();
    };
    let row = |v: SstVertex, cost, cumulative, display| TrajectoryRow {
        time: v.time,
        node: net.aug.label(v.node).to_string(),
        state: net.onboard_label(v.state),
        cost,
        cumulative,
        display_cumulative: display,
    };
    let mut rows = vec![row(first.from, 0.0, 0.0, 0.0)];
    let (mut exact, mut display) = (0.0, 0.0);
    for a in &path.arcs {
        let c = net.arc_cost(a);
        exact += c;
        display = round2(display + round2(c));
        rows.push(row(a.to, c, exact, display));
    }
    rows
}

/// Delimited rendering with columns `time,node,state,cost,cumulative`; costs
/// shown at two decimals, the cumulative column summing displayed costs.
pub fn trajectory_csv(rows: &[TrajectoryRow]) -> String {
    let mut out = String::from("time,node,state,cost,cumulative\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{:.2},{:.2}\n",
            r.time, r.node, r.state, r.cost, r.display_cumulative
        ));
    }
    out
}
