//! Output documents: solutions, iteration histories, reduction reports and
//! run manifests.

use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::dp::{extract_trajectory, TrajectoryRow, VehiclePath};
use crate::error::Result;
use crate::io::instance::Instance;
use crate::lr::{IterationRecord, SolveResult};
use crate::reduce::{ReductionReport, RuleId};
use crate::sst::VehicleSstNetwork;

pub const SOLUTION_VERSION: u32 = 1;
pub const HISTORY_VERSION: u32 = 1;
pub const REDUCTION_VERSION: u32 = 1;
pub const MANIFEST_VERSION: u32 = 1;

#[derive(Clone, Debug, Serialize)]
pub struct VehicleSchedule {
    pub vehicle: String,
    pub id: u32,
    #[serde(rename = "virtual")]
    pub is_virtual: bool,
    /// Passenger ids picked up along the route.
    pub serves: Vec<u32>,
    pub cost: f64,
    pub trajectory: Vec<TrajectoryRow>,
}

impl VehicleSchedule {
    pub fn new(instance: &Instance, net: &VehicleSstNetwork, path: &VehiclePath) -> Self {
        let v = &instance.vehicles[path.vehicle];
        VehicleSchedule {
            vehicle: v.label(),
            id: v.id,
            is_virtual: v.is_virtual(),
            serves: path.served.iter().map(|&p| instance.passengers[p].id).collect(),
            cost: path.base_cost,
            trajectory: extract_trajectory(net, path),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SolutionDocument {
    pub format_version: u32,
    pub total_cost: f64,
    pub lower_bound: f64,
    pub gap_percent: f64,
    pub converged: bool,
    pub iterations: usize,
    /// Passenger ids left to their virtual vehicle.
    pub unserved: Vec<u32>,
    pub vehicles: Vec<VehicleSchedule>,
}

impl SolutionDocument {
    /// Schedules of the best solution; idle virtual vehicles are omitted.
    pub fn new<'n, 'a: 'n>(
        instance: &Instance,
        result: &SolveResult,
        network: impl Fn(usize) -> &'n VehicleSstNetwork<'a>,
    ) -> Self {
        let vehicles = result
            .state
            .best_solution
            .iter()
            .filter(|p| !instance.is_virtual(p.vehicle) || !p.served.is_empty())
            .map(|p| VehicleSchedule::new(instance, network(p.vehicle), p))
            .collect();
        SolutionDocument {
            format_version: SOLUTION_VERSION,
            total_cost: result.best_upper,
            lower_bound: result.best_lower,
            gap_percent: result.gap_percent,
            converged: result.converged,
            iterations: result.iterations,
            unserved: result
                .unserved
                .iter()
                .map(|&p| instance.passengers[p].id)
                .collect(),
            vehicles,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct HistoryDocument<'a> {
    pub format_version: u32,
    pub passengers: Vec<u32>,
    pub iterations: &'a [IterationRecord],
}

impl<'a> HistoryDocument<'a> {
    pub fn new(instance: &Instance, history: &'a [IterationRecord]) -> Self {
        HistoryDocument {
            format_version: HISTORY_VERSION,
            passengers: instance.passengers.iter().map(|p| p.id).collect(),
            iterations: history,
        }
    }
}

/// Delimited history with one multiplier column per passenger.
pub fn history_csv(instance: &Instance, history: &[IterationRecord]) -> String {
    let mut out = String::from("iteration,lower,upper,best_lower,best_upper,gap_percent");
    for p in &instance.passengers {
        out.push_str(&format!(",lambda_{}", p.label()));
    }
    out.push('\n');
    for r in history {
        out.push_str(&format!(
            "{},{},{},{},{},{}",
            r.iteration, r.lower, r.upper, r.best_lower, r.best_upper, r.gap_percent
        ));
        for l in &r.multipliers {
            out.push_str(&format!(",{l}"));
        }
        out.push('\n');
    }
    out
}

#[derive(Clone, Debug, Serialize)]
pub struct PairEntry {
    pub passengers: [u32; 2],
    pub rule: RuleId,
}

#[derive(Clone, Debug, Serialize)]
pub struct Exclusion {
    pub id: u32,
    pub rule: RuleId,
}

#[derive(Clone, Debug, Serialize)]
pub struct VehicleExclusions {
    pub vehicle: String,
    pub inaccessible_nodes: Vec<Exclusion>,
    pub inaccessible_passengers: Vec<Exclusion>,
}

/// Reduction report keyed by node and passenger ids.
#[derive(Clone, Debug, Serialize)]
pub struct ReductionDocument {
    pub format_version: u32,
    pub forbidden_pairs: Vec<PairEntry>,
    pub vehicles: Vec<VehicleExclusions>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub shared_ride_probability: Option<f64>,
}

impl ReductionDocument {
    pub fn new(instance: &Instance, report: &ReductionReport) -> Self {
        let pid = |p: usize| instance.passengers[p].id;
        let base = &instance.network.base;
        ReductionDocument {
            format_version: REDUCTION_VERSION,
            forbidden_pairs: report
                .forbidden_pairs
                .iter()
                .map(|f| PairEntry {
                    passengers: [pid(f.first), pid(f.second)],
                    rule: f.rule,
                })
                .collect(),
            vehicles: report
                .per_vehicle
                .iter()
                .zip(instance.vehicles.iter())
                .map(|(reach, v)| VehicleExclusions {
                    vehicle: v.label(),
                    inaccessible_nodes: reach
                        .inaccessible_nodes
                        .iter()
                        .map(|j| Exclusion {
                            id: base.node_id(j.index).0,
                            rule: j.rule,
                        })
                        .collect(),
                    inaccessible_passengers: reach
                        .inaccessible_passengers
                        .iter()
                        .map(|j| Exclusion {
                            id: pid(j.index),
                            rule: j.rule,
                        })
                        .collect(),
                })
                .collect(),
            shared_ride_probability: report.advisory.as_ref().map(|a| a.probability),
        }
    }

    /// Human-readable listing, one justified entry per line.
    pub fn to_text(&self) -> String {
        let rule = |r: RuleId| match r {
            RuleId::NoOverlap => "pickup and dropoff windows never overlap",
            RuleId::InsufficientTravel => "travel between the two requests is too slow in both orders",
            RuleId::OutOfReach => "cannot be reached and left within the vehicle horizon",
        };
        let mut out = format!("forbidden pairs: {}\n", self.forbidden_pairs.len());
        for f in &self.forbidden_pairs {
            out.push_str(&format!(
                "  p{} + p{}: {}\n",
                f.passengers[0],
                f.passengers[1],
                rule(f.rule)
            ));
        }
        for v in &self.vehicles {
            if v.inaccessible_nodes.is_empty() && v.inaccessible_passengers.is_empty() {
                continue;
            }
            out.push_str(&format!("vehicle {}:\n", v.vehicle));
            for n in &v.inaccessible_nodes {
                out.push_str(&format!("  node {}: {}\n", n.id, rule(n.rule)));
            }
            for p in &v.inaccessible_passengers {
                out.push_str(&format!("  passenger p{}: {}\n", p.id, rule(p.rule)));
            }
        }
        if let Some(prob) = self.shared_ride_probability {
            out.push_str(&format!("estimated shared-ride probability: {prob:.4}\n"));
        }
        out
    }
}

/// Record of one command-line run.
#[derive(Clone, Debug, Serialize)]
pub struct RunManifest {
    pub format_version: u32,
    pub tool: String,
    pub version: String,
    pub command: String,
    pub config: serde_json::Value,
    pub inputs: Vec<PathBuf>,
    pub outputs: Vec<PathBuf>,
    pub warnings: Vec<String>,
    pub elapsed_seconds: f64,
}

impl RunManifest {
    pub fn new(command: &str, config: serde_json::Value) -> Self {
        RunManifest {
            format_version: MANIFEST_VERSION,
            tool: env!("CARGO_PKG_NAME").to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            command: command.to_string(),
            config,
            inputs: Vec::new(),
            outputs: Vec::new(),
            warnings: Vec::new(),
            elapsed_seconds: 0.0,
        }
    }
}

/// Writes `value` as pretty JSON.
pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value).expect("output documents always serialize");
    std::fs::write(path, text + "\n")?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::io::gen::{distant_origins_instance, shared_ride_instance};
    use crate::lr::{LagrangianSolver, LrConfig};
    use crate::reduce::build_reduction_report;

    #[test]
    fn history_csv_has_one_multiplier_column_per_passenger() {
        let inst = shared_ride_instance();
        let mut solver = LagrangianSolver::new(&inst, LrConfig::default()).unwrap();
        let result = solver.solve().unwrap();
        let csv = history_csv(&inst, &result.state.history);
        let mut lines = csv.lines();
        assert_eq!(
            lines.next().unwrap(),
            "iteration,lower,upper,best_lower,best_upper,gap_percent,lambda_p1,lambda_p2"
        );
        assert_eq!(lines.count(), result.iterations);
        let doc = SolutionDocument::new(&inst, &result, |v| solver.network(v));
        assert!(doc.vehicles.iter().all(|v| !v.trajectory.is_empty()));
    }

    #[test]
    fn reduction_text_names_the_rule() {
        let inst = distant_origins_instance();
        let report = build_reduction_report(&inst.network, &inst.passengers, &inst.vehicles);
        let doc = ReductionDocument::new(&inst, &report);
        assert_eq!(doc.forbidden_pairs.len(), 1);
        assert!(doc.to_text().contains("p1 + p2: travel between"));
    }
}
