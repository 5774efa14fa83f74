//! Lagrangian relaxation of the "every passenger is picked up exactly once"
//! constraint.
//!
//! Each iteration prices pickups with multipliers, solves every vehicle's
//! dynamic program independently (lower bound), then repairs that relaxed
//! solution into a schedule serving everyone exactly once (upper bound) by
//! temporarily setting pickup adjustments to `-M` (attract) or `+M` (repel).
//! Passengers no physical vehicle ends up serving fall back to their virtual
//! vehicle.

use std::collections::BTreeSet;

use rayon::prelude::*;
use rustc_hash::FxHashMap;
use serde::Serialize;

use crate::dp::{finish_path, least_cost_path, ArcCostFn, PickupAdjusted, VehiclePath, TIE_EPS};
use crate::error::{Error, Result};
use crate::io::instance::Instance;
use crate::reduce::{build_reduction_report, ReductionReport};
use crate::sst::{SstArc, VehicleSstNetwork};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LrConfig {
    pub max_iterations: usize,
    pub gap_tolerance_percent: f64,
    pub big_m: f64,
    /// Replaces every passenger's base profit (initial step size) when set.
    pub base_profit_override: Option<f64>,
    /// Worker threads for per-vehicle solves; `None` uses rayon's default.
    pub threads: Option<usize>,
    pub use_reductions: bool,
}

impl Default for LrConfig {
    fn default() -> Self {
        LrConfig {
            max_iterations: 30,
            gap_tolerance_percent: 5.0,
            big_m: 1e6,
            base_profit_override: None,
            threads: None,
            use_reductions: true,
        }
    }
}

impl LrConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_iterations < 1 {
            return Err(Error::Config("max_iterations must be at least 1".into()));
        }
        if self.gap_tolerance_percent.is_nan() || self.gap_tolerance_percent < 0.0 {
            return Err(Error::Config("gap tolerance must be >= 0".into()));
        }
        if !(self.big_m > 0.0 && self.big_m.is_finite()) {
            return Err(Error::Config("M must be positive and finite".into()));
        }
        if self
            .base_profit_override
            .is_some_and(|b| !(b > 0.0 && b.is_finite()))
        {
            return Err(Error::Config("base profit override must be positive".into()));
        }
        if self.threads == Some(0) {
            return Err(Error::Config("thread count must be at least 1".into()));
        }
        Ok(())
    }
}

/// Base arc cost plus `adjustments[p]` on every pickup arc of passenger `p`.
#[derive(Clone, Debug, PartialEq)]
pub struct GeneralizedCost {
    pub adjustments: Vec<f64>,
}

impl ArcCostFn for GeneralizedCost {
    fn cost(&self, arc: &SstArc, base: f64) -> f64 {
        PickupAdjusted {
            adjustments: &self.adjustments,
        }
        .cost(arc, base)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum AssignmentSource {
    LowerBound,
    Repaired,
}

/// Which vehicle serves each passenger. In a lower-bound assignment a
/// passenger may be picked up by several vehicles; the lowest-id physical
/// one is recorded (a virtual vehicle only when no physical one does).
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Assignment {
    pub serves: Vec<Option<usize>>,
    pub source: AssignmentSource,
}

#[derive(Clone, Debug, Serialize)]
pub struct IterationRecord {
    pub iteration: usize,
    pub lower: f64,
    pub upper: f64,
    pub best_lower: f64,
    pub best_upper: f64,
    pub gap_percent: f64,
    /// Multipliers used in this iteration.
    pub multipliers: Vec<f64>,
    pub subgradient: Vec<i64>,
    pub lower_assignment: Vec<Option<usize>>,
    pub repaired_assignment: Vec<Option<usize>>,
}

#[derive(Clone, Debug, Serialize)]
pub struct LrState {
    pub iteration: usize,
    pub multipliers: Vec<f64>,
    pub step_sizes: Vec<f64>,
    pub initial_steps: Vec<f64>,
    pub best_lower: f64,
    pub best_upper: f64,
    pub best_solution: Vec<VehiclePath>,
    pub history: Vec<IterationRecord>,
}

impl LrState {
    pub fn new(initial_steps: Vec<f64>) -> Self {
        LrState {
            iteration: 0,
            multipliers: vec![0.0; initial_steps.len()],
            step_sizes: initial_steps.clone(),
            initial_steps,
            best_lower: f64::NEG_INFINITY,
            best_upper: f64::INFINITY,
            best_solution: Vec::new(),
            history: Vec::new(),
        }
    }

    pub fn gap_percent(&self) -> f64 {
        relative_gap_percent(self.best_lower, self.best_upper)
    }

    /// Multiplier magnitudes, reported as service prices.
    pub fn prices(&self) -> Vec<f64> {
        self.multipliers.iter().map(|l| l.abs()).collect()
    }
}

/// `(UB - LB) / UB * 100`; zero when both bounds vanish together.
pub fn relative_gap_percent(lower: f64, upper: f64) -> f64 {
    if upper.abs() < 1e-9 {
        return if (upper - lower).abs() < 1e-9 {
            0.0
        } else {
            f64::INFINITY
        };
    }
    (upper - lower) / upper * 100.0
}

/// Dual objective: generalized path costs minus the multiplier sum.
pub fn dual_value(paths: &[VehiclePath], multipliers: &[f64]) -> f64 {
    let routes: f64 = paths.iter().map(|p| p.generalized_cost).sum();
    routes - multipliers.iter().sum::<f64>()
}

/// Per passenger: number of paths that pick the passenger up, minus one.
pub fn subgradient(paths: &[VehiclePath], passengers: usize) -> Vec<i64> {
    let mut visits = vec![-1i64; passengers];
    for path in paths {
        for &p in &path.served {
            visits[p] += 1;
        }
    }
    visits
}

/// One subgradient step with the current step sizes, then the diminishing
/// step `theta0 / (k + 1)` for the next iteration. Does not advance
/// `state.iteration`.
pub fn update_multipliers(state: &mut LrState, grads: &[i64]) {
    let k = state.iteration as f64;
    for (p, &g) in grads.iter().enumerate() {
        state.multipliers[p] += state.step_sizes[p] * g as f64;
        state.step_sizes[p] = state.initial_steps[p] / (k + 1.0);
    }
}

pub struct LowerBoundStep {
    pub paths: Vec<VehiclePath>,
    pub value: f64,
    pub assignment: Assignment,
}

pub struct RepairStep {
    pub paths: Vec<VehiclePath>,
    pub value: f64,
    pub assignment: Assignment,
}

#[derive(Clone, Debug, Serialize)]
pub struct SolveResult {
    pub state: LrState,
    pub best_lower: f64,
    pub best_upper: f64,
    pub gap_percent: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Repaired assignment of the best schedule.
    pub assignment: Assignment,
    /// Passengers left to their virtual vehicle in the best schedule.
    pub unserved: Vec<usize>,
    pub relaxations: u64,
}

/// Best paths of a virtual vehicle with and without serving its owner. Used
/// instead of re-running the program when the owner can be picked up at most
/// once, in which case the optimum for any multiplier is one of the two.
struct VirtualPaths {
    idle: Vec<SstArc>,
    serve: Vec<SstArc>,
    idle_base: f64,
    serve_base: f64,
}

pub struct LagrangianSolver<'a> {
    pub instance: &'a Instance,
    pub config: LrConfig,
    pub reduction: Option<ReductionReport>,
    networks: Vec<VehicleSstNetwork<'a>>,
    virtual_paths: Vec<Option<VirtualPaths>>,
    repair_cache: FxHashMap<(usize, Vec<usize>), VehiclePath>,
    pool: Option<rayon::ThreadPool>,
    relaxations: u64,
}

impl<'a> LagrangianSolver<'a> {
    pub fn new(instance: &'a Instance, config: LrConfig) -> Result<Self> {
        config.validate()?;
        let reduction = config
            .use_reductions
            .then(|| build_reduction_report(&instance.network, &instance.passengers, &instance.vehicles));
        let networks = (0..instance.vehicles.len())
            .map(|v| {
                VehicleSstNetwork::new(
                    &instance.network,
                    &instance.passengers,
                    &instance.vehicles,
                    v,
                    &instance.costs,
                    reduction.as_ref(),
                )
            })
            .collect::<Result<Vec<_>>>()?;
        let pool = match config.threads {
            Some(n) => Some(
                rayon::ThreadPoolBuilder::new()
                    .num_threads(n)
                    .build()
                    .map_err(|e| Error::Config(format!("cannot start worker pool: {e}")))?,
            ),
            None => None,
        };
        let mut solver = LagrangianSolver {
            instance,
            config,
            reduction,
            networks,
            virtual_paths: Vec::new(),
            repair_cache: FxHashMap::default(),
            pool,
            relaxations: 0,
        };
        solver.prepare_virtual_vehicles()?;
        Ok(solver)
    }

    fn run<T: Send>(&self, f: impl Fn(usize) -> T + Sync + Send, items: &[usize]) -> Vec<T> {
        let work = || items.par_iter().map(|&v| f(v)).collect();
        match &self.pool {
            Some(pool) => pool.install(work),
            None => work(),
        }
    }

    fn adjustments_with(&self, p: usize, value: f64) -> Vec<f64> {
        let mut adj = vec![self.config.big_m; self.instance.passengers.len()];
        adj[p] = value;
        adj
    }

    /// Checks that every passenger's virtual vehicle can serve its owner and
    /// caches the two candidate paths where that is exact.
    fn prepare_virtual_vehicles(&mut self) -> Result<()> {
        let inst = self.instance;
        let m = self.config.big_m;
        let owners: Vec<usize> = (0..inst.passengers.len()).collect();
        let solved = self.run(
            |p| {
                let v = inst.virtual_vehicle(p);
                let net = &self.networks[v];
                let serve = least_cost_path(
                    net,
                    &GeneralizedCost {
                        adjustments: self.adjustments_with(p, -m),
                    },
                );
                let idle = least_cost_path(
                    net,
                    &GeneralizedCost {
                        adjustments: self.adjustments_with(p, m),
                    },
                );
                (serve, idle)
            },
            &owners,
        );
        let mut cache = Vec::with_capacity(inst.vehicles.len());
        cache.resize_with(inst.physical_vehicles, || None);
        for (p, ((serve, s1), (idle, s2))) in solved.into_iter().enumerate() {
            self.relaxations += s1.relaxations + s2.relaxations;
            let serve = serve.filter(|path| path.serves(p)).ok_or_else(|| {
                Error::Infeasible(format!(
                    "passenger {} cannot be served even by its dedicated virtual vehicle",
                    inst.passengers[p].id
                ))
            })?;
            let idle = idle.filter(|path| path.served.is_empty());
            let entry = match idle {
                Some(idle) if serve.pickups_of(p) == 1 => Some(VirtualPaths {
                    serve_base: serve.base_cost,
                    idle_base: idle.base_cost,
                    idle: idle.arcs,
                    serve: serve.arcs,
                }),
                _ => None,
            };
            cache.push(entry);
        }
        self.virtual_paths = cache;
        Ok(())
    }

    /// Least generalized-cost path for vehicle `v`.
    fn vehicle_path(&self, v: usize, cost: &GeneralizedCost) -> (Option<VehiclePath>, u64) {
        let net = &self.networks[v];
        if let Some(Some(cached)) = self.virtual_paths.get(v) {
            let owner = self.instance.vehicles[v]
                .owner
                .expect("virtual vehicles have owners");
            let serve = cached.serve_base + cost.adjustments[owner];
            let arcs = if serve < cached.idle_base - TIE_EPS {
                cached.serve.clone()
            } else {
                cached.idle.clone()
            };
            return (Some(finish_path(net, arcs, cost)), 0);
        }
        let (path, stats) = least_cost_path(net, cost);
        (path, stats.relaxations)
    }

    fn solve_all(&mut self, costs: &[GeneralizedCost]) -> Result<Vec<VehiclePath>> {
        let all: Vec<usize> = (0..self.networks.len()).collect();
        let results = self.run(|v| self.vehicle_path(v, &costs[v]), &all);
        let mut paths = Vec::with_capacity(results.len());
        for (v, (path, n)) in results.into_iter().enumerate() {
            self.relaxations += n;
            let path = path.ok_or_else(|| {
                Error::Infeasible(format!(
                    "vehicle {} has no feasible depot-to-depot schedule",
                    self.instance.vehicles[v].label()
                ))
            })?;
            paths.push(path);
        }
        Ok(paths)
    }

    fn read_assignment(&self, paths: &[VehiclePath], source: AssignmentSource) -> Assignment {
        let inst = self.instance;
        let mut order: Vec<usize> = (0..inst.physical_vehicles).collect();
        order.sort_by_key(|&v| inst.vehicles[v].id);
        order.extend(inst.physical_vehicles..inst.vehicles.len());
        let mut serves = vec![None; inst.passengers.len()];
        for v in order {
            for &p in &paths[v].served {
                serves[p].get_or_insert(v);
            }
        }
        Assignment { serves, source }
    }

    /// Solves every vehicle under the current multipliers and updates LB*.
    pub fn lower_bound_iteration(&mut self, state: &mut LrState) -> Result<LowerBoundStep> {
        let cost = GeneralizedCost {
            adjustments: state.multipliers.clone(),
        };
        let costs = vec![cost; self.networks.len()];
        let paths = self.solve_all(&costs)?;
        let value = dual_value(&paths, &state.multipliers);
        state.best_lower = state.best_lower.max(value);
        let assignment = self.read_assignment(&paths, AssignmentSource::LowerBound);
        Ok(LowerBoundStep {
            paths,
            value,
            assignment,
        })
    }

    /// Turns a lower-bound assignment into a schedule serving every passenger
    /// exactly once and updates UB* and Y* when it improves.
    pub fn upper_bound_repair(&mut self, state: &mut LrState, lower: &Assignment) -> Result<RepairStep> {
        let inst = self.instance;
        let n = inst.passengers.len();
        let m = self.config.big_m;

        // Claim pass: the lowest-id physical vehicle picking p up keeps it.
        let mut designated: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); inst.physical_vehicles];
        for (p, v) in lower.serves.iter().enumerate() {
            if let Some(v) = *v {
                if !inst.is_virtual(v) {
                    designated[v].insert(p);
                }
            }
        }
        let missing: Vec<usize> = (0..inst.physical_vehicles)
            .filter(|&v| {
                !self
                    .repair_cache
                    .contains_key(&(v, designated[v].iter().copied().collect()))
            })
            .collect();
        let solved = self.run(
            |v| {
                let mut adj = vec![m; n];
                for &p in &designated[v] {
                    adj[p] = -m;
                }
                self.vehicle_path(v, &GeneralizedCost { adjustments: adj })
            },
            &missing,
        );
        for (v, (path, count)) in missing.into_iter().zip(solved) {
            self.relaxations += count;
            let path = path.ok_or_else(|| {
                Error::Infeasible(format!(
                    "vehicle {} has no feasible depot-to-depot schedule",
                    inst.vehicles[v].label()
                ))
            })?;
            self.repair_cache
                .insert((v, designated[v].iter().copied().collect()), path);
        }

        let mut paths: Vec<VehiclePath> = Vec::with_capacity(inst.vehicles.len());
        let mut served_by = vec![None; n];
        for (v, set) in designated.iter().enumerate() {
            let key = (v, set.iter().copied().collect::<Vec<_>>());
            let base = self.repair_cache[&key].clone();
            for &p in &base.served {
                served_by[p].get_or_insert(v);
            }
            // Report costs without the temporary +-M terms.
            let net = &self.networks[v];
            paths.push(finish_path(
                net,
                base.arcs,
                &GeneralizedCost {
                    adjustments: vec![0.0; n],
                },
            ));
        }
        for (p, served) in served_by.iter_mut().enumerate() {
            let v = inst.virtual_vehicle(p);
            let value = if served.is_some() { m } else { -m };
            let (path, count) = self.vehicle_path(
                v,
                &GeneralizedCost {
                    adjustments: self.adjustments_with(p, value),
                },
            );
            self.relaxations += count;
            let path = path.expect("virtual vehicles were checked to be feasible");
            if served.is_none() && path.serves(p) {
                *served = Some(v);
            }
            paths.push(finish_path(
                &self.networks[v],
                path.arcs,
                &GeneralizedCost {
                    adjustments: vec![0.0; n],
                },
            ));
        }
        let value: f64 = paths.iter().map(|p| p.base_cost).sum();
        if value < state.best_upper {
            state.best_upper = value;
            state.best_solution = paths.clone();
        }
        Ok(RepairStep {
            paths,
            value,
            assignment: Assignment {
                serves: served_by,
                source: AssignmentSource::Repaired,
            },
        })
    }

    pub fn initial_state(&self) -> LrState {
        let steps = self
            .instance
            .passengers
            .iter()
            .map(|p| self.config.base_profit_override.unwrap_or(p.base_profit))
            .collect();
        LrState::new(steps)
    }

    /// Runs the full loop until the gap tolerance or the iteration limit.
    pub fn solve(&mut self) -> Result<SolveResult> {
        let mut state = self.initial_state();
        let n = self.instance.passengers.len();
        let mut converged = false;
        for k in 0..self.config.max_iterations {
            state.iteration = k;
            let multipliers = state.multipliers.clone();
            let lower = self.lower_bound_iteration(&mut state)?;
            let grads = subgradient(&lower.paths, n);
            let repaired = self.upper_bound_repair(&mut state, &lower.assignment)?;
            let gap = state.gap_percent();
            state.history.push(IterationRecord {
                iteration: k + 1,
                lower: lower.value,
                upper: repaired.value,
                best_lower: state.best_lower,
                best_upper: state.best_upper,
                gap_percent: gap,
                multipliers,
                subgradient: grads.clone(),
                lower_assignment: lower.assignment.serves,
                repaired_assignment: repaired.assignment.serves,
            });
            if gap <= self.config.gap_tolerance_percent {
                converged = true;
                break;
            }
            update_multipliers(&mut state, &grads);
        }
        let assignment = self.read_assignment(&state.best_solution, AssignmentSource::Repaired);
        let unserved = (0..n)
            .filter(|&p| assignment.serves[p].is_none_or(|v| self.instance.is_virtual(v)))
            .collect();
        Ok(SolveResult {
            best_lower: state.best_lower,
            best_upper: state.best_upper,
            gap_percent: state.gap_percent(),
            iterations: state.history.len(),
            converged,
            assignment,
            unserved,
            relaxations: self.relaxations,
            state,
        })
    }

    pub fn relaxations(&self) -> u64 {
        self.relaxations
    }

    pub fn network(&self, v: usize) -> &VehicleSstNetwork<'a> {
        &self.networks[v]
    }
}

/// Convenience wrapper: build a solver and run it.
pub fn solve(instance: &Instance, config: LrConfig) -> Result<SolveResult> {
    LagrangianSolver::new(instance, config)?.solve()
}
