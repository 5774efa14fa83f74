//! Acceptance criteria. Each test prints one PASS/FAIL line.

mod common;

use std::time::{Duration, Instant};

use sstroute::dp::{extract_trajectory, least_cost_path, BaseCost, PickupAdjusted};
use sstroute::io::gen::{
    distant_origins_instance, large_instance, random_instance, scenario_instance, shared_ride_instance,
    LargeConfig, RandomConfig, Scenario,
};
use sstroute::io::Instance;
use sstroute::lr::{relative_gap_percent, LagrangianSolver, LrConfig, SolveResult};
use sstroute::network::{CostParameters, NodeId, Time, Vehicle, VehicleKind};
use sstroute::reduce::{shared_ride_probability, shortest_travel_time};
use sstroute::setpart::solve_instance;
use sstroute::sst::{arc_cost, ArcKind, SstArc, SstVertex, VehicleSstNetwork};
use sstroute::states::enumerate_states;

fn report(n: u32, name: &str, pass: bool, detail: &str) {
    println!(
        "criterion {n:>2} [{name}]: {} {detail}",
        if pass { "PASS" } else { "FAIL" }
    );
}

fn network(inst: &Instance, v: usize) -> VehicleSstNetwork<'_> {
    VehicleSstNetwork::new(
        &inst.network,
        &inst.passengers,
        &inst.vehicles,
        v,
        &inst.costs,
        None,
    )
    .unwrap()
}

fn exhaustive_config() -> LrConfig {
    LrConfig {
        gap_tolerance_percent: 0.0,
        threads: Some(1),
        ..LrConfig::default()
    }
}

fn small_config(seed: u64, vehicles: usize, passengers: usize) -> RandomConfig {
    RandomConfig {
        nodes: 3 + (seed % 3) as u32,
        passengers,
        vehicles,
        horizon: 14 + (seed % 5) as Time,
        ..RandomConfig::default()
    }
}

#[test]
fn criterion_01_shared_ride_trajectory() {
    let start = Instant::now();
    let inst = shared_ride_instance();
    let net = network(&inst, 0);
    let forced = vec![-1e6; inst.passengers.len()];
    let (path, _) = least_cost_path(&net, &PickupAdjusted { adjustments: &forced });
    let path = path.expect("route exists");
    let rows = extract_trajectory(&net, &path);
    let elapsed = start.elapsed();

    let expected: [(Time, &str, &str); 18] = [
        (1, "o'_1", "w0"),
        (2, "4", "w0"),
        (4, "2", "w0"),
        (5, "o_1", "[p1]"),
        (6, "2", "[p1]"),
        (7, "o_2", "[p1 p2]"),
        (8, "o_2", "[p1 p2]"),
        (9, "2", "[p1 p2]"),
        (10, "5", "[p1 p2]"),
        (11, "6", "[p1 p2]"),
        (12, "3", "[p1 p2]"),
        (13, "d_1", "[p1 p2]"),
        (14, "3", "[p2]"),
        (15, "d_2", "[p2]"),
        (16, "3", "w0"),
        (18, "1", "w0"),
        (19, "d'_1", "w0"),
        (20, "d'_1", "w0"),
    ];
    let got: Vec<(Time, &str, &str)> = rows
        .iter()
        .map(|r| (r.time, r.node.as_str(), r.state.as_str()))
        .collect();
    let last = rows.last().unwrap();
    let hand = 17.0 * 22.0 / 60.0 + 15.0 / 60.0;
    let sequence_ok = got == expected;
    let display_ok = (last.display_cumulative - 6.52).abs() < 1e-9;
    let exact_ok = (path.base_cost - hand).abs() <= 1e-4 && (path.base_cost - 6.4833).abs() <= 1e-4;
    let pass = sequence_ok && display_ok && exact_ok && elapsed < Duration::from_secs(1);
    report(
        1,
        "shared-ride trajectory",
        pass,
        &format!(
            "sequence={sequence_ok} display={:.2} exact={:.4} hand={hand:.4} time={elapsed:?}",
            last.display_cumulative, path.base_cost
        ),
    );
    assert!(sequence_ok, "trajectory {got:?}");
    assert!(pass);
}

#[test]
fn criterion_02_arc_cost_arithmetic() {
    let params = CostParameters::default();
    let vehicle = Vehicle {
        id: 1,
        kind: VehicleKind::Physical,
        start_depot: NodeId(1),
        end_depot: NodeId(1),
        horizon: (0, 30).into(),
        capacity: 2,
        preparation_time: 1,
        owner: None,
    };
    let arc = |kind, from: Time, to: Time| SstArc {
        from: SstVertex {
            node: 0,
            time: from,
            state: 0,
        },
        to: SstVertex {
            node: 1,
            time: to,
            state: 0,
        },
        kind,
    };
    let transport = arc_cost(&params, &vehicle, &arc(ArcKind::Transport, 2, 4));
    let wait = arc_cost(&params, &vehicle, &arc(ArcKind::Wait, 7, 8));
    let depot = arc_cost(&params, &vehicle, &arc(ArcKind::DepotWait, 0, 1));
    let pass = (transport - 0.733_333_3).abs() <= 1e-6 && wait == 0.25 && depot == 0.0;
    report(
        2,
        "arc costs",
        pass,
        &format!("transport={transport:.6} wait={wait} depot={depot}"),
    );
    assert!(pass);
}

#[test]
fn criterion_03_state_counts() {
    let start = Instant::now();
    let mut mismatches = Vec::new();
    for n in 0..=12u32 {
        for cap in 1..=4u32 {
            let space = enumerate_states(n as usize, cap as usize, &[]).unwrap();
            let expected = common::subsets_up_to(n, cap);
            if space.len() != expected {
                mismatches.push((n, cap, space.len(), expected));
            }
        }
    }
    let three_two = enumerate_states(3, 2, &[]).unwrap().len();
    let elapsed = start.elapsed();
    let pass = mismatches.is_empty() && three_two == 7 && elapsed < Duration::from_secs(5);
    report(
        3,
        "state counts",
        pass,
        &format!("mismatches={mismatches:?} |P|=3,cap=2 -> {three_two} time={elapsed:?}"),
    );
    assert!(pass);
}

#[test]
fn criterion_04_shared_ride_probability() {
    let exact = shared_ride_probability(240.0, 60.0) == 7.0 / 16.0;
    let mut worst: f64 = 0.0;
    for (k, (h, tau)) in [(240.0, 60.0), (240.0, 120.0), (100.0, 25.0)]
        .into_iter()
        .enumerate()
    {
        let mc = common::monte_carlo_overlap(h, tau, 1_000_000, 42 + k as u64);
        worst = worst.max((mc - shared_ride_probability(h, tau)).abs());
    }
    let pass = exact && worst <= 0.002;
    report(
        4,
        "overlap probability",
        pass,
        &format!("7/16 exact={exact} worst MC deviation={worst:.5}"),
    );
    assert!(pass);
}

#[test]
fn criterion_05_dp_matches_enumeration() {
    use rand::{Rng, SeedableRng};
    let start = Instant::now();
    let mut checked = 0;
    let mut skipped = 0;
    let mut mismatches = Vec::new();
    let mut seed = 0u64;
    while checked < 50 {
        let inst = random_instance(&small_config(seed, 1, 1 + (seed % 3) as usize), seed);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        seed += 1;
        let net = network(&inst, 0);
        if common::count_paths(&net, 300_000).is_none() {
            skipped += 1;
            continue;
        }
        let adjustments: Vec<f64> = (0..inst.passengers.len())
            .map(|_| rng.gen_range(-15.0..5.0))
            .collect();
        let xi = PickupAdjusted {
            adjustments: &adjustments,
        };
        let dp = least_cost_path(&net, &xi).0.map(|p| p.generalized_cost);
        let brute = common::brute_force_min_cost(&net, &xi);
        let same = match (dp, brute) {
            (Some(a), Some(b)) => (a - b).abs() <= 1e-9,
            (None, None) => true,
            _ => false,
        };
        if !same {
            mismatches.push((seed - 1, dp, brute));
        }
        checked += 1;
    }
    let elapsed = start.elapsed();
    let pass = mismatches.is_empty() && elapsed < Duration::from_secs(60);
    report(
        5,
        "DP vs enumeration",
        pass,
        &format!("instances={checked} skipped(too many paths)={skipped} mismatches={mismatches:?} time={elapsed:?}"),
    );
    assert!(pass);
}

fn bounds_disciplined(result: &SolveResult) -> bool {
    let mut prev_lower = f64::NEG_INFINITY;
    let mut prev_upper = f64::INFINITY;
    result.state.history.iter().all(|r| {
        let ok =
            r.best_lower >= prev_lower && r.best_upper <= prev_upper && r.best_lower <= r.best_upper + 1e-6;
        prev_lower = r.best_lower;
        prev_upper = r.best_upper;
        ok
    })
}

#[test]
fn criterion_06_bound_discipline() {
    let mut instances: Vec<(String, Instance)> = Scenario::ALL
        .into_iter()
        .map(|s| (format!("scenario {s}"), scenario_instance(s)))
        .collect();
    instances.push(("shared ride".into(), shared_ride_instance()));
    instances.push(("distant origins".into(), distant_origins_instance()));
    for seed in 0..20 {
        instances.push((
            format!("random {seed}"),
            random_instance(&small_config(seed, 2, 3), seed),
        ));
    }
    let mut violations = Vec::new();
    for (name, inst) in &instances {
        let result = LagrangianSolver::new(inst, exhaustive_config())
            .unwrap()
            .solve()
            .unwrap();
        if !bounds_disciplined(&result) {
            violations.push(name.clone());
        }
    }

    // Printed (LB*, UB*, gap%) rows of the six-scenario results.
    let printed = [
        (1.47, 5.75, 74.5),
        (5.75, 5.75, 0.0),
        (1.47, 7.22, 79.68),
        (5.55, 7.22, 23.10),
        (7.22, 7.22, 0.0),
        (1.47, 10.43, 85.94),
        (7.1, 10.43, 31.95),
        (10.43, 10.43, 0.0),
        (2.2, 6.13, 64.13),
        (6.13, 6.13, 0.0),
        (1.47, 6.97, 78.95),
        (6.97, 6.97, 0.0),
        (2.57, 5.13, 50.0),
        (2.63, 5.13, 48.70),
        (5.13, 5.13, 0.0),
    ];
    let worst = printed
        .iter()
        .map(|&(lb, ub, gap)| (relative_gap_percent(lb, ub) - gap).abs())
        .fold(0.0, f64::max);
    let pass = violations.is_empty() && worst <= 0.1;
    report(
        6,
        "bound discipline",
        pass,
        &format!(
            "instances={} violations={violations:?} worst printed-gap deviation={worst:.3}",
            instances.len()
        ),
    );
    assert!(pass);
}

#[test]
fn criterion_07_repair_and_virtual_fallback() {
    let mut failures = Vec::new();
    for seed in 0..50 {
        let inst = random_instance(&small_config(seed, 2, 3), seed);
        let mut solver = LagrangianSolver::new(&inst, exhaustive_config()).unwrap();
        let mut state = solver.initial_state();
        let lower = solver.lower_bound_iteration(&mut state).unwrap();
        let repaired = solver.upper_bound_repair(&mut state, &lower.assignment).unwrap();
        let mut pickups = vec![0usize; inst.passengers.len()];
        for path in &repaired.paths {
            for (p, count) in pickups.iter_mut().enumerate() {
                *count += path.pickups_of(p);
            }
        }
        if pickups.iter().any(|&c| c != 1) {
            failures.push(format!("seed {seed}: pickups {pickups:?}"));
        }
    }

    // All-virtual fallback: each passenger rides alone and the vehicle
    // returns to the origin.
    let mut deadhead_ok = true;
    let mut detail = String::new();
    for s in Scenario::ALL {
        let inst = scenario_instance(s).without_physical_vehicles().unwrap();
        let result = LagrangianSolver::new(&inst, exhaustive_config())
            .unwrap()
            .solve()
            .unwrap();
        let rate = inst.costs.virtual_move_rate * inst.costs.hours(1);
        let mut floor = 0.0;
        for p in &inst.passengers {
            let o = inst.network.base.node_index(p.origin).unwrap();
            let d = inst.network.base.node_index(p.destination).unwrap();
            let there = shortest_travel_time(&inst.network, o, d).unwrap();
            let back = shortest_travel_time(&inst.network, d, o).unwrap();
            floor += rate * (there + back) as f64;
        }
        let served = result
            .state
            .best_solution
            .iter()
            .map(|p| p.served.len())
            .sum::<usize>();
        let ok = result.best_upper.is_finite()
            && served == inst.passengers.len()
            && result.best_upper >= floor - 1e-9;
        deadhead_ok &= ok;
        detail.push_str(&format!(
            " {s}:UB={:.2}>=ride+return={floor:.2}",
            result.best_upper
        ));
    }
    let pass = failures.is_empty() && deadhead_ok;
    report(
        7,
        "repair validity",
        pass,
        &format!("random instances=50 failures={failures:?} all-virtual:{detail}"),
    );
    assert!(pass);
}

#[test]
fn criterion_08_partition_oracle_sandwich() {
    let start = Instant::now();
    let mut failures = Vec::new();
    let mut closed = 0;
    for seed in 0..20 {
        let cfg = small_config(seed, 1 + (seed % 2) as usize, 2 + (seed % 3) as usize);
        let inst = random_instance(&cfg, 1000 + seed);
        let oracle = solve_instance(&inst, 1e6).unwrap();
        let optimum = oracle
            .solution
            .expect("virtual vehicles make every instance feasible")
            .total_cost;
        let result = LagrangianSolver::new(&inst, exhaustive_config())
            .unwrap()
            .solve()
            .unwrap();
        let sandwich = result.best_lower <= optimum + 1e-6 && optimum <= result.best_upper + 1e-6;
        let tight = if result.gap_percent == 0.0 {
            closed += 1;
            (result.best_upper - optimum).abs() <= 1e-6
        } else {
            true
        };
        if !sandwich || !tight {
            failures.push((seed, result.best_lower, optimum, result.best_upper));
        }
    }
    let elapsed = start.elapsed();
    let pass = failures.is_empty() && elapsed < Duration::from_secs(300);
    report(
        8,
        "partition oracle sandwich",
        pass,
        &format!("instances=20 closed-gap={closed} failures(seed,LB,opt,UB)={failures:?} time={elapsed:?}"),
    );
    assert!(pass);
}

fn onboard_interval(result: &SolveResult, v: usize, p: usize) -> Option<(Time, Time)> {
    let path = &result.state.best_solution[v];
    let on = path.arcs.iter().find(|a| a.kind == ArcKind::Pickup(p))?.to.time;
    let off = path
        .arcs
        .iter()
        .find(|a| a.kind == ArcKind::Dropoff(p))?
        .from
        .time;
    Some((on, off))
}

#[test]
fn criterion_09_scenario_outcomes() {
    let solve = |s| {
        let inst = scenario_instance(s);
        let result = LagrangianSolver::new(&inst, LrConfig::default())
            .unwrap()
            .solve()
            .unwrap();
        (inst, result)
    };
    let mut lines = Vec::new();

    let (_, r) = solve(Scenario::I);
    let shared = r.assignment.serves == [Some(0), Some(0)]
        && match (onboard_interval(&r, 0, 0), onboard_interval(&r, 0, 1)) {
            (Some(a), Some(b)) => a.0 < b.1 && b.0 < a.1,
            _ => false,
        };
    lines.push(format!("I shared={shared}"));

    let (_, r) = solve(Scenario::II);
    let sequential = r.assignment.serves == [Some(0), Some(0)]
        && match (onboard_interval(&r, 0, 0), onboard_interval(&r, 0, 1)) {
            (Some(a), Some(b)) => a.1 <= b.0 || b.1 <= a.0,
            _ => false,
        };
    lines.push(format!("II sequential={sequential}"));

    let (inst, r) = solve(Scenario::III);
    let one_virtual = r.unserved.len() == 1
        && r.assignment
            .serves
            .iter()
            .filter(|v| v.is_some_and(|v| inst.is_virtual(v)))
            .count()
            == 1;
    lines.push(format!("III one-virtual={one_virtual} unserved={:?}", r.unserved));

    let (inst, r) = solve(Scenario::VI);
    let served_by: Vec<usize> = (0..inst.physical_vehicles)
        .filter(|&v| r.state.best_solution[v].serves(0))
        .collect();
    let one_of_two = served_by.len() == 1 && r.unserved.is_empty();
    lines.push(format!("VI served-by={served_by:?}"));

    let pass = shared && sequential && one_virtual && one_of_two;
    report(9, "scenario outcomes", pass, &lines.join(" "));
    assert!(pass);
}

#[test]
fn criterion_10_operation_bound_and_scale() {
    let mut fixtures: Vec<Instance> = Scenario::ALL.into_iter().map(scenario_instance).collect();
    fixtures.push(shared_ride_instance());
    fixtures.push(distant_origins_instance());
    for seed in 0..10 {
        fixtures.push(random_instance(&small_config(seed, 2, 3), seed));
    }
    let mut over = Vec::new();
    for (k, inst) in fixtures.iter().enumerate() {
        for v in 0..inst.vehicles.len() {
            let net = network(inst, v);
            let forced = vec![-1e6; inst.passengers.len()];
            for stats in [
                least_cost_path(&net, &BaseCost).1,
                least_cost_path(&net, &PickupAdjusted { adjustments: &forced }).1,
            ] {
                if stats.relaxations as u128 > net.complexity_bound() {
                    over.push((k, v, stats.relaxations, net.complexity_bound()));
                }
            }
        }
    }

    let start = Instant::now();
    let inst = large_instance(&LargeConfig::default(), 2024);
    let links = inst.network.base.link_count();
    let config = LrConfig {
        use_reductions: true,
        ..LrConfig::default()
    };
    let result = LagrangianSolver::new(&inst, config).unwrap().solve().unwrap();
    let elapsed = start.elapsed();
    let pass = over.is_empty() && elapsed < Duration::from_secs(600) && result.best_upper.is_finite();
    report(
        10,
        "operation bound and scale",
        pass,
        &format!(
            "bound violations={over:?}; 1000 nodes/{links} links/20 passengers/5 vehicles: {elapsed:?}, \
             {} iterations, gap {:.2}%, unserved {}",
            result.iterations,
            result.gap_percent,
            result.unserved.len()
        ),
    );
    assert!(pass);
}
