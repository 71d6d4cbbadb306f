//! End-to-end acceptance suite. Each test exercises one headline
//! behavior of the toolkit on seeded instances and prints a single
//! verdict line; run with `--nocapture` to see them all.
//!
//! Every instance is derived from a fixed per-criterion base seed, so
//! the suite is a deterministic regression gate, not a flaky
//! statistical one.

use std::sync::OnceLock;

use dbsnet::channel::{
    atmospheric_loss, coverage_radius, distance_2d, fso_rate, p_los,
    path_loss_at_ground_distance,
};
use dbsnet::clustering::{audit_linkage, kmeans_pp, run_hc, ClusterState, HcParams, Placement};
use dbsnet::dnp::{
    build_graph, evaluate, exact_sampler, exhaustive_enumerate, random_dense_graph, run_ga,
    BackhaulGraph, GaConfig, GaSetting, Genome,
};
use dbsnet::harness::{
    run_experiment, summarize_rows, ExperimentConfig, ExperimentKind, SummaryReport, TableParams,
};
use dbsnet::rng::{rng_from_seed, sub_seed};
use dbsnet::scenario::{generate_pcp_scenario, PcpConfig, Scenario};
use rand::Rng;

fn verdict(id: usize, slug: &str, pass: bool, detail: &str) {
    println!(
        "ACCEPTANCE C{id} {slug}: {}",
        if pass { "PASS" } else { "FAIL" }
    );
    assert!(pass, "C{id} {slug} failed: {detail}");
}

/// Ground-distance check of every node against its assigned drone.
fn all_within(placement: &Placement, gns: &[[f64; 2]], r_a: f64) -> bool {
    placement.association.iter().enumerate().all(|(j, members)| {
        let c = [placement.dbs_positions[j][0], placement.dbs_positions[j][1]];
        members.iter().all(|&n| distance_2d(gns[n], c) <= r_a + 1e-6)
    })
}

fn scenario_at(base: u64, instance: u64, pcp: &PcpConfig) -> Scenario {
    let config = PcpConfig {
        seed: sub_seed(base, 0, instance),
        ..pcp.clone()
    };
    generate_pcp_scenario(&config).expect("scenario generation")
}

/// Dense demand field on a 3 km side whose constrained clustering
/// lands near 25 drones; used by the solver-comparison criteria.
fn dense_pcp(load_per_gn: f64) -> PcpConfig {
    PcpConfig {
        area_side: 3000.0,
        parent_intensity: 0.65,
        daughters_per_parent: 25.0,
        daughter_scatter: 300.0,
        load_per_gn,
        ..PcpConfig::default()
    }
}

#[test]
fn c01_coverage_radius_invariant() {
    let params = TableParams::default();
    // A tight loss budget and wide daughter scatter: the constrained
    // clustering must still cover everyone, while the unconstrained
    // baseline usually leaves at least one node outside the disk.
    let r_a = coverage_radius(&params.access(105.0), 20_000.0).unwrap().radius;
    let pcp = PcpConfig {
        daughter_scatter: 700.0,
        ..PcpConfig::default()
    };
    let mut hc_ok = 0usize;
    let mut km_violated = 0usize;
    let mut nodes = 0usize;
    for i in 0..100 {
        let s = scenario_at(101, i, &pcp);
        let gns = s.gn_positions();
        nodes += gns.len();
        let hc = run_hc(&gns, &HcParams::new(3000.0, 1, r_a, params.h)).unwrap();
        if all_within(&hc.placement, &gns, r_a) {
            hc_ok += 1;
        }
        let km = kmeans_pp(&gns, hc.placement.dbs_count(), sub_seed(s.seed, 7, 0), params.h)
            .unwrap();
        if !all_within(&km, &gns, r_a) {
            km_violated += 1;
        }
    }
    let mean_u = nodes as f64 / 100.0;
    let pass = hc_ok == 100 && km_violated > 50 && (120.0..=320.0).contains(&mean_u);
    verdict(
        1,
        "coverage-radius-invariant",
        pass,
        &format!("hc_ok {hc_ok}/100, kmeans violations {km_violated}/100, mean U {mean_u:.0}"),
    );
}

#[test]
fn c02_merge_legality_audit() {
    let params = TableParams::default();
    let r_a = coverage_radius(&params.access(110.0), 20_000.0).unwrap().radius;
    let hc_params = HcParams::new(3000.0, 1, r_a, params.h);
    let mut clean = 0usize;
    for i in 0..100 {
        let s = scenario_at(102, i, &PcpConfig::default());
        let gns = s.gn_positions();
        let hc = run_hc(&gns, &hc_params).unwrap();
        if audit_linkage(&gns, &hc_params, &hc.linkage).is_ok() {
            clean += 1;
        }
    }
    verdict(
        2,
        "merge-legality-audit",
        clean == 100,
        &format!("clean replays {clean}/100"),
    );
}

/// Brute-force re-derivation of both linkage matrices from cluster
/// membership: centroid distances and max pairwise member distances.
fn matrices_consistent(state: &ClusterState, gns: &[[f64; 2]]) -> bool {
    let centroid = |members: &[usize]| {
        let mut c = [0.0f64; 2];
        for &n in members {
            c[0] += gns[n][0];
            c[1] += gns[n][1];
        }
        [c[0] / members.len() as f64, c[1] / members.len() as f64]
    };
    let close = |x: f64, y: f64| (x - y).abs() <= 1e-6 * y.abs().max(1.0);
    for a in 0..state.len() {
        for b in (a + 1)..state.len() {
            let ma = &state.clusters[a].members;
            let mb = &state.clusters[b].members;
            let d = distance_2d(centroid(ma), centroid(mb));
            if !close(state.dissim[a][b], d) {
                return false;
            }
            let mut max_pair = 0.0f64;
            for &p in ma {
                for &q in mb {
                    max_pair = max_pair.max(distance_2d(gns[p], gns[q]));
                }
            }
            if !close(state.cl[a][b], max_pair) {
                return false;
            }
        }
    }
    true
}

#[test]
fn c03_linkage_matrix_oracles() {
    let pcp = PcpConfig {
        area_side: 1000.0,
        parent_intensity: 0.5,
        daughters_per_parent: 8.0,
        daughter_scatter: 120.0,
        forced_parents: vec![[250.0, 250.0], [750.0, 750.0]],
        ..PcpConfig::default()
    };
    let mut done = 0usize;
    let mut attempt = 0u64;
    let mut consistent = 0usize;
    while done < 50 {
        attempt += 1;
        assert!(attempt < 500, "small-instance generation starved");
        let s = scenario_at(103, attempt, &pcp);
        let gns = s.gn_positions();
        if !(2..=50).contains(&gns.len()) {
            continue;
        }
        done += 1;
        let mut state = ClusterState::init(&gns, 500.0).unwrap();
        let mut ok = matrices_consistent(&state, &gns);
        while state.merge_step(1, 400.0).is_some() {
            ok = ok && matrices_consistent(&state, &gns);
        }
        if ok {
            consistent += 1;
        }
    }
    verdict(
        3,
        "linkage-matrix-oracles",
        consistent == 50,
        &format!("consistent instances {consistent}/50"),
    );
}

#[test]
fn c04_neighbor_constraint_trend() {
    let params = TableParams::default();
    // A wide coverage disk keeps the neighbor constraint, not the
    // fronthaul bound, in charge of merge termination.
    let r_a = coverage_radius(&params.access(120.0), 20_000.0).unwrap().radius;
    let n = 50usize;
    let mut m_1k = vec![[0.0f64; 2]; n]; // [n_b=1, n_b=3] at d_max 1 km
    let mut m_35 = vec![[0.0f64; 2]; n]; // same at d_max 3.5 km
    for i in 0..n {
        let s = scenario_at(104, i as u64, &PcpConfig::default());
        let gns = s.gn_positions();
        for (d_max, out) in [(1000.0, &mut m_1k), (3500.0, &mut m_35)] {
            for (k, n_b) in [1usize, 3].into_iter().enumerate() {
                let hc = run_hc(&gns, &HcParams::new(d_max, n_b, r_a, params.h)).unwrap();
                out[i][k] = hc.placement.dbs_count() as f64;
            }
        }
    }
    // One-sided paired t at the tight gate: M(N_B=3) > M(N_B=1).
    let diffs: Vec<f64> = m_1k.iter().map(|m| m[1] - m[0]).collect();
    let mean_d = diffs.iter().sum::<f64>() / n as f64;
    let var = diffs.iter().map(|d| (d - mean_d).powi(2)).sum::<f64>() / (n - 1) as f64;
    let t = mean_d / (var.sqrt() / (n as f64).sqrt());
    let t_crit = 1.6766; // one-sided, alpha 0.05, 49 dof
    // At the loose gate the constraint's effect on mean M fades.
    let mean = |k: usize| m_35.iter().map(|m| m[k]).sum::<f64>() / n as f64;
    let relative = (mean(1) - mean(0)).abs() / mean(0);
    let pass = t > t_crit && relative < 0.10;
    verdict(
        4,
        "neighbor-constraint-trend",
        pass,
        &format!("t {t:.2} (crit {t_crit}), loose-gate relative effect {relative:.3}"),
    );
}

#[test]
fn c05_small_instance_optimality() {
    let params = TableParams::default();
    let setting = GaSetting::from_tag("NVP").unwrap();
    let mut enum_feasible = 0usize;
    let mut ga_found = 0usize;
    let mut near_optimal = 0usize;
    for i in 0..50u64 {
        let m = 4 + (i as usize % 4);
        let graph = random_dense_graph(m, 2, 1000.0, 100.0, 350.0, sub_seed(105, 0, i));
        let reference = exhaustive_enumerate(&graph).unwrap();
        let out = run_ga(&graph, &params.ga(setting, sub_seed(105, 1, i))).unwrap();
        if let Some(opt) = reference.best {
            enum_feasible += 1;
            if let Some(got) = out.best {
                ga_found += 1;
                if got.f_node >= 0.95 * opt.f_node {
                    near_optimal += 1;
                }
            }
        }
    }
    let pass = enum_feasible >= 20
        && ga_found as f64 >= 0.95 * enum_feasible as f64
        && near_optimal as f64 >= 0.80 * enum_feasible as f64;
    verdict(
        5,
        "small-instance-optimality",
        pass,
        &format!("feasible {enum_feasible}/50, found {ga_found}, near-optimal {near_optimal}"),
    );
}

/// Shared two-gate solver sweep for the setting-ordering criteria:
/// capacity binds (60 Mbps per node), 50 instances per gate, both the
/// no-penalty and value-penalty settings on identical graphs.
fn setting_comparison() -> &'static SummaryReport {
    static REPORT: OnceLock<SummaryReport> = OnceLock::new();
    REPORT.get_or_init(|| {
        let dir = tempfile::tempdir().unwrap();
        let config = ExperimentConfig {
            kind: ExperimentKind::GaSuccessVsDmax,
            instances_per_point: 50,
            base_seed: 9,
            out_dir: dir.path().display().to_string(),
            pl_max: 110.0,
            settings: vec!["ENP".into(), "NVP".into()],
            d_max_grid: vec![1300.0, 1500.0],
            n_b_grid: vec![1],
            scenario: dense_pcp(60.0),
            params: TableParams {
                r_n: 60.0,
                ..TableParams::default()
            },
            ..ExperimentConfig::default()
        };
        let out = run_experiment(&config).expect("setting-comparison sweep");
        assert_eq!(out.failures, 0, "sweep recorded instance failures");
        summarize_rows(&out.rows).unwrap()
    })
}

fn method<'a>(report: &'a SummaryReport, tag: &str) -> &'a dbsnet::harness::MethodSummary {
    report
        .methods
        .iter()
        .find(|m| m.method == tag)
        .expect("method present")
}

#[test]
fn c06_penalty_feasibility_ordering() {
    let report = setting_comparison();
    let nvp = method(report, "NVP");
    let enp = method(report, "ENP");
    let pass = report.instances == 100
        && (20.0..=32.0).contains(&nvp.mean_m)
        && nvp.successes >= enp.successes;
    verdict(
        6,
        "penalty-feasibility-ordering",
        pass,
        &format!(
            "NVP {}/100 vs ENP {}/100, mean M {:.1}",
            nvp.successes, enp.successes, nvp.mean_m
        ),
    );
}

#[test]
fn c07_penalty_quality_ordering() {
    let report = setting_comparison();
    let nvp = method(report, "NVP");
    let enp = method(report, "ENP");
    let pass = report.mutually_solved >= 5
        && match (enp.mean_f_node, nvp.mean_f_node) {
            (Some(e), Some(n)) => e >= n,
            _ => false,
        };
    verdict(
        7,
        "penalty-quality-ordering",
        pass,
        &format!(
            "mutually solved {}, mean f_node ENP {:?} vs NVP {:?}",
            report.mutually_solved, enp.mean_f_node, nvp.mean_f_node
        ),
    );
}

#[test]
fn c08_sampler_degradation() {
    let params = TableParams::default();
    let r_a = coverage_radius(&params.access(110.0), 5000.0).unwrap().radius;
    let setting = GaSetting::from_tag("NVP").unwrap();
    let mut ga_success = 0usize;
    let mut sampler_success = 0usize;
    let mut drones = 0usize;
    for i in 0..50u64 {
        let s = scenario_at(108, i, &dense_pcp(20.0));
        let gns = s.gn_positions();
        let hc = run_hc(&gns, &HcParams::new(1500.0, 1, r_a, params.h)).unwrap();
        drones += hc.placement.dbs_count();
        let fso = params.fso(1500.0, true);
        let graph = build_graph(&hc.placement, &s.gateways, &fso, &s.gn_loads()).unwrap();
        if run_ga(&graph, &params.ga(setting, sub_seed(108, 1, i)))
            .unwrap()
            .retained
            .is_some()
        {
            ga_success += 1;
        }
        if exact_sampler(&graph, 100_000, sub_seed(108, 2, i)).best.is_some() {
            sampler_success += 1;
        }
    }
    let mean_m = drones as f64 / 50.0;
    let pass = mean_m >= 20.0 && ga_success > sampler_success;
    verdict(
        8,
        "sampler-degradation",
        pass,
        &format!("GA {ga_success}/50 vs sampler {sampler_success}/50, mean M {mean_m:.1}"),
    );
}

#[test]
fn c09_genome_closure_suite() {
    let mut rng = rng_from_seed(109);
    let mut violations = 0usize;
    for _ in 0..100_000 {
        let m = rng.random_range(3..=9);
        let b = rng.random_range(1..=3);
        if Genome::random(m, b, &mut rng).mutate(&mut rng).check_invariants().is_err() {
            violations += 1;
        }
        let leader = Genome::random(m, b, &mut rng);
        let follower = Genome::random(m, b, &mut rng);
        let child = Genome::crossover(&leader, &follower, &mut rng).unwrap();
        if child.check_invariants().is_err() {
            violations += 1;
        }
    }

    // Saturated rates make every genome valid, so the prefix-minimum
    // surplus can be compared against the additive one everywhere.
    let m = 8;
    let b = 2;
    let rates = vec![vec![1e6; m + b]; m + b]
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut row = row.clone();
            row[i] = 0.0;
            row
        })
        .collect();
    let loads: Vec<f64> = (0..m).map(|i| 10.0 + i as f64).collect();
    let graph = BackhaulGraph::new(m, b, rates, loads).unwrap();
    let mut ordering_violations = 0usize;
    for _ in 0..10_000 {
        let sol = evaluate(&graph, &Genome::random(m, b, &mut rng));
        if !sol.valid || sol.f_node > sol.f_edge + 1e-6 {
            ordering_violations += 1;
        }
    }

    // With elitism the per-generation best selection fitness can
    // never regress, under every setting.
    let mut trace_violations = 0usize;
    for (k, setting) in GaSetting::ALL.into_iter().enumerate() {
        for g in 0..3u64 {
            let graph = random_dense_graph(6, 2, 1000.0, 100.0, 350.0, sub_seed(109, 5, g));
            let config = GaConfig {
                population: 100,
                generations: 80,
                setting,
                seed: sub_seed(109, 6 + k as u64, g),
                ..GaConfig::default()
            };
            let out = run_ga(&graph, &config).unwrap();
            if out
                .trace
                .windows(2)
                .any(|w| w[1].best_selection < w[0].best_selection)
            {
                trace_violations += 1;
            }
        }
    }

    let pass = violations == 0 && ordering_violations == 0 && trace_violations == 0;
    verdict(
        9,
        "genome-closure-suite",
        pass,
        &format!(
            "invariant violations {violations}, ordering violations {ordering_violations}, \
             trace violations {trace_violations}"
        ),
    );
}

#[test]
fn c10_channel_numerics() {
    let params = TableParams::default();
    let access = params.access(110.0);

    // LOS probability falls and expected path loss rises with ground
    // distance at fixed altitude.
    let mut p_monotone = true;
    let mut pl_monotone = true;
    for i in 1..1000 {
        let d0 = i as f64 * 5.0;
        let d1 = d0 + 5.0;
        p_monotone &= p_los(&access, d1) <= p_los(&access, d0) + 1e-12;
        pl_monotone &= path_loss_at_ground_distance(&access, d1)
            >= path_loss_at_ground_distance(&access, d0) - 1e-12;
    }

    // The optical rate decays with span beyond the short-range jitter
    // regime and vanishes past the gate.
    let fso = params.fso(3000.0, true);
    let mut rate_monotone = true;
    for i in 0..999 {
        let d0 = 600.0 + i as f64 * 2.3;
        rate_monotone &= fso_rate(&fso, d0 + 2.3) <= fso_rate(&fso, d0) + 1e-9;
    }
    let gated = fso_rate(&fso, 3000.0) == 0.0;

    // Bisection lands on the loss budget to sub-microdecibel.
    let mut residual_ok = true;
    for pl_max in [105.0, 110.0, 115.0, 120.0, 125.0] {
        let a = params.access(pl_max);
        let r = coverage_radius(&a, 20_000.0).unwrap();
        residual_ok &= !r.clamped
            && (path_loss_at_ground_distance(&a, r.radius) - pl_max).abs() <= 1e-6;
    }

    let h_p_ok = (atmospheric_loss(4.3e-4, 1000.0) - 0.9057).abs() < 1e-4;

    let pass = p_monotone && pl_monotone && rate_monotone && gated && residual_ok && h_p_ok;
    verdict(
        10,
        "channel-numerics",
        pass,
        &format!(
            "p_los {p_monotone}, path loss {pl_monotone}, rate {rate_monotone}, \
             gate {gated}, residual {residual_ok}, h_p {h_p_ok}"
        ),
    );
}

#[test]
fn c11_determinism() {
    let small_scenario = PcpConfig {
        area_side: 3000.0,
        parent_intensity: 0.4,
        daughters_per_parent: 8.0,
        daughter_scatter: 200.0,
        ..PcpConfig::default()
    };
    let run_twice = |mut config: ExperimentConfig| {
        let mut outputs = Vec::new();
        for _ in 0..2 {
            let dir = tempfile::tempdir().unwrap();
            config.out_dir = dir.path().display().to_string();
            let out = run_experiment(&config).unwrap();
            outputs.push(std::fs::read_to_string(&out.metrics_path).unwrap());
        }
        outputs[0] == outputs[1] && outputs[0].lines().count() > 2
    };

    let clustering = ExperimentConfig {
        kind: ExperimentKind::DbsCountSweep,
        instances_per_point: 2,
        base_seed: 111,
        d_max_grid: vec![1500.0],
        n_b_grid: vec![1],
        scenario: small_scenario.clone(),
        ..ExperimentConfig::default()
    };
    let solver = ExperimentConfig {
        kind: ExperimentKind::GaSuccessVsDmax,
        instances_per_point: 2,
        base_seed: 112,
        settings: vec!["NVP".into(), "EXACT".into()],
        n_exact: 2000,
        d_max_grid: vec![1500.0],
        n_b_grid: vec![1],
        scenario: small_scenario,
        params: TableParams {
            population: 40,
            generations: 30,
            ..TableParams::default()
        },
        ..ExperimentConfig::default()
    };
    let pass = run_twice(clustering) && run_twice(solver);
    verdict(11, "determinism", pass, "metrics files differ across re-runs");
}
