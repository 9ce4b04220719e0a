use eehc_core::analysis::{election_energies, frame_energies, start_energy};
use eehc_core::sim::{analytic_comparison, init_network, run_lifetime, EventKind, SimScenario, SimState};
use eehc_core::{ClusterConfig, Error, Radio};

fn radio() -> Radio {
    Radio::default()
}

#[test]
fn placement_is_seeded() {
    let a = init_network(7, 50, 100.0, (50.0, 200.0), 1.0).unwrap();
    let b = init_network(7, 50, 100.0, (50.0, 200.0), 1.0).unwrap();
    let c = init_network(8, 50, 100.0, (50.0, 200.0), 1.0).unwrap();
    assert_eq!(a.nodes, b.nodes);
    assert_ne!(a.nodes, c.nodes);
    let one = init_network(1, 1, 10.0, (0.0, 0.0), 1.0).unwrap();
    let (x, y) = one.nodes[0].position;
    assert!((0.0..10.0).contains(&x) && (0.0..10.0).contains(&y));
}

#[test]
fn placement_mean_is_field_centre() {
    let n = 10_000;
    let s = init_network(3, n, 100.0, (0.0, 0.0), 1.0).unwrap();
    // Uniform on [0, 100]: sd of the sample mean is 100 / sqrt(12 n).
    let three_sigma = 3.0 * 100.0 / (12.0 * n as f64).sqrt();
    let mx = s.nodes.iter().map(|n| n.position.0).sum::<f64>() / n as f64;
    let my = s.nodes.iter().map(|n| n.position.1).sum::<f64>() / n as f64;
    assert!((mx - 50.0).abs() < three_sigma && (my - 50.0).abs() < three_sigma, "{mx} {my}");
}

#[test]
fn init_rejects_bad_dimensions() {
    assert!(init_network(1, 0, 100.0, (0.0, 0.0), 1.0).is_err());
    assert!(init_network(1, 10, 0.0, (0.0, 0.0), 1.0).is_err());
    assert!(init_network(1, 10, 100.0, (0.0, 0.0), 0.0).is_err());
}

#[test]
fn single_cluster_collects_everyone() {
    let mut s = init_network(2, 40, 100.0, (50.0, 200.0), 10.0).unwrap();
    s.election_phase(1, 4, &radio(), 2000).unwrap();
    assert_eq!(s.clusters.len(), 1);
    assert_eq!(s.clusters[0].members.len(), 39);
    assert_eq!(s.clusters[0].headset.len(), 4);
    assert!(s.nodes.iter().all(|n| n.cluster_id == Some(0)));
}

#[test]
fn equidistant_node_joins_lower_id() {
    let positions = [(-1.0, 0.0), (1.0, 0.0), (0.0, 0.0)];
    let mut checked = 0;
    for seed in 0..64 {
        let mut s = SimState::from_positions(seed, &positions, (0.0, 100.0), 1.0).unwrap();
        s.election_phase(2, 1, &radio(), 100).unwrap();
        if s.clusters[0].head == 0 && s.clusters[1].head == 1 {
            assert_eq!(s.nodes[2].cluster_id, Some(0));
            checked += 1;
        }
    }
    assert!(checked > 0);
}

#[test]
fn election_fails_without_enough_nodes() {
    let mut s = init_network(2, 10, 100.0, (50.0, 200.0), 10.0).unwrap();
    assert_eq!(s.election_phase(4, 3, &radio(), 100), Err(Error::ElectionFailure { live: 10, needed: 12 }));
}

#[test]
fn mean_head_election_cost_matches_closed_form() {
    let r = radio();
    let (n, k, m) = (200u32, 5u32, 2u32);
    let mut sim_sum = 0.0;
    let mut analytic_sum = 0.0;
    for seed in 0..100 {
        let mut s = init_network(seed, n as usize, 100.0, (50.0, 200.0), 10.0).unwrap();
        s.election_phase(k, m, &r, 2000).unwrap();
        let met = s.metrics(SimScenario { k, m, ..Default::default() }, vec![], vec![], None);
        sim_sum += met.mean_ch_election_energy;
        let cfg = ClusterConfig { n, k, m, d_intra: met.mean_join_distance, ..Default::default() };
        analytic_sum += election_energies(&cfg, &r).unwrap().ch;
    }
    let rel = (sim_sum - analytic_sum).abs() / analytic_sum;
    assert!(rel < 0.10, "relative error {rel}");
}

#[test]
fn single_head_carries_all_frames() {
    let r = radio();
    let (n, k, m, nf) = (300u32, 6u32, 1u32, 500u64);
    let mut sim = 0.0;
    let mut analytic = 0.0;
    for seed in 0..20 {
        let mut s = init_network(seed, n as usize, 100.0, (50.0, 200.0), 100.0).unwrap();
        s.election_phase(k, m, &r, 2000).unwrap();
        s.data_transfer_phase(nf, 2000, &r).unwrap();
        for c in &s.clusters {
            assert_eq!(s.nodes[c.head].active_frames, nf);
        }
        let met = s.metrics(SimScenario { k, m, n_frames: nf, ..Default::default() }, vec![], vec![], None);
        sim += nf as f64 * met.mean_ch_frame_energy;
        let cfg = ClusterConfig { n, k, m, d_bs: met.mean_bs_distance, ..Default::default() };
        analytic += nf as f64 * frame_energies(&cfg, &r).unwrap().ch;
    }
    assert!((sim - analytic).abs() / analytic < 0.10);
}

#[test]
fn zero_frames_leave_batteries_untouched() {
    let r = radio();
    let mut s = init_network(5, 60, 100.0, (50.0, 200.0), 10.0).unwrap();
    s.election_phase(3, 2, &r, 2000).unwrap();
    let before: Vec<f64> = s.nodes.iter().map(|n| n.residual_energy).collect();
    s.data_transfer_phase(0, 2000, &r).unwrap();
    let after: Vec<f64> = s.nodes.iter().map(|n| n.residual_energy).collect();
    assert_eq!(before, after);
}

#[test]
fn headset_duty_is_split_round_robin() {
    let r = radio();
    let (k, m, nf) = (4u32, 3u32, 1001u64);
    let mut s = init_network(9, 120, 100.0, (50.0, 200.0), 1000.0).unwrap();
    s.election_phase(k, m, &r, 2000).unwrap();
    s.data_transfer_phase(nf, 2000, &r).unwrap();
    for c in &s.clusters {
        let share = nf / c.headset.len() as u64;
        let total: u64 = c.headset.iter().map(|&h| s.nodes[h].active_frames).sum();
        assert_eq!(total, nf);
        for &h in &c.headset {
            let f = s.nodes[h].active_frames;
            assert!(f == share || f == share + 1, "{f}");
        }
        for &i in c.members.iter().filter(|i| !c.headset.contains(i)) {
            assert_eq!(s.nodes[i].member_frames, nf);
        }
    }
}

#[test]
fn round_sizes_and_ledger_delta() {
    let r = radio();
    let mut s = init_network(4, 24, 100.0, (50.0, 200.0), 1000.0).unwrap();
    let before = s.ledger();
    let out = s.run_round(4, 6, 50, 2000, &r).unwrap();
    assert_eq!(out.iterations, 1);
    assert_eq!(out.energy, s.ledger() - before);

    let out = s.run_round(2, 3, 50, 2000, &r).unwrap();
    assert_eq!(out.iterations, 4);
}

#[test]
fn single_cluster_rotation_serves_everyone_once() {
    let r = radio();
    let mut s = init_network(11, 60, 100.0, (50.0, 200.0), 1000.0).unwrap();
    s.run_round(1, 5, 20, 2000, &r).unwrap();
    assert!(s.nodes.iter().all(|n| n.times_elected == 1));
    assert_eq!(s.eligibility_resets, 0);
    s.run_round(1, 5, 20, 2000, &r).unwrap();
    assert!(s.nodes.iter().all(|n| n.times_elected == 2));
}

#[test]
fn conservation_and_monotone_death() {
    let r = radio();
    let mut s = init_network(21, 100, 100.0, (50.0, 200.0), 0.5).unwrap();
    s.enable_trace();
    let mut dead_before: Vec<bool> = vec![false; 100];
    for _ in 0..5 {
        if s.run_round(4, 2, 200, 2000, &r).is_err() {
            break;
        }
        assert!(s.conservation_error() < 1e-9);
        for n in &s.nodes {
            assert!(n.residual_energy >= 0.0);
            if dead_before[n.id] {
                assert!(!n.alive && n.residual_energy == 0.0);
            }
        }
        dead_before = s.nodes.iter().map(|n| !n.alive).collect();
    }
    assert!(s.has_dead());
    let traced: f64 = s.trace().iter().map(|e| e.joules).sum();
    assert!((traced - s.ledger()).abs() / s.ledger() < 1e-9);
    assert!(s.trace().iter().any(|e| e.kind == EventKind::Death));
}

#[test]
fn huge_battery_survives_every_round() {
    let r = radio();
    let mut s = init_network(1, 60, 100.0, (50.0, 200.0), 1e9).unwrap();
    let sc = SimScenario { k: 3, m: 2, n_frames: 100, max_rounds: 4, ..Default::default() };
    let met = run_lifetime(&mut s, &sc, &r);
    assert_eq!(met.rounds_completed, 4);
    assert_eq!(met.first_node_death_round, None);
    assert_eq!(met.iterations_completed, 40);
}

#[test]
fn start_energy_battery_dies_early() {
    let r = radio();
    let cfg = ClusterConfig { n: 200, k: 5, m: 2, n_frames: 1000, ..Default::default() };
    let e = start_energy(&cfg, &r).unwrap();
    for seed in 0..5 {
        let mut s = init_network(seed, 200, 100.0, (50.0, 200.0), e).unwrap();
        let sc = SimScenario { k: 5, m: 2, n_frames: 1000, max_rounds: 10, ..Default::default() };
        let met = run_lifetime(&mut s, &sc, &r);
        let death = met.first_node_death_round.expect("a node dies");
        assert!((1..=2).contains(&death), "{death}");
    }
}

#[test]
fn iteration_time_grows_with_frames() {
    let r = radio();
    let mut last = 0.0;
    for nf in [0u64, 10, 100, 1000] {
        let mut s = init_network(1, 60, 100.0, (50.0, 200.0), 1e6).unwrap();
        let sc = SimScenario { k: 3, m: 2, n_frames: nf, max_rounds: 1, ..Default::default() };
        let met = run_lifetime(&mut s, &sc, &r);
        assert!(met.iteration_time_s > last);
        last = met.iteration_time_s;
    }
}

#[test]
fn metrics_are_deterministic() {
    let r = radio();
    let sc = SimScenario { k: 5, m: 3, n_frames: 300, max_rounds: 3, ..Default::default() };
    let run = || {
        let mut s = init_network(42, 150, 100.0, (50.0, 200.0), 5.0).unwrap();
        run_lifetime(&mut s, &sc, &r)
    };
    let (a, b) = (run(), run());
    assert_eq!(a, b);
    let cfg = ClusterConfig { n: 150, k: 5, m: 3, n_frames: 300, ..Default::default() };
    assert_eq!(analytic_comparison(&a, &cfg, &r).unwrap(), analytic_comparison(&b, &cfg, &r).unwrap());
}

#[test]
fn co_located_nodes_match_electronics_only_energies() {
    let r = radio();
    let positions = vec![(3.0, 3.0); 12];
    let mut s = SimState::from_positions(1, &positions, (3.0, 3.0), 100.0).unwrap();
    let sc = SimScenario { k: 1, m: 3, n_frames: 40, max_rounds: 1, ..Default::default() };
    let met = run_lifetime(&mut s, &sc, &r);
    let cfg = ClusterConfig { n: 12, k: 1, m: 3, n_frames: 40, d_bs: 0.0, d_intra: 0.0, ..Default::default() };
    let rep = analytic_comparison(&met, &cfg, &r).unwrap();
    assert!(rep.max_role_error() < 1e-12, "{rep:?}");
}

#[test]
fn comparison_rejects_mismatched_scenario() {
    let r = radio();
    let mut s = init_network(1, 60, 100.0, (50.0, 200.0), 1e6).unwrap();
    let sc = SimScenario { k: 3, m: 2, n_frames: 10, max_rounds: 1, ..Default::default() };
    let met = run_lifetime(&mut s, &sc, &r);
    let cfg = ClusterConfig { n: 60, k: 4, m: 2, n_frames: 10, ..Default::default() };
    assert!(matches!(analytic_comparison(&met, &cfg, &r), Err(Error::Mismatch { field: "k", .. })));
}

#[test]
fn uniform_field_role_errors_are_small() {
    let r = radio();
    let mut s = init_network(3, 1000, 100.0, (50.0, 200.0), 1e4).unwrap();
    let sc = SimScenario { max_rounds: 1, ..Default::default() };
    let met = run_lifetime(&mut s, &sc, &r);
    let rep = analytic_comparison(&met, &ClusterConfig::default(), &r).unwrap();
    assert!(rep.max_role_error() < 0.15, "{rep:?}");
}
