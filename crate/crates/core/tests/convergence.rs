use discrit_core::geometry::{generate_deployment, DeploymentKind, Region};
use discrit_core::graphs::{degree1_radius, graph_diameter};
use discrit_core::protocol::{run_range_algorithm, EngineConfig, Termination};

#[test]
fn range_algorithm_reaches_degree1_graph() {
    let mut checked = 0;
    for seed in 0..15 {
        let dep =
            generate_deployment(DeploymentKind::UniformIid, 200, Region::default(), seed).unwrap();
        let (_, g1) = degree1_radius(&dep).unwrap();
        let Some(diam) = graph_diameter(&g1) else {
            continue;
        };
        let (out, trace) = run_range_algorithm(&dep, EngineConfig::default()).unwrap();
        assert_eq!(out.edges(), g1.edges(), "seed {seed}");
        assert!(
            trace.iterations <= diam,
            "seed {seed}: {} > {diam}",
            trace.iterations
        );
        checked += 1;
    }
    assert!(checked >= 5);
}

#[test]
fn quiescence_agrees_with_centralised_stop() {
    for seed in 0..5 {
        let dep = generate_deployment(
            DeploymentKind::RandomisedLattice,
            150,
            Region::default(),
            seed,
        )
        .unwrap();
        let (a, ta) = run_range_algorithm(&dep, EngineConfig::default()).unwrap();
        let cfg = EngineConfig {
            termination: Termination::Quiescence { timeout: 3 },
            ..Default::default()
        };
        let (b, tb) = run_range_algorithm(&dep, cfg).unwrap();
        assert_eq!(a, b);
        assert_eq!(ta.iterations, tb.iterations);
        assert_eq!(tb.termination_round, tb.iterations + 3);
        let last = ta.final_snapshot();
        assert!(tb.final_snapshot().thresholds == last.thresholds);
    }
}

#[test]
fn unsuppressed_run_sends_more_messages() {
    let dep = generate_deployment(DeploymentKind::UniformIid, 200, Region::default(), 8).unwrap();
    let (a, ta) = run_range_algorithm(&dep, EngineConfig::default()).unwrap();
    let (b, tb) = run_range_algorithm(
        &dep,
        EngineConfig {
            suppress_unchanged: false,
            ..Default::default()
        },
    )
    .unwrap();
    assert_eq!(a, b);
    assert!(ta.messages() <= tb.messages());
}
