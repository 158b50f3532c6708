use manyagent::belief::{BeliefDynamics, FactoredBelief, StructuredEngine};
use manyagent::hypergraph::{validate_anonymity, FunctionKind};
use manyagent::planner::{naive_solve, solve_exact};
use manyagent::protest::{build_domain, joint_value, Controllers, ProtestParams};

#[test]
fn structured_matches_naive_on_small_protests() {
    for controllers in [Controllers::Blind, Controllers::Reactive] {
        for n in 1..=2 {
            let p = ProtestParams { controllers, ..ProtestParams::with_n(n) };
            let d = build_domain(&p).unwrap();
            let b0 = FactoredBelief::initial(&d).unwrap();
            let engine = StructuredEngine::new(&d);
            let s = solve_exact(&engine, &b0, 2, 0.9).unwrap();
            let naive = naive_solve(&d, &b0, 2, 0.9).unwrap();
            assert!((s.value - naive.value).abs() <= 1e-9, "{controllers:?} n={n}: {} vs {}", s.value, naive.value);
            assert_eq!(s.policy, naive.policy);
        }
    }
}

#[test]
fn observation_rows_are_distributions() {
    let d = build_domain(&ProtestParams::with_n(3)).unwrap();
    let b0 = FactoredBelief::initial(&d).unwrap();
    let engine = StructuredEngine::new(&d);
    for a0 in 0..d.num_actions() {
        let pred = engine.predict(&b0, a0).unwrap();
        let total: f64 = pred.obs_probs().iter().sum();
        assert!((total - 1.0).abs() < 1e-12);
    }
}

#[test]
fn closed_form_is_anonymous() {
    for n in 2..=3 {
        let p = ProtestParams::with_n(n);
        let d = build_domain(&p).unwrap();
        let others = d.agent_frames().to_vec();
        for kind in [FunctionKind::Transition, FunctionKind::Observation, FunctionKind::Reward] {
            let f = d.function(kind, None).unwrap();
            let contexts = d.context_space().contexts(kind, None);
            let report = validate_anonymity(
                |ctx, a| joint_value(&p, ctx, a, &others),
                &f.graph,
                |ctx, cfg| d.evaluate(ctx, cfg),
                &contexts,
                &others,
                d.frames(),
            )
            .unwrap();
            assert!(report.holds(), "{kind}: {:?}", report.violations.first());
        }
    }
}
