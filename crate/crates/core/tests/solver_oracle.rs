use manyagent::belief::{FactoredBelief, StructuredEngine};
use manyagent::planner::{naive_solve, solve, solve_exact, Expansion, SolverOptions};
use manyagent::testkit::{random_belief, random_domain, RandomParams};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[test]
fn structured_and_naive_solvers_agree() {
    let params = RandomParams::default();
    for seed in 0..20u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(1000 + seed);
        let domain = random_domain(&mut rng, &params).unwrap();
        let b0 = random_belief(&mut rng, &domain, 0.0);
        let horizon = 1 + (seed as usize % 3);
        let engine = StructuredEngine::new(&domain);
        let s = solve_exact(&engine, &b0, horizon, 0.9).unwrap();
        let n = naive_solve(&domain, &b0, horizon, 0.9).unwrap();
        assert!((s.value - n.value).abs() <= 1e-9, "seed {seed}: {} vs {}", s.value, n.value);
        assert_eq!(s.policy, n.policy, "seed {seed}");
        assert_eq!(s.nodes, n.nodes);
    }
}

#[test]
fn horizon_zero_and_one() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let domain = random_domain(&mut rng, &RandomParams::default()).unwrap();
    let b0 = FactoredBelief::initial(&domain).unwrap();
    let engine = StructuredEngine::new(&domain);
    let s0 = solve_exact(&engine, &b0, 0, 0.9).unwrap();
    assert_eq!(s0.value, 0.0);
    assert!(s0.policy.plans.is_empty());
    let s1 = solve_exact(&engine, &b0, 1, 0.9).unwrap();
    let best = s1.root_q.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    assert_eq!(s1.value, best);
    let g0 = solve_exact(&engine, &b0, 3, 0.0).unwrap();
    assert_eq!(g0.value, best);
}

#[test]
fn sampled_with_exhaustive_expansion_is_exact() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let domain = random_domain(&mut rng, &RandomParams::default()).unwrap();
    let b0 = random_belief(&mut rng, &domain, 0.0);
    let engine = StructuredEngine::new(&domain);
    let exact = solve_exact(&engine, &b0, 3, 0.9).unwrap();
    let opts = SolverOptions { expansion: Expansion::Exhaustive, ..SolverOptions::sampled(3, 0.9, 4, 5) };
    let degenerate = solve(&engine, &b0, &opts).unwrap();
    assert_eq!(exact.value.to_bits(), degenerate.value.to_bits());
}

#[test]
fn sampled_values_approach_the_exact_value() {
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    let domain = random_domain(&mut rng, &RandomParams::default()).unwrap();
    let b0 = random_belief(&mut rng, &domain, 0.0);
    let engine = StructuredEngine::new(&domain);
    let exact = solve_exact(&engine, &b0, 2, 0.9).unwrap().value;
    let mean_error = |k: usize| {
        let errs: Vec<f64> = (0..20)
            .map(|seed| (manyagent::planner::solve_sampled(&engine, &b0, 2, 0.9, k, seed).unwrap().value - exact).abs())
            .collect();
        errs.iter().sum::<f64>() / errs.len() as f64
    };
    let (coarse, fine) = (mean_error(1), mean_error(64));
    assert!(fine <= coarse + 1e-12, "k=64 error {fine} vs k=1 error {coarse}");
    assert!(fine < 0.05 * exact.abs().max(1.0), "k=64 error {fine} against exact {exact}");
}

#[test]
fn naive_guard_refuses_large_populations() {
    let domain = manyagent::protest::build_domain(&manyagent::protest::ProtestParams::with_n(20)).unwrap();
    assert!(matches!(
        manyagent::belief::NaiveEngine::new(&domain),
        Err(manyagent::Error::TooLarge { .. })
    ));
}
