use manyagent::belief::{BeliefDynamics, Coupling, NaiveEngine, StructuredEngine};
use manyagent::testkit::{random_belief, random_domain, RandomParams};
use manyagent::Error;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const TOL: f64 = 1e-9;

#[test]
fn structured_prediction_matches_joint_enumeration() {
    let params = RandomParams::default();
    for seed in 0..60u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let domain = random_domain(&mut rng, &params).unwrap();
        let b = random_belief(&mut rng, &domain, 0.2);
        let structured = StructuredEngine::new(&domain);
        let naive = NaiveEngine::new(&domain).unwrap();
        for a0 in 0..domain.num_actions() {
            let er_s = structured.expected_reward(&b, a0).unwrap();
            let er_n = naive.expected_reward(&b, a0).unwrap();
            assert!((er_s - er_n).abs() <= TOL, "seed {seed} a0 {a0}: reward {er_s} vs {er_n}");
            let ps = structured.predict(&b, a0).unwrap();
            let pn = naive.predict(&b, a0).unwrap();
            for o in 0..domain.num_observations() {
                let (ls, ln) = (ps.obs_probs()[o], pn.obs_probs()[o]);
                assert!((ls - ln).abs() <= TOL, "seed {seed}: likelihood {ls} vs {ln}");
                match (ps.posterior(o), pn.posterior(o)) {
                    (Ok(bs), Ok(bn)) => {
                        let d = bs.max_abs_diff(&bn);
                        assert!(d <= TOL, "seed {seed} a0 {a0} obs {o}: posterior differs by {d}");
                    }
                    (Err(Error::ZeroProbabilityEvidence { .. }), Err(Error::ZeroProbabilityEvidence { .. })) => {}
                    (s, n) => panic!("seed {seed}: structured {:?} vs naive {:?}", s.is_ok(), n.is_ok()),
                }
            }
            let total: f64 = ps.obs_probs().iter().sum();
            assert!((total - 1.0).abs() <= TOL);
        }
    }
}

#[test]
fn factorized_coupling_is_exact_for_deterministic_agents() {
    // every configuration distribution is a point mass, so the per-context
    // expectations cannot be correlated
    let params = RandomParams {
        max_nodes: 1,
        zero_prob: 1.0,
        ..RandomParams::default()
    };
    for seed in 100..130u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let domain = random_domain(&mut rng, &params).unwrap();
        let b = random_belief(&mut rng, &domain, 0.0);
        let exact = StructuredEngine::new(&domain);
        let fact = StructuredEngine::with_coupling(&domain, Coupling::Factorized);
        for a0 in 0..domain.num_actions() {
            let pe = exact.predict(&b, a0).unwrap();
            let pf = fact.predict(&b, a0).unwrap();
            for o in 0..domain.num_observations() {
                assert!((pe.obs_probs()[o] - pf.obs_probs()[o]).abs() <= TOL);
            }
        }
    }
}
