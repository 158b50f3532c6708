use std::collections::BTreeSet;

use manyagent::belief::{BeliefDynamics, FactoredBelief, StructuredEngine};
use manyagent::config::{config_distribution, num_configs, project, AgentDraw, TrieOptions};
use manyagent::domain::Domain;
use manyagent::hypergraph::{FrameAction, Neighborhood};
use manyagent::population::{policy_to_fsc, AgentPopulation, Frame, Fsc, PlanNode, StateFactor, StateSpace};
use manyagent::testkit::{random_belief, random_dist, random_domain, RandomParams};
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const TOL: f64 = 1e-9;

fn seeded(seed: u64) -> (Domain, FactoredBelief, ChaCha8Rng) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let d = random_domain(&mut rng, &RandomParams::default()).unwrap();
    let b = random_belief(&mut rng, &d, 0.2);
    (d, b, rng)
}

fn plan_strategy(depth: u32, actions: usize, obs: usize) -> impl Strategy<Value = PlanNode> {
    let leaf = (0..actions).prop_map(PlanNode::leaf);
    leaf.prop_recursive(depth, 64, obs as u32, move |inner| {
        ((0..actions), prop::collection::vec(inner, obs)).prop_map(|(a, c)| PlanNode::branch(a, c))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn state_index_is_a_bijection(sizes in prop::collection::vec(1usize..5, 1..4)) {
        let names: Vec<Vec<String>> = sizes.iter().map(|&n| (0..n).map(|v| format!("v{v}")).collect()).collect();
        let factors = names
            .iter()
            .enumerate()
            .map(|(k, vals)| {
                let refs: Vec<&str> = vals.iter().map(String::as_str).collect();
                StateFactor::new(format!("x{k}"), &refs)
            })
            .collect();
        let space = StateSpace::new(factors).unwrap();
        prop_assert_eq!(space.size(), sizes.iter().product::<usize>());
        let mut seen = BTreeSet::new();
        for i in 0..space.size() {
            let values = space.state_of(i);
            prop_assert_eq!(space.index_of(&values), i);
            prop_assert!(seen.insert(values));
        }
    }

    #[test]
    fn compiled_plan_replays_every_history(plan in plan_strategy(3, 3, 2)) {
        let fsc = policy_to_fsc(&plan, "plan", 0, 3, 2).unwrap();
        prop_assert_eq!(fsc.num_nodes(), plan.count_nodes());
        // walk all histories up to the plan depth
        let mut stack: Vec<(Vec<usize>, usize)> = vec![(Vec::new(), 0)];
        while let Some((hist, node)) = stack.pop() {
            let dist = fsc.fsc_action_dist(node).unwrap();
            let acted = dist.iter().position(|&p| p == 1.0).unwrap();
            if let Some(expected) = plan.action_after(&hist) {
                prop_assert_eq!(acted, expected);
            }
            if hist.len() < plan.depth() {
                for o in 0..2 {
                    let next = fsc.fsc_step_dist(node, acted, o).unwrap();
                    let succ = next.iter().position(|&p| p == 1.0).unwrap();
                    let mut h = hist.clone();
                    h.push(o);
                    stack.push((h, succ));
                }
            }
        }
    }

    #[test]
    fn configuration_classes_partition_joint_actions(
        n in 1usize..5,
        actions in 2usize..4,
        nu_mask in prop::collection::vec(any::<bool>(), 3),
    ) {
        let names: Vec<String> = (0..actions).map(|a| format!("a{a}")).collect();
        let refs: Vec<&str> = names.iter().map(String::as_str).collect();
        let frames = vec![Frame::new("f", &refs, &["o"])];
        let nu = Neighborhood::new(
            (0..actions).filter(|&a| nu_mask[a % 3]).map(|a| FrameAction::new(0, a)).collect(),
        );
        let agent_frames = vec![0; n];
        let mut classes = BTreeSet::new();
        let mut profile = vec![0usize; n];
        let total = actions.pow(n as u32);
        for _ in 0..total {
            let c = project(&profile, &agent_frames, &frames, &nu).unwrap();
            prop_assert_eq!(c.total() as usize, n);
            let mut sorted = profile.clone();
            sorted.sort_unstable();
            prop_assert_eq!(&project(&sorted, &agent_frames, &frames, &nu).unwrap(), &c);
            classes.insert(c);
            for slot in profile.iter_mut() {
                *slot += 1;
                if *slot < actions {
                    break;
                }
                *slot = 0;
            }
        }
        prop_assert!(classes.len() as u128 <= num_configs(n, nu.len()));
    }

    #[test]
    fn configuration_distribution_is_normalized(seed in any::<u64>(), n in 1usize..6) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let fsc = Fsc::new("c", 0, 3, 1, vec![random_dist(&mut rng, 3, 0.3), random_dist(&mut rng, 3, 0.3)], vec![vec![0.5, 0.5]; 6]).unwrap();
        let beliefs: Vec<Vec<f64>> = (0..n).map(|_| random_dist(&mut rng, 2, 0.3)).collect();
        let draws: Vec<AgentDraw> = beliefs.iter().map(|b| AgentDraw { frame: 0, fsc: &fsc, belief: b }).collect();
        let nu = Neighborhood::new(vec![FrameAction::new(0, 0), FrameAction::new(0, 2)]);
        let trie = config_distribution(&nu, &draws, &TrieOptions::default()).unwrap();
        prop_assert!((trie.total() - 1.0).abs() < 1e-12);
        for (c, p) in trie.entries() {
            prop_assert!(p > 0.0);
            prop_assert_eq!(c.total() as usize, n);
        }
    }

    #[test]
    fn predictions_are_normalized(seed in any::<u64>()) {
        let (d, b, _) = seeded(seed);
        let engine = StructuredEngine::new(&d);
        for a0 in 0..d.num_actions() {
            let pred = engine.predict(&b, a0).unwrap();
            let total: f64 = pred.obs_probs().iter().sum();
            prop_assert!((total - 1.0).abs() < TOL);
            for j in 0..d.num_agents() {
                for sn in 0..d.num_states() {
                    let row: f64 = pred.model_dist(j, sn).iter().sum();
                    prop_assert!((row - 1.0).abs() < TOL);
                }
            }
        }
    }

    #[test]
    fn model_update_ignores_agent0_observation(seed in any::<u64>()) {
        let (d, b, _) = seeded(seed);
        let engine = StructuredEngine::new(&d);
        for a0 in 0..d.num_actions() {
            let rows: Vec<Vec<f64>> = (0..d.num_agents())
                .flat_map(|j| (0..d.num_states()).map(move |s| (j, s)))
                .map(|(j, s)| engine.update_models(&b, a0, j, s).unwrap())
                .collect();
            for o in 0..d.num_observations() {
                let Ok(post) = engine.belief_update(&b, a0, o) else { continue };
                let mut i = 0;
                for j in 0..d.num_agents() {
                    for s in 0..d.num_states() {
                        if post.state_dist()[s] > 0.0 {
                            prop_assert_eq!(post.model_dist(j, s), rows[i].as_slice());
                        }
                        i += 1;
                    }
                }
            }
        }
    }

    #[test]
    fn agent_order_does_not_matter(seed in any::<u64>()) {
        let (d, b, mut rng) = seeded(seed);
        let n = d.num_agents();
        let mut perm: Vec<usize> = (0..n).collect();
        perm.shuffle(&mut rng);
        let mut spec = d.spec().clone();
        spec.population = AgentPopulation::new(perm.iter().map(|&j| d.spec().population.assignments[j]).collect());
        spec.initial_belief.models = perm.iter().map(|&j| d.spec().initial_belief.models[j].clone()).collect();
        let shuffled = Domain::new(spec).unwrap();
        let models = perm
            .iter()
            .map(|&j| (0..d.num_states()).map(|s| b.model_dist(j, s).to_vec()).collect())
            .collect();
        let b2 = FactoredBelief::new(b.state_dist().to_vec(), models).unwrap();
        let (e1, e2) = (StructuredEngine::new(&d), StructuredEngine::new(&shuffled));
        for a0 in 0..d.num_actions() {
            prop_assert!((e1.expected_reward(&b, a0).unwrap() - e2.expected_reward(&b2, a0).unwrap()).abs() < TOL);
            let (p1, p2) = (e1.predict(&b, a0).unwrap(), e2.predict(&b2, a0).unwrap());
            for (x, y) in p1.obs_probs().iter().zip(p2.obs_probs()) {
                prop_assert!((x - y).abs() < TOL);
            }
            for (new_j, &old_j) in perm.iter().enumerate() {
                for s in 0..d.num_states() {
                    for (x, y) in p1.model_dist(old_j, s).iter().zip(p2.model_dist(new_j, s)) {
                        prop_assert!((x - y).abs() < TOL);
                    }
                }
            }
        }
    }
}
