//! Random small domains and beliefs for oracle comparisons.
//!
//! Observations are tuples with one component per state factor (a factor
//! may have a single-valued component), so the per-factor observation
//! functions multiply to a normalized joint distribution.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::belief::FactoredBelief;
use crate::domain::{CompareOp, ContextFunction, Domain, DomainSpec, InitialBelief, Predicate, Rule, Term};
use crate::error::Result;
use crate::hypergraph::{Context, ContextSpace, FrameAction, FrameActionHypergraph, FunctionKind};
use crate::population::{Assignment, AgentPopulation, Frame, FrameId, Fsc, StateFactor, StateSpace};

/// Size limits of generated instances.
#[derive(Debug, Clone)]
pub struct RandomParams {
    pub max_factors: usize,
    pub max_factor_size: usize,
    pub agents: std::ops::RangeInclusive<usize>,
    pub max_frames: usize,
    pub max_actions: usize,
    pub max_agent0_actions: usize,
    pub max_nodes: usize,
    /// Probability that a distribution entry is forced to zero.
    pub zero_prob: f64,
}

impl Default for RandomParams {
    fn default() -> Self {
        Self {
            max_factors: 2,
            max_factor_size: 3,
            agents: 1..=3,
            max_frames: 2,
            max_actions: 3,
            max_agent0_actions: 3,
            max_nodes: 2,
            zero_prob: 0.15,
        }
    }
}

/// Random probability vector of length `n` with some entries forced to zero
/// (never all of them).
pub fn random_dist<R: Rng>(rng: &mut R, n: usize, zero_prob: f64) -> Vec<f64> {
    let keep = rng.gen_range(0..n);
    let mut v: Vec<f64> = (0..n)
        .map(|i| {
            if i != keep && rng.gen_bool(zero_prob) {
                0.0
            } else {
                rng.gen_range(0.05..1.0)
            }
        })
        .collect();
    let z: f64 = v.iter().sum();
    v.iter_mut().for_each(|p| *p /= z);
    v
}

fn random_nu<R: Rng>(rng: &mut R, pool: &[FrameAction]) -> Vec<FrameAction> {
    match rng.gen_range(0..4) {
        0 => Vec::new(),
        1 => pool.to_vec(),
        _ => pool.iter().copied().filter(|_| rng.gen_bool(0.5)).collect(),
    }
}

fn random_predicate<R: Rng>(rng: &mut R, nu: &[FrameAction]) -> Predicate {
    let mut terms = Vec::new();
    for &pair in nu {
        if rng.gen_bool(0.6) {
            let weight = *[1.0, 2.0].choose(rng).unwrap();
            terms.push(Term { pair, weight });
        }
    }
    if terms.is_empty() {
        if let Some(&pair) = nu.choose(rng) {
            terms.push(Term { pair, weight: 1.0 });
        }
    }
    let op = if rng.gen_bool(0.5) { CompareOp::Ge } else { CompareOp::Lt };
    let frac = *[0.0, 0.25, 0.5].choose(rng).unwrap();
    let count = *[0.0, 1.0].choose(rng).unwrap();
    Predicate::new(terms, op, frac, count)
}

/// Mixed-radix decomposition of an observation index into per-factor
/// components, factor 0 most significant.
pub fn obs_component(obs: usize, comps: &[usize], k: usize) -> usize {
    let stride: usize = comps[k + 1..].iter().product();
    (obs / stride) % comps[k]
}

/// Random domain within `params`.
pub fn random_domain<R: Rng>(rng: &mut R, params: &RandomParams) -> Result<Domain> {
    let k_count = rng.gen_range(1..=params.max_factors);
    let factors: Vec<StateFactor> = (0..k_count)
        .map(|k| {
            let n = rng.gen_range(2..=params.max_factor_size.max(2));
            let names: Vec<String> = (0..n).map(|v| format!("v{v}")).collect();
            let refs: Vec<&str> = names.iter().map(String::as_str).collect();
            StateFactor::new(format!("x{k}"), &refs)
        })
        .collect();
    let states = StateSpace::new(factors)?;
    let sizes: Vec<usize> = states.factors().iter().map(|f| f.values.len()).collect();

    let comps = |rng: &mut R| -> Vec<usize> { (0..k_count).map(|_| rng.gen_range(1..=2)).collect() };
    let names = |prefix: &str, n: usize| -> Vec<String> { (0..n).map(|i| format!("{prefix}{i}")).collect() };

    // agent 0 is frame 0 ("a0" sorts before "f*")
    let a0_count = rng.gen_range(2..=params.max_agent0_actions.max(2));
    let a0_comps = comps(rng);
    let a0_obs: usize = a0_comps.iter().product();
    let n_frames = rng.gen_range(1..=params.max_frames);
    let mut frames = vec![make_frame("a0", &names("act", a0_count), &names("o", a0_obs))];
    let mut frame_comps = vec![a0_comps.clone()];
    for f in 0..n_frames {
        let na = rng.gen_range(2..=params.max_actions.max(2));
        let c = comps(rng);
        let no: usize = c.iter().product();
        frames.push(make_frame(&format!("f{f}"), &names("b", na), &names("w", no)));
        frame_comps.push(c);
    }

    let mut fscs = Vec::new();
    for f in 1..frames.len() {
        let count = rng.gen_range(1..=2);
        for i in 0..count {
            let nodes = rng.gen_range(1..=params.max_nodes);
            let na = frames[f].num_actions();
            let no = frames[f].num_observations();
            let action_dist = (0..nodes).map(|_| random_dist(rng, na, params.zero_prob)).collect();
            let node_transition = (0..nodes * na * no)
                .map(|_| random_dist(rng, nodes, params.zero_prob))
                .collect();
            let id = fscs.len();
            fscs.push(Fsc::new(format!("c{f}_{i}"), f, na, no, action_dist, node_transition)?);
            frames[f].fsc_pool.push(id);
        }
    }

    let n = rng.gen_range(params.agents.clone());
    let assignments: Vec<Assignment> = (0..n)
        .map(|_| {
            let frame = rng.gen_range(1..frames.len());
            let fsc = *frames[frame].fsc_pool.choose(rng).unwrap();
            Assignment { frame, fsc }
        })
        .collect();

    let pool: Vec<FrameAction> = (1..frames.len())
        .flat_map(|f| (0..frames[f].num_actions()).map(move |a| FrameAction::new(f, a)))
        .collect();
    let pool_with_agent0: Vec<FrameAction> = pool
        .iter()
        .copied()
        .chain((0..a0_count).map(|a| FrameAction::new(0, a)))
        .collect();

    let space = ContextSpace {
        factor_sizes: sizes.clone(),
        agent0_actions: a0_count,
        agent0_observations: a0_obs,
        frame_sizes: frames.iter().map(|f| (f.num_actions(), f.num_observations())).collect(),
    };
    let zp = params.zero_prob;

    let mut transition = ContextFunction::new(FrameActionHypergraph::new(FunctionKind::Transition, None));
    for (k, &xs) in sizes.iter().enumerate() {
        for x in 0..xs {
            for a0 in 0..a0_count {
                let nu = random_nu(rng, &pool);
                let pred = random_predicate(rng, &nu);
                let d1 = random_dist(rng, xs, zp);
                let d2 = random_dist(rng, xs, zp);
                for xn in 0..xs {
                    let ctx = Context::Transition { factor: k, x, a0, x_next: xn };
                    add_rules(&mut transition, ctx, &nu, &pred, d1[xn], d2[xn])?;
                }
            }
        }
    }

    let mut observation = ContextFunction::new(FrameActionHypergraph::new(FunctionKind::Observation, None));
    for (k, &xs) in sizes.iter().enumerate() {
        for xn in 0..xs {
            for a0 in 0..a0_count {
                let nu = random_nu(rng, &pool);
                let pred = random_predicate(rng, &nu);
                let d1 = random_dist(rng, a0_comps[k], zp);
                let d2 = random_dist(rng, a0_comps[k], zp);
                for o in 0..a0_obs {
                    let c = obs_component(o, &a0_comps, k);
                    let ctx = Context::Observation { factor: k, x_next: xn, a0, obs: o };
                    add_rules(&mut observation, ctx, &nu, &pred, d1[c], d2[c])?;
                }
            }
        }
    }

    let mut reward = ContextFunction::new(FrameActionHypergraph::new(FunctionKind::Reward, None));
    for ctx in space.contexts(FunctionKind::Reward, None) {
        let nu = random_nu(rng, &pool);
        let pred = random_predicate(rng, &nu);
        let r1 = (rng.gen_range(-5.0..5.0f64) * 4.0).round() / 4.0;
        let r2 = (rng.gen_range(-5.0..5.0f64) * 4.0).round() / 4.0;
        add_rules(&mut reward, ctx, &nu, &pred, r1, r2)?;
    }

    let mut frame_observation = BTreeMap::new();
    for f in 1..frames.len() {
        let mut func = ContextFunction::new(FrameActionHypergraph::new(FunctionKind::FrameObservation, Some(f)));
        let c = &frame_comps[f];
        let no = frames[f].num_observations();
        for (k, &xs) in sizes.iter().enumerate() {
            for xn in 0..xs {
                for aj in 0..frames[f].num_actions() {
                    let nu = random_nu(rng, &pool_with_agent0);
                    let pred = random_predicate(rng, &nu);
                    let d1 = random_dist(rng, c[k], zp);
                    let d2 = random_dist(rng, c[k], zp);
                    for o in 0..no {
                        let comp = obs_component(o, c, k);
                        let ctx = Context::FrameObservation { frame: f, factor: k, x_next: xn, action: aj, obs: o };
                        add_rules(&mut func, ctx, &nu, &pred, d1[comp], d2[comp])?;
                    }
                }
            }
        }
        frame_observation.insert(f as FrameId, func);
    }

    let initial_belief = InitialBelief {
        state: random_dist(rng, states.size(), 0.0),
        models: assignments
            .iter()
            .map(|a| random_dist(rng, fscs[a.fsc].num_nodes(), 0.0))
            .collect(),
    };
    Domain::new(DomainSpec {
        name: "random".into(),
        states,
        frames,
        agent0_frame: 0,
        fscs,
        population: AgentPopulation::new(assignments),
        transition,
        observation,
        reward,
        frame_observation,
        initial_belief,
    })
}

fn make_frame(id: &str, actions: &[String], observations: &[String]) -> Frame {
    let a: Vec<&str> = actions.iter().map(String::as_str).collect();
    let o: Vec<&str> = observations.iter().map(String::as_str).collect();
    Frame::new(id, &a, &o)
}

fn add_rules(
    func: &mut ContextFunction,
    ctx: Context,
    nu: &[FrameAction],
    pred: &Predicate,
    when_true: f64,
    otherwise: f64,
) -> Result<()> {
    for &pair in nu {
        func.graph.add_edge(ctx, pair)?;
    }
    let rules = if nu.is_empty() {
        vec![Rule::always(otherwise)]
    } else {
        vec![Rule::new(vec![pred.clone()], when_true), Rule::always(otherwise)]
    };
    func.set(ctx, rules);
    Ok(())
}

/// Random belief with state-dependent model rows and, with probability
/// `zero_state`, some states of zero mass.
pub fn random_belief<R: Rng>(rng: &mut R, domain: &Domain, zero_state: f64) -> FactoredBelief {
    let ns = domain.num_states();
    let state = random_dist(rng, ns, zero_state);
    let models = (0..domain.num_agents())
        .map(|j| {
            let m = domain.agent_fsc(j).num_nodes();
            (0..ns).map(|_| random_dist(rng, m, 0.2)).collect()
        })
        .collect();
    FactoredBelief::new(state, models).expect("random belief is valid")
}
