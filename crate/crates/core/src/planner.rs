//! Finite-horizon value iteration over the tree of reachable beliefs.
//!
//! The tree is expanded depth first; each node's children are released once
//! their values are backed up. Nodes one step before the horizon need only
//! expected rewards, since the value at the horizon is 0.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use rand::distributions::{Distribution, WeightedIndex};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::belief::{BeliefDynamics, FactoredBelief, NaiveEngine};
use crate::domain::Domain;
use crate::error::{Error, Result};
use crate::population::{ActionId, ObsId};

pub const DEFAULT_GAMMA: f64 = 0.9;

/// Default cap on the number of tree nodes a solve may expand.
pub const NODE_LIMIT: f64 = 1e7;

/// Relative tolerance under which two action values count as tied; the lower
/// action index wins a tie.
pub const TIE_TOLERANCE: f64 = 1e-10;

/// One observation branch under an action.
#[derive(Debug, Clone, PartialEq)]
pub struct Branch {
    pub obs: ObsId,
    /// `Pr(obs | b, a0)` for exact expansion, `count / k` when sampled.
    pub weight: f64,
    /// Value of the child once backed up.
    pub value: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ActionExpansion {
    pub action: ActionId,
    pub expected_reward: f64,
    pub branches: Vec<Branch>,
}

#[derive(Debug, Clone)]
pub struct ReachabilityNode {
    pub belief: FactoredBelief,
    pub depth: usize,
    pub expansions: Vec<ActionExpansion>,
    pub value: Option<f64>,
    pub best_action: Option<ActionId>,
}

impl ReachabilityNode {
    pub fn new(belief: FactoredBelief, depth: usize) -> Self {
        Self {
            belief,
            depth,
            expansions: Vec::new(),
            value: None,
            best_action: None,
        }
    }

    /// `Q(b, a0)` of every expanded action. Fails if a child is unvalued.
    pub fn q_values(&self, gamma: f64) -> Result<Vec<f64>> {
        self.expansions
            .iter()
            .map(|e| {
                let mut future = 0.0;
                for br in &e.branches {
                    let v = br.value.ok_or_else(|| {
                        Error::Contract(format!(
                            "backup at depth {} before the child for action {} and observation {} was valued",
                            self.depth, e.action, br.obs
                        ))
                    })?;
                    future += br.weight * v;
                }
                Ok(e.expected_reward + gamma * future)
            })
            .collect()
    }
}

/// Index of the best value; values within the tie tolerance of the maximum
/// go to the lowest index.
pub fn argmax_with_ties(values: &[f64]) -> Option<usize> {
    let best = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if values.is_empty() {
        return None;
    }
    let tol = TIE_TOLERANCE * best.abs().max(1.0);
    values.iter().position(|&v| v >= best - tol)
}

/// Bellman backup of a node whose children are valued. Nodes at the horizon
/// are worth 0.
pub fn backup(node: &mut ReachabilityNode, gamma: f64, horizon: usize) -> Result<f64> {
    if node.depth >= horizon {
        node.value = Some(0.0);
        node.best_action = None;
        return Ok(0.0);
    }
    let q = node.q_values(gamma)?;
    let best = argmax_with_ties(&q).ok_or_else(|| Error::Contract("backup of a node with no actions".into()))?;
    let value = q[best];
    if !value.is_finite() {
        return Err(Error::Contract(format!("non-finite value at depth {}", node.depth)));
    }
    node.value = Some(value);
    node.best_action = Some(node.expansions[best].action);
    Ok(value)
}

/// A finite-horizon conditional plan: the action after every observation
/// history along the chosen branches, plus a fallback action per depth for
/// histories the tree never expanded.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Policy {
    pub horizon: usize,
    pub plans: BTreeMap<Vec<ObsId>, ActionId>,
    pub defaults: Vec<ActionId>,
}

impl Policy {
    pub fn empty() -> Self {
        Self {
            horizon: 0,
            plans: BTreeMap::new(),
            defaults: Vec::new(),
        }
    }

    /// Action after `history`, falling back to the depth default.
    pub fn action_for(&self, history: &[ObsId]) -> Option<ActionId> {
        self.plans
            .get(history)
            .copied()
            .or_else(|| self.defaults.get(history.len()).copied())
    }

    pub fn root_action(&self) -> Option<ActionId> {
        self.plans.get(&Vec::new()).copied()
    }

    /// Text form: `policy H`, then `default <depth> <action>` lines, then
    /// `plan <history> <action>` lines with histories written `o1/o2` (`-`
    /// for the empty history).
    pub fn to_text(&self, domain: &Domain) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "policy {}", self.horizon);
        for (d, &a) in self.defaults.iter().enumerate() {
            let _ = writeln!(out, "default {d} {}", domain.action_name(a));
        }
        for (h, &a) in &self.plans {
            let hist = if h.is_empty() {
                "-".to_string()
            } else {
                h.iter().map(|&o| domain.observation_name(o)).collect::<Vec<_>>().join("/")
            };
            let _ = writeln!(out, "plan {hist} {}", domain.action_name(a));
        }
        out
    }

    pub fn from_text(text: &str, domain: &Domain) -> Result<Self> {
        let frame = &domain.frames()[domain.agent0_frame()];
        let mut policy = Policy::empty();
        let mut defaults = BTreeMap::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let parts: Vec<&str> = line.split_whitespace().collect();
            let bad = || Error::Parse(format!("policy line {}: `{line}`", i + 1));
            match parts.as_slice() {
                ["policy", h] => policy.horizon = h.parse().map_err(|_| bad())?,
                ["default", d, a] => {
                    defaults.insert(d.parse::<usize>().map_err(|_| bad())?, frame.action_index(a)?);
                }
                ["plan", h, a] => {
                    let hist = if *h == "-" {
                        Vec::new()
                    } else {
                        h.split('/').map(|o| frame.observation_index(o)).collect::<Result<Vec<_>>>()?
                    };
                    policy.plans.insert(hist, frame.action_index(a)?);
                }
                _ => return Err(bad()),
            }
        }
        policy.defaults = defaults.into_values().collect();
        Ok(policy)
    }
}

/// How observation branches are chosen below each action.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Expansion {
    /// Every observation with positive likelihood, weighted by it.
    Exhaustive,
    /// `k` i.i.d. draws per action node, weighted by empirical frequency.
    Sampled { k: usize, seed: u64 },
}

#[derive(Debug, Clone)]
pub struct Solution {
    pub value: f64,
    pub policy: Policy,
    /// Q-values of every action at the root (empty for horizon 0).
    pub root_q: Vec<f64>,
    /// Beliefs created, the root included.
    pub nodes: usize,
    pub trie_peak: usize,
}

#[derive(Debug, Clone)]
pub struct SolverOptions {
    pub horizon: usize,
    pub gamma: f64,
    pub expansion: Expansion,
    pub node_limit: f64,
}

impl SolverOptions {
    pub fn exact(horizon: usize, gamma: f64) -> Self {
        Self {
            horizon,
            gamma,
            expansion: Expansion::Exhaustive,
            node_limit: NODE_LIMIT,
        }
    }

    pub fn sampled(horizon: usize, gamma: f64, k: usize, seed: u64) -> Self {
        Self {
            horizon,
            gamma,
            expansion: Expansion::Sampled { k, seed },
            node_limit: NODE_LIMIT,
        }
    }
}

/// Chosen subtree of one node: its greedy action, the expected reward of
/// every action and the subtrees under the greedy action's branches.
struct PlanTree {
    action: ActionId,
    rewards: Vec<f64>,
    children: Vec<(ObsId, f64, PlanTree)>,
}

fn splitmix(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

fn mix(h: u64, v: u64) -> u64 {
    splitmix(h ^ splitmix(v))
}

struct Solver<'a, E: BeliefDynamics> {
    engine: &'a E,
    opts: &'a SolverOptions,
    nodes: usize,
}

impl<E: BeliefDynamics> Solver<'_, E> {
    fn expand(&mut self, belief: FactoredBelief, depth: usize, path: u64) -> Result<(f64, PlanTree, Vec<f64>)> {
        self.nodes += 1;
        let domain = self.engine.domain();
        let prep = self.engine.prepare(&belief)?;
        let mut node = ReachabilityNode::new(belief, depth);
        let mut subtrees: Vec<Vec<(ObsId, f64, PlanTree)>> = Vec::new();
        let mut rewards = Vec::with_capacity(domain.num_actions());
        for a0 in 0..domain.num_actions() {
            let er = self.engine.expected_reward_with(&node.belief, &prep, a0)?;
            rewards.push(er);
            let mut branches = Vec::new();
            let mut plans = Vec::new();
            if depth + 1 < self.opts.horizon {
                let pred = self.engine.predict_with(&node.belief, &prep, a0)?;
                let action_path = mix(path, a0 as u64);
                for (obs, weight) in self.branch_weights(pred.obs_probs(), action_path)? {
                    let child = pred.posterior(obs)?;
                    let (v, plan, _) = self.expand(child, depth + 1, mix(action_path, obs as u64 + 1))?;
                    branches.push(Branch {
                        obs,
                        weight,
                        value: Some(v),
                    });
                    plans.push((obs, weight, plan));
                }
            }
            node.expansions.push(ActionExpansion {
                action: a0,
                expected_reward: er,
                branches,
            });
            subtrees.push(plans);
        }
        let q = node.q_values(self.opts.gamma)?;
        let value = backup(&mut node, self.opts.gamma, self.opts.horizon)?;
        let best = node.best_action.expect("backed up");
        let plan = PlanTree {
            action: best,
            rewards,
            children: std::mem::take(&mut subtrees[best]),
        };
        Ok((value, plan, q))
    }

    fn branch_weights(&self, probs: &[f64], path: u64) -> Result<Vec<(ObsId, f64)>> {
        match self.opts.expansion {
            Expansion::Exhaustive => Ok(probs
                .iter()
                .enumerate()
                .filter(|(_, &p)| p > 0.0)
                .map(|(o, &p)| (o, p))
                .collect()),
            Expansion::Sampled { k, seed } => {
                let mut rng = ChaCha8Rng::seed_from_u64(mix(splitmix(seed), path));
                let dist = WeightedIndex::new(probs)
                    .map_err(|e| Error::Contract(format!("observation distribution: {e}")))?;
                let mut counts = vec![0usize; probs.len()];
                for _ in 0..k {
                    counts[dist.sample(&mut rng)] += 1;
                }
                Ok(counts
                    .iter()
                    .enumerate()
                    .filter(|(_, &c)| c > 0)
                    .map(|(o, &c)| (o, c as f64 / k as f64))
                    .collect())
            }
        }
    }
}

fn estimated_nodes(domain: &Domain, opts: &SolverOptions) -> f64 {
    let branching = match opts.expansion {
        Expansion::Exhaustive => domain.num_observations(),
        Expansion::Sampled { k, .. } => k.min(domain.num_observations()),
    } as f64
        * domain.num_actions() as f64;
    (0..opts.horizon).map(|d| branching.powi(d as i32)).sum()
}

/// Expands the reachability tree from `b0` and backs it up.
pub fn solve<E: BeliefDynamics>(engine: &E, b0: &FactoredBelief, opts: &SolverOptions) -> Result<Solution> {
    if let Expansion::Sampled { k: 0, .. } = opts.expansion {
        return Err(Error::Validation("observation sampling needs k >= 1".into()));
    }
    if !(0.0..=1.0).contains(&opts.gamma) {
        return Err(Error::Validation(format!("discount {} outside [0, 1]", opts.gamma)));
    }
    let domain = engine.domain();
    if opts.horizon == 0 {
        return Ok(Solution {
            value: 0.0,
            policy: Policy::empty(),
            root_q: Vec::new(),
            nodes: 0,
            trie_peak: engine.trie_peak(),
        });
    }
    let estimate = estimated_nodes(domain, opts);
    if estimate > opts.node_limit {
        return Err(Error::TooLarge {
            what: "reachability tree",
            estimate,
            limit: opts.node_limit,
        });
    }
    let mut solver = Solver {
        engine,
        opts,
        nodes: 0,
    };
    let (value, tree, root_q) = solver.expand(b0.clone(), 0, 0)?;
    let policy = extract_policy(&tree, opts.horizon, domain.num_actions());
    Ok(Solution {
        value,
        policy,
        root_q,
        nodes: solver.nodes,
        trie_peak: engine.trie_peak(),
    })
}

/// Full expansion over every observation with positive likelihood.
pub fn solve_exact<E: BeliefDynamics>(engine: &E, b0: &FactoredBelief, horizon: usize, gamma: f64) -> Result<Solution> {
    solve(engine, b0, &SolverOptions::exact(horizon, gamma))
}

/// Expansion with `k` sampled observations per action node.
pub fn solve_sampled<E: BeliefDynamics>(
    engine: &E,
    b0: &FactoredBelief,
    horizon: usize,
    gamma: f64,
    k: usize,
    seed: u64,
) -> Result<Solution> {
    solve(engine, b0, &SolverOptions::sampled(horizon, gamma, k, seed))
}

/// The same tree algorithm on joint-model, joint-action enumeration.
pub fn naive_solve(domain: &Domain, b0: &FactoredBelief, horizon: usize, gamma: f64) -> Result<Solution> {
    let engine = NaiveEngine::new(domain)?;
    solve_exact(&engine, b0, horizon, gamma)
}

fn extract_policy(tree: &PlanTree, horizon: usize, num_actions: usize) -> Policy {
    let mut plans = BTreeMap::new();
    let mut weighted = vec![vec![0.0; num_actions]; horizon];
    let mut stack: Vec<(Vec<ObsId>, f64, &PlanTree)> = vec![(Vec::new(), 1.0, tree)];
    while let Some((hist, reach, node)) = stack.pop() {
        let d = hist.len();
        for (acc, r) in weighted[d].iter_mut().zip(&node.rewards) {
            *acc += reach * r;
        }
        for (obs, w, child) in &node.children {
            let mut h = hist.clone();
            h.push(*obs);
            stack.push((h, reach * w, child));
        }
        plans.insert(hist, node.action);
    }
    let defaults = weighted
        .iter()
        .map(|row| argmax_with_ties(row).unwrap_or(0))
        .collect();
    Policy {
        horizon,
        plans,
        defaults,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ties_go_to_the_lowest_index() {
        assert_eq!(argmax_with_ties(&[1.0, 3.0, 3.0]), Some(1));
        assert_eq!(argmax_with_ties(&[1.0, 3.0, 3.0 + 1e-13]), Some(1));
        assert_eq!(argmax_with_ties(&[1.0, 3.0, 3.1]), Some(2));
        assert_eq!(argmax_with_ties(&[]), None);
    }

    #[test]
    fn backup_needs_valued_children() {
        let b = FactoredBelief::new(vec![1.0], vec![]).unwrap();
        let mut node = ReachabilityNode::new(b, 0);
        node.expansions.push(ActionExpansion {
            action: 0,
            expected_reward: 1.0,
            branches: vec![Branch {
                obs: 0,
                weight: 1.0,
                value: None,
            }],
        });
        assert!(matches!(backup(&mut node, 0.9, 2), Err(Error::Contract(_))));
        node.expansions[0].branches[0].value = Some(2.0);
        assert_eq!(backup(&mut node, 0.5, 2).unwrap(), 2.0);
        assert_eq!(node.best_action, Some(0));
        let mut leaf = ReachabilityNode::new(node.belief.clone(), 2);
        assert_eq!(backup(&mut leaf, 0.9, 2).unwrap(), 0.0);
    }

    #[test]
    fn path_hash_separates_siblings() {
        let a = mix(mix(0, 1), 2);
        let b = mix(mix(0, 2), 1);
        assert_ne!(a, b);
    }
}
