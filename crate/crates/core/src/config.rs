//! Frame-action configurations and their distributions.
//!
//! A configuration over a neighborhood `nu` counts, for every `(action,
//! frame)` pair in `nu`, how many agents of that frame perform that action;
//! agents doing anything else are counted in the trailing dummy slot.
//! [`config_distribution`] builds the exact distribution over configurations
//! induced by independent per-agent action draws, adding one agent at a time
//! into a trie keyed on the counts.

use std::fmt::Write as _;

use rustc_hash::FxHashMap;

use crate::error::{Error, Result};
use crate::hypergraph::{FrameAction, Neighborhood};
use crate::population::{ActionId, Frame, FrameId, Fsc};

/// Count vector over a neighborhood plus the dummy slot (always last).
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Configuration {
    counts: Vec<u32>,
}

impl Configuration {
    pub fn new(counts: Vec<u32>) -> Self {
        assert!(!counts.is_empty(), "configuration needs at least the dummy slot");
        Self { counts }
    }

    pub fn zeros(nu_len: usize) -> Self {
        Self {
            counts: vec![0; nu_len + 1],
        }
    }

    pub fn counts(&self) -> &[u32] {
        &self.counts
    }

    pub fn phi(&self) -> u32 {
        *self.counts.last().unwrap()
    }

    /// Number of agents covered.
    pub fn total(&self) -> u32 {
        self.counts.iter().sum()
    }

    /// Number of explicit slots (without the dummy slot).
    pub fn nu_len(&self) -> usize {
        self.counts.len() - 1
    }
}

impl From<Vec<u32>> for Configuration {
    fn from(counts: Vec<u32>) -> Self {
        Self::new(counts)
    }
}

/// Maps a joint action to its configuration over `nu`.
pub fn project(
    joint_action: &[ActionId],
    agent_frames: &[FrameId],
    frames: &[Frame],
    nu: &Neighborhood,
) -> Result<Configuration> {
    if joint_action.len() != agent_frames.len() {
        return Err(Error::Validation(format!(
            "joint action has {} entries for {} agents",
            joint_action.len(),
            agent_frames.len()
        )));
    }
    let mut counts = vec![0u32; nu.len() + 1];
    for (j, (&a, &f)) in joint_action.iter().zip(agent_frames).enumerate() {
        let frame = frames.get(f).ok_or_else(|| Error::lookup("frame", f))?;
        if a >= frame.num_actions() {
            return Err(Error::Validation(format!(
                "agent {j} action {a} is not in frame `{}`",
                frame.id
            )));
        }
        let slot = nu.slot_of(FrameAction::new(f, a)).unwrap_or(nu.phi());
        counts[slot] += 1;
    }
    Ok(Configuration { counts })
}

/// `C(n + k, k)`: number of weak compositions of `n` into `k + 1` parts.
/// Saturates at `u128::MAX`.
pub fn num_configs(n: usize, nu_len: usize) -> u128 {
    let k = nu_len as u128;
    let n = n as u128;
    let mut acc: u128 = 1;
    for i in 1..=k {
        // acc * (n + i) / i stays integral at each step
        acc = match acc.checked_mul(n + i) {
            Some(v) => v / i,
            None => return u128::MAX,
        };
    }
    acc
}

/// All configurations of `n_agents` over `nu_len` explicit slots plus the
/// dummy slot, in lexicographic order.
pub fn enumerate_configs(nu_len: usize, n_agents: usize) -> Vec<Configuration> {
    let slots = nu_len + 1;
    let mut out = Vec::new();
    let mut counts = vec![0u32; slots];
    fn rec(slot: usize, remaining: u32, counts: &mut Vec<u32>, out: &mut Vec<Configuration>) {
        if slot + 1 == counts.len() {
            counts[slot] = remaining;
            out.push(Configuration {
                counts: counts.clone(),
            });
            return;
        }
        for c in 0..=remaining {
            counts[slot] = c;
            rec(slot + 1, remaining - c, counts, out);
        }
    }
    rec(0, n_agents as u32, &mut counts, &mut out);
    out
}

/// Distribution over configurations stored as a trie keyed on the counts,
/// one digit per slot in canonical neighborhood order with the dummy slot
/// last.
///
/// Edges live in a single hash map from `(parent, digit)` to child, so a
/// lookup or insertion costs one probe per key digit. Entries iterate in
/// insertion order.
#[derive(Debug, Clone)]
pub struct ConfigTrie {
    key_len: usize,
    edges: FxHashMap<(u32, u32), u32>,
    /// `(parent, digit)` of every node; node 0 is the root.
    nodes: Vec<(u32, u32)>,
    /// `(leaf node, probability)` in insertion order.
    entries: Vec<(u32, f64)>,
    /// leaf node -> index into `entries`
    leaf_slot: FxHashMap<u32, u32>,
}

impl ConfigTrie {
    pub fn new(key_len: usize) -> Self {
        assert!(key_len >= 1);
        Self {
            key_len,
            edges: FxHashMap::default(),
            nodes: vec![(u32::MAX, 0)],
            entries: Vec::new(),
            leaf_slot: FxHashMap::default(),
        }
    }

    fn with_capacity(key_len: usize, entries: usize) -> Self {
        let mut t = Self::new(key_len);
        t.edges.reserve(entries * 2);
        t.nodes.reserve(entries * 2);
        t.entries.reserve(entries);
        t.leaf_slot.reserve(entries);
        t
    }

    /// Length of every key (`|nu| + 1`).
    pub fn key_len(&self) -> usize {
        self.key_len
    }

    /// Number of stored configurations.
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    fn find_leaf(&self, key: &[u32]) -> Option<u32> {
        let mut node = 0u32;
        for &d in key {
            node = *self.edges.get(&(node, d))?;
        }
        Some(node)
    }

    /// Adds `p` to the probability stored at `key`, inserting it if absent.
    pub fn add(&mut self, key: &[u32], p: f64) {
        assert_eq!(key.len(), self.key_len, "key length mismatch");
        let mut node = 0u32;
        for &d in key {
            let next = self.nodes.len() as u32;
            node = *self.edges.entry((node, d)).or_insert_with(|| {
                self.nodes.push((node, d));
                next
            });
        }
        match self.leaf_slot.get(&node) {
            Some(&i) => self.entries[i as usize].1 += p,
            None => {
                self.leaf_slot.insert(node, self.entries.len() as u32);
                self.entries.push((node, p));
            }
        }
    }

    pub fn get(&self, key: &[u32]) -> Option<f64> {
        if key.len() != self.key_len {
            return None;
        }
        let leaf = self.find_leaf(key)?;
        self.leaf_slot
            .get(&leaf)
            .map(|&i| self.entries[i as usize].1)
    }

    fn key_into(&self, mut node: u32, buf: &mut [u32]) {
        for slot in (0..self.key_len).rev() {
            let (parent, digit) = self.nodes[node as usize];
            buf[slot] = digit;
            node = parent;
        }
    }

    /// Calls `f(key, probability)` for every entry in insertion order.
    pub fn for_each(&self, mut f: impl FnMut(&[u32], f64)) {
        let mut buf = vec![0u32; self.key_len];
        for &(leaf, p) in &self.entries {
            self.key_into(leaf, &mut buf);
            f(&buf, p);
        }
    }

    /// Entries as owned configurations, in insertion order.
    pub fn entries(&self) -> Vec<(Configuration, f64)> {
        let mut out = Vec::with_capacity(self.len());
        self.for_each(|k, p| out.push((Configuration::new(k.to_vec()), p)));
        out
    }

    pub fn total(&self) -> f64 {
        self.entries.iter().map(|e| e.1).sum()
    }

    /// Sorted `counts -> probability` lines, for debugging and fixtures.
    pub fn dump(&self) -> String {
        let mut entries = self.entries();
        entries.sort_by(|a, b| a.0.cmp(&b.0));
        let mut out = String::new();
        for (cfg, p) in entries {
            let key: Vec<String> = cfg.counts().iter().map(u32::to_string).collect();
            let _ = writeln!(out, "{} -> {:.17e}", key.join(","), p);
        }
        out
    }

    /// New trie with `slot` incremented in every key.
    pub fn incremented(&self, slot: usize) -> ConfigTrie {
        assert!(slot < self.key_len);
        let mut out = ConfigTrie::with_capacity(self.key_len, self.len());
        let mut key = vec![0u32; self.key_len];
        for &(leaf, p) in &self.entries {
            self.key_into(leaf, &mut key);
            key[slot] += 1;
            out.add(&key, p);
        }
        out
    }

    /// Drops every entry with probability below `threshold`.
    pub fn pruned(&self, threshold: f64) -> ConfigTrie {
        let mut out = ConfigTrie::with_capacity(self.key_len, self.len());
        self.for_each(|k, p| {
            if p >= threshold {
                out.add(k, p);
            }
        });
        out
    }
}

impl PartialEq for ConfigTrie {
    /// Same key set with identical probabilities, regardless of insertion
    /// order.
    fn eq(&self, other: &Self) -> bool {
        if self.key_len != other.key_len || self.len() != other.len() {
            return false;
        }
        let mut same = true;
        self.for_each(|k, p| {
            if other.get(k) != Some(p) {
                same = false;
            }
        });
        same
    }
}

/// One agent as seen by the configuration counter: its frame, its controller
/// and agent 0's conditional belief over the controller's nodes.
#[derive(Debug, Clone, Copy)]
pub struct AgentDraw<'a> {
    pub frame: FrameId,
    pub fsc: &'a Fsc,
    pub belief: &'a [f64],
}

#[derive(Debug, Clone, Copy, Default)]
pub struct TrieOptions {
    /// Drop entries below this probability after each agent pass.
    pub prune_below: Option<f64>,
}

const BELIEF_TOLERANCE: f64 = 1e-9;

fn check_draw(j: usize, d: &AgentDraw<'_>) -> Result<()> {
    if d.belief.len() != d.fsc.num_nodes() {
        return Err(Error::Validation(format!(
            "agent {j}: belief over {} nodes for a {}-node controller",
            d.belief.len(),
            d.fsc.num_nodes()
        )));
    }
    let total: f64 = d.belief.iter().sum();
    if (total - 1.0).abs() > BELIEF_TOLERANCE || d.belief.iter().any(|p| *p < 0.0) {
        return Err(Error::Validation(format!(
            "agent {j}: model belief is not normalized (sums to {total})"
        )));
    }
    Ok(())
}

/// Exact distribution over configurations of `agents` over `nu`.
///
/// Agents are added one at a time: every configuration of the first `j-1`
/// agents is extended by each action of agent `j` with positive probability
/// under each of its models, incrementing the action's slot (or the dummy
/// slot when `(action, frame)` is outside `nu`).
pub fn config_distribution(
    nu: &Neighborhood,
    agents: &[AgentDraw<'_>],
    opts: &TrieOptions,
) -> Result<ConfigTrie> {
    for (j, d) in agents.iter().enumerate() {
        check_draw(j, d)?;
    }
    Ok(config_distribution_unchecked(nu, agents, opts))
}

pub(crate) fn config_distribution_unchecked(
    nu: &Neighborhood,
    agents: &[AgentDraw<'_>],
    opts: &TrieOptions,
) -> ConfigTrie {
    let key_len = nu.len() + 1;
    let mut current = ConfigTrie::new(key_len);
    current.add(&vec![0; key_len], 1.0);

    let mut slot_cache: Vec<(FrameId, usize, Vec<usize>)> = Vec::new();
    let mut key = vec![0u32; key_len];
    for d in agents {
        let slots = match slot_cache
            .iter()
            .position(|(f, n, _)| *f == d.frame && *n == d.fsc.num_actions)
        {
            Some(i) => &slot_cache[i].2,
            None => {
                slot_cache.push((d.frame, d.fsc.num_actions, nu.slot_map(d.frame, d.fsc.num_actions)));
                &slot_cache.last().unwrap().2
            }
        };
        let mut next = ConfigTrie::with_capacity(key_len, current.len() + current.len() / 2 + 1);
        for &(leaf, base) in &current.entries {
            current.key_into(leaf, &mut key);
            for (m, &bm) in d.belief.iter().enumerate() {
                if bm <= 0.0 {
                    continue;
                }
                for (a, &pa) in d.fsc.action_dist[m].iter().enumerate() {
                    if pa <= 0.0 {
                        continue;
                    }
                    let s = slots[a];
                    key[s] += 1;
                    next.add(&key, base * pa * bm);
                    key[s] -= 1;
                }
            }
        }
        current = match opts.prune_below {
            Some(t) => next.pruned(t),
            None => next,
        };
    }
    current
}

/// Configuration distribution used in another agent's model update: the
/// other agents are counted as usual, then agent 0's action `a0` is added to
/// every configuration (its slot if `(a0, frame0)` is in `nu`, else the
/// dummy slot).
pub fn config_distribution_for_agent_j(
    nu: &Neighborhood,
    others: &[AgentDraw<'_>],
    a0: ActionId,
    frame0: FrameId,
    opts: &TrieOptions,
) -> Result<ConfigTrie> {
    let base = config_distribution(nu, others, opts)?;
    let slot = nu.slot_of(FrameAction::new(frame0, a0)).unwrap_or(nu.phi());
    Ok(base.incremented(slot))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::population::Frame;

    fn frame(n: usize) -> Frame {
        let names: Vec<String> = (0..n).map(|i| format!("a{i}")).collect();
        let refs: Vec<&str> = names.iter().map(String::as_str).collect();
        Frame::new("f", &refs, &["o"])
    }

    #[test]
    fn project_counts_and_is_permutation_invariant() {
        let frames = vec![frame(3)];
        let nu = Neighborhood::new(vec![FrameAction::new(0, 0), FrameAction::new(0, 1)]);
        let c = project(&[0, 1], &[0, 0], &frames, &nu).unwrap();
        assert_eq!(c.counts(), &[1, 1, 0]);
        let swapped = project(&[1, 0], &[0, 0], &frames, &nu).unwrap();
        assert_eq!(c, swapped);
        let outside = project(&[0, 2, 1], &[0, 0, 0], &frames, &nu).unwrap();
        assert_eq!(outside.counts(), &[1, 1, 1]);
        assert_eq!(outside.total(), 3);
        assert!(project(&[3], &[0], &frames, &nu).is_err());
    }

    #[test]
    fn stars_and_bars_counts() {
        // n=3, |nu|=2: explicit enumeration by hand gives 10
        let configs = enumerate_configs(2, 3);
        assert_eq!(configs.len(), 10);
        assert_eq!(num_configs(3, 2), 10);
        assert!(configs.iter().all(|c| c.total() == 3));
        let zero = enumerate_configs(4, 0);
        assert_eq!(zero.len(), 1);
        assert_eq!(zero[0].counts(), &[0, 0, 0, 0, 0]);
        let only_phi = enumerate_configs(0, 5);
        assert_eq!(only_phi.len(), 1);
        assert_eq!(only_phi[0].counts(), &[5]);
        assert_eq!(num_configs(1000, 2), 501_501);
    }

    #[test]
    fn trie_accumulates_and_looks_up() {
        let mut t = ConfigTrie::new(3);
        t.add(&[1, 0, 2], 0.25);
        t.add(&[0, 1, 2], 0.5);
        t.add(&[1, 0, 2], 0.25);
        assert_eq!(t.len(), 2);
        assert_eq!(t.get(&[1, 0, 2]), Some(0.5));
        assert_eq!(t.get(&[0, 0, 3]), None);
        assert_eq!(t.get(&[1, 0]), None);
        assert_eq!(t.total(), 1.0);
        let dump = t.dump();
        assert!(dump.starts_with("0,1,2 -> "), "{dump}");
        let inc = t.incremented(2);
        assert_eq!(inc.get(&[1, 0, 3]), Some(0.5));
    }

    #[test]
    fn two_uniform_agents() {
        let fsc = Fsc::single_node("u", 0, vec![0.5, 0.5], 1).unwrap();
        let nu = Neighborhood::new(vec![FrameAction::new(0, 0), FrameAction::new(0, 1)]);
        let b = [1.0];
        let agents = [AgentDraw { frame: 0, fsc: &fsc, belief: &b }; 2];
        let t = config_distribution(&nu, &agents, &TrieOptions::default()).unwrap();
        assert_eq!(t.len(), 3);
        assert_eq!(t.get(&[2, 0, 0]), Some(0.25));
        assert_eq!(t.get(&[1, 1, 0]), Some(0.5));
        assert_eq!(t.get(&[0, 2, 0]), Some(0.25));
    }

    #[test]
    fn action_outside_neighborhood_goes_to_phi() {
        let fsc = Fsc::single_node("c", 0, vec![0.0, 0.0, 1.0], 1).unwrap();
        let nu = Neighborhood::new(vec![FrameAction::new(0, 0), FrameAction::new(0, 1)]);
        let b = [1.0];
        let t = config_distribution(&nu, &[AgentDraw { frame: 0, fsc: &fsc, belief: &b }], &TrieOptions::default())
            .unwrap();
        assert_eq!(t.entries(), vec![(Configuration::new(vec![0, 0, 1]), 1.0)]);
    }

    #[test]
    fn agent_zero_increment() {
        let nu = Neighborhood::new(vec![FrameAction::new(1, 2)]);
        // only agent j exists: the others are empty, a0 lands in its slot
        let t = config_distribution_for_agent_j(&nu, &[], 2, 1, &TrieOptions::default()).unwrap();
        assert_eq!(t.entries(), vec![(Configuration::new(vec![1, 0]), 1.0)]);
        let t = config_distribution_for_agent_j(&nu, &[], 0, 1, &TrieOptions::default()).unwrap();
        assert_eq!(t.entries(), vec![(Configuration::new(vec![0, 1]), 1.0)]);
    }

    #[test]
    fn unnormalized_belief_rejected() {
        let fsc = Fsc::single_node("u", 0, vec![0.5, 0.5], 1).unwrap();
        let b = [0.9];
        let err = config_distribution(
            &Neighborhood::empty(),
            &[AgentDraw { frame: 0, fsc: &fsc, belief: &b }],
            &TrieOptions::default(),
        );
        assert!(matches!(err, Err(Error::Validation(_))));
    }
}
