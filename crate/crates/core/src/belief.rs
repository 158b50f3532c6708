//! Factored beliefs over physical states and other agents' controller nodes,
//! and the two belief-update engines.
//!
//! [`StructuredEngine`] computes predictions from configuration
//! distributions; [`NaiveEngine`] enumerates joint models and joint actions
//! and serves as the reference implementation.

use std::cell::RefCell;
use std::fmt::Write as _;
use std::rc::Rc;
use std::sync::Arc;

use rustc_hash::FxHashMap;

use crate::config::{config_distribution_unchecked, AgentDraw, ConfigTrie, TrieOptions};
use crate::domain::{CompiledContext, Domain};
use crate::error::{Error, Result};
use crate::hypergraph::{Context, FrameAction, Neighborhood};
use crate::population::{ActionId, FrameId, FscId, ObsId};

const BELIEF_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Eq)]
struct ModelLayout {
    num_states: usize,
    nodes: Vec<usize>,
    offsets: Vec<usize>,
}

impl ModelLayout {
    fn new(num_states: usize, nodes: Vec<usize>) -> Self {
        let mut offsets = Vec::with_capacity(nodes.len());
        let mut acc = 0;
        for &m in &nodes {
            offsets.push(acc);
            acc += num_states * m;
        }
        Self {
            num_states,
            nodes,
            offsets,
        }
    }

    fn total(&self) -> usize {
        self.nodes
            .last()
            .map_or(0, |&m| self.offsets[self.nodes.len() - 1] + self.num_states * m)
    }

    #[inline]
    fn row(&self, j: usize, s: usize) -> std::ops::Range<usize> {
        let start = self.offsets[j] + s * self.nodes[j];
        start..start + self.nodes[j]
    }
}

/// `b(s) * prod_j b(m_j | s)`: a distribution over physical states plus, for
/// every other agent and every state, a distribution over its controller
/// nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct FactoredBelief {
    state: Vec<f64>,
    layout: Arc<ModelLayout>,
    models: Vec<f64>,
    /// States whose model rows are uniform placeholders (zero state mass).
    placeholder: Vec<bool>,
}

impl FactoredBelief {
    /// `models[j][s]` is agent `j`'s node distribution given state `s`.
    pub fn new(state: Vec<f64>, models: Vec<Vec<Vec<f64>>>) -> Result<Self> {
        let n_states = state.len();
        let nodes: Vec<usize> = models
            .iter()
            .map(|rows| rows.first().map_or(0, Vec::len))
            .collect();
        let layout = ModelLayout::new(n_states, nodes);
        let mut flat = Vec::with_capacity(layout.total());
        for (j, rows) in models.iter().enumerate() {
            if rows.len() != n_states {
                return Err(Error::Validation(format!(
                    "agent {j}: {} model rows for {n_states} states",
                    rows.len()
                )));
            }
            for row in rows {
                if row.len() != layout.nodes[j] {
                    return Err(Error::Validation(format!("agent {j}: model rows of different lengths")));
                }
                flat.extend_from_slice(row);
            }
        }
        let b = Self {
            state,
            layout: Arc::new(layout),
            models: flat,
            placeholder: vec![false; n_states],
        };
        b.validate()?;
        Ok(b)
    }

    /// Same node distribution for every state.
    pub fn with_state_independent_models(state: Vec<f64>, models: &[Vec<f64>]) -> Result<Self> {
        let n = state.len();
        Self::new(state, models.iter().map(|r| vec![r.clone(); n]).collect())
    }

    /// The domain's initial belief.
    pub fn initial(domain: &Domain) -> Result<Self> {
        let ib = domain.initial_belief();
        Self::with_state_independent_models(ib.state.clone(), &ib.models)
    }

    pub fn validate(&self) -> Result<()> {
        let total: f64 = self.state.iter().sum();
        if (total - 1.0).abs() > BELIEF_TOLERANCE || self.state.iter().any(|p| *p < 0.0 || !p.is_finite()) {
            return Err(Error::Validation(format!("state distribution sums to {total}")));
        }
        for j in 0..self.num_agents() {
            if self.layout.nodes[j] == 0 {
                return Err(Error::Validation(format!("agent {j}: empty model distribution")));
            }
            for s in 0..self.num_states() {
                if self.state[s] <= 0.0 {
                    continue;
                }
                let row = self.model_dist(j, s);
                let t: f64 = row.iter().sum();
                if (t - 1.0).abs() > BELIEF_TOLERANCE || row.iter().any(|p| *p < 0.0) {
                    return Err(Error::Validation(format!(
                        "agent {j}: model distribution at state {s} sums to {t}"
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn num_states(&self) -> usize {
        self.state.len()
    }

    pub fn num_agents(&self) -> usize {
        self.layout.nodes.len()
    }

    pub fn num_nodes(&self, j: usize) -> usize {
        self.layout.nodes[j]
    }

    pub fn state_dist(&self) -> &[f64] {
        &self.state
    }

    /// `b(m_j | s)`.
    pub fn model_dist(&self, j: usize, s: usize) -> &[f64] {
        &self.models[self.layout.row(j, s)]
    }

    /// States whose model rows are uniform placeholders because the state
    /// has zero probability.
    pub fn placeholder_states(&self) -> Vec<usize> {
        (0..self.num_states()).filter(|&s| self.placeholder[s]).collect()
    }

    /// Number of stored scalars (probabilities and layout entries).
    pub fn structural_size(&self) -> usize {
        self.state.len()
            + self.models.len()
            + self.placeholder.len()
            + self.layout.nodes.len()
            + self.layout.offsets.len()
    }

    /// Text dump: `s p` lines for the state distribution, then `j s node p`
    /// lines for the model distributions of states with positive mass.
    pub fn snapshot(&self) -> String {
        let mut out = String::new();
        for (s, p) in self.state.iter().enumerate() {
            let _ = writeln!(out, "{s} {p:.17e}");
        }
        for j in 0..self.num_agents() {
            for s in 0..self.num_states() {
                if self.state[s] <= 0.0 {
                    continue;
                }
                for (m, p) in self.model_dist(j, s).iter().enumerate() {
                    let _ = writeln!(out, "{j} {s} {m} {p:.17e}");
                }
            }
        }
        out
    }

    /// Largest absolute difference over state probabilities and over model
    /// rows of states where either belief has positive mass.
    pub fn max_abs_diff(&self, other: &FactoredBelief) -> f64 {
        assert_eq!(self.layout, other.layout, "beliefs with different layouts");
        let mut d = 0.0f64;
        for s in 0..self.num_states() {
            d = d.max((self.state[s] - other.state[s]).abs());
            if self.state[s] <= 0.0 && other.state[s] <= 0.0 {
                continue;
            }
            for j in 0..self.num_agents() {
                for (a, b) in self.model_dist(j, s).iter().zip(other.model_dist(j, s)) {
                    d = d.max((a - b).abs());
                }
            }
        }
        d
    }
}

/// The predictive distribution after agent 0 acts: `Pr(s', omega | b, a0)`
/// and the updated model rows for every next state.
#[derive(Debug, Clone)]
pub struct Prediction {
    pub action: ActionId,
    num_obs: usize,
    joint: Vec<f64>,
    obs_probs: Vec<f64>,
    layout: Arc<ModelLayout>,
    models: Vec<f64>,
}

impl Prediction {
    fn new(action: ActionId, num_obs: usize, joint: Vec<f64>, layout: Arc<ModelLayout>, models: Vec<f64>) -> Self {
        let num_states = layout.num_states;
        let mut obs_probs = vec![0.0; num_obs];
        for s in 0..num_states {
            for (o, p) in obs_probs.iter_mut().enumerate() {
                *p += joint[s * num_obs + o];
            }
        }
        Self {
            action,
            num_obs,
            joint,
            obs_probs,
            layout,
            models,
        }
    }

    /// `Pr(omega | b, a0)` for every observation.
    pub fn obs_probs(&self) -> &[f64] {
        &self.obs_probs
    }

    /// `Pr(s', omega | b, a0)`.
    pub fn joint(&self, s_next: usize, obs: ObsId) -> f64 {
        self.joint[s_next * self.num_obs + obs]
    }

    /// Updated node distribution of agent `j` at next state `s_next`.
    pub fn model_dist(&self, j: usize, s_next: usize) -> &[f64] {
        &self.models[self.layout.row(j, s_next)]
    }

    /// Normalized next-state distribution given `obs`.
    pub fn state_posterior(&self, obs: ObsId) -> Result<Vec<f64>> {
        let z = self.obs_probs[obs];
        if z <= 0.0 {
            return Err(Error::ZeroProbabilityEvidence {
                action: self.action,
                obs,
            });
        }
        Ok((0..self.layout.num_states)
            .map(|s| self.joint[s * self.num_obs + obs] / z)
            .collect())
    }

    /// The updated belief after observing `obs`.
    pub fn posterior(&self, obs: ObsId) -> Result<FactoredBelief> {
        let state = self.state_posterior(obs)?;
        let mut models = self.models.clone();
        let mut placeholder = vec![false; state.len()];
        for (s, &p) in state.iter().enumerate() {
            if p > 0.0 {
                continue;
            }
            placeholder[s] = true;
            for j in 0..self.layout.nodes.len() {
                let m = self.layout.nodes[j];
                models[self.layout.row(j, s)].fill(1.0 / m as f64);
            }
        }
        Ok(FactoredBelief {
            state,
            layout: Arc::clone(&self.layout),
            models,
            placeholder,
        })
    }
}

/// A belief-update engine.
///
/// `prepare` computes whatever per-belief data the engine reuses across
/// actions; the other methods receive it back.
pub trait BeliefDynamics {
    type Prepared;

    fn domain(&self) -> &Domain;

    fn prepare(&self, b: &FactoredBelief) -> Result<Self::Prepared>;

    /// Expected immediate reward of `a0` under `b`.
    fn expected_reward_with(&self, b: &FactoredBelief, prep: &Self::Prepared, a0: ActionId) -> Result<f64>;

    fn predict_with(&self, b: &FactoredBelief, prep: &Self::Prepared, a0: ActionId) -> Result<Prediction>;

    fn expected_reward(&self, b: &FactoredBelief, a0: ActionId) -> Result<f64> {
        let prep = self.prepare(b)?;
        self.expected_reward_with(b, &prep, a0)
    }

    fn predict(&self, b: &FactoredBelief, a0: ActionId) -> Result<Prediction> {
        let prep = self.prepare(b)?;
        self.predict_with(b, &prep, a0)
    }

    /// `Pr(omega | b, a0)`.
    fn obs_likelihood(&self, b: &FactoredBelief, a0: ActionId, obs: ObsId) -> Result<f64> {
        Ok(self.predict(b, a0)?.obs_probs()[obs])
    }

    /// Posterior over next states.
    fn update_state(&self, b: &FactoredBelief, a0: ActionId, obs: ObsId) -> Result<Vec<f64>> {
        self.predict(b, a0)?.state_posterior(obs)
    }

    /// Updated node distribution of agent `j` at `s_next`. It depends on the
    /// next state and `a0` only, not on agent 0's observation.
    fn update_models(&self, b: &FactoredBelief, a0: ActionId, j: usize, s_next: usize) -> Result<Vec<f64>> {
        Ok(self.predict(b, a0)?.model_dist(j, s_next).to_vec())
    }

    fn belief_update(&self, b: &FactoredBelief, a0: ActionId, obs: ObsId) -> Result<FactoredBelief> {
        self.predict(b, a0)?.posterior(obs)
    }

    /// Largest configuration trie built so far.
    fn trie_peak(&self) -> usize {
        0
    }
}

fn check_belief(domain: &Domain, b: &FactoredBelief) -> Result<()> {
    if b.num_states() != domain.num_states() || b.num_agents() != domain.num_agents() {
        return Err(Error::Validation(format!(
            "belief over {} states and {} agents used with a domain of {} states and {} agents",
            b.num_states(),
            b.num_agents(),
            domain.num_states(),
            domain.num_agents()
        )));
    }
    for j in 0..b.num_agents() {
        if b.num_nodes(j) != domain.agent_fsc(j).num_nodes() {
            return Err(Error::Validation(format!(
                "agent {j}: belief over {} nodes, controller has {}",
                b.num_nodes(j),
                domain.agent_fsc(j).num_nodes()
            )));
        }
    }
    Ok(())
}

fn check_action(domain: &Domain, a0: ActionId) -> Result<()> {
    if a0 >= domain.num_actions() {
        return Err(Error::lookup("agent-0 action", a0));
    }
    Ok(())
}

/// Product of `factors`, through logarithms when a factor is below 1e-300.
#[inline]
fn guarded_product(factors: impl Iterator<Item = f64> + Clone) -> f64 {
    let mut tiny = false;
    let mut prod = 1.0;
    for f in factors.clone() {
        if f == 0.0 {
            return 0.0;
        }
        tiny |= f < 1e-300;
        prod *= f;
    }
    if tiny {
        factors.map(f64::ln).sum::<f64>().exp()
    } else {
        prod
    }
}

/// How the structured engine combines the per-factor configuration sums.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Coupling {
    /// One configuration distribution over the union of all neighborhoods
    /// in the product, each factor reading its own projection. Exact.
    #[default]
    Exact,
    /// Product over factors of per-context expectations. Exact only when the
    /// factors' neighborhoods do not share agents.
    Factorized,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
struct Group {
    frame: FrameId,
    fsc: FscId,
    row: Vec<u64>,
    count: u32,
}

type SliceKey = Vec<Group>;

#[derive(Debug)]
struct Slice {
    key: SliceKey,
    rows: Vec<Vec<f64>>,
}

#[derive(Debug, Default)]
struct Cache {
    slice_ids: FxHashMap<SliceKey, u32>,
    slices: Vec<Slice>,
    tries: FxHashMap<(u32, Neighborhood, Option<ActionId>), Rc<ConfigTrie>>,
    expectations: FxHashMap<(u32, Context, Option<ActionId>), f64>,
    rule_dists: FxHashMap<(u32, u32, Option<ActionId>), Rc<Vec<f64>>>,
    joint: FxHashMap<(u32, usize, ActionId), Rc<Vec<f64>>>,
    frame_q: FxHashMap<(u32, ActionId, FrameId, ActionId), Rc<Vec<f64>>>,
    model_rows: FxHashMap<(u32, u32, ActionId), Rc<Vec<f64>>>,
    exclusions: FxHashMap<(u32, u32), u32>,
    trie_peak: usize,
    tries_built: usize,
}

impl Cache {
    fn intern(&mut self, key: SliceKey) -> u32 {
        if let Some(&id) = self.slice_ids.get(&key) {
            return id;
        }
        let id = self.slices.len() as u32;
        let rows = key
            .iter()
            .map(|g| g.row.iter().map(|&b| f64::from_bits(b)).collect())
            .collect();
        self.slices.push(Slice { key: key.clone(), rows });
        self.slice_ids.insert(key, id);
        id
    }

    fn excluding(&mut self, slice: u32, group: u32) -> u32 {
        if let Some(&id) = self.exclusions.get(&(slice, group)) {
            return id;
        }
        let mut key = self.slices[slice as usize].key.clone();
        let g = group as usize;
        key[g].count -= 1;
        if key[g].count == 0 {
            key.remove(g);
        }
        let id = self.intern(key);
        self.exclusions.insert((slice, group), id);
        id
    }
}

/// Configuration mass aggregated by the rule each context class fires.
struct RuleOutcomes {
    /// Local class of every context.
    class_of: Vec<usize>,
    /// Fired rule per local class, one entry per distinct outcome.
    keys: Vec<Vec<u32>>,
    mass: Vec<f64>,
}

impl RuleOutcomes {
    fn collect(trie: &ConfigTrie, ctxs: &[&CompiledContext], union: &Neighborhood, total: u32) -> Self {
        let mut local: FxHashMap<u32, usize> = FxHashMap::default();
        let mut reps: Vec<usize> = Vec::new();
        let class_of: Vec<usize> = ctxs
            .iter()
            .enumerate()
            .map(|(i, c)| {
                *local.entry(c.class()).or_insert_with(|| {
                    reps.push(i);
                    reps.len() - 1
                })
            })
            .collect();
        let embeddings: Vec<Vec<usize>> = reps
            .iter()
            .map(|&i| ctxs[i].nu.embedding_in(union).expect("subset of union"))
            .collect();
        let mut index: FxHashMap<Vec<u32>, usize> = FxHashMap::default();
        let mut keys = Vec::new();
        let mut mass = Vec::new();
        let mut key = vec![0u32; reps.len()];
        trie.for_each(|counts, p| {
            for (slot, (&i, emb)) in key.iter_mut().zip(reps.iter().zip(&embeddings)) {
                *slot = ctxs[i].rule_index_with(|q| counts[emb[q]], total) as u32;
            }
            match index.get(key.as_slice()) {
                Some(&at) => mass[at] += p,
                None => {
                    index.insert(key.clone(), keys.len());
                    keys.push(key.clone());
                    mass.push(p);
                }
            }
        });
        Self { class_of, keys, mass }
    }
}

/// Per-belief data of the structured engine: for each state with positive
/// mass, the slice of grouped agents and every agent's group in it.
#[derive(Debug, Clone)]
pub struct SliceView {
    slice_of_state: Vec<u32>,
    group_of: Vec<Vec<u32>>,
}

/// Counters describing the structured engine's caches.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CacheStats {
    pub slices: usize,
    pub tries: usize,
    pub tries_built: usize,
    pub trie_peak: usize,
    pub expectations: usize,
    pub joint_tensors: usize,
}

/// Belief updates through configuration distributions.
///
/// Agents sharing frame, controller and conditional node belief at a state
/// are grouped; every configuration distribution, context expectation and
/// prediction tensor is cached for the engine's lifetime under a key made of
/// these groups, so repeated beliefs cost lookups only.
pub struct StructuredEngine<'d> {
    domain: &'d Domain,
    coupling: Coupling,
    trie_opts: TrieOptions,
    state_values: Vec<Vec<usize>>,
    cache: RefCell<Cache>,
}

impl<'d> StructuredEngine<'d> {
    pub fn new(domain: &'d Domain) -> Self {
        Self::with_coupling(domain, Coupling::Exact)
    }

    pub fn with_coupling(domain: &'d Domain, coupling: Coupling) -> Self {
        let states = domain.states();
        let state_values = (0..states.size()).map(|s| states.state_of(s)).collect();
        Self {
            domain,
            coupling,
            trie_opts: TrieOptions::default(),
            state_values,
            cache: RefCell::new(Cache::default()),
        }
    }

    pub fn with_trie_options(mut self, opts: TrieOptions) -> Self {
        self.trie_opts = opts;
        self
    }

    pub fn coupling(&self) -> Coupling {
        self.coupling
    }

    pub fn cache_stats(&self) -> CacheStats {
        let c = self.cache.borrow();
        CacheStats {
            slices: c.slices.len(),
            tries: c.tries.len(),
            tries_built: c.tries_built,
            trie_peak: c.trie_peak,
            expectations: c.expectations.len(),
            joint_tensors: c.joint.len(),
        }
    }

    pub fn clear_cache(&self) {
        *self.cache.borrow_mut() = Cache::default();
    }

    fn build_slice(&self, b: &FactoredBelief, s: usize, cache: &mut Cache) -> (u32, Vec<u32>) {
        let d = self.domain;
        let n = d.num_agents();
        let mut index: FxHashMap<Group, u32> = FxHashMap::default();
        let mut groups: Vec<Group> = Vec::new();
        let mut tmp = Vec::with_capacity(n);
        for j in 0..n {
            let row: Vec<u64> = b
                .model_dist(j, s)
                .iter()
                .map(|&p| if p == 0.0 { 0 } else { p.to_bits() })
                .collect();
            let g = Group {
                frame: d.agent_frames()[j],
                fsc: d.population().fsc_of(j),
                row,
                count: 0,
            };
            let id = *index.entry(g.clone()).or_insert_with(|| {
                groups.push(g);
                groups.len() as u32 - 1
            });
            groups[id as usize].count += 1;
            tmp.push(id);
        }
        let mut order: Vec<u32> = (0..groups.len() as u32).collect();
        order.sort_by(|&a, &b| groups[a as usize].cmp(&groups[b as usize]));
        let mut rank = vec![0u32; groups.len()];
        for (r, &g) in order.iter().enumerate() {
            rank[g as usize] = r as u32;
        }
        let key: SliceKey = order.iter().map(|&g| groups[g as usize].clone()).collect();
        let id = cache.intern(key);
        (id, tmp.iter().map(|&g| rank[g as usize]).collect())
    }

    fn trie(&self, cache: &mut Cache, slice: u32, nu: &Neighborhood, inc: Option<ActionId>) -> Rc<ConfigTrie> {
        if let Some(t) = cache.tries.get(&(slice, nu.clone(), inc)) {
            return Rc::clone(t);
        }
        let trie = match inc {
            Some(a0) => {
                let base = self.trie(cache, slice, nu, None);
                let slot = nu
                    .slot_of(FrameAction::new(self.domain.agent0_frame(), a0))
                    .unwrap_or(nu.phi());
                base.incremented(slot)
            }
            None => {
                let sl = &cache.slices[slice as usize];
                let fscs = self.domain.fscs();
                let mut draws = Vec::new();
                for (g, row) in sl.key.iter().zip(&sl.rows) {
                    for _ in 0..g.count {
                        draws.push(AgentDraw {
                            frame: g.frame,
                            fsc: &fscs[g.fsc],
                            belief: row,
                        });
                    }
                }
                cache.tries_built += 1;
                config_distribution_unchecked(nu, &draws, &self.trie_opts)
            }
        };
        cache.trie_peak = cache.trie_peak.max(trie.len());
        let trie = Rc::new(trie);
        cache.tries.insert((slice, nu.clone(), inc), Rc::clone(&trie));
        trie
    }

    /// Number of agents counted by configurations of `slice`, plus agent 0
    /// when `inc` is set.
    fn slice_total(cache: &Cache, slice: u32, inc: Option<ActionId>) -> u32 {
        cache.slices[slice as usize].key.iter().map(|g| g.count).sum::<u32>() + inc.is_some() as u32
    }

    fn expectation(
        &self,
        cache: &mut Cache,
        slice: u32,
        ctx: Context,
        compiled: &CompiledContext,
        inc: Option<ActionId>,
    ) -> f64 {
        let total = Self::slice_total(cache, slice, inc);
        if compiled.is_constant() {
            return compiled.value_with(|_| 0, total);
        }
        if let Some(&v) = cache.expectations.get(&(slice, ctx, inc)) {
            return v;
        }
        let dist = match cache.rule_dists.get(&(slice, compiled.class(), inc)) {
            Some(dist) => Rc::clone(dist),
            None => {
                let trie = self.trie(cache, slice, &compiled.nu, inc);
                let mut dist = vec![0.0; compiled.num_rules() + 1];
                trie.for_each(|counts, p| dist[compiled.rule_index_with(|i| counts[i], total)] += p);
                let dist = Rc::new(dist);
                cache.rule_dists.insert((slice, compiled.class(), inc), Rc::clone(&dist));
                dist
            }
        };
        let acc = dist.iter().enumerate().map(|(r, &p)| p * compiled.rule_value(r)).sum();
        cache.expectations.insert((slice, ctx, inc), acc);
        acc
    }

    fn joint_tensor(&self, cache: &mut Cache, slice: u32, s: usize, a0: ActionId) -> Rc<Vec<f64>> {
        if let Some(t) = cache.joint.get(&(slice, s, a0)) {
            return Rc::clone(t);
        }
        let t = Rc::new(match self.coupling {
            Coupling::Exact => self.joint_exact(cache, slice, s, a0),
            Coupling::Factorized => self.joint_factorized(cache, slice, s, a0),
        });
        cache.joint.insert((slice, s, a0), Rc::clone(&t));
        t
    }

    /// Contexts of the product at `(s, a0)`: per factor, the transition
    /// contexts over `x_k'` followed by the observation contexts over
    /// `(x_k', omega)`.
    fn product_contexts(&self, s: usize, a0: ActionId) -> (Vec<&'d CompiledContext>, Vec<usize>, Vec<usize>) {
        let d = self.domain;
        let sizes = &d.context_space().factor_sizes;
        let no = d.num_observations();
        let x = &self.state_values[s];
        let mut ctxs = Vec::new();
        let mut t_off = Vec::with_capacity(sizes.len());
        let mut o_off = Vec::with_capacity(sizes.len());
        for (k, &xs) in sizes.iter().enumerate() {
            t_off.push(ctxs.len());
            for xn in 0..xs {
                ctxs.push(d.transition_ctx(k, x[k], a0, xn));
            }
            o_off.push(ctxs.len());
            for xn in 0..xs {
                for o in 0..no {
                    ctxs.push(d.observation_ctx(k, xn, a0, o));
                }
            }
        }
        (ctxs, t_off, o_off)
    }

    fn joint_exact(&self, cache: &mut Cache, slice: u32, s: usize, a0: ActionId) -> Vec<f64> {
        let d = self.domain;
        let no = d.num_observations();
        let ns = d.num_states();
        let k_count = self.state_values[0].len();
        let (ctxs, t_off, o_off) = self.product_contexts(s, a0);
        let union = Neighborhood::union(ctxs.iter().map(|c| &c.nu));
        let total = Self::slice_total(cache, slice, None);
        let trie = self.trie(cache, slice, &union, None);
        let outcomes = RuleOutcomes::collect(&trie, &ctxs, &union, total);
        let mut vals = vec![0.0; ctxs.len()];
        let mut out = vec![0.0; ns * no];
        for (key, &p) in outcomes.keys.iter().zip(&outcomes.mass) {
            for (i, c) in ctxs.iter().enumerate() {
                vals[i] = c.rule_value(key[outcomes.class_of[i]] as usize);
            }
            for (sn, xn) in self.state_values.iter().enumerate() {
                let mut t = p;
                for k in 0..k_count {
                    t *= vals[t_off[k] + xn[k]];
                }
                if t == 0.0 {
                    continue;
                }
                for o in 0..no {
                    let mut v = t;
                    for k in 0..k_count {
                        v *= vals[o_off[k] + xn[k] * no + o];
                    }
                    out[sn * no + o] += v;
                }
            }
        }
        out
    }

    fn joint_factorized(&self, cache: &mut Cache, slice: u32, s: usize, a0: ActionId) -> Vec<f64> {
        let d = self.domain;
        let no = d.num_observations();
        let ns = d.num_states();
        let k_count = self.state_values[0].len();
        let x = self.state_values[s].clone();
        let sizes = &d.context_space().factor_sizes;
        let mut et: Vec<Vec<f64>> = Vec::with_capacity(k_count);
        let mut eo: Vec<Vec<f64>> = Vec::with_capacity(k_count);
        for (k, &xs) in sizes.iter().enumerate() {
            et.push(
                (0..xs)
                    .map(|xn| {
                        let ctx = Context::Transition { factor: k, x: x[k], a0, x_next: xn };
                        self.expectation(cache, slice, ctx, d.transition_ctx(k, x[k], a0, xn), None)
                    })
                    .collect(),
            );
            let mut row = Vec::with_capacity(xs * no);
            for xn in 0..xs {
                for o in 0..no {
                    let ctx = Context::Observation { factor: k, x_next: xn, a0, obs: o };
                    row.push(self.expectation(cache, slice, ctx, d.observation_ctx(k, xn, a0, o), None));
                }
            }
            eo.push(row);
        }
        let mut out = vec![0.0; ns * no];
        for (sn, xn) in self.state_values.iter().enumerate() {
            for o in 0..no {
                let factors = (0..k_count).flat_map(|k| [et[k][xn[k]], eo[k][xn[k] * no + o]]);
                out[sn * no + o] = guarded_product(factors);
            }
        }
        out
    }

    /// `Q[s'][omega_j] = sum_C Pr(C) prod_k O_j(x_k', a_j, C, omega_j)` for
    /// the agents of `slice` plus agent 0 doing `a0`.
    fn frame_q(&self, cache: &mut Cache, slice: u32, a0: ActionId, frame: FrameId, aj: ActionId) -> Rc<Vec<f64>> {
        if let Some(q) = cache.frame_q.get(&(slice, a0, frame, aj)) {
            return Rc::clone(q);
        }
        let d = self.domain;
        let sizes = &d.context_space().factor_sizes;
        let nof = d.frames()[frame].num_observations();
        let k_count = sizes.len();
        let mut ctxs: Vec<&CompiledContext> = Vec::new();
        let mut keys: Vec<Context> = Vec::new();
        let mut off = Vec::with_capacity(k_count);
        for (k, &xs) in sizes.iter().enumerate() {
            off.push(ctxs.len());
            for xn in 0..xs {
                for o in 0..nof {
                    ctxs.push(d.frame_observation_ctx(frame, k, xn, aj, o));
                    keys.push(Context::FrameObservation { frame, factor: k, x_next: xn, action: aj, obs: o });
                }
            }
        }
        let mut q = vec![0.0; d.num_states() * nof];
        match self.coupling {
            Coupling::Exact => {
                let union = Neighborhood::union(ctxs.iter().map(|c| &c.nu));
                let total = Self::slice_total(cache, slice, Some(a0));
                let trie = self.trie(cache, slice, &union, Some(a0));
                let outcomes = RuleOutcomes::collect(&trie, &ctxs, &union, total);
                let mut vals = vec![0.0; ctxs.len()];
                for (key, &p) in outcomes.keys.iter().zip(&outcomes.mass) {
                    for (i, c) in ctxs.iter().enumerate() {
                        vals[i] = c.rule_value(key[outcomes.class_of[i]] as usize);
                    }
                    for (sn, xn) in self.state_values.iter().enumerate() {
                        for o in 0..nof {
                            let mut v = p;
                            for k in 0..k_count {
                                v *= vals[off[k] + xn[k] * nof + o];
                            }
                            q[sn * nof + o] += v;
                        }
                    }
                }
            }
            Coupling::Factorized => {
                let e: Vec<f64> = ctxs
                    .iter()
                    .zip(&keys)
                    .map(|(c, key)| self.expectation(cache, slice, *key, c, Some(a0)))
                    .collect();
                for (sn, xn) in self.state_values.iter().enumerate() {
                    for o in 0..nof {
                        q[sn * nof + o] = guarded_product((0..k_count).map(|k| e[off[k] + xn[k] * nof + o]));
                    }
                }
            }
        }
        let q = Rc::new(q);
        cache.frame_q.insert((slice, a0, frame, aj), Rc::clone(&q));
        q
    }

    /// Unnormalized next-node rows `[s'][m']` contributed by one agent of
    /// `group` in `slice`.
    fn model_rows(&self, cache: &mut Cache, slice: u32, group: u32, a0: ActionId) -> Rc<Vec<f64>> {
        if let Some(r) = cache.model_rows.get(&(slice, group, a0)) {
            return Rc::clone(r);
        }
        let excl = cache.excluding(slice, group);
        let g = &cache.slices[slice as usize].key[group as usize];
        let (frame, fsc_id) = (g.frame, g.fsc);
        let row = cache.slices[slice as usize].rows[group as usize].clone();
        let fsc = &self.domain.fscs()[fsc_id];
        let nof = fsc.num_observations;
        let m_count = fsc.num_nodes();
        let ns = self.domain.num_states();
        let mut out = vec![0.0; ns * m_count];
        for aj in 0..fsc.num_actions {
            let pa: f64 = row
                .iter()
                .enumerate()
                .map(|(m, &bm)| bm * fsc.action_dist[m][aj])
                .sum();
            if pa <= 0.0 {
                continue;
            }
            let q = self.frame_q(cache, excl, a0, frame, aj);
            for (m, &bm) in row.iter().enumerate() {
                let w = bm * fsc.action_dist[m][aj];
                if w <= 0.0 {
                    continue;
                }
                for o in 0..nof {
                    let step = fsc.step(m, aj, o);
                    for sn in 0..ns {
                        let v = w * q[sn * nof + o];
                        if v == 0.0 {
                            continue;
                        }
                        let dst = &mut out[sn * m_count..(sn + 1) * m_count];
                        for (d, &p) in dst.iter_mut().zip(step) {
                            *d += v * p;
                        }
                    }
                }
            }
        }
        let out = Rc::new(out);
        cache.model_rows.insert((slice, group, a0), Rc::clone(&out));
        out
    }
}

impl BeliefDynamics for StructuredEngine<'_> {
    type Prepared = SliceView;

    fn domain(&self) -> &Domain {
        self.domain
    }

    fn prepare(&self, b: &FactoredBelief) -> Result<SliceView> {
        check_belief(self.domain, b)?;
        let mut cache = self.cache.borrow_mut();
        let ns = b.num_states();
        let mut slice_of_state = vec![u32::MAX; ns];
        let mut group_of = vec![Vec::new(); ns];
        for s in 0..ns {
            if b.state[s] > 0.0 {
                let (id, groups) = self.build_slice(b, s, &mut cache);
                slice_of_state[s] = id;
                group_of[s] = groups;
            }
        }
        Ok(SliceView {
            slice_of_state,
            group_of,
        })
    }

    fn expected_reward_with(&self, b: &FactoredBelief, view: &SliceView, a0: ActionId) -> Result<f64> {
        check_action(self.domain, a0)?;
        let d = self.domain;
        let mut cache = self.cache.borrow_mut();
        let mut er = 0.0;
        for (s, &p) in b.state.iter().enumerate() {
            if p <= 0.0 {
                continue;
            }
            let slice = view.slice_of_state[s];
            let mut r = 0.0;
            for (k, &x) in self.state_values[s].iter().enumerate() {
                let ctx = Context::Reward { factor: k, x, a0 };
                r += self.expectation(&mut cache, slice, ctx, d.reward_ctx(k, x, a0), None);
            }
            er += p * r;
        }
        Ok(er)
    }

    fn predict_with(&self, b: &FactoredBelief, view: &SliceView, a0: ActionId) -> Result<Prediction> {
        check_action(self.domain, a0)?;
        let d = self.domain;
        let ns = d.num_states();
        let no = d.num_observations();
        let mut cache = self.cache.borrow_mut();
        let mut joint = vec![0.0; ns * no];
        for (s, &p) in b.state.iter().enumerate() {
            if p <= 0.0 {
                continue;
            }
            let t = self.joint_tensor(&mut cache, view.slice_of_state[s], s, a0);
            for (dst, &v) in joint.iter_mut().zip(t.iter()) {
                *dst += p * v;
            }
        }

        let layout = Arc::clone(&b.layout);
        let mut models = vec![0.0; layout.total()];
        let mut signatures: FxHashMap<Vec<u32>, usize> = FxHashMap::default();
        let mut computed: Vec<Vec<f64>> = Vec::new();
        for j in 0..b.num_agents() {
            let m_count = layout.nodes[j];
            if m_count == 1 {
                for sn in 0..ns {
                    models[layout.row(j, sn)][0] = 1.0;
                }
                continue;
            }
            let sig: Vec<u32> = (0..ns)
                .filter(|&s| b.state[s] > 0.0)
                .map(|s| view.group_of[s][j])
                .collect();
            let idx = match signatures.get(&sig) {
                Some(&i) => i,
                None => {
                    let mut rows = vec![0.0; ns * m_count];
                    for (s, &p) in b.state.iter().enumerate() {
                        if p <= 0.0 {
                            continue;
                        }
                        let contrib = self.model_rows(&mut cache, view.slice_of_state[s], view.group_of[s][j], a0);
                        for (dst, &v) in rows.iter_mut().zip(contrib.iter()) {
                            *dst += p * v;
                        }
                    }
                    normalize_rows(&mut rows, m_count);
                    computed.push(rows);
                    signatures.insert(sig, computed.len() - 1);
                    computed.len() - 1
                }
            };
            let src = &computed[idx];
            let start = layout.offsets[j];
            models[start..start + ns * m_count].copy_from_slice(src);
        }
        Ok(Prediction::new(a0, no, joint, layout, models))
    }

    fn trie_peak(&self) -> usize {
        self.cache.borrow().trie_peak
    }
}

/// Normalizes each row of `m` entries; rows with zero mass become uniform.
fn normalize_rows(rows: &mut [f64], m: usize) {
    for row in rows.chunks_mut(m) {
        let z: f64 = row.iter().sum();
        if z > 0.0 {
            row.iter_mut().for_each(|p| *p /= z);
        } else {
            row.fill(1.0 / m as f64);
        }
    }
}

/// Default cap on joint models times joint actions for [`NaiveEngine`].
pub const NAIVE_TERM_LIMIT: f64 = 1e6;

/// Joint-action tables of agent 0's functions for one action.
struct JointTables {
    /// `[a][k][x][x']`, flattened per joint action.
    transition: Vec<Vec<f64>>,
    /// `[a][k][x'][omega]`
    observation: Vec<Vec<f64>>,
    /// `[a][k][x]`
    reward: Vec<Vec<f64>>,
}

/// Reference engine: sums over every joint model and joint action of the
/// other agents, evaluating agent 0's functions on full joint actions.
pub struct NaiveEngine<'d> {
    domain: &'d Domain,
    limit: f64,
    joint_actions: Vec<Vec<ActionId>>,
    joint_models: Vec<Vec<usize>>,
    tables: RefCell<Vec<Option<Rc<JointTables>>>>,
}

/// Joint-action weights per state: `W[s][a] = sum_m prod_j b(m_j|s) Pr(a_j|m_j)`.
pub struct JointWeights {
    weights: Vec<Vec<f64>>,
}

impl<'d> NaiveEngine<'d> {
    pub fn new(domain: &'d Domain) -> Result<Self> {
        Self::with_limit(domain, NAIVE_TERM_LIMIT)
    }

    /// Refuses domains whose joint model space times joint action space
    /// exceeds `limit`.
    pub fn with_limit(domain: &'d Domain, limit: f64) -> Result<Self> {
        let n = domain.num_agents();
        let mut actions = 1.0f64;
        let mut models = 1.0f64;
        for j in 0..n {
            let fsc = domain.agent_fsc(j);
            actions *= fsc.num_actions as f64;
            models *= fsc.num_nodes() as f64;
        }
        if actions * models > limit {
            return Err(Error::TooLarge {
                what: "joint model and action space",
                estimate: actions * models,
                limit,
            });
        }
        let action_sizes: Vec<usize> = (0..n).map(|j| domain.agent_fsc(j).num_actions).collect();
        let node_sizes: Vec<usize> = (0..n).map(|j| domain.agent_fsc(j).num_nodes()).collect();
        Ok(Self {
            domain,
            limit,
            joint_actions: odometer(&action_sizes),
            joint_models: odometer(&node_sizes),
            tables: RefCell::new(vec![None; domain.num_actions()]),
        })
    }

    pub fn limit(&self) -> f64 {
        self.limit
    }

    fn tables(&self, a0: ActionId) -> Rc<JointTables> {
        if let Some(t) = &self.tables.borrow()[a0] {
            return Rc::clone(t);
        }
        let d = self.domain;
        let frames = d.agent_frames();
        let sizes = d.context_space().factor_sizes.clone();
        let no = d.num_observations();
        let eval = |c: &CompiledContext, a: &[ActionId]| -> f64 {
            let cfg = crate::config::project(a, frames, d.frames(), &c.nu).expect("valid joint action");
            c.value(cfg.counts())
        };
        let mut transition = Vec::with_capacity(self.joint_actions.len());
        let mut observation = Vec::with_capacity(self.joint_actions.len());
        let mut reward = Vec::with_capacity(self.joint_actions.len());
        for a in &self.joint_actions {
            let mut t = Vec::new();
            let mut o = Vec::new();
            let mut r = Vec::new();
            for (k, &xs) in sizes.iter().enumerate() {
                for x in 0..xs {
                    for xn in 0..xs {
                        t.push(eval(d.transition_ctx(k, x, a0, xn), a));
                    }
                    for w in 0..no {
                        o.push(eval(d.observation_ctx(k, x, a0, w), a));
                    }
                    r.push(eval(d.reward_ctx(k, x, a0), a));
                }
            }
            transition.push(t);
            observation.push(o);
            reward.push(r);
        }
        let t = Rc::new(JointTables {
            transition,
            observation,
            reward,
        });
        self.tables.borrow_mut()[a0] = Some(Rc::clone(&t));
        t
    }

    fn factor_offsets(&self, width: impl Fn(usize) -> usize) -> Vec<usize> {
        let mut off = Vec::new();
        let mut acc = 0;
        for &xs in &self.domain.context_space().factor_sizes {
            off.push(acc);
            acc += width(xs);
        }
        off
    }

    /// Joint weight of every joint model at `s`.
    fn model_weight(b: &FactoredBelief, s: usize, m: &[usize]) -> f64 {
        m.iter().enumerate().map(|(j, &mj)| b.model_dist(j, s)[mj]).product()
    }

    fn action_weight(&self, m: &[usize], a: &[ActionId]) -> f64 {
        a.iter()
            .enumerate()
            .map(|(j, &aj)| self.domain.agent_fsc(j).action_dist[m[j]][aj])
            .product()
    }

    /// `Pr(s', omega | b, a0)` over all next states and observations.
    pub fn naive_joint(&self, b: &FactoredBelief, w: &JointWeights, a0: ActionId) -> Vec<f64> {
        let d = self.domain;
        let states = d.states();
        let ns = d.num_states();
        let no = d.num_observations();
        let k_count = states.num_factors();
        let t_off = self.factor_offsets(|xs| xs * xs);
        let o_off = self.factor_offsets(|xs| xs * no);
        let tables = self.tables(a0);
        let values: Vec<Vec<usize>> = (0..ns).map(|s| states.state_of(s)).collect();
        let mut out = vec![0.0; ns * no];
        for s in 0..ns {
            if b.state[s] <= 0.0 {
                continue;
            }
            let x = &values[s];
            for (ai, &wa) in w.weights[s].iter().enumerate() {
                let weight = b.state[s] * wa;
                if weight == 0.0 {
                    continue;
                }
                let t = &tables.transition[ai];
                let o = &tables.observation[ai];
                for (sn, xn) in values.iter().enumerate() {
                    let mut tv = weight;
                    for k in 0..k_count {
                        let xs = d.states().factor_size(k);
                        tv *= t[t_off[k] + x[k] * xs + xn[k]];
                    }
                    if tv == 0.0 {
                        continue;
                    }
                    for w in 0..no {
                        let mut v = tv;
                        for k in 0..k_count {
                            v *= o[o_off[k] + xn[k] * no + w];
                        }
                        out[sn * no + w] += v;
                    }
                }
            }
        }
        out
    }

    /// Posterior over next states given `obs`, by joint enumeration.
    pub fn naive_update_state(&self, b: &FactoredBelief, a0: ActionId, obs: ObsId) -> Result<Vec<f64>> {
        check_action(self.domain, a0)?;
        let w = self.prepare(b)?;
        let no = self.domain.num_observations();
        let joint = self.naive_joint(b, &w, a0);
        let z: f64 = joint.iter().skip(obs).step_by(no).sum();
        if z <= 0.0 {
            return Err(Error::ZeroProbabilityEvidence { action: a0, obs });
        }
        Ok(joint.iter().skip(obs).step_by(no).map(|p| p / z).collect())
    }

    /// Updated node distribution of agent `j` for every next state,
    /// flattened `[s'][m']`, by joint enumeration. The observation does not
    /// enter; the signature mirrors the state update for symmetry and
    /// reports zero-probability evidence the same way.
    pub fn naive_update_model(&self, b: &FactoredBelief, a0: ActionId, obs: ObsId, j: usize) -> Result<Vec<f64>> {
        self.naive_update_state(b, a0, obs)?;
        Ok(self.naive_model_rows(b, a0, j))
    }

    fn naive_model_rows(&self, b: &FactoredBelief, a0: ActionId, j: usize) -> Vec<f64> {
        let d = self.domain;
        let states = d.states();
        let ns = d.num_states();
        let fsc = d.agent_fsc(j);
        let frame = d.agent_frames()[j];
        let m_count = fsc.num_nodes();
        let nof = fsc.num_observations;
        let k_count = states.num_factors();
        let acting = d.acting_frames_for(j);
        let values: Vec<Vec<usize>> = (0..ns).map(|s| states.state_of(s)).collect();

        // O_j over every joint action: [a][s'][omega_j]
        let mut oj: Vec<Vec<f64>> = Vec::with_capacity(self.joint_actions.len());
        let mut acting_action = Vec::with_capacity(acting.len());
        for a in &self.joint_actions {
            acting_action.clear();
            acting_action.extend(a.iter().enumerate().filter(|&(i, _)| i != j).map(|(_, &ai)| ai));
            acting_action.push(a0);
            let mut table = vec![0.0; ns * nof];
            for (sn, xn) in values.iter().enumerate() {
                for w in 0..nof {
                    let mut v = 1.0;
                    for k in 0..k_count {
                        let c = d.frame_observation_ctx(frame, k, xn[k], a[j], w);
                        let cfg = crate::config::project(&acting_action, &acting, d.frames(), &c.nu)
                            .expect("valid joint action");
                        v *= c.value(cfg.counts());
                    }
                    table[sn * nof + w] = v;
                }
            }
            oj.push(table);
        }

        let mut rows = vec![0.0; ns * m_count];
        for s in 0..ns {
            if b.state[s] <= 0.0 {
                continue;
            }
            for m in &self.joint_models {
                let wm = b.state[s] * Self::model_weight(b, s, m);
                if wm == 0.0 {
                    continue;
                }
                for (ai, a) in self.joint_actions.iter().enumerate() {
                    let w = wm * self.action_weight(m, a);
                    if w == 0.0 {
                        continue;
                    }
                    for sn in 0..ns {
                        for o in 0..nof {
                            let v = w * oj[ai][sn * nof + o];
                            if v == 0.0 {
                                continue;
                            }
                            let step = fsc.step(m[j], a[j], o);
                            for (mn, &p) in step.iter().enumerate() {
                                rows[sn * m_count + mn] += v * p;
                            }
                        }
                    }
                }
            }
        }
        normalize_rows(&mut rows, m_count);
        rows
    }
}

impl BeliefDynamics for NaiveEngine<'_> {
    type Prepared = JointWeights;

    fn domain(&self) -> &Domain {
        self.domain
    }

    fn prepare(&self, b: &FactoredBelief) -> Result<JointWeights> {
        check_belief(self.domain, b)?;
        let weights = (0..b.num_states())
            .map(|s| {
                let mut w = vec![0.0; self.joint_actions.len()];
                if b.state[s] <= 0.0 {
                    return w;
                }
                for m in &self.joint_models {
                    let wm = Self::model_weight(b, s, m);
                    if wm == 0.0 {
                        continue;
                    }
                    for (ai, a) in self.joint_actions.iter().enumerate() {
                        w[ai] += wm * self.action_weight(m, a);
                    }
                }
                w
            })
            .collect();
        Ok(JointWeights { weights })
    }

    fn expected_reward_with(&self, b: &FactoredBelief, w: &JointWeights, a0: ActionId) -> Result<f64> {
        check_action(self.domain, a0)?;
        let states = self.domain.states();
        let r_off = self.factor_offsets(|xs| xs);
        let tables = self.tables(a0);
        let mut er = 0.0;
        for s in 0..b.num_states() {
            if b.state[s] <= 0.0 {
                continue;
            }
            let x = states.state_of(s);
            let mut acc = 0.0;
            for (ai, &wa) in w.weights[s].iter().enumerate() {
                if wa == 0.0 {
                    continue;
                }
                let r = &tables.reward[ai];
                acc += wa * (0..x.len()).map(|k| r[r_off[k] + x[k]]).sum::<f64>();
            }
            er += b.state[s] * acc;
        }
        Ok(er)
    }

    fn predict_with(&self, b: &FactoredBelief, w: &JointWeights, a0: ActionId) -> Result<Prediction> {
        check_action(self.domain, a0)?;
        let joint = self.naive_joint(b, w, a0);
        let layout = Arc::clone(&b.layout);
        let ns = b.num_states();
        let mut models = vec![0.0; layout.total()];
        for j in 0..b.num_agents() {
            let start = layout.offsets[j];
            let m_count = layout.nodes[j];
            if m_count == 1 {
                models[start..start + ns].fill(1.0);
            } else {
                let rows = self.naive_model_rows(b, a0, j);
                models[start..start + ns * m_count].copy_from_slice(&rows);
            }
        }
        Ok(Prediction::new(a0, self.domain.num_observations(), joint, layout, models))
    }
}

/// All tuples with `t[i] < sizes[i]`, last position fastest.
fn odometer(sizes: &[usize]) -> Vec<Vec<usize>> {
    let total: usize = sizes.iter().product();
    let mut out = Vec::with_capacity(total);
    if sizes.contains(&0) {
        return out;
    }
    let mut cur = vec![0; sizes.len()];
    loop {
        out.push(cur.clone());
        let mut i = sizes.len();
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            cur[i] += 1;
            if cur[i] < sizes[i] {
                break;
            }
            cur[i] = 0;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn odometer_orders_last_fastest() {
        assert_eq!(odometer(&[2, 2]), vec![vec![0, 0], vec![0, 1], vec![1, 0], vec![1, 1]]);
        assert_eq!(odometer(&[]), vec![Vec::<usize>::new()]);
    }

    #[test]
    fn guarded_product_matches_plain_product() {
        let v = [0.5, 0.25, 2.0];
        assert_eq!(guarded_product(v.iter().copied()), 0.25);
        let tiny = [1e-301, 1e-50, 1e60];
        let p = guarded_product(tiny.iter().copied());
        assert!((p / 1e-291 - 1.0).abs() < 1e-9);
        assert_eq!(guarded_product([0.0, 1e-310].iter().copied()), 0.0);
    }

    #[test]
    fn belief_layout_and_snapshot() {
        let b = FactoredBelief::new(
            vec![0.25, 0.75],
            vec![vec![vec![1.0], vec![1.0]], vec![vec![0.5, 0.5], vec![0.1, 0.9]]],
        )
        .unwrap();
        assert_eq!(b.model_dist(1, 1), &[0.1, 0.9]);
        assert_eq!(b.structural_size(), 2 + 6 + 2 + 2 + 2);
        let snap = b.snapshot();
        assert!(snap.lines().any(|l| l.starts_with("1 1 1 ")));
        assert!(FactoredBelief::new(vec![0.5, 0.4], vec![]).is_err());
    }
}
