//! A complete many-agent planning problem.
//!
//! Agent 0's transition, observation and reward functions, and every other
//! frame's observation function, are stored per context as a rule table over
//! the context's configuration: the first rule whose predicates all hold
//! gives the value, and a context without a matching rule evaluates to 0.

use std::collections::{BTreeMap, HashMap};

use crate::config::{num_configs, project, Configuration};
use crate::error::{Error, Result};
use crate::hypergraph::{
    Context, ContextSpace, FrameAction, FrameActionHypergraph, FunctionKind, Neighborhood,
};
use crate::population::{
    validate_population, ActionId, AgentPopulation, FactorId, Frame, FrameId, Fsc, ObsId,
    StateSpace,
};

const ROW_TOLERANCE: f64 = 1e-9;

/// Default cap on configuration-function evaluations spent on one
/// normalization check; larger checks are skipped.
pub const NORMALIZATION_BUDGET: u128 = 200_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CompareOp {
    Lt,
    Ge,
}

/// `weight * count(action, frame)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Term {
    pub pair: FrameAction,
    pub weight: f64,
}

/// `sum(terms) op frac * total + count`, where `total` is the number of agents
/// the configuration covers.
#[derive(Debug, Clone, PartialEq)]
pub struct Predicate {
    pub terms: Vec<Term>,
    pub op: CompareOp,
    pub frac: f64,
    pub count: f64,
}

impl Predicate {
    pub fn new(terms: Vec<Term>, op: CompareOp, frac: f64, count: f64) -> Self {
        Self {
            terms,
            op,
            frac,
            count,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Rule {
    pub when: Vec<Predicate>,
    pub value: f64,
}

impl Rule {
    pub fn new(when: Vec<Predicate>, value: f64) -> Self {
        Self { when, value }
    }

    pub fn always(value: f64) -> Self {
        Self {
            when: Vec::new(),
            value,
        }
    }
}

/// A hypergraph plus one rule table per context.
#[derive(Debug, Clone, PartialEq)]
pub struct ContextFunction {
    pub graph: FrameActionHypergraph,
    pub tables: BTreeMap<Context, Vec<Rule>>,
}

impl ContextFunction {
    pub fn new(graph: FrameActionHypergraph) -> Self {
        Self {
            graph,
            tables: BTreeMap::new(),
        }
    }

    pub fn kind(&self) -> FunctionKind {
        self.graph.kind()
    }

    pub fn set(&mut self, ctx: Context, rules: Vec<Rule>) {
        self.tables.insert(ctx, rules);
    }
}

/// Prior over states and, per agent, a state-independent prior over its
/// controller's nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct InitialBelief {
    pub state: Vec<f64>,
    pub models: Vec<Vec<f64>>,
}

/// Everything that defines a domain, before compilation.
#[derive(Debug, Clone, PartialEq)]
pub struct DomainSpec {
    pub name: String,
    pub states: StateSpace,
    /// All frames, agent 0's included. Ordered by id.
    pub frames: Vec<Frame>,
    pub agent0_frame: FrameId,
    pub fscs: Vec<Fsc>,
    pub population: AgentPopulation,
    pub transition: ContextFunction,
    pub observation: ContextFunction,
    pub reward: ContextFunction,
    /// Observation function of every frame whose agents are modeled.
    pub frame_observation: BTreeMap<FrameId, ContextFunction>,
    pub initial_belief: InitialBelief,
}

#[derive(Debug, Clone, PartialEq)]
struct CompiledPredicate {
    terms: Vec<(usize, f64)>,
    op: CompareOp,
    frac: f64,
    count: f64,
}

/// A context's neighborhood and its rules with terms resolved to slots.
#[derive(Debug, Clone, PartialEq)]
pub struct CompiledContext {
    pub nu: Neighborhood,
    rules: Vec<(Vec<CompiledPredicate>, f64)>,
    /// Contexts with equal neighborhoods and predicates share a class, so
    /// they always fire the same rule.
    class: u32,
}

impl CompiledContext {
    fn compile(ctx: &Context, nu: &Neighborhood, rules: &[Rule]) -> Result<Self> {
        let mut out = Vec::with_capacity(rules.len());
        for rule in rules {
            let mut preds = Vec::with_capacity(rule.when.len());
            for p in &rule.when {
                let mut terms = Vec::with_capacity(p.terms.len());
                for t in &p.terms {
                    let slot = nu.slot_of(t.pair).ok_or_else(|| {
                        Error::Validation(format!(
                            "rule at {ctx:?} reads (action {}, frame {}) outside the context's neighborhood",
                            t.pair.action, t.pair.frame
                        ))
                    })?;
                    terms.push((slot, t.weight));
                }
                preds.push(CompiledPredicate {
                    terms,
                    op: p.op,
                    frac: p.frac,
                    count: p.count,
                });
            }
            out.push((preds, rule.value));
        }
        Ok(Self {
            nu: nu.clone(),
            rules: out,
            class: 0,
        })
    }

    /// Bit pattern of the neighborhood and predicates.
    fn condition_key(&self) -> Vec<u64> {
        let mut key = Vec::new();
        for pair in self.nu.pairs() {
            key.extend([pair.frame as u64, pair.action as u64]);
        }
        for (preds, _) in &self.rules {
            key.push(u64::MAX);
            for p in preds {
                key.push(u64::MAX - 1);
                for &(slot, w) in &p.terms {
                    key.extend([slot as u64, w.to_bits()]);
                }
                key.extend([p.op as u64, p.frac.to_bits(), p.count.to_bits()]);
            }
        }
        key
    }

    pub fn class(&self) -> u32 {
        self.class
    }

    /// Number of rules; [`rule_index_with`](Self::rule_index_with) returns
    /// this when none matches.
    pub fn num_rules(&self) -> usize {
        self.rules.len()
    }

    /// Index of the first rule whose predicates hold.
    #[inline]
    pub fn rule_index_with(&self, count: impl Fn(usize) -> u32, total: u32) -> usize {
        let total = total as f64;
        'rules: for (i, (preds, _)) in self.rules.iter().enumerate() {
            for p in preds {
                let lhs: f64 = p.terms.iter().map(|&(s, w)| w * count(s) as f64).sum();
                let rhs = p.frac * total + p.count;
                let ok = match p.op {
                    CompareOp::Lt => lhs < rhs,
                    CompareOp::Ge => lhs >= rhs,
                };
                if !ok {
                    continue 'rules;
                }
            }
            return i;
        }
        self.rules.len()
    }

    #[inline]
    pub fn rule_value(&self, index: usize) -> f64 {
        self.rules.get(index).map_or(0.0, |r| r.1)
    }

    /// Evaluates the rules; `count(i)` gives the count of the `i`-th pair of
    /// `nu` and `total` the number of agents covered.
    #[inline]
    pub fn value_with(&self, count: impl Fn(usize) -> u32, total: u32) -> f64 {
        self.rule_value(self.rule_index_with(count, total))
    }

    /// Value at a configuration over this context's own neighborhood.
    #[inline]
    pub fn value(&self, counts: &[u32]) -> f64 {
        let total = counts.iter().sum();
        self.value_with(|i| counts[i], total)
    }

    /// Whether the value cannot depend on the configuration.
    pub fn is_constant(&self) -> bool {
        self.rules.iter().all(|(p, _)| p.is_empty()) || self.nu.is_empty()
    }

    fn values(&self) -> impl Iterator<Item = f64> + '_ {
        self.rules.iter().map(|r| r.1)
    }
}

#[derive(Debug, Clone, PartialEq)]
struct DenseFunction {
    offsets: Vec<usize>,
    contexts: Vec<CompiledContext>,
}

/// A validated domain with dense context lookup.
#[derive(Debug, Clone, PartialEq)]
pub struct Domain {
    spec: DomainSpec,
    space: ContextSpace,
    transition: DenseFunction,
    observation: DenseFunction,
    reward: DenseFunction,
    /// Indexed by frame.
    frame_observation: Vec<Option<DenseFunction>>,
    agent_frames: Vec<FrameId>,
}

impl Domain {
    /// Validates `spec` and checks row normalization exhaustively where the
    /// number of configurations fits [`NORMALIZATION_BUDGET`].
    pub fn new(spec: DomainSpec) -> Result<Self> {
        Self::with_budget(spec, NORMALIZATION_BUDGET)
    }

    pub fn with_budget(spec: DomainSpec, budget: u128) -> Result<Self> {
        let domain = Self::compile(spec)?;
        domain.check_normalization(budget)?;
        Ok(domain)
    }

    fn compile(spec: DomainSpec) -> Result<Self> {
        validate_population(&spec.population, &spec.frames, &spec.fscs).into_result()?;
        let frame0 = spec
            .frames
            .get(spec.agent0_frame)
            .ok_or_else(|| Error::lookup("frame", spec.agent0_frame))?;
        if frame0.observations.is_empty() {
            return Err(Error::Validation("agent 0 has no observations".into()));
        }
        let space = ContextSpace {
            factor_sizes: spec.states.factors().iter().map(|f| f.values.len()).collect(),
            agent0_actions: frame0.num_actions(),
            agent0_observations: frame0.num_observations(),
            frame_sizes: spec
                .frames
                .iter()
                .map(|f| (f.num_actions(), f.num_observations()))
                .collect(),
        };
        let expect = |f: &ContextFunction, kind: FunctionKind| -> Result<()> {
            if f.kind() != kind {
                return Err(Error::Validation(format!(
                    "{kind} slot holds a {} function",
                    f.kind()
                )));
            }
            Ok(())
        };
        expect(&spec.transition, FunctionKind::Transition)?;
        expect(&spec.observation, FunctionKind::Observation)?;
        expect(&spec.reward, FunctionKind::Reward)?;

        let transition = dense(&spec.transition, &space, &spec.frames, None)?;
        let observation = dense(&spec.observation, &space, &spec.frames, None)?;
        let reward = dense(&spec.reward, &space, &spec.frames, None)?;
        let mut frame_observation = vec![None; spec.frames.len()];
        for (&f, func) in &spec.frame_observation {
            expect(func, FunctionKind::FrameObservation)?;
            if f >= spec.frames.len() || func.graph.owner() != Some(f) {
                return Err(Error::Validation(format!(
                    "frame observation function registered for frame {f} has owner {:?}",
                    func.graph.owner()
                )));
            }
            frame_observation[f] = Some(dense(func, &space, &spec.frames, Some(f))?);
        }
        let agent_frames: Vec<FrameId> = spec.population.assignments.iter().map(|a| a.frame).collect();
        for (j, &f) in agent_frames.iter().enumerate() {
            if frame_observation[f].is_none() {
                return Err(Error::Validation(format!(
                    "agent {j}: frame `{}` has no frame_observation function",
                    spec.frames[f].id
                )));
            }
        }
        check_initial_belief(&spec)?;
        let mut transition = transition;
        let mut observation = observation;
        let mut reward = reward;
        let mut frame_observation = frame_observation;
        let mut classes: HashMap<(Neighborhood, Vec<u64>), u32> = HashMap::new();
        let all = [&mut transition, &mut observation, &mut reward]
            .into_iter()
            .chain(frame_observation.iter_mut().flatten());
        for func in all {
            for c in &mut func.contexts {
                let next = classes.len() as u32;
                c.class = *classes.entry((c.nu.clone(), c.condition_key())).or_insert(next);
            }
        }
        Ok(Self {
            spec,
            space,
            transition,
            observation,
            reward,
            frame_observation,
            agent_frames,
        })
    }

    pub fn spec(&self) -> &DomainSpec {
        &self.spec
    }

    pub fn into_spec(self) -> DomainSpec {
        self.spec
    }

    pub fn name(&self) -> &str {
        &self.spec.name
    }

    pub fn states(&self) -> &StateSpace {
        &self.spec.states
    }

    pub fn num_states(&self) -> usize {
        self.spec.states.size()
    }

    pub fn frames(&self) -> &[Frame] {
        &self.spec.frames
    }

    pub fn fscs(&self) -> &[Fsc] {
        &self.spec.fscs
    }

    pub fn population(&self) -> &AgentPopulation {
        &self.spec.population
    }

    pub fn num_agents(&self) -> usize {
        self.spec.population.len()
    }

    /// Frame of every other agent.
    pub fn agent_frames(&self) -> &[FrameId] {
        &self.agent_frames
    }

    pub fn agent_fsc(&self, j: usize) -> &Fsc {
        &self.spec.fscs[self.spec.population.fsc_of(j)]
    }

    pub fn agent0_frame(&self) -> FrameId {
        self.spec.agent0_frame
    }

    pub fn num_actions(&self) -> usize {
        self.space.agent0_actions
    }

    pub fn num_observations(&self) -> usize {
        self.space.agent0_observations
    }

    pub fn action_name(&self, a0: ActionId) -> &str {
        &self.spec.frames[self.spec.agent0_frame].actions[a0]
    }

    pub fn observation_name(&self, obs: ObsId) -> &str {
        &self.spec.frames[self.spec.agent0_frame].observations[obs]
    }

    pub fn context_space(&self) -> &ContextSpace {
        &self.space
    }

    pub fn initial_belief(&self) -> &InitialBelief {
        &self.spec.initial_belief
    }

    pub fn function(&self, kind: FunctionKind, owner: Option<FrameId>) -> Option<&ContextFunction> {
        match kind {
            FunctionKind::Transition => Some(&self.spec.transition),
            FunctionKind::Observation => Some(&self.spec.observation),
            FunctionKind::Reward => Some(&self.spec.reward),
            FunctionKind::FrameObservation => self.spec.frame_observation.get(&owner?),
        }
    }

    pub fn has_frame_observation(&self, frame: FrameId) -> bool {
        self.frame_observation.get(frame).is_some_and(Option::is_some)
    }

    #[inline]
    pub fn transition_ctx(&self, k: FactorId, x: usize, a0: ActionId, x_next: usize) -> &CompiledContext {
        let xs = self.space.factor_sizes[k];
        &self.transition.contexts[self.transition.offsets[k] + (x * self.space.agent0_actions + a0) * xs + x_next]
    }

    #[inline]
    pub fn observation_ctx(&self, k: FactorId, x_next: usize, a0: ActionId, obs: ObsId) -> &CompiledContext {
        let no = self.space.agent0_observations;
        &self.observation.contexts[self.observation.offsets[k] + (x_next * self.space.agent0_actions + a0) * no + obs]
    }

    #[inline]
    pub fn reward_ctx(&self, k: FactorId, x: usize, a0: ActionId) -> &CompiledContext {
        &self.reward.contexts[self.reward.offsets[k] + x * self.space.agent0_actions + a0]
    }

    /// Panics if `frame` has no observation function.
    #[inline]
    pub fn frame_observation_ctx(
        &self,
        frame: FrameId,
        k: FactorId,
        x_next: usize,
        action: ActionId,
        obs: ObsId,
    ) -> &CompiledContext {
        let (na, no) = self.space.frame_sizes[frame];
        let f = self.frame_observation[frame]
            .as_ref()
            .expect("frame without observation function");
        &f.contexts[f.offsets[k] + (x_next * na + action) * no + obs]
    }

    /// Compiled form of any context. Fails on malformed contexts.
    pub fn compiled(&self, ctx: &Context) -> Result<&CompiledContext> {
        self.space.check(ctx)?;
        Ok(match *ctx {
            Context::Transition { factor, x, a0, x_next } => self.transition_ctx(factor, x, a0, x_next),
            Context::Observation { factor, x_next, a0, obs } => self.observation_ctx(factor, x_next, a0, obs),
            Context::Reward { factor, x, a0 } => self.reward_ctx(factor, x, a0),
            Context::FrameObservation {
                frame,
                factor,
                x_next,
                action,
                obs,
            } => {
                if !self.has_frame_observation(frame) {
                    return Err(Error::lookup("frame observation function", &self.spec.frames[frame].id));
                }
                self.frame_observation_ctx(frame, factor, x_next, action, obs)
            }
        })
    }

    pub fn neighborhood(&self, ctx: &Context) -> Result<&Neighborhood> {
        Ok(&self.compiled(ctx)?.nu)
    }

    /// Value of the function at `ctx` for a configuration over its
    /// neighborhood.
    pub fn evaluate(&self, ctx: &Context, config: &Configuration) -> Result<f64> {
        let c = self.compiled(ctx)?;
        if config.nu_len() != c.nu.len() {
            return Err(Error::Validation(format!(
                "configuration with {} slots for a context with {} neighbors",
                config.nu_len(),
                c.nu.len()
            )));
        }
        Ok(c.value(config.counts()))
    }

    /// Value at `ctx` when the acting agents (with `agent_frames`) perform
    /// `joint_action`.
    pub fn evaluate_joint(&self, ctx: &Context, joint_action: &[ActionId], agent_frames: &[FrameId]) -> Result<f64> {
        let c = self.compiled(ctx)?;
        let config = project(joint_action, agent_frames, &self.spec.frames, &c.nu)?;
        Ok(c.value(config.counts()))
    }

    /// Frames of the agents acting in agent `j`'s observation contexts: all
    /// other agents except `j`, then agent 0.
    pub fn acting_frames_for(&self, j: usize) -> Vec<FrameId> {
        let mut v: Vec<FrameId> = self
            .agent_frames
            .iter()
            .enumerate()
            .filter(|&(i, _)| i != j)
            .map(|(_, &f)| f)
            .collect();
        v.push(self.spec.agent0_frame);
        v
    }

    /// Smallest and largest reward over all contexts.
    pub fn reward_bounds(&self) -> (f64, f64) {
        let k = self.spec.states.num_factors();
        let mut lo = 0.0;
        let mut hi = 0.0;
        for f in 0..k {
            let vals = || {
                self.reward.contexts[self.reward.offsets[f]..]
                    .iter()
                    .take(self.space.factor_sizes[f] * self.space.agent0_actions)
                    .flat_map(|c| c.values().chain(std::iter::once(0.0)))
            };
            lo += vals().fold(f64::INFINITY, f64::min);
            hi += vals().fold(f64::NEG_INFINITY, f64::max);
        }
        (lo, hi)
    }

    fn check_normalization(&self, budget: u128) -> Result<()> {
        let n = self.num_agents();
        let space = &self.space;
        let k_count = space.factor_sizes.len();
        for c in self
            .transition
            .contexts
            .iter()
            .chain(&self.observation.contexts)
            .chain(self.frame_observation.iter().flatten().flat_map(|f| &f.contexts))
        {
            if let Some(v) = c.values().find(|v| !(0.0..=1.0).contains(v)) {
                return Err(Error::Validation(format!(
                    "probability rule value {v} outside [0, 1] in context with neighborhood {:?}",
                    c.nu.pairs()
                )));
            }
        }
        if let Some(v) = self.reward.contexts.iter().flat_map(|c| c.values()).find(|v| !v.is_finite()) {
            return Err(Error::Validation(format!("non-finite reward value {v}")));
        }

        // transition rows: sum over x' per factor
        for k in 0..k_count {
            let xs = space.factor_sizes[k];
            for x in 0..xs {
                for a0 in 0..space.agent0_actions {
                    let row: Vec<&CompiledContext> =
                        (0..xs).map(|xn| self.transition_ctx(k, x, a0, xn)).collect();
                    let label = || format!("transition row (factor {k}, x {x}, a0 {a0})");
                    check_rows(&row, n, budget, xs as u128, label, |vals| vals.iter().sum())?;
                }
            }
        }

        // observation rows: sum over omega of the product over factors
        let no = space.agent0_observations;
        for a0 in 0..space.agent0_actions {
            for s in 0..self.num_states() {
                let mut row = Vec::with_capacity(k_count * no);
                for k in 0..k_count {
                    let xn = self.spec.states.value_of(s, k);
                    for o in 0..no {
                        row.push(self.observation_ctx(k, xn, a0, o));
                    }
                }
                let label = || format!("observation row (next state {}, a0 {a0})", self.spec.states.describe(s));
                check_rows(&row, n, budget, (k_count * no) as u128, label, |v| product_sum(v, k_count, no))?;
            }
        }

        for (f, func) in self.frame_observation.iter().enumerate() {
            if func.is_none() || n == 0 {
                continue;
            }
            let (na, nof) = space.frame_sizes[f];
            for aj in 0..na {
                for s in 0..self.num_states() {
                    let mut row = Vec::with_capacity(k_count * nof);
                    for k in 0..k_count {
                        let xn = self.spec.states.value_of(s, k);
                        for o in 0..nof {
                            row.push(self.frame_observation_ctx(f, k, xn, aj, o));
                        }
                    }
                    let label = || {
                        format!(
                            "frame `{}` observation row (next state {}, action {aj})",
                            self.spec.frames[f].id,
                            self.spec.states.describe(s)
                        )
                    };
                    check_rows(&row, n, budget, (k_count * nof) as u128, label, |v| {
                        product_sum(v, k_count, nof)
                    })?;
                }
            }
        }
        Ok(())
    }
}

fn product_sum(vals: &[f64], k_count: usize, no: usize) -> f64 {
    (0..no)
        .map(|o| (0..k_count).map(|k| vals[k * no + o]).product::<f64>())
        .sum()
}

/// Enumerates the configurations of `n` agents over the union of the row's
/// neighborhoods and checks `sum(values) == 1` for each.
fn check_rows(
    row: &[&CompiledContext],
    n: usize,
    budget: u128,
    evals_per_config: u128,
    label: impl Fn() -> String,
    sum: impl Fn(&[f64]) -> f64,
) -> Result<()> {
    let union = Neighborhood::union(row.iter().map(|c| &c.nu));
    let varies = row.iter().any(|c| !c.is_constant());
    let n_eff = if varies { n } else { 0 };
    let work = num_configs(n_eff, union.len()).saturating_mul(evals_per_config);
    if work > budget {
        log::debug!("skipping normalization check of {}: {work} evaluations", label());
        return Ok(());
    }
    let embeddings: Vec<Vec<usize>> = row
        .iter()
        .map(|c| c.nu.embedding_in(&union).expect("subset of union"))
        .collect();
    let mut vals = vec![0.0; row.len()];
    for cfg in crate::config::enumerate_configs(union.len(), n_eff) {
        let counts = cfg.counts();
        for (i, c) in row.iter().enumerate() {
            let emb = &embeddings[i];
            vals[i] = c.value_with(|s| counts[emb[s]], n as u32);
        }
        let total = sum(&vals);
        if (total - 1.0).abs() > ROW_TOLERANCE {
            return Err(Error::Validation(format!(
                "{} sums to {total} at configuration {:?} over {:?}",
                label(),
                counts,
                union.pairs()
            )));
        }
    }
    Ok(())
}

fn dense(
    func: &ContextFunction,
    space: &ContextSpace,
    frames: &[Frame],
    owner: Option<FrameId>,
) -> Result<DenseFunction> {
    func.graph.validate(space, frames)?;
    for ctx in func.tables.keys() {
        space.check(ctx)?;
        if ctx.kind() != func.kind() {
            return Err(Error::Validation(format!("{ctx:?} listed in the {} table", func.kind())));
        }
    }
    let all = space.contexts(func.kind(), owner);
    let mut offsets = Vec::with_capacity(space.factor_sizes.len());
    let mut contexts = Vec::with_capacity(all.len());
    let mut last_factor = usize::MAX;
    for ctx in &all {
        if ctx.factor() != last_factor {
            last_factor = ctx.factor();
            offsets.push(contexts.len());
        }
        let nu = func.graph.neighborhood(ctx)?;
        let rules = func.tables.get(ctx).map(Vec::as_slice).unwrap_or(&[]);
        contexts.push(CompiledContext::compile(ctx, nu, rules)?);
    }
    Ok(DenseFunction { offsets, contexts })
}

fn check_initial_belief(spec: &DomainSpec) -> Result<()> {
    let ib = &spec.initial_belief;
    if ib.state.len() != spec.states.size() {
        return Err(Error::Validation(format!(
            "initial state belief has {} entries for {} states",
            ib.state.len(),
            spec.states.size()
        )));
    }
    if let Some(msg) = crate::population::distribution_problem(&ib.state) {
        return Err(Error::Validation(format!("initial state belief: {msg}")));
    }
    if ib.models.len() != spec.population.len() {
        return Err(Error::Validation(format!(
            "initial model beliefs for {} agents, population has {}",
            ib.models.len(),
            spec.population.len()
        )));
    }
    for (j, row) in ib.models.iter().enumerate() {
        let nodes = spec.fscs[spec.population.fsc_of(j)].num_nodes();
        if row.len() != nodes {
            return Err(Error::Validation(format!(
                "agent {j}: initial model belief has {} entries for {nodes} nodes",
                row.len()
            )));
        }
        if let Some(msg) = crate::population::distribution_problem(row) {
            return Err(Error::Validation(format!("agent {j}: initial model belief: {msg}")));
        }
    }
    Ok(())
}
