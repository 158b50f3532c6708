//! Frame-action hypergraphs.
//!
//! A hyperedge `(context, action, frame)` states that the value of agent 0's
//! transition, observation or reward function at `context` depends on how
//! many agents of `frame` perform `action`. The set of `(action, frame)`
//! pairs incident to a context is its neighborhood; everything outside the
//! neighborhood is collapsed into the dummy slot when counting.

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use crate::config::{project, Configuration};
use crate::error::{Error, Result};
use crate::population::{ActionId, FactorId, Frame, FrameId, ObsId};

/// Which of agent 0's functions (or another frame's observation function) a
/// context belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum FunctionKind {
    Transition,
    Observation,
    Reward,
    FrameObservation,
}

impl fmt::Display for FunctionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FunctionKind::Transition => "transition",
            FunctionKind::Observation => "observation",
            FunctionKind::Reward => "reward",
            FunctionKind::FrameObservation => "frame_observation",
        })
    }
}

/// A context node. Transition and observation contexts are per state factor.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Context {
    /// `<x_k, a0, x_k'>`
    Transition {
        factor: FactorId,
        x: usize,
        a0: ActionId,
        x_next: usize,
    },
    /// `<x_k', a0, omega_0>`
    Observation {
        factor: FactorId,
        x_next: usize,
        a0: ActionId,
        obs: ObsId,
    },
    /// `<x_k, a0>`
    Reward {
        factor: FactorId,
        x: usize,
        a0: ActionId,
    },
    /// `<x_k', a_j, omega_j>` for an agent of `frame`.
    FrameObservation {
        frame: FrameId,
        factor: FactorId,
        x_next: usize,
        action: ActionId,
        obs: ObsId,
    },
}

impl Context {
    pub fn kind(&self) -> FunctionKind {
        match self {
            Context::Transition { .. } => FunctionKind::Transition,
            Context::Observation { .. } => FunctionKind::Observation,
            Context::Reward { .. } => FunctionKind::Reward,
            Context::FrameObservation { .. } => FunctionKind::FrameObservation,
        }
    }

    pub fn factor(&self) -> FactorId {
        match *self {
            Context::Transition { factor, .. }
            | Context::Observation { factor, .. }
            | Context::Reward { factor, .. }
            | Context::FrameObservation { factor, .. } => factor,
        }
    }
}

/// An `(action, frame)` pair. Ordered by frame, then action, which fixes the
/// slot layout of every configuration vector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FrameAction {
    pub frame: FrameId,
    pub action: ActionId,
}

impl FrameAction {
    pub fn new(frame: FrameId, action: ActionId) -> Self {
        Self { frame, action }
    }
}

/// The frame-action neighborhood of a context in canonical order. The dummy
/// slot is implicit and always last.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Neighborhood {
    pairs: Vec<FrameAction>,
}

impl Neighborhood {
    pub const fn empty() -> Self {
        Self { pairs: Vec::new() }
    }

    /// Sorts and deduplicates the pairs.
    pub fn new(mut pairs: Vec<FrameAction>) -> Self {
        pairs.sort_unstable();
        pairs.dedup();
        Self { pairs }
    }

    pub fn pairs(&self) -> &[FrameAction] {
        &self.pairs
    }

    /// Number of explicit pairs (excluding the dummy slot).
    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    /// Index of the dummy slot.
    pub fn phi(&self) -> usize {
        self.pairs.len()
    }

    pub fn slot_of(&self, pair: FrameAction) -> Option<usize> {
        self.pairs.binary_search(&pair).ok()
    }

    /// Slot of every action of `frame`, the dummy slot for actions outside
    /// the neighborhood.
    pub fn slot_map(&self, frame: FrameId, num_actions: usize) -> Vec<usize> {
        (0..num_actions)
            .map(|a| {
                self.slot_of(FrameAction::new(frame, a))
                    .unwrap_or(self.phi())
            })
            .collect()
    }

    pub fn union<'a>(parts: impl IntoIterator<Item = &'a Neighborhood>) -> Self {
        let mut pairs: Vec<FrameAction> = parts
            .into_iter()
            .flat_map(|n| n.pairs.iter().copied())
            .collect();
        pairs.sort_unstable();
        pairs.dedup();
        Self { pairs }
    }

    pub fn is_subset_of(&self, other: &Neighborhood) -> bool {
        self.pairs.iter().all(|p| other.slot_of(*p).is_some())
    }

    /// For each of our slots, the matching slot in `sup` (which must contain
    /// every pair of `self`).
    pub fn embedding_in(&self, sup: &Neighborhood) -> Option<Vec<usize>> {
        self.pairs.iter().map(|p| sup.slot_of(*p)).collect()
    }
}

static EMPTY_NEIGHBORHOOD: Neighborhood = Neighborhood::empty();

/// Sizes of every set a context component can range over.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ContextSpace {
    pub factor_sizes: Vec<usize>,
    pub agent0_actions: usize,
    pub agent0_observations: usize,
    /// `(actions, observations)` for every frame.
    pub frame_sizes: Vec<(usize, usize)>,
}

impl ContextSpace {
    pub fn check(&self, ctx: &Context) -> Result<()> {
        let bad = |what: &str| Err(Error::Validation(format!("context {ctx:?}: {what} out of range")));
        let k = ctx.factor();
        let Some(&xs) = self.factor_sizes.get(k) else {
            return bad("factor");
        };
        match *ctx {
            Context::Transition { x, a0, x_next, .. } => {
                if x >= xs || x_next >= xs {
                    return bad("state value");
                }
                if a0 >= self.agent0_actions {
                    return bad("agent-0 action");
                }
            }
            Context::Observation { x_next, a0, obs, .. } => {
                if x_next >= xs {
                    return bad("state value");
                }
                if a0 >= self.agent0_actions {
                    return bad("agent-0 action");
                }
                if obs >= self.agent0_observations {
                    return bad("observation");
                }
            }
            Context::Reward { x, a0, .. } => {
                if x >= xs {
                    return bad("state value");
                }
                if a0 >= self.agent0_actions {
                    return bad("agent-0 action");
                }
            }
            Context::FrameObservation {
                frame,
                x_next,
                action,
                obs,
                ..
            } => {
                let Some(&(na, no)) = self.frame_sizes.get(frame) else {
                    return bad("frame");
                };
                if x_next >= xs {
                    return bad("state value");
                }
                if action >= na {
                    return bad("action");
                }
                if obs >= no {
                    return bad("observation");
                }
            }
        }
        Ok(())
    }

    /// Every context of `kind` in canonical order. `owner` selects the frame
    /// for [`FunctionKind::FrameObservation`].
    pub fn contexts(&self, kind: FunctionKind, owner: Option<FrameId>) -> Vec<Context> {
        let mut out = Vec::new();
        for (factor, &xs) in self.factor_sizes.iter().enumerate() {
            match kind {
                FunctionKind::Transition => {
                    for x in 0..xs {
                        for a0 in 0..self.agent0_actions {
                            for x_next in 0..xs {
                                out.push(Context::Transition { factor, x, a0, x_next });
                            }
                        }
                    }
                }
                FunctionKind::Observation => {
                    for x_next in 0..xs {
                        for a0 in 0..self.agent0_actions {
                            for obs in 0..self.agent0_observations {
                                out.push(Context::Observation { factor, x_next, a0, obs });
                            }
                        }
                    }
                }
                FunctionKind::Reward => {
                    for x in 0..xs {
                        for a0 in 0..self.agent0_actions {
                            out.push(Context::Reward { factor, x, a0 });
                        }
                    }
                }
                FunctionKind::FrameObservation => {
                    let frame = owner.expect("frame observation contexts need an owner frame");
                    let (na, no) = self.frame_sizes[frame];
                    for x_next in 0..xs {
                        for action in 0..na {
                            for obs in 0..no {
                                out.push(Context::FrameObservation {
                                    frame,
                                    factor,
                                    x_next,
                                    action,
                                    obs,
                                });
                            }
                        }
                    }
                }
            }
        }
        out
    }
}

/// A 3-uniform hypergraph over (context, action, frame) nodes for one
/// function.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FrameActionHypergraph {
    kind: FunctionKind,
    /// Frame whose observation function this graph describes, for
    /// [`FunctionKind::FrameObservation`].
    owner: Option<FrameId>,
    edges: BTreeSet<(Context, FrameAction)>,
    index: HashMap<Context, Neighborhood>,
}

impl FrameActionHypergraph {
    pub fn new(kind: FunctionKind, owner: Option<FrameId>) -> Self {
        Self {
            kind,
            owner,
            edges: BTreeSet::new(),
            index: HashMap::new(),
        }
    }

    pub fn from_edges(
        kind: FunctionKind,
        owner: Option<FrameId>,
        edges: impl IntoIterator<Item = (Context, FrameAction)>,
    ) -> Result<Self> {
        let mut g = Self::new(kind, owner);
        for (c, p) in edges {
            g.add_edge(c, p)?;
        }
        Ok(g)
    }

    pub fn kind(&self) -> FunctionKind {
        self.kind
    }

    pub fn owner(&self) -> Option<FrameId> {
        self.owner
    }

    pub fn add_edge(&mut self, context: Context, pair: FrameAction) -> Result<()> {
        self.check_kind(&context)?;
        if self.edges.insert((context, pair)) {
            let nu = self.index.entry(context).or_default();
            let pos = nu.pairs.binary_search(&pair).unwrap_or_else(|p| p);
            nu.pairs.insert(pos, pair);
        }
        Ok(())
    }

    fn check_kind(&self, context: &Context) -> Result<()> {
        if context.kind() != self.kind {
            return Err(Error::Validation(format!(
                "{:?} context in a {} hypergraph",
                context, self.kind
            )));
        }
        if let (Context::FrameObservation { frame, .. }, Some(owner)) = (context, self.owner) {
            if *frame != owner {
                return Err(Error::Validation(format!(
                    "context {context:?} belongs to another frame's observation hypergraph"
                )));
            }
        }
        Ok(())
    }

    pub fn edges(&self) -> impl Iterator<Item = &(Context, FrameAction)> {
        self.edges.iter()
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    /// All `(action, frame)` pairs incident to `psi`. An empty neighborhood
    /// means the function at `psi` does not depend on other agents.
    pub fn neighborhood(&self, psi: &Context) -> Result<&Neighborhood> {
        self.check_kind(psi)?;
        Ok(self.index.get(psi).unwrap_or(&EMPTY_NEIGHBORHOOD))
    }

    /// Checks contexts against `space` and edge actions against `frames`.
    pub fn validate(&self, space: &ContextSpace, frames: &[Frame]) -> Result<()> {
        for (ctx, pair) in &self.edges {
            space.check(ctx)?;
            let Some(frame) = frames.get(pair.frame) else {
                return Err(Error::Validation(format!(
                    "{} hyperedge at {ctx:?} names unknown frame {}",
                    self.kind, pair.frame
                )));
            };
            if pair.action >= frame.num_actions() {
                return Err(Error::Validation(format!(
                    "{} hyperedge at {ctx:?} uses action {} outside frame `{}`",
                    self.kind, pair.action, frame.id
                )));
            }
        }
        Ok(())
    }
}

/// A counterexample found while checking frame-action anonymity.
#[derive(Debug, Clone, PartialEq)]
pub enum AnonymityViolation {
    /// Two joint actions with the same configuration got different values.
    Permutation {
        context: Context,
        first: Vec<ActionId>,
        second: Vec<ActionId>,
        first_value: f64,
        second_value: f64,
    },
    /// The joint-action function disagrees with the configuration table.
    Table {
        context: Context,
        joint_action: Vec<ActionId>,
        joint_value: f64,
        table_value: f64,
    },
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct AnonymityReport {
    pub checked_profiles: usize,
    pub checked_contexts: usize,
    pub violations: Vec<AnonymityViolation>,
}

impl AnonymityReport {
    pub fn holds(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Largest number of joint actions [`validate_anonymity`] enumerates.
pub const ANONYMITY_PROFILE_LIMIT: usize = 4096;

/// Exhaustively checks that `joint(ctx, a)` depends on the joint action only
/// through its configuration over `g`'s neighborhood of `ctx`, and that it
/// equals `table(ctx, project(a))`.
///
/// `agent_frames` lists the frame of every acting agent; for an other-frame
/// observation function this includes agent 0.
pub fn validate_anonymity<J, T>(
    joint: J,
    g: &FrameActionHypergraph,
    table: T,
    contexts: &[Context],
    agent_frames: &[FrameId],
    frames: &[Frame],
) -> Result<AnonymityReport>
where
    J: Fn(&Context, &[ActionId]) -> f64,
    T: Fn(&Context, &Configuration) -> Result<f64>,
{
    const TOL: f64 = 1e-12;
    let sizes: Vec<usize> = agent_frames
        .iter()
        .map(|&f| frames.get(f).map(Frame::num_actions).ok_or_else(|| Error::lookup("frame", f)))
        .collect::<Result<_>>()?;
    let total = sizes
        .iter()
        .try_fold(1usize, |acc, &s| acc.checked_mul(s))
        .filter(|&t| t <= ANONYMITY_PROFILE_LIMIT)
        .ok_or(Error::TooLarge {
            what: "joint action space",
            estimate: sizes.iter().map(|&s| s as f64).product(),
            limit: ANONYMITY_PROFILE_LIMIT as f64,
        })?;

    let mut report = AnonymityReport {
        checked_profiles: total,
        ..Default::default()
    };
    for ctx in contexts {
        let nu = g.neighborhood(ctx)?;
        report.checked_contexts += 1;
        let mut seen: HashMap<Configuration, (Vec<ActionId>, f64)> = HashMap::new();
        let mut profile = vec![0; sizes.len()];
        for _ in 0..total {
            let cfg = project(&profile, agent_frames, frames, nu)?;
            let value = joint(ctx, &profile);
            let expected = table(ctx, &cfg)?;
            if (value - expected).abs() > TOL {
                report.violations.push(AnonymityViolation::Table {
                    context: *ctx,
                    joint_action: profile.clone(),
                    joint_value: value,
                    table_value: expected,
                });
            }
            match seen.get(&cfg) {
                Some((first, v)) if (v - value).abs() > TOL => {
                    report.violations.push(AnonymityViolation::Permutation {
                        context: *ctx,
                        first: first.clone(),
                        second: profile.clone(),
                        first_value: *v,
                        second_value: value,
                    });
                }
                Some(_) => {}
                None => {
                    seen.insert(cfg, (profile.clone(), value));
                }
            }
            // odometer increment
            for (slot, size) in profile.iter_mut().zip(&sizes) {
                *slot += 1;
                if *slot < *size {
                    break;
                }
                *slot = 0;
            }
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn reward_ctx(x: usize) -> Context {
        Context::Reward { factor: 0, x, a0: 0 }
    }

    #[test]
    fn missing_context_has_empty_neighborhood() {
        let g = FrameActionHypergraph::new(FunctionKind::Reward, None);
        assert!(g.neighborhood(&reward_ctx(0)).unwrap().is_empty());
    }

    #[test]
    fn neighborhood_is_canonical() {
        // two actions of the same frame incident on <s, a0>_1
        let mut g = FrameActionHypergraph::new(FunctionKind::Reward, None);
        g.add_edge(reward_ctx(1), FrameAction::new(0, 1)).unwrap();
        g.add_edge(reward_ctx(1), FrameAction::new(0, 0)).unwrap();
        g.add_edge(reward_ctx(1), FrameAction::new(0, 1)).unwrap();
        let nu = g.neighborhood(&reward_ctx(1)).unwrap();
        assert_eq!(nu.pairs(), &[FrameAction::new(0, 0), FrameAction::new(0, 1)]);
        assert_eq!(g.neighborhood(&reward_ctx(1)).unwrap(), nu);
        assert_eq!(g.num_edges(), 2);
    }

    #[test]
    fn wrong_kind_is_rejected() {
        let g = FrameActionHypergraph::new(FunctionKind::Transition, None);
        assert!(g.neighborhood(&reward_ctx(0)).is_err());
    }

    #[test]
    fn context_space_checks_ranges() {
        let space = ContextSpace {
            factor_sizes: vec![3],
            agent0_actions: 2,
            agent0_observations: 2,
            frame_sizes: vec![(2, 2)],
        };
        assert!(space.check(&reward_ctx(2)).is_ok());
        assert!(space.check(&reward_ctx(3)).is_err());
        assert!(space
            .check(&Context::Observation { factor: 0, x_next: 0, a0: 0, obs: 2 })
            .is_err());
        assert_eq!(space.contexts(FunctionKind::Transition, None).len(), 18);
    }

    #[test]
    fn union_and_embedding() {
        let a = Neighborhood::new(vec![FrameAction::new(1, 0), FrameAction::new(0, 2)]);
        let b = Neighborhood::new(vec![FrameAction::new(0, 1)]);
        let u = Neighborhood::union([&a, &b]);
        assert_eq!(u.len(), 3);
        assert!(a.is_subset_of(&u));
        assert_eq!(a.embedding_in(&u).unwrap(), vec![1, 2]);
        assert_eq!(b.embedding_in(&a), None);
    }
}
