//! JSON domain files.
//!
//! Everything is referenced by name: state factors and their values, frame
//! ids, actions, observations and controllers. Contexts are objects such as
//! `{"factor": "site0", "x": "low", "a0": "place-0-1", "x_next": "med"}` and
//! hypergraph edges are `[context, action, frame]` triples.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::domain::{CompareOp, ContextFunction, Domain, DomainSpec, InitialBelief, Predicate, Rule, Term};
use crate::error::{Error, Result};
use crate::hypergraph::{Context, FrameAction, FrameActionHypergraph, FunctionKind};
use crate::population::{
    distribution_problem, Assignment, AgentPopulation, Frame, FrameId, Fsc, StateFactor, StateSpace,
};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DomainFile {
    pub name: String,
    pub state_factors: Vec<FactorDoc>,
    pub agent0: Agent0Doc,
    pub frames: Vec<FrameDoc>,
    pub population: PopulationDoc,
    pub hypergraphs: Option<HypergraphsDoc>,
    pub dynamics: DynamicsDoc,
    pub reward: Vec<TableDoc>,
    pub initial_belief: InitialBeliefDoc,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FactorDoc {
    pub name: String,
    pub values: Vec<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Agent0Doc {
    pub frame: String,
    /// Position of agent 0's frame among all frames.
    pub position: usize,
    pub actions: Vec<String>,
    pub observations: Vec<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FrameDoc {
    pub id: String,
    pub actions: Vec<String>,
    pub observations: Vec<String>,
    pub fscs: Vec<FscDoc>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FscDoc {
    pub id: String,
    /// Position in the global controller list.
    pub index: usize,
    pub action_dist: Vec<Vec<f64>>,
    /// Indexed by node, then action, then observation.
    pub node_transition: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PopulationDoc {
    pub n: usize,
    pub assignments: Vec<AssignmentDoc>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AssignmentDoc {
    pub frame: String,
    pub fsc: String,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HypergraphsDoc {
    pub transition: Option<Vec<EdgeDoc>>,
    pub observation: Option<Vec<EdgeDoc>>,
    pub reward: Option<Vec<EdgeDoc>>,
    /// Keyed by frame id.
    pub frame_observation: Option<BTreeMap<String, Vec<EdgeDoc>>>,
}

/// `[context, action, frame]`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EdgeDoc(pub ContextDoc, pub String, pub String);

#[derive(Debug, Clone, Default, Serialize, Deserialize, PartialEq, Eq, PartialOrd, Ord)]
#[serde(deny_unknown_fields)]
pub struct ContextDoc {
    pub factor: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x_next: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a0: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub action: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub obs: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DynamicsDoc {
    pub transition: Vec<TableDoc>,
    pub observation: Vec<TableDoc>,
    #[serde(default)]
    pub frame_observation: BTreeMap<String, Vec<TableDoc>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TableDoc {
    pub context: ContextDoc,
    pub rules: Vec<RuleDoc>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RuleDoc {
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub when: Vec<PredicateDoc>,
    pub value: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PredicateDoc {
    pub terms: Vec<TermDoc>,
    pub op: OpDoc,
    pub frac: f64,
    #[serde(default)]
    pub count: f64,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OpDoc {
    Lt,
    Ge,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TermDoc {
    pub action: String,
    pub frame: String,
    pub weight: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialBeliefDoc {
    pub state: Vec<f64>,
    pub models: Vec<Vec<f64>>,
}

/// Names used to write contexts.
struct Names<'a> {
    spec: &'a DomainSpec,
}

impl Names<'_> {
    fn factor(&self, k: usize) -> String {
        self.spec.states.factors()[k].name.clone()
    }

    fn value(&self, k: usize, v: usize) -> String {
        self.spec.states.factors()[k].values[v].clone()
    }

    fn a0(&self, a: usize) -> String {
        self.spec.frames[self.spec.agent0_frame].actions[a].clone()
    }

    fn context(&self, ctx: &Context) -> ContextDoc {
        let f = self.factor(ctx.factor());
        match *ctx {
            Context::Transition { factor, x, a0, x_next } => ContextDoc {
                factor: f,
                x: Some(self.value(factor, x)),
                x_next: Some(self.value(factor, x_next)),
                a0: Some(self.a0(a0)),
                ..Default::default()
            },
            Context::Observation { factor, x_next, a0, obs } => ContextDoc {
                factor: f,
                x_next: Some(self.value(factor, x_next)),
                a0: Some(self.a0(a0)),
                obs: Some(self.spec.frames[self.spec.agent0_frame].observations[obs].clone()),
                ..Default::default()
            },
            Context::Reward { factor, x, a0 } => ContextDoc {
                factor: f,
                x: Some(self.value(factor, x)),
                a0: Some(self.a0(a0)),
                ..Default::default()
            },
            Context::FrameObservation { frame, factor, x_next, action, obs } => {
                let fr = &self.spec.frames[frame];
                ContextDoc {
                    factor: f,
                    x_next: Some(self.value(factor, x_next)),
                    action: Some(fr.actions[action].clone()),
                    obs: Some(fr.observations[obs].clone()),
                    ..Default::default()
                }
            }
        }
    }

    fn pair(&self, pair: FrameAction) -> (String, String) {
        let fr = &self.spec.frames[pair.frame];
        (fr.actions[pair.action].clone(), fr.id.clone())
    }

    fn edges(&self, f: &ContextFunction) -> Vec<EdgeDoc> {
        f.graph
            .edges()
            .map(|(ctx, pair)| {
                let (a, fr) = self.pair(*pair);
                EdgeDoc(self.context(ctx), a, fr)
            })
            .collect()
    }

    fn tables(&self, f: &ContextFunction) -> Vec<TableDoc> {
        f.tables
            .iter()
            .map(|(ctx, rules)| TableDoc {
                context: self.context(ctx),
                rules: rules
                    .iter()
                    .map(|r| RuleDoc {
                        when: r
                            .when
                            .iter()
                            .map(|p| PredicateDoc {
                                terms: p
                                    .terms
                                    .iter()
                                    .map(|t| {
                                        let (action, frame) = self.pair(t.pair);
                                        TermDoc { action, frame, weight: t.weight }
                                    })
                                    .collect(),
                                op: match p.op {
                                    CompareOp::Lt => OpDoc::Lt,
                                    CompareOp::Ge => OpDoc::Ge,
                                },
                                frac: p.frac,
                                count: p.count,
                            })
                            .collect(),
                        value: r.value,
                    })
                    .collect(),
            })
            .collect()
    }
}

/// Document form of a domain.
pub fn to_document(spec: &DomainSpec) -> DomainFile {
    let names = Names { spec };
    let frame0 = &spec.frames[spec.agent0_frame];
    let frames = spec
        .frames
        .iter()
        .enumerate()
        .filter(|&(f, _)| f != spec.agent0_frame)
        .map(|(_, fr)| FrameDoc {
            id: fr.id.clone(),
            actions: fr.actions.clone(),
            observations: fr.observations.clone(),
            fscs: fr
                .fsc_pool
                .iter()
                .map(|&c| {
                    let fsc = &spec.fscs[c];
                    FscDoc {
                        id: fsc.id.clone(),
                        index: c,
                        action_dist: fsc.action_dist.clone(),
                        node_transition: fsc.node_transition.clone(),
                    }
                })
                .collect(),
        })
        .collect();
    let frame_obs_edges = spec
        .frame_observation
        .iter()
        .map(|(&f, func)| (spec.frames[f].id.clone(), names.edges(func)))
        .collect();
    let frame_obs_tables = spec
        .frame_observation
        .iter()
        .map(|(&f, func)| (spec.frames[f].id.clone(), names.tables(func)))
        .collect();
    DomainFile {
        name: spec.name.clone(),
        state_factors: spec
            .states
            .factors()
            .iter()
            .map(|f| FactorDoc { name: f.name.clone(), values: f.values.clone() })
            .collect(),
        agent0: Agent0Doc {
            frame: frame0.id.clone(),
            position: spec.agent0_frame,
            actions: frame0.actions.clone(),
            observations: frame0.observations.clone(),
        },
        frames,
        population: PopulationDoc {
            n: spec.population.len(),
            assignments: spec
                .population
                .assignments
                .iter()
                .map(|a| AssignmentDoc {
                    frame: spec.frames[a.frame].id.clone(),
                    fsc: spec.fscs[a.fsc].id.clone(),
                })
                .collect(),
        },
        hypergraphs: Some(HypergraphsDoc {
            transition: Some(names.edges(&spec.transition)),
            observation: Some(names.edges(&spec.observation)),
            reward: Some(names.edges(&spec.reward)),
            frame_observation: Some(frame_obs_edges),
        }),
        dynamics: DynamicsDoc {
            transition: names.tables(&spec.transition),
            observation: names.tables(&spec.observation),
            frame_observation: frame_obs_tables,
        },
        reward: names.tables(&spec.reward),
        initial_belief: InitialBeliefDoc {
            state: spec.initial_belief.state.clone(),
            models: spec.initial_belief.models.clone(),
        },
    }
}

pub fn to_json(spec: &DomainSpec) -> Result<String> {
    Ok(serde_json::to_string_pretty(&to_document(spec))?)
}

pub fn save_domain(domain: &Domain, path: impl AsRef<Path>) -> Result<()> {
    std::fs::write(path, to_json(domain.spec())?)?;
    Ok(())
}

fn parse_err(msg: impl Into<String>) -> Error {
    Error::Parse(msg.into())
}

struct Resolver<'a> {
    states: &'a StateSpace,
    frames: &'a [Frame],
    agent0: FrameId,
}

impl Resolver<'_> {
    fn frame(&self, id: &str) -> Result<FrameId> {
        self.frames
            .iter()
            .position(|f| f.id == id)
            .ok_or_else(|| parse_err(format!("unknown frame `{id}`")))
    }

    fn value(&self, k: usize, name: &Option<String>, field: &str) -> Result<usize> {
        let name = name.as_ref().ok_or_else(|| parse_err(format!("context is missing `{field}`")))?;
        self.states.value_index(k, name).map_err(|e| parse_err(e.to_string()))
    }

    fn field<'s>(name: &'s Option<String>, field: &str) -> Result<&'s str> {
        name.as_deref().ok_or_else(|| parse_err(format!("context is missing `{field}`")))
    }

    fn context(&self, doc: &ContextDoc, kind: FunctionKind, owner: Option<FrameId>) -> Result<Context> {
        let k = self.states.factor_index(&doc.factor).map_err(|e| parse_err(e.to_string()))?;
        let f0 = &self.frames[self.agent0];
        let a0 = || -> Result<usize> {
            f0.action_index(Self::field(&doc.a0, "a0")?).map_err(|e| parse_err(e.to_string()))
        };
        let stray = |fields: &[(&str, bool)]| -> Result<()> {
            match fields.iter().find(|(_, present)| *present) {
                Some((name, _)) => Err(parse_err(format!("{kind} context has a stray `{name}` field"))),
                None => Ok(()),
            }
        };
        Ok(match kind {
            FunctionKind::Transition => {
                stray(&[("action", doc.action.is_some()), ("obs", doc.obs.is_some())])?;
                Context::Transition {
                    factor: k,
                    x: self.value(k, &doc.x, "x")?,
                    a0: a0()?,
                    x_next: self.value(k, &doc.x_next, "x_next")?,
                }
            }
            FunctionKind::Observation => {
                stray(&[("x", doc.x.is_some()), ("action", doc.action.is_some())])?;
                Context::Observation {
                    factor: k,
                    x_next: self.value(k, &doc.x_next, "x_next")?,
                    a0: a0()?,
                    obs: f0
                        .observation_index(Self::field(&doc.obs, "obs")?)
                        .map_err(|e| parse_err(e.to_string()))?,
                }
            }
            FunctionKind::Reward => {
                stray(&[
                    ("x_next", doc.x_next.is_some()),
                    ("action", doc.action.is_some()),
                    ("obs", doc.obs.is_some()),
                ])?;
                Context::Reward { factor: k, x: self.value(k, &doc.x, "x")?, a0: a0()? }
            }
            FunctionKind::FrameObservation => {
                stray(&[("x", doc.x.is_some()), ("a0", doc.a0.is_some())])?;
                let frame = owner.expect("frame observation contexts have an owner");
                let fr = &self.frames[frame];
                Context::FrameObservation {
                    frame,
                    factor: k,
                    x_next: self.value(k, &doc.x_next, "x_next")?,
                    action: fr
                        .action_index(Self::field(&doc.action, "action")?)
                        .map_err(|e| parse_err(e.to_string()))?,
                    obs: fr
                        .observation_index(Self::field(&doc.obs, "obs")?)
                        .map_err(|e| parse_err(e.to_string()))?,
                }
            }
        })
    }

    fn pair(&self, action: &str, frame: &str) -> Result<FrameAction> {
        let f = self.frame(frame)?;
        let a = self.frames[f].action_index(action).map_err(|e| parse_err(e.to_string()))?;
        Ok(FrameAction::new(f, a))
    }

    fn function(
        &self,
        kind: FunctionKind,
        owner: Option<FrameId>,
        edges: &[EdgeDoc],
        tables: &[TableDoc],
    ) -> Result<ContextFunction> {
        let where_ = || match owner {
            Some(f) => format!("{kind} function of frame `{}`", self.frames[f].id),
            None => format!("{kind} function"),
        };
        let mut graph = FrameActionHypergraph::new(kind, owner);
        for (i, EdgeDoc(ctx, action, frame)) in edges.iter().enumerate() {
            let ctx = self
                .context(ctx, kind, owner)
                .map_err(|e| parse_err(format!("{} edge {i}: {e}", where_())))?;
            let pair = self
                .pair(action, frame)
                .map_err(|e| parse_err(format!("{} edge {i}: {e}", where_())))?;
            graph.add_edge(ctx, pair)?;
        }
        let mut func = ContextFunction::new(graph);
        for (i, table) in tables.iter().enumerate() {
            let at = |e: Error| parse_err(format!("{} table {i}: {e}", where_()));
            let ctx = self.context(&table.context, kind, owner).map_err(at)?;
            let mut rules = Vec::with_capacity(table.rules.len());
            for r in &table.rules {
                let mut when = Vec::with_capacity(r.when.len());
                for p in &r.when {
                    let terms = p
                        .terms
                        .iter()
                        .map(|t| Ok(Term { pair: self.pair(&t.action, &t.frame)?, weight: t.weight }))
                        .collect::<Result<Vec<_>>>()
                        .map_err(at)?;
                    let op = match p.op {
                        OpDoc::Lt => CompareOp::Lt,
                        OpDoc::Ge => CompareOp::Ge,
                    };
                    when.push(Predicate::new(terms, op, p.frac, p.count));
                }
                rules.push(Rule::new(when, r.value));
            }
            if func.tables.insert(ctx, rules).is_some() {
                return Err(parse_err(format!("{} table {i}: context listed twice", where_())));
            }
        }
        Ok(func)
    }
}

/// Rebuilds and validates a domain from its document form.
pub fn from_document(doc: DomainFile) -> Result<Domain> {
    let hyper = doc
        .hypergraphs
        .ok_or_else(|| parse_err("missing hypergraph section `transition`"))?;
    let missing = |kind: FunctionKind| parse_err(format!("missing hypergraph section `{kind}`"));
    let t_edges = hyper.transition.ok_or_else(|| missing(FunctionKind::Transition))?;
    let o_edges = hyper.observation.ok_or_else(|| missing(FunctionKind::Observation))?;
    let r_edges = hyper.reward.ok_or_else(|| missing(FunctionKind::Reward))?;
    let fo_edges = hyper
        .frame_observation
        .ok_or_else(|| missing(FunctionKind::FrameObservation))?;

    let factors = doc
        .state_factors
        .iter()
        .map(|f| {
            let values: Vec<&str> = f.values.iter().map(String::as_str).collect();
            StateFactor::new(f.name.clone(), &values)
        })
        .collect();
    let states = StateSpace::new(factors)?;

    let n_frames = doc.frames.len() + 1;
    if doc.agent0.position >= n_frames {
        return Err(parse_err(format!(
            "agent0 position {} outside the {n_frames} frames",
            doc.agent0.position
        )));
    }
    let mut frames: Vec<Frame> = Vec::with_capacity(n_frames);
    let mut others = doc.frames.iter();
    for f in 0..n_frames {
        if f == doc.agent0.position {
            let a: Vec<&str> = doc.agent0.actions.iter().map(String::as_str).collect();
            let o: Vec<&str> = doc.agent0.observations.iter().map(String::as_str).collect();
            frames.push(Frame::new(doc.agent0.frame.clone(), &a, &o));
        } else {
            let fd = others.next().expect("frame count checked");
            let a: Vec<&str> = fd.actions.iter().map(String::as_str).collect();
            let o: Vec<&str> = fd.observations.iter().map(String::as_str).collect();
            frames.push(Frame::new(fd.id.clone(), &a, &o));
        }
    }

    // controllers, placed at their global index
    let n_fscs: usize = doc.frames.iter().map(|f| f.fscs.len()).sum();
    let mut slots: Vec<Option<Fsc>> = vec![None; n_fscs];
    for (fd_pos, fd) in doc.frames.iter().enumerate() {
        let f = if fd_pos >= doc.agent0.position { fd_pos + 1 } else { fd_pos };
        for c in &fd.fscs {
            if c.index >= n_fscs || slots[c.index].is_some() {
                return Err(parse_err(format!("fsc `{}`: index {} is out of range or taken", c.id, c.index)));
            }
            check_fsc_rows(c, &doc.population.assignments, &fd.id)?;
            let fsc = Fsc::new(
                c.id.clone(),
                f,
                fd.actions.len(),
                fd.observations.len(),
                c.action_dist.clone(),
                c.node_transition.clone(),
            )?;
            frames[f].fsc_pool.push(c.index);
            slots[c.index] = Some(fsc);
        }
    }
    let fscs: Vec<Fsc> = slots.into_iter().map(|s| s.expect("every index filled")).collect();

    if doc.population.n != doc.population.assignments.len() {
        return Err(parse_err(format!(
            "population lists {} agents but n = {}",
            doc.population.assignments.len(),
            doc.population.n
        )));
    }
    let resolver = Resolver { states: &states, frames: &frames, agent0: doc.agent0.position };
    let mut assignments = Vec::with_capacity(doc.population.n);
    for (j, a) in doc.population.assignments.iter().enumerate() {
        let frame = resolver.frame(&a.frame).map_err(|e| parse_err(format!("agent {j}: {e}")))?;
        let fsc = frames[frame]
            .fsc_pool
            .iter()
            .copied()
            .find(|&c| fscs[c].id == a.fsc)
            .ok_or_else(|| parse_err(format!("agent {j}: frame `{}` has no fsc `{}`", a.frame, a.fsc)))?;
        assignments.push(Assignment { frame, fsc });
    }

    let transition = resolver.function(FunctionKind::Transition, None, &t_edges, &doc.dynamics.transition)?;
    let observation = resolver.function(FunctionKind::Observation, None, &o_edges, &doc.dynamics.observation)?;
    let reward = resolver.function(FunctionKind::Reward, None, &r_edges, &doc.reward)?;
    let mut frame_observation = BTreeMap::new();
    for (id, edges) in &fo_edges {
        let f = resolver.frame(id)?;
        let tables = doc.dynamics.frame_observation.get(id).map(Vec::as_slice).unwrap_or(&[]);
        frame_observation.insert(f, resolver.function(FunctionKind::FrameObservation, Some(f), edges, tables)?);
    }
    if let Some(id) = doc.dynamics.frame_observation.keys().find(|id| !fo_edges.contains_key(*id)) {
        return Err(parse_err(format!("frame_observation dynamics for `{id}` without a hypergraph")));
    }

    Domain::new(DomainSpec {
        name: doc.name,
        states,
        frames,
        agent0_frame: doc.agent0.position,
        fscs,
        population: AgentPopulation::new(assignments),
        transition,
        observation,
        reward,
        frame_observation,
        initial_belief: InitialBelief { state: doc.initial_belief.state, models: doc.initial_belief.models },
    })
}

/// Names the first agent using a controller with a non-normalized row.
fn check_fsc_rows(c: &FscDoc, assignments: &[AssignmentDoc], frame: &str) -> Result<()> {
    let users: Vec<usize> = assignments
        .iter()
        .enumerate()
        .filter(|(_, a)| a.frame == frame && a.fsc == c.id)
        .map(|(j, _)| j)
        .collect();
    let who = match users.first() {
        Some(j) => format!("agent {j} (fsc `{}`)", c.id),
        None => format!("fsc `{}`", c.id),
    };
    for (n, row) in c.action_dist.iter().enumerate() {
        if let Some(msg) = distribution_problem(row) {
            return Err(Error::Validation(format!("{who} node {n}: action distribution {msg}")));
        }
    }
    let nodes = c.action_dist.len().max(1);
    for (i, row) in c.node_transition.iter().enumerate() {
        if let Some(msg) = distribution_problem(row) {
            let node = i / (c.node_transition.len() / nodes).max(1);
            return Err(Error::Validation(format!("{who} node {node}: successor distribution (row {i}) {msg}")));
        }
    }
    Ok(())
}

pub fn from_json(text: &str) -> Result<Domain> {
    let doc: DomainFile = serde_json::from_str(text).map_err(|e| parse_err(e.to_string()))?;
    from_document(doc)
}

pub fn load_domain(path: impl AsRef<Path>) -> Result<Domain> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)?;
    from_json(&text).map_err(|e| match e {
        Error::Parse(m) => Error::Parse(format!("{}: {m}", path.display())),
        other => other,
    })
}
