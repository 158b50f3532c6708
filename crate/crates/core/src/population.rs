//! State spaces, frames, finite-state controllers and the population of
//! other agents.
//!
//! Other agents are modeled subintentionally: every agent `j` is assigned a
//! frame (its action and observation sets) and a finite-state controller
//! (FSC) admissible for that frame. The nodes of the controller are agent
//! `j`'s model space, so a belief over `j`'s models is a distribution over
//! controller nodes.

use std::fmt;

use crate::error::{Error, Result};

/// Tolerance used when checking that stored distributions sum to one.
pub const PROB_TOLERANCE: f64 = 1e-12;

pub type FactorId = usize;
pub type FrameId = usize;
pub type FscId = usize;
pub type ActionId = usize;
pub type ObsId = usize;
pub type NodeId = usize;

/// One named state variable with a finite ordered domain.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StateFactor {
    pub name: String,
    pub values: Vec<String>,
}

impl StateFactor {
    pub fn new(name: impl Into<String>, values: &[&str]) -> Self {
        Self {
            name: name.into(),
            values: values.iter().map(|v| v.to_string()).collect(),
        }
    }
}

/// Factored physical state space `S = X_1 x ... x X_K`.
///
/// Joint states are enumerated row-major over the factor order: the last
/// factor varies fastest.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StateSpace {
    factors: Vec<StateFactor>,
    strides: Vec<usize>,
    size: usize,
}

impl StateSpace {
    pub fn new(factors: Vec<StateFactor>) -> Result<Self> {
        if factors.is_empty() {
            return Err(Error::Validation(
                "state space needs at least one factor".into(),
            ));
        }
        if let Some(f) = factors.iter().find(|f| f.values.is_empty()) {
            return Err(Error::Validation(format!(
                "state factor `{}` has an empty domain",
                f.name
            )));
        }
        let mut strides = vec![1; factors.len()];
        for k in (0..factors.len() - 1).rev() {
            strides[k] = strides[k + 1] * factors[k + 1].values.len();
        }
        let size = strides[0] * factors[0].values.len();
        Ok(Self {
            factors,
            strides,
            size,
        })
    }

    pub fn factors(&self) -> &[StateFactor] {
        &self.factors
    }

    pub fn num_factors(&self) -> usize {
        self.factors.len()
    }

    pub fn factor_size(&self, k: FactorId) -> usize {
        self.factors[k].values.len()
    }

    /// Number of joint states.
    pub fn size(&self) -> usize {
        self.size
    }

    /// Value of factor `k` in joint state `index`.
    #[inline]
    pub fn value_of(&self, index: usize, k: FactorId) -> usize {
        (index / self.strides[k]) % self.factors[k].values.len()
    }

    pub fn state_of(&self, index: usize) -> Vec<usize> {
        (0..self.factors.len())
            .map(|k| self.value_of(index, k))
            .collect()
    }

    pub fn index_of(&self, values: &[usize]) -> usize {
        debug_assert_eq!(values.len(), self.factors.len());
        values
            .iter()
            .zip(&self.strides)
            .map(|(v, s)| v * s)
            .sum()
    }

    pub fn factor_index(&self, name: &str) -> Result<FactorId> {
        self.factors
            .iter()
            .position(|f| f.name == name)
            .ok_or_else(|| Error::lookup("state factor", name))
    }

    pub fn value_index(&self, k: FactorId, value: &str) -> Result<usize> {
        self.factors[k]
            .values
            .iter()
            .position(|v| v == value)
            .ok_or_else(|| Error::lookup("state value", format!("{}={value}", self.factors[k].name)))
    }

    /// Human readable joint state, e.g. `site0=low,site1=med`.
    pub fn describe(&self, index: usize) -> String {
        self.factors
            .iter()
            .enumerate()
            .map(|(k, f)| format!("{}={}", f.name, f.values[self.value_of(index, k)]))
            .collect::<Vec<_>>()
            .join(",")
    }
}

/// The static part of an agent's type: what it can do and observe.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Frame {
    pub id: String,
    pub actions: Vec<String>,
    pub observations: Vec<String>,
    /// Controllers admissible for agents of this frame.
    pub fsc_pool: Vec<FscId>,
}

impl Frame {
    pub fn new(id: impl Into<String>, actions: &[&str], observations: &[&str]) -> Self {
        Self {
            id: id.into(),
            actions: actions.iter().map(|a| a.to_string()).collect(),
            observations: observations.iter().map(|o| o.to_string()).collect(),
            fsc_pool: Vec::new(),
        }
    }

    pub fn num_actions(&self) -> usize {
        self.actions.len()
    }

    pub fn num_observations(&self) -> usize {
        self.observations.len()
    }

    pub fn action_index(&self, name: &str) -> Result<ActionId> {
        self.actions
            .iter()
            .position(|a| a == name)
            .ok_or_else(|| Error::lookup("action", format!("{}:{name}", self.id)))
    }

    pub fn observation_index(&self, name: &str) -> Result<ObsId> {
        self.observations
            .iter()
            .position(|o| o == name)
            .ok_or_else(|| Error::lookup("observation", format!("{}:{name}", self.id)))
    }
}

/// A finite-state controller.
///
/// `action_dist[n]` is `Pr(a | n)`; `node_transition` holds, for every
/// `(node, action, observation)` triple, the distribution over successor
/// nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct Fsc {
    pub id: String,
    pub frame: FrameId,
    pub num_actions: usize,
    pub num_observations: usize,
    pub action_dist: Vec<Vec<f64>>,
    pub node_transition: Vec<Vec<f64>>,
}

impl Fsc {
    /// Builds a controller and checks every distribution.
    pub fn new(
        id: impl Into<String>,
        frame: FrameId,
        num_actions: usize,
        num_observations: usize,
        action_dist: Vec<Vec<f64>>,
        node_transition: Vec<Vec<f64>>,
    ) -> Result<Self> {
        let fsc = Self {
            id: id.into(),
            frame,
            num_actions,
            num_observations,
            action_dist,
            node_transition,
        };
        let violations = fsc.violations();
        if let Some(v) = violations.first() {
            return Err(Error::Validation(v.to_string()));
        }
        Ok(fsc)
    }

    /// Single-node controller: the agent draws from `dist` at every step.
    pub fn single_node(
        id: impl Into<String>,
        frame: FrameId,
        dist: Vec<f64>,
        num_observations: usize,
    ) -> Result<Self> {
        let num_actions = dist.len();
        Self::new(
            id,
            frame,
            num_actions,
            num_observations,
            vec![dist],
            vec![vec![1.0]; num_actions * num_observations],
        )
    }

    pub fn num_nodes(&self) -> usize {
        self.action_dist.len()
    }

    #[inline]
    fn step_index(&self, node: NodeId, action: ActionId, obs: ObsId) -> usize {
        (node * self.num_actions + action) * self.num_observations + obs
    }

    /// `Pr(a | node)`.
    pub fn fsc_action_dist(&self, node: NodeId) -> Result<&[f64]> {
        self.action_dist
            .get(node)
            .map(Vec::as_slice)
            .ok_or_else(|| Error::lookup("fsc node", format!("{}#{node}", self.id)))
    }

    /// `Pr(node' | node, action, obs)`.
    pub fn fsc_step_dist(&self, node: NodeId, action: ActionId, obs: ObsId) -> Result<&[f64]> {
        if node >= self.num_nodes() || action >= self.num_actions || obs >= self.num_observations
        {
            return Err(Error::lookup(
                "fsc step",
                format!("{}(node {node}, action {action}, obs {obs})", self.id),
            ));
        }
        Ok(&self.node_transition[self.step_index(node, action, obs)])
    }

    #[inline]
    pub(crate) fn step(&self, node: NodeId, action: ActionId, obs: ObsId) -> &[f64] {
        &self.node_transition[self.step_index(node, action, obs)]
    }

    /// Every normalization or shape problem, with its location.
    pub fn violations(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        let nodes = self.action_dist.len();
        if nodes == 0 {
            out.push(Violation::new(
                ViolationKind::Shape,
                format!("fsc `{}`", self.id),
                "controller has no nodes",
            ));
            return out;
        }
        for (n, row) in self.action_dist.iter().enumerate() {
            if row.len() != self.num_actions {
                out.push(Violation::new(
                    ViolationKind::Shape,
                    format!("fsc `{}` node {n}", self.id),
                    format!("action distribution has {} entries, frame has {} actions", row.len(), self.num_actions),
                ));
            } else if let Some(msg) = distribution_problem(row) {
                out.push(Violation::new(
                    ViolationKind::Normalization,
                    format!("fsc `{}` node {n} action distribution", self.id),
                    msg,
                ));
            }
        }
        let expected = nodes * self.num_actions * self.num_observations;
        if self.node_transition.len() != expected {
            out.push(Violation::new(
                ViolationKind::Shape,
                format!("fsc `{}`", self.id),
                format!(
                    "expected {expected} node-transition rows (node x action x observation), found {}",
                    self.node_transition.len()
                ),
            ));
            return out;
        }
        for n in 0..nodes {
            for a in 0..self.num_actions {
                for o in 0..self.num_observations {
                    let row = &self.node_transition[self.step_index(n, a, o)];
                    if row.len() != nodes {
                        out.push(Violation::new(
                            ViolationKind::Shape,
                            format!("fsc `{}` node {n} action {a} obs {o}", self.id),
                            format!("successor distribution has {} entries for {nodes} nodes", row.len()),
                        ));
                    } else if let Some(msg) = distribution_problem(row) {
                        out.push(Violation::new(
                            ViolationKind::Normalization,
                            format!("fsc `{}` node {n} action {a} obs {o}", self.id),
                            msg,
                        ));
                    }
                }
            }
        }
        out
    }
}

/// Returns a description of the problem if `row` is not a distribution.
pub(crate) fn distribution_problem(row: &[f64]) -> Option<String> {
    if let Some(p) = row.iter().find(|p| !p.is_finite() || **p < 0.0) {
        return Some(format!("invalid probability {p}"));
    }
    let total: f64 = row.iter().sum();
    if (total - 1.0).abs() > PROB_TOLERANCE {
        return Some(format!("sums to {total}"));
    }
    None
}

/// A finite-horizon conditional plan: act, then branch on the observation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PlanNode {
    pub action: ActionId,
    /// One child per observation, or empty at a leaf.
    pub children: Vec<PlanNode>,
}

impl PlanNode {
    pub fn leaf(action: ActionId) -> Self {
        Self {
            action,
            children: Vec::new(),
        }
    }

    pub fn branch(action: ActionId, children: Vec<PlanNode>) -> Self {
        Self { action, children }
    }

    pub fn count_nodes(&self) -> usize {
        1 + self.children.iter().map(PlanNode::count_nodes).sum::<usize>()
    }

    pub fn depth(&self) -> usize {
        1 + self.children.iter().map(PlanNode::depth).max().unwrap_or(0)
    }

    /// The plan's action after the given observation history.
    pub fn action_after(&self, history: &[ObsId]) -> Option<ActionId> {
        match history.split_first() {
            None => Some(self.action),
            Some((o, rest)) => self.children.get(*o)?.action_after(rest),
        }
    }
}

/// Converts a conditional plan into a deterministic controller with one node
/// per plan node (pre-order numbering). Leaves loop on themselves.
pub fn policy_to_fsc(
    plan: &PlanNode,
    id: impl Into<String>,
    frame: FrameId,
    num_actions: usize,
    num_observations: usize,
) -> Result<Fsc> {
    let mut nodes: Vec<(ActionId, Vec<NodeId>)> = Vec::new();
    fn visit(
        node: &PlanNode,
        num_actions: usize,
        num_obs: usize,
        nodes: &mut Vec<(ActionId, Vec<NodeId>)>,
        path: &mut Vec<usize>,
    ) -> Result<NodeId> {
        if node.action >= num_actions {
            return Err(Error::Validation(format!(
                "plan node at history {path:?} uses action {} outside the frame",
                node.action
            )));
        }
        if !node.children.is_empty() && node.children.len() != num_obs {
            return Err(Error::Validation(format!(
                "plan node at history {path:?} branches on {} of {num_obs} observations",
                node.children.len()
            )));
        }
        let me = nodes.len();
        nodes.push((node.action, Vec::new()));
        let mut succ = Vec::with_capacity(num_obs);
        if node.children.is_empty() {
            succ = vec![me; num_obs];
        } else {
            for (o, child) in node.children.iter().enumerate() {
                path.push(o);
                succ.push(visit(child, num_actions, num_obs, nodes, path)?);
                path.pop();
            }
        }
        nodes[me].1 = succ;
        Ok(me)
    }
    visit(plan, num_actions, num_observations, &mut nodes, &mut Vec::new())?;

    let n = nodes.len();
    let mut action_dist = Vec::with_capacity(n);
    let mut node_transition = Vec::with_capacity(n * num_actions * num_observations);
    for (action, succ) in &nodes {
        let mut row = vec![0.0; num_actions];
        row[*action] = 1.0;
        action_dist.push(row);
        // Transitions for actions the node never emits follow the same
        // observation branches; they carry no probability mass.
        for _ in 0..num_actions {
            for &next in succ {
                let mut dist = vec![0.0; n];
                dist[next] = 1.0;
                node_transition.push(dist);
            }
        }
    }
    Fsc::new(id, frame, num_actions, num_observations, action_dist, node_transition)
}

/// Frame and controller assigned to one other agent.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Assignment {
    pub frame: FrameId,
    pub fsc: FscId,
}

/// The `N` other agents sharing the environment with agent 0.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct AgentPopulation {
    pub assignments: Vec<Assignment>,
}

impl AgentPopulation {
    pub fn new(assignments: Vec<Assignment>) -> Self {
        Self { assignments }
    }

    pub fn len(&self) -> usize {
        self.assignments.len()
    }

    pub fn is_empty(&self) -> bool {
        self.assignments.is_empty()
    }

    pub fn frame_of(&self, agent: usize) -> FrameId {
        self.assignments[agent].frame
    }

    pub fn fsc_of(&self, agent: usize) -> FscId {
        self.assignments[agent].fsc
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ViolationKind {
    DanglingId,
    Normalization,
    Shape,
}

/// One invariant violation and where it was found.
#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub kind: ViolationKind,
    pub location: String,
    pub detail: String,
}

impl Violation {
    pub fn new(kind: ViolationKind, location: impl Into<String>, detail: impl Into<String>) -> Self {
        Self {
            kind,
            location: location.into(),
            detail: detail.into(),
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?} at {}: {}", self.kind, self.location, self.detail)
    }
}

/// Collected violations; empty iff the input is valid.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn push(&mut self, v: Violation) {
        self.violations.push(v);
    }

    pub fn extend(&mut self, other: ValidationReport) {
        self.violations.extend(other.violations);
    }

    pub fn into_result(self) -> Result<()> {
        if self.violations.is_empty() {
            Ok(())
        } else {
            let lines: Vec<String> = self.violations.iter().map(|v| v.to_string()).collect();
            Err(Error::Validation(lines.join("; ")))
        }
    }
}

/// Checks frames, controllers and agent assignments against each other.
pub fn validate_population(
    pop: &AgentPopulation,
    frames: &[Frame],
    fscs: &[Fsc],
) -> ValidationReport {
    let mut report = ValidationReport::default();
    for (fi, frame) in frames.iter().enumerate() {
        if frame.actions.is_empty() {
            report.push(Violation::new(
                ViolationKind::Shape,
                format!("frame `{}`", frame.id),
                "frame has no actions",
            ));
        }
        if frames[..fi].iter().any(|f| f.id == frame.id && f != frame) {
            report.push(Violation::new(
                ViolationKind::Shape,
                format!("frame `{}`", frame.id),
                "two different frames share this id",
            ));
        }
        for &c in &frame.fsc_pool {
            if c >= fscs.len() {
                report.push(Violation::new(
                    ViolationKind::DanglingId,
                    format!("frame `{}` fsc pool", frame.id),
                    format!("unknown fsc {c}"),
                ));
            }
        }
    }
    for fsc in fscs {
        match frames.get(fsc.frame) {
            None => report.push(Violation::new(
                ViolationKind::DanglingId,
                format!("fsc `{}`", fsc.id),
                format!("unknown frame {}", fsc.frame),
            )),
            Some(frame) => {
                if frame.num_actions() != fsc.num_actions
                    || frame.num_observations() != fsc.num_observations
                {
                    report.push(Violation::new(
                        ViolationKind::Shape,
                        format!("fsc `{}`", fsc.id),
                        format!("controller sized for {}x{} actions/observations, frame `{}` has {}x{}",
                            fsc.num_actions, fsc.num_observations, frame.id,
                            frame.num_actions(), frame.num_observations()),
                    ));
                }
            }
        }
        for v in fsc.violations() {
            report.push(v);
        }
    }
    for (j, a) in pop.assignments.iter().enumerate() {
        if a.frame >= frames.len() {
            report.push(Violation::new(
                ViolationKind::DanglingId,
                format!("agent {j}"),
                format!("unknown frame {}", a.frame),
            ));
            continue;
        }
        match fscs.get(a.fsc) {
            None => report.push(Violation::new(
                ViolationKind::DanglingId,
                format!("agent {j}"),
                format!("unknown fsc {}", a.fsc),
            )),
            Some(fsc) if fsc.frame != a.frame => report.push(Violation::new(
                ViolationKind::DanglingId,
                format!("agent {j}"),
                format!(
                    "fsc `{}` belongs to frame {}, agent has frame `{}`",
                    fsc.id, fsc.frame, frames[a.frame].id
                ),
            )),
            Some(_) => {}
        }
    }
    report
}
