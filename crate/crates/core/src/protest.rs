//! The policing-protest benchmark.
//!
//! Three protest sites, each with an intensity in {low, med, high}. The
//! police (agent 0) place two troops each step, possibly both at one site,
//! and observe one high-intensity flag per site. Protestors are peaceful or
//! disruptive; each step every protestor goes to one of the sites or stays
//! home. Two troops at a site make that site independent of the protestors.

use std::collections::BTreeMap;

use crate::config::Configuration;
use crate::domain::{CompareOp, ContextFunction, Domain, DomainSpec, InitialBelief, Predicate, Rule, Term};
use crate::error::{Error, Result};
use crate::hypergraph::{Context, ContextSpace, FrameAction, FrameActionHypergraph, FunctionKind, Neighborhood};
use crate::population::{ActionId, Assignment, AgentPopulation, Frame, FrameId, Fsc, StateFactor, StateSpace};

pub const SITES: usize = 3;
pub const LEVELS: [&str; 3] = ["low", "med", "high"];

pub const DISRUPTIVE: FrameId = 0;
pub const PEACEFUL: FrameId = 1;
pub const POLICE: FrameId = 2;

/// Protestor action index of "stay home".
pub const STAY_HOME: ActionId = SITES;

const ESCALATE: usize = 0;
const STAY: usize = 1;
const DEESCALATE: usize = 2;

/// Pressure bucket of a site.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Bucket {
    Low = 0,
    Mid = 1,
    High = 2,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Controllers {
    /// One node per frame; actions drawn from a fixed distribution.
    Blind,
    /// Two nodes per frame, each preferring a site; a flag observed at the
    /// preferred site usually switches the preference.
    Reactive,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProtestParams {
    pub n: usize,
    /// Fraction of peaceful protestors; the first `round(frame_mix * n)`
    /// agents are peaceful.
    pub frame_mix: f64,
    pub theta_lo: f64,
    pub theta_hi: f64,
    /// `[troops][bucket] = (escalate, stay, de-escalate)`.
    pub transition: [[[f64; 3]; 3]; 3],
    /// Flag probability per next intensity in the low disruptive bucket.
    pub obs_low: [f64; 3],
    /// Added per bucket step above low.
    pub obs_shift: f64,
    pub obs_cap: f64,
    /// Added to a protestor's flag probability when police are at the site.
    pub police_obs_boost: f64,
    pub base_reward: [f64; 3],
    /// Per disruptive bucket, charged at sites with fewer than two troops.
    pub penalty: [f64; 3],
    pub troop_cost: f64,
    pub controllers: Controllers,
}

impl Default for ProtestParams {
    fn default() -> Self {
        let two = [0.0, 0.1, 0.9];
        Self {
            n: 2,
            frame_mix: 0.5,
            theta_lo: 0.25,
            theta_hi: 0.5,
            transition: [
                [[0.0, 0.8, 0.2], [0.5, 0.5, 0.0], [0.9, 0.1, 0.0]],
                [[0.0, 0.5, 0.5], [0.1, 0.8, 0.1], [0.6, 0.4, 0.0]],
                [two, two, two],
            ],
            obs_low: [0.05, 0.3, 0.85],
            obs_shift: 0.1,
            obs_cap: 0.95,
            police_obs_boost: 0.1,
            base_reward: [10.0, 0.0, -10.0],
            penalty: [0.0, 2.0, 5.0],
            troop_cost: 1.0,
            controllers: Controllers::Blind,
        }
    }
}

impl ProtestParams {
    pub fn with_n(n: usize) -> Self {
        Self {
            n,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Validation(format!("protest parameters: {m}")));
        if self.n == 0 {
            return bad("at least one protestor is needed".into());
        }
        if !(0.0..=1.0).contains(&self.frame_mix) {
            return bad(format!("frame_mix {} outside [0, 1]", self.frame_mix));
        }
        if !(0.0 <= self.theta_lo && self.theta_lo < self.theta_hi && self.theta_hi <= 1.0) {
            return bad(format!("thresholds {} / {} not ordered in [0, 1]", self.theta_lo, self.theta_hi));
        }
        for (t, rows) in self.transition.iter().enumerate() {
            for (b, row) in rows.iter().enumerate() {
                let s: f64 = row.iter().sum();
                if (s - 1.0).abs() > 1e-12 || row.iter().any(|p| *p < 0.0) {
                    return bad(format!("transition row for {t} troops, bucket {b} sums to {s}"));
                }
            }
        }
        let probs = self.obs_low.iter().chain([&self.obs_cap]);
        if probs.clone().any(|p| !(0.0..=1.0).contains(p)) {
            return bad("observation probabilities outside [0, 1]".into());
        }
        Ok(())
    }

    pub fn num_peaceful(&self) -> usize {
        (self.frame_mix * self.n as f64).round() as usize
    }

    fn bucket_of(&self, stat: f64, total: u32) -> Bucket {
        let total = total as f64;
        if stat >= self.theta_hi * total {
            Bucket::High
        } else if stat < self.theta_lo * total {
            Bucket::Low
        } else {
            Bucket::Mid
        }
    }

    /// `Pr(x_k' | x_k, troops, bucket)` with boundary mass folded into "stay".
    pub fn transition_prob(&self, x: usize, troops: usize, bucket: Bucket, x_next: usize) -> f64 {
        let row = self.transition[troops][bucket as usize];
        let mut p = [0.0; 3];
        p[x] += row[STAY];
        if x + 1 < 3 { p[x + 1] += row[ESCALATE] } else { p[x] += row[ESCALATE] }
        if x > 0 { p[x - 1] += row[DEESCALATE] } else { p[x] += row[DEESCALATE] }
        p[x_next]
    }

    /// Probability that agent 0 sees the flag of a site at intensity
    /// `x_next` under a disruptive bucket.
    pub fn flag_prob(&self, x_next: usize, bucket: Bucket) -> f64 {
        (self.obs_low[x_next] + self.obs_shift * bucket as usize as f64).min(self.obs_cap)
    }

    /// A protestor's flag probability.
    pub fn protestor_flag_prob(&self, x_next: usize, police_present: bool) -> f64 {
        let boost = if police_present { self.police_obs_boost } else { 0.0 };
        (self.obs_low[x_next] + boost).min(self.obs_cap)
    }

    pub fn site_reward(&self, x: usize, troops: usize, bucket: Bucket) -> f64 {
        let penalty = if troops < 2 { self.penalty[bucket as usize] } else { 0.0 };
        self.base_reward[x] - penalty - self.troop_cost * troops as f64
    }
}

/// Sites of the two troops of placement `a0`.
pub fn placement(a0: ActionId) -> (usize, usize) {
    (a0 / SITES, a0 % SITES)
}

pub fn troops(a0: ActionId, site: usize) -> usize {
    let (i, j) = placement(a0);
    (i == site) as usize + (j == site) as usize
}

/// Whether the flag of `site` is set in observation `obs`.
pub fn flag(obs: usize, site: usize) -> bool {
    (obs >> (SITES - 1 - site)) & 1 == 1
}

fn go(site: usize) -> ActionId {
    site
}

/// `(action, frame)` pairs a site's transition context depends on.
pub fn transition_neighborhood(site: usize, a0: ActionId) -> Neighborhood {
    if troops(a0, site) == 2 {
        Neighborhood::empty()
    } else {
        Neighborhood::new(vec![FrameAction::new(PEACEFUL, go(site)), FrameAction::new(DISRUPTIVE, go(site))])
    }
}

/// Observation and reward contexts depend on disruptive protestors only.
pub fn disruptive_neighborhood(site: usize, a0: ActionId) -> Neighborhood {
    if troops(a0, site) == 2 {
        Neighborhood::empty()
    } else {
        Neighborhood::new(vec![FrameAction::new(DISRUPTIVE, go(site))])
    }
}

/// Police placements with at least one troop at `site`.
pub fn police_neighborhood(site: usize) -> Neighborhood {
    Neighborhood::new(
        (0..SITES * SITES)
            .filter(|&a| troops(a, site) >= 1)
            .map(|a| FrameAction::new(POLICE, a))
            .collect(),
    )
}

fn count_of(nu: &Neighborhood, config: &Configuration, pair: FrameAction) -> u32 {
    nu.slot_of(pair).map_or(0, |s| config.counts()[s])
}

fn check_config(nu: &Neighborhood, config: &Configuration) -> Result<()> {
    if config.nu_len() != nu.len() {
        return Err(Error::Validation(format!(
            "configuration with {} slots for a neighborhood of {}",
            config.nu_len(),
            nu.len()
        )));
    }
    Ok(())
}

/// Closed-form transition at site `k` given a configuration over its
/// neighborhood.
pub fn evaluate_transition(
    p: &ProtestParams,
    k: usize,
    x: usize,
    a0: ActionId,
    config: &Configuration,
    x_next: usize,
) -> Result<f64> {
    let nu = transition_neighborhood(k, a0);
    check_config(&nu, config)?;
    let t = troops(a0, k);
    let stat = count_of(&nu, config, FrameAction::new(PEACEFUL, go(k))) as f64
        + 2.0 * count_of(&nu, config, FrameAction::new(DISRUPTIVE, go(k))) as f64;
    let bucket = if t == 2 { Bucket::Low } else { p.bucket_of(stat, config.total()) };
    Ok(p.transition_prob(x, t, bucket, x_next))
}

/// Closed-form probability of site `k`'s flag value.
pub fn evaluate_observation(
    p: &ProtestParams,
    k: usize,
    x_next: usize,
    a0: ActionId,
    config: &Configuration,
    flag_k: bool,
) -> Result<f64> {
    let nu = disruptive_neighborhood(k, a0);
    check_config(&nu, config)?;
    let bucket = if nu.is_empty() {
        Bucket::Low
    } else {
        p.bucket_of(count_of(&nu, config, FrameAction::new(DISRUPTIVE, go(k))) as f64, config.total())
    };
    let f = p.flag_prob(x_next, bucket);
    Ok(if flag_k { f } else { 1.0 - f })
}

pub fn evaluate_reward(p: &ProtestParams, k: usize, x: usize, a0: ActionId, config: &Configuration) -> Result<f64> {
    let nu = disruptive_neighborhood(k, a0);
    check_config(&nu, config)?;
    let bucket = if nu.is_empty() {
        Bucket::Low
    } else {
        p.bucket_of(count_of(&nu, config, FrameAction::new(DISRUPTIVE, go(k))) as f64, config.total())
    };
    Ok(p.site_reward(x, troops(a0, k), bucket))
}

/// Value of any protest context computed straight from a joint action of
/// the acting agents, without neighborhoods or configurations.
pub fn joint_value(p: &ProtestParams, ctx: &Context, joint_action: &[ActionId], frames: &[FrameId]) -> f64 {
    let total = joint_action.len() as u32;
    let count = |frame: FrameId, action: ActionId| {
        joint_action
            .iter()
            .zip(frames)
            .filter(|&(&a, &f)| a == action && f == frame)
            .count() as f64
    };
    let disruptive_bucket = |k: usize, a0: ActionId| {
        if troops(a0, k) == 2 {
            Bucket::Low
        } else {
            p.bucket_of(count(DISRUPTIVE, go(k)), total)
        }
    };
    match *ctx {
        Context::Transition { factor: k, x, a0, x_next } => {
            let t = troops(a0, k);
            let bucket = if t == 2 {
                Bucket::Low
            } else {
                p.bucket_of(count(PEACEFUL, go(k)) + 2.0 * count(DISRUPTIVE, go(k)), total)
            };
            p.transition_prob(x, t, bucket, x_next)
        }
        Context::Observation { factor: k, x_next, a0, obs } => {
            let f = p.flag_prob(x_next, disruptive_bucket(k, a0));
            if flag(obs, k) { f } else { 1.0 - f }
        }
        Context::Reward { factor: k, x, a0 } => p.site_reward(x, troops(a0, k), disruptive_bucket(k, a0)),
        Context::FrameObservation { factor: k, x_next, obs, .. } => {
            let present = joint_action
                .iter()
                .zip(frames)
                .any(|(&a, &f)| f == POLICE && troops(a, k) >= 1);
            let f = p.protestor_flag_prob(x_next, present);
            if flag(obs, k) { f } else { 1.0 - f }
        }
    }
}

fn bucket_rules(
    terms: Vec<Term>,
    p: &ProtestParams,
    value: impl Fn(Bucket) -> f64,
) -> Vec<Rule> {
    vec![
        Rule::new(vec![Predicate::new(terms.clone(), CompareOp::Ge, p.theta_hi, 0.0)], value(Bucket::High)),
        Rule::new(vec![Predicate::new(terms, CompareOp::Lt, p.theta_lo, 0.0)], value(Bucket::Low)),
        Rule::always(value(Bucket::Mid)),
    ]
}

fn with_edges(func: &mut ContextFunction, ctx: Context, nu: &Neighborhood, rules: Vec<Rule>) -> Result<()> {
    for &pair in nu.pairs() {
        func.graph.add_edge(ctx, pair)?;
    }
    func.set(ctx, rules);
    Ok(())
}

fn obs_name(o: usize) -> String {
    let bits: String = (0..SITES).map(|k| if flag(o, k) { '1' } else { '0' }).collect();
    format!("flags-{bits}")
}

fn protestor_fscs(p: &ProtestParams, frames: &mut [Frame]) -> Result<Vec<Fsc>> {
    let n_obs = 1 << SITES;
    let n_act = SITES + 1;
    let mut fscs = Vec::new();
    for (frame, name) in [(DISRUPTIVE, "disruptive"), (PEACEFUL, "peaceful")] {
        let fsc = match p.controllers {
            Controllers::Blind => {
                let dist = if frame == PEACEFUL { vec![0.25; 4] } else { vec![0.3, 0.3, 0.3, 0.1] };
                Fsc::single_node(format!("{name}-blind"), frame, dist, n_obs)?
            }
            Controllers::Reactive => {
                let (hi, lo, home) = if frame == PEACEFUL { (0.55, 0.15, 0.15) } else { (0.6, 0.15, 0.1) };
                let action_dist = (0..2)
                    .map(|m| {
                        let mut d = vec![lo; n_act];
                        d[m] = hi;
                        d[STAY_HOME] = home;
                        d
                    })
                    .collect();
                let mut node_transition = Vec::with_capacity(2 * n_act * n_obs);
                for m in 0..2 {
                    for _a in 0..n_act {
                        for o in 0..n_obs {
                            let switch = if flag(o, m) { 0.8 } else { 0.1 };
                            let mut row = vec![0.0; 2];
                            row[m] = 1.0 - switch;
                            row[1 - m] = switch;
                            node_transition.push(row);
                        }
                    }
                }
                Fsc::new(format!("{name}-reactive"), frame, n_act, n_obs, action_dist, node_transition)?
            }
        };
        frames[frame].fsc_pool.push(fscs.len());
        fscs.push(fsc);
    }
    Ok(fscs)
}

/// Builds the protest domain.
pub fn build_domain(p: &ProtestParams) -> Result<Domain> {
    p.validate()?;
    let states = StateSpace::new((0..SITES).map(|k| StateFactor::new(format!("site{k}"), &LEVELS)).collect())?;
    let n_obs = 1 << SITES;
    let obs_names: Vec<String> = (0..n_obs).map(obs_name).collect();
    let obs_refs: Vec<&str> = obs_names.iter().map(String::as_str).collect();
    let protest_actions = ["go-site-0", "go-site-1", "go-site-2", "stay-home"];
    let a0_names: Vec<String> = (0..SITES * SITES)
        .map(|a| {
            let (i, j) = placement(a);
            format!("place-{i}-{j}")
        })
        .collect();
    let a0_refs: Vec<&str> = a0_names.iter().map(String::as_str).collect();
    let mut frames = vec![
        Frame::new("disruptive", &protest_actions, &obs_refs),
        Frame::new("peaceful", &protest_actions, &obs_refs),
        Frame::new("police", &a0_refs, &obs_refs),
    ];
    let fscs = protestor_fscs(p, &mut frames)?;

    let space = ContextSpace {
        factor_sizes: vec![3; SITES],
        agent0_actions: SITES * SITES,
        agent0_observations: n_obs,
        frame_sizes: frames.iter().map(|f| (f.num_actions(), f.num_observations())).collect(),
    };

    let mut transition = ContextFunction::new(FrameActionHypergraph::new(FunctionKind::Transition, None));
    for ctx in space.contexts(FunctionKind::Transition, None) {
        let Context::Transition { factor: k, x, a0, x_next } = ctx else { unreachable!() };
        let nu = transition_neighborhood(k, a0);
        let t = troops(a0, k);
        let rules = if nu.is_empty() {
            vec![Rule::always(p.transition_prob(x, t, Bucket::Low, x_next))]
        } else {
            let terms = vec![
                Term { pair: FrameAction::new(PEACEFUL, go(k)), weight: 1.0 },
                Term { pair: FrameAction::new(DISRUPTIVE, go(k)), weight: 2.0 },
            ];
            bucket_rules(terms, p, |b| p.transition_prob(x, t, b, x_next))
        };
        with_edges(&mut transition, ctx, &nu, rules)?;
    }

    let disruptive_terms = |k: usize| vec![Term { pair: FrameAction::new(DISRUPTIVE, go(k)), weight: 1.0 }];

    let mut observation = ContextFunction::new(FrameActionHypergraph::new(FunctionKind::Observation, None));
    for ctx in space.contexts(FunctionKind::Observation, None) {
        let Context::Observation { factor: k, x_next, a0, obs } = ctx else { unreachable!() };
        let nu = disruptive_neighborhood(k, a0);
        let value = |b: Bucket| {
            let f = p.flag_prob(x_next, b);
            if flag(obs, k) { f } else { 1.0 - f }
        };
        let rules = if nu.is_empty() {
            vec![Rule::always(value(Bucket::Low))]
        } else {
            bucket_rules(disruptive_terms(k), p, value)
        };
        with_edges(&mut observation, ctx, &nu, rules)?;
    }

    let mut reward = ContextFunction::new(FrameActionHypergraph::new(FunctionKind::Reward, None));
    for ctx in space.contexts(FunctionKind::Reward, None) {
        let Context::Reward { factor: k, x, a0 } = ctx else { unreachable!() };
        let nu = disruptive_neighborhood(k, a0);
        let t = troops(a0, k);
        let rules = if nu.is_empty() {
            vec![Rule::always(p.site_reward(x, t, Bucket::Low))]
        } else {
            bucket_rules(disruptive_terms(k), p, |b| p.site_reward(x, t, b))
        };
        with_edges(&mut reward, ctx, &nu, rules)?;
    }

    let mut frame_observation = BTreeMap::new();
    for frame in [DISRUPTIVE, PEACEFUL] {
        let mut func = ContextFunction::new(FrameActionHypergraph::new(FunctionKind::FrameObservation, Some(frame)));
        for ctx in space.contexts(FunctionKind::FrameObservation, Some(frame)) {
            let Context::FrameObservation { factor: k, x_next, obs, .. } = ctx else { unreachable!() };
            let nu = police_neighborhood(k);
            let value = |present: bool| {
                let f = p.protestor_flag_prob(x_next, present);
                if flag(obs, k) { f } else { 1.0 - f }
            };
            let terms = nu.pairs().iter().map(|&pair| Term { pair, weight: 1.0 }).collect();
            let rules = vec![
                Rule::new(vec![Predicate::new(terms, CompareOp::Ge, 0.0, 1.0)], value(true)),
                Rule::always(value(false)),
            ];
            with_edges(&mut func, ctx, &nu, rules)?;
        }
        frame_observation.insert(frame, func);
    }

    let peaceful = p.num_peaceful();
    let assignments: Vec<Assignment> = (0..p.n)
        .map(|j| {
            let frame = if j < peaceful { PEACEFUL } else { DISRUPTIVE };
            Assignment { frame, fsc: frames[frame].fsc_pool[0] }
        })
        .collect();
    let models = assignments
        .iter()
        .map(|a| {
            let m = fscs[a.fsc].num_nodes();
            vec![1.0 / m as f64; m]
        })
        .collect();
    let n_states = states.size();
    Domain::new(DomainSpec {
        name: format!("protest-n{}", p.n),
        states,
        frames,
        agent0_frame: POLICE,
        fscs,
        population: AgentPopulation::new(assignments),
        transition,
        observation,
        reward,
        frame_observation,
        initial_belief: InitialBelief {
            state: vec![1.0 / n_states as f64; n_states],
            models,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::enumerate_configs;

    #[test]
    fn sizes_match_the_benchmark() {
        let d = build_domain(&ProtestParams::default()).unwrap();
        assert_eq!(d.num_states(), 27);
        assert_eq!(d.num_actions(), 9);
        assert_eq!(d.num_observations(), 8);
        assert_eq!(d.frames()[PEACEFUL].num_actions(), 4);
        assert_eq!(d.frames()[DISRUPTIVE].num_observations(), 8);
    }

    #[test]
    fn two_troops_cut_the_site_off() {
        let d = build_domain(&ProtestParams::default()).unwrap();
        let a0 = 4; // place-1-1
        for x in 0..3 {
            for xn in 0..3 {
                let ctx = Context::Transition { factor: 1, x, a0, x_next: xn };
                assert!(d.neighborhood(&ctx).unwrap().is_empty());
            }
        }
        let cfg = Configuration::zeros(0);
        let p = ProtestParams::default();
        assert_eq!(evaluate_transition(&p, 1, 2, a0, &cfg, 1).unwrap(), 0.9);
        assert_eq!(evaluate_transition(&p, 1, 2, a0, &cfg, 2).unwrap(), 0.1);
        // de-escalation from low folds into stay
        assert_eq!(evaluate_transition(&p, 1, 0, a0, &cfg, 0).unwrap(), 1.0);
        let r: Vec<f64> = (0..3).map(|x| evaluate_reward(&p, 1, x, a0, &cfg).unwrap()).collect();
        assert_eq!(r, vec![8.0, -2.0, -12.0]);
    }

    #[test]
    fn site_contexts_only_see_their_own_site() {
        let d = build_domain(&ProtestParams::default()).unwrap();
        for ctx in d.context_space().contexts(FunctionKind::Transition, None) {
            for pair in d.neighborhood(&ctx).unwrap().pairs() {
                assert_eq!(pair.action, ctx.factor());
            }
        }
    }

    #[test]
    fn rule_tables_match_closed_form() {
        let p = ProtestParams::with_n(4);
        let d = build_domain(&p).unwrap();
        for ctx in d.context_space().contexts(FunctionKind::Transition, None) {
            let Context::Transition { factor, x, a0, x_next } = ctx else { unreachable!() };
            let nu = d.neighborhood(&ctx).unwrap();
            for cfg in enumerate_configs(nu.len(), p.n) {
                let table = d.evaluate(&ctx, &cfg).unwrap();
                let closed = evaluate_transition(&p, factor, x, a0, &cfg, x_next).unwrap();
                assert_eq!(table, closed);
            }
        }
        for ctx in d.context_space().contexts(FunctionKind::Observation, None) {
            let Context::Observation { factor, x_next, a0, obs } = ctx else { unreachable!() };
            let nu = d.neighborhood(&ctx).unwrap();
            for cfg in enumerate_configs(nu.len(), p.n) {
                let closed = evaluate_observation(&p, factor, x_next, a0, &cfg, flag(obs, factor)).unwrap();
                assert_eq!(d.evaluate(&ctx, &cfg).unwrap(), closed);
            }
        }
        for ctx in d.context_space().contexts(FunctionKind::Reward, None) {
            let Context::Reward { factor, x, a0 } = ctx else { unreachable!() };
            let nu = d.neighborhood(&ctx).unwrap();
            for cfg in enumerate_configs(nu.len(), p.n) {
                assert_eq!(d.evaluate(&ctx, &cfg).unwrap(), evaluate_reward(&p, factor, x, a0, &cfg).unwrap());
            }
        }
    }

    #[test]
    fn escalation_grows_with_pressure() {
        let p = ProtestParams::default();
        for t in 0..3 {
            for x in 0..2 {
                let esc: Vec<f64> = [Bucket::Low, Bucket::Mid, Bucket::High]
                    .iter()
                    .map(|&b| p.transition_prob(x, t, b, x + 1))
                    .collect();
                assert!(esc.windows(2).all(|w| w[0] <= w[1]), "{t} troops at {x}: {esc:?}");
            }
        }
    }

    #[test]
    fn mismatched_configuration_is_rejected() {
        let p = ProtestParams::default();
        assert!(evaluate_transition(&p, 0, 0, 1, &Configuration::zeros(0), 0).is_err());
    }

    #[test]
    fn invalid_params_are_rejected() {
        let p = ProtestParams { theta_lo: 0.6, ..ProtestParams::default() };
        assert!(build_domain(&p).is_err());
        assert!(build_domain(&ProtestParams::with_n(0)).is_err());
    }
}
