//! Plans for the police in a small protest and compiles the plan into a
//! finite-state controller another agent could use as its model.

use manyagent::belief::{FactoredBelief, StructuredEngine};
use manyagent::domain::Domain;
use manyagent::planner::{solve_exact, Policy, DEFAULT_GAMMA};
use manyagent::population::{policy_to_fsc, PlanNode};
use manyagent::protest::{build_domain, ProtestParams};

fn plan_tree(policy: &Policy, history: &mut Vec<usize>, domain: &Domain) -> PlanNode {
    let action = policy.action_for(history).unwrap_or(0);
    if history.len() + 1 >= policy.horizon {
        return PlanNode::leaf(action);
    }
    let children = (0..domain.num_observations())
        .map(|o| {
            history.push(o);
            let child = plan_tree(policy, history, domain);
            history.pop();
            child
        })
        .collect();
    PlanNode::branch(action, children)
}

fn main() -> manyagent::Result<()> {
    let domain = build_domain(&ProtestParams::with_n(2))?;
    let b0 = FactoredBelief::initial(&domain)?;
    let sol = solve_exact(&StructuredEngine::new(&domain), &b0, 2, DEFAULT_GAMMA)?;
    println!("value {:.4} over {} beliefs", sol.value, sol.nodes);
    print!("{}", sol.policy.to_text(&domain));

    let plan = plan_tree(&sol.policy, &mut Vec::new(), &domain);
    let fsc = policy_to_fsc(&plan, "police-plan", domain.agent0_frame(), domain.num_actions(), domain.num_observations())?;
    println!("controller with {} nodes", fsc.num_nodes());
    for n in 0..fsc.num_nodes() {
        let dist = fsc.fsc_action_dist(n)?;
        let a = dist.iter().position(|&p| p == 1.0).unwrap_or(0);
        println!("  node {n}: {}", domain.action_name(a));
    }
    Ok(())
}
