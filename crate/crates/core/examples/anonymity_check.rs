//! Checks that protest dynamics depend on who does what only through counts,
//! then shows the checker catching a function that breaks the symmetry.

use manyagent::hypergraph::{validate_anonymity, Context, FunctionKind};
use manyagent::protest::{build_domain, joint_value, ProtestParams};

fn main() -> manyagent::Result<()> {
    let p = ProtestParams::with_n(3);
    let d = build_domain(&p)?;
    let frames = d.agent_frames().to_vec();
    for kind in [FunctionKind::Transition, FunctionKind::Observation, FunctionKind::Reward] {
        let f = d.function(kind, None).expect("protest domains define every function");
        let contexts = d.context_space().contexts(kind, None);
        let r = validate_anonymity(|c, a| joint_value(&p, c, a, &frames), &f.graph, |c, cfg| d.evaluate(c, cfg), &contexts, &frames, d.frames())?;
        println!("{kind:?}: {} contexts x {} joint actions, anonymous: {}", r.checked_contexts, r.checked_profiles, r.holds());
    }

    let target = Context::Transition { factor: 0, x: 1, a0: 1, x_next: 2 };
    let f = d.function(FunctionKind::Transition, None).unwrap();
    let contexts = d.context_space().contexts(FunctionKind::Transition, None);
    let skewed = |c: &Context, a: &[usize]| {
        let bump = if *c == target && a[0] == 0 && a[1] == 1 { 1e-3 } else { 0.0 };
        joint_value(&p, c, a, &frames) + bump
    };
    let r = validate_anonymity(skewed, &f.graph, |c, cfg| d.evaluate(c, cfg), &contexts, &frames, d.frames())?;
    println!("skewed transition: {} violations", r.violations.len());
    for v in r.violations.iter().take(3) {
        println!("  {v:?}");
    }
    Ok(())
}
